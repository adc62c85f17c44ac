# -*- coding: utf-8 -*-
#
# test_commands.py
#
# Date:     6 April 2026
# Copyright (c) 2026, the htmm developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

from __future__ import absolute_import, division, print_function, unicode_literals

import csv
import io
import json
import os
import shutil
import tempfile
import unittest

from htmm import run_htmm
from htmm.errors import EXIT_OK, EXIT_USER, ValidationError
from htmm.models import load_params
from htmm.settings import load
from htmm.trees import read_trees

from .test_helpers import get_test_data_file, setup_logging

DATA = get_test_data_file("small.trees")


def read_text(filename):
    with io.open(filename, "rt", encoding="utf-8") as fp:
        return fp.read()


def read_json(filename):
    with io.open(filename, "rt", encoding="utf-8") as fp:
        return json.load(fp)


class CommandTestCase(unittest.TestCase):

    def setUp(self):
        setup_logging()
        self.output_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.output_dir)

    def path(self, *parts):
        return os.path.join(self.output_dir, *parts)

    def run_ok(self, *argv):
        self.assertEqual(run_htmm(list(argv)), EXIT_OK)

    def train(self, out="model", kind="bu", *extra):
        self.run_ok("train", "--data", DATA, "--kind", kind, "--states", "2",
                    "--max-iters", "20", "--out", self.path(out), *extra)
        return self.path(out)


class TestSettings(CommandTestCase):

    def test_defaults(self):
        s = load(["gibbs", "--data", DATA, "--out", self.path("g")])
        self.assertEqual(s.COMMAND, "gibbs")
        self.assertEqual((s.SWEEPS, s.BURN_IN, s.THIN, s.CHAINS),
                         (1000, 200, 10, 1))
        self.assertEqual(s.ALPHA_POSITION, [1.0])
        self.assertEqual(s.SEED, 0)

    def test_required(self):
        with self.assertRaises(ValidationError):
            load(["train", "--data", DATA, "--states", "2", "--out", self.path("x")])
        with self.assertRaises(ValidationError):
            load(["score", "--data", DATA])
        with self.assertRaises(ValidationError):
            load(["sample", "--model", DATA])

    def test_missing_file(self):
        with self.assertRaises(ValidationError):
            load(["validate", "--data", self.path("nonexistent.trees")])

    def test_bad_flags(self):
        with self.assertRaises(ValidationError):
            load(["train", "--data", DATA, "--kind", "lr", "--states", "2",
                  "--out", self.path("x")])
        with self.assertRaises(ValidationError):
            load(["gibbs", "--data", DATA, "--out", self.path("g"),
                  "--sweeps", "100", "--burn-in", "100"])
        with self.assertRaises(ValidationError):
            load(["validate", "--data", DATA, "--threads", "0"])

    def test_config_file(self):
        config = self.path("config.json")
        with io.open(config, "wt", encoding="utf-8") as fp:
            fp.write(json.dumps({"kind": "td", "states": 3, "max-iters": 7,
                                 "SMOOTHING": 0.5}))
        s = load(["train", "--data", DATA, "--out", self.path("x"),
                  "--config", config, "--max-iters", "9"])
        self.assertEqual(s.KIND, "td")
        self.assertEqual(s.STATES, 3)
        self.assertEqual(s.MAX_ITERS, 9)
        self.assertEqual(s.SMOOTHING, 0.5)

    def test_config_unknown_key(self):
        config = self.path("config.json")
        with io.open(config, "wt", encoding="utf-8") as fp:
            fp.write(json.dumps({"no-such-flag": 1}))
        with self.assertRaises(ValidationError):
            load(["validate", "--data", DATA, "--config", config])

    def test_recorded(self):
        s = load(["validate", "--data", DATA, "--quiet"])
        rec = s.recorded()
        self.assertIn("DATA", rec)
        self.assertNotIn("LOG_LEVEL", rec)


class TestTrain(CommandTestCase):

    def test_outputs(self):
        out = self.train()
        params = load_params(os.path.join(out, "model.json"))
        self.assertEqual((params.kind, params.C, params.M, params.L),
                         ('bu', 2, 3, 2))
        with io.open(os.path.join(out, "trace.csv"), "rt") as fp:
            rows = list(csv.reader(fp))
        self.assertEqual(rows[0], ["iteration", "log_likelihood"])
        self.assertGreaterEqual(len(rows), 2)
        meta = read_json(os.path.join(out, "metadata.json"))
        self.assertEqual(meta['COMMAND'], 'train')
        self.assertEqual(meta['SEED'], 0)
        self.assertEqual(meta['ITERATIONS'], len(rows) - 1)
        self.assertEqual(meta['CONFIG']['STATES'], 2)

    def test_reproducible(self):
        a = self.train("a", "td", "--seed", "5")
        b = self.train("b", "td", "--seed", "5", "--threads", "2")
        for name in ("model.json", "trace.csv"):
            self.assertEqual(read_text(os.path.join(a, name)),
                             read_text(os.path.join(b, name)))

    def test_score_matches_training(self):
        out = self.train()
        scores = self.path("scores.txt")
        self.run_ok("score", "--model", os.path.join(out, "model.json"),
                    "--data", DATA, "--out", scores)
        lines = read_text(scores).splitlines()
        self.assertEqual(len(lines), 5)
        footer = json.loads(lines[-1])
        meta = read_json(os.path.join(out, "metadata.json"))
        self.assertLess(abs(footer['total'] - meta['FINAL_LOG_LIKELIHOOD']), 1e-9)
        self.assertEqual(footer['nodes'], 12)
        self.assertEqual(footer['trees'], 4)
        self.assertTrue(os.path.exists(scores + ".metadata.json"))

    def test_missing_data(self):
        self.assertEqual(run_htmm(["train", "--data", self.path("none.trees"),
                                   "--kind", "td", "--states", "2",
                                   "--out", self.path("m")]), EXIT_USER)

    def test_broken_data(self):
        self.assertEqual(run_htmm(["train", "--data",
                                   get_test_data_file("broken.trees"),
                                   "--kind", "td", "--states", "2",
                                   "--out", self.path("m")]), EXIT_USER)
        self.assertFalse(os.path.exists(os.path.join(self.path("m"),
                                                     "trace.csv")))


class TestScore(CommandTestCase):

    def test_kind_mismatch(self):
        out = self.train(kind="td")
        self.assertEqual(run_htmm(["score", "--model",
                                   os.path.join(out, "model.json"),
                                   "--kind", "bu", "--data", DATA,
                                   "--out", self.path("s.txt")]), EXIT_USER)

    def test_bad_model(self):
        model = self.path("model.json")
        with io.open(model, "wt", encoding="utf-8") as fp:
            fp.write('{"kind": "td", "root_prior": [0.5, 0.6]}')
        self.assertEqual(run_htmm(["score", "--model", model, "--data", DATA,
                                   "--out", self.path("s.txt")]), EXIT_USER)


class TestSample(CommandTestCase):

    def test_random_skeletons(self):
        out = self.train()
        trees = self.path("trees.txt")
        self.run_ok("sample", "--model", os.path.join(out, "model.json"),
                    "--nodes", "7", "--count", "5", "--seed", "3", "--out", trees)
        sampled = read_trees(trees, M=3, L=2)
        self.assertEqual(len(sampled), 5)
        self.assertTrue(all(t.size <= 7 for t in sampled))

        again = self.path("again.txt")
        self.run_ok("sample", "--model", os.path.join(out, "model.json"),
                    "--nodes", "7", "--count", "5", "--seed", "3", "--out", again)
        self.assertEqual(read_text(trees), read_text(again))

    def test_data_skeletons(self):
        out = self.train(kind="td")
        trees = self.path("trees.txt")
        self.run_ok("sample", "--model", os.path.join(out, "model.json"),
                    "--data", DATA, "--count", "2", "--out", trees)
        sampled = read_trees(trees, M=3, L=2)
        original = read_trees(DATA)
        self.assertEqual(len(sampled), 8)
        for n, t in enumerate(original):
            self.assertEqual(sampled[2 * n].children, t.children)


class TestGibbs(CommandTestCase):

    def test_outputs(self):
        out = self.path("gibbs")
        self.run_ok("gibbs", "--data", DATA, "--out", out, "--truncation", "4",
                    "--sweeps", "6", "--burn-in", "2", "--thin", "2",
                    "--chains", "2", "--seed", "1")
        for c in range(2):
            chain = os.path.join(out, "chain-%d" % c)
            samples = sorted(f for f in os.listdir(chain) if f.startswith("sample-"))
            self.assertEqual(samples, ["sample-0000.json", "sample-0001.json"])
            with io.open(os.path.join(chain, "diagnostics.csv"), "rt") as fp:
                rows = list(csv.reader(fp))
            self.assertEqual(rows[0], ["sweep", "joint_log_prob", "active_states"])
            self.assertEqual(len(rows), 7)
            sample = read_json(os.path.join(chain, samples[0]))
            self.assertEqual(sample['kind'], 'bu')
            self.assertEqual(len(sample['beta']), 4)
        meta = read_json(os.path.join(out, "metadata.json"))
        self.assertEqual(len(meta['CHAINS']), 2)
        self.assertNotEqual(meta['CHAINS'][0]['seed'], meta['CHAINS'][1]['seed'])
        self.assertEqual(meta['CHAINS'][0]['samples'], 2)
        self.assertFalse(meta['PARTIAL'])

    def test_sweeps_not_above_burn_in(self):
        self.assertEqual(run_htmm(["gibbs", "--data", DATA, "--out",
                                   self.path("g"), "--sweeps", "10",
                                   "--burn-in", "10"]), EXIT_USER)

    def test_position_alphas(self):
        self.assertEqual(run_htmm(["gibbs", "--data", DATA, "--out",
                                   self.path("g"), "--sweeps", "3",
                                   "--burn-in", "0", "--alpha-position",
                                   "1,2,3"]), EXIT_USER)


class TestValidate(CommandTestCase):

    def test_stats(self):
        report = self.path("stats.json")
        self.run_ok("validate", "--data", DATA, "--out", report)
        stats = read_json(report)
        self.assertEqual(stats['trees'], 4)
        self.assertEqual(stats['nodes'], 12)
        self.assertEqual(stats['label_counts'], [4, 4, 4])
        self.assertEqual(stats['outdegree_histogram'], {"0": 7, "1": 2, "2": 3})

    def test_model(self):
        out = self.train()
        report = self.path("stats.json")
        self.run_ok("validate", "--data", DATA, "--model",
                    os.path.join(out, "model.json"), "--out", report)
        self.assertTrue(read_json(report)['model']['compatible'])

    def test_model_too_small(self):
        out = self.train()
        wide = self.path("wide.trees")
        with io.open(wide, "wt", encoding="utf-8") as fp:
            fp.write("(0 (1) (2) (0))\n")
        self.assertEqual(run_htmm(["validate", "--data", wide, "--model",
                                   os.path.join(out, "model.json"),
                                   "--out", self.path("s.json")]), EXIT_USER)

    def test_broken(self):
        self.assertEqual(run_htmm(["validate", "--data",
                                   get_test_data_file("broken.trees")]),
                         EXIT_USER)

    def test_alphabet(self):
        report = self.path("stats.json")
        self.run_ok("validate", "--data", DATA, "--alphabet",
                    get_test_data_file("abc.alphabet"), "--out", report)
        self.assertEqual(read_json(report)['alphabet_size'], 3)


test_suite = unittest.TestSuite()
for case in (TestSettings, TestTrain, TestScore, TestSample, TestGibbs,
             TestValidate):
    test_suite.addTest(unittest.TestLoader().loadTestsFromTestCase(case))

# -*- coding: utf-8 -*-
#
# test_util.py
#
# Date:     3 March 2026
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

import argparse
import os
import shutil
import tempfile
import unittest

import numpy as np

from htmm import util
from htmm.errors import ValidationError
from htmm.settings import parser


class TestSmallUtilFunctions(unittest.TestCase):

    def test_uscore_to_camel(self):
        self.assertEqual(util.uscore_to_camel('test_name'), 'TestName')

    def test_classname(self):
        self.assertEqual(util.classname('test_class'), 'TestClass')

        self.assertEqual(util.classname(
            'test_class', 'Suffix'), 'TestClassSuffix')

    def test_derive_seed(self):
        self.assertEqual(util.derive_seed(5, 2), util.derive_seed(5, 2))
        seeds = set(util.derive_seed(5, c) for c in range(50))
        self.assertEqual(len(seeds), 50)
        self.assertNotEqual(util.derive_seed(5, 1), util.derive_seed(6, 0))

    def test_arg_types(self):
        self.assertEqual(util.positive_int("3"), 3)
        self.assertEqual(util.nonneg_int("0"), 0)
        self.assertEqual(util.nonneg_float("0"), 0.0)
        self.assertEqual(util.float_list("1, 2.5"), [1.0, 2.5])
        for func, value in ((util.positive_int, "0"), (util.nonneg_int, "-1"),
                            (util.positive_float, "nan"),
                            (util.nonneg_float, "x"),
                            (util.float_list, "1,-2")):
            with self.assertRaises(argparse.ArgumentTypeError):
                func(value)


class TestSampleCategorical(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_point_mass(self):
        for _ in range(100):
            self.assertEqual(util.sample_categorical(self.rng, [0, 0, 2.5, 0]), 2)

    def test_no_mass(self):
        with self.assertRaises(ValueError):
            util.sample_categorical(self.rng, [0.0, 0.0])

    def test_frequencies(self):
        p = np.array([1.0, 3.0])
        n = 10000
        hits = sum(util.sample_categorical(self.rng, p) for _ in range(n))
        sigma = np.sqrt(n * 0.75 * 0.25)
        self.assertLess(abs(hits - 0.75 * n), 3 * sigma)

    def test_one_draw_per_call(self):
        a = np.random.default_rng(1)
        b = np.random.default_rng(1)
        util.sample_categorical(a, [1, 0, 0])
        util.sample_categorical(b, [0.2, 0.3, 0.5])
        self.assertEqual(a.random(), b.random())


class TestJson(unittest.TestCase):

    def setUp(self):
        self.output_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.output_dir)

    def test_jsonable(self):
        obj = {'a': np.array([1.5, np.inf]), 2: (np.int64(3), float('nan'))}
        self.assertEqual(util.jsonable(obj), {'a': [1.5, None], '2': [3, None]})

    def test_float_round_trip(self):
        filename = os.path.join(self.output_dir, "x.json")
        values = [0.1, 1 / 3.0, 1e-300, 123456.789012345678]
        util.dump_json({'v': values}, filename)
        self.assertEqual(util.load_json(filename)['v'], values)

    def test_invalid(self):
        filename = os.path.join(self.output_dir, "x.json")
        with open(filename, "w") as fp:
            fp.write("[1, 2")
        with self.assertRaises(ValidationError):
            util.load_json(filename)
        with self.assertRaises(ValidationError):
            util.load_json(os.path.join(self.output_dir, "missing.json"))

    def test_ensure_dir(self):
        path = os.path.join(self.output_dir, "a", "b")
        self.assertEqual(util.ensure_dir(path), path)
        self.assertTrue(os.path.isdir(path))


class TestArgParser(unittest.TestCase):

    def test_dest_for(self):
        sub = parser.get_subparser('train')
        self.assertEqual(sub.dest_for('max-iters'), 'MAX_ITERS')
        self.assertEqual(sub.dest_for('--rel-tol'), 'REL_TOL')
        self.assertEqual(sub.dest_for('SMOOTHING'), 'SMOOTHING')
        self.assertIsNone(sub.dest_for('truncation'))

    def test_types(self):
        sub = parser.get_subparser('gibbs')
        self.assertIs(sub.get_type('THIN'), util.positive_int)
        self.assertIn('THIN', sub)
        self.assertNotIn('KIND', sub)
        self.assertEqual(parser.get_subparser('train').get_choices('KIND'),
                         ('td', 'bu'))

    def test_error(self):
        with self.assertRaises(ValidationError):
            parser.get_subparser('train').error("bad")


test_suite = unittest.TestSuite()
for case in (TestSmallUtilFunctions, TestSampleCategorical, TestJson,
             TestArgParser):
    test_suite.addTest(unittest.TestLoader().loadTestsFromTestCase(case))

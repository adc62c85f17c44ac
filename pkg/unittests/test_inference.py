# -*- coding: utf-8 -*-
#
# test_inference.py
#
# Date:     26 March 2026
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

import math
import unittest

import numpy as np

from htmm.aggregators import WorkerPool
from htmm.errors import NumericalError, ValidationError
from htmm.inference import Posteriors, brute_force, downward_bu, downward_td, \
    log_likelihood, posteriors, score_dataset, upward_bu, upward_td
from htmm.models import BuParams, TdParams
from htmm.trees import Dataset, parse_tree

from .test_helpers import random_params, random_tree, setup_logging, single_node

ORACLE_CASES = 200
# Keeps C^U times the number of switch combinations below the enumeration limit
MAX_NODES = {1: 8, 2: 8, 3: 6}


def rel_close(a, b, rtol):
    return abs(a - b) <= rtol * max(1.0, abs(b))


class OracleTest(unittest.TestCase):
    """Message passing against exhaustive enumeration on one random case."""

    def __init__(self, kind, case):
        unittest.TestCase.__init__(self)
        self.kind = kind
        self.case = case

    def __str__(self):
        return "%s oracle case %d" % (self.kind, self.case)

    def runTest(self):
        rng = np.random.default_rng(1000 * (self.kind == 'bu') + self.case)
        C = int(rng.integers(1, 4))
        L = int(rng.integers(1, 4))
        M = int(rng.integers(2, 5))
        params = random_params(self.kind, C, M, L, rng)
        tree = random_tree(rng, MAX_NODES[C], L, M)

        post = posteriors(params, tree)
        ll, expected = brute_force(self.kind, params, tree)
        self.assertTrue(rel_close(post.log_likelihood, ll, 1e-8),
                        "%r != %r" % (post.log_likelihood, ll))
        np.testing.assert_allclose(post.node_marginal, expected.node_marginal,
                                   rtol=0, atol=1e-7)
        if self.kind == 'td':
            np.testing.assert_allclose(post.td_pair, expected.td_pair,
                                       rtol=0, atol=1e-7)
        else:
            np.testing.assert_allclose(post.bu_triple, expected.bu_triple,
                                       rtol=0, atol=1e-7)
        self.assertTrue(post.check(tree))
        self.assertTrue(expected.check(tree))


class TestClosedForms(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(3)

    def test_single_state(self):
        emission = [[0.5, 0.3, 0.2]]
        td = TdParams([1.0], [[1.0]], emission, L=3)
        bu = BuParams([1.0], np.ones((3, 1, 1)), [0.2, 0.3, 0.5], emission)
        for _ in range(20):
            t = random_tree(self.rng, 12, 3, 3)
            expected = sum(math.log(emission[0][t.labels[u]]) for u in t.nodes)
            self.assertAlmostEqual(log_likelihood(td, t), expected, places=10)
            self.assertAlmostEqual(log_likelihood(bu, t), expected, places=10)

    def test_uniform_emission(self):
        for kind in ('td', 'bu'):
            p = random_params(kind, 3, 4, 2, self.rng)
            uniform = np.full((3, 4), 0.25)
            if kind == 'td':
                p = TdParams(p.root_prior, p.transition, uniform, p.L)
            else:
                p = BuParams(p.leaf_prior, p.transition, p.switch, uniform)
            t = random_tree(self.rng, 15, 2, 4)
            self.assertAlmostEqual(log_likelihood(p, t), -t.size * math.log(4),
                                   places=10)

    def test_single_node(self):
        p = random_params('bu', 2, 3, 2, self.rng)
        expected = math.log(np.dot(p.leaf_prior, p.emission[:, 1]))
        self.assertAlmostEqual(log_likelihood(p, single_node(1)), expected,
                               places=12)
        post = posteriors(p, single_node(1))
        np.testing.assert_allclose(post.node_marginal[1].sum(), 1.0)


class TestInvariances(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_state_permutation(self):
        for kind in ('td', 'bu'):
            for _ in range(20):
                p = random_params(kind, 3, 3, 2, self.rng)
                t = random_tree(self.rng, 12, 2, 3)
                perm = self.rng.permutation(3)
                self.assertLess(abs(log_likelihood(p, t) -
                                    log_likelihood(p.permute_states(perm), t)),
                                1e-10)

    def _tree_with_children(self, L, M):
        while True:
            t = random_tree(self.rng, 8, L, M, branching=0.9)
            if t.size > 1:
                return t

    def test_td_ignores_positions(self):
        for _ in range(100):
            p = random_params('td', 2, 3, 2, self.rng)
            t = self._tree_with_children(2, 3)
            self.assertLess(abs(log_likelihood(p, t) -
                                log_likelihood(p, t.swapped(1, 0, 1))), 1e-10)

    def test_bu_depends_on_positions(self):
        changed = 0
        for _ in range(100):
            p = random_params('bu', 2, 3, 2, self.rng)
            t = self._tree_with_children(2, 3)
            if abs(log_likelihood(p, t) -
                   log_likelihood(p, t.swapped(1, 0, 1))) > 1e-6:
                changed += 1
        self.assertGreaterEqual(changed, 90)


class TestPosteriors(unittest.TestCase):

    def test_check_detects_bad_marginal(self):
        t = parse_tree("(0 (1))")
        eps = np.array([[0, 0], [0.5, 0.5], [0.7, 0.7]])
        with self.assertRaises(NumericalError):
            Posteriors(eps, -1.0).check(t)

    def test_check_detects_inconsistent_pair(self):
        t = parse_tree("(0 (1))")
        eps = np.array([[0, 0], [0.5, 0.5], [0.5, 0.5]])
        pair = np.zeros((3, 2, 2))
        pair[2] = [[0.5, 0], [0.5, 0]]
        with self.assertRaises(NumericalError):
            Posteriors(eps, -1.0, td_pair=pair).check(t)

    def test_switch_posterior(self):
        rng = np.random.default_rng(4)
        p = random_params('bu', 2, 2, 2, rng)
        t = parse_tree("(0 (1) (1 (0)))")
        post = posteriors(p, t)
        sw = post.switch_posterior(1)
        self.assertAlmostEqual(sw.sum(), 1.0, places=12)
        np.testing.assert_allclose(post.switch_posterior(3), [1.0, 0.0])

    def test_zero_probability_tree(self):
        p = TdParams([1.0, 0.0], np.eye(2), [[1.0, 0.0], [1.0, 0.0]])
        t = parse_tree("(1)")
        tables = upward_td(p, t)
        self.assertEqual(tables.log_likelihood, -np.inf)
        with self.assertRaises(NumericalError):
            downward_td(p, t, tables)
        ll, post = brute_force('td', p, t)
        self.assertEqual(ll, -np.inf)
        self.assertIsNone(post)

    def test_table_mismatch(self):
        rng = np.random.default_rng(5)
        p = random_params('bu', 2, 2, 2, rng)
        tables = upward_bu(p, parse_tree("(0 (1))"))
        with self.assertRaises(ValidationError):
            downward_bu(p, parse_tree("(0 (1) (1))"), tables)
        with self.assertRaises(ValidationError):
            downward_td(random_params('td', 2, 2, 2, rng),
                        parse_tree("(0 (1))"), tables)

    def test_tree_too_wide(self):
        p = random_params('td', 2, 2, 1, np.random.default_rng(6))
        with self.assertRaises(ValidationError):
            upward_td(p, parse_tree("(0 (1) (1))"))


class TestBruteForce(unittest.TestCase):

    def test_too_large(self):
        p = random_params('td', 3, 2, 2, np.random.default_rng(0))
        t = random_tree(np.random.default_rng(0), 30, 2, 2, branching=1.0)
        with self.assertRaises(ValidationError):
            brute_force('td', p, t)
        with self.assertRaises(ValidationError):
            brute_force('td', p, parse_tree("(0 (1) (1))"), limit=10)

    def test_kind_checked(self):
        p = random_params('td', 2, 2, 2, np.random.default_rng(0))
        with self.assertRaises(ValidationError):
            brute_force('bu', p, single_node(0))


class TestScoreDataset(unittest.TestCase):

    def setUp(self):
        setup_logging()
        rng = np.random.default_rng(8)
        self.params = random_params('bu', 3, 4, 2, rng)
        self.dataset = Dataset([random_tree(rng, 10, 2, 4) for _ in range(40)],
                               4, 2)

    def test_empty(self):
        res = score_dataset('bu', self.params, Dataset([], 4, 2))
        self.assertEqual(res.total, 0.0)
        self.assertEqual(res.per_tree, [])
        self.assertIsNone(res.perplexity)
        self.assertEqual(res.nodes, 0)

    def test_uniform_single_state(self):
        p = TdParams([1.0], [[1.0]], np.full((1, 4), 0.25), L=2)
        res = score_dataset('td', p, self.dataset)
        self.assertAlmostEqual(res.perplexity, 4.0, places=10)

    def test_additive(self):
        res = score_dataset('bu', self.params, self.dataset, chunk_size=7)
        expected = [log_likelihood(self.params, t) for t in self.dataset]
        self.assertEqual(res.per_tree, expected)
        first, rest = self.dataset.split(15)
        a = score_dataset('bu', self.params, first).total
        b = score_dataset('bu', self.params, rest).total
        self.assertAlmostEqual(res.total, a + b, places=9)
        self.assertEqual(res.nodes, self.dataset.node_count)
        self.assertAlmostEqual(res.perplexity,
                               math.exp(-res.total / res.nodes), places=12)

    def test_zero_probability(self):
        p = TdParams([1.0], [[1.0]], [[0.5, 0.5, 0.0, 0.0]], L=2)
        res = score_dataset('td', p, Dataset([parse_tree("(0 (2))")], 4, 2))
        self.assertEqual(res.total, -np.inf)
        self.assertEqual(res.perplexity, float('inf'))

    def test_model_too_small(self):
        with self.assertRaises(ValidationError):
            score_dataset('bu', self.params, Dataset([single_node(5)], 6, 2))

    def test_worker_pool(self):
        serial = score_dataset('bu', self.params, self.dataset, chunk_size=8)
        with WorkerPool(2) as pool:
            parallel = score_dataset('bu', self.params, self.dataset,
                                     pool=pool, chunk_size=8)
        self.assertEqual(serial.per_tree, parallel.per_tree)
        self.assertEqual(serial.total, parallel.total)


test_suite = unittest.TestSuite()
for kind in ('td', 'bu'):
    for case in range(ORACLE_CASES // 2):
        test_suite.addTest(OracleTest(kind, case))
for case in (TestClosedForms, TestInvariances, TestPosteriors, TestBruteForce,
             TestScoreDataset):
    test_suite.addTest(unittest.TestLoader().loadTestsFromTestCase(case))

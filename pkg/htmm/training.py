# -*- coding: utf-8 -*-
#
# training.py
#
# Date:     11 March 2026
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

"""Expectation-Maximization for the finite TD and BU models."""

from __future__ import absolute_import, division, print_function, unicode_literals

import math

from collections import Counter

import numpy as np

from htmm import inference
from htmm.aggregators import default_chunks
from htmm.errors import NumericalError, ValidationError
from htmm.loggers import get_logger
from htmm.models import BuParams, TdParams, check_kind, init_random

logger = get_logger(__name__)

DEFAULT_SMOOTHING = 1e-6
DEFAULT_REL_TOL = 1e-6
DEFAULT_MAX_ITERS = 100
E_STEP_CHUNK = 64

# Switch fixed point controls
MM_MAX_ITERS = 1000
MM_TOL = 1e-13


class EmConfig(object):

    def __init__(self, max_iters=DEFAULT_MAX_ITERS, rel_tol=DEFAULT_REL_TOL,
                 smoothing=DEFAULT_SMOOTHING, seed=0, init_concentration=1.0,
                 restarts=1):
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.smoothing = smoothing
        self.seed = seed
        self.init_concentration = init_concentration
        self.restarts = restarts
        self.validate()

    def validate(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1, got %r" % self.max_iters)
        if not self.rel_tol > 0:
            raise ValidationError("rel_tol must be > 0, got %r" % self.rel_tol)
        if not self.smoothing >= 0:
            raise ValidationError("smoothing must be >= 0, got %r" % self.smoothing)
        if not self.init_concentration > 0:
            raise ValidationError("init_concentration must be > 0, got %r"
                                  % self.init_concentration)
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ValidationError("restarts must be >= 1, got %r" % self.restarts)
        return self

    def to_dict(self):
        return dict(self.__dict__)


class EmTrace(object):
    """Total log-likelihood after every EM update of one run."""

    def __init__(self, seed=None, restart=0):
        self.seed = seed
        self.restart = restart
        self.initial_log_likelihood = None
        self.log_likelihoods = []
        self.converged = False

    @property
    def iterations(self):
        return len(self.log_likelihoods)

    @property
    def final(self):
        return self.log_likelihoods[-1] if self.log_likelihoods else None

    @property
    def best(self):
        return max(self.log_likelihoods) if self.log_likelihoods else None

    def append(self, ll):
        self.log_likelihoods.append(ll)

    def is_monotone(self, slack=1e-8):
        lls = [self.initial_log_likelihood] + self.log_likelihoods
        return all(b >= a - slack for a, b in zip(lls, lls[1:]))

    def rows(self):
        return [(n + 1, ll) for n, ll in enumerate(self.log_likelihoods)]

    def to_dict(self):
        return {'seed': self.seed,
                'restart': self.restart,
                'initial_log_likelihood': self.initial_log_likelihood,
                'log_likelihoods': list(self.log_likelihoods),
                'iterations': self.iterations,
                'converged': self.converged}


class ExpectedCounts(object):
    """Posterior expected sufficient statistics, summed over trees.

    TD: root (C), transition (C, C) as parent -> child, emission (C, M).
    BU: leaf (C), transition (L, C, C) as [l][parent, child], switch (L),
    emission (C, M), plus `patterns`, the number of internal nodes per set of
    occupied positions (needed by the renormalised switch update).
    """

    def __init__(self, kind, C, M, L):
        self.kind = kind
        self.C, self.M, self.L = C, M, L
        self.emission = np.zeros((C, M))
        if kind == 'td':
            self.root = np.zeros(C)
            self.transition = np.zeros((C, C))
        else:
            self.leaf = np.zeros(C)
            self.transition = np.zeros((L, C, C))
            self.switch = np.zeros(L)
            self.patterns = Counter()
        self.log_likelihood = 0.0
        self.trees = 0
        self.nodes = 0

    def add_tree(self, tree, post):
        labels = tree.labels[1:]
        eps = post.node_marginal[1:]
        onehot = np.zeros((tree.size, self.M))
        onehot[np.arange(tree.size), labels] = 1.0
        self.emission += eps.T.dot(onehot)
        if self.kind == 'td':
            self.root += post.node_marginal[1]
            self.transition += post.td_pair[2:].sum(axis=0)
        else:
            self.leaf += post.node_marginal[tree.leaves].sum(axis=0)
            self.transition += post.bu_triple.sum(axis=0)
            self.switch += post.bu_triple.sum(axis=(0, 2, 3))
            for u in tree.internal_nodes:
                self.patterns[tuple(l for l, _ in tree.occupied(u))] += 1
        self.log_likelihood += post.log_likelihood
        self.trees += 1
        self.nodes += tree.size
        return self

    def merge(self, other):
        if (other.kind, other.C, other.M, other.L) != (self.kind, self.C,
                                                       self.M, self.L):
            raise ValueError("Cannot merge counts of different models")
        self.emission += other.emission
        self.transition += other.transition
        if self.kind == 'td':
            self.root += other.root
        else:
            self.leaf += other.leaf
            self.switch += other.switch
            self.patterns.update(other.patterns)
        self.log_likelihood += other.log_likelihood
        self.trees += other.trees
        self.nodes += other.nodes
        return self

    def arrays(self):
        if self.kind == 'td':
            return (self.root, self.transition, self.emission)
        return (self.leaf, self.transition, self.switch, self.emission)


def _e_chunk(args):
    kind, params, trees = args
    counts = ExpectedCounts(kind, params.C, params.M, params.L)
    for tree in trees:
        counts.add_tree(tree, inference.posteriors(params, tree))
    return counts


def e_step(kind, params, dataset, pool=None, chunk_size=E_STEP_CHUNK):
    """Accumulate expected counts over the dataset.

    Trees are processed in fixed-size chunks merged in order, so the result
    does not depend on how many workers `pool` has."""
    check_kind(kind, params)
    params.check_dataset(dataset)
    chunks = [(kind, params, c) for c in default_chunks(dataset, chunk_size)]
    if pool is not None:
        parts = pool.map(_e_chunk, chunks)
    else:
        parts = [_e_chunk(c) for c in chunks]
    counts = ExpectedCounts(kind, params.C, params.M, params.L)
    for p in parts:
        counts.merge(p)
    return counts


def normalise_counts(counts, smoothing, axis=-1):
    """(counts + smoothing) normalised along axis; all-zero slices become
    uniform."""
    c = np.asarray(counts, dtype=np.float64) + smoothing
    total = c.sum(axis=axis, keepdims=True)
    n = c.shape[axis]
    with np.errstate(invalid='ignore', divide='ignore'):
        out = np.where(total > 0, c / total, 1.0 / n)
    return out


def switch_update(counts, patterns, smoothing=0.0, start=None):
    """Maximise sum_l c_l log phi_l - sum_P n_P log sum_{m in P} phi_m.

    This is the expected complete log-likelihood of the switch when each
    internal node renormalises phi over its occupied positions P. Smoothing
    adds s to every c_l together with L*s pseudo-nodes of full out-degree.
    When every internal node is full the maximiser is the normalised count
    vector; otherwise a minorize-maximize fixed point is iterated from
    `start`, which never decreases the objective.
    """
    c = np.asarray(counts, dtype=np.float64)
    L = len(c)
    full = tuple(range(L))
    patterns = Counter({tuple(p): n for p, n in patterns.items() if n > 0})
    if smoothing > 0:
        patterns[full] += L * smoothing
    a = c + smoothing
    if not a.sum() > 0:
        return np.full(L, 1.0 / L)
    if all(len(p) == L for p in patterns):
        return a / a.sum()

    members = np.zeros((len(patterns), L))
    weights = np.zeros(len(patterns))
    for k, (p, n) in enumerate(patterns.items()):
        members[k, list(p)] = 1.0
        weights[k] = n

    phi = None
    if start is not None:
        phi = np.array(start, dtype=np.float64)
        if (members.dot(phi) <= 0).any():
            phi = None
    if phi is None:
        phi = np.full(L, 1.0 / L)

    for _ in range(MM_MAX_ITERS):
        denom = (weights / members.dot(phi)).dot(members)
        with np.errstate(invalid='ignore', divide='ignore'):
            new = np.where(denom > 0, a / denom, 0.0)
        new /= new.sum()
        delta = np.abs(new - phi).max()
        phi = new
        if delta < MM_TOL:
            break
    return phi


def m_step(kind, counts, smoothing=0.0, previous=None):
    """New parameters from expected counts.

    `previous` seeds the BU switch fixed point; every other block has a
    closed form."""
    check_kind(kind)
    if not smoothing >= 0:
        raise ValidationError("smoothing must be >= 0, got %r" % smoothing)
    for arr in counts.arrays():
        if (arr < -1e-9).any():
            raise NumericalError("Negative expected counts (min %r)" % arr.min())
    arrays = [np.clip(a, 0.0, None) for a in counts.arrays()]

    if kind == 'td':
        root, transition, emission = arrays
        return TdParams(normalise_counts(root, smoothing),
                        normalise_counts(transition, smoothing, axis=1),
                        normalise_counts(emission, smoothing, axis=1),
                        L=counts.L)

    leaf, transition, switch, emission = arrays
    start = previous.switch if previous is not None else None
    return BuParams(normalise_counts(leaf, smoothing),
                    normalise_counts(transition, smoothing, axis=1),
                    switch_update(switch, counts.patterns, smoothing, start),
                    normalise_counts(emission, smoothing, axis=1))


def _relative_improvement(prev, cur):
    if not math.isfinite(prev):
        return float('inf') if math.isfinite(cur) else 0.0
    return (cur - prev) / max(abs(prev), 1e-300)


def _fit_once(kind, dataset, C, config, seed, restart, pool):
    params = init_random(kind, C, dataset.M, dataset.L, seed,
                         config.init_concentration)
    trace = EmTrace(seed, restart)
    counts = e_step(kind, params, dataset, pool)
    trace.initial_log_likelihood = prev = counts.log_likelihood
    logger.debug("Restart %d (seed %d): initial log-likelihood %.6f",
                 restart, seed, prev)

    best_params, best_ll = None, -np.inf
    for it in range(1, config.max_iters + 1):
        new = m_step(kind, counts, config.smoothing, params)
        counts = e_step(kind, new, dataset, pool)
        ll = counts.log_likelihood
        trace.append(ll)
        if best_params is None or ll > best_ll:
            best_params, best_ll = new, ll
        rel = _relative_improvement(prev, ll)
        logger.debug("EM iteration %d: log-likelihood %.6f (rel. change %.3e)",
                     it, ll, rel)
        if config.smoothing == 0 and ll < prev - 1e-8:
            logger.warning("Log-likelihood decreased at iteration %d "
                           "(%.10f -> %.10f)", it, prev, ll)
        params, prev = new, ll
        if rel < config.rel_tol:
            trace.converged = True
            break
    return best_params, trace


def fit(kind, dataset, C, config=None, pool=None):
    """Train a model with C hidden states; returns (params, EmTrace).

    With several restarts (seeds config.seed + r) the run reaching the highest
    log-likelihood wins."""
    check_kind(kind)
    config = (config or EmConfig()).validate()
    if len(dataset) == 0:
        raise ValidationError("Cannot train on an empty dataset")
    if int(C) != C or C < 1:
        raise ValidationError("Number of hidden states must be >= 1, got %r" % C)

    best = None
    for r in range(config.restarts):
        params, trace = _fit_once(kind, dataset, int(C), config,
                                  config.seed + r, r, pool)
        logger.info("%s EM run %d/%d: %d iterations, log-likelihood %.6f%s",
                    kind.upper(), r + 1, config.restarts, trace.iterations,
                    trace.best, "" if trace.converged else " (not converged)")
        if best is None or trace.best > best[1].best:
            best = (params, trace)
    return best

# -*- coding: utf-8 -*-
#
# hdp.py
#
# Date:     16 March 2026
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

"""Infinite bottom-up hidden tree Markov model.

The state space is a weak-limit (truncation level K) approximation of the
hierarchical Dirichlet process

    beta          ~ GEM(gamma)
    beta_l        ~ DP(alpha_l, beta)            one per child position l
    pi[j, l]      ~ DP(alpha_t, beta_l)          parent state given child
                                                 state j at position l
    leaf_prior    ~ DP(alpha_t, beta)
    sigma[k]      ~ Dir(emission_base)
    phi           ~ Dir(alpha_s)

and is explored with a blocked Gibbs sampler: node states and switches one
node at a time, then every weight vector given the assignments, with the
upper levels of the hierarchy resampled through Chinese-restaurant table
counts.

Array layout: pi[j, l, i] is P(Q_u = i | S_u = l, Q_ch_l(u) = j), i.e. the
finite model's transition[l][i, j].
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import copy
import math

from collections import Counter, namedtuple

import numpy as np

from scipy.special import gammaln, logsumexp, xlogy

from htmm import inference
from htmm.errors import NumericalError, ValidationError
from htmm.loggers import get_logger
from htmm.models import BuParams, check_simplex
from htmm.util import derive_seed, sample_categorical

logger = get_logger(__name__)

DEFAULT_TRUNCATION = 20
INIT_STATES = 10

# Sampled weights of entries with a positive Dirichlet parameter are kept at
# or above this, so products of two weights stay representable.
WEIGHT_FLOOR = 1e-150

ChainResult = namedtuple('ChainResult', ('seed', 'samples', 'diagnostics'))


class HdpHypers(object):

    def __init__(self, gamma=1.0, alpha_position=1.0, alpha_transition=1.0,
                 alpha_switch=1.0, emission_base=0.5,
                 truncation=DEFAULT_TRUNCATION):
        self.gamma = gamma
        self.alpha_position = alpha_position
        self.alpha_transition = alpha_transition
        self.alpha_switch = alpha_switch
        self.emission_base = emission_base
        self.truncation = truncation
        self.validate()

    @property
    def K(self):
        return self.truncation

    def position_alphas(self, L):
        """alpha_l for l in [0, L); a scalar alpha_position is shared."""
        a = np.atleast_1d(np.asarray(self.alpha_position, dtype=np.float64))
        if a.size == 1:
            return np.full(L, float(a[0]))
        if a.size != L:
            raise ValidationError("Need %d per-position concentrations, got %d"
                                  % (L, a.size))
        return a

    def validate(self, L=None):
        for name in ('gamma', 'alpha_transition', 'alpha_switch', 'emission_base'):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and val > 0 and math.isfinite(val)):
                raise ValidationError("%s must be a positive number, got %r"
                                      % (name, val))
        alphas = np.atleast_1d(np.asarray(self.alpha_position, dtype=np.float64))
        if alphas.size == 0 or not (alphas > 0).all() or not np.isfinite(alphas).all():
            raise ValidationError("alpha_position must be positive, got %r"
                                  % (self.alpha_position,))
        if int(self.truncation) != self.truncation or self.truncation < 1:
            raise ValidationError("Truncation level must be >= 1, got %r"
                                  % self.truncation)
        if L is not None:
            self.position_alphas(L)
        return self

    def to_dict(self):
        a = self.alpha_position
        return {'gamma': self.gamma,
                'alpha_position': list(a) if np.ndim(a) else a,
                'alpha_transition': self.alpha_transition,
                'alpha_switch': self.alpha_switch,
                'emission_base': self.emission_base,
                'truncation': self.truncation}


class _TreeIndex(object):
    """Per-tree lookup tables used by the sampler."""

    def __init__(self, tree, L):
        self.tree = tree
        self.size = tree.size
        self.labels = np.asarray(tree.labels)
        self.parent = np.asarray(tree.parent)
        self.slot = np.asarray(tree.slot)
        self.leaves = np.array(tree.leaves, dtype=np.int64)
        self.internal = np.array(tree.internal_nodes, dtype=np.int64)
        self.child = np.zeros((tree.size + 1, L), dtype=np.int64)
        self.positions = [None] * (tree.size + 1)
        self.kids = [None] * (tree.size + 1)
        for u in self.internal:
            occ = tree.occupied(u)
            self.positions[u] = np.array([l for l, _ in occ], dtype=np.int64)
            self.kids[u] = np.array([c for _, c in occ], dtype=np.int64)
            self.child[u, self.positions[u]] = self.kids[u]


class GibbsState(object):
    """Weights and assignments of one chain.

    states[n][u] is the state of node u of tree n, switches[n][u] the switched
    position (-1 for leaves); index 0 is unused and holds -1.
    """

    def __init__(self, beta, beta_l, pi, sigma, phi, leaf_prior, states,
                 switches, rng, seed=None):
        self.beta = beta
        self.beta_l = beta_l
        self.pi = pi
        self.sigma = sigma
        self.phi = phi
        self.leaf_prior = leaf_prior
        self.states = states
        self.switches = switches
        self.rng = rng
        self.seed = seed
        self.sweep = 0
        self._index = None

    @property
    def K(self):
        return len(self.beta)

    @property
    def L(self):
        return len(self.phi)

    @property
    def M(self):
        return self.sigma.shape[1]

    def index(self, dataset):
        """Lookup tables for the trees of dataset, rebuilt whenever the trees
        differ from the cached ones. The assignments must match the trees."""
        trees = list(dataset)
        if self._index is not None and len(self._index) == len(trees) and \
                all(ix.tree is t or ix.tree == t
                    for ix, t in zip(self._index, trees)):
            return self._index
        if len(trees) != len(self.states):
            raise ValidationError("Sampler state holds %d trees, dataset %d"
                                  % (len(self.states), len(trees)))
        for n, t in enumerate(trees):
            if len(self.states[n]) != t.size + 1:
                raise ValidationError("Sampler state for tree %d has %d nodes, "
                                      "the tree %d" % (n, len(self.states[n]) - 1,
                                                       t.size))
        self._index = [_TreeIndex(t, self.L) for t in trees]
        return self._index

    def check(self, dataset=None, tol=1e-9):
        """Raise NumericalError unless every weight vector is on its simplex and
        every assignment is in range."""
        try:
            check_simplex("beta", self.beta, tol=tol)
            check_simplex("beta_l", self.beta_l, axis=1, tol=tol)
            check_simplex("pi", self.pi, axis=2, tol=tol)
            check_simplex("sigma", self.sigma, axis=1, tol=tol)
            check_simplex("phi", self.phi, tol=tol)
            check_simplex("leaf_prior", self.leaf_prior, tol=tol)
        except ValidationError as e:
            raise NumericalError("Sampler state invalid: %s" % e)
        for n, q in enumerate(self.states):
            if q[1:].min() < 0 or q[1:].max() >= self.K:
                raise NumericalError("State of tree %d out of range" % n)
        if dataset is not None:
            for n, ix in enumerate(self.index(dataset)):
                for u in ix.internal:
                    if self.switches[n][u] not in ix.positions[u]:
                        raise NumericalError("Switch of node %d in tree %d points "
                                             "at an empty slot" % (u, n))
        return True

    def state_counts(self):
        counts = np.zeros(self.K, dtype=np.int64)
        for q in self.states:
            counts += np.bincount(q[1:], minlength=self.K)
        return counts

    def snapshot(self):
        """Deep copy without the random stream."""
        rng, self.rng = self.rng, None
        index, self._index = self._index, None
        try:
            return copy.deepcopy(self)
        finally:
            self.rng, self._index = rng, index

    def to_dict(self):
        d = to_bu_params(self).to_dict()
        d.update({'beta': self.beta,
                  'beta_l': self.beta_l,
                  'active_states': active_states(self),
                  'state_counts': self.state_counts(),
                  'sweep': self.sweep,
                  'seed': self.seed})
        return d


def _stick_weights(v):
    """Weights from K-1 stick proportions; the last weight takes the rest."""
    K = len(v) + 1
    w = np.empty(K)
    rest = 1.0
    for k in range(K - 1):
        w[k] = v[k] * rest
        rest -= w[k]
    w[K - 1] = max(1.0 - w[:K - 1].sum(), 0.0)
    return w / w.sum()


def sample_gem(gamma, K, rng):
    if not gamma > 0:
        raise ValidationError("GEM concentration must be > 0, got %r" % gamma)
    if int(K) != K or K < 1:
        raise ValidationError("Truncation level must be >= 1, got %r" % K)
    return _stick_weights(rng.beta(1.0, gamma, size=int(K) - 1))


def _dirichlet(alpha, rng):
    """Dirichlet draws along the last axis; zero parameters give zero weight.

    A row whose gamma draws all underflow collapses onto one entry picked in
    proportion to its parameters."""
    alpha = np.asarray(alpha, dtype=np.float64)
    shape = alpha.shape
    alpha = alpha.reshape(-1, shape[-1])
    pos = alpha > 0
    g = np.where(pos, rng.standard_gamma(np.where(pos, alpha, 1.0)), 0.0)
    total = g.sum(axis=1, keepdims=True)
    with np.errstate(invalid='ignore', divide='ignore'):
        w = g / total
    for r in np.flatnonzero(total[:, 0] <= 0):
        w[r] = 0.0
        w[r, sample_categorical(rng, alpha[r])] = 1.0
    w = np.where(pos, np.maximum(w, WEIGHT_FLOOR), 0.0)
    return (w / w.sum(axis=1, keepdims=True)).reshape(shape)


def sample_dp_weak_limit(alpha, base, rng):
    """Finite Dirichlet(alpha * base) stand-in for DP(alpha, base)."""
    if not alpha > 0:
        raise ValidationError("DP concentration must be > 0, got %r" % alpha)
    base = np.asarray(base, dtype=np.float64)
    check_simplex("base", base)
    return _dirichlet(alpha * base, rng)


def init_state(dataset, hypers, seed):
    hypers.validate(dataset.L)
    K, L, M = int(hypers.truncation), dataset.L, dataset.M
    rng = np.random.default_rng(seed)
    alphas = hypers.position_alphas(L)

    beta = sample_gem(hypers.gamma, K, rng)
    beta_l = np.array([sample_dp_weak_limit(alphas[l], beta, rng) for l in range(L)])
    pi = _dirichlet(hypers.alpha_transition * np.broadcast_to(beta_l, (K, L, K)), rng)
    sigma = _dirichlet(np.full((K, M), float(hypers.emission_base)), rng)
    phi = _dirichlet(np.full(L, float(hypers.alpha_switch)), rng)
    leaf_prior = sample_dp_weak_limit(hypers.alpha_transition, beta, rng)

    start = min(K, INIT_STATES)
    states, switches = [], []
    for tree in dataset:
        q = np.full(tree.size + 1, -1, dtype=np.int64)
        q[1:] = rng.integers(0, start, size=tree.size)
        s = np.full(tree.size + 1, -1, dtype=np.int64)
        for u in tree.internal_nodes:
            positions = [l for l, _ in tree.occupied(u)]
            s[u] = positions[rng.integers(len(positions))]
        states.append(q)
        switches.append(s)

    state = GibbsState(beta, beta_l, pi, sigma, phi, leaf_prior, states,
                       switches, rng, seed)
    state.check(dataset)
    return state


def _node_switch(phi, positions):
    w = phi[positions]
    return w / w.sum()


def _resample_tree(state, ix, q, s, log_sigma, log_pi):
    rng = state.rng
    pi, phi = state.pi, state.phi
    with np.errstate(divide='ignore'):
        log_leaf = np.log(state.leaf_prior)
    for u in range(1, ix.size + 1):
        lp = log_sigma[:, ix.labels[u]].copy()
        positions = ix.positions[u]
        if positions is None:
            lp += log_leaf
        else:
            # terms[k, i] = phi'_k * pi[Q_child_k, l_k, i]
            terms = _node_switch(phi, positions)[:, None] * \
                pi[q[ix.kids[u]], positions]
            with np.errstate(divide='ignore'):
                lp += np.log(terms.sum(axis=0))
        p = ix.parent[u]
        if p and s[p] == ix.slot[u]:
            lp += log_pi[:, s[p], q[p]]
        top = lp.max()
        if not math.isfinite(top):
            raise NumericalError("Full conditional of node %d has no mass" % u)
        q[u] = sample_categorical(rng, np.exp(lp - top))
        if positions is not None:
            s[u] = positions[sample_categorical(rng, terms[:, q[u]])]


class _Counts(object):

    def __init__(self, state, dataset):
        K, L, M = state.K, state.L, state.M
        self.transition = np.zeros((K, L, K))
        self.emission = np.zeros((K, M))
        self.leaf = np.zeros(K)
        self.switch = np.zeros(L)
        self.patterns = Counter()
        for ix, q, s in zip(state.index(dataset), state.states, state.switches):
            nodes = np.arange(1, ix.size + 1)
            np.add.at(self.emission, (q[nodes], ix.labels[nodes]), 1)
            self.leaf += np.bincount(q[ix.leaves], minlength=K)
            if len(ix.internal):
                sel = s[ix.internal]
                np.add.at(self.transition,
                          (q[ix.child[ix.internal, sel]], sel, q[ix.internal]), 1)
                self.switch += np.bincount(sel, minlength=L)
                for u in ix.internal:
                    self.patterns[tuple(ix.positions[u].tolist())] += 1


def _table_counts(customers, alpha, rng):
    """Number of occupied tables per restaurant/dish in a Chinese restaurant
    process with concentration alpha (elementwise), given the customer counts.
    The first customer of every non-empty entry opens a table."""
    shape = np.shape(customers)
    n = np.asarray(customers, dtype=np.int64).ravel()
    a = np.broadcast_to(np.asarray(alpha, dtype=np.float64), shape).ravel()
    total = int(n.sum())
    if total == 0:
        return np.zeros(shape, dtype=np.int64)
    owner = np.repeat(np.arange(len(n)), n)
    seat = np.arange(total) - np.repeat(np.cumsum(n) - n, n)
    ao = a[owner]
    with np.errstate(invalid='ignore', divide='ignore'):
        prob = np.where(ao > 0, ao / (ao + seat), (seat == 0).astype(np.float64))
    hits = rng.random(total) < prob
    return np.bincount(owner, weights=hits, minlength=len(n)).astype(np.int64) \
        .reshape(shape)


def _gem_posterior(tables, gamma, rng):
    """Truncated GEM(gamma) posterior given table counts per dish."""
    m = np.asarray(tables, dtype=np.float64)
    greater = np.cumsum(m[::-1])[::-1] - m
    return _stick_weights(rng.beta(1.0 + m[:-1], gamma + greater[:-1]))


def _resample_phi(state, counts, hypers):
    """phi given the switch assignments.

    With every internal node fully occupied this is Dirichlet(alpha_s + counts).
    Otherwise each node renormalises phi over its occupied positions. Writing
    phi = lambda / sum(lambda) with independent Gamma(alpha_s) lambdas and
    adding one Gamma variable per occupancy pattern turns every conditional
    into a gamma distribution; one round of that is drawn here."""
    rng = state.rng
    L = state.L
    a = hypers.alpha_switch + counts.switch
    if all(len(p) == L for p in counts.patterns):
        return _dirichlet(a, rng)
    lam = state.phi * rng.standard_gamma(L * hypers.alpha_switch)
    rate = np.ones(L)
    for p, n in counts.patterns.items():
        p = list(p)
        z = rng.standard_gamma(n) / lam[p].sum()
        rate[p] += z
    lam = rng.standard_gamma(a) / rate
    if not lam.sum() > 0:
        return _dirichlet(a, rng)
    w = np.maximum(lam / lam.sum(), WEIGHT_FLOOR)
    return w / w.sum()


def _resample_weights(state, counts, hypers):
    rng = state.rng
    K, L = state.K, state.L
    alphas = hypers.position_alphas(L)
    a_t = hypers.alpha_transition

    state.sigma = _dirichlet(hypers.emission_base + counts.emission, rng)
    state.phi = _resample_phi(state, counts, hypers)

    # Upper levels with pi and leaf_prior integrated out
    m = _table_counts(counts.transition, a_t * state.beta_l[None, :, :], rng)
    m_pos = m.sum(axis=0)
    m_top = _table_counts(m_pos, alphas[:, None] * state.beta[None, :], rng)
    m_leaf = _table_counts(counts.leaf, a_t * state.beta, rng)
    state.beta = _gem_posterior(m_top.sum(axis=0) + m_leaf, hypers.gamma, rng)
    state.beta_l = _dirichlet(alphas[:, None] * state.beta[None, :] + m_pos, rng)

    state.pi = _dirichlet(a_t * state.beta_l[None, :, :] + counts.transition, rng)
    state.leaf_prior = _dirichlet(a_t * state.beta + counts.leaf, rng)
    return state


def _complete_from_counts(state, counts):
    phi = state.phi
    lp = xlogy(counts.transition, state.pi).sum()
    lp += xlogy(counts.emission, state.sigma).sum()
    lp += xlogy(counts.leaf, state.leaf_prior).sum()
    lp += xlogy(counts.switch, phi).sum()
    for p, n in counts.patterns.items():
        lp -= n * math.log(phi[list(p)].sum())
    return float(lp)


def _dirichlet_logpdf(x, alpha):
    """Dirichlet log density along the last axis, summed over the leading
    axes. Entries with a zero parameter are left out, as _dirichlet never
    gives them weight."""
    x = np.asarray(x, dtype=np.float64)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), x.shape)
    pos = alpha > 0
    a = np.where(pos, alpha, 1.0)
    log_x = np.log(np.maximum(x, WEIGHT_FLOOR))
    lp = gammaln(np.where(pos, alpha, 0.0).sum(axis=-1))
    lp -= np.where(pos, gammaln(a), 0.0).sum(axis=-1)
    lp += np.where(pos, (a - 1.0) * log_x, 0.0).sum(axis=-1)
    return float(lp.sum())


def _gem_logpdf(beta, gamma):
    """Log density of truncated GEM(gamma) weights, taken over the first K-1
    weights (the last one is determined by them)."""
    beta = np.asarray(beta, dtype=np.float64)
    if len(beta) < 2:
        return 0.0
    # rest[k] = 1 - sum(beta[:k]), the stick left before break k
    log_rest = np.log(np.maximum(np.cumsum(beta[::-1])[::-1], WEIGHT_FLOOR))
    breaks = len(beta) - 1
    lp = breaks * math.log(gamma)
    lp += (gamma - 1.0) * (log_rest[1:] - log_rest[:-1]).sum()
    # Jacobian of the map from stick proportions to weights
    lp -= log_rest[:-1].sum()
    return float(lp)


def log_prior(state, hypers):
    """Log prior density of the weights of state."""
    alphas = hypers.position_alphas(state.L)
    a_t = hypers.alpha_transition
    lp = _gem_logpdf(state.beta, hypers.gamma)
    lp += _dirichlet_logpdf(state.beta_l, alphas[:, None] * state.beta[None, :])
    lp += _dirichlet_logpdf(state.pi, a_t * state.beta_l[None, :, :])
    lp += _dirichlet_logpdf(state.leaf_prior, a_t * state.beta)
    lp += _dirichlet_logpdf(state.sigma, hypers.emission_base)
    lp += _dirichlet_logpdf(state.phi, hypers.alpha_switch)
    return lp


def complete_log_likelihood(state, dataset):
    """Log-probability of the labels, assignments and switches of dataset
    under the current weights."""
    return _complete_from_counts(state, _Counts(state, dataset))


def joint_log_prob(state, dataset, hypers):
    """complete_log_likelihood plus the log prior of the weights."""
    return complete_log_likelihood(state, dataset) + log_prior(state, hypers)


def _sweep(state, dataset, hypers, update_params):
    index = state.index(dataset)
    with np.errstate(divide='ignore'):
        log_sigma = np.log(state.sigma)
        log_pi = np.log(state.pi)
    for ix, q, s in zip(index, state.states, state.switches):
        _resample_tree(state, ix, q, s, log_sigma, log_pi)
    counts = _Counts(state, dataset)
    if update_params:
        _resample_weights(state, counts, hypers)
    state.sweep += 1
    return counts


def gibbs_sweep(state, dataset, hypers, update_params=True):
    """One sweep over every node of every tree, then (unless update_params is
    False) over every weight vector. Updates state in place and returns it."""
    _sweep(state, dataset, hypers, update_params)
    return state


def active_states(state):
    return int(np.count_nonzero(state.state_counts()))


def to_bu_params(state):
    """Embed the truncated weights as a finite BU model with C = K."""
    return BuParams(state.leaf_prior, state.pi.transpose(1, 2, 0), state.phi,
                    state.sigma)


def predictive_score(samples, tree):
    """Log of the tree's likelihood averaged over posterior samples."""
    samples = list(samples)
    if not samples:
        raise ValidationError("Predictive score needs at least one sample")
    lls = [inference.upward_bu(to_bu_params(s), tree).log_likelihood
           for s in samples]
    return float(logsumexp(lls) - math.log(len(lls)))


def check_schedule(sweeps, burn_in, thin):
    if int(sweeps) != sweeps or int(burn_in) != burn_in or burn_in < 0:
        raise ValidationError("Sweeps and burn-in must be non-negative integers")
    if not sweeps > burn_in:
        raise ValidationError("Number of sweeps (%d) must exceed burn-in (%d)"
                              % (sweeps, burn_in))
    if int(thin) != thin or thin < 1:
        raise ValidationError("Thinning interval must be >= 1, got %r" % thin)


def run_chain(dataset, hypers, sweeps, burn_in=0, thin=1, seed=0, sink=None,
              keep_samples=True):
    """Run one chain; returns ChainResult(seed, samples, diagnostics).

    Sweep s (counting from 1) is retained when s > burn_in and
    (s - burn_in) is a multiple of thin. diagnostics holds one
    (sweep, joint_log_prob, active_states) row per sweep. If given, `sink`
    receives add_diagnostic(...) per sweep and add_sample(n, state) per
    retained sample as they happen."""
    check_schedule(sweeps, burn_in, thin)
    if len(dataset) == 0:
        raise ValidationError("Cannot run a chain on an empty dataset")
    state = init_state(dataset, hypers, seed)
    samples, diagnostics = [], []
    retained = 0
    report = max(sweeps // 10, 1)
    for sweep in range(1, sweeps + 1):
        counts = _sweep(state, dataset, hypers, update_params=True)
        lp = _complete_from_counts(state, counts) + log_prior(state, hypers)
        active = active_states(state)
        diagnostics.append((sweep, lp, active))
        if sink is not None:
            sink.add_diagnostic(sweep, lp, active)
        if sweep > burn_in and (sweep - burn_in) % thin == 0:
            snap = state.snapshot()
            if sink is not None:
                sink.add_sample(retained, snap)
            if keep_samples:
                samples.append(snap)
            retained += 1
        if sweep % report == 0:
            logger.debug("Chain seed %d: sweep %d/%d, joint log-prob %.4f, "
                         "%d active states", seed, sweep, sweeps, lp, active)
    logger.info("Chain seed %d finished: %d samples, %d active states at the "
                "last sweep", seed, retained, diagnostics[-1][2])
    return ChainResult(seed, samples, diagnostics)


def _chain_job(args):
    dataset, hypers, sweeps, burn_in, thin, seed, sink, keep = args
    try:
        return run_chain(dataset, hypers, sweeps, burn_in, thin, seed, sink, keep)
    finally:
        if sink is not None:
            sink.close()


def run_chains(dataset, hypers, sweeps, burn_in=0, thin=1, seed=0, chains=1,
               pool=None, sinks=None, keep_samples=True):
    """Independent chains; chain c is seeded with derive_seed(seed, c)."""
    check_schedule(sweeps, burn_in, thin)
    if int(chains) != chains or chains < 1:
        raise ValidationError("Number of chains must be >= 1, got %r" % chains)
    sinks = sinks or [None] * chains
    jobs = [(dataset, hypers, sweeps, burn_in, thin, derive_seed(seed, c),
             sinks[c], keep_samples) for c in range(chains)]
    if pool is not None:
        return pool.map(_chain_job, jobs)
    return [_chain_job(j) for j in jobs]

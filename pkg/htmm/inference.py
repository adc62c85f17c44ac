# -*- coding: utf-8 -*-
#
# inference.py
#
# Date:     9 March 2026
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

"""Exact inference for finite hidden tree Markov models.

Everything runs in log space. The upward pass goes leaves to root over the
reverse pre-order (a node's children always have larger indices than the
node itself), the downward pass goes root to leaves in pre-order.

TD upward:   beta_u(i) = P(subtree at u | Q_u = i)
BU upward:   beta_u(i) = P(Q_u = i, subtree at u), summed over the switches
             inside the subtree; N_u = sum_i beta_u(i) is the probability of
             the subtree alone.

Posteriors are stored densely: O(U*C) node marginals plus O(U*C^2) pair
tables (TD) or O(U*L*C^2) switch/pair tables (BU). That is fine for the
desk-scale trees this library targets; a 10^4 node tree with C=20 and L=4
needs about 130MB for the BU tables.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import itertools
import math

from collections import namedtuple

import numpy as np

from scipy.special import logsumexp

from htmm.aggregators import default_chunks
from htmm.errors import NumericalError, ValidationError
from htmm.loggers import get_logger
from htmm.models import bu_log_joint, check_kind, td_log_joint

logger = get_logger(__name__)

__all__ = ['Posteriors', 'upward_td', 'downward_td', 'upward_bu', 'downward_bu',
           'brute_force', 'score_dataset', 'log_likelihood', 'posteriors']

BRUTE_FORCE_LIMIT = 10**6

TdUpward = namedtuple('TdUpward', ('log_beta', 'log_msg', 'log_likelihood'))
BuUpward = namedtuple('BuUpward', ('log_beta', 'log_n', 'log_t', 'log_a',
                                   'log_likelihood'))
ScoreResult = namedtuple('ScoreResult', ('total', 'per_tree', 'perplexity',
                                         'nodes'))


class Posteriors(object):
    """Smoothed posteriors of one tree.

    node_marginal[u, i]      P(Q_u = i | x)
    td_pair[u, i, j]         P(Q_pa(u) = i, Q_u = j | x)            (TD)
    bu_triple[u, l, i, j]    P(Q_u = i, S_u = l, Q_ch_l(u) = j | x)  (BU)
    """

    def __init__(self, node_marginal, log_likelihood, td_pair=None, bu_triple=None):
        self.node_marginal = node_marginal
        self.log_likelihood = log_likelihood
        self.td_pair = td_pair
        self.bu_triple = bu_triple

    def switch_posterior(self, u):
        """P(S_u = l | x) for every position l."""
        return self.bu_triple[u].sum(axis=(1, 2))

    def check(self, tree, atol=1e-8):
        """Raise NumericalError unless normalisation and marginalisation
        consistency hold."""
        eps = self.node_marginal
        for u in tree.nodes:
            if abs(eps[u].sum() - 1) > atol:
                raise NumericalError("Marginal of node %d sums to %r"
                                     % (u, eps[u].sum()))
        if self.td_pair is not None:
            for u in tree.nodes:
                if u == 1:
                    continue
                z = self.td_pair[u]
                if abs(z.sum() - 1) > atol or \
                   np.abs(z.sum(axis=0) - eps[u]).max() > atol or \
                   np.abs(z.sum(axis=1) - eps[tree.parent[u]]).max() > atol:
                    raise NumericalError("Inconsistent pair posterior at node %d" % u)
        if self.bu_triple is not None:
            for u in tree.internal_nodes:
                z = self.bu_triple[u]
                if abs(z.sum() - 1) > atol or \
                   np.abs(z.sum(axis=(0, 2)) - eps[u]).max() > atol:
                    raise NumericalError("Inconsistent switch posterior at node %d"
                                         % u)
        return True


def _check_table(tables, tree, C, cls):
    if not isinstance(tables, cls) or tables.log_beta.shape != (tree.size + 1, C):
        raise ValidationError("Upward tables do not match this model and tree")


def upward_td(params, tree):
    params.check_tree(tree)
    C = params.C
    x = tree.labels
    log_t = params.log_transition
    log_em = params.log_emission
    log_beta = np.full((tree.size + 1, C), -np.inf)
    log_msg = np.full((tree.size + 1, C), -np.inf)

    with np.errstate(divide='ignore', invalid='ignore'):
        for u in range(tree.size, 0, -1):
            lb = log_em[:, x[u]].copy()
            for _, v in tree.occupied(u):
                # Message from child v: sum_j T(i, j) beta_v(j), per parent state i
                log_msg[v] = logsumexp(log_t + log_beta[v][None, :], axis=1)
                lb += log_msg[v]
            log_beta[u] = lb
        ll = float(logsumexp(params.log_root + log_beta[1]))
    return TdUpward(log_beta, log_msg, ll)


def _zero_aware_diff(log_num, log_den):
    """log_num - log_den where log_num = -inf yields -inf even if log_den is
    -inf too."""
    out = np.full(np.shape(log_num), -np.inf)
    ok = np.isfinite(log_num)
    out[ok] = log_num[ok] - log_den[ok]
    return out


def _normalise(p, what):
    total = p.sum()
    if not total > 0 or not math.isfinite(total):
        raise NumericalError("Cannot normalise %s (mass %r)" % (what, total))
    return p / total


def downward_td(params, tree, tables):
    C = params.C
    _check_table(tables, tree, C, TdUpward)
    if not math.isfinite(tables.log_likelihood):
        raise NumericalError("Tree has zero probability under the model; "
                             "posteriors are undefined")
    log_t = params.log_transition
    eps = np.zeros((tree.size + 1, C))
    pair = np.zeros((tree.size + 1, C, C))
    with np.errstate(divide='ignore', invalid='ignore', under='ignore'):
        eps[1] = _normalise(np.exp(params.log_root + tables.log_beta[1] -
                                   tables.log_likelihood), "root marginal")
        log_eps = np.log(eps)
        for u in range(2, tree.size + 1):
            p = tree.parent[u]
            ratio = _zero_aware_diff(log_eps[p], tables.log_msg[u])
            z = np.exp(ratio[:, None] + log_t + tables.log_beta[u][None, :])
            z = _normalise(z, "pair posterior of node %d" % u)
            pair[u] = z
            eps[u] = z.sum(axis=0)
            log_eps[u] = np.log(eps[u])
    return Posteriors(eps, tables.log_likelihood, td_pair=pair)


def upward_bu(params, tree):
    params.check_tree(tree)
    C, L = params.C, params.L
    x = tree.labels
    log_t = params.log_transition
    log_em = params.log_emission
    U = tree.size
    log_beta = np.full((U + 1, C), -np.inf)
    log_n = np.full(U + 1, -np.inf)
    log_comp = np.full((U + 1, L, C), -np.inf)
    log_a = np.full((U + 1, C), -np.inf)

    with np.errstate(divide='ignore', invalid='ignore'):
        for u in range(U, 0, -1):
            occ = tree.occupied(u)
            if not occ:
                log_beta[u] = params.log_leaf + log_em[:, x[u]]
            else:
                log_sw = np.log(params.node_switch([l for l, _ in occ]))
                terms = []
                for k, (l, v) in enumerate(occ):
                    # Children other than the switched one only contribute
                    # their subtree probability.
                    spect = sum(log_n[w] for m, (_, w) in enumerate(occ) if m != k)
                    log_comp[u, l] = logsumexp(log_t[l] + log_beta[v][None, :],
                                               axis=1) + spect
                    terms.append(log_sw[k] + log_comp[u, l])
                log_a[u] = logsumexp(np.array(terms), axis=0)
                log_beta[u] = log_em[:, x[u]] + log_a[u]
            log_n[u] = logsumexp(log_beta[u])
    return BuUpward(log_beta, log_n, log_comp, log_a, float(log_n[1]))


def downward_bu(params, tree, tables):
    C, L = params.C, params.L
    _check_table(tables, tree, C, BuUpward)
    if not math.isfinite(tables.log_likelihood):
        raise NumericalError("Tree has zero probability under the model; "
                             "posteriors are undefined")
    log_t = params.log_transition
    log_beta, log_n = tables.log_beta, tables.log_n
    eps = np.zeros((tree.size + 1, C))
    triple = np.zeros((tree.size + 1, L, C, C))

    with np.errstate(divide='ignore', invalid='ignore', under='ignore'):
        eps[1] = _normalise(np.exp(log_beta[1] - log_n[1]), "root marginal")
        for u in range(1, tree.size + 1):
            occ = tree.occupied(u)
            if not occ:
                continue
            log_sw = np.log(params.node_switch([l for l, _ in occ]))
            ratio = _zero_aware_diff(np.log(eps[u]), tables.log_a[u])
            for k, (l, v) in enumerate(occ):
                spect = sum(log_n[w] for m, (_, w) in enumerate(occ) if m != k)
                triple[u, l] = np.exp(ratio[:, None] + log_sw[k] + log_t[l] +
                                      log_beta[v][None, :] + spect)
            triple[u] = _normalise(triple[u], "switch posterior of node %d" % u)
            for l, v in occ:
                # Either v drives the transition (S_u = l), or it is a
                # spectator whose subtree is distributed as beta_v / N_v.
                selected = triple[u, l].sum(axis=0)
                spectator = 1.0 - triple[u, l].sum()
                eps[v] = selected + max(spectator, 0.0) * \
                    np.exp(log_beta[v] - log_n[v])
                eps[v] = _normalise(eps[v], "marginal of node %d" % v)
    return Posteriors(eps, tables.log_likelihood, bu_triple=triple)


def log_likelihood(params, tree):
    if params.kind == 'td':
        return upward_td(params, tree).log_likelihood
    return upward_bu(params, tree).log_likelihood


def posteriors(params, tree):
    if params.kind == 'td':
        return downward_td(params, tree, upward_td(params, tree))
    return downward_bu(params, tree, upward_bu(params, tree))


def _enumerate_states(C, U):
    grid = np.indices((C,) * U).reshape(U, -1).T
    states = np.zeros((grid.shape[0], U + 1), dtype=np.int64)
    states[:, 1:] = grid
    return states


def brute_force(kind, params, tree, limit=BRUTE_FORCE_LIMIT):
    """Log-likelihood and posteriors by summing the complete-data joint over
    every hidden assignment. Posteriors are None for zero-probability trees."""
    check_kind(kind, params)
    params.check_tree(tree)
    C, U = params.C, tree.size
    internal = tree.internal_nodes
    if kind == 'bu':
        switch_choices = [[l for l, _ in tree.occupied(u)] for u in internal]
    else:
        switch_choices = []
    size = C ** U
    for choices in switch_choices:
        size *= len(choices)
    if size > limit:
        raise ValidationError("Instance too large for enumeration: %d "
                              "assignments (limit %d)" % (size, limit))

    states = _enumerate_states(C, U)
    if kind == 'td':
        lp = td_log_joint(params, tree, states)[None, :]
        combos = [()]
    else:
        combos = list(itertools.product(*switch_choices))
        lp = np.empty((len(combos), states.shape[0]))
        switches = np.full(U + 1, -1, dtype=np.int64)
        for k, combo in enumerate(combos):
            switches[internal] = combo
            lp[k] = bu_log_joint(params, tree, states, switches)

    with np.errstate(divide='ignore', invalid='ignore', under='ignore'):
        ll = float(logsumexp(lp))
        if not math.isfinite(ll):
            return ll, None
        w = np.exp(lp - ll)
    w_states = w.sum(axis=0)

    eps = np.zeros((U + 1, C))
    for u in tree.nodes:
        eps[u] = np.bincount(states[:, u], weights=w_states, minlength=C)

    if kind == 'td':
        pair = np.zeros((U + 1, C, C))
        for u in range(2, U + 1):
            idx = states[:, tree.parent[u]] * C + states[:, u]
            pair[u] = np.bincount(idx, weights=w_states,
                                  minlength=C * C).reshape(C, C)
        return ll, Posteriors(eps, ll, td_pair=pair)

    triple = np.zeros((U + 1, params.L, C, C))
    combos = np.array(combos, dtype=np.int64).reshape(len(combos), len(internal))
    for n, u in enumerate(internal):
        for l, v in tree.occupied(u):
            wl = w[combos[:, n] == l].sum(axis=0)
            idx = states[:, u] * C + states[:, v]
            triple[u, l] = np.bincount(idx, weights=wl,
                                       minlength=C * C).reshape(C, C)
    return ll, Posteriors(eps, ll, bu_triple=triple)


def _score_chunk(args):
    params, trees = args
    return [log_likelihood(params, t) for t in trees]


def score_dataset(kind, params, dataset, pool=None, chunk_size=64):
    """Total and per-tree log-likelihood plus per-node perplexity.

    Perplexity is None for an empty dataset and inf when some tree has zero
    probability."""
    check_kind(kind, params)
    params.check_dataset(dataset)
    chunks = [(params, c) for c in default_chunks(dataset, chunk_size)]
    if pool is not None:
        results = pool.map(_score_chunk, chunks)
    else:
        results = [_score_chunk(c) for c in chunks]
    per_tree = [ll for r in results for ll in r]
    total = math.fsum(per_tree)
    nodes = dataset.node_count
    if nodes == 0:
        perplexity = None
    elif not math.isfinite(total):
        perplexity = float('inf')
    else:
        perplexity = math.exp(-total / nodes)
    bad = [n for n, ll in enumerate(per_tree) if not math.isfinite(ll)]
    if bad:
        logger.warning("%d tree(s) have zero probability under the model "
                       "(first: tree %d)", len(bad), bad[0])
    return ScoreResult(total, per_tree, perplexity, nodes)

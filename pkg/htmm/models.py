# -*- coding: utf-8 -*-
#
# models.py
#
# Date:     5 March 2026
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

"""Parameter containers for the finite top-down (TD) and bottom-up (BU)
hidden tree Markov models.

TD: root prior P(Q_1), one parent-to-child transition P(Q_u | Q_pa(u)) shared
by all positions, emission P(x_u | Q_u).

BU: leaf prior P(Q_u) for leaves, one child-to-parent transition per child
position, transition[l][i, j] = P(Q_u = i | Q_ch_l(u) = j) (columns sum to
one), a global switch distribution P(S_u = l) choosing the child that drives
the transition, and emission P(x_u | Q_u). A node with fewer occupied slots
than L uses the switch renormalised over its occupied slots.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from collections.abc import Mapping

import numpy as np

from htmm.build_info import MODEL_FORMAT_VERSION
from htmm.errors import NumericalError, ValidationError
from htmm.loggers import get_logger
from htmm.util import dump_json, load_json, sample_categorical

logger = get_logger(__name__)

__all__ = ['TdParams', 'BuParams', 'init_random', 'complete_log_prob_td',
           'complete_log_prob_bu', 'sample', 'save_params', 'load_params']

KINDS = ('td', 'bu')
SIMPLEX_TOL = 1e-9


def _log(arr):
    with np.errstate(divide='ignore'):
        return np.log(arr)


def _frozen(arr, ndim, name):
    try:
        arr = np.array(arr, dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError("%s is not a numeric array" % name)
    if arr.ndim != ndim:
        raise ValidationError("%s must have %d dimensions, got shape %s"
                              % (name, ndim, arr.shape))
    arr.setflags(write=False)
    return arr


def check_simplex(name, arr, axis=-1, tol=SIMPLEX_TOL):
    if not np.isfinite(arr).all():
        raise ValidationError("%s has non-finite entries" % name)
    if (arr < 0).any():
        raise ValidationError("%s has negative entries" % name)
    sums = arr.sum(axis=axis)
    if arr.shape[axis] == 0 or np.abs(sums - 1.0).max() > tol:
        raise ValidationError("%s does not sum to 1 (max deviation %g)"
                              % (name, np.abs(sums - 1.0).max()
                                 if sums.size else float('nan')))


class _Params(object):
    kind = None

    def __setattr__(self, name, value):
        if name.startswith("_"):
            object.__setattr__(self, name, value)
        else:
            raise AttributeError("%s is immutable" % self.__class__.__name__)

    @property
    def log_emission(self):
        if self._log_emission is None:
            self._log_emission = _log(self.emission)
        return self._log_emission

    def check_tree(self, tree):
        try:
            tree.validate(self.M, self.L)
        except ValidationError as e:
            raise ValidationError("Tree does not fit model dimensions "
                                  "(C=%d, M=%d, L=%d): %s"
                                  % (self.C, self.M, self.L, e))

    def check_dataset(self, dataset):
        if dataset.M > self.M or dataset.L > self.L:
            raise ValidationError("Dataset dimensions (M=%d, L=%d) exceed model "
                                  "dimensions (M=%d, L=%d)"
                                  % (dataset.M, dataset.L, self.M, self.L))

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in
                   zip(self._arrays(), other._arrays())) and self.L == other.L

    def __ne__(self, other):
        res = self.__eq__(other)
        if res is NotImplemented:
            return res
        return not res

    __hash__ = None

    def __repr__(self):
        return "<%s C=%d M=%d L=%d>" % (self.__class__.__name__,
                                        self.C, self.M, self.L)


class TdParams(_Params):
    kind = 'td'

    def __init__(self, root_prior, transition, emission, L=1, validate=True):
        object.__setattr__(self, 'root_prior', _frozen(root_prior, 1, "root_prior"))
        object.__setattr__(self, 'transition', _frozen(transition, 2, "transition"))
        object.__setattr__(self, 'emission', _frozen(emission, 2, "emission"))
        object.__setattr__(self, 'C', len(self.root_prior))
        object.__setattr__(self, 'M', self.emission.shape[1])
        object.__setattr__(self, 'L', int(L))
        self._log_root = self._log_transition = self._log_emission = None
        if validate:
            self.validate()

    def _arrays(self):
        return (self.root_prior, self.transition, self.emission)

    def validate(self):
        C = self.C
        if C < 1 or self.M < 1 or self.L < 1:
            raise ValidationError("TD model needs C, M, L >= 1")
        if self.transition.shape != (C, C):
            raise ValidationError("transition must be %dx%d, got %s"
                                  % (C, C, self.transition.shape))
        if self.emission.shape[0] != C:
            raise ValidationError("emission must have %d rows, got %d"
                                  % (C, self.emission.shape[0]))
        check_simplex("root_prior", self.root_prior)
        check_simplex("transition", self.transition, axis=1)
        check_simplex("emission", self.emission, axis=1)
        return self

    @property
    def log_root(self):
        if self._log_root is None:
            self._log_root = _log(self.root_prior)
        return self._log_root

    @property
    def log_transition(self):
        if self._log_transition is None:
            self._log_transition = _log(self.transition)
        return self._log_transition

    def permute_states(self, perm):
        """Relabel hidden states: new state k is old state perm[k]."""
        perm = np.asarray(perm)
        return TdParams(self.root_prior[perm],
                        self.transition[np.ix_(perm, perm)],
                        self.emission[perm], self.L)

    def n_parameters(self):
        C, M = self.C, self.M
        return (C - 1) + C * (C - 1) + C * (M - 1)

    def to_dict(self):
        return {'kind': self.kind, 'C': self.C, 'M': self.M, 'L': self.L,
                'root_prior': self.root_prior,
                'transition': self.transition,
                'emission': self.emission}


class BuParams(_Params):
    kind = 'bu'

    def __init__(self, leaf_prior, transition, switch, emission, validate=True):
        object.__setattr__(self, 'leaf_prior', _frozen(leaf_prior, 1, "leaf_prior"))
        object.__setattr__(self, 'transition', _frozen(transition, 3, "transition"))
        object.__setattr__(self, 'switch', _frozen(switch, 1, "switch"))
        object.__setattr__(self, 'emission', _frozen(emission, 2, "emission"))
        object.__setattr__(self, 'C', len(self.leaf_prior))
        object.__setattr__(self, 'M', self.emission.shape[1])
        object.__setattr__(self, 'L', len(self.switch))
        self._log_leaf = self._log_transition = self._log_emission = None
        if validate:
            self.validate()

    def _arrays(self):
        return (self.leaf_prior, self.transition, self.switch, self.emission)

    def validate(self):
        C, L = self.C, self.L
        if C < 1 or self.M < 1 or L < 1:
            raise ValidationError("BU model needs C, M, L >= 1")
        if self.transition.shape != (L, C, C):
            raise ValidationError("transition must be %dx%dx%d, got %s"
                                  % (L, C, C, self.transition.shape))
        if self.emission.shape[0] != C:
            raise ValidationError("emission must have %d rows, got %d"
                                  % (C, self.emission.shape[0]))
        check_simplex("leaf_prior", self.leaf_prior)
        # Column j of transition[l] is the distribution of the parent state
        # given child state j.
        check_simplex("transition", self.transition, axis=1)
        check_simplex("switch", self.switch)
        check_simplex("emission", self.emission, axis=1)
        return self

    @property
    def log_leaf(self):
        if self._log_leaf is None:
            self._log_leaf = _log(self.leaf_prior)
        return self._log_leaf

    @property
    def log_transition(self):
        if self._log_transition is None:
            self._log_transition = _log(self.transition)
        return self._log_transition

    def node_switch(self, positions):
        """Switch distribution renormalised over the given occupied positions.
        All-zero if the switch puts no mass on any of them."""
        w = self.switch[list(positions)]
        total = w.sum()
        if total > 0:
            return w / total
        return np.zeros_like(w)

    def permute_states(self, perm):
        perm = np.asarray(perm)
        return BuParams(self.leaf_prior[perm],
                        self.transition[:, perm][:, :, perm],
                        self.switch, self.emission[perm])

    def n_parameters(self):
        C, M, L = self.C, self.M, self.L
        return (C - 1) + L * C * (C - 1) + (L - 1) + C * (M - 1)

    def to_dict(self):
        return {'kind': self.kind, 'C': self.C, 'M': self.M, 'L': self.L,
                'leaf_prior': self.leaf_prior,
                'transition': self.transition,
                'switch': self.switch,
                'emission': self.emission}


def check_kind(kind, params=None):
    if kind not in KINDS:
        raise ValidationError("Unknown model kind '%s' (expected td or bu)" % kind)
    if params is not None and params.kind != kind:
        raise ValidationError("Expected a %s model, got %s" % (kind, params.kind))


def init_random(kind, C, M, L, seed, concentration=1.0):
    """Draw every distribution from a symmetric Dirichlet."""
    check_kind(kind)
    for name, val in (('C', C), ('M', M), ('L', L)):
        if int(val) != val or val < 1:
            raise ValidationError("%s must be a positive integer, got %r" % (name, val))
    if not concentration > 0:
        raise ValidationError("Dirichlet concentration must be positive, got %r"
                              % concentration)
    rng = np.random.default_rng(seed)

    def dirichlet(n, size=None):
        return rng.dirichlet(np.full(n, float(concentration)), size=size)

    if kind == 'td':
        return TdParams(dirichlet(C), dirichlet(C, size=C),
                        dirichlet(M, size=C), L)
    # Draw (l, child state j) -> distribution over parent state i, then lay it
    # out as transition[l][i, j].
    transition = dirichlet(C, size=(L, C)).transpose(0, 2, 1)
    return BuParams(dirichlet(C), transition, dirichlet(L), dirichlet(M, size=C))


def _assignment(values, tree, upper, name, nodes=None):
    """Normalise a node->value mapping (or a sequence indexed by node, index 0
    ignored) into an int array of length U+1."""
    nodes = tree.nodes if nodes is None else nodes
    out = np.full(len(tree.labels), -1, dtype=np.int64)
    if isinstance(values, Mapping):
        for u in nodes:
            if u not in values:
                raise ValidationError("%s assignment is missing node %d" % (name, u))
            out[u] = values[u]
    else:
        values = np.asarray(values)
        if values.ndim != 1 or len(values) != len(tree.labels):
            raise ValidationError("%s assignment must cover nodes 1..%d"
                                  % (name, tree.size))
        out[list(nodes)] = values[list(nodes)]
    sel = out[list(nodes)]
    if len(sel) and (sel.min() < 0 or sel.max() >= upper):
        raise ValidationError("%s assignment out of range [0, %d)" % (name, upper))
    return out


def td_log_joint(params, tree, states):
    """Log of the TD joint for each row of an (n, U+1) state matrix."""
    x = tree.labels
    nodes = np.arange(1, tree.size + 1)
    lp = params.log_root[states[:, 1]].copy()
    lp += params.log_emission[states[:, nodes], x[nodes]].sum(axis=1)
    if tree.size > 1:
        rest = nodes[1:]
        par = tree.parent[rest]
        lp += params.log_transition[states[:, par], states[:, rest]].sum(axis=1)
    return lp


def bu_log_joint(params, tree, states, switches):
    """Log of the BU joint for each row of an (n, U+1) state matrix under one
    switch assignment (array indexed by node)."""
    x = tree.labels
    nodes = np.arange(1, tree.size + 1)
    leaves = tree.leaves
    lp = params.log_emission[states[:, nodes], x[nodes]].sum(axis=1)
    lp += params.log_leaf[states[:, leaves]].sum(axis=1)
    log_t = params.log_transition
    for u in tree.internal_nodes:
        l = int(switches[u])
        slots = tree.children[u]
        if not 0 <= l < len(slots) or slots[l] is None:
            raise ValidationError("Switch of node %d points at empty slot %d" % (u, l))
        positions = [p for p, _ in tree.occupied(u)]
        w = params.node_switch(positions)[positions.index(l)]
        with np.errstate(divide='ignore'):
            lp += np.log(w)
        lp += log_t[l][states[:, u], states[:, slots[l]]]
    return lp


def complete_log_prob_td(params, tree, states):
    if params.kind != 'td':
        raise ValidationError("complete_log_prob_td needs a TD model")
    params.check_tree(tree)
    q = _assignment(states, tree, params.C, "State")
    return float(td_log_joint(params, tree, q[None, :])[0])


def complete_log_prob_bu(params, tree, states, switches):
    if params.kind != 'bu':
        raise ValidationError("complete_log_prob_bu needs a BU model")
    params.check_tree(tree)
    q = _assignment(states, tree, params.C, "State")
    s = _assignment(switches, tree, params.L, "Switch", tree.internal_nodes)
    return float(bu_log_joint(params, tree, q[None, :], s)[0])


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample(kind, params, skeleton, seed):
    """Draw hidden states and labels for the shape of `skeleton` (its labels
    are ignored). `seed` may also be a numpy Generator to continue a stream."""
    check_kind(kind, params)
    try:
        skeleton.validate(None, params.L)
    except ValidationError as e:
        raise ValidationError("Skeleton does not fit model: %s" % e)
    rng = _rng(seed)
    U = skeleton.size
    q = np.zeros(U + 1, dtype=np.int64)

    if kind == 'td':
        q[1] = sample_categorical(rng, params.root_prior)
        for u in range(2, U + 1):
            q[u] = sample_categorical(rng, params.transition[q[skeleton.parent[u]]])
    else:
        # Children have larger indices than their parents, so a reverse scan
        # visits every child before its parent.
        for u in range(U, 0, -1):
            occ = skeleton.occupied(u)
            if not occ:
                q[u] = sample_categorical(rng, params.leaf_prior)
                continue
            positions = [l for l, _ in occ]
            sw = params.node_switch(positions)
            if not sw.sum() > 0:
                raise NumericalError("Switch puts no mass on the occupied "
                                     "positions of node %d" % u)
            k = sample_categorical(rng, sw)
            l, child = occ[k]
            q[u] = sample_categorical(rng, params.transition[l][:, q[child]])

    labels = np.full(U + 1, -1, dtype=np.int64)
    for u in range(1, U + 1):
        labels[u] = sample_categorical(rng, params.emission[q[u]])
    return skeleton.with_labels(labels)


def params_from_dict(d, source="model"):
    try:
        kind = d['kind']
        check_kind(kind)
        if kind == 'td':
            params = TdParams(d['root_prior'], d['transition'], d['emission'],
                              d.get('L', 1))
        else:
            params = BuParams(d['leaf_prior'], d['transition'], d['switch'],
                              d['emission'])
    except KeyError as e:
        raise ValidationError("%s is missing field %s" % (source, e))
    except ValidationError as e:
        raise ValidationError("%s is invalid: %s" % (source, e))
    for k in ('C', 'M', 'L'):
        if k in d and d[k] != getattr(params, k):
            raise ValidationError("%s declares %s=%r but its arrays imply %d"
                                  % (source, k, d[k], getattr(params, k)))
    return params


def save_params(params, filename, extra=None):
    d = params.to_dict()
    d['format_version'] = MODEL_FORMAT_VERSION
    if extra:
        d.update(extra)
    dump_json(d, filename)
    logger.debug("Wrote %s model to %s", params.kind, filename)


def load_params(filename):
    d = load_json(filename)
    if not isinstance(d, dict):
        raise ValidationError("Model file '%s' must hold a JSON object" % filename)
    return params_from_dict(d, "Model file '%s'" % filename)

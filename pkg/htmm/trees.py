# -*- coding: utf-8 -*-
#
# trees.py
#
# Date:     4 March 2026
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

"""Labeled positional trees, their text format and dataset files.

Tree grammar (one tree per line in dataset files, '#' lines are comments)::

    tree  := "(" INT child* ")"
    child := tree | "_"

Nodes are numbered depth-first in slot order, starting with the root at
index 1; index 0 is unused. A "_" keeps a child position empty, so the
l'th child slot of a node is well defined even when earlier slots are
vacant.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import io
import re

from collections import Counter

import numpy as np

from htmm.errors import TreeSyntaxError, ValidationError
from htmm.loggers import get_logger

logger = get_logger(__name__)

__all__ = ['LabeledTree', 'Dataset', 'parse_tree', 'serialize_tree',
           'load_dataset', 'load_alphabet', 'random_skeleton']

ROOT = 1
GAP = "_"

_TOKEN_REGEX = re.compile(r"\s*(?:(\()|(\))|(_)|(\d+)|(\S))")


class LabeledTree(object):
    """Immutable rooted positional tree with an integer label on each node.

    labels[u]   -- label of node u (index 0 unused, holds -1)
    children[u] -- tuple of child slots, each a node index or None; trailing
                   empty slots are not stored
    parent[u]   -- parent index, 0 for the root
    slot[u]     -- position of u among its parent's slots, -1 for the root
    """

    __slots__ = ('labels', 'children', 'parent', 'slot', '_hash')

    def __init__(self, labels, children):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1 or len(labels) < 2:
            raise ValidationError("A tree needs at least one node.")
        if len(children) != len(labels):
            raise ValidationError("Label and child tables differ in length.")

        kids = [()]
        for u in range(1, len(labels)):
            slots = list(children[u])
            while slots and slots[-1] is None:
                slots.pop()
            kids.append(tuple(None if c is None else int(c) for c in slots))

        parent = np.zeros(len(labels), dtype=np.int64)
        slot = np.full(len(labels), -1, dtype=np.int64)
        seen = 1
        for u in range(1, len(labels)):
            for l, c in enumerate(kids[u]):
                if c is None:
                    continue
                if not ROOT < c < len(labels):
                    raise ValidationError("Node %d has out-of-range child %d."
                                          % (u, c))
                if parent[c]:
                    raise ValidationError("Node %d has more than one parent." % c)
                parent[c] = u
                slot[c] = l
                seen += 1
        if seen != len(labels) - 1:
            raise ValidationError("Tree is disconnected: %d of %d nodes reachable "
                                  "as children or root." % (seen, len(labels) - 1))

        # Walking from the root in slot order must visit 1, 2, 3, ... in turn.
        # This rejects cycles and any numbering other than pre-order.
        expected, stack = ROOT, [ROOT]
        while stack and expected < len(labels):
            u = stack.pop()
            if u != expected:
                raise ValidationError(
                    "Nodes are not numbered in pre-order: found node %d where "
                    "node %d was expected." % (u, expected))
            expected += 1
            stack.extend(c for c in reversed(kids[u]) if c is not None)
        if expected != len(labels) or stack:
            raise ValidationError("Tree has a cycle or unreachable nodes.")

        labels = labels.copy()
        labels[0] = -1
        labels.setflags(write=False)
        parent.setflags(write=False)
        slot.setflags(write=False)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'children', tuple(kids))
        object.__setattr__(self, 'parent', parent)
        object.__setattr__(self, 'slot', slot)
        object.__setattr__(self, '_hash', None)

    def __setattr__(self, name, value):
        raise AttributeError("LabeledTree is immutable")

    def __getstate__(self):
        return (self.labels.tolist(), [list(c) for c in self.children])

    def __setstate__(self, state):
        labels, children = state
        tmp = LabeledTree(labels, children)
        for k in ('labels', 'children', 'parent', 'slot'):
            object.__setattr__(self, k, getattr(tmp, k))
        object.__setattr__(self, '_hash', None)

    @classmethod
    def from_nested(cls, nested):
        """Build from nested (label, [child-or-None, ...]) tuples."""
        labels = [-1]
        children = [()]
        # Pre-order numbering: a node's index is assigned before its subtrees.
        pending = [(nested, None, None)]
        while pending:
            node, par, pos = pending.pop()
            try:
                label, slots = node
            except (TypeError, ValueError):
                raise ValidationError("Malformed nested tree node: %r" % (node,))
            idx = len(labels)
            labels.append(label)
            children.append([None] * len(slots))
            if par is not None:
                children[par][pos] = idx
            for l in reversed(range(len(slots))):
                if slots[l] is not None:
                    pending.append((slots[l], idx, l))
        return cls(labels, children)

    def to_nested(self, u=ROOT):
        nested = {}
        for v in reversed(self.subtree(u)):
            nested[v] = (int(self.labels[v]),
                         [None if c is None else nested[c]
                          for c in self.children[v]])
        return nested[u]

    @property
    def size(self):
        return len(self.labels) - 1

    def __len__(self):
        return self.size

    @property
    def nodes(self):
        return range(ROOT, len(self.labels))

    def is_leaf(self, u):
        return not self.children[u]

    @property
    def leaves(self):
        return [u for u in self.nodes if not self.children[u]]

    @property
    def internal_nodes(self):
        return [u for u in self.nodes if self.children[u]]

    def occupied(self, u):
        """(position, child) pairs for the occupied slots of u."""
        return [(l, c) for l, c in enumerate(self.children[u]) if c is not None]

    def outdegree(self, u):
        return sum(1 for c in self.children[u] if c is not None)

    def width(self, u):
        """Number of slots up to and including the last occupied one."""
        return len(self.children[u])

    @property
    def max_width(self):
        return max(len(c) for c in self.children[1:])

    def subtree(self, u=ROOT):
        """Nodes of the subtree at u, in pre-order."""
        order, stack = [], [u]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(c for c in reversed(self.children[v]) if c is not None)
        return order

    def depth(self):
        depth = np.zeros(len(self.labels), dtype=np.int64)
        for u in range(ROOT + 1, len(self.labels)):
            depth[u] = depth[self.parent[u]] + 1
        return int(depth[1:].max())

    def validate(self, M=None, L=None):
        if M is not None:
            bad = [u for u in self.nodes if not 0 <= self.labels[u] < M]
            if bad:
                raise ValidationError("Label %d of node %d is outside the "
                                      "alphabet [0, %d)."
                                      % (self.labels[bad[0]], bad[0], M))
        elif (self.labels[1:] < 0).any():
            raise ValidationError("Negative label in tree.")
        if L is not None:
            for u in self.nodes:
                if len(self.children[u]) > L:
                    raise ValidationError(
                        "Node %d uses %d child slots, more than L=%d."
                        % (u, len(self.children[u]), L))
        return self

    def with_labels(self, labels):
        labels = np.asarray(labels, dtype=np.int64)
        if len(labels) != len(self.labels):
            raise ValidationError("Label table does not match tree size.")
        return LabeledTree(labels, self.children)

    def swapped(self, u, a, b):
        """Copy of the tree with the contents of child slots a and b of node u
        exchanged; nodes are renumbered in the new slot order."""
        width = max(a, b) + 1
        nested = self.to_nested()
        path = []
        v = u
        while v != ROOT:
            path.append(int(self.slot[v]))
            v = self.parent[v]

        def swap(node, path):
            label, slots = node
            slots = list(slots)
            if path:
                pos = path[-1]
                slots[pos] = swap(slots[pos], path[:-1])
                return (label, slots)
            slots += [None] * (width - len(slots))
            slots[a], slots[b] = slots[b], slots[a]
            return (label, slots)

        return LabeledTree.from_nested(swap(nested, path))

    def __eq__(self, other):
        if not isinstance(other, LabeledTree):
            return NotImplemented
        return (self.children == other.children and
                np.array_equal(self.labels, other.labels))

    def __ne__(self, other):
        res = self.__eq__(other)
        if res is NotImplemented:
            return res
        return not res

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, '_hash',
                               hash((tuple(self.labels.tolist()), self.children)))
        return self._hash

    def __repr__(self):
        return "<LabeledTree %s>" % serialize_tree(self)


class Dataset(object):

    def __init__(self, trees, M, L, alphabet=None):
        if not M or M < 1:
            raise ValidationError("Alphabet size must be positive, got %r." % M)
        if not L or L < 1:
            raise ValidationError("Maximum out-degree must be positive, got %r." % L)
        self.trees = list(trees)
        self.M = int(M)
        self.L = int(L)
        self.alphabet = alphabet
        for n, t in enumerate(self.trees):
            try:
                t.validate(self.M, self.L)
            except ValidationError as e:
                raise ValidationError("Tree %d: %s" % (n, e))

    def __len__(self):
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)

    def __getitem__(self, idx):
        return self.trees[idx]

    @property
    def node_count(self):
        return sum(t.size for t in self.trees)

    def split(self, n):
        """First n trees and the remainder as two datasets."""
        return (Dataset(self.trees[:n], self.M, self.L, self.alphabet),
                Dataset(self.trees[n:], self.M, self.L, self.alphabet))

    def label_counts(self):
        counts = np.zeros(self.M, dtype=np.int64)
        for t in self.trees:
            counts += np.bincount(t.labels[1:], minlength=self.M)
        return counts

    def stats(self):
        outdeg = Counter()
        for t in self.trees:
            for u in t.nodes:
                outdeg[t.outdegree(u)] += 1
        return {
            'trees': len(self.trees),
            'nodes': self.node_count,
            'alphabet_size': self.M,
            'max_outdegree': self.L,
            'max_depth': max([t.depth() for t in self.trees] or [0]),
            'max_nodes': max([t.size for t in self.trees] or [0]),
            'outdegree_histogram': {str(k): outdeg[k] for k in sorted(outdeg)},
            'label_counts': self.label_counts().tolist(),
        }


def _tokens(text):
    pos = 0
    while True:
        m = _TOKEN_REGEX.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise TreeSyntaxError("Unexpected input", pos)
            return
        open_, close, gap, num, other = m.groups()
        start = m.start(m.lastindex)
        pos = m.end()
        if other is not None:
            raise TreeSyntaxError("Unexpected character %r" % other, start)
        yield start, (open_ or close or gap or int(num))


def parse_tree(text, M=None, L=None):
    """Parse one tree in the S-expression grammar.

    M and L, when given, are checked against labels and slot counts; a
    skeleton whose labels will be replaced can be parsed with M=None."""
    stack = []
    root = None
    expect_label = False
    for pos, tok in _tokens(text):
        if root is not None:
            raise TreeSyntaxError("Trailing input after tree", pos)
        if expect_label:
            if not isinstance(tok, int):
                raise TreeSyntaxError("Expected a label after '('", pos)
            stack[-1][0] = tok
            expect_label = False
        elif tok == "(":
            stack.append([None, [], pos])
            expect_label = True
        elif tok == ")":
            if not stack:
                raise TreeSyntaxError("Unbalanced ')'", pos)
            label, slots, start = stack.pop()
            if L is not None:
                while slots and slots[-1] is None:
                    slots.pop()
                if len(slots) > L:
                    raise TreeSyntaxError("Node with %d child slots exceeds L=%d"
                                          % (len(slots), L), start)
            if M is not None and label >= M:
                raise TreeSyntaxError("Label %d not below alphabet size %d"
                                      % (label, M), start + 1)
            node = (label, slots)
            if stack:
                stack[-1][1].append(node)
            else:
                root = node
        elif tok == GAP:
            if not stack:
                raise TreeSyntaxError("'_' outside of a node", pos)
            stack[-1][1].append(None)
        else:
            raise TreeSyntaxError("Unexpected label %d" % tok, pos)
    if stack:
        raise TreeSyntaxError("Unbalanced '(': missing ')'", len(text))
    if root is None:
        raise TreeSyntaxError("Empty tree", 0)
    return LabeledTree.from_nested(root).validate(M, L)


def serialize_tree(tree):
    out = []
    stack = [ROOT]
    while stack:
        item = stack.pop()
        if item == ")":
            out.append(")")
            continue
        if item is None:
            out.append(" " + GAP)
            continue
        out.append("%s(%d" % (" " if out else "", tree.labels[item]))
        stack.append(")")
        stack.extend(reversed(tree.children[item]))
    return "".join(out)


def load_alphabet(filename):
    """Read a symbol sidecar: one symbol per line, index = line order."""
    try:
        with io.open(filename, "rt", encoding="utf-8") as fp:
            symbols = [line.strip() for line in fp if line.strip()]
    except IOError as e:
        raise ValidationError("Unable to read alphabet file '%s': %s"
                              % (filename, e))
    if len(set(symbols)) != len(symbols):
        raise ValidationError("Duplicate symbols in alphabet file '%s'" % filename)
    if not symbols:
        raise ValidationError("Alphabet file '%s' is empty" % filename)
    return symbols


def read_trees(filename, M=None, L=None):
    trees = []
    try:
        fp = io.open(filename, "rt", encoding="utf-8")
    except IOError as e:
        raise ValidationError("Unable to read dataset '%s': %s" % (filename, e))
    with fp:
        try:
            for lineno, line in enumerate(fp, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    trees.append(parse_tree(line, M, L))
                except ValidationError as e:
                    raise ValidationError("%s, line %d: %s" % (filename, lineno, e))
        except UnicodeDecodeError as e:
            raise ValidationError("%s is not valid UTF-8: %s" % (filename, e))
    return trees


def load_dataset(filename, M=None, L=None, alphabet=None):
    """Load a dataset file. M and L are inferred from the data when None."""
    if alphabet is not None:
        if M is not None and M != len(alphabet):
            raise ValidationError("Alphabet file has %d symbols but M=%d."
                                  % (len(alphabet), M))
        M = len(alphabet)
    trees = read_trees(filename, M, L)
    if M is None:
        M = max([int(t.labels[1:].max()) for t in trees] or [0]) + 1
        logger.debug("Inferred alphabet size M=%d from %s", M, filename)
    if L is None:
        L = max([t.max_width for t in trees] or [1]) or 1
        logger.debug("Inferred maximum out-degree L=%d from %s", L, filename)
    logger.debug("Loaded %d trees from %s", len(trees), filename)
    return Dataset(trees, M, L, alphabet)


def random_skeleton(max_nodes, L, branching, rng):
    """Grow a random tree shape breadth-first: every slot of every node is
    filled with probability `branching` until max_nodes nodes exist. Labels
    are all zero."""
    if max_nodes < 1 or L < 1:
        raise ValidationError("Skeletons need max_nodes >= 1 and L >= 1.")
    if not 0 <= branching <= 1:
        raise ValidationError("Branching probability must be in [0, 1].")
    root = [0, [None] * L]
    count = 1
    frontier = [root]
    while frontier and count < max_nodes:
        node = frontier.pop(0)
        for l in range(L):
            if count >= max_nodes:
                break
            if rng.random() < branching:
                child = [0, [None] * L]
                node[1][l] = child
                frontier.append(child)
                count += 1
    return LabeledTree.from_nested(root)

# -*- coding: utf-8 -*-
#
# test_helpers.py
#
# Date:     23 March 2026
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

import os

import numpy as np

from htmm import loggers
from htmm.models import BuParams, TdParams
from htmm.trees import LabeledTree, random_skeleton

TEST_DATA_DIR = os.path.join(os.path.dirname(__file__), "test_data")


def setup_logging():
    loggers.reset_to_null()


def get_test_data_file(name):
    return os.path.join(TEST_DATA_DIR, name)


def random_tree(rng, max_nodes, L, M, branching=0.6):
    """Random positional tree with uniformly drawn labels."""
    skeleton = random_skeleton(max_nodes, L, branching, rng)
    labels = rng.integers(0, M, size=skeleton.size + 1)
    labels[0] = -1
    return skeleton.with_labels(labels)


def random_params(kind, C, M, L, rng, concentration=1.0):
    def dirichlet(n, size=None):
        return rng.dirichlet(np.full(n, concentration), size=size)
    if kind == 'td':
        return TdParams(dirichlet(C), dirichlet(C, size=C), dirichlet(M, size=C), L)
    return BuParams(dirichlet(C), dirichlet(C, size=(L, C)).transpose(0, 2, 1),
                    dirichlet(L), dirichlet(M, size=C))


def single_node(label):
    return LabeledTree.from_nested((label, []))

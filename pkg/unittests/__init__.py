# -*- coding: utf-8 -*-
#
# __init__.py
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

import os
import unittest

from . import test_acceptance, test_commands, test_formatters, test_hdp, \
    test_inference, test_loggers, test_metadata, test_models, test_training, \
    test_trees, test_util

# Ordered bottom-up, so a broken tree parser fails before everything above it
MODULES = (test_util, test_loggers, test_trees, test_models, test_inference,
           test_training, test_hdp, test_formatters, test_metadata,
           test_commands)

test_suite = unittest.TestSuite([m.test_suite for m in MODULES])

# The statistical acceptance runs take minutes; select with TEST_SUITE=all_tests
all_tests = unittest.TestSuite([test_suite, test_acceptance.acceptance_suite])


def load_tests(loader, standard_tests, pattern):
    if os.environ.get("TEST_SUITE") == "all_tests":
        return all_tests
    return test_suite


if __name__ == "__main__":
    unittest.main(verbosity=2)

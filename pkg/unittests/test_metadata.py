# -*- coding: utf-8 -*-
#
# test_metadata.py
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

from __future__ import absolute_import, division, print_function, unicode_literals

import json
import os
import shutil
import tempfile
import unittest

from htmm import metadata
from htmm.build_info import VERSION
from htmm.settings import load

from .test_helpers import get_test_data_file, setup_logging


class TestMetadataFunctions(unittest.TestCase):

    def setUp(self):
        setup_logging()
        self.output_dir = tempfile.mkdtemp()
        self.settings = load(["validate", "--data",
                              get_test_data_file("small.trees"), "--seed", "12"])

    def tearDown(self):
        shutil.rmtree(self.output_dir)

    def test_record(self):
        m = metadata.record_metadata(self.settings, total=-1.5)
        self.assertEqual(m['TOOL'], 'htmm')
        self.assertEqual(m['VERSION'], VERSION)
        self.assertEqual(m['COMMAND'], 'validate')
        self.assertEqual(m['SEED'], 12)
        self.assertEqual(m['TOTAL'], -1.5)
        self.assertFalse(m['PARTIAL'])
        self.assertEqual(m['CONFIG']['SEED'], 12)
        self.assertNotIn('CONFIG', m['CONFIG'])
        for key in ('PYTHON_VERSION', 'NUMPY_VERSION', 'SCIPY_VERSION',
                    'HOSTNAME', 'TIME'):
            self.assertIn(key, m)

    def test_write(self):
        filename = os.path.join(self.output_dir, "metadata.json")
        metadata.write_metadata(filename, metadata.record_metadata(
            self.settings, partial=True))
        with open(filename) as fp:
            m = json.load(fp)
        self.assertTrue(m['PARTIAL'])
        self.assertTrue(m['TIME'].endswith("Z"))
        self.assertEqual(m['CONFIG']['DATA'], get_test_data_file("small.trees"))


test_suite = unittest.TestLoader().loadTestsFromTestCase(TestMetadataFunctions)

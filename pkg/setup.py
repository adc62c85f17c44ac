# -*- coding: utf-8 -*-
#
# setup.py
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

from __future__ import absolute_import, division, print_function

import os
import sys

from setuptools import setup
from setuptools.command.build_py import build_py
from setuptools.command.sdist import sdist

from htmm.build_info import MODEL_FORMAT_VERSION, VERSION

if sys.version_info[:2] < (3, 6):
    sys.exit("htmm needs Python 3.6 or newer.")

BUILD_INFO = "htmm/build_info.py"

# Installed copies carry a fixed version instead of asking git at import time
FROZEN_BUILD_INFO = """# -*- coding: utf-8 -*-

import os

VERSION = {version!r}
DATA_DIR = os.path.dirname(__file__)
MODEL_FORMAT_VERSION = {format_version!r}
"""


def freeze_build_info(path):
    with open(path, 'w') as fp:
        fp.write(FROZEN_BUILD_INFO.format(version=VERSION,
                                          format_version=MODEL_FORMAT_VERSION))


class FrozenBuildPy(build_py):

    def build_module(self, module, module_file, package):
        outfile, copied = build_py.build_module(self, module, module_file,
                                                package)
        if (module, package) == ('build_info', 'htmm'):
            freeze_build_info(outfile)
        return outfile, copied


class FrozenSdist(sdist):

    def make_release_tree(self, base_dir, files):
        sdist.make_release_tree(self, base_dir, files)
        if not self.dry_run:
            frozen = os.path.join(base_dir, BUILD_INFO)
            # The release tree may hard link the source; break the link first
            if os.path.exists(frozen):
                os.unlink(frozen)
            freeze_build_info(frozen)


with open("README.rst") as fp:
    long_description = "\n" + fp.read()

setup(name="htmm",
      version=VERSION,
      description="Hidden tree Markov models for labelled trees",
      long_description=long_description,
      license="GNU GPLv3",
      classifiers=[
          'Development Status :: 4 - Beta',
          'Environment :: Console',
          'Intended Audience :: Science/Research',
          'License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)',
          'Programming Language :: Python :: 3 :: Only',
          'Topic :: Scientific/Engineering :: Artificial Intelligence',
          'Topic :: Scientific/Engineering :: Mathematics',
      ],
      packages=["htmm"],
      include_package_data=True,
      python_requires=">=3.6",
      install_requires=['numpy>=1.17', 'scipy>=1.0'],
      entry_points={'console_scripts': ['htmm = htmm:run_htmm']},
      data_files=[('share/doc/htmm', ['README.rst'])],
      zip_safe=False,
      cmdclass={'build_py': FrozenBuildPy, 'sdist': FrozenSdist},
      )

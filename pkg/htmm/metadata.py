# -*- coding: utf-8 -*-
#
# metadata.py
#
# Date:     18 March 2026
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

import platform
import socket
import sys

import numpy
import scipy

from htmm.build_info import MODEL_FORMAT_VERSION, VERSION
from htmm.loggers import get_logger
from htmm.util import dump_json, utcnow

logger = get_logger(__name__)


def record_metadata(settings, **extra):
    """Everything needed to reproduce a run: tool and library versions, the
    full configuration (seed included) and when and where it ran."""
    logger.debug("Gathering local metadata")
    m = {
        'TOOL': 'htmm',
        'VERSION': VERSION,
        'FORMAT_VERSION': MODEL_FORMAT_VERSION,
        'PYTHON_VERSION': sys.version.split()[0],
        'PYTHON_IMPLEMENTATION': platform.python_implementation(),
        'NUMPY_VERSION': numpy.__version__,
        'SCIPY_VERSION': scipy.__version__,
        'HOSTNAME': socket.gethostname(),
        'TIME': utcnow(),
        'COMMAND': getattr(settings, 'COMMAND', None),
        'SEED': getattr(settings, 'SEED', None),
        'CONFIG': settings.recorded(),
        'PARTIAL': False,
    }
    for k, v in extra.items():
        m[k.upper()] = v
    return m


def write_metadata(filename, metadata):
    dump_json(metadata, filename)
    logger.debug("Wrote metadata to %s", filename)
    return filename

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

import locale
import os
import signal
import sys


def _sigterm_as_sigint(sig, frame):
    os.kill(os.getpid(), signal.SIGINT)


def _die_by_sigint():
    # Let the calling shell see that we were interrupted
    signal.signal(signal.SIGINT, signal.SIG_DFL)
    os.kill(os.getpid(), signal.SIGINT)


def _dispatch(argv):
    from htmm import commands
    from htmm.errors import EXIT_NUMERICAL, HtmmError
    from htmm.loggers import get_logger, setup_console
    from htmm.settings import load

    setup_console()
    logger = get_logger(__name__)
    logger.debug("Running htmm %s (PID %d)", " ".join(argv), os.getpid())

    try:
        return commands.new(load(argv)).run()
    except HtmmError as e:
        logger.exception(str(e))
        return e.exit_code
    except Exception as e:
        logger.exception("Unexpected error: %r", e)
        return EXIT_NUMERICAL


def run_htmm(argv=None):
    """Command line entry point; returns the process exit code."""
    if sys.version_info[:2] < (3, 6):
        sys.stderr.write("htmm needs Python 3.6 or newer.\n")
        return 1
    try:
        locale.setlocale(locale.LC_ALL, '')
    except locale.Error:
        pass

    signal.signal(signal.SIGTERM, _sigterm_as_sigint)
    try:
        return _dispatch(sys.argv[1:] if argv is None else list(argv))
    except KeyboardInterrupt:
        try:
            _die_by_sigint()
        except OSError:
            pass
        return 130
    finally:
        signal.signal(signal.SIGTERM, signal.SIG_DFL)


__all__ = ['run_htmm']

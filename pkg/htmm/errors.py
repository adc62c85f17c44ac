# -*- coding: utf-8 -*-
#
# errors.py
#
# Date:     2 March 2026
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

# Exit codes used by the command line front end.
EXIT_OK = 0
EXIT_USER = 1
EXIT_NUMERICAL = 2


class HtmmError(RuntimeError):
    exit_code = EXIT_NUMERICAL


class ValidationError(HtmmError):
    """Malformed input: bad tree text, dataset lines, model files or flags."""
    exit_code = EXIT_USER


class TreeSyntaxError(ValidationError):

    def __init__(self, message, position=None):
        if position is not None:
            message = "%s (at position %d)" % (message, position)
        super(TreeSyntaxError, self).__init__(message)
        self.position = position


class NumericalError(HtmmError):
    """Zero-probability data, sampler underflow or a broken internal
    invariant."""
    exit_code = EXIT_NUMERICAL

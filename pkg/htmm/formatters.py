# -*- coding: utf-8 -*-
#
# formatters.py
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

import csv
import io
import json
import os
import sys

from htmm.errors import ValidationError
from htmm.loggers import get_logger
from htmm.trees import serialize_tree
from htmm.util import JSON_INDENT, classname, jsonable

logger = get_logger(__name__)


def new(name, output):
    formatter_name = classname(name, 'Formatter')
    if formatter_name not in globals():
        raise ValidationError("Formatter not found: '%s'." % name)
    logger.debug("Creating new %s for %s", formatter_name, output)
    return globals()[formatter_name](output)


def _num(value):
    """Full-precision text for a float; non-finite values as inf/-inf/nan."""
    return repr(float(value))


class Formatter(object):
    """Writes one artifact to a file name or "-" (standard output).

    The output location is checked on construction so that permission
    problems show up before any computation; the file itself is only
    created or truncated once there is something to write."""

    open_mode = "wt"

    def __init__(self, output):
        self.output = None
        self.check_output(output)

    def check_output(self, output):
        if hasattr(output, 'write') or output == "-":
            self.output = output
        elif os.path.exists(output):
            if os.path.isdir(output) or not os.access(output, os.W_OK):
                raise ValidationError(
                    "No write permission for output file '%s'" % output)
            self.output = output
        else:
            parent = os.path.dirname(os.path.abspath(output))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ValidationError(
                    "Unable to create output file '%s'" % output)
            self.output = output

    def open_output(self):
        output = self.output
        if hasattr(output, 'write'):
            return
        if output == "-":
            self.output = sys.stdout
        else:
            try:
                self.output = io.open(output, self.open_mode, encoding="utf-8",
                                      newline="")
            except IOError as e:
                raise ValidationError("Unable to output data: %s" % e)

    def write(self, string):
        try:
            self.output.write(string)
        except BrokenPipeError:
            pass

    def close(self):
        if hasattr(self.output, 'close') and self.output is not sys.stdout:
            self.output.close()
        elif hasattr(self.output, 'flush'):
            self.output.flush()

    def format(self, data):
        raise NotImplementedError()


class ScoreFormatter(Formatter):
    """One "index<TAB>log_likelihood" line per tree and a JSON summary line."""

    def format(self, result):
        self.open_output()
        for n, ll in enumerate(result.per_tree):
            self.write("%d\t%s\n" % (n, _num(ll)))
        footer = {'total': result.total,
                  'perplexity': result.perplexity,
                  'nodes': result.nodes,
                  'trees': len(result.per_tree)}
        self.write(json.dumps(jsonable(footer), sort_keys=True) + "\n")
        self.close()


class CsvFormatter(Formatter):

    header = ()

    def __init__(self, output):
        super(CsvFormatter, self).__init__(output)
        self.writer = None

    def open_output(self):
        super(CsvFormatter, self).open_output()
        if self.writer is None:
            self.writer = csv.writer(self.output, lineterminator="\n")
            self.writer.writerow(self.header)

    def add_row(self, *row):
        if self.writer is None:
            self.open_output()
        self.writer.writerow([_num(v) if isinstance(v, float) else v for v in row])

    def format(self, rows):
        self.open_output()
        for row in rows:
            self.add_row(*row)
        self.close()


class TraceFormatter(CsvFormatter):
    header = ("iteration", "log_likelihood")

    def format(self, trace):
        super(TraceFormatter, self).format(trace.rows())


class DiagnosticsFormatter(CsvFormatter):
    header = ("sweep", "joint_log_prob", "active_states")

    def add_row(self, *row):
        super(DiagnosticsFormatter, self).add_row(*row)
        self.output.flush()


class TreeFormatter(Formatter):

    def format(self, trees):
        self.open_output()
        for tree in trees:
            self.write(serialize_tree(tree) + "\n")
        self.close()


class JsonFormatter(Formatter):

    def format(self, obj):
        self.open_output()
        self.write(json.dumps(jsonable(obj), indent=JSON_INDENT, sort_keys=True)
                   + "\n")
        self.close()

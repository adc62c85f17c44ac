# -*- coding: utf-8 -*-
#
# loggers.py
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

"""Console, log file and worker-process logging.

The console gets two stderr handlers: warnings and errors prefixed with their
level, and bare INFO messages (silenced by --quiet, joined by DEBUG with
--verbose). Standard output is left to the report writers. Records seen before
a log file is opened are kept in a bounded cache and replayed into it.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
import logging.handlers
import sys

from collections import deque

DEBUG = logging.DEBUG
INFO = logging.INFO
WARNING = logging.WARNING

CACHE_SIZE = 200

err_handler = out_handler = cache_handler = None
logfiles = set()


class LogFormatter(logging.Formatter):
    """Formatter that can leave tracebacks out."""

    def __init__(self, fmt=None, datefmt=None, tracebacks=True):
        super(LogFormatter, self).__init__(fmt, datefmt)
        self.tracebacks = tracebacks

    def format(self, record):
        if self.tracebacks:
            return super(LogFormatter, self).format(record)
        saved = record.exc_info, record.exc_text
        record.exc_info = record.exc_text = None
        try:
            return super(LogFormatter, self).format(record)
        finally:
            record.exc_info, record.exc_text = saved


class RecordCache(logging.Handler):
    """Keeps the last CACHE_SIZE records for replay into a later log file."""

    def __init__(self, size=CACHE_SIZE):
        super(RecordCache, self).__init__()
        self.records = deque(maxlen=size)

    def emit(self, record):
        self.records.append(record)

    def replay(self, handler):
        for record in self.records:
            if record.levelno >= handler.level:
                handler.handle(record)


def _demote_warnings(record):
    # Library warnings (numpy, scipy) are debug noise for htmm users
    record.levelno, record.levelname = DEBUG, logging.getLevelName(DEBUG)
    return True


def _capture_warnings():
    logging.captureWarnings(True)
    logging.getLogger("py.warnings").addFilter(_demote_warnings)


def get_logger(name):
    return logging.getLogger(name)


def setup_console():
    global err_handler, out_handler, cache_handler

    if err_handler is not None:
        return

    root = logging.getLogger()

    err_handler = logging.StreamHandler(sys.stderr)
    err_handler.setLevel(WARNING)
    err_handler.setFormatter(LogFormatter("%(levelname)s: %(message)s",
                                          tracebacks=False))
    root.addHandler(err_handler)

    out_handler = logging.StreamHandler(sys.stderr)
    out_handler.setLevel(INFO)
    out_handler.setFormatter(LogFormatter("%(message)s"))
    out_handler.addFilter(lambda record: record.levelno < WARNING)
    root.addHandler(out_handler)

    cache_handler = RecordCache()
    root.addHandler(cache_handler)

    root.setLevel(DEBUG)
    _capture_warnings()
    logging.raiseExceptions = False


def set_console_level(level):
    if out_handler is not None:
        out_handler.setLevel(level)


def enable_exceptions():
    if err_handler is not None:
        err_handler.formatter.tracebacks = True


def reset_to_null():
    """Drop every root handler; used by the test suite to keep output quiet."""
    root = logging.getLogger()
    for h in root.handlers[:]:
        root.removeHandler(h)
    root.addHandler(logging.NullHandler())


def setup_logfile(filename, level=DEBUG, replay=True):
    if filename in logfiles:
        return None
    logfiles.add(filename)

    handler = logging.FileHandler(filename, encoding='utf-8')
    handler.setLevel(level)
    handler.setFormatter(LogFormatter(
        "%(asctime)s [%(name)s] %(levelname)s: %(message)s"))
    logging.getLogger().addHandler(handler)

    if replay and cache_handler is not None:
        cache_handler.replay(handler)
    return handler


def set_queue_handler(queue):
    """Pool initializer: route every record of a worker process to queue.

    Messages are rendered to text before enqueueing, tracebacks included, so
    records always pickle."""
    root = logging.getLogger()
    for h in root.handlers[:]:
        root.removeHandler(h)
    root.addHandler(logging.handlers.QueueHandler(queue))
    root.setLevel(DEBUG)
    _capture_warnings()


class RootForwarder(logging.Handler):
    """Hands records relayed from worker processes to the root logger."""

    def emit(self, record):
        logging.getLogger().handle(record)

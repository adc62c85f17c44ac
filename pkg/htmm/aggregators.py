# -*- coding: utf-8 -*-
#
# aggregators.py
#
# Date:     10 March 2026
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

"""Worker pool used to spread per-tree work over processes.

Results are always returned in submission order, so as long as callers chunk
their work independently of the number of workers, outputs do not depend on
the thread count.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from logging.handlers import QueueListener
from multiprocessing import Manager, Pool

from htmm import loggers

logger = loggers.get_logger(__name__)


def default_chunks(items, chunk_size=64):
    items = list(items)
    return [items[i:i + chunk_size] for i in range(0, len(items), chunk_size)]


class WorkerPool(object):
    """Map a function over work items, in-process for threads <= 1.

    Worker processes log through a managed queue that a relay thread feeds
    back into the root logger of the parent.

        with WorkerPool(4) as pool:
            results = pool.map(func, chunks)
    """

    def __init__(self, threads=1):
        self.threads = max(int(threads or 1), 1)
        self._manager = None
        self._pool = None
        self._queue = None
        self._relay = None

    @property
    def parallel(self):
        return self.threads > 1

    def start(self):
        if not self.parallel or self._pool is not None:
            return self
        logger.debug("Starting worker pool with %d processes", self.threads)
        self._manager = Manager()
        self._queue = self._manager.Queue(100)
        self._pool = Pool(self.threads, initializer=loggers.set_queue_handler,
                          initargs=(self._queue,))
        self._relay = QueueListener(self._queue, loggers.RootForwarder())
        self._relay.start()
        return self

    def map(self, func, items):
        items = list(items)
        if self._pool is None:
            return [func(i) for i in items]
        return self._pool.map(func, items, chunksize=1)

    def close(self, terminate=False):
        if self._pool is None:
            return
        try:
            if terminate:
                self._pool.terminate()
            else:
                self._pool.close()
            self._pool.join()
            self._relay.stop()
        except (EOFError, OSError):
            pass
        finally:
            self._manager.shutdown()
            self._pool = self._manager = self._queue = self._relay = None

    def __enter__(self):
        return self.start()

    def __exit__(self, exc_type, exc_value, tb):
        self.close(terminate=exc_type is not None)
        return False

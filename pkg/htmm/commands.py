# -*- coding: utf-8 -*-
#
# commands.py
#
# Date:     20 March 2026
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

"""The htmm subcommands.

Each command reads its inputs, checks every output location before doing any
work, runs and writes its artifacts plus a metadata file describing the run.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import os

from collections import Counter

import numpy as np

from htmm import formatters
from htmm.aggregators import WorkerPool
from htmm.build_info import MODEL_FORMAT_VERSION
from htmm.errors import ValidationError
from htmm.hdp import HdpHypers, run_chains
from htmm.inference import score_dataset
from htmm.loggers import get_logger
from htmm.metadata import record_metadata, write_metadata
from htmm.models import load_params, sample, save_params
from htmm.training import EmConfig, fit
from htmm.trees import load_alphabet, load_dataset, random_skeleton
from htmm.util import classname, dump_json, ensure_dir

logger = get_logger(__name__)

MODEL_FILE = "model.json"
TRACE_FILE = "trace.csv"
METADATA_FILE = "metadata.json"
DIAGNOSTICS_FILE = "diagnostics.csv"


def new(settings):
    cname = classname(settings.COMMAND, "Command")
    if cname not in globals():
        raise ValidationError("Unknown command: '%s'" % settings.COMMAND)
    return globals()[cname](settings)


def metadata_path(output):
    """Metadata file accompanying a single output file; None for stdout."""
    if output in (None, "-"):
        return None
    return output + ".metadata.json"


class Command(object):

    def __init__(self, settings):
        self.settings = settings
        self.alphabet = None
        if settings.ALPHABET:
            self.alphabet = load_alphabet(settings.ALPHABET)

    def load_data(self, M=None, L=None, allow_empty=False):
        s = self.settings
        M = M or s.ALPHABET_SIZE
        L = L or s.MAX_OUTDEGREE
        dataset = load_dataset(s.DATA, M, L, self.alphabet)
        if not allow_empty and len(dataset) == 0:
            raise ValidationError("Dataset '%s' holds no trees" % s.DATA)
        logger.info("Loaded %d trees (%d nodes, M=%d, L=%d) from %s",
                    len(dataset), dataset.node_count, dataset.M, dataset.L,
                    s.DATA)
        return dataset

    def load_model(self):
        params = load_params(self.settings.MODEL)
        kind = getattr(self.settings, 'KIND', None)
        if kind is not None and kind != params.kind:
            raise ValidationError("--kind %s given but '%s' holds a %s model"
                                  % (kind, self.settings.MODEL, params.kind))
        logger.info("Loaded %s model (C=%d, M=%d, L=%d) from %s",
                    params.kind.upper(), params.C, params.M, params.L,
                    self.settings.MODEL)
        return params

    def pool(self, jobs=None):
        threads = self.settings.THREADS
        if jobs is not None:
            threads = min(threads, jobs)
        return WorkerPool(threads)

    def metadata(self, **extra):
        return record_metadata(self.settings, **extra)

    def run(self):
        raise NotImplementedError()


class TrainCommand(Command):

    def run(self):
        s = self.settings
        out = ensure_dir(s.OUT)
        trace_out = formatters.new('trace', os.path.join(out, TRACE_FILE))
        dataset = self.load_data()
        config = EmConfig(max_iters=s.MAX_ITERS, rel_tol=s.REL_TOL,
                          smoothing=s.SMOOTHING, seed=s.SEED,
                          init_concentration=s.INIT_CONCENTRATION,
                          restarts=s.RESTARTS)

        with self.pool() as pool:
            params, trace = fit(s.KIND, dataset, s.STATES, config, pool)

        save_params(params, os.path.join(out, MODEL_FILE))
        trace_out.format(trace)
        write_metadata(os.path.join(out, METADATA_FILE), self.metadata(
            final_log_likelihood=trace.best,
            iterations=trace.iterations,
            converged=trace.converged,
            trace=trace.to_dict(),
            n_parameters=params.n_parameters(),
            dataset=dataset.stats()))
        logger.info("Wrote %s model with log-likelihood %.6f to %s",
                    s.KIND.upper(), trace.best, out)
        return 0


class ScoreCommand(Command):

    def run(self):
        s = self.settings
        output = s.OUT or "-"
        report = formatters.new('score', output)
        params = self.load_model()
        dataset = self.load_data(M=params.M, L=params.L)

        with self.pool() as pool:
            result = score_dataset(params.kind, params, dataset, pool)

        report.format(result)
        meta = metadata_path(output)
        if meta is not None:
            write_metadata(meta, self.metadata(total=result.total,
                                               perplexity=result.perplexity,
                                               nodes=result.nodes))
        logger.info("Total log-likelihood %.6f over %d nodes",
                    result.total, result.nodes)
        return 0


class SampleCommand(Command):

    def run(self):
        s = self.settings
        output = s.OUT or "-"
        writer = formatters.new('tree', output)
        params = self.load_model()
        rng = np.random.default_rng(s.SEED)

        if s.DATA:
            # Only the shapes are used, so labels are not checked against M
            skeletons = list(load_dataset(s.DATA, None, params.L))
            skeletons = [t for t in skeletons for _ in range(s.COUNT)]
        else:
            skeletons = [random_skeleton(s.NODES, params.L, s.BRANCHING, rng)
                         for _ in range(s.COUNT)]

        trees = [sample(params.kind, params, sk, rng) for sk in skeletons]
        writer.format(trees)
        meta = metadata_path(output)
        if meta is not None:
            write_metadata(meta, self.metadata(trees=len(trees)))
        logger.info("Sampled %d trees", len(trees))
        return 0


class ChainSink(object):
    """Writes the samples and diagnostics of one chain as they are produced.

    Files are opened lazily, so a sink can be shipped to a worker process."""

    def __init__(self, path):
        self.path = path
        self.diagnostics = None
        self.samples = 0

    def add_diagnostic(self, sweep, joint_log_prob, active):
        if self.diagnostics is None:
            self.diagnostics = formatters.new(
                'diagnostics', os.path.join(self.path, DIAGNOSTICS_FILE))
        self.diagnostics.add_row(sweep, joint_log_prob, active)

    def add_sample(self, n, state):
        d = state.to_dict()
        d['format_version'] = MODEL_FORMAT_VERSION
        dump_json(d, os.path.join(self.path, "sample-%04d.json" % n))
        self.samples += 1

    def close(self):
        if self.diagnostics is not None:
            self.diagnostics.close()
            self.diagnostics = None


def _mode(values):
    if not values:
        return None
    counts = Counter(values)
    return min(counts, key=lambda v: (-counts[v], v))


class GibbsCommand(Command):

    def run(self):
        s = self.settings
        out = ensure_dir(s.OUT)
        dataset = self.load_data()
        hypers = HdpHypers(gamma=s.GAMMA,
                           alpha_position=s.ALPHA_POSITION,
                           alpha_transition=s.ALPHA_TRANSITION,
                           alpha_switch=s.ALPHA_SWITCH,
                           emission_base=s.EMISSION_BASE,
                           truncation=s.TRUNCATION).validate(dataset.L)
        sinks = [ChainSink(ensure_dir(os.path.join(out, "chain-%d" % c)))
                 for c in range(s.CHAINS)]
        meta_file = os.path.join(out, METADATA_FILE)

        try:
            with self.pool(s.CHAINS) as pool:
                results = run_chains(dataset, hypers, s.SWEEPS, s.BURN_IN,
                                     s.THIN, s.SEED, s.CHAINS, pool, sinks,
                                     keep_samples=False)
        except KeyboardInterrupt:
            write_metadata(meta_file, self.metadata(partial=True,
                                                    hypers=hypers.to_dict()))
            logger.warning("Interrupted; partial chain output left in %s", out)
            raise

        chains = []
        for c, r in enumerate(results):
            kept = [a for sweep, _, a in r.diagnostics if sweep > s.BURN_IN]
            chains.append({'chain': c,
                           'seed': r.seed,
                           'active_states_mode': _mode(kept),
                           'active_states_median': float(np.median(kept)),
                           'final_joint_log_prob': r.diagnostics[-1][1],
                           'samples': len(range(s.BURN_IN + s.THIN, s.SWEEPS + 1,
                                                s.THIN))})
            logger.info("Chain %d: active-state mode %s after burn-in",
                        c, chains[-1]['active_states_mode'])
        write_metadata(meta_file, self.metadata(hypers=hypers.to_dict(),
                                                chains=chains,
                                                dataset=dataset.stats()))
        return 0


class ValidateCommand(Command):

    def run(self):
        s = self.settings
        report = formatters.new('json', s.OUT or "-")
        dataset = self.load_data(allow_empty=True)
        stats = dataset.stats()
        if s.MODEL:
            params = self.load_model()
            params.check_dataset(dataset)
            stats['model'] = {'kind': params.kind, 'C': params.C,
                              'M': params.M, 'L': params.L,
                              'n_parameters': params.n_parameters(),
                              'compatible': True}
        report.format(stats)
        logger.info("Dataset %s is valid: %d trees, %d nodes",
                    s.DATA, stats['trees'], stats['nodes'])
        return 0

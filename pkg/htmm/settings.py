# -*- coding: utf-8 -*-
#
# settings.py
#
# Date:     19 March 2026
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

import argparse
import os
import sys

from copy import deepcopy

from htmm import loggers
from htmm.build_info import VERSION
from htmm.errors import ValidationError
from htmm.hdp import DEFAULT_TRUNCATION
from htmm.loggers import get_logger
from htmm.models import KINDS
from htmm.training import DEFAULT_MAX_ITERS, DEFAULT_REL_TOL, DEFAULT_SMOOTHING
from htmm.util import ArgParser, FuncAction, float_list, load_json, \
    nonneg_float, nonneg_int, positive_float, positive_int

logger = get_logger(__name__)

COMMANDS = ('train', 'score', 'sample', 'gibbs', 'validate')

DEFAULT_SETTINGS = {
    'COMMAND': None,
}

# Dests that describe how a run is logged rather than what it computes
UNRECORDED = ('LOG_LEVEL', 'LOG_FILE', 'DEBUG_ERROR', 'CONFIG')


class Version(FuncAction):

    def __call__(*args):
        import numpy
        import scipy
        logger.info("htmm v%s.\nRunning on Python %s.",
                    VERSION, sys.version.replace("\n", " "))
        logger.info("Using numpy %s and scipy %s.",
                    numpy.__version__, scipy.__version__)
        sys.exit(0)


class LogLevel(FuncAction):

    def __init__(self, option_strings, dest, level=None, **kwargs):
        super(LogLevel, self).__init__(option_strings, dest, **kwargs)
        self.level = level

    def __call__(self, parser, namespace, values, option_string=None):
        loggers.set_console_level(self.level)
        setattr(namespace, self.dest, self.level)


class LogFile(argparse.Action):

    def __call__(self, parser, namespace, values, option_string=None):
        loggers.setup_logfile(values)
        setattr(namespace, self.dest, values)


class Debug(argparse.Action):
    def __init__(self, option_strings, dest, help=None):
        super(Debug, self).__init__(option_strings, dest,
                                    default=False, nargs=0,
                                    help=help)

    def __call__(self, parser, namespace, values, option_string=None):
        loggers.enable_exceptions()
        setattr(namespace, self.dest, True)


def add_common_args(p):
    io_group = p.add_argument_group("Input and output")

    io_group.add_argument(
        "--data",
        action="store", type=str, dest="DATA", metavar="FILE",
        help="Dataset file, one tree per line.")

    io_group.add_argument(
        "--model",
        action="store", type=str, dest="MODEL", metavar="FILE",
        help="Model file (JSON) to read.")

    io_group.add_argument(
        "--out",
        action="store", type=str, dest="OUT", metavar="PATH",
        help="Output file or directory (see the command). '-' is standard "
        "output where a single file is written.")

    io_group.add_argument(
        "--alphabet",
        action="store", type=str, dest="ALPHABET", metavar="FILE",
        help="Symbol file, one label symbol per line; fixes the alphabet size.")

    io_group.add_argument(
        "--alphabet-size",
        action="store", type=positive_int, dest="ALPHABET_SIZE", metavar="M",
        help="Number of distinct labels (default: inferred from the data).")

    io_group.add_argument(
        "--max-outdegree",
        action="store", type=positive_int, dest="MAX_OUTDEGREE", metavar="L",
        help="Maximum number of child positions (default: inferred from the "
        "data).")

    run_group = p.add_argument_group("Run control")

    run_group.add_argument(
        "--seed",
        action="store", type=nonneg_int, dest="SEED", default=0,
        help="Random seed (default %(default)s).")

    run_group.add_argument(
        "--threads",
        action="store", type=positive_int, dest="THREADS", default=1,
        help="Worker processes for per-tree work and chains "
        "(default %(default)s). Results do not depend on this.")

    run_group.add_argument(
        "--config",
        action="store", type=str, dest="CONFIG", metavar="FILE",
        help="JSON object of default values, keyed by flag name. Flags given "
        "on the command line take precedence.")

    misc_group = p.add_argument_group("Misc and debugging options")

    misc_group.add_argument(
        "--log-file",
        action=LogFile, type=str, dest="LOG_FILE", metavar="FILE",
        help="Write debug log to this file.")

    misc_group.add_argument(
        "--verbose",
        action=LogLevel, level=loggers.DEBUG, dest="LOG_LEVEL",
        help="Enable verbose logging to console.")

    misc_group.add_argument(
        "--quiet",
        action=LogLevel, level=loggers.WARNING, dest="LOG_LEVEL",
        help="Only log warnings and errors to console.")

    misc_group.add_argument(
        "--debug-error",
        action=Debug, dest="DEBUG_ERROR",
        help="Print full exception backtraces to console.")


def add_model_args(p, kind_required=False):
    group = p.add_argument_group("Model")

    group.add_argument(
        "--kind",
        action="store", type=str, dest="KIND", choices=KINDS,
        help="Model direction: td (top-down) or bu (bottom-up)%s."
        % (" (required)" if kind_required else ""))

    group.add_argument(
        "--states",
        action="store", type=positive_int, dest="STATES", metavar="C",
        help="Number of hidden states.")


def add_train_args(p):
    group = p.add_argument_group("EM training")

    group.add_argument(
        "--max-iters",
        action="store", type=positive_int, dest="MAX_ITERS",
        default=DEFAULT_MAX_ITERS,
        help="Maximum number of EM iterations (default %(default)s).")

    group.add_argument(
        "--rel-tol",
        action="store", type=positive_float, dest="REL_TOL",
        default=DEFAULT_REL_TOL,
        help="Stop when the relative log-likelihood improvement falls below "
        "this (default %(default)s).")

    group.add_argument(
        "--smoothing",
        action="store", type=nonneg_float, dest="SMOOTHING",
        default=DEFAULT_SMOOTHING,
        help="Pseudocount added to every expected count (default %(default)s). "
        "With 0 the log-likelihood never decreases.")

    group.add_argument(
        "--init-concentration",
        action="store", type=positive_float, dest="INIT_CONCENTRATION",
        default=1.0,
        help="Symmetric Dirichlet concentration of the random initial "
        "parameters (default %(default)s).")

    group.add_argument(
        "--restarts",
        action="store", type=positive_int, dest="RESTARTS", default=1,
        help="Run EM from this many seeds (seed, seed+1, ...) and keep the "
        "best (default %(default)s).")


def add_sample_args(p):
    group = p.add_argument_group("Skeletons")

    group.add_argument(
        "--nodes",
        action="store", type=positive_int, dest="NODES",
        help="Generate random skeletons of at most this many nodes instead of "
        "reading them from --data.")

    group.add_argument(
        "--branching",
        action="store", type=nonneg_float, dest="BRANCHING", default=0.5,
        help="Probability that a child slot of a random skeleton is filled "
        "(default %(default)s).")

    group.add_argument(
        "--count",
        action="store", type=positive_int, dest="COUNT", default=1,
        help="Samples per skeleton, or number of random skeletons "
        "(default %(default)s).")


def add_gibbs_args(p):
    group = p.add_argument_group("Nonparametric model")

    group.add_argument(
        "--truncation",
        action="store", type=positive_int, dest="TRUNCATION",
        default=DEFAULT_TRUNCATION,
        help="Weak-limit truncation level K (default %(default)s).")

    group.add_argument(
        "--gamma",
        action="store", type=positive_float, dest="GAMMA", default=1.0,
        help="Top-level stick-breaking concentration (default %(default)s).")

    group.add_argument(
        "--alpha-position",
        action="store", type=float_list, dest="ALPHA_POSITION", default=[1.0],
        metavar="A[,A...]",
        help="Per-position concentration, one value shared by all positions "
        "or one per position (default 1.0).")

    group.add_argument(
        "--alpha-transition",
        action="store", type=positive_float, dest="ALPHA_TRANSITION",
        default=1.0,
        help="Transition-level concentration (default %(default)s).")

    group.add_argument(
        "--alpha-switch",
        action="store", type=positive_float, dest="ALPHA_SWITCH", default=1.0,
        help="Dirichlet concentration of the switch distribution "
        "(default %(default)s).")

    group.add_argument(
        "--emission-base",
        action="store", type=positive_float, dest="EMISSION_BASE", default=0.5,
        help="Symmetric Dirichlet concentration of the emission rows "
        "(default %(default)s).")

    chain_group = p.add_argument_group("Chains")

    chain_group.add_argument(
        "--sweeps",
        action="store", type=positive_int, dest="SWEEPS", default=1000,
        help="Gibbs sweeps per chain (default %(default)s).")

    chain_group.add_argument(
        "--burn-in",
        action="store", type=nonneg_int, dest="BURN_IN", default=200,
        help="Sweeps discarded before samples are kept (default %(default)s).")

    chain_group.add_argument(
        "--thin",
        action="store", type=positive_int, dest="THIN", default=10,
        help="Keep every n'th sweep after burn-in (default %(default)s).")

    chain_group.add_argument(
        "--chains",
        action="store", type=positive_int, dest="CHAINS", default=1,
        help="Independent chains, seeded from --seed (default %(default)s).")


def build_parser():
    parser = ArgParser(
        prog="htmm",
        description="Hidden tree Markov models: exact inference, EM training "
        "and nonparametric Gibbs sampling on labelled trees.")

    parser.add_argument(
        "--version",
        action=Version,
        help="Show htmm version information and exit.")

    sub = parser.add_subparsers(dest="COMMAND", metavar="command",
                                parser_class=ArgParser)
    sub.required = True

    p = sub.add_parser(
        "train", help="Fit a finite TD or BU model with EM.",
        description="Fit a finite model with EM. Writes model.json, trace.csv "
        "and metadata.json into the --out directory.")
    add_model_args(p, kind_required=True)
    add_train_args(p)
    add_common_args(p)

    p = sub.add_parser(
        "score", help="Log-likelihood of every tree under a model.",
        description="Score a dataset under a model file. Writes one line per "
        "tree and a JSON summary to --out (default standard output).")
    add_model_args(p)
    add_common_args(p)

    p = sub.add_parser(
        "sample", help="Draw labelled trees from a model.",
        description="Sample labels for skeletons read from --data or generated "
        "with --nodes. Writes one tree per line to --out (default standard "
        "output).")
    add_sample_args(p)
    add_common_args(p)

    p = sub.add_parser(
        "gibbs", help="Run the nonparametric BU Gibbs sampler.",
        description="Run Gibbs chains of the infinite BU model. Writes "
        "chain-N/sample-NNNN.json, chain-N/diagnostics.csv and metadata.json "
        "into the --out directory.")
    add_gibbs_args(p)
    add_common_args(p)

    p = sub.add_parser(
        "validate", help="Check a dataset (and optionally a model) and print "
        "statistics.",
        description="Parse a dataset, print its statistics as JSON and, with "
        "--model, check that the model fits it.")
    add_common_args(p)

    return parser


parser = build_parser()


class Settings(argparse.Namespace):

    def __init__(self, defs):
        defaults = {}
        for k, v in defs.items():
            defaults[k] = deepcopy(v)
        argparse.Namespace.__init__(self, **defaults)

    def recorded(self):
        """The configuration of this run, as written into metadata files."""
        return {k: v for k, v in sorted(vars(self).items())
                if k.isupper() and k not in UNRECORDED}

    def load_config(self, subparser):
        if not getattr(self, 'CONFIG', None):
            return {}
        logger.debug("Loading config file %s", self.CONFIG)
        items = load_json(self.CONFIG)
        if not isinstance(items, dict):
            raise ValidationError("Config file '%s' must hold a JSON object"
                                  % self.CONFIG)
        try:
            return parse_config_values(subparser, items)
        except (ValueError, TypeError, argparse.ArgumentTypeError) as e:
            raise ValidationError("Unable to parse config file '%s': %s"
                                  % (self.CONFIG, e))

    def process_args(self):
        cmd = self.COMMAND
        needs_data = cmd in ('train', 'score', 'gibbs', 'validate')
        if needs_data and not self.DATA:
            raise ValidationError("The %s command needs --data" % cmd)
        if cmd in ('score', 'sample') and not self.MODEL:
            raise ValidationError("The %s command needs --model" % cmd)
        if cmd in ('train', 'gibbs') and not self.OUT:
            raise ValidationError("The %s command needs an --out directory" % cmd)
        if cmd == 'train':
            if self.KIND is None:
                raise ValidationError("The train command needs --kind (td or bu)")
            if self.STATES is None:
                raise ValidationError("The train command needs --states")
        if cmd == 'sample' and not self.DATA and not self.NODES:
            raise ValidationError("The sample command needs skeletons: "
                                  "--data or --nodes")
        if cmd == 'sample' and not 0 <= self.BRANCHING <= 1:
            raise ValidationError("--branching must be in [0, 1]")
        if cmd == 'gibbs' and self.SWEEPS <= self.BURN_IN:
            raise ValidationError("--sweeps (%d) must exceed --burn-in (%d)"
                                  % (self.SWEEPS, self.BURN_IN))

        for name in ('DATA', 'MODEL', 'ALPHABET'):
            path = getattr(self, name, None)
            if path and not os.path.isfile(path):
                raise ValidationError("File not found: '%s' (--%s)"
                                      % (path, name.lower()))
        return self


def parse_config_values(subparser, items):
    vals = {}
    for key, v in items.items():
        dest = subparser.dest_for(key)
        if dest is None or dest in ('COMMAND', 'CONFIG', 'help'):
            raise ValueError("unknown key '%s'" % key)
        t = subparser.get_type(dest)
        if t is bool:
            if not isinstance(v, bool):
                raise ValueError("'%s' must be true or false" % key)
            vals[dest] = v
        elif t is float_list and isinstance(v, (list, tuple)):
            vals[dest] = [positive_float(i) for i in v]
        elif t is not None and v is not None:
            val = t(v if isinstance(v, str) else str(v))
            c = subparser.get_choices(dest)
            if c and val not in c:
                raise ValueError("invalid value '%s' for '%s'" % (val, key))
            vals[dest] = val
        else:
            vals[dest] = v
        logger.debug("Set value %s=%s from config file", dest, vals[dest])
    return vals


def load(argv):
    logger.debug("Starting htmm %s using Python %s.", VERSION,
                 sys.version.split()[0])

    # Two passes: the first finds the command and the config file, whose
    # values then become defaults that explicit flags override.
    p = build_parser()
    settings = p.parse_args(argv, namespace=Settings(DEFAULT_SETTINGS))
    subparser = p.get_subparser(settings.COMMAND)
    vals = settings.load_config(subparser)
    if vals:
        subparser.set_defaults(**{k: v for k, v in vals.items()
                                  if getattr(settings, k, None) ==
                                  subparser.get_default(k)})
        settings = p.parse_args(argv, namespace=Settings(DEFAULT_SETTINGS))

    return settings.process_args()

# -*- coding: utf-8 -*-
#
# util.py
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

import argparse
import io
import json
import math
import os
import sys

from datetime import datetime

import numpy as np

try:
    from datetime import UTC
except ImportError:
    UTC = None

from htmm.errors import ValidationError
from htmm.loggers import get_logger

logger = get_logger(__name__)

# Controls pretty-printing of json dumps
JSON_INDENT = 2


def uscore_to_camel(s):
    """Turn a underscore style string (score_report) into a CamelCase style
    string (ScoreReport) for class names."""
    return ''.join(x.capitalize() for x in s.split("_"))


def classname(s, suffix=''):
    return uscore_to_camel(s) + suffix


def utcnow():
    if UTC is None:
        return datetime.utcnow()
    return datetime.now(UTC).replace(tzinfo=None)


def format_date(dt, fmt="%Y-%m-%dT%H:%M:%S.%f"):
    return dt.strftime(fmt + "Z")


def derive_seed(seed, index):
    """Seed for the index'th independent stream below a master seed. Streams
    for different indices never overlap, which plain seed+index does not
    guarantee."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def sample_categorical(rng, p):
    """Draw one index from the (possibly unnormalised) weights p.

    Uses a single uniform per draw, so the stream position advances the same
    way regardless of the weights."""
    cdf = np.cumsum(p)
    total = cdf[-1]
    if not total > 0 or not math.isfinite(total):
        raise ValueError("Cannot sample from weights summing to %r" % total)
    idx = int(np.searchsorted(cdf, rng.random() * total, side='right'))
    # Guard against landing on a trailing zero-weight entry through rounding
    while idx > 0 and (idx >= len(cdf) or p[idx] <= 0):
        idx -= 1
    return idx


def jsonable(obj):
    """Convert numpy containers and non-finite floats into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        if not math.isfinite(obj):
            return None
        return obj
    if isinstance(obj, datetime):
        return format_date(obj)
    return obj


def dump_json(obj, filename):
    with io.open(filename, "wt", encoding="utf-8") as fp:
        json.dump(jsonable(obj), fp, indent=JSON_INDENT, sort_keys=True)
        fp.write("\n")


def load_json(filename):
    try:
        with io.open(filename, "rt", encoding="utf-8") as fp:
            return json.load(fp)
    except IOError as e:
        raise ValidationError("Unable to read '%s': %s" % (filename, e))
    except ValueError as e:
        raise ValidationError("Invalid JSON in '%s': %s" % (filename, e))


def ensure_dir(path):
    if not os.path.isdir(path):
        try:
            os.makedirs(path)
        except OSError as e:
            raise ValidationError("Unable to create output directory '%s': %s"
                                  % (path, e))
    if not os.access(path, os.W_OK):
        raise ValidationError("No write permission for output directory '%s'"
                              % path)
    return path


def positive_int(value):
    try:
        val = int(value)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError("Invalid integer value: %s" % value)
    if val < 1:
        raise argparse.ArgumentTypeError("Value must be positive: %s" % value)
    return val


def nonneg_int(value):
    try:
        val = int(value)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError("Invalid integer value: %s" % value)
    if val < 0:
        raise argparse.ArgumentTypeError("Value must be non-negative: %s" % value)
    return val


def positive_float(value):
    try:
        val = float(value)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError("Invalid number: %s" % value)
    if not val > 0 or not math.isfinite(val):
        raise argparse.ArgumentTypeError("Value must be positive: %s" % value)
    return val


def nonneg_float(value):
    try:
        val = float(value)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError("Invalid number: %s" % value)
    if not val >= 0 or not math.isfinite(val):
        raise argparse.ArgumentTypeError("Value must be non-negative: %s" % value)
    return val


def float_list(value):
    try:
        return [positive_float(v.strip()) for v in value.split(",") if v.strip()]
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError("Invalid list of positive numbers: %s"
                                         % value)


# Argparse stuff

class FuncAction(argparse.Action):

    def __init__(self, option_strings, dest, help=None):
        super(FuncAction, self).__init__(option_strings,
                                         dest,
                                         nargs=0,
                                         required=False,
                                         help=help)


class ArgParser(argparse.ArgumentParser):

    def get_action(self, dest):
        for action in self._actions:
            if action.dest == dest:
                return action
        return None

    def get_type(self, dest):
        action = self.get_action(dest)
        if action is None:
            return None
        # StoreConst actions don't store the action type
        if isinstance(action, (argparse._StoreConstAction)):
            return type(action.const)
        return action.type

    def get_choices(self, dest):
        action = self.get_action(dest)
        if action is not None and action.choices:
            return action.choices
        return None

    def dest_for(self, key):
        """Map a config file key (dest or long flag name, any case) to a
        dest."""
        norm = key.strip().lstrip("-").replace("-", "_").upper()
        for action in self._actions:
            if action.dest.upper() == norm:
                return action.dest
            for opt in action.option_strings:
                if opt.lstrip("-").replace("-", "_").upper() == norm:
                    return action.dest
        return None

    def get_subparser(self, name):
        for action in self._actions:
            if isinstance(action, argparse._SubParsersAction):
                return action.choices.get(name)
        return None

    def __contains__(self, dest):
        return self.get_action(dest) is not None

    def error(self, message):
        # Flag errors are user errors, reported like every other one
        self.print_usage(sys.stderr)
        raise ValidationError("%s: %s" % (self.prog, message))

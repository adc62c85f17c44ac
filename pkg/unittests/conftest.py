# -*- coding: utf-8 -*-
#
# conftest.py
#
# Collection wiring for pytest. Some TestCase classes take constructor
# arguments and are instantiated into each module's ``test_suite`` (the
# unittest ``load_tests`` entry point). pytest cannot build those itself, so
# collect the instances from ``test_suite`` and run each one as an item.

import inspect
import unittest

import pytest


def _takes_arguments(cls):
    init = cls.__init__
    if init is unittest.TestCase.__init__:
        return False
    params = list(inspect.signature(init).parameters.values())[1:]
    return any(p.default is p.empty and
               p.kind in (p.POSITIONAL_ONLY, p.POSITIONAL_OR_KEYWORD)
               for p in params)


def _iter_suite(suite):
    for test in suite:
        if isinstance(test, unittest.TestSuite):
            for sub in _iter_suite(test):
                yield sub
        else:
            yield test


def _runner(test):
    def run():
        result = unittest.TestResult()
        test.run(result)
        problems = result.errors + result.failures
        if problems:
            pytest.fail("\n".join(tb for _, tb in problems), pytrace=False)
        if result.skipped:
            pytest.skip(result.skipped[0][1])
    return run


def pytest_pycollect_makeitem(collector, name, obj):
    if not (inspect.isclass(obj) and issubclass(obj, unittest.TestCase)
            and _takes_arguments(obj)):
        return None
    suite = getattr(collector.obj, "test_suite", None)
    if suite is None:
        return []
    return [pytest.Function.from_parent(collector, name="%s[%s]" % (name, test),
                                        callobj=_runner(test))
            for test in _iter_suite(suite) if type(test) is obj]

"""Stochastic block dual averaging: instance generators, solvers and checks."""

import json as _json

from ._sbda import (
    Oracle,
    check_names,
    initial_gamma,
    joint_optimum,
    load_instance,
    optimal_sampling,
    resolve_params,
    run_checks,
)
from . import _sbda

__all__ = [
    "Oracle",
    "check_names",
    "generate",
    "initial_gamma",
    "joint_optimum",
    "load_instance",
    "optimal_sampling",
    "resolve_params",
    "run",
    "run_checks",
]


def generate(**problem):
    """Builds an instance from problem-section keys, e.g. generator="l1reg", dim=50."""
    return _sbda.generate(_json.dumps({"problem": problem}))


def run(config, oracle=None, record_trace=True):
    """Runs one algorithm. `config` is a run-config dict (same schema as the CLI).

    Returns a dict with the averaged and final points, the trace and the
    block parameters that were used.
    """
    return _sbda.run(_json.dumps(config), oracle, record_trace)

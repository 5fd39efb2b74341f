"""Python bindings for the nash-realize C++ library.

Reports come back from the core as JSON text; the wrappers here decode them.
"""

import json

from ._core import (
    Isomorphism,
    NashError,
    Realization,
    RunConfig,
    System,
    __version__,
    experiment_ids,
    load_system,
    system_from_json,
)
from . import _core


def config(**kwargs):
    """RunConfig with the given fields overridden."""
    cfg = RunConfig()
    for key, value in kwargs.items():
        if not hasattr(cfg, key):
            raise TypeError(f"unknown config field {key!r}")
        setattr(cfg, key, value)
    return cfg


def _cfg(cfg):
    return RunConfig() if cfg is None else cfg


def simulate(system, word, cfg=None):
    """Trajectory report for a word given as [["a0", 0.5], ...]."""
    return json.loads(_core.simulate(system, json.dumps(word), _cfg(cfg)))


def response_trdeg(system, cfg=None):
    return json.loads(_core.response_trdeg(system, _cfg(cfg)))


def reachable_trdeg(system, cfg=None):
    return json.loads(_core.reachable_trdeg(system, _cfg(cfg)))


def obs_trdeg(system, depth=None, cfg=None):
    return json.loads(_core.obs_trdeg(system, system.dim if depth is None else depth, _cfg(cfg)))


def reachability_reduce(system, cfg=None):
    return _core.reachability_reduce(system, _cfg(cfg))


def observability_reduce(system, cfg=None, restrict_to_reachable=False):
    return _core.observability_reduce(system, _cfg(cfg), restrict_to_reachable)


def minimize(system, cfg=None):
    return _core.minimize(system, _cfg(cfg))


def verify(realization, cfg=None):
    return json.loads(realization.verify(_cfg(cfg)))


def check_minimality(system, cfg=None):
    return json.loads(_core.check_minimality(system, _cfg(cfg)))


def construct_isomorphism(system1, system2, cfg=None):
    return _core.construct_isomorphism(system1, system2, _cfg(cfg))


def verify_isomorphism(iso, cfg=None):
    return json.loads(iso.verify(_cfg(cfg)))


def run_experiment(exp_id, catalog, cfg=None):
    return json.loads(_core.run_experiment(exp_id, str(catalog), _cfg(cfg)))


__all__ = [
    "Isomorphism",
    "NashError",
    "Realization",
    "RunConfig",
    "System",
    "__version__",
    "check_minimality",
    "config",
    "construct_isomorphism",
    "experiment_ids",
    "load_system",
    "minimize",
    "obs_trdeg",
    "observability_reduce",
    "reachability_reduce",
    "reachable_trdeg",
    "response_trdeg",
    "run_experiment",
    "simulate",
    "system_from_json",
    "verify",
    "verify_isomorphism",
]

"""Frozen calibration constants.

The implied constants of the decay and counting estimates are not effective,
so they are measured once by ``disclab calibrate`` and frozen in a versioned
JSON file shipped with the package. ``DISCLAB_CONSTANTS`` overrides the path.
"""

from __future__ import annotations

import json
import os
from functools import lru_cache
from importlib import resources
from pathlib import Path

ENV_VAR = "DISCLAB_CONSTANTS"

REQUIRED = (
    "version",
    "sector_threshold",      # c': sector estimate applies for |xi| >= c'/(theta R)
    "global_threshold",      # c'': global estimate applies for |xi| >= c''/R
    "sector_ratio_spread",   # max/min of phi theta |xi|^3 / R over the calibration sweep
    "global_ratio_floor",    # lower bound asserted for phi |xi|^4
    "amplification_k",       # lower bound asserted for the dilation amplification ratio
    "cover_far_C1",          # Phi(m) |m| / X <= C1 for |m| >= Y
    "cover_near_C2",         # Phi(m) <= C2 theta X / Y
    "rho_c",                 # rho = c min(1/(theta X^3), 1/(theta X Y^3))
    "montgomery_c",          # sum >= N area(U)/4 - c N^2
)


def constants_path() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    return Path(str(resources.files("disclab") / "data" / "constants.json"))


@lru_cache(maxsize=None)
def _load(path: str) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    missing = [k for k in REQUIRED if k not in data]
    if missing:
        raise KeyError(f"constants file {path} lacks {missing}")
    return data


def get_constants() -> dict:
    return dict(_load(str(constants_path())))


def get(name: str) -> float:
    return get_constants()[name]

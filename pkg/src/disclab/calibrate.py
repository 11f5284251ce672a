"""Calibration sweeps that produce the frozen constants file.

The sweeps here are deliberately denser than, and offset from, the ones the
test-suite asserts with, so the frozen values are checked on fresh samples.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import certificate, fourier
from .fourier import DEFAULT_QUAD
from .geometry import RotRect, Vec2
from .pointsets import gen_random

VERSION = "2026.10.1"
SECTOR_THRESHOLD = 2.0
GLOBAL_THRESHOLD = 0.25
THETAS = (math.pi / 16, math.pi / 8, math.pi / 4)
SAFETY = 0.5


def sector_spread(R=1 / 16, q=DEFAULT_QUAD) -> float:
    worst = 1.0
    for th in THETAS:
        mags = np.geomspace(SECTOR_THRESHOLD / (th * R), 2 ** 10 * SECTOR_THRESHOLD / (th * R), 24)
        vals = []
        for frac in (-0.45, -0.2, 0.0, 0.1, 0.3, 0.45):
            arg = frac * th
            phi = fourier.phi_avg_many(R, th, mags * math.cos(arg), mags * math.sin(arg), q)
            vals.append(phi * th * mags ** 3 / R)
        vals = np.concatenate(vals)
        worst = max(worst, float(vals.max() / vals.min()))
    return worst


def global_floor(R=1 / 16, q=DEFAULT_QUAD) -> float:
    low = math.inf
    for th in THETAS:
        mags = np.geomspace(16 / R, 1000 / R, 12)
        args = np.linspace(0, 2 * math.pi, 32, endpoint=False) + 0.013
        args = np.concatenate([args, [0.0, math.pi / 2, math.pi / 4]])
        x1 = np.outer(mags, np.cos(args))
        x2 = np.outer(mags, np.sin(args))
        vals = fourier.phi_avg_many(R, th, x1, x2, q) * np.hypot(x1, x2) ** 4
        low = min(low, float(vals.min()))
    return low


def amplification_floor(R=1 / 64, q=DEFAULT_QUAD) -> float:
    low = math.inf
    for a in (2, 3, 4, 6, 8):
        for mag in np.geomspace(16, 256, 7):
            for arg in (0.0, math.pi / 16, math.pi / 8, math.pi / 4, 1.0):
                xi = (mag * math.cos(arg), mag * math.sin(arg))
                low = min(low, fourier.amplification_ratio(a, R, xi, q))
    return low


def cover_maxima():
    far = near = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for e in range(10, 21, 2):
            for th in (math.pi / 8, math.pi / 6):
                rep = certificate.check_cover_bounds(certificate.build_cover(2 ** e, th))
                far, near = max(far, rep.far_max), max(near, rep.near_max)
    return far, near


def rho_constant(q=DEFAULT_QUAD) -> float:
    """Largest c with c min(1/(theta X^3), 1/(theta X Y^3)) Phi(m) <= phi(m) on sampled covers."""
    best = math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for n in (2 ** 12, 2 ** 14):
            for th in (math.pi / 8, math.pi / 6):
                cover = certificate.build_cover(n, th)
                m1, m2, counts = certificate.certificate_modes(cover)
                phi = fourier.phi_avg_many(certificate.CERT_R, th, m1.astype(float), m2.astype(float), q)
                unit = certificate.rho(cover, 1.0)
                best = min(best, float(np.min(phi / (counts * unit))))
    return best


def montgomery_constant() -> float:
    """Largest observed (N area(U)/4 - sum)/N^2 over random sets and symmetric rectangles."""
    worst = -math.inf
    rng = np.random.Generator(np.random.PCG64(20261016))
    for trial in range(24):
        n = (8, 16, 32, 64)[trial % 4]
        P = gen_random(n, 1000 + trial)
        for _ in range(4):
            hu, hv = rng.uniform(1.0, 24.0, 2)
            U = RotRect(Vec2(0.0, 0.0), hu, hv, rng.uniform(-math.pi / 4, math.pi / 4))
            s = certificate.montgomery_sum(P, U, 0.5)
            worst = max(worst, (n * U.area / 4 - s) / n ** 2)
    return worst


def calibrate(progress=None) -> dict:
    def note(msg):
        if progress:
            progress(msg)

    note("sector spread")
    spread = sector_spread()
    note("global floor")
    gfloor = global_floor()
    note("amplification floor")
    amp = amplification_floor()
    note("cover maxima")
    far, near = cover_maxima()
    note("rho constant")
    rho_c = rho_constant()
    note("montgomery constant")
    mont = montgomery_constant()
    return {
        "version": VERSION,
        "sector_threshold": SECTOR_THRESHOLD,
        "global_threshold": GLOBAL_THRESHOLD,
        "sector_ratio_spread": spread,
        "global_ratio_floor": SAFETY * gfloor,
        "amplification_k": SAFETY * amp,
        "cover_far_C1": 1.25 * far,
        "cover_near_C2": 1.25 * near,
        "rho_c": SAFETY * rho_c,
        "montgomery_c": max(mont, 0.0) * 1.25 + 1e-3,
        "measured": {
            "global_ratio_min": gfloor, "amplification_min": amp, "cover_far_max": far,
            "cover_near_max": near, "rho_c_max": rho_c, "montgomery_excess_max": mont,
        },
    }

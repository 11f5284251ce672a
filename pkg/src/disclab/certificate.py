"""Sector covers in frequency space, Montgomery sums, and per-point-set lower
bounds for the dilation/rotation averaged L2 directional discrepancy."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import constants, fourier
from .discrepancy import avg_l2_disc
from .fourier import DEFAULT_QUAD, QuadSpec
from .geometry import RotRect, Vec2

CERT_R = 1 / 16


class InfeasibleCoverError(ValueError):
    """The cover parameters violate theta X >= Y, i.e. N is below ~theta^-5."""


@dataclass(frozen=True)
class SectorCover:
    theta: float
    kappa: float
    n_target: int
    X: float
    Y: float
    psi: float
    M: int
    rects: tuple
    cond2: bool  # theta X >= Y
    cond3: bool  # theta Y >= 1

    @property
    def degenerate(self) -> bool:
        return self.M == 0

    @property
    def feasible(self) -> bool:
        return self.cond2

    @property
    def radius(self) -> float:
        return math.hypot(self.X, self.Y) / 2

    def meta(self) -> dict:
        return {"X": self.X, "Y": self.Y, "psi": self.psi, "M": self.M, "rectangles": len(self.rects),
                "degenerate": self.degenerate, "cond2": self.cond2, "cond3": self.cond3}


def build_cover(n: int, theta: float, kappa: float = 1.0) -> SectorCover:
    """Rotated X-by-Y frequency rectangles, XY = kappa n, stepping by psi = Y/X."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < theta < math.pi / 4:
        raise ValueError("theta must lie in (0, pi/4)")
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    X = kappa ** 0.6 * n ** 0.6
    Y = kappa ** 0.4 * n ** 0.4
    psi = Y / X
    M = int(math.floor(theta / (2 * psi)))
    rects = tuple(RotRect(Vec2(0.0, 0.0), X / 2, Y / 2, j * psi) for j in range(-M, M + 1))
    cover = SectorCover(theta, kappa, n, X, Y, psi, M, rects, theta * X >= Y, theta * Y >= 1)
    if M == 0:
        warnings.warn(
            f"degenerate sector cover (M = 0, single rectangle): theta (kappa n)^(1/5) = "
            f"{theta * (kappa * n) ** 0.2:.4g} < 2", stacklevel=2)
    return cover


def _rect_test(rect, m1, m2):
    c, s = math.cos(rect.angle), math.sin(rect.angle)
    u = c * m1 + s * m2
    v = -s * m1 + c * m2
    return (np.abs(u) <= rect.half_u) & (np.abs(v) <= rect.half_v)


def cover_count_many(cover: SectorCover, m1, m2) -> np.ndarray:
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    out = np.zeros(m1.shape, dtype=np.int64)
    for rect in cover.rects:
        out += _rect_test(rect, m1, m2)
    return out


def cover_count(cover: SectorCover, m) -> int:
    """Number of cover rectangles containing lattice point ``m``."""
    return int(cover_count_many(cover, [m[0]], [m[1]])[0])


def _row_interval(rect, rows):
    """Exact m1-interval of each lattice row inside ``rect`` (empty when lo > hi).

    Float rounding is monotone, so the points passing the rotation test form
    an interval in every row; the float estimate is corrected by probing.
    """
    c, s = math.cos(rect.angle), math.sin(rect.angle)
    m2 = rows.astype(float)
    lo = (-rect.half_u - s * m2) / c
    hi = (rect.half_u - s * m2) / c
    if s != 0.0:
        a = (c * m2 - rect.half_v) / s
        b = (c * m2 + rect.half_v) / s
        lo = np.maximum(lo, np.minimum(a, b))
        hi = np.minimum(hi, np.maximum(a, b))
    else:
        empty = np.abs(m2) > rect.half_v
        hi = np.where(empty, -np.inf, hi)
    lo = np.ceil(np.nan_to_num(lo, neginf=-1e18, posinf=1e18))
    hi = np.floor(np.nan_to_num(hi, neginf=-1e18, posinf=1e18))
    for _ in range(3):
        lo = np.where(_rect_test(rect, lo - 1, m2), lo - 1, lo)
        hi = np.where(_rect_test(rect, hi + 1, m2), hi + 1, hi)
        fix_lo = (lo <= hi) & ~_rect_test(rect, lo, m2)
        fix_hi = (lo <= hi) & ~_rect_test(rect, hi, m2)
        lo = np.where(fix_lo, lo + 1, lo)
        hi = np.where(fix_hi, hi - 1, hi)
    return lo.astype(np.int64), hi.astype(np.int64)


def enumerate_cover(cover: SectorCover):
    """All lattice points of the union with their counts, in (m1, m2) order.

    Returns ``(m1, m2, phi)`` integer arrays.
    """
    B = int(math.ceil(cover.radius)) + 1
    rows = np.arange(-B, B + 1)
    width = 2 * B + 3
    diff = np.zeros((len(rows), width), dtype=np.int32)
    r_idx = np.arange(len(rows))
    for rect in cover.rects:
        lo, hi = _row_interval(rect, rows)
        ok = lo <= hi
        np.add.at(diff, (r_idx[ok], lo[ok] + B), 1)
        np.add.at(diff, (r_idx[ok], hi[ok] + B + 1), -1)
    phi = np.cumsum(diff, axis=1)[:, : 2 * B + 1]
    i2, i1 = np.nonzero(phi)
    m2 = rows[i2]
    m1 = i1 - B
    counts = phi[i2, i1].astype(np.int64)
    order = np.lexsort((m2, m1))
    return m1[order], m2[order], counts[order]


@dataclass
class CoverReport:
    lattice_points: int
    max_phi: int
    far_max: float       # max Phi(m) |m| / X over |m| >= Y
    near_max: float      # max Phi(m) / (theta X / Y) over all m
    within_total: bool   # Phi(m) <= 2M + 1 everywhere
    far_ok: bool
    near_ok: bool
    phi_sum: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def check_cover_bounds(cover: SectorCover) -> CoverReport:
    """Empirical maxima of the normalised counting-function bounds.

    Violations of the frozen constants are reported, not raised.
    """
    m1, m2, phi = enumerate_cover(cover)
    r = np.hypot(m1, m2)
    far = r >= cover.Y
    far_max = float(np.max(phi[far] * r[far] / cover.X)) if far.any() else 0.0
    near_max = float(np.max(phi) / (cover.theta * cover.X / cover.Y))
    C1, C2 = constants.get("cover_far_C1"), constants.get("cover_near_C2")
    total = 2 * cover.M + 1
    return CoverReport(
        lattice_points=int(len(phi)), max_phi=int(phi.max()), far_max=far_max, near_max=near_max,
        within_total=bool(phi.max() <= total), far_ok=far_max <= C1,
        near_ok=bool(np.all(phi <= min(total, C2 * cover.theta * cover.X / cover.Y))),
        phi_sum=int(phi.sum()))


def rho(cover: SectorCover, c: float | None = None) -> float:
    """c min(1/(theta X^3), 1/(theta X Y^3)); c defaults to the frozen value."""
    if c is None:
        c = constants.get("rho_c")
    if not c > 0:
        raise ValueError("c must be positive")
    X, Y, th = cover.X, cover.Y, cover.theta
    return c * min(1.0 / (th * X ** 3), 1.0 / (th * X * Y ** 3))


# -------------------------------------------------------------- Montgomery

class MontgomeryCheck(NamedTuple):
    sum: float
    bound: float
    holds: bool


def _rect_lattice(rect: RotRect):
    B = int(math.ceil(math.hypot(rect.half_u, rect.half_v))) + 1
    k = np.arange(-B, B + 1)
    m1, m2 = (a.ravel() for a in np.meshgrid(k, k, indexing="ij"))
    keep = _rect_test(rect, m1.astype(float), m2.astype(float))
    return m1[keep], m2[keep]


def montgomery_sum(P, U: RotRect, B_radius: float = 0.5) -> float:
    """Sum of |mu^(m)|^2 over lattice points of the origin-centred ``U`` with |m| > B_radius."""
    if B_radius < 0:
        raise ValueError("B_radius must be >= 0")
    if U.center != (0.0, 0.0):
        raise ValueError("U must be centred at the origin")
    m1, m2 = _rect_lattice(U)
    keep = np.hypot(m1, m2) > B_radius
    m1, m2 = m1[keep], m2[keep]
    if not len(m1):
        return 0.0
    return math.fsum(fourier._exp_sums_sq(P.points, m1, m2).tolist())


def montgomery_axis_bound(P, X1: float, X2: float) -> MontgomeryCheck:
    """Check sum_{|k1|<=X1, |k2|<=X2, k!=0} |mu^(k)|^2 >= N X1 X2 - N^2."""
    if not (X1 > 0 and X2 > 0):
        raise ValueError("X1, X2 must be positive")
    n = len(P)
    a, b = int(math.floor(X1)), int(math.floor(X2))
    m1, m2 = (v.ravel() for v in np.meshgrid(np.arange(-a, a + 1), np.arange(-b, b + 1), indexing="ij"))
    keep = (m1 != 0) | (m2 != 0)
    total = math.fsum(fourier._exp_sums_sq(P.points, m1[keep], m2[keep]).tolist()) if keep.any() else 0.0
    bound = n * X1 * X2 - float(n) * n
    slack = 1e-9 * n * X1 * X2
    return MontgomeryCheck(total, bound, total >= bound - slack)


# -------------------------------------------------------------- certificate

@dataclass
class Certificate:
    point_set_label: str
    n: int
    theta: float
    kappa: float
    K: float
    mode_count: int
    phi_sum: float
    rho_value: float
    rho_variant: float
    montgomery: MontgomeryCheck
    cover: dict = field(default_factory=dict)
    direct_value: float | None = None
    timing_ms: float | None = None

    def to_json(self, timing: bool = True) -> dict:
        return {
            "label": self.point_set_label, "n": self.n, "theta": self.theta, "kappa": self.kappa,
            "K": self.K, "mode_count": self.mode_count, "phi_sum": self.phi_sum,
            "rho_variant": self.rho_variant, "rho": self.rho_value, "direct_value": self.direct_value,
            "montgomery": dict(self.montgomery._asdict()), "cover": self.cover,
            "timing_ms": self.timing_ms if timing else None,
        }


STRUCTURAL_TOL = 0.02


def certificate_modes(cover: SectorCover, K: float = 0.0):
    m1, m2, phi = enumerate_cover(cover)
    keep = ((m1 != 0) | (m2 != 0)) & (np.hypot(m1, m2) >= K)
    return m1[keep], m2[keep], phi[keep]


def certified_lower_bound(P, theta: float, kappa: float = 1.0, K: float = 0.0,
                          q: QuadSpec = DEFAULT_QUAD, direct: bool = False) -> Certificate:
    """Lower bound sum_{m in S} phi(m) |mu^(m)|^2 over lattice points S of the cover.

    All terms of the full Fourier expansion are nonnegative, so any partial
    sum bounds the averaged L2 discrepancy from below.
    """
    t0 = time.perf_counter()
    n = len(P)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cover = build_cover(n, theta, kappa)
    if not cover.feasible:
        raise InfeasibleCoverError(
            f"cover infeasible for N={n}, theta={theta:.6g}: needs theta X >= Y, i.e. "
            f"N >~ theta^-5 (theta (kappa N)^(1/5) = {theta * (kappa * n) ** 0.2:.4g} < 1)")
    m1, m2, counts = certificate_modes(cover, K)
    phi = fourier.phi_avg_many(CERT_R, theta, m1.astype(float), m2.astype(float), q)
    mu2 = fourier._exp_sums_sq(P.points, m1, m2)
    phi_sum = math.fsum((phi * mu2).tolist())
    rho_val = rho(cover)
    rho_variant = rho_val * math.fsum((counts * mu2).tolist())
    mont = montgomery_axis_bound(P, cover.X / 2, cover.Y / 2)
    direct_value = None
    if direct:
        trunc = int(math.ceil(max(cover.X, cover.radius)))
        direct_value = avg_l2_disc(P, theta, CERT_R, trunc, q)
        if phi_sum > direct_value * (1 + STRUCTURAL_TOL):
            raise RuntimeError(f"structural inequality violated: {phi_sum} > {direct_value}")
    return Certificate(
        point_set_label=P.label, n=n, theta=theta, kappa=kappa, K=K, mode_count=int(len(m1)),
        phi_sum=phi_sum, rho_value=rho_val, rho_variant=rho_variant, montgomery=mont,
        cover=cover.meta(), direct_value=direct_value,
        timing_ms=(time.perf_counter() - t0) * 1e3)


def scaling_exponent(series) -> float:
    """Least-squares slope of log(value) against log(n)."""
    pairs = [(float(n), float(v)) for n, v in series]
    if len(pairs) < 3:
        raise ValueError("need at least 3 (n, value) pairs")
    if any(n <= 0 or v <= 0 for n, v in pairs):
        raise ValueError("scaling fit needs positive n and values")
    x = [math.log(n) for n, _ in pairs]
    y = [math.log(v) for _, v in pairs]
    mx = math.fsum(x) / len(x)
    my = math.fsum(y) / len(y)
    sxx = math.fsum((a - mx) ** 2 for a in x)
    if sxx == 0:
        raise ValueError("need at least two distinct n")
    return math.fsum((a - mx) * (b - my) for a, b in zip(x, y)) / sxx

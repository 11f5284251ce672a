"""Fourier side: transforms of rotated rectangles, exponential sums of point
sets, and the dilation/rotation averaged decay functional ``phi``.

``phi_avg(R, theta, xi)`` is the mean of ``|1_{r,nu}^(xi)|^2`` over side
half-lengths r in [R/2, R] and angles nu in [-theta, theta], where
``1_{r,nu}`` is the square [-r, r]^2 rotated by nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import constants
from .geometry import RotRect, rotate_vec

TWO_PI = 2.0 * math.pi


class QuadratureError(RuntimeError):
    """Panel doubling did not reach the requested relative tolerance."""


@dataclass(frozen=True)
class QuadSpec:
    panels_r: int = 4
    panels_nu: int = 4
    nodes_per_panel: int = 6
    rel_tol: float = 1e-6
    max_doublings: int = 6

    def __post_init__(self):
        if self.nodes_per_panel < 4:
            raise ValueError("nodes_per_panel must be >= 4")
        if self.panels_r < 1 or self.panels_nu < 1 or not self.rel_tol > 0:
            raise ValueError("invalid quadrature spec")


DEFAULT_QUAD = QuadSpec()


# ---------------------------------------------------------------- transforms

def _box_ft(t, r):
    # int_{-r}^{r} exp(-2 pi i x t) dx = sin(2 pi t r)/(pi t), = 2r at t = 0
    return 2.0 * r * np.sinc(2.0 * t * r)


def indicator_ft(rect: RotRect, xi) -> float:
    """Transform of the origin-centred rotated rectangle at frequency ``xi``."""
    t = rotate_vec(xi, -rect.angle)
    return float(_box_ft(t.x, rect.half_u) * _box_ft(t.y, rect.half_v))


def indicator_ft_many(half_u: float, half_v: float, angle: float, xi1, xi2) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    t1 = c * xi1 + s * xi2
    t2 = -s * xi1 + c * xi2
    return _box_ft(t1, half_u) * _box_ft(t2, half_v)


def sin_sq_dilation_avg(C: float) -> float:
    """Closed form of int_1^2 sin^2(C t) dt."""
    if not C > 0:
        raise ValueError("C must be positive")
    return 0.5 - (math.sin(4.0 * C) - math.sin(2.0 * C)) / (4.0 * C)


# ----------------------------------------------------------- exponential sums

def _canonical(m1, m2):
    # representative of {m, -m} with m1 > 0, or m1 == 0 and m2 > 0
    m1 = np.asarray(m1, dtype=np.int64)
    m2 = np.asarray(m2, dtype=np.int64)
    flip = (m1 < 0) | ((m1 == 0) & (m2 < 0))
    return np.where(flip, -m1, m1), np.where(flip, -m2, m2)


def _exp_sums_sq(points: np.ndarray, m1, m2) -> np.ndarray:
    """|sum_j exp(2 pi i m.p_j)|^2 for arrays of modes; Kahan sums in point order."""
    m1, m2 = _canonical(m1, m2)
    f1 = m1.astype(float)
    f2 = m2.astype(float)
    re = np.zeros(f1.shape)
    im = np.zeros(f1.shape)
    cre = np.zeros(f1.shape)
    cim = np.zeros(f1.shape)
    for x, y in points.tolist():
        t = f1 * x + f2 * y
        t -= np.floor(t)
        t *= TWO_PI
        yv = np.cos(t) - cre
        s = re + yv
        cre = (s - re) - yv
        re = s
        yv = np.sin(t) - cim
        s = im + yv
        cim = (s - im) - yv
        im = s
    n = len(points)
    return np.minimum(re * re + im * im, float(n) * n)


def _check_nonzero(m1, m2):
    if np.any((np.asarray(m1) == 0) & (np.asarray(m2) == 0)):
        raise ValueError("mode (0,0) is excluded: the discrepancy measure has zero mean")


def exp_sum_sq(P, m) -> float:
    """``|sum_j exp(2 pi i m.p_j)|^2`` for a nonzero lattice mode ``m``."""
    _check_nonzero(m[0], m[1])
    return float(_exp_sums_sq(P.points, [m[0]], [m[1]])[0])


@dataclass(frozen=True)
class ExpSumTable:
    modes: np.ndarray   # (K, 2) int64
    values: np.ndarray  # (K,)
    n_points: int

    def __len__(self):
        return len(self.values)

    def __getitem__(self, m) -> float:
        hit = np.nonzero((self.modes[:, 0] == m[0]) & (self.modes[:, 1] == m[1]))[0]
        if not len(hit):
            raise KeyError(m)
        return float(self.values[hit[0]])

    def as_dict(self) -> dict:
        return {(int(a), int(b)): float(v) for (a, b), v in zip(self.modes, self.values)}


def build_exp_sum_table(P, modes) -> ExpSumTable:
    modes = np.asarray(sorted({(int(a), int(b)) for a, b in modes}), dtype=np.int64).reshape(-1, 2)
    _check_nonzero(modes[:, 0], modes[:, 1])
    vals = _exp_sums_sq(P.points, modes[:, 0], modes[:, 1])
    return ExpSumTable(modes, vals, len(P))


def exp_sum_window(P, trunc: int) -> np.ndarray:
    """``|mu^(m)|^2`` on the square window |m|_inf <= trunc, indexed [m1+T, m2+T].

    Only the canonical half is evaluated; the other half is mirrored, so the
    window is exactly centrally symmetric. The (0,0) entry is zero.
    """
    T = int(trunc)
    m1 = np.arange(0, T + 1)
    half1, half2 = [a.ravel() for a in np.meshgrid(m1, np.arange(-T, T + 1), indexing="ij")]
    keep = (half1 > 0) | (half2 > 0)
    half1, half2 = half1[keep], half2[keep]
    vals = _exp_sums_sq(P.points, half1, half2)
    out = np.zeros((2 * T + 1, 2 * T + 1))
    out[half1 + T, half2 + T] = vals
    out[-half1 + T, -half2 + T] = vals
    return out


# ------------------------------------------------------------ averaged decay

_SMALL = 0.05   # |a| R below this: the closed form loses relative accuracy
_LARGE = 4.0    # |b| R above this: direct r-quadrature becomes oscillatory


@lru_cache(maxsize=None)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def _composite_nodes(lo: float, hi: float, panels: int, npp: int):
    x, w = _gl(npp)
    h = (hi - lo) / panels
    mids = lo + h * (np.arange(panels) + 0.5)
    nodes = (mids[:, None] + 0.5 * h * x[None, :]).ravel()
    weights = np.tile(0.5 * h * w, panels)
    return nodes, weights


def _sinc0(x):
    return np.sinc(x / math.pi)


def _cos_avg(c, R):
    # mean of cos(c r) over r in [R/2, R], written without cancellation
    return np.cos(0.75 * c * R) * _sinc0(0.25 * c * R)


def _power_avg(p: int, R: float) -> float:
    return 2.0 / R * (R ** (p + 1) - (R / 2) ** (p + 1)) / (p + 1)


def _power_cos_avg(p: int, c, R: float):
    # mean of r^p cos(c r) over [R/2, R] via the closed antiderivative; |c| R >= 8 here
    c = np.asarray(c, dtype=float)
    ic = 1j * c

    def anti(r):
        acc = np.zeros(c.shape, dtype=complex)
        coef = 1.0
        for j in range(p + 1):
            acc += coef * r ** (p - j) / ic ** (j + 1)
            coef *= -(p - j)
        return np.exp(1j * c * r) * acc

    return 2.0 / R * (anti(R) - anti(R / 2)).real


# sin^2(x) = sum_k alpha_k x^(2k), truncated where |x| < _SMALL makes the rest negligible
_ALPHA = tuple((-1) ** (k + 1) * 2.0 ** (2 * k - 1) / math.factorial(2 * k) for k in range(1, 5))


def _r_average(t1, t2, R: float, q: QuadSpec) -> np.ndarray:
    """Mean over r in [R/2, R] of (F(t1; r) F(t2; r))^2, F(t; r) = sin(2 pi t r)/(pi t)."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    a = TWO_PI * t1
    b = TWO_PI * t2
    A = np.abs(a) * R
    B = np.abs(b) * R
    out = np.empty(a.shape)

    both = (A >= _SMALL) & (B >= _SMALL)
    if both.any():
        aa, bb = a[both], b[both]
        bracket = (1.0 - _cos_avg(2 * aa, R) - _cos_avg(2 * bb, R)
                   + 0.5 * _cos_avg(2 * (aa - bb), R) + 0.5 * _cos_avg(2 * (aa + bb), R))
        out[both] = 4.0 * bracket / (aa * aa * bb * bb)

    rest = ~both
    smooth = rest & (np.maximum(A, B) <= _LARGE)
    if smooth.any():
        ts1, ts2 = t1[smooth], t2[smooth]
        # |xi| R < 0.65 on this branch, so 8 panels honour the 4 ceil(2|xi|R) rule
        panels = max(q.panels_r, 8)
        r, w = _composite_nodes(R / 2, R, panels, q.nodes_per_panel)
        f = _box_ft(ts1[:, None], r[None, :]) * _box_ft(ts2[:, None], r[None, :])
        # row-wise sums, not BLAS, so each value is independent of the batch it came in
        out[smooth] = (f * f * w).sum(axis=1) * (2.0 / R)

    mixed = rest & ~smooth
    if mixed.any():
        # one argument tiny, the other large: series in the tiny one
        swap = A[mixed] > B[mixed]
        small = np.where(swap, b[mixed], a[mixed])
        big = np.where(swap, a[mixed], b[mixed])
        acc = np.zeros(small.shape)
        for k, alpha in enumerate(_ALPHA, start=1):
            p = 2 * k
            term = _power_avg(p, R) - _power_cos_avg(p, 2 * big, R)
            acc += alpha * small ** (2 * k - 2) * term
        out[mixed] = 8.0 * acc / (big * big)
    return out


def _phi_fixed(R, theta, xi1, xi2, panels, q):
    """phi for a batch of frequencies with a common panel count in nu."""
    nu, w = _composite_nodes(-theta, theta, panels, q.nodes_per_panel)
    c, s = np.cos(nu), np.sin(nu)
    out = np.empty(len(xi1))
    chunk = max(1, 400_000 // len(nu))
    for lo in range(0, len(xi1), chunk):
        x1 = xi1[lo:lo + chunk, None]
        x2 = xi2[lo:lo + chunk, None]
        t1 = x1 * c + x2 * s
        t2 = -x1 * s + x2 * c
        g = _r_average(t1.ravel(), t2.ravel(), R, q).reshape(t1.shape)
        out[lo:lo + chunk] = (g * w).sum(axis=1) / (2.0 * theta)
    return out


_PHI_CACHE: dict = {}


def clear_cache():
    _PHI_CACHE.clear()


def phi_avg_many(R: float, theta: float, xi1, xi2, q: QuadSpec = DEFAULT_QUAD) -> np.ndarray:
    """Vectorised :func:`phi_avg`; values are memoised per (R, theta, q, |xi1|, |xi2|)."""
    if not R > 0:
        raise ValueError("R must be positive")
    if not 0 < theta <= math.pi / 4 + 1e-15:
        raise ValueError("theta must lie in (0, pi/4]")
    # phi is even in each coordinate: nu -> -nu and xi -> -xi symmetries
    x1 = np.abs(np.asarray(xi1, dtype=float)).ravel()
    x2 = np.abs(np.asarray(xi2, dtype=float)).ravel()
    cache = _PHI_CACHE.setdefault((float(R), float(theta), q), {})
    keys = list(zip(x1.tolist(), x2.tolist()))
    todo = sorted({k for k in keys if k not in cache})
    if todo:
        arr = np.array(todo)
        _phi_solve(R, theta, arr[:, 0], arr[:, 1], q, cache, todo)
    return np.array([cache[k] for k in keys]).reshape(np.shape(xi1))


def _phi_solve(R, theta, x1, x2, q, cache, keys):
    mag = np.hypot(x1, x2)
    base = np.maximum(q.panels_nu, 4 * np.ceil(2.0 * mag * R * theta)).astype(np.int64)
    for panels in np.unique(base):
        idx = np.nonzero(base == panels)[0]
        prev = _phi_fixed(R, theta, x1[idx], x2[idx], int(panels), q)
        p = int(panels)
        pending = idx
        for _ in range(q.max_doublings):
            p *= 2
            cur = _phi_fixed(R, theta, x1[pending], x2[pending], p, q)
            ok = np.abs(cur - prev) <= q.rel_tol * np.abs(cur)
            for i, v in zip(pending[ok], cur[ok]):
                cache[keys[i]] = float(v)
            pending, prev = pending[~ok], cur[~ok]
            if not len(pending):
                break
        if len(pending):
            i = pending[0]
            raise QuadratureError(
                f"phi_avg did not converge to rel_tol={q.rel_tol} at xi=({x1[i]}, {x2[i]}), "
                f"R={R}, theta={theta} after {q.max_doublings} doublings")


def phi_avg(R: float, theta: float, xi, q: QuadSpec = DEFAULT_QUAD) -> float:
    """Averaged squared transform of rotated squares; see the module docstring."""
    return float(phi_avg_many(R, theta, [xi[0]], [xi[1]], q)[0])


def phi_window(R: float, theta: float, trunc: int, q: QuadSpec = DEFAULT_QUAD) -> np.ndarray:
    """phi on the lattice window |m|_inf <= trunc, indexed [m1+T, m2+T]."""
    T = int(trunc)
    k = np.arange(T + 1)
    a1, a2 = np.meshgrid(k, k, indexing="ij")
    quad = phi_avg_many(R, theta, a1.astype(float), a2.astype(float), q)
    idx = np.abs(np.arange(-T, T + 1))
    return quad[np.ix_(idx, idx)]


# ------------------------------------------------------- decay diagnostics

def _sector_arg(xi) -> float:
    # argument modulo pi: the sector is symmetric under xi -> -xi
    if xi[0] == 0:
        return math.pi / 2
    return math.atan(xi[1] / xi[0])


def sector_ratio(R, theta, xi, q=DEFAULT_QUAD) -> float:
    return phi_avg(R, theta, xi, q) * theta * math.hypot(*xi) ** 3 / R


def global_ratio(R, theta, xi, q=DEFAULT_QUAD) -> float:
    return phi_avg(R, theta, xi, q) * math.hypot(*xi) ** 4


def decay_ratio_sector(R: float, theta: float, xi, q: QuadSpec = DEFAULT_QUAD) -> float:
    """``phi * theta |xi|^3 / R`` for xi inside the sector of half-aperture theta/2."""
    if not abs(_sector_arg(xi)) < theta / 2:
        raise ValueError(f"arg(xi) must lie in (-theta/2, theta/2), xi={tuple(xi)}")
    c1 = constants.get("sector_threshold")
    if math.hypot(*xi) < c1 / (theta * R):
        raise ValueError(f"|xi| must be >= {c1}/(theta R)")
    return sector_ratio(R, theta, xi, q)


def decay_ratio_global(R: float, theta: float, xi, q: QuadSpec = DEFAULT_QUAD) -> float:
    """``phi * |xi|^4``, defined for |xi| >= c''/R in every direction."""
    c2 = constants.get("global_threshold")
    if math.hypot(*xi) < c2 / R:
        raise ValueError(f"|xi| must be >= {c2}/R")
    return global_ratio(R, theta, xi, q)


def amplification_ratio(a: float, R: float, xi, q: QuadSpec = DEFAULT_QUAD) -> float:
    """phi(aR) / (a phi(R)) for all rotations (theta = pi/4)."""
    if a < 1:
        raise ValueError("dilation factor a must be >= 1")
    c2 = constants.get("global_threshold")
    if math.hypot(*xi) < c2 / R:
        raise ValueError(f"|xi| must be >= {c2}/R")
    if a == 1:
        return 1.0
    theta = math.pi / 4
    return phi_avg(a * R, theta, xi, q) / (a * phi_avg(R, theta, xi, q))

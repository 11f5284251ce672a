"""Local, extremal and L2 directional discrepancy of planar point sets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import fourier
from .fourier import DEFAULT_QUAD, QuadSpec
from .geometry import RotRect, Vec2, clip_to_box, clipped_area, rotate_vec, shoelace_area

MODES = ("periodic", "clipped")


@dataclass(frozen=True)
class RotationSet:
    theta: float

    def __post_init__(self):
        if not 0 < self.theta <= math.pi / 4 + 1e-15:
            raise ValueError("theta must lie in (0, pi/4]")


@dataclass(frozen=True)
class SearchBudget:
    angles: int = 9
    grid: int = 32
    rounds: int = 3
    critical_angles: int = 16
    trivial_seed: bool = True

    def __post_init__(self):
        if self.angles < 1 or self.grid < 2 or self.rounds < 0 or self.critical_angles < 0:
            raise ValueError("invalid search budget")


@dataclass
class DiscrepancyResult:
    value: float
    argmax: RotRect | None
    mode: str
    evaluations: int = 0
    resolution: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        rect = None
        if self.argmax is not None:
            a = self.argmax
            rect = {"cx": a.center.x, "cy": a.center.y, "hu": a.half_u, "hv": a.half_v, "angle": a.angle}
        return {"value": self.value, "argmax": rect, "mode": self.mode,
                "evaluations": self.evaluations, "resolution": self.resolution}


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


_SHIFTS = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)


def _local_disc_batch(points, cx, cy, hu, hv, ang, mode) -> np.ndarray:
    """Exact local discrepancy for K rectangles given as parameter arrays."""
    n = len(points)
    cx, cy, hu, hv = (np.asarray(v, dtype=float) for v in (cx, cy, hu, hv))
    c = np.array([math.cos(a) for a in ang])[:, None]
    s = np.array([math.sin(a) for a in ang])[:, None]
    if mode == "periodic":
        shifted = (points[:, None, :] + _SHIFTS[None, :, :]).reshape(-1, 2)
    else:
        shifted = points
    out = np.empty(len(cx))
    chunk = max(1, 2_000_000 // len(shifted))
    for lo in range(0, len(cx), chunk):
        sl = slice(lo, lo + chunk)
        dx = shifted[None, :, 0] - cx[sl, None]
        dy = shifted[None, :, 1] - cy[sl, None]
        u = c[sl] * dx + s[sl] * dy
        v = -s[sl] * dx + c[sl] * dy
        inside = (np.abs(u) <= hu[sl, None]) & (np.abs(v) <= hv[sl, None])
        if mode == "periodic":
            count = inside.reshape(inside.shape[0], n, 9).any(axis=2).sum(axis=1)
            area = 4.0 * hu[sl] * hv[sl]
        else:
            count = inside.sum(axis=1)
            area = np.array([clipped_area(RotRect(Vec2(x, y), a, b, t))
                             for x, y, a, b, t in zip(cx[sl], cy[sl], hu[sl], hv[sl], ang[sl])])
        out[sl] = np.abs(count - n * area)
    return out


def local_disc(P, rect: RotRect, mode: str = "periodic") -> float:
    """``|#(P in rect) - N area|`` with periodic or clipped counting."""
    _check_mode(mode)
    if not rect.is_spatial:
        raise ValueError("test rectangles need half-extents < 1/2")
    return float(_local_disc_batch(P.points, [rect.center.x], [rect.center.y],
                                   [rect.half_u], [rect.half_v], [rect.angle], mode)[0])


# ------------------------------------------------------------ extremal search

def _angle_grid(theta: float, count: int) -> list[float]:
    if count == 1:
        return [0.0]
    return [-theta + 2.0 * theta * i / (count - 1) for i in range(count)]


def _critical_angles(points, theta, cap):
    if cap == 0 or len(points) < 2:
        return []
    i, j = np.triu_indices(len(points), 1)
    d = points[j] - points[i]
    ang = np.arctan2(d[:, 1], d[:, 0])
    # rectangles are invariant under quarter turns
    ang = np.mod(ang + math.pi / 4, math.pi / 2) - math.pi / 4
    ang = np.unique(ang[np.abs(ang) <= theta])
    if len(ang) > cap:
        ang = ang[np.linspace(0, len(ang) - 1, cap).round().astype(int)]
    return ang.tolist()


def _trivial_half(n: int) -> float:
    # smallest h with 4 h^2 N >= 1/4 in floating point
    h = math.sqrt(1.0 / (16.0 * n))
    while 4.0 * h * h * n < 0.25:
        h = math.nextafter(h, 1.0)
    return h


class _Search:
    def __init__(self, P, mode):
        self.points = P.points
        self.n = len(P)
        self.mode = mode
        self.best = -1.0
        self.best_params = None
        self.evaluations = 0

    def offer(self, cx, cy, hu, hv, ang):
        cx, cy = np.asarray(cx, dtype=float), np.asarray(cy, dtype=float)
        if self.mode == "periodic":
            cx, cy = cx - np.floor(cx), cy - np.floor(cy)
            cx[cx >= 1.0] = 0.0
            cy[cy >= 1.0] = 0.0
        ang = [float(a) for a in ang]
        vals = _local_disc_batch(self.points, cx, cy, hu, hv, ang, self.mode)
        self.evaluations += len(vals)
        k = int(np.argmax(vals))
        if vals[k] > self.best:
            self.best = float(vals[k])
            self.best_params = (float(cx[k]), float(cy[k]), float(hu[k]), float(hv[k]), ang[k])


def _frame_boxes(points, mode, angle, G):
    """Coarse sweep of boxes aligned with the rotated frame, using prefix sums.

    Returns candidate boxes (u0, u1, v0, v1) sorted by proxy discrepancy.
    """
    n = len(points)
    c, s = math.cos(angle), math.sin(angle)
    corners = np.array([(0, 0), (1, 0), (1, 1), (0, 1)], dtype=float)
    cu = c * corners[:, 0] + s * corners[:, 1]
    cv = -s * corners[:, 0] + c * corners[:, 1]
    eu = np.linspace(cu.min(), cu.max(), G + 1)
    ev = np.linspace(cv.min(), cv.max(), G + 1)
    pts = points
    if mode == "periodic":
        pts = (points[:, None, :] + _SHIFTS[None, :, :]).reshape(-1, 2)
    u = c * pts[:, 0] + s * pts[:, 1]
    v = -s * pts[:, 0] + c * pts[:, 1]
    H, _, _ = np.histogram2d(u, v, bins=[eu, ev])
    S = np.zeros((G + 1, G + 1))
    S[1:, 1:] = H.cumsum(0).cumsum(1)

    iu, ju = np.triu_indices(G + 1, 1)
    keep_u = eu[ju] - eu[iu] < 1.0
    iu, ju = iu[keep_u], ju[keep_u]
    iv, jv = np.triu_indices(G + 1, 1)
    keep_v = ev[jv] - ev[iv] < 1.0
    iv, jv = iv[keep_v], jv[keep_v]

    CU = S[ju, :] - S[iu, :]
    count = CU[:, jv] - CU[:, iv]
    if mode == "periodic":
        area = np.outer(eu[ju] - eu[iu], ev[jv] - ev[iv])
    else:
        square = [tuple(p) for p in np.column_stack([cu, cv])]
        F = np.empty((G + 1, G + 1))
        lo_u, lo_v = cu.min() - 1.0, cv.min() - 1.0
        for a in range(G + 1):
            for b in range(G + 1):
                F[a, b] = shoelace_area(clip_to_box(square, lo_u, eu[a], lo_v, ev[b]))
        FU = F[ju, :] - F[iu, :]
        area = FU[:, jv] - FU[:, iv]
    proxy = np.abs(count - n * area)
    order = np.argsort(-proxy, axis=None, kind="stable")[:4]
    a, b = np.unravel_index(order, proxy.shape)
    boxes = [(eu[iu[x]], eu[ju[x]], ev[iv[y]], ev[jv[y]]) for x, y in zip(a, b)]
    return boxes, proxy.size


def _box_to_rect(angle, u0, u1, v0, v1):
    centre = rotate_vec(((u0 + u1) / 2, (v0 + v1) / 2), angle)
    return centre.x, centre.y, (u1 - u0) / 2, (v1 - v0) / 2


def extremal_disc_search(P, omega: RotationSet, mode: str = "periodic",
                         budget: SearchBudget = SearchBudget()) -> DiscrepancyResult:
    """Best-found supremum of the local discrepancy over rotated rectangles.

    Every candidate is a feasible rectangle evaluated exactly, so the returned
    value is a lower bound for the supremum over the class.
    """
    _check_mode(mode)
    theta = omega.theta
    pts = P.points
    n = len(P)
    search = _Search(P, mode)

    if budget.trivial_seed:
        h = _trivial_half(n)
        cx = np.clip(pts[:, 0], h, 1.0 - h)
        cy = np.clip(pts[:, 1], h, 1.0 - h)
        search.offer(np.append(cx, 0.5), np.append(cy, 0.5), np.full(n + 1, h), np.full(n + 1, h),
                     [0.0] * (n + 1))

    grid_angles = _angle_grid(theta, budget.angles)
    angles = sorted(set(grid_angles) | set(_critical_angles(pts, theta, budget.critical_angles)))
    proxies = 0
    for a in angles:
        boxes, k = _frame_boxes(pts, mode, a, budget.grid)
        proxies += k
        params = [_box_to_rect(a, *box) for box in boxes]
        cx, cy, hu, hv = (np.array(col) for col in zip(*params))
        search.offer(cx, cy, hu, hv, [a] * len(params))

    # local refinement around the incumbent, in its own frame
    step_a = 2.0 * theta / max(1, budget.angles - 1) if budget.angles > 1 else 0.0
    region = math.sqrt(2.0)
    step = region / budget.grid
    for _ in range(budget.rounds):
        step /= 2.0
        step_a /= 2.0
        cx0, cy0, hu0, hv0, a0 = search.best_params
        cand = []
        for da in (0.0, -step_a, step_a):
            a = min(theta, max(-theta, a0 + da))
            if da != 0.0 and a == a0:
                continue
            cu = rotate_vec((cx0, cy0), -a)
            u0, u1, v0, v1 = cu.x - hu0, cu.x + hu0, cu.y - hv0, cu.y + hv0
            offs = [k * step for k in (-2, -1, 0, 1, 2)]
            for o1, o2, o3, o4 in itertools.product(offs, repeat=4):
                U0, U1, V0, V1 = u0 + o1, u1 + o2, v0 + o3, v1 + o4
                if 0 < U1 - U0 < 1.0 and 0 < V1 - V0 < 1.0:
                    cand.append((a, *_box_to_rect(a, U0, U1, V0, V1)))
        if cand:
            a_, cx, cy, hu, hv = (np.array(col) for col in zip(*cand))
            search.offer(cx, cy, hu, hv, a_.tolist())

    cx, cy, hu, hv, a = search.best_params
    rect = RotRect(Vec2(cx, cy), hu, hv, a)
    return DiscrepancyResult(
        value=search.best, argmax=rect, mode=mode, evaluations=search.evaluations,
        resolution={"angles": len(angles), "grid": budget.grid, "rounds": budget.rounds,
                    "proxy_boxes": int(proxies), "theta": theta},
    )


# ------------------------------------------------------------------ L2 forms

def l2_disc_fourier(P, r: float, nu: float, trunc: int = 512) -> float:
    """Torus L2 norm over translations of the local discrepancy of rotated squares.

    Parseval form, truncated to |m|_inf <= trunc; see :func:`l2_fourier_tail`.
    """
    if not 0 < r < 0.5:
        raise ValueError("square half-side must lie in (0, 1/2)")
    T = int(trunc)
    k = np.arange(-T, T + 1, dtype=float)
    m1, m2 = np.meshgrid(k, k, indexing="ij")
    ft2 = fourier.indicator_ft_many(r, r, nu, m1, m2) ** 2
    mu2 = fourier.exp_sum_window(P, T)
    return math.fsum((ft2 * mu2).ravel().tolist())


def l2_fourier_tail(P, r: float, trunc: int) -> float:
    """Rough size of the modes dropped by truncation, using mean |mu^|^2 ~ N."""
    return 4.0 * r * len(P) / (math.pi ** 2 * trunc)


def l2_disc_quadrature(P, r: float, nu: float, grid: int = 256) -> float:
    """Midpoint-rule oracle for the integral over centres q of D(P, S(q, r, nu))^2."""
    if grid < 64:
        raise ValueError("grid must be >= 64")
    if not 0 < r < 0.5:
        raise ValueError("square half-side must lie in (0, 1/2)")
    n = len(P)
    g = (np.arange(grid) + 0.5) / grid
    qx, qy = np.meshgrid(g, g, indexing="ij")
    c, s = math.cos(nu), math.sin(nu)
    count = np.zeros(qx.shape)
    single = r * (abs(c) + abs(s)) < 0.5
    shifts = [(0.0, 0.0)] if single else _SHIFTS.tolist()
    for px, py in P.points.tolist():
        dx = px - qx
        dy = py - qy
        if single:
            dx -= np.round(dx)
            dy -= np.round(dy)
        hit = np.zeros(qx.shape, dtype=bool)
        for sx, sy in shifts:
            ex, ey = dx + sx, dy + sy
            hit |= (np.abs(c * ex + s * ey) <= r) & (np.abs(-s * ex + c * ey) <= r)
        count += hit
    d = count - n * 4.0 * r * r
    return math.fsum((d * d).ravel().tolist()) / (grid * grid)


def avg_l2_disc(P, theta: float, R: float = 1 / 16, trunc: int = 512,
                q: QuadSpec = DEFAULT_QUAD) -> float:
    """Dilation and rotation average of the torus L2 discrepancy of rotated squares.

    Exchanging sums and integrals gives sum_{0<|m|_inf<=trunc} phi(m) |mu^(m)|^2.
    """
    if not 0 < R < 1:
        raise ValueError("R must lie in (0, 1)")
    RotationSet(theta)
    phi = fourier.phi_window(R, theta, trunc, q)
    mu2 = fourier.exp_sum_window(P, trunc)
    return math.fsum((phi * mu2).ravel().tolist())

"""Planar and torus primitives: rotations, wrapping, rotated rectangles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Vec2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class RotRect:
    """Rectangle with center, half-extents along its own axes, and a CCW angle.

    Used both for spatial test sets on the unit torus and for rectangles in
    frequency space.
    """

    center: Vec2
    half_u: float
    half_v: float
    angle: float = 0.0

    def __post_init__(self):
        if not (self.half_u > 0 and self.half_v > 0):
            raise ValueError(f"half-extents must be positive, got {self.half_u}, {self.half_v}")
        object.__setattr__(self, "center", Vec2(float(self.center[0]), float(self.center[1])))

    @classmethod
    def square(cls, center, r: float, angle: float = 0.0) -> "RotRect":
        return cls(Vec2(*center), r, r, angle)

    @property
    def is_spatial(self) -> bool:
        return self.half_u < 0.5 and self.half_v < 0.5

    @property
    def area(self) -> float:
        return 4.0 * self.half_u * self.half_v


def rotate_vec(v, a: float) -> Vec2:
    """Counterclockwise rotation of ``v`` by ``a`` radians."""
    c, s = math.cos(a), math.sin(a)
    return Vec2(c * v[0] - s * v[1], s * v[0] + c * v[1])


def torus_wrap(v) -> Vec2:
    return Vec2(_wrap01(v[0]), _wrap01(v[1]))


def _wrap01(t: float) -> float:
    w = t - math.floor(t)
    # t slightly below an integer can round up to exactly 1.0
    return 0.0 if w >= 1.0 else w


def _require_spatial(rect: RotRect):
    if not rect.is_spatial:
        raise ValueError("spatial rectangles need half-extents < 1/2")


def _in_rect_local(rect: RotRect, dx, dy):
    # closed rectangle; dx, dy are offsets from the center (scalars or arrays)
    c, s = math.cos(rect.angle), math.sin(rect.angle)
    u = c * dx + s * dy
    v = -s * dx + c * dy
    return (np.abs(u) <= rect.half_u) & (np.abs(v) <= rect.half_v)


def contains(rect: RotRect, p) -> bool:
    """Plain (non-periodic) closed containment."""
    return bool(_in_rect_local(rect, p[0] - rect.center.x, p[1] - rect.center.y))


def contains_periodic(rect: RotRect, p) -> bool:
    """True iff some translate ``p + z`` with ``z`` in {-1,0,1}^2 lies in ``rect``."""
    _require_spatial(rect)
    return bool(contains_periodic_many(rect, np.asarray([p], dtype=float))[0])


_SHIFTS = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)


def contains_periodic_many(rect: RotRect, pts: np.ndarray) -> np.ndarray:
    """Vectorised :func:`contains_periodic` over an (N, 2) array of points."""
    pts = np.asarray(pts, dtype=float)
    dx = pts[:, 0:1] + _SHIFTS[None, :, 0] - rect.center.x
    dy = pts[:, 1:2] + _SHIFTS[None, :, 1] - rect.center.y
    return _in_rect_local(rect, dx, dy).any(axis=1)


def contains_many(rect: RotRect, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    return _in_rect_local(rect, pts[:, 0] - rect.center.x, pts[:, 1] - rect.center.y)


def rect_vertices(rect: RotRect) -> list[Vec2]:
    """Vertices in counterclockwise order, starting from the (+u, +v) corner."""
    cx, cy = rect.center
    out = []
    for su, sv in ((1, 1), (-1, 1), (-1, -1), (1, -1)):
        d = rotate_vec((su * rect.half_u, sv * rect.half_v), rect.angle)
        out.append(Vec2(cx + d.x, cy + d.y))
    return out


def clip_polygon_halfplane(poly, axis: int, bound: float, keep_below: bool):
    """One Sutherland-Hodgman pass against ``x[axis] <= bound`` (or ``>=``)."""
    if not poly:
        return []

    def inside(p):
        return p[axis] <= bound if keep_below else p[axis] >= bound

    out = []
    prev = poly[-1]
    prev_in = inside(prev)
    for cur in poly:
        cur_in = inside(cur)
        if cur_in != prev_in:
            t = (bound - prev[axis]) / (cur[axis] - prev[axis])
            q = [prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]
            q[axis] = bound
            out.append((q[0], q[1]))
        if cur_in:
            out.append((cur[0], cur[1]))
        prev, prev_in = cur, cur_in
    return out


def clip_to_box(poly, x0=0.0, x1=1.0, y0=0.0, y1=1.0):
    poly = clip_polygon_halfplane(poly, 0, x0, keep_below=False)
    poly = clip_polygon_halfplane(poly, 0, x1, keep_below=True)
    poly = clip_polygon_halfplane(poly, 1, y0, keep_below=False)
    return clip_polygon_halfplane(poly, 1, y1, keep_below=True)


def shoelace_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    acc = math.fsum(
        poly[i][0] * poly[(i + 1) % len(poly)][1] - poly[(i + 1) % len(poly)][0] * poly[i][1]
        for i in range(len(poly))
    )
    return abs(acc) / 2.0


def clipped_area(rect: RotRect) -> float:
    """Area of ``rect`` intersected with the unit square."""
    verts = rect_vertices(rect)
    if all(0.0 <= v.x <= 1.0 and 0.0 <= v.y <= 1.0 for v in verts):
        return rect.area
    area = shoelace_area(clip_to_box(verts))
    return min(area, rect.area, 1.0)

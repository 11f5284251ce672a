"""Point-set generators and the plain-text point-set file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RNG_NAME = f"numpy.random.PCG64 (numpy {np.__version__})"


class PointSetFormatError(ValueError):
    """Raised when a point-set file cannot be parsed."""


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float).reshape(-1, 2)
        if len(pts) < 1:
            raise ValueError("a point set needs at least one point")
        if not np.all(np.isfinite(pts)) or pts.min() < 0.0 or pts.max() >= 1.0:
            raise ValueError("points must lie in [0,1)^2")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)


def gen_grid(k: int) -> PointSet:
    """Cell-centred k x k grid, x index outer."""
    if k < 1:
        raise ValueError("k must be >= 1")
    c = (np.arange(k) + 0.5) / k
    xs, ys = np.meshgrid(c, c, indexing="ij")
    return PointSet(np.column_stack([xs.ravel(), ys.ravel()]), f"grid(k={k})")


def radical_inverse(i: int, base: int) -> float:
    num, den = 0, 1
    while i > 0:
        i, d = divmod(i, base)
        num = num * base + d
        den *= base
    return num / den


def gen_halton(n: int) -> PointSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = [(radical_inverse(i, 2), radical_inverse(i, 3)) for i in range(n)]
    return PointSet(np.array(pts), f"halton(n={n})")


def fibonacci(k: int) -> int:
    a, b = 1, 1
    for _ in range(k - 1):
        a, b = b, a + b
    return a


def gen_fibonacci(k: int) -> PointSet:
    """Fibonacci lattice with N = F_k points (F_1 = F_2 = 1)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    n, g = fibonacci(k), fibonacci(k - 1)
    i = np.arange(n, dtype=np.int64)
    pts = np.column_stack([i / n, (i * g % n) / n])
    return PointSet(pts, f"fibonacci(k={k},N={n})")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_random(n: int, seed: int) -> PointSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = _rng(seed).random((n, 2))
    return PointSet(pts, f"random(n={n},seed={seed})", {"rng": RNG_NAME, "seed": seed})


def gen_jittered(k: int, seed: int) -> PointSet:
    """One uniform point per cell of the k x k grid, cells in grid order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    u = _rng(seed).random((k * k, 2))
    idx = np.arange(k)
    ix, iy = (a.ravel() for a in np.meshgrid(idx, idx, indexing="ij"))
    cell = np.column_stack([ix, iy]).astype(float)
    pts = (cell + u) / k
    # (i + u)/k can round up onto the next cell's lower edge
    upper = np.nextafter((cell + 1.0) / k, 0.0)
    pts = np.minimum(pts, upper)
    return PointSet(pts, f"jittered(k={k},seed={seed})", {"rng": RNG_NAME, "seed": seed})


GENERATORS = ("grid", "halton", "fibonacci", "jittered", "random")


def generate(name: str, n: int, seed: int = 0) -> PointSet:
    """Generate roughly ``n`` points with a named generator.

    Grid and jittered sets use k = round(sqrt(n)); the Fibonacci lattice uses
    the Fibonacci number closest to ``n``. The actual size is ``len(result)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if name == "grid":
        return gen_grid(max(1, round(math.sqrt(n))))
    if name == "jittered":
        return gen_jittered(max(1, round(math.sqrt(n))), seed)
    if name == "halton":
        return gen_halton(n)
    if name == "random":
        return gen_random(n, seed)
    if name == "fibonacci":
        k = 2
        while fibonacci(k + 1) <= n:
            k += 1
        if k >= 2 and abs(fibonacci(k + 1) - n) < abs(fibonacci(k) - n):
            k += 1
        return gen_fibonacci(k)
    raise ValueError(f"unknown generator {name!r}")


def format_points(ps: PointSet, header: dict | None = None) -> str:
    lines = [f"# label: {ps.label}"]
    for key, val in (header or {}).items():
        lines.append(f"# {key}: {val}")
    lines += [f"{x!r},{y!r}" for x, y in ps.points.tolist()]
    return "\n".join(lines) + "\n"


def write_points(ps: PointSet, path, header: dict | None = None):
    Path(path).write_text(format_points(ps, header), encoding="utf-8")


def read_points(path, label: str | None = None) -> PointSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PointSetFormatError(f"cannot read point file {path}: {exc}") from exc
    pts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise PointSetFormatError(f"{path}:{lineno}: expected 'x,y', got {line!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise PointSetFormatError(f"{path}:{lineno}: not a number: {line!r}") from None
        pts.append((x, y))
    if not pts:
        raise PointSetFormatError(f"{path}: no points")
    try:
        return PointSet(np.array(pts), label or path.stem)
    except ValueError as exc:
        raise PointSetFormatError(f"{path}: {exc}") from None

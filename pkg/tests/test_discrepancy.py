import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disclab import fourier
from disclab.discrepancy import (DiscrepancyResult, RotationSet, SearchBudget, avg_l2_disc,
                                 extremal_disc_search, l2_disc_fourier, l2_disc_quadrature,
                                 l2_fourier_tail, local_disc)
from disclab.geometry import RotRect, Vec2
from disclab.pointsets import GENERATORS, PointSet, gen_fibonacci, gen_grid, gen_random, generate

ONE = PointSet(np.array([[0.5, 0.5]]))


def test_local_disc_examples():
    sq = RotRect.square(Vec2(0.5, 0.5), 0.25)
    assert local_disc(ONE, sq, "clipped") == 0.75
    corner = PointSet(np.array([[0.9, 0.9]]))
    assert local_disc(corner, RotRect.square(Vec2(0, 0), 0.25), "periodic") == 0.75
    with pytest.raises(ValueError):
        local_disc(ONE, sq, "toroidal")
    with pytest.raises(ValueError):
        local_disc(ONE, RotRect.square(Vec2(0.5, 0.5), 0.6), "periodic")


@settings(max_examples=40)
@given(st.integers(1, 40), st.integers(0, 10 ** 6), st.floats(0, 1, exclude_max=True),
       st.floats(0, 1, exclude_max=True), st.floats(-0.7, 0.7))
def test_local_disc_trivial_area(n, seed, cx, cy, ang):
    # a rectangle of area 1/(4N) has discrepancy 1/4 when empty and >= 3/4 otherwise
    P = gen_random(n, seed)
    h = math.sqrt(1 / (16 * n))
    rect = RotRect.square(Vec2(cx, cy), h, ang)
    d = local_disc(P, rect, "periodic")
    assert d == pytest.approx(0.25, abs=1e-12) or d >= 0.75 - 1e-12


def test_local_disc_matches_brute_force():
    P = gen_random(30, 11)
    rect = RotRect(Vec2(0.3, 0.8), 0.2, 0.05, 0.4)
    c, s = math.cos(0.4), math.sin(0.4)
    count = 0
    for x, y in P.points:
        hit = False
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                dx, dy = x + i - 0.3, y + j - 0.8
                hit |= abs(c * dx + s * dy) <= 0.2 and abs(-s * dx + c * dy) <= 0.05
        count += hit
    assert local_disc(P, rect, "periodic") == pytest.approx(abs(count - 30 * rect.area), abs=1e-12)


def test_search_single_point_single_angle():
    res = extremal_disc_search(ONE, RotationSet(1e-9), "clipped", SearchBudget(1, 64, 3))
    assert res.value >= 0.9
    assert local_disc(ONE, res.argmax, "clipped") == res.value


@pytest.mark.parametrize("name", GENERATORS)
@pytest.mark.parametrize("mode", ["periodic", "clipped"])
def test_search_trivial_floor_and_reproducible_argmax(name, mode):
    P = generate(name, 32, 3)
    res = extremal_disc_search(P, RotationSet(math.pi / 8), mode, SearchBudget(3, 8, 1))
    assert res.value >= 0.25
    assert abs(res.argmax.angle) <= math.pi / 8
    assert local_disc(P, res.argmax, mode) == res.value


def test_search_trivial_floor_under_tiny_budget():
    P = gen_random(500, 2)
    res = extremal_disc_search(P, RotationSet(0.1), "periodic", SearchBudget(1, 2, 0, 0))
    assert res.value >= 0.25


def test_search_monotone_in_theta_for_nested_grids():
    # angle grid with 2A-1 points on [-2t, 2t] contains the A-point grid on [-t, t]
    P = gen_random(40, 5)
    small = extremal_disc_search(P, RotationSet(0.1), "periodic", SearchBudget(5, 16, 0, 0))
    large = extremal_disc_search(P, RotationSet(0.2), "periodic", SearchBudget(9, 16, 0, 0))
    assert large.value >= small.value


def test_search_is_deterministic():
    P = gen_random(50, 8)
    a = extremal_disc_search(P, RotationSet(0.3), "clipped", SearchBudget(3, 12, 1))
    b = extremal_disc_search(P, RotationSet(0.3), "clipped", SearchBudget(3, 12, 1))
    assert a.to_json() == b.to_json()


def test_result_json_shape():
    res = DiscrepancyResult(0.5, RotRect(Vec2(0.1, 0.2), 0.1, 0.2, 0.3), "periodic", 7, {"grid": 4})
    assert res.to_json() == {"value": 0.5, "argmax": {"cx": 0.1, "cy": 0.2, "hu": 0.1, "hv": 0.2,
                                                      "angle": 0.3},
                             "mode": "periodic", "evaluations": 7, "resolution": {"grid": 4}}


def test_budget_and_rotation_validation():
    with pytest.raises(ValueError):
        SearchBudget(grid=1)
    with pytest.raises(ValueError):
        RotationSet(1.0)


@pytest.mark.parametrize("nu", [0.0, math.pi / 7])
def test_l2_single_point(nu):
    assert l2_disc_fourier(ONE, 0.25, nu, 512) == pytest.approx(0.1875, rel=0.01)


def test_l2_quadrature_single_point_and_convergence():
    a = l2_disc_quadrature(ONE, 0.25, 0.3, 256)
    assert a == pytest.approx(0.1875, rel=0.02)
    P = gen_random(6, 4)
    b, c = l2_disc_quadrature(P, 0.25, 0.2, 256), l2_disc_quadrature(P, 0.25, 0.2, 512)
    assert b == pytest.approx(c, rel=0.01)


def test_l2_grid2_matches_quadrature():
    # the 2x2 grid makes the L2 discrepancy of r = 1/4 squares vanish; compare absolutely
    P = gen_grid(2)
    f = l2_disc_fourier(P, 0.25, 0.0, 256)
    q = l2_disc_quadrature(P, 0.25, 0.0, 256)
    assert abs(f - q) <= 0.02 * 0.1875 + l2_fourier_tail(P, 0.25, 256)


@pytest.mark.parametrize("seed", [1, 2])
def test_l2_fourier_vs_quadrature_random(seed):
    P = gen_random(8, seed)
    f = l2_disc_fourier(P, 0.25, math.pi / 8, 512)
    q = l2_disc_quadrature(P, 0.25, math.pi / 8, 256)
    assert abs(f - q) / q <= 0.02


def test_l2_validation():
    with pytest.raises(ValueError):
        l2_disc_fourier(ONE, 0.5, 0.0, 8)
    with pytest.raises(ValueError):
        l2_disc_quadrature(ONE, 0.25, 0.0, 32)


def test_avg_l2_single_point_is_phi_sum():
    R, th, T = 1 / 16, math.pi / 8, 64
    w = fourier.phi_window(R, th, T)
    expected = math.fsum(w.ravel().tolist()) - w[T, T]
    assert avg_l2_disc(ONE, th, R, T) == pytest.approx(expected, rel=1e-12)


def test_avg_l2_dominates_partial_sums():
    P = gen_random(20, 3)
    R, th, T = 1 / 16, math.pi / 8, 24
    total = avg_l2_disc(P, th, R, T)
    modes = [(1, 0), (3, -4), (7, 7), (0, 12)]
    partial = math.fsum(fourier.phi_avg(R, th, m) * fourier.exp_sum_sq(P, m) for m in modes)
    assert 0 <= partial <= total


def test_avg_l2_fibonacci_nested_quadrature():
    # oracle: Gauss-Legendre over (r, nu) of the midpoint-rule L2 integral, 4 x 6 nodes
    P = gen_fibonacci(10)
    R, th = 1 / 16, math.pi / 8
    xr, wr = np.polynomial.legendre.leggauss(4)
    xn, wn = np.polynomial.legendre.leggauss(6)
    nested = sum(a * b / 4 * l2_disc_quadrature(P, R * (3 + u) / 4, th * v, 256)
                 for u, a in zip(xr, wr) for v, b in zip(xn, wn))
    # the truncation tail decays like 1/T: extrapolate from T = 64 and 128
    lo, hi = avg_l2_disc(P, th, R, 64), avg_l2_disc(P, th, R, 128)
    assert 2 * hi - lo == pytest.approx(nested, rel=0.03)

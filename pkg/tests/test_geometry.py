import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from hypdla.geometry import (HalfPlanePoint, HypIsometry, ball_volume, from_disc_model, hyp_ball_to_disk,
                             hyp_distance, hyp_distance_xy, isometry_apply, polar_coords, polar_point, split_exact,
                             to_disc_model)

# frozen with mpmath at 30 digits
ACOSH_3 = 1.76274717403908605
COSH_1, SINH_1 = 1.54308063481524378, 1.17520119364380146
BALL_23_CY, BALL_23_R = 11.2865870732508944, 10.8805812235410563

P = HalfPlanePoint

coords = st.floats(-50, 50)
heights = st.floats(1e-3, 1e3)
points = st.builds(HalfPlanePoint, coords, heights)


def test_distance_examples():
    assert hyp_distance(P(0, 1), P(0, 1)) == 0.0
    assert hyp_distance(P(0, 1), P(0, math.e)) == pytest.approx(1.0, abs=1e-15)
    assert hyp_distance(P(1, 1), P(3, 1)) == pytest.approx(ACOSH_3, abs=1e-15)


def test_distance_small_separation_keeps_digits():
    # 1 + w rounds to 1 here, the asinh form does not
    d = hyp_distance(P(0, 1), P(1e-10, 1))
    assert d == pytest.approx(1e-10, rel=1e-12)


def test_isometry_examples():
    assert isometry_apply(HypIsometry(5, 2, False), P(1, 1)) == P(7, 2)
    assert isometry_apply(HypIsometry(0, 1, True), P(2, 3)) == P(-2, 3)


def test_isometry_is_exact_on_large_offsets():
    T = HypIsometry(1e8, 3.0, False)
    q = isometry_apply(T, P(0.1, 1.0))
    assert q.x_exact == Fraction(1e8) + 3 * Fraction(0.1)


def test_ball_to_disk_examples():
    d0 = hyp_ball_to_disk(P(0, 1), 0)
    assert (d0.cx, d0.cy, d0.r) == (0, 1, 0)
    d1 = hyp_ball_to_disk(P(0, 1), 1)
    assert d1.cx == 0 and d1.cy == pytest.approx(COSH_1, abs=1e-12) and d1.r == pytest.approx(SINH_1, abs=1e-12)
    d2 = hyp_ball_to_disk(P(2, 3), 2)
    assert d2.cx == 2 and d2.cy == pytest.approx(BALL_23_CY, abs=1e-12) and d2.r == pytest.approx(BALL_23_R, abs=1e-12)


def test_polar_point_examples():
    o = P(0.3, 2.0)
    assert polar_point(o, 0.0, 1.234) == o
    up = polar_point(P(0, 1), 1.0, math.pi / 2)
    assert up.x == pytest.approx(0, abs=1e-15) and up.y == pytest.approx(math.e, rel=1e-15)


def test_polar_point_rejects_negative_radius():
    with pytest.raises(ValueError):
        polar_point(P(0, 1), -1.0, 0.0)


def test_disc_examples():
    assert to_disc_model(P(0, 1)) == pytest.approx((0, 0), abs=1e-15)
    assert to_disc_model(P(0, 3)) == pytest.approx((0.5, 0), abs=1e-15)


def test_disc_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        r, t = 0.999 * math.sqrt(rng.random()), 2 * math.pi * rng.random()
        u, v = r * math.cos(t), r * math.sin(t)
        assert to_disc_model(from_disc_model(u, v)) == pytest.approx((u, v), abs=1e-12)


def test_split_exact_round_trip():
    x = Fraction(10**12) + Fraction(1, 3)
    hi, lo = split_exact(x)
    assert abs(Fraction(hi) + Fraction(lo) - x) <= x * Fraction(1, 2**104)
    assert abs(lo) <= abs(hi) * 2**-52


def test_ball_volume_against_quadrature():
    # area element dx dy / y^2 integrated over the Euclidean image, slice by slice
    for R in (1.0, 2.0, 4.0):
        d = hyp_ball_to_disk(P(0, 1), R)
        val, _ = quad(lambda y: 2 * math.sqrt(max(d.r**2 - (y - d.cy) ** 2, 0.0)) / y**2, d.cy - d.r, d.cy + d.r,
                      limit=200)
        assert val == pytest.approx(ball_volume(R), rel=1e-8)


@settings(max_examples=300, deadline=None)
@given(points, points, st.floats(-100, 100), st.floats(1e-3, 1e3), st.booleans())
def test_distance_isometry_invariant(p, q, a, b, refl):
    T = HypIsometry(a, b, refl)
    d = hyp_distance(p, q)
    assert abs(hyp_distance(isometry_apply(T, p), isometry_apply(T, q)) - d) <= 1e-12 * (1 + d)


@settings(max_examples=300, deadline=None)
@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert hyp_distance(a, c) <= hyp_distance(a, b) + hyp_distance(b, c) + 1e-12


@settings(max_examples=300, deadline=None)
@given(points, st.floats(0.01, 25), st.floats(0, 2 * math.pi))
def test_polar_round_trip(o, R, theta):
    p = polar_point(o, R, theta)
    d, th = polar_coords(o, p)
    assert d == pytest.approx(R, abs=1e-9 * (1 + R))
    dth = (th - theta + math.pi) % (2 * math.pi) - math.pi
    assert abs(dth) < 1e-7


@settings(max_examples=200, deadline=None)
@given(points, st.floats(0.01, 5), st.floats(0, 2 * math.pi))
def test_ball_image_boundary_at_radius(c, rho, t):
    d = hyp_ball_to_disk(c, rho)
    b = P(d.cx + d.r * math.cos(t), d.cy + d.r * math.sin(t))
    if b.y > 0:
        assert hyp_distance(c, b) == pytest.approx(rho, abs=1e-9)


def test_vectorised_distance_matches_scalar():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(100, 2)) * 5
    y = 10 ** rng.uniform(-2, 2, size=(100, 2))
    v = hyp_distance_xy(x[:, 0], y[:, 0], x[:, 1], y[:, 1])
    for i in range(100):
        assert v[i] == pytest.approx(hyp_distance(P(x[i, 0], y[i, 0]), P(x[i, 1], y[i, 1])), rel=1e-14, abs=1e-15)


def test_lo_word_enters_distance():
    # two points 1e-20 apart at x = 1e10 differ only in the low word
    p = P(1e10, 1e-20, 0.0)
    q = P(1e10, 1e-20, 2e-20)
    assert hyp_distance(p, q) == pytest.approx(2.0 * math.asinh(1.0), rel=1e-12)

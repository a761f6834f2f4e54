import math

import numpy as np
import pytest

from prodspectra import ProductSpec
from prodspectra.analytic import integrate_moments
from prodspectra.closed_form import density_at
from prodspectra.contour import density_general, support_edge_general
from prodspectra.moments import moment_sequence
from prodspectra.murs import (
    LEFT_SWITCH,
    RIGHT_SWITCH,
    UnsupportedRegime,
    build_problem,
    density_murs,
    left_constant,
    right_constant,
    support_edge_closed,
)


@pytest.mark.parametrize("r,s,P_deg,Q_coeffs,alpha", [
    (2, 0, 3, (-1.0, 1.0), 2 * math.pi / 3),
    (7, 3, 8, (-1.0, -2.0, 0.0, 2.0, 1.0), math.pi / 4),  # (t-1)(t+1)^3
    (4, 2, 5, (-1.0, -1.0, 1.0, 1.0), 2 * math.pi / 5),  # (t-1)(t+1)^2
])
def test_build_problem(r, s, P_deg, Q_coeffs, alpha):
    prob = build_problem(ProductSpec(r, s))
    assert prob.P.coeffs == tuple([0.0] * P_deg + [1.0])
    assert prob.Q.coeffs == Q_coeffs
    assert prob.alpha == pytest.approx(alpha, rel=1e-15)


@pytest.mark.parametrize("r,s", [(1, 0), (2, 1), (3, 3)])
def test_build_problem_rejects_closed_form_regime(r, s):
    with pytest.raises(UnsupportedRegime, match="closed forms"):
        build_problem(ProductSpec(r, s))


def test_support_edge_r7_s3():
    e = support_edge_closed(ProductSpec(7, 3))
    assert e.w_star == pytest.approx((math.sqrt(33) - 1) / 4, rel=1e-15)
    assert e.x_star == pytest.approx(2.015, abs=5e-4)


@pytest.mark.parametrize("r", range(1, 10))
def test_support_edge_s0(r):
    e = support_edge_closed(ProductSpec(r, 0))
    assert e.w_star == pytest.approx((r + 1) / r, rel=1e-14)
    assert e.x_star == pytest.approx((r + 1) ** (r + 1) / r**r, rel=1e-13)


def test_support_edge_r2_s0():
    e = support_edge_closed(ProductSpec(2, 0))
    assert (e.w_star, e.x_star) == pytest.approx((1.5, 27 / 4), rel=1e-15)


@pytest.mark.parametrize("r", range(2, 10))
def test_support_edge_closed_matches_minimization(r):
    for s in range(0, r - 1):
        spec = ProductSpec(r, s)
        closed = support_edge_closed(spec)
        general = support_edge_general(build_problem(spec))
        assert general.x_star == pytest.approx(closed.x_star, rel=1e-10)
        # R'(w*) = 0: (r-s) w^2 - (1-s) w - (r+1) = 0
        w = closed.w_star
        assert abs((r - s) * w * w - (1 - s) * w - (r + 1)) < 1e-12 * (r + 1)


def test_density_fuss_catalan_r2():
    assert density_murs(ProductSpec(2, 0), 8 / 3) == pytest.approx(math.sqrt(3) / (8 * math.pi), rel=1e-10)


def test_density_near_right_edge_r7_s3():
    spec = ProductSpec(7, 3)
    x_star = support_edge_closed(spec).x_star
    v = density_murs(spec, x_star * (1 - 1e-4))
    assert 0 < v <= 0.1
    assert v / math.sqrt(1e-4 * x_star) == pytest.approx(right_constant(spec), rel=0.01)


def test_density_outside_support():
    spec = ProductSpec(4, 1)
    x_star = support_edge_closed(spec).x_star
    assert density_murs(spec, 0.0) == 0.0
    assert density_murs(spec, x_star) == 0.0
    assert density_murs(spec, 2 * x_star) == 0.0
    assert density_murs(spec, -1.0) == 0.0


def test_asymptotic_switches_are_continuous():
    spec = ProductSpec(7, 3)
    prob = build_problem(spec)
    x_star = support_edge_closed(spec).x_star
    x = LEFT_SWITCH * x_star
    scaled = lambda v, f: (f * x) ** (7 / 8) * v
    below = scaled(density_murs(spec, 0.999 * x), 0.999)
    above = scaled(density_general(prob, 1.001 * x), 1.001)
    assert below == pytest.approx(above, rel=1e-10)
    d = RIGHT_SWITCH * x_star
    x = x_star - 0.5 * d
    asym = density_murs(spec, x)
    assert asym / math.sqrt(x_star - x) == pytest.approx(right_constant(spec), rel=1e-12)
    quad = density_murs(spec, x_star - 100 * d)
    assert quad / math.sqrt(100 * d) == pytest.approx(right_constant(spec), rel=1e-4)


def test_left_constant():
    assert left_constant(ProductSpec(7, 3)) == pytest.approx(math.sin(math.pi / 8) / math.pi)


@pytest.mark.parametrize("r", range(2, 7))
def test_s0_matches_fuss_catalan_on_50_points(r):
    spec = ProductSpec(r, 0)
    x_star = support_edge_closed(spec).x_star
    xs = x_star * np.arange(1, 51) / 51
    dens = density_at("fc", r, xs)
    got = np.array([density_murs(spec, float(x)) for x in xs])
    assert np.max(np.abs(got - dens)) < 1e-6


@pytest.mark.parametrize("r,s", [(2, 0), (3, 1), (4, 2), (7, 3)])
def test_moments_match_jacobi_formula(r, s):
    spec = ProductSpec(r, s)
    m = integrate_moments(spec, 6, method="contour")
    ref = np.array(moment_sequence(spec, 6))
    assert np.max(np.abs(m / ref - 1)) < 1e-5
    assert m[0] == pytest.approx(1.0, abs=1e-6)


def test_first_moment_r3_s1():
    m = integrate_moments(ProductSpec(3, 1), 1, method="contour")
    assert m[1] == pytest.approx(0.5, rel=1e-8)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prodspectra.numkit import (
    ComplexPath,
    PhaseJumpError,
    QuadratureError,
    RealPoly,
    RootFindingError,
    Segment,
    adaptive_integrate,
    hermitian_eigenvalues,
    poly_roots,
    ray,
    segment,
    unwrap_phase,
)


def _sorted(z):
    z = np.asarray(z)
    return z[np.lexsort((z.imag, z.real))]


# --- RealPoly -----------------------------------------------------------------


def test_realpoly_normalizes_trailing_zeros():
    p = RealPoly((1.0, 2.0, 0.0, 0.0))
    assert p.degree == 1
    assert p.lead == 2.0


def test_realpoly_conjugate_symmetry():
    p = RealPoly((0.3, -1.0, 2.0, 0.5))
    z = np.array([0.2 + 1.3j, -2.0 + 0.1j])
    assert np.allclose(p(np.conj(z)), np.conj(p(z)), rtol=0, atol=1e-14)
    assert np.isrealobj(p(np.array([0.5, 1.5])))


def test_realpoly_arithmetic():
    p = RealPoly.from_roots([1.0, -1.0])
    assert p.coeffs == (-1.0, 0.0, 1.0)
    q = p * RealPoly((0.0, 1.0)) - RealPoly((0.0, 0.0, 0.0, 1.0))
    assert q.coeffs == (0.0, -1.0)
    assert RealPoly.monomial(3).origin_order == 3
    assert RealPoly((0.0, 0.0, 2.0, 1.0)).deflate_origin().coeffs == (2.0, 1.0)


# --- roots --------------------------------------------------------------------


def test_roots_factorable():
    r = poly_roots(RealPoly((-1.0, 0.0, 1.0)))
    assert np.allclose(_sorted(r), [-1.0, 1.0], atol=1e-12)


def test_roots_of_unity_rotated():
    r = poly_roots(RealPoly((1.0, 0.0, 0.0, 1.0)))
    expected = [-1.0, np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 3)]
    assert np.allclose(_sorted(r), _sorted(expected), atol=1e-12)


def test_roots_in_sector_r2_x5():
    # w^3 - 5(w - 1): compare against the eigenvalues of the companion matrix
    p = RealPoly((5.0, -5.0, 0.0, 1.0))
    r = poly_roots(p)
    oracle = np.linalg.eigvals(np.array([[0, 0, -5.0], [1, 0, 5.0], [0, 1, 0.0]]))
    assert np.allclose(_sorted(r), _sorted(oracle), atol=1e-10)
    in_sector = np.abs(np.angle(r)) <= 2 * np.pi / 3
    assert in_sector.sum() == 2


def test_roots_residual_contract():
    p = RealPoly.from_roots([0.5, 1.0, 1.0, 2.0, -3.0]) * RealPoly((1.0, 0.0, 1.0))
    r = poly_roots(p)
    assert r.size == p.degree
    bound = 1e-10 * max(abs(c) for c in p.coeffs) * np.maximum(1.0, np.abs(r)) ** p.degree
    assert np.all(np.abs(p(r)) <= bound)


def test_roots_failure_reports_residuals():
    p = RealPoly(tuple(np.random.default_rng(3).normal(size=12)))
    with pytest.raises(RootFindingError) as info:
        poly_roots(p, max_sweeps=1, tol=1e-300)
    assert info.value.residuals is not None


def test_roots_rejects_constant():
    with pytest.raises(ValueError):
        poly_roots(RealPoly((3.0,)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=13)
       .filter(lambda c: abs(c[-1]) > 1e-2 and abs(c[0]) > 1e-2))
def test_roots_conjugate_pairs_and_vieta(coeffs):
    p = RealPoly(tuple(coeffs))
    r = poly_roots(p)
    nonreal = r[np.abs(r.imag) > 1e-9 * np.maximum(1, np.abs(r))]
    # every non-real root has its conjugate in the list
    for z in nonreal:
        assert np.min(np.abs(r - np.conj(z))) <= 1e-7 * max(1.0, abs(z))
    prod = np.prod(r)
    expected = (-1) ** p.degree * coeffs[0] / coeffs[-1]
    assert abs(prod - expected) <= 1e-8 * max(1.0, abs(expected))


# --- quadrature ---------------------------------------------------------------


def test_integrate_exponential_on_ray():
    val = adaptive_integrate(lambda z: np.exp(-z), ray(0.0, decay=3.0), rel_tol=1e-10)
    assert val == pytest.approx(1.0, rel=1e-10)


def test_integrate_log_singularity():
    seg = Segment(lambda t: t, lambda t: np.ones_like(t), 0.0, 1.0, singular_start=True)
    val = adaptive_integrate(lambda z: np.log(1 / z), ComplexPath((seg,)), rel_tol=1e-10)
    assert val.real == pytest.approx(1.0, rel=1e-10)


def test_integrate_power_tail():
    seg = Segment(lambda t: t, lambda t: np.ones_like(t), 1.0, math.inf, decay=2.0)
    val = adaptive_integrate(lambda z: z**-2, ComplexPath((seg,)), rel_tol=1e-10)
    assert val.real == pytest.approx(1.0, rel=1e-9)


def test_integrate_complex_segment():
    # integral of z^2 over the segment 0 -> 1 + i is (1 + i)^3 / 3
    val = adaptive_integrate(lambda z: z * z, segment(0, 1 + 1j))
    assert abs(val - (1 + 1j) ** 3 / 3) < 1e-13


def test_integrate_budget_exhausted():
    seg = Segment(lambda t: t, lambda t: np.ones_like(t), 0.0, 1.0)
    with pytest.raises(QuadratureError) as info:
        adaptive_integrate(lambda z: np.sin(1.0 / np.real(z)) / np.real(z), ComplexPath((seg,)),
                           rel_tol=1e-12, max_intervals=50)
    assert info.value.worst


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.1, 2.0))
def test_integrate_linearity_and_reversal(a, b, k):
    path = segment(0.2, 1.5 + 0.7j)
    f = lambda z: np.exp(k * z)
    g = lambda z: 1.0 / (z + 2.0)
    lhs = adaptive_integrate(lambda z: a * f(z) + b * g(z), path, rel_tol=1e-11)
    rhs = a * adaptive_integrate(f, path, rel_tol=1e-11) + b * adaptive_integrate(g, path, rel_tol=1e-11)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))
    rev = adaptive_integrate(f, path.reversed(), rel_tol=1e-11)
    assert abs(rev + adaptive_integrate(f, path, rel_tol=1e-11)) <= 1e-10 * (1 + abs(rev))


# --- phase unwrapping ---------------------------------------------------------


def test_unwrap_constant():
    assert np.allclose(unwrap_phase([1, 1, 1]), [0, 0, 0])


def test_unwrap_full_turn_without_wrap():
    z = np.exp(1j * np.deg2rad([0, 120, 240, 360]))
    assert np.allclose(unwrap_phase(z), [0, 2 * np.pi / 3, 4 * np.pi / 3, 2 * np.pi])


def test_unwrap_requests_refinement():
    # a half-turn between neighbours is ambiguous
    with pytest.raises(PhaseJumpError):
        unwrap_phase([1.0, 1j, -1j])
    with pytest.raises(PhaseJumpError):
        unwrap_phase(np.exp(1j * np.array([0.0, 2.0])), max_step=1.5)


def test_unwrap_along_ray_matches_dense_sampling():
    # 1 - x Q/P along the ray of angle 2 pi/4 for r = 3, s = 0, x = 1, sampled from infinity inward
    alpha, x = 2 * np.pi / 4, 1.0
    f = lambda t: 1 - x * (t - 1) / t**4
    u = np.geomspace(1e4, 1e-3, 400)
    coarse = unwrap_phase(f(u * np.exp(1j * alpha)))
    fine_u = np.geomspace(1e4, 1e-3, 3991)
    fine = unwrap_phase(f(fine_u * np.exp(1j * alpha)))
    assert np.allclose(coarse, fine[::10], atol=1e-12)
    # real-valued limit at the point at infinity
    assert abs(coarse[0]) < 1e-3


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=50), st.floats(0.1, 5.0))
def test_unwrap_reproduces_samples(steps, mag):
    ang = np.cumsum(steps)
    z = mag * np.exp(1j * ang)
    lifted = unwrap_phase(z)
    assert -np.pi < lifted[0] <= np.pi
    assert np.allclose(np.abs(z) * np.exp(1j * lifted), z, atol=1e-12 * mag)


# --- Hermitian eigenvalues ----------------------------------------------------


def test_eig_identity_and_diagonal():
    assert np.allclose(hermitian_eigenvalues(np.eye(3)), [1, 1, 1])
    assert np.allclose(hermitian_eigenvalues(np.diag([5.0, 0.0])), [0, 5])


def test_eig_matches_singular_values_of_ginibre():
    rng = np.random.default_rng(11)
    y = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) / np.sqrt(2)
    ev = hermitian_eigenvalues(y.conj().T @ y)
    sv = np.linalg.svd(y, compute_uv=False)  # LAPACK bidiagonalization route
    assert np.allclose(ev, np.sort(sv**2), rtol=1e-10, atol=1e-12)


def test_eig_trace_and_psd():
    rng = np.random.default_rng(5)
    y = rng.normal(size=(40, 30)) + 1j * rng.normal(size=(40, 30))
    m = y.conj().T @ y
    ev = hermitian_eigenvalues(m)
    assert ev.size == 30
    assert np.all(np.diff(ev) >= 0)
    assert ev.sum() == pytest.approx(np.trace(m).real, rel=1e-10)
    assert ev.min() >= -1e-10 * np.linalg.norm(m, 2)


def test_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31))
def test_eig_unitary_invariance(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = a + a.conj().T
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    e1 = hermitian_eigenvalues(h)
    e2 = hermitian_eigenvalues(q @ h @ q.conj().T)
    assert np.allclose(e1, e2, atol=1e-9 * max(1.0, np.abs(e1).max()))

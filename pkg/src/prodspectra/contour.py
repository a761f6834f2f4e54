"""Densities of measures whose Stieltjes transform solves P(w) - z Q(w) = 0.

The density on (0, x*) is

    rho(x) = 1/(2 pi^2 x) * Re  integral over gamma_alpha of log(1 - x Q(t)/P(t)) dt,

where gamma_alpha runs in from infinity along the ray at angle ``alpha`` to the
origin and back out along the positive reals, and the logarithm is continued
from the principal branch at infinity along each ray. Both rays are integrated
jointly in the radius u, which keeps the integrand decaying like u**-2 even
when deg P - deg Q = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .numkit import (
    ComplexPath,
    NumericalError,
    PhaseJumpError,
    RealPoly,
    Segment,
    adaptive_integrate,
    poly_roots,
    unwrap_phase,
)


class HypothesisViolation(ValueError):
    """A structural assumption of the integral representation fails."""


@dataclass(frozen=True)
class RationalDensityProblem:
    P: RealPoly
    Q: RealPoly
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < math.pi:
            raise HypothesisViolation(f"sector half-angle {self.alpha} outside (0, pi)")
        if self.Q.is_zero or self.P.is_zero:
            raise HypothesisViolation("P and Q must be nonzero")
        if self.P.degree < self.Q.degree + 1:
            raise HypothesisViolation("need deg P > deg Q")
        if self.P.lead * self.Q.lead <= 0:
            raise HypothesisViolation("P/Q must tend to +infinity along the positive reals")

    @property
    def degree_gap(self) -> int:
        return self.P.degree - self.Q.degree

    @property
    def origin_order(self) -> int:
        return self.P.origin_order

    def R(self, t):
        return self.P(t) / self.Q(t)


@dataclass(frozen=True)
class EdgeBehavior:
    left_exponent: Fraction
    right_type: str  # "sqrt": density vanishes like sqrt(x* - x)
    x_star: float
    w_star: float

    @property
    def ell(self) -> int:
        return self.left_exponent.denominator if self.left_exponent else 1


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)  # (name, passed, detail)
    root_counts: list = field(default_factory=list)  # (x, count)
    note: str = ("the two-roots-in-sector condition is checked on sampled x only; "
                 "no finite procedure certifies it for every x > 0")

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list:
        return [(n, d) for n, passed, d in self.checks if not passed]


# ---------------------------------------------------------------------------
# Root counting in the sector
# ---------------------------------------------------------------------------


def _distance_to_boundary(z: np.ndarray, alpha: float) -> np.ndarray:
    def to_ray(angle):
        rot = z * np.exp(-1j * angle)
        return np.where(rot.real >= 0, np.abs(rot.imag), np.abs(z))

    return np.minimum(to_ray(alpha), to_ray(-alpha))


def _in_sector(z: np.ndarray, alpha: float) -> np.ndarray:
    return np.abs(np.angle(z)) <= alpha


def count_sector_roots(prob: RationalDensityProblem, x: float, proximity: float = 1e-6) -> int:
    """Number of roots of P - xQ inside the closed sector |arg w| <= alpha.

    Computed by the argument principle: the continuous change of arg(P - xQ)
    around the boundary of the sector truncated at a radius beyond the Cauchy
    bound of all roots, so nothing lies outside.
    """
    D = prob.P - prob.Q * x
    roots = poly_roots(D)
    near = _distance_to_boundary(roots, prob.alpha) < proximity * np.abs(roots)
    if np.any(near):
        raise HypothesisViolation(
            f"P - xQ has a root within {proximity:g} of the sector boundary at x={x!r}: "
            f"{roots[near][0]!r}")
    c = np.array(D.coeffs)
    radius = 2.0 * (1.0 + np.max(np.abs(c[:-1] / c[-1])))
    winding = _winding_number(D, prob.alpha, radius)
    k = round(winding)
    if abs(winding - k) > 0.01:
        raise NumericalError(f"non-integer winding number {winding} at x={x!r}")
    return int(k)


def _boundary_point(tau: np.ndarray, alpha: float, radius: float) -> np.ndarray:
    """Closed boundary of the truncated sector for tau in [0, 3]."""
    lam = math.log1p(radius / 1e-9)
    out = np.empty(tau.shape, dtype=complex)
    a = tau <= 1
    b = (tau > 1) & (tau <= 2)
    c = tau > 2
    rad_out = radius * np.expm1(lam * tau[a]) / math.expm1(lam)
    out[a] = rad_out * np.exp(-1j * alpha)
    out[b] = radius * np.exp(1j * alpha * (2 * (tau[b] - 1) - 1))
    rad_in = radius * np.expm1(lam * (3 - tau[c])) / math.expm1(lam)
    out[c] = rad_in * np.exp(1j * alpha)
    return out


def _winding_number(D: RealPoly, alpha: float, radius: float, max_points: int = 200_000) -> float:
    tau = np.linspace(0.0, 3.0, 3001)
    while True:
        vals = D(_boundary_point(tau, alpha, radius))
        steps = np.abs(np.angle(vals[1:] / vals[:-1]))
        coarse = steps > math.pi / 8
        if not np.any(coarse):
            break
        if tau.size > max_points:
            raise NumericalError("winding number sampling did not resolve the boundary")
        mids = 0.5 * (tau[:-1] + tau[1:])[coarse]
        tau = np.sort(np.concatenate([tau, mids]))
    lifted = unwrap_phase(vals, max_step=math.pi / 4)
    return (lifted[-1] - lifted[0]) / (2 * math.pi)


# ---------------------------------------------------------------------------
# Support edge and hypothesis validation
# ---------------------------------------------------------------------------


def support_edge_general(prob: RationalDensityProblem) -> EdgeBehavior:
    """Minimum of R = P/Q on (1, inf): x* = R(w*), found by bisection on the sign of R'."""
    P, Q = prob.P, prob.Q
    dP, dQ = P.derivative(), Q.derivative()

    def numer(t):  # sign of R'(t) for Q(t) > 0
        return float(dP(t) * Q(t) - P(t) * dQ(t))

    lo = 1.0 + 1e-9
    if not numer(lo) < 0:
        raise HypothesisViolation("R = P/Q is not decreasing just right of t = 1")
    hi = 2.0
    while numer(hi) <= 0:
        hi *= 2.0
        if hi > 1e150:
            raise HypothesisViolation("could not bracket the minimum of P/Q on (1, inf)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if numer(mid) < 0:
            lo = mid
        else:
            hi = mid
    w = 0.5 * (lo + hi)
    ell = P.origin_order
    if ell < 1:
        raise HypothesisViolation("P must vanish at the origin")
    return EdgeBehavior(Fraction(ell - 1, ell), "sqrt", float(prob.R(w)), w)


@lru_cache(maxsize=256)
def validate_problem(prob: RationalDensityProblem, n_samples: int = 8) -> ValidationReport:
    """Check the hypotheses of the integral representation numerically."""
    rep = ValidationReport()
    P, Q = prob.P, prob.Q
    rep.checks.append(("sector angle", 0 < prob.alpha < math.pi,
                       f"alpha={prob.alpha:.6g}" + ("" if prob.alpha <= math.pi / 2 else
                                                    " (beyond pi/2: used as in the r=2 Fuss-Catalan case)")))
    rep.checks.append(("degree gap", prob.degree_gap >= 1,
                       f"deg P - deg Q = {prob.degree_gap}" + ("" if prob.degree_gap >= 2 else
                                                               " (gap 1: rays integrated jointly)")))
    q_scale = max(abs(c) for c in Q.coeffs)
    rep.checks.append(("Q(1) = 0", abs(Q(1.0)) <= 1e-12 * q_scale, f"Q(1)={Q(1.0):.3g}"))
    dq1 = Q.derivative()(1.0)
    rep.checks.append(("Q'(1) > 0", dq1 > 0, f"Q'(1)={dq1:.6g}"))
    grid = np.linspace(1e-3, 1.0, 1000)
    rep.checks.append(("P > 0 on (0, 1]", bool(np.all(P(grid) > 0)), "sampled on 1000 points"))
    rp = poly_roots(P)
    rq = poly_roots(Q)
    sep = np.min(np.abs(rp[:, None] - rq[None, :]))
    rep.checks.append(("gcd(P, Q) = 1", sep > 1e-8, f"min root separation {sep:.3g}"))
    nz = rp[np.abs(rp) > 0]
    on_ray = nz[np.abs(np.angle(nz * np.exp(-1j * prob.alpha))) < 1e-9] if nz.size else nz
    rep.checks.append(("P has no roots on the ray", on_ray.size == 0, f"{on_ray.size} roots found"))
    ok_structure = all(p for _, p, _ in rep.checks)
    if not ok_structure:
        return rep
    try:
        edge = support_edge_general(prob)
    except HypothesisViolation as exc:
        rep.checks.append(("P/Q convex on (1, inf)", False, str(exc)))
        return rep
    xs = list(np.geomspace(4 * edge.x_star * 1e-6, 4 * edge.x_star, n_samples)) + [2 * edge.x_star]
    bad = []
    for x in xs:
        try:
            k = count_sector_roots(prob, float(x))
        except (HypothesisViolation, NumericalError) as exc:
            k = -1
            bad.append(f"x={x:.4g}: {exc}")
        rep.root_counts.append((float(x), k))
        if k != 2:
            bad.append(f"x={x:.4g}: {k} roots")
    rep.checks.append(("two roots in sector (sampled)", not bad, "; ".join(bad) or
                       f"{len(xs)} sampled x values in (0, 4x*]"))
    return rep


@lru_cache(maxsize=256)
def _edge_cached(prob: RationalDensityProblem) -> EdgeBehavior:
    return support_edge_general(prob)


# ---------------------------------------------------------------------------
# Density
# ---------------------------------------------------------------------------


def _log_poly(p: RealPoly, t: np.ndarray) -> np.ndarray:
    """log p(t) (argument modulo 2 pi) without overflow at large |t|."""
    t = np.asarray(t, dtype=complex)
    out = np.empty(t.shape, dtype=complex)
    small = np.abs(t) <= 1.0
    if np.any(small):
        out[small] = np.log(p(t[small]))
    big = ~small
    if np.any(big):
        inv = 1.0 / t[big]
        rev = RealPoly(p.coeffs[::-1])
        out[big] = p.degree * np.log(t[big]) + np.log(rev(inv))
    return out


def _clog1p(z: np.ndarray) -> np.ndarray:
    """Complex log(1 + z) accurate for small |z| (numpy's complex log1p is not)."""
    re, im = z.real, z.imag
    return 0.5 * np.log1p(2.0 * re + re * re + im * im) + 1j * np.arctan2(im, 1.0 + re)


class _LogRatio:
    """log(1 - x Q/P) with principal argument.

    Where |xQ/P| < 1/2 this is log1p of a ratio evaluated in reversed form for
    |t| > 1, which keeps full relative accuracy in the slowly decaying tail.
    Elsewhere it is log(P - xQ) - ell log t - log(P/t^ell), which cannot
    under- or overflow near the origin.
    """

    def __init__(self, prob: RationalDensityProblem, x: float):
        self.x = x
        self.P, self.Q = prob.P, prob.Q
        self.D = prob.P - prob.Q * x
        self.ell = prob.origin_order
        self.Pt = prob.P.deflate_origin()
        self.gap = prob.degree_gap
        self.Prev = RealPoly(prob.P.coeffs[::-1])
        self.Qrev = RealPoly(prob.Q.coeffs[::-1])

    def ratio(self, t):
        out = np.empty(t.shape, dtype=complex)
        big = np.abs(t) > 1.0
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if np.any(big):
                inv = 1.0 / t[big]
                out[big] = self.x * inv**self.gap * self.Qrev(inv) / self.Prev(inv)
            small = ~big
            if np.any(small):
                ts = t[small]
                out[small] = self.x * self.Q(ts) / self.Pt(ts) / ts**self.ell
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        rat = self.ratio(t)
        near = np.abs(rat) < 0.5
        out = np.empty(t.shape, dtype=complex)
        out[near] = _clog1p(-rat[near])
        far = ~near
        if np.any(far):
            tf = t[far]
            val = _log_poly(self.D, tf) - self.ell * np.log(tf) - _log_poly(self.Pt, tf)
            out[far] = val.real + 1j * np.angle(np.exp(1j * val.imag))
        return out


class _RayBranch:
    """Continuous argument of 1 - xQ/P along the ray u e^{i alpha}, u from infinity to 0."""

    def __init__(self, logratio: _LogRatio, alpha: float, scales: np.ndarray,
                 per_decade: int = 48, max_step: float = 0.5):
        self.logratio = logratio
        self.direction = complex(math.cos(alpha), math.sin(alpha))
        lo = 1e-3 * float(np.min(scales))
        hi = 1e3 * float(np.max(scales))
        decades = math.log10(hi / lo)
        n = max(64, int(per_decade * decades))
        while True:
            u = np.geomspace(hi, lo, n)
            principal = logratio(u * self.direction).imag
            try:
                lifted = unwrap_phase(np.exp(1j * principal), max_step=max_step)
                break
            except PhaseJumpError:
                n *= 2
                if n > 1_000_000:
                    raise NumericalError("branch table refinement exceeded its budget")
        self.log_u = np.log(u[::-1])
        self.lifted = lifted[::-1]

    def __call__(self, u):
        val = self.logratio(u * self.direction)
        guess = np.interp(np.log(u), self.log_u, self.lifted)
        m = np.round((guess - val.imag) / (2 * math.pi))
        return val.real + 1j * (val.imag + 2 * math.pi * m)


class DensityValue(NamedTuple):
    value: float
    in_support: bool


def _density_integral(prob: RationalDensityProblem, x: float, rel_tol: float) -> float:
    logratio = _LogRatio(prob, x)
    roots = poly_roots(logratio.D)
    if np.any(_distance_to_boundary(roots, prob.alpha) < 1e-10 * np.abs(roots)):
        raise HypothesisViolation(f"P - xQ has a root on the sector boundary at x={x!r}")
    inside = int(np.count_nonzero(_in_sector(roots, prob.alpha)))
    if inside != 2:
        raise HypothesisViolation(f"P - xQ has {inside} roots in the sector at x={x!r}, need 2")
    pole_scales = np.abs(poly_roots(logratio.Pt)) if logratio.Pt.degree >= 1 else np.zeros(0)
    scales = np.concatenate([np.abs(roots), pole_scales])
    scales = scales[scales > 0]
    branch = _RayBranch(logratio, prob.alpha, scales)
    ca, sa = math.cos(prob.alpha), math.sin(prob.alpha)
    sigma = float(np.exp(np.mean(np.log(np.abs(roots[np.abs(roots) > 0])))))

    def integrand(v):
        u = sigma * np.real(v)
        real_axis = logratio(u.astype(complex)).real
        ray_val = branch(u)
        # Re[-e^{i alpha} log f(u e^{i alpha})] = -cos(alpha) log|f| + sin(alpha) arg f
        return sigma * (real_axis - ca * ray_val.real + sa * ray_val.imag)

    decay = max(2, prob.degree_gap)
    seg = Segment(lambda v: v, lambda v: np.ones(np.shape(v)), 0.0, math.inf,
                  singular_start=True, decay=decay)
    # near x*, f has a near-double zero at w* on the real axis and log|f| carries
    # noise of order eps/(x* - x) there; the integral itself scales like sigma, so
    # an absolute floor of 1e-12 sigma keeps the relative target from chasing noise
    total = adaptive_integrate(integrand, ComplexPath((seg,)), rel_tol=rel_tol, abs_tol=1e-12 * sigma)
    return float(np.real(total)) / (2 * math.pi**2 * x)


def density_value(prob: RationalDensityProblem, x: float, rel_tol: float = 1e-10,
                  validate: bool = True) -> DensityValue:
    if validate:
        rep = validate_problem(prob)
        if not rep.ok:
            raise HypothesisViolation("; ".join(f"{n}: {d}" for n, d in rep.failures()))
    edge = _edge_cached(prob)
    if not 0 < x < edge.x_star:
        return DensityValue(0.0, False)
    return DensityValue(_density_integral(prob, float(x), rel_tol), True)


def density_general(prob: RationalDensityProblem, x: float, rel_tol: float = 1e-10,
                    validate: bool = True) -> float:
    """Density at ``x`` from the contour integral; 0 outside (0, x*)."""
    return density_value(prob, x, rel_tol, validate).value


def extrapolate_right_edge(density: Callable[[float], float], x_star: float,
                           deltas=(1e-2, 1e-3, 1e-4), agreement: float = 0.01):
    """Limit of density(x)/sqrt(x* - x) as x -> x*, by Richardson extrapolation.

    Returns (limit, raw_ratios). The ratio is c0 + c1 delta + ..., so each pair
    of consecutive deltas (factor 10 apart) gives (10 c_fine - c_coarse)/9.
    """
    ds = [d * x_star for d in deltas]
    ratios = [density(x_star - d) / math.sqrt(d) for d in ds]
    extrap = []
    for (d1, c1), (d2, c2) in zip(zip(ds, ratios), zip(ds[1:], ratios[1:])):
        q = d1 / d2
        extrap.append((q * c2 - c1) / (q - 1))
    if len(extrap) >= 2 and abs(extrap[-1] - extrap[-2]) > agreement * abs(extrap[-1]):
        raise NumericalError(f"right-edge extrapolation did not settle: {extrap}")
    limit = extrap[-1] if extrap else ratios[-1]
    if not limit > 0:
        raise NumericalError(f"non-positive right-edge constant {limit}")
    return limit, ratios


def edge_constant_right(prob: RationalDensityProblem) -> float:
    """lim density(x)/sqrt(x* - x) as x -> x* from the left."""
    edge = _edge_cached(prob)
    limit, _ = extrapolate_right_edge(lambda x: density_general(prob, x), edge.x_star)
    return limit

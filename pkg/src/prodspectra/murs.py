"""mu_{r,s} for r >= s + 2 through the contour engine, with closed-form edges."""

from __future__ import annotations

import math
from functools import lru_cache

from .contour import (
    RationalDensityProblem,
    density_general,
    extrapolate_right_edge,
)
from .numkit import RealPoly
from .product import ProductSpec, SupportEdge


class UnsupportedRegime(ValueError):
    """The requested (r, s) is outside the contour regime r >= s + 2."""


# below this fraction of x* the leading power law replaces quadrature
LEFT_SWITCH = 1e-200
# within this relative distance of x* the square-root law replaces quadrature
RIGHT_SWITCH = 1e-8


def _require_contour(spec: ProductSpec):
    if spec.r < spec.s + 2:
        raise UnsupportedRegime(
            f"(r, s) = ({spec.r}, {spec.s}) needs the parameterized closed forms (r <= s + 1)")


@lru_cache(maxsize=None)
def build_problem(spec: ProductSpec) -> RationalDensityProblem:
    """P(t) = t^(r+1), Q(t) = (t-1)(t+1)^s on the sector of half-angle 2 pi/(r+1)."""
    _require_contour(spec)
    P = RealPoly.monomial(spec.r + 1)
    Q = RealPoly((-1.0, 1.0))
    for _ in range(spec.s):
        Q = Q * RealPoly((1.0, 1.0))
    return RationalDensityProblem(P, Q, 2 * math.pi / (spec.r + 1))


def support_edge_closed(spec: ProductSpec) -> SupportEdge:
    r, s = spec.r, spec.s
    if r <= s:
        raise UnsupportedRegime("closed support edge needs r > s")
    w = (1 - s + math.sqrt((1 - s) ** 2 + 4 * (r + 1) * (r - s))) / (2 * (r - s))
    x = (r + 1) / (s + 1) * w**r / ((w + 1) ** (s - 1) * (w - (s - 1) / (s + 1)))
    return SupportEdge(w, x)


def left_constant(spec: ProductSpec) -> float:
    """lim x^(r/(r+1)) rho(x) as x -> 0+."""
    return math.sin(math.pi / (spec.r + 1)) / math.pi


@lru_cache(maxsize=None)
def right_constant(spec: ProductSpec) -> float:
    """lim rho(x)/sqrt(x* - x) as x -> x*-, extrapolated from quadrature values."""
    prob = build_problem(spec)
    x_star = support_edge_closed(spec).x_star
    limit, _ = extrapolate_right_edge(lambda x: density_general(prob, x), x_star)
    return limit


def density_murs(spec: ProductSpec, x: float, rel_tol: float = 1e-10) -> float:
    prob = build_problem(spec)
    x_star = support_edge_closed(spec).x_star
    if not 0 < x < x_star:
        return 0.0
    if x < LEFT_SWITCH * x_star:
        return left_constant(spec) * x ** (-spec.r / (spec.r + 1))
    if x > x_star * (1 - RIGHT_SWITCH):
        return right_constant(spec) * math.sqrt(x_star - x)
    return density_general(prob, x, rel_tol=rel_tol)

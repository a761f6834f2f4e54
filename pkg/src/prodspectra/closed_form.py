"""Parameterized closed-form densities.

Each curve is given on 0 < phi < pi/(r+1) by a strictly decreasing map
phi -> x(phi) together with the density value at x(phi):

    "fc"     products of r Ginibre factors (Fuss-Catalan)
    "murr1"  r - 1 truncated unitaries and one Ginibre factor
    "murr"   r truncated unitaries

phi -> 0 is the right edge of the support and phi -> pi/(r+1) the origin.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .numkit import ComplexPath, Segment, adaptive_integrate

CURVES = ("fc", "murr1", "murr")


class OutOfSupportError(ValueError):
    pass


class ParamPoint(NamedTuple):
    phi: float
    x: float
    rho: float
    edge: str | None = None  # "right" at phi = 0, "left" at phi = pi/(r+1)


def density_mp(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 4)
    xs = np.where(inside, x, 1.0)
    out = np.where(inside, np.sqrt(4 - xs) / (2 * np.pi * np.sqrt(xs)), 0.0)
    return out[()] if out.ndim == 0 else out


def density_arcsine(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    out = np.where(inside, 1.0 / (np.pi * np.sqrt(xs * (1 - xs))), 0.0)
    return out[()] if out.ndim == 0 else out


def _check_r(kind: str, r: int):
    if kind not in CURVES:
        raise ValueError(f"unknown curve {kind!r}")
    low = 2 if kind == "murr1" else 1
    if int(r) != r or r < low:
        raise ValueError(f"curve {kind} needs integer r >= {low}")


def phi_max(r: int) -> float:
    return math.pi / (r + 1)


def c_r(r: int) -> float:
    """rho_r at phi -> 0+."""
    return (3 * r - math.sqrt(r * r + 8)) / (2 * (r - 1))


def right_edge(kind: str, r: int) -> float:
    _check_r(kind, r)
    if kind == "fc":
        return (r + 1) ** (r + 1) / r**r
    if kind == "murr":
        return (r + 1) ** (r + 1) / (2 ** (r + 1) * r**r)
    c = c_r(r)
    return c ** (r + 1) / (2**r * (c - 1) * (2 - c))


# ---------------------------------------------------------------------------
# vectorized curve internals (phi strictly inside the interval)
# ---------------------------------------------------------------------------


def _rho_r(r: int, phi):
    """Smaller root of rho^2 - B rho + C with B = 3 sin(r phi)/sin((r-1) phi),
    C = 2 sin((r+1) phi)/sin((r-1) phi), as C / (B/2 + sqrt(B^2/4 - C))."""
    s_rm1 = np.sin((r - 1) * phi)
    b = 1.5 * np.sin(r * phi) / s_rm1
    q = 2.0 * np.sin((r + 1) * phi) / s_rm1
    disc = b * b - q
    if np.any(disc < -1e-12 * b * b):
        raise ValueError("negative discriminant in rho_r")
    return q / (b + np.sqrt(np.maximum(disc, 0.0)))


def _rho_r_prime(r: int, phi, rho):
    s1, c1 = np.sin((r - 1) * phi), np.cos((r - 1) * phi)
    sr, cr = np.sin(r * phi), np.cos(r * phi)
    sp, cp = np.sin((r + 1) * phi), np.cos((r + 1) * phi)
    B = 3 * sr / s1
    dB = 3 * (r * cr * s1 - (r - 1) * sr * c1) / s1**2
    dC = 2 * ((r + 1) * cp * s1 - (r - 1) * sp * c1) / s1**2
    return (dB * rho - dC) / (2 * rho - B)


def _curve(kind: str, r: int, phi):
    """(x, density) along the curve."""
    phi = np.asarray(phi, dtype=float)
    s, sr, sp = np.sin(phi), np.sin(r * phi), np.sin((r + 1) * phi)
    if kind == "fc":
        x = sp ** (r + 1) / (s * sr**r)
        dens = s * s * sr ** (r - 1) / (np.pi * sp**r)
    elif kind == "murr":
        x = sp ** (r + 1) / (2 ** (r + 1) * s * sr**r)
        srm = np.sin((r - 1) * phi)
        dens = (2 ** (r + 2) * s * s * sr ** (r + 1)
                / (np.pi * sp**r * (4 * s * s * sr * sr + srm * srm)))
    else:
        rho = _rho_r(r, phi)
        lin = 3 * s - rho * np.sin(2 * phi)
        x = rho**r * sp / (2**r * lin)
        dens = (2 ** (r + 1) * s * lin
                / (np.pi * sp * rho ** (r - 1) * (4 - 4 * rho * np.cos(phi) + rho * rho)))
    return x, dens


def _dlogx(kind: str, r: int, phi):
    """d log x / d phi (negative on the open interval)."""
    phi = np.asarray(phi, dtype=float)
    cot = lambda a: np.cos(a) / np.sin(a)
    if kind in ("fc", "murr"):
        return (r + 1) ** 2 * cot((r + 1) * phi) - cot(phi) - r * r * cot(r * phi)
    rho = _rho_r(r, phi)
    drho = _rho_r_prime(r, phi, rho)
    lin = 3 * np.sin(phi) - rho * np.sin(2 * phi)
    dlin = 3 * np.cos(phi) - drho * np.sin(2 * phi) - 2 * rho * np.cos(2 * phi)
    return r * drho / rho + (r + 1) * cot((r + 1) * phi) - dlin / lin


def curve_points(kind: str, r: int, phi):
    """Vectorized (x(phi), density(phi)) for phi strictly inside (0, pi/(r+1))."""
    _check_r(kind, r)
    return _curve(kind, r, phi)


def _param_point(kind: str, r: int, phi: float) -> ParamPoint:
    _check_r(kind, r)
    top = phi_max(r)
    if not 0 <= phi <= top:
        raise ValueError(f"phi={phi} outside [0, pi/{r + 1}]")
    if phi == 0:
        # the arcsine law (murr at r = 1) blows up at both ends
        rho = math.inf if (kind, r) == ("murr", 1) else 0.0
        return ParamPoint(0.0, right_edge(kind, r), rho, "right")
    if phi == top:
        return ParamPoint(top, 0.0, math.inf, "left")
    x, dens = _curve(kind, r, phi)
    return ParamPoint(float(phi), float(x), float(dens))


def density_fc(r: int, phi: float) -> ParamPoint:
    return _param_point("fc", r, phi)


def density_murr1(r: int, phi: float) -> ParamPoint:
    return _param_point("murr1", r, phi)


def density_murr(r: int, phi: float) -> ParamPoint:
    return _param_point("murr", r, phi)


def rho_r(r: int, phi: float) -> float:
    if r < 2:
        raise ValueError("rho_r needs r >= 2")
    if phi == 0:
        return c_r(r)
    if phi == phi_max(r):
        return 0.0
    if not 0 < phi < phi_max(r):
        raise ValueError(f"phi={phi} outside [0, pi/{r + 1}]")
    return float(_rho_r(r, np.float64(phi)))


# ---------------------------------------------------------------------------
# inversion and x-space evaluation
# ---------------------------------------------------------------------------


def invert_parameterization(kind: str, r: int, x, max_iter: int = 200):
    """phi with x(phi) = x, by bisection on the decreasing map. Vectorized."""
    _check_r(kind, r)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    edge = right_edge(kind, r)
    if np.any(~((xa > 0) & (xa < edge))):
        bad = xa[~((xa > 0) & (xa < edge))][0]
        raise OutOfSupportError(f"x={bad} outside (0, {edge})")
    lo = np.zeros_like(xa)
    hi = np.full_like(xa, phi_max(r))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        xm, _ = _curve(kind, r, np.where(active, mid, 0.5 * phi_max(r)))
        above = xm > xa  # still left of the target in x, move phi up
        lo = np.where(active & above, mid, lo)
        hi = np.where(active & ~above, mid, hi)
    phi = 0.5 * (lo + hi)
    return phi[0] if np.ndim(x) == 0 else phi


def density_at(kind: str, r: int, x):
    """Density of the curve at spectral points ``x`` (0 outside the support)."""
    _check_r(kind, r)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(xa)
    inside = (xa > 0) & (xa < right_edge(kind, r))
    if np.any(inside):
        phi = invert_parameterization(kind, r, xa[inside])
        _, out[inside] = _curve(kind, r, phi)
    return out[0] if np.ndim(x) == 0 else out


def edge_constants_murr(r: int) -> tuple[float, float]:
    """(left, right) with density ~ left * x^(-r/(r+1)) at 0 and
    density ~ right * sqrt(1 - x/x*) at the right edge x*."""
    if r < 2:
        raise ValueError("the right-edge constant needs r > 1")
    left = math.sin(math.pi / (r + 1)) / math.pi
    right = (2 ** (r + 2.5) / math.pi * r ** (r + 0.5)
             / ((r + 1) ** (r + 0.5) * (r - 1) ** 2))
    return left, right


# ---------------------------------------------------------------------------
# integrals along the curve: dx = x dlogx dphi
# ---------------------------------------------------------------------------


def _phi_integral(kind: str, r: int, weight, lo: float, hi: float, rel_tol: float):
    def f(phi):
        phi = np.real(phi)
        x, dens = _curve(kind, r, phi)
        return weight(x) * dens * x * -_dlogx(kind, r, phi)

    seg = Segment(lambda t: t, lambda t: np.ones(np.shape(t)), lo, hi)
    return float(np.real(adaptive_integrate(f, ComplexPath((seg,)), rel_tol=rel_tol, abs_tol=1e-16)))


def curve_moment(kind: str, r: int, k: int, rel_tol: float = 1e-12) -> float:
    """Integral of x^k density(x) dx over the support."""
    _check_r(kind, r)
    return _phi_integral(kind, r, lambda x: x**k, 0.0, phi_max(r), rel_tol)


def curve_mass(kind: str, r: int, rel_tol: float = 1e-12) -> float:
    return curve_moment(kind, r, 0, rel_tol)


def curve_cdf(kind: str, r: int, x, rel_tol: float = 1e-12):
    """Distribution function at ``x``: integral over (0, x) of the density."""
    _check_r(kind, r)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xa)
    edge = right_edge(kind, r)
    for i, xi in enumerate(xa):
        if xi <= 0:
            out[i] = 0.0
        elif xi >= edge:
            out[i] = 1.0
        else:
            phi = float(invert_parameterization(kind, r, xi))
            out[i] = _phi_integral(kind, r, lambda v: 1.0, phi, phi_max(r), rel_tol)
    return out[0] if np.ndim(x) == 0 else out

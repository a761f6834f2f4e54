"""Raney numbers, Jacobi polynomials at the origin, and moments of mu_{r,s}."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .product import ProductSpec


def _exact(v) -> Fraction | None:
    """Fraction for integer/rational input or floats that are multiples of 1/2."""
    if isinstance(v, Rational):
        return Fraction(v)
    f = float(v)
    if (2 * f).is_integer():
        return Fraction(f)
    return None


def gen_binomial(a, k: int):
    """Generalized binomial coefficient a(a-1)...(a-k+1)/k! (exact for rational ``a``)."""
    if k < 0:
        return 0
    out = Fraction(1) if isinstance(a, Fraction) else 1.0
    for j in range(k):
        out = out * (a - j) / (j + 1)
    return out


def raney_number(alpha, beta, k: int, exact: bool = False):
    """R_{alpha,beta}(k) = beta/(k alpha + beta) * binom(k alpha + beta, k)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return Fraction(1) if exact else 1.0
    a = float(alpha) * k + float(beta)
    if not a > k - 1:
        raise ValueError(f"Raney number undefined: k*alpha + beta = {a} <= k - 1")
    fa, fb = _exact(alpha), _exact(beta)
    if fa is not None and fb is not None:
        top = fa * k + fb
        val = fb / top * gen_binomial(top, k)
        return val if exact else float(val)
    if exact:
        raise ValueError("exact evaluation needs rational parameters")
    log_binom = math.lgamma(a + 1) - math.lgamma(k + 1) - math.lgamma(a - k + 1)
    return float(beta) / a * math.exp(log_binom)


def jacobi_at_zero(degree: int, a, b, exact: bool = False):
    """P_k^{(a,b)}(0) from the finite sum
    sum_m binom(k+a, m) binom(k+b, k-m) (-1/2)^(k-m) (1/2)^m.
    """
    k = int(degree)
    if k < 0:
        raise ValueError("degree must be nonnegative")
    if k == 0:
        return Fraction(1) if exact else 1.0
    fa, fb = _exact(a), _exact(b)
    if fa is not None and fb is not None:
        total = sum(
            gen_binomial(k + fa, m) * gen_binomial(k + fb, k - m) * (-1) ** (k - m)
            for m in range(k + 1)
        )
        val = total / 2**k
        return val if exact else float(val)
    if exact:
        raise ValueError("exact evaluation needs rational parameters")
    # The alternating sum loses about k bits to cancellation, which neither
    # floats nor log-space accumulation recover. A finite double is an exact
    # dyadic rational, so sum in Fractions and round once at the end.
    fa, fb = Fraction(float(a)), Fraction(float(b))
    total = sum(
        gen_binomial(k + fa, m) * gen_binomial(k + fb, k - m) * (-1) ** (k - m)
        for m in range(k + 1)
    )
    return float(total / 2**k)


def moment_murs(spec: ProductSpec, k: int, exact: bool = False):
    """k-th moment of mu_{r,s}: 1 for k = 0, else P_{k-1}^{(a, b)}(0) / (k 2^{ks})
    with a = r(k-1) + r + 1 and b = -(r+1-s)(k-1) - (r+2-s)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return Fraction(1) if exact else 1.0
    r, s = spec.r, spec.s
    j = k - 1
    a = r * j + r + 1
    b = -(r + 1 - s) * j - (r + 2 - s)
    val = jacobi_at_zero(j, a, b, exact=True) / (k * Fraction(2) ** (k * s))
    return val if exact else float(val)


def moment_sequence(spec: ProductSpec, kmax: int) -> list[float]:
    return [moment_murs(spec, k) for k in range(kmax + 1)]

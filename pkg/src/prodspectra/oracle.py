"""Independent density route: solve w^(r+1) - z (w-1)(w+1)^s = 0 directly.

The physical solution w(z) = z F(z) is the one analytic off [0, x*] with
w -> 1 at infinity. It is found at a large real anchor and continued by
predictor-corrector Newton steps along a path that stays off the cut; the
density is Im w_-(x) / (pi x), where w_-(x) is the boundary value from the
lower half-plane (it has positive imaginary part).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numkit import NumericalError, RealPoly, poly_roots
from .product import ProductSpec, SupportEdge

# relative angle of the continuation ray z = x (1 -/+ i THETA)
THETA = 1e-3
EPS_SCHEDULE = (1e-4, 1e-6, 1e-8)


@dataclass(frozen=True)
class BranchState:
    x: float
    w_minus: complex
    residual: float


class _Equation:
    """E(w, z) = w^(r+1) - z (w - 1)(w + 1)^s and its w-derivatives."""

    def __init__(self, spec: ProductSpec):
        self.r, self.s = spec.r, spec.s
        self.P = RealPoly.monomial(self.r + 1)
        Q = RealPoly((-1.0, 1.0))
        for _ in range(self.s):
            Q = Q * RealPoly((1.0, 1.0))
        self.Q = Q
        self.dP, self.dQ = self.P.derivative(), Q.derivative()
        self.ddP, self.ddQ = self.dP.derivative(), self.dQ.derivative()

    def poly(self, x: float) -> RealPoly:
        return self.P - self.Q * x

    def value(self, w, z):
        return self.P(w) - z * self.Q(w)

    def dw(self, w, z):
        return self.dP(w) - z * self.dQ(w)

    def scale(self, w, z):
        """Magnitude of the terms of E, for relative residuals."""
        a = abs(w)
        return a ** (self.r + 1) + abs(z) * (a + 1) ** (self.s + 1)

    def residual(self, w, z) -> float:
        return abs(self.value(w, z)) / self.scale(w, z)

    def newton(self, w, z, max_iter: int = 30, tol: float = 1e-15):
        """Newton iteration on E(., z); returns (w, iterations) or raises.

        Stops at a relative step below ``tol`` or when steps stop shrinking
        below 1e-11 relative (roundoff floor near ill-conditioned roots).
        """
        prev = math.inf
        for it in range(1, max_iter + 1):
            step = self.value(w, z) / self.dw(w, z)
            w = w - step
            size = abs(step)
            scale = max(abs(w), 1e-300)
            if size <= tol * scale or (size > 0.5 * prev and size <= 1e-11 * scale):
                return w, it
            prev = size
        raise NumericalError(f"Newton did not converge at z={z!r} (last step {abs(step):.3g})")


@lru_cache(maxsize=None)
def _equation(spec: ProductSpec) -> _Equation:
    return _Equation(spec)


def _real_roots_above_one(eq: _Equation, x: float, tol: float = 1e-9) -> np.ndarray:
    p = eq.poly(x)
    if p.degree < 1:
        return np.zeros(0)
    roots = poly_roots(p)
    real = roots[np.abs(roots.imag) <= tol * np.maximum(1.0, np.abs(roots))].real
    return np.sort(real[real > 1.0])


@lru_cache(maxsize=None)
def edge_search(spec: ProductSpec) -> SupportEdge:
    """Right edge x* where the physical root meets a second real root.

    For real x, E has a real root in (1, inf) exactly when x >= x*. The
    threshold is bracketed and bisected on that predicate, then refined by
    Newton on the double-root system E = E_w = 0 in (w, x).
    """
    eq = _equation(spec)

    def has_root(x):
        return _real_roots_above_one(eq, x).size > 0

    hi = 1.0
    while not has_root(hi):
        hi *= 2.0
        if hi > 1e12:
            raise NumericalError("no real root above 1 found; cannot bracket the edge")
    lo = hi / 2.0
    while has_root(lo):
        lo /= 2.0
        if lo < 1e-12:
            raise NumericalError("real roots above 1 persist as x -> 0")
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if has_root(mid):
            hi = mid
        else:
            lo = mid
    if eq.P.degree == eq.Q.degree:
        # leading coefficient of E vanishes at x = lead P / lead Q: a root escapes to infinity
        x_inf = eq.P.lead / eq.Q.lead
        if lo * (1 - 1e-9) <= x_inf <= hi * (1 + 1e-9):
            return SupportEdge(math.inf, x_inf)
    roots = _real_roots_above_one(eq, hi)
    w = float(roots[0]) if roots.size > 1 else float(np.mean(roots))
    x = hi
    for _ in range(50):
        f1 = eq.value(w, x)
        f2 = eq.dw(w, x)
        j11, j12 = f2, -eq.Q(w)
        j21, j22 = eq.ddP(w) - x * eq.ddQ(w), -eq.dQ(w)
        det = j11 * j22 - j12 * j21
        dw = (f1 * j22 - f2 * j12) / det
        dx = (j11 * f2 - j21 * f1) / det
        w, x = w - dw, x - dx
        if abs(dw) <= 1e-16 * abs(w) and abs(dx) <= 1e-16 * abs(x):
            break
    if not (lo * (1 - 1e-6) <= x <= hi * (1 + 1e-6)) or not w > 1:
        raise NumericalError(f"double-root refinement left the bracket: x={x}, w={w}")
    return SupportEdge(float(w), float(x))


def _anchor(eq: _Equation, x0: float) -> float:
    roots = np.sort_complex(poly_roots(eq.poly(x0)))
    real = _real_roots_above_one(eq, x0)
    if real.size == 0:
        raise NumericalError(f"no real root above 1 at the anchor x={x0}")
    w0 = float(real[0])
    others = roots[np.abs(roots - w0) > 1e-12 * w0]
    sep = float(np.min(np.abs(others - w0))) if others.size else math.inf
    if sep < 0.1:
        raise NumericalError(f"anchor root not isolated (separation {sep:.3g})")
    return w0


class _Tracker:
    """Predictor-corrector continuation of one root along a path z(tau)."""

    def __init__(self, eq: _Equation, w: complex, z: complex):
        self.eq, self.w, self.z = eq, complex(w), complex(z)

    def move_to(self, z_target: complex, max_steps: int = 100_000):
        eq = self.eq
        h = 1.0
        remaining = 1.0
        z_start = self.z
        steps = 0
        while remaining > 0:
            steps += 1
            if steps > max_steps:
                raise NumericalError(f"continuation stalled between {z_start!r} and {z_target!r}")
            h = min(h, remaining)
            dz = (z_target - z_start) * h
            z_new = self.z + dz
            # dw/dz = Q(w) / E_w(w, z)
            pred = self.w + dz * eq.Q(self.w) / eq.dw(self.w, self.z)
            if abs(pred - self.w) > 0.1 * abs(self.w):
                # large relative moves can land on a mirror root (w and -w for s = r = 1)
                h *= 0.5
                if h < 1e-14:
                    raise NumericalError(f"step size underflow near z={self.z!r}")
                continue
            try:
                w_new, its = eq.newton(pred, z_new, max_iter=8)
            except (NumericalError, ZeroDivisionError, FloatingPointError):
                h *= 0.5
                if h < 1e-14:
                    raise NumericalError(f"step size underflow near z={self.z!r}")
                continue
            predicted = abs(pred - self.w)
            if abs(w_new - pred) > 0.1 * predicted + 1e-13 * abs(w_new) or its > 5:
                h *= 0.5
                if h < 1e-14:
                    raise NumericalError(f"step size underflow near z={self.z!r}")
                continue
            self.w, self.z = w_new, z_new
            remaining = max(0.0, remaining - h)
            h *= 1.5
        return self.w


def _descend(eq: _Equation, w: complex, x: float, height: float, sign: float, d: float):
    """From z = x + sign*i*height move vertically toward the axis and return w at z = x."""
    tr = _Tracker(eq, w, complex(x, sign * height))
    vals = []
    for e in EPS_SCHEDULE:
        eps = e * d
        if eps < height:
            vals.append((eps, tr.move_to(complex(x, sign * eps))))
    (e1, w1), (e2, w2) = vals[-2], vals[-1]
    guess = w2 + (w2 - w1) * e2 / (e1 - e2)
    w0, _ = eq.newton(guess, complex(x, 0.0))
    return w0, tr


def trace_branch(spec: ProductSpec, x_grid, side: str = "minus") -> list:
    """Boundary values of the physical root on the cut at each point of a descending grid.

    ``side="minus"`` approaches the axis from below (Im w > 0); ``"plus"`` from above.
    """
    if side not in ("minus", "plus"):
        raise ValueError("side must be 'minus' or 'plus'")
    sign = -1.0 if side == "minus" else 1.0
    xs = [float(v) for v in x_grid]
    if any(b >= a for a, b in zip(xs, xs[1:])):
        raise ValueError("x_grid must be strictly descending")
    eq = _equation(spec)
    edge = edge_search(spec)
    x_star = edge.x_star
    if xs and not (0 < xs[-1] and xs[0] < x_star):
        raise ValueError(f"grid must lie inside (0, {x_star})")
    x0 = 10.0 * x_star
    tr = _Tracker(eq, _anchor(eq, x0), complex(x0, 0.0))
    tr.move_to(complex(x0, sign * THETA * x0))
    out = []
    for x in xs:
        tr.move_to(complex(x, sign * THETA * x))
        d = min(x, x_star - x)
        w, _ = _descend(eq, tr.w, x, THETA * x, sign, d)
        if sign * -w.imag <= 0:
            raise NumericalError(f"boundary value at x={x} has the wrong half-plane: {w!r}")
        out.append(BranchState(x, w, eq.residual(w, x)))
    return out


def density_oracle_grid(spec: ProductSpec, xs) -> np.ndarray:
    """Im w_-(x) / (pi x) at arbitrary points; 0 outside (0, x*)."""
    xs = np.asarray(xs, dtype=float)
    out = np.zeros(xs.shape)
    x_star = edge_search(spec).x_star
    inside = (xs > 0) & (xs < x_star)
    pts = np.unique(xs[inside])[::-1]
    if pts.size:
        states = trace_branch(spec, pts)
        lookup = {s.x: s.w_minus.imag / (math.pi * s.x) for s in states}
        out[inside] = [lookup[float(v)] for v in xs[inside]]
    return out


def density_oracle(spec: ProductSpec, x: float) -> float:
    return float(density_oracle_grid(spec, [x])[0])


def physical_w(spec: ProductSpec, z: complex) -> complex:
    """w(z) = z F(z) off the cut, continued from the anchor along an arc then a radius."""
    z = complex(z)
    eq = _equation(spec)
    x_star = edge_search(spec).x_star
    if z.imag == 0 and 0 <= z.real <= x_star:
        raise ValueError("z lies on the branch cut")
    radius = 10.0 * x_star
    tr = _Tracker(eq, _anchor(eq, radius), complex(radius, 0.0))
    ang = math.atan2(z.imag, z.real)
    n_arc = max(1, int(abs(ang) / 0.05))
    for k in range(1, n_arc + 1):
        tr.move_to(radius * complex(math.cos(ang * k / n_arc), math.sin(ang * k / n_arc)))
    tr.move_to(z)
    return tr.w

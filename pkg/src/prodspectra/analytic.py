"""Method dispatch, evaluation grids, moments and model CDFs for mu_{r,s}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import closed_form, murs, oracle
from .product import ProductSpec

METHODS = ("auto", "closed", "contour", "oracle")


class MethodError(ValueError):
    """Requested method does not apply to this (r, s)."""


def closed_curve(spec: ProductSpec) -> str | None:
    if spec.s == 0:
        return "fc"
    if spec.s == spec.r:
        return "murr"
    if spec.s == spec.r - 1:
        return "murr1"
    return None


def resolve_method(spec: ProductSpec, method: str = "auto") -> str:
    if method not in METHODS:
        raise MethodError(f"unknown method {method!r}")
    if method == "auto":
        return "closed" if closed_curve(spec) else "contour"
    if method == "closed" and closed_curve(spec) is None:
        raise MethodError(f"no closed form for (r, s) = ({spec.r}, {spec.s}); s must be 0, r-1 or r")
    if method == "contour" and spec.r < spec.s + 2:
        raise MethodError(f"the contour method needs r >= s + 2, got (r, s) = ({spec.r}, {spec.s})")
    return method


def support_edge(spec: ProductSpec, method: str = "auto") -> float:
    m = resolve_method(spec, method)
    if m == "closed":
        return closed_form.right_edge(closed_curve(spec), spec.r)
    if m == "contour":
        return murs.support_edge_closed(spec).x_star
    return oracle.edge_search(spec).x_star


def left_exponent(spec: ProductSpec) -> float:
    """density ~ const * x^(-left_exponent) as x -> 0+."""
    return spec.r / (spec.r + 1)


def density(spec: ProductSpec, x, method: str = "auto"):
    m = resolve_method(spec, method)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if m == "closed":
        out = closed_form.density_at(closed_curve(spec), spec.r, xa)
    elif m == "contour":
        out = np.array([murs.density_murs(spec, float(v)) for v in xa])
    else:
        out = oracle.density_oracle_grid(spec, xa)
    return out[0] if np.ndim(x) == 0 else out


def density_grid(x_star: float, points: int) -> np.ndarray:
    """Ascending grid in (0, x*): 80% uniform interior, 10% geometric toward each edge."""
    if points < 10:
        raise ValueError("need at least 10 points")
    n_edge = max(1, points // 10)
    n_mid = points - 2 * n_edge
    a, b = 0.05 * x_star, 0.95 * x_star
    mid = np.linspace(a, b, n_mid)
    left = a * np.geomspace(1e-6, 1.0, n_edge + 1)[:-1]
    right = x_star - (x_star - b) * np.geomspace(1.0, 1e-6, n_edge + 1)[1:]
    return np.concatenate([left, mid, right])


# ---------------------------------------------------------------------------
# edge-aware quadrature: x = x* (1 - (1 - v)^2)^ell on v in [0, 1]
# ---------------------------------------------------------------------------


def _x_of_v(v, x_star, ell):
    return x_star * (1.0 - (1.0 - v) ** 2) ** ell


def _dx_dv(v, x_star, ell):
    y = 1.0 - (1.0 - v) ** 2
    return x_star * ell * y ** (ell - 1) * 2.0 * (1.0 - v)


def _v_of_x(x, x_star, ell):
    y = np.clip(np.asarray(x, dtype=float) / x_star, 0.0, 1.0) ** (1.0 / ell)
    return 1.0 - np.sqrt(1.0 - y)


def _gl_panels(panels: int, order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = np.diff(edges)
    v = (edges[:-1, None] + 0.5 * h[:, None] * (nodes[None, :] + 1.0))
    w = 0.5 * h[:, None] * weights[None, :]
    return edges, v, w


def integrate_moments(spec: ProductSpec, kmax: int, method: str = "auto",
                      panels: int = 4, order: int = 16) -> np.ndarray:
    """Integrals of x^k density over the support for k = 0..kmax."""
    x_star = support_edge(spec, method)
    ell = spec.r + 1
    _, v, w = _gl_panels(panels, order)
    v, w = v.ravel(), w.ravel()
    x = _x_of_v(v, x_star, ell)
    base = density(spec, x, method) * _dx_dv(v, x_star, ell) * w
    return np.array([np.sum(base * x**k) for k in range(kmax + 1)])


@dataclass
class ModelCDF:
    """Distribution function tabulated on panel edges in the edge-aware variable,
    with cubic Hermite interpolation between edges (exact slopes from the density)."""

    spec: ProductSpec
    x_star: float
    ell: int
    v_edges: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    method: str = field(default="auto")

    @property
    def total(self) -> float:
        return float(self.values[-1])

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        v = _v_of_x(xa, self.x_star, self.ell)
        i = np.clip(np.searchsorted(self.v_edges, v, side="right") - 1, 0, len(self.v_edges) - 2)
        v0, v1 = self.v_edges[i], self.v_edges[i + 1]
        h = v1 - v0
        t = (v - v0) / h
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        out = (h00 * self.values[i] + h10 * h * self.slopes[i]
               + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1])
        out = np.where(xa <= 0, 0.0, np.where(xa >= self.x_star, 1.0, np.clip(out, 0.0, 1.0)))
        return out[()] if out.ndim == 0 else out


def model_cdf(spec: ProductSpec, method: str = "auto", panels: int = 48, order: int = 8) -> ModelCDF:
    x_star = support_edge(spec, method)
    ell = spec.r + 1
    edges, v, w = _gl_panels(panels, order)
    x = _x_of_v(v.ravel(), x_star, ell)
    h = (density(spec, x, method) * _dx_dv(v.ravel(), x_star, ell)).reshape(v.shape)
    cum = np.concatenate([[0.0], np.cumsum((h * w).sum(axis=1))])
    # slope dF/dv = density(x(v)) x'(v); finite at both ends by construction of the map
    inner = edges[1:-1]
    xs_inner = _x_of_v(inner, x_star, ell)
    slopes_inner = density(spec, xs_inner, method) * _dx_dv(inner, x_star, ell)
    slopes = np.concatenate([[_end_slope(h[0], v[0])], slopes_inner, [_end_slope(h[-1], v[-1])]])
    return ModelCDF(spec, x_star, ell, edges, cum, slopes, method)


def _end_slope(hvals, vnodes):
    """Value at the panel end by polynomial extrapolation from the Gauss nodes."""
    target = 0.0 if vnodes[0] < 0.5 else 1.0
    coef = np.polynomial.polynomial.polyfit(vnodes - target, hvals, len(vnodes) - 1)
    return float(coef[0])

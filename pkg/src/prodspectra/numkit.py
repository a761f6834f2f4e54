"""Numerical kernels shared by the density, oracle and sampling modules.

Real polynomials, simultaneous (Aberth-Ehrlich) root finding, adaptive
Gauss-Kronrod quadrature along parameterized complex paths, continuous
phase lifting, and a Householder + implicit-QL Hermitian eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit


class NumericalError(RuntimeError):
    """Base class for kernel failures that carry diagnostics."""


class RootFindingError(NumericalError):
    def __init__(self, message: str, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


class QuadratureError(NumericalError):
    def __init__(self, message: str, worst=None):
        super().__init__(message)
        self.worst = worst or []


class PhaseJumpError(NumericalError):
    """Raised when consecutive samples are too far apart in argument to lift."""

    def __init__(self, index: int, jump: float):
        super().__init__(
            f"phase jump of {jump:.3f} rad between samples {index} and {index + 1}; refine sampling"
        )
        self.index = index
        self.jump = jump


class EigensolverError(NumericalError):
    pass


# ---------------------------------------------------------------------------
# Real polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealPoly:
    """Real polynomial with coefficients in ascending degree order."""

    coeffs: tuple

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            c = [0.0]
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def monomial(cls, n: int, scale: float = 1.0) -> "RealPoly":
        return cls((0.0,) * n + (scale,))

    @classmethod
    def from_roots(cls, roots: Sequence[float], scale: float = 1.0) -> "RealPoly":
        p = cls((scale,))
        for r in roots:
            p = p * cls((-float(r), 1.0))
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    @property
    def lead(self) -> float:
        return self.coeffs[-1]

    @property
    def origin_order(self) -> int:
        """Multiplicity of the root at zero."""
        if self.is_zero:
            raise ValueError("zero polynomial has no finite root order")
        k = 0
        while self.coeffs[k] == 0.0:
            k += 1
        return k

    def deflate_origin(self) -> "RealPoly":
        return RealPoly(self.coeffs[self.origin_order:])

    def __call__(self, z):
        z = np.asarray(z)
        acc = np.full(z.shape, self.coeffs[-1], dtype=np.result_type(z, float))
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc if acc.ndim else acc[()]

    def derivative(self) -> "RealPoly":
        if self.degree == 0:
            return RealPoly((0.0,))
        return RealPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def _as_poly(self, other) -> "RealPoly":
        return other if isinstance(other, RealPoly) else RealPoly((float(other),))

    def __add__(self, other):
        other = self._as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0.0,) * (n - len(self.coeffs))
        b = other.coeffs + (0.0,) * (n - len(other.coeffs))
        return RealPoly(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return RealPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-self._as_poly(other))

    def __mul__(self, other):
        if not isinstance(other, RealPoly):
            return RealPoly(tuple(c * float(other) for c in self.coeffs))
        return RealPoly(tuple(np.convolve(self.coeffs, other.coeffs)))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"RealPoly({list(self.coeffs)})"


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def _horner_with_derivative(c_desc: np.ndarray, z: np.ndarray):
    p = np.full(z.shape, c_desc[0], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    for c in c_desc[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def poly_roots(p: RealPoly, tol: float = 1e-10, max_sweeps: int = 500, seed: int = 0) -> np.ndarray:
    """All complex roots of ``p`` with multiplicity (Aberth-Ehrlich iteration).

    Exact zeros at the origin are deflated first. Remaining roots start on a
    randomly perturbed circle and are refined by simultaneous Aberth sweeps,
    then polished by Newton steps.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    k0 = p.origin_order
    q = p.deflate_origin()
    zeros = np.zeros(k0, dtype=complex)
    if q.degree == 0:
        return zeros
    c_desc = np.array(q.coeffs[::-1], dtype=float) / q.lead
    n = q.degree
    if n == 1:
        roots = np.array([-c_desc[1] + 0j])
    else:
        roots = _aberth(c_desc, n, max_sweeps, seed)
    roots = _symmetrize_conjugates(roots)

    scale = max(abs(c) for c in p.coeffs)
    all_roots = np.concatenate([zeros, roots])
    resid = np.abs(p(all_roots))
    bound = tol * scale * np.maximum(1.0, np.abs(all_roots)) ** p.degree
    if not np.all(resid <= bound):
        raise RootFindingError(
            f"root residuals above tolerance for {p!r}", roots=all_roots, residuals=resid
        )
    order = np.lexsort((all_roots.imag, all_roots.real))
    return all_roots[order]


def _aberth(c_desc: np.ndarray, n: int, max_sweeps: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    # radius from the geometric mean of root magnitudes, capped by the Cauchy bound
    cauchy = 1.0 + np.max(np.abs(c_desc[1:]))
    radius = min(abs(c_desc[-1]) ** (1.0 / n), cauchy) if c_desc[-1] != 0 else 1.0
    radius = max(radius, 1e-3 * cauchy)
    angles = 2 * np.pi * np.arange(n) / n + 0.4 + 0.1 * rng.standard_normal(n)
    z = radius * (1 + 0.05 * rng.standard_normal(n)) * np.exp(1j * angles)

    for _ in range(max_sweeps):
        pv, dpv = _horner_with_derivative(c_desc, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        if np.any(diff == 0):
            z = z + 1e-8 * radius * rng.standard_normal(n)
            continue
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pv / dpv
            delta = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(delta)
        if np.any(bad):
            delta[bad] = 1e-6 * radius * rng.standard_normal(int(bad.sum()))
        z = z - delta
        if np.all(np.abs(delta) <= 4 * np.finfo(float).eps * np.maximum(np.abs(z), 1e-300)):
            break
        # backward-error stop: residual at rounding level (multiple roots converge slowly)
        pv, _ = _horner_with_derivative(c_desc, z)
        env, _ = _horner_with_derivative(np.abs(c_desc), np.abs(z).astype(complex))
        if np.all(np.abs(pv) <= 16 * np.finfo(float).eps * env.real):
            break
    # Newton polish; keeps the root when a step would not reduce the residual
    for _ in range(3):
        pv, dpv = _horner_with_derivative(c_desc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dpv != 0, pv / dpv, 0)
        cand = z - step
        pc, _ = _horner_with_derivative(c_desc, cand)
        z = np.where(np.abs(pc) < np.abs(pv), cand, z)
    return z


def _symmetrize_conjugates(z: np.ndarray) -> np.ndarray:
    """Snap near-real roots to the axis and pair the rest as exact conjugates."""
    z = z.copy()
    mag = np.maximum(np.abs(z), 1e-300)
    near_real = np.abs(z.imag) <= 1e-10 * mag
    z[near_real] = z[near_real].real
    upper = [i for i in range(len(z)) if z[i].imag > 0]
    lower = [i for i in range(len(z)) if z[i].imag < 0]
    if len(upper) != len(lower):
        return z
    used = set()
    for i in upper:
        best = min((j for j in lower if j not in used), key=lambda j: abs(z[j] - np.conj(z[i])))
        used.add(best)
        avg = 0.5 * (z[i] + np.conj(z[best]))
        z[i], z[best] = avg, np.conj(avg)
    return z


# ---------------------------------------------------------------------------
# Paths and adaptive quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """One parameterized piece ``t -> z(t)`` of a complex path.

    ``end`` may be ``math.inf``; infinite pieces require ``decay``, the exponent
    p with |f(z(t)) z'(t)| ~ t**-p, used to bound the truncated tail.
    ``singular_start`` declares an integrable (e.g. logarithmic) endpoint
    singularity at ``start``. ``reverse`` traverses the piece from end to start.
    """

    point: Callable
    deriv: Callable
    start: float
    end: float
    singular_start: bool = False
    decay: float | None = None
    reverse: bool = False

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError("segment needs end > start")
        if math.isinf(self.end) and (self.decay is None or self.decay <= 1):
            raise ValueError("infinite segment needs a decay exponent > 1")

    def reversed(self) -> "Segment":
        return Segment(self.point, self.deriv, self.start, self.end,
                       self.singular_start, self.decay, not self.reverse)


@dataclass(frozen=True)
class ComplexPath:
    segments: tuple = field(default_factory=tuple)

    def __add__(self, other: "ComplexPath") -> "ComplexPath":
        return ComplexPath(self.segments + other.segments)

    def reversed(self) -> "ComplexPath":
        return ComplexPath(tuple(s.reversed() for s in reversed(self.segments)))


def ray(angle: float, *, inward: bool = False, singular_origin: bool = False,
        decay: float | None = None) -> ComplexPath:
    """The ray {u e^{i angle}, u > 0}, outward unless ``inward``."""
    e = complex(math.cos(angle), math.sin(angle))
    seg = Segment(lambda u: u * e, lambda u: np.full(np.shape(u), e), 0.0, math.inf,
                  singular_start=singular_origin, decay=decay, reverse=inward)
    return ComplexPath((seg,))


def segment(a: complex, b: complex) -> ComplexPath:
    d = complex(b) - complex(a)
    return ComplexPath((Segment(lambda t: a + t * d, lambda t: np.full(np.shape(t), d), 0.0, 1.0),))


def sector_contour(alpha: float, decay: float | None = None) -> ComplexPath:
    """Inward ray at angle ``alpha`` into the origin, then out along the positive reals."""
    return (ray(alpha, inward=True, singular_origin=True, decay=decay)
            + ray(0.0, singular_origin=True, decay=decay))


# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_wg_half = np.zeros(8)
_wg_half[1::2] = _WG
_WGAUSS = np.concatenate([_wg_half[:-1], _wg_half[::-1]])


@dataclass
class _Piece:
    """Finite reparameterization s -> t of (part of) a segment."""

    seg: Segment
    kind: str  # "lin", "sq" (t = a + s^2), "exp" (t = c - 1 + e^s)
    origin: float

    def t_and_jac(self, s):
        if self.kind == "lin":
            return s, np.ones_like(s)
        if self.kind == "sq":
            return self.origin + s * s, 2.0 * s
        es = np.exp(s)
        return self.origin - 1.0 + es, es


def _pieces_for(seg: Segment, t_far: float):
    """Split a segment into finite pieces; returns (pieces, intervals, tail_piece)."""
    out = []
    a, b = seg.start, seg.end
    finite_end = b if math.isfinite(b) else None
    if seg.singular_start:
        stop = finite_end if finite_end is not None else a + 1.0
        out.append((_Piece(seg, "sq", a), 0.0, math.sqrt(stop - a)))
        c = stop
    else:
        c = a
    tail = None
    if finite_end is None:
        piece = _Piece(seg, "exp", c)
        out.append((piece, 0.0, math.log(max(t_far, c + 1.0) - c + 1.0)))
        tail = piece
    elif not seg.singular_start:
        out.append((_Piece(seg, "lin", a), a, b))
    return out, tail


def adaptive_integrate(f: Callable, path: ComplexPath, rel_tol: float = 1e-9,
                       abs_tol: float = 1e-14, max_intervals: int = 5000,
                       tail_correction: bool = True, initial_splits: int = 4):
    """Integrate ``f(z) dz`` along ``path`` with globally adaptive G7/K15.

    ``f`` maps an array of complex points to values of the same trailing shape;
    it may return extra leading axes for vector-valued integrands, in which
    case each component is controlled separately. Returns a complex scalar or
    an array of the leading shape.
    """
    intervals = []  # (piece, s0, s1)
    tails = []  # (piece, current far end in s)
    for seg in path.segments:
        t_far = max(1e4, 10.0 * abs(seg.start) + 1e4)
        pieces, tail = _pieces_for(seg, t_far)
        for piece, s0, s1 in pieces:
            edges = np.linspace(s0, s1, initial_splits + 1)
            intervals.extend((piece, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
            if piece is tail:
                tails.append([piece, s1])

    def integrand_s(piece: _Piece, s):
        t, jac = piece.t_and_jac(s)
        seg = piece.seg
        v = np.asarray(f(seg.point(t))) * seg.deriv(t) * jac
        return -v if seg.reverse else v

    def evaluate(batch):
        ks, errs = [], []
        for piece, lo, hi in batch:
            c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
            vals = integrand_s(piece, c + h * _NODES)
            k = (vals * _WK).sum(-1) * h
            g = (vals * _WGAUSS).sum(-1) * h
            ks.append(k)
            errs.append(np.abs(k - g))
        return ks, errs

    ks, errs = evaluate(intervals)
    while True:
        K = np.array(ks)  # (n, *shape)
        E = np.array(errs)
        total = K.sum(axis=0)
        tol = np.maximum(rel_tol * np.abs(total), abs_tol)
        err_tot = E.sum(axis=0)

        # grow truncated tails until the analytic bound is far below tolerance
        grew = False
        for entry in tails:
            piece, s_end = entry
            seg = piece.seg
            t_end, _ = piece.t_and_jac(np.array([s_end]))
            g_end = np.abs(np.asarray(f(seg.point(t_end))) * seg.deriv(t_end))[..., 0]
            bound = g_end * t_end[0] / (seg.decay - 1.0)
            if np.any(bound > 0.1 * tol):
                ratio = float(np.max(bound / (0.1 * tol)))
                t_new = t_end[0] * max(10.0, 2.0 * ratio ** (1.0 / (seg.decay - 1.0)))
                if t_new > 1e200:
                    raise QuadratureError("tail truncation radius overflow",
                                          worst=[(seg, t_end[0], bound)])
                s_new = math.log(t_new - piece.origin + 1.0)
                new = [(piece, lo, hi) for lo, hi in
                       zip(np.linspace(s_end, s_new, 5)[:-1], np.linspace(s_end, s_new, 5)[1:])]
                nk, ne = evaluate(new)
                intervals.extend(new)
                ks.extend(nk)
                errs.extend(ne)
                entry[1] = s_new
                grew = True
        if grew:
            continue

        if np.all(err_tot <= tol):
            break
        score = E / tol
        score = score.reshape(len(intervals), -1).max(axis=1)
        n = len(intervals)
        chosen = [i for i in np.argsort(-score) if score[i] > 1.0 / n]
        splittable = [i for i in chosen
                      if intervals[i][2] - intervals[i][1] > 1e-14 * (1.0 + abs(intervals[i][1]))]
        if not splittable:
            break  # roundoff floor reached
        if n + len(splittable) > max_intervals:
            worst = [(intervals[i][1], intervals[i][2], float(score[i])) for i in chosen[:5]]
            raise QuadratureError(
                f"subdivision budget of {max_intervals} exhausted (error {np.max(err_tot / tol):.3g} x tolerance)",
                worst=worst)
        new = []
        for i in splittable:
            piece, lo, hi = intervals[i]
            mid = 0.5 * (lo + hi)
            new.extend([(piece, lo, mid), (piece, mid, hi)])
        drop = set(splittable)
        keep = [i for i in range(n) if i not in drop]
        nk, ne = evaluate(new)
        intervals = [intervals[i] for i in keep] + new
        ks = [ks[i] for i in keep] + nk
        errs = [errs[i] for i in keep] + ne

    total = np.array(ks).sum(axis=0)
    if tail_correction:
        for piece, s_end in tails:
            seg = piece.seg
            t_end, _ = piece.t_and_jac(np.array([s_end]))
            g_end = (np.asarray(f(seg.point(t_end))) * seg.deriv(t_end))[..., 0]
            corr = g_end * t_end[0] / (seg.decay - 1.0)
            total = total - corr if seg.reverse else total + corr
    return total[()] if np.ndim(total) == 0 else total


# ---------------------------------------------------------------------------
# Phase lifting
# ---------------------------------------------------------------------------


def unwrap_phase(samples, max_step: float = math.pi) -> np.ndarray:
    """Continuous lift of the arguments of nonzero complex ``samples``.

    The first argument is principal. Raises :class:`PhaseJumpError` when two
    consecutive samples differ in (principal) argument by ``max_step`` or more,
    which asks the caller to sample more densely.
    """
    z = np.asarray(samples, dtype=complex)
    if z.size == 0:
        return np.zeros(0)
    if np.any(z == 0):
        raise ValueError("unwrap_phase needs nonzero samples")
    steps = np.angle(z[1:] / z[:-1])
    big = np.nonzero(np.abs(steps) >= max_step)[0]
    if big.size:
        i = int(big[0])
        raise PhaseJumpError(i, float(steps[i]))
    out = np.empty(z.size)
    out[0] = np.angle(z[0])
    out[1:] = out[0] + np.cumsum(steps)
    return out


# ---------------------------------------------------------------------------
# Hermitian eigenvalues
# ---------------------------------------------------------------------------


def _tridiagonalize(a: np.ndarray):
    """Householder reduction of a Hermitian matrix to real symmetric tridiagonal form."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        alpha = -phase * norm_x
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        kk = np.vdot(v, p).real
        q = p - kk * v
        sub -= 2.0 * (np.outer(v, q.conj()) + np.outer(q, v.conj()))
        a[k + 1, k] = alpha
        a[k, k + 1] = np.conj(alpha)
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
    d = a.diagonal().real.copy()
    # e[i] couples rows i-1 and i; e[0] unused
    e = np.zeros(n)
    e[1:] = np.abs(np.diagonal(a, -1))
    return d, e


@njit(cache=True)
def _tql_eigenvalues(d, e, maxit):
    """Implicit-shift QL on a symmetric tridiagonal matrix; returns status code."""
    n = d.shape[0]
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    eps = 2.220446049250313e-16
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == maxit:
                return l + 1
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(np.max(np.abs(m)), 1e-300) if m.size else 1.0
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol * scale)


def hermitian_eigenvalues(m, tol: float = 1e-12, maxit: int = 60) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (Householder + implicit QL)."""
    m = np.asarray(m)
    if not is_hermitian(m, tol):
        raise ValueError("hermitian_eigenvalues: input is not Hermitian within tolerance")
    n = m.shape[0]
    if n == 1:
        return np.array([float(np.real(m[0, 0]))])
    a = 0.5 * (m + m.conj().T)
    d, e = _tridiagonalize(a)
    status = _tql_eigenvalues(d, e, maxit)
    if status:
        raise EigensolverError(f"QL iteration did not converge for eigenvalue {status - 1}")
    return np.sort(d)

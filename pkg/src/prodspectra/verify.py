"""Cross-checks between the independent density routes for one (r, s)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analytic, contour, murs, oracle
from .moments import moment_sequence
from .product import ProductSpec

LEFT_POINTS = (1e-4, 1e-6, 1e-8)
RIGHT_POINTS = (1e-2, 1e-3, 1e-4)


@dataclass
class Verdict:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass
class RunReport:
    command: str
    config: dict
    verdicts: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def add(self, name, measured, tolerance, detail="", passed=None):
        measured = float(measured)
        ok = bool(measured <= tolerance) if passed is None else bool(passed)
        self.verdicts.append(Verdict(name, ok, measured, float(tolerance), detail))

    def to_dict(self) -> dict:
        return {"schema": 1, "command": self.command, "config": self.config,
                "passed": self.passed, "verdicts": [asdict(v) for v in self.verdicts],
                "outputs": self.outputs}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.config.items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "passed", "measured", "tolerance", "detail"])
        for v in self.verdicts:
            w.writerow([v.name, "pass" if v.passed else "FAIL", f"{v.measured:.17g}",
                        f"{v.tolerance:.17g}", v.detail])
        return buf.getvalue()


def interior_grid(x_star: float, points: int = 50) -> np.ndarray:
    return x_star * np.arange(1, points + 1) / (points + 1)


def left_law_ratios(spec: ProductSpec, method: str = "auto", fractions=LEFT_POINTS):
    x_star = analytic.support_edge(spec, method)
    xs = np.array(fractions) * x_star
    rho = analytic.density(spec, xs, method)
    return xs, xs ** analytic.left_exponent(spec) * rho


def extrapolate_left(xs, ratios, r: int) -> float:
    """Value at x = 0 of the quadratic in t = x^(1/(r+1)) through the three points."""
    t = np.asarray(xs, dtype=float) ** (1.0 / (r + 1))
    coef = np.polyfit(t, np.asarray(ratios, dtype=float), len(t) - 1)
    return float(coef[-1])


def right_law_ratios(spec: ProductSpec, method: str = "auto", fractions=RIGHT_POINTS):
    x_star = analytic.support_edge(spec, method)
    d = np.array(fractions) * x_star
    rho = analytic.density(spec, x_star - d, method)
    return d, rho / np.sqrt(d)


def spread(values) -> float:
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / abs(v).min())


def run_verify(spec: ProductSpec, points: int = 50) -> RunReport:
    rep = RunReport("verify", spec.as_dict())
    method = analytic.resolve_method(spec)
    closed = method == "closed"
    x_star = analytic.support_edge(spec)

    edge = oracle.edge_search(spec)
    rep.add("support edge: analytic vs branch search", abs(edge.x_star - x_star) / x_star, 1e-10,
            f"analytic {x_star:.17g}, searched {edge.x_star:.17g}")
    if spec.r >= spec.s + 2:
        general = contour.support_edge_general(murs.build_problem(spec))
        closed_edge = murs.support_edge_closed(spec)
        rep.add("support edge: closed vs minimized P/Q",
                abs(general.x_star - closed_edge.x_star) / closed_edge.x_star, 1e-10,
                f"w* {closed_edge.w_star:.17g}")

    xs = interior_grid(x_star, points)
    primary = analytic.density(spec, xs)
    if spec.s == 0 and spec.r >= 2:
        other = analytic.density(spec, xs, "contour")
        rep.add("density: closed form vs contour", np.max(np.abs(primary - other)), 1e-6,
                f"sup over {points} interior points")
    orc = oracle.density_oracle_grid(spec, xs)
    tol = 1e-8 if closed else 1e-6
    rep.add(f"density: {method} vs Stieltjes oracle", np.max(np.abs(primary - orc)), tol,
            f"sup over {points} interior points")

    m_int = analytic.integrate_moments(spec, 6)
    m_ref = np.array(moment_sequence(spec, 6))
    rep.add("mass", abs(m_int[0] - 1.0), 1e-8 if closed else 1e-6)
    rep.add("moments k<=6 vs Jacobi formula", np.max(np.abs(m_int / m_ref - 1.0)), 1e-5,
            "max relative error")

    lx, lr = left_law_ratios(spec)
    limit = extrapolate_left(lx, lr, spec.r)
    predicted = math.sin(math.pi / (spec.r + 1)) / math.pi
    rep.add("left edge: extrapolated x^(r/(r+1)) density vs sin(pi/(r+1))/pi",
            abs(limit / predicted - 1.0), 0.02,
            "ratios " + ", ".join(f"{v:.6g}" for v in lr) + f"; spread {spread(lr):.3g}")
    if not (spec.r == 1 and spec.s == 1):
        _, rr = right_law_ratios(spec)
        rep.add("right edge: density/sqrt(x*-x) stabilizes", spread(rr), 0.02,
                "ratios " + ", ".join(f"{v:.6g}" for v in rr))
    return rep

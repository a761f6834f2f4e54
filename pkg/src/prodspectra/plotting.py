"""Static SVG figures (matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# stable SVG bytes across runs
matplotlib.rcParams["svg.hashsalt"] = "prodspectra"
matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_density(x, rho, x_star: float, path, title: str = "", clip_quantile: float = 0.98):
    """Density curve with a marker at the right edge of the support.

    The left edge diverges, so the y-range is clipped at a high quantile of the
    sampled values to keep the body of the curve visible.
    """
    x = np.asarray(x, dtype=float)
    rho = np.asarray(rho, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.concatenate([[0.0], x, [x_star]]), np.concatenate([[np.nan], rho, [0.0]]),
            color="C0", lw=1.5)
    ax.axvline(x_star, color="C3", ls="--", lw=0.8)
    ax.annotate(f"x* = {x_star:.6g}", (x_star, 0), xytext=(-70, 20), textcoords="offset points",
                fontsize=8, color="C3")
    finite = rho[np.isfinite(rho)]
    if finite.size:
        ax.set_ylim(0, 1.1 * float(np.quantile(finite, clip_quantile)))
    ax.set_xlim(0, 1.05 * x_star)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_spectrum(values, x_star: float, path, density=None, bins: int = 80, title: str = ""):
    """Histogram of an empirical spectrum, optionally against an analytic density."""
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    hi = max(x_star, float(values.max()) if values.size else x_star)
    edges = np.linspace(0.0, hi, bins + 1)
    ax.hist(values, bins=edges, density=True, color="C0", alpha=0.5, label="sample")
    if density is not None:
        xs = np.linspace(hi / (40 * bins), x_star * (1 - 1e-9), 400)
        ys = density(xs)
        ax.plot(xs, ys, color="C1", lw=1.2, label="limit density")
        heights, _ = np.histogram(values, bins=edges, density=True)
        ax.set_ylim(0, 1.3 * float(np.max(heights[1:])) if bins > 1 else None)
    ax.axvline(x_star, color="C3", ls="--", lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    _save(fig, path)

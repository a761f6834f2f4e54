"""Monte Carlo spectra of Y = G_r ... G_{s+1} T_s ... T_1.

Randomness comes from Philox streams keyed by (seed, trial[, attempt]) so each
trial is reproducible on its own and trials can run in any order.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .numkit import EigensolverError, hermitian_eigenvalues
from .product import ProductSpec

log = logging.getLogger(__name__)

DEFAULT_SEED = 7
MAX_ATTEMPTS = 3


def trial_rng(seed: int, trial: int, attempt: int = 0) -> np.random.Generator:
    key = [int(seed), int(trial)] + ([int(attempt)] if attempt else [])
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def complex_normals(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussians (E|z|^2 = 1) by Box-Muller: sqrt(-log u1) e^(2 pi i u2)."""
    u1 = 1.0 - rng.random(shape)  # in (0, 1]
    u2 = rng.random(shape)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def sample_ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    return complex_normals(rng, (rows, cols))


def sample_haar_unitary(ell: int, rng: np.random.Generator) -> np.ndarray:
    if ell < 1:
        raise ValueError("unitary order must be positive")
    q, r = np.linalg.qr(sample_ginibre(ell, ell, rng))
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def sample_truncation(ell: int, rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Upper-left rows x cols block of a Haar unitary of order ell."""
    if not (1 <= rows <= ell and 1 <= cols <= ell):
        raise ValueError(f"block {rows}x{cols} does not fit in a unitary of order {ell}")
    return sample_haar_unitary(ell, rng)[:rows, :cols]


@dataclass(frozen=True)
class EnsembleConfig:
    spec: ProductSpec
    n: int
    trials: int
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def as_dict(self) -> dict:
        return {**self.spec.as_dict(), "n": self.n, "trials": self.trials, "seed": self.seed}


@dataclass
class EmpiricalSpectrum:
    values: np.ndarray
    config: EnsembleConfig
    retries: list = field(default_factory=list)  # (trial, attempt, message)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def trials(self) -> int:
        return self.config.trials

    @property
    def spec(self) -> ProductSpec:
        return self.config.spec

    def to_csv(self, extra: dict | None = None) -> str:
        buf = io.StringIO()
        for k, v in {**self.config.as_dict(), **(extra or {})}.items():
            buf.write(f"# {k}={v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value"])
        for v in self.values:
            w.writerow([f"{v:.17g}"])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"schema": 1, "config": self.config.as_dict(),
                           "values": [float(v) for v in self.values]})

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalSpectrum":
        data = json.loads(text)
        c = data["config"]
        spec = ProductSpec(c["r"], c["s"], tuple(c["nu"]), tuple(c["ell_offsets"]))
        cfg = EnsembleConfig(spec, c["n"], c["trials"], c["seed"])
        return cls(np.array(data["values"], dtype=float), cfg)


def sample_product(spec: ProductSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """One draw of Y; the truncated unitaries act first (rightmost)."""
    y = None
    for j in range(1, spec.r + 1):
        rows, cols = spec.factor_shape(j, n)
        if j <= spec.s:
            f = sample_truncation(spec.unitary_order(j, n), rows, cols, rng)
        else:
            f = sample_ginibre(rows, cols, rng)
        y = f if y is None else f @ y
    return y


def _trial_spectrum(config: EnsembleConfig, trial: int, retries: list) -> np.ndarray:
    spec, n = config.spec, config.n
    last = None
    for attempt in range(MAX_ATTEMPTS):
        rng = trial_rng(config.seed, trial, attempt)
        y = sample_product(spec, n, rng)
        m = y.conj().T @ y
        m = 0.5 * (m + m.conj().T)
        try:
            ev = hermitian_eigenvalues(m)
        except EigensolverError as exc:
            last = exc
            retries.append((trial, attempt, str(exc)))
            log.warning("trial %d attempt %d: %s", trial, attempt, exc)
            continue
        # roundoff can push zero eigenvalues of the PSD matrix slightly negative
        return np.maximum(ev, 0.0) / float(n) ** (spec.r - spec.s)
    raise EigensolverError(f"trial {trial} failed after {MAX_ATTEMPTS} attempts: {last}")


def sample_spectrum(config: EnsembleConfig) -> EmpiricalSpectrum:
    retries: list = []
    pooled = np.concatenate([_trial_spectrum(config, t, retries) for t in range(config.trials)])
    return EmpiricalSpectrum(np.sort(pooled, kind="stable"), config, retries)


def ks_distance(emp, cdf) -> float:
    """sup |F_emp - F| over the sample, checking both sides of each jump."""
    x = np.sort(np.asarray(getattr(emp, "values", emp), dtype=float))
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))

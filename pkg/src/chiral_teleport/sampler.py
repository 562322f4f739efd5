"""Seeded Monte Carlo sampling of measurement outcomes.

Randomness is organised in fixed-size blocks of trials.  Block ``j`` draws its
uniforms from ``numpy.random.Generator(PCG64(SeedSequence(seed,
spawn_key=(j,))))``, so the uniform used by trial ``i`` depends only on
``(seed, i)``.  Runs over disjoint trial ranges (``start`` / ``n_trials``)
therefore pool to exactly the counts of one run over the union, whatever the
order they execute in.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .molecule import MoleculeAmplitudes
from .perfect import run_perfect_protocol
from .statedep import OUTCOMES, OutcomeDistribution, outcome_probabilities

BLOCK_SIZE = 1 << 14
PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class TrialConfig:
    n_trials: int
    seed: int
    experiment: str = "statedep"
    m: MoleculeAmplitudes = field(default_factory=lambda: MoleculeAmplitudes(1, 0))
    phi: float = 0.3
    kz: float = 0.0
    parity: str = "odd"
    orientation: str = "x"
    pair: str = "psi"
    variant: str = "natural"
    start: int = 0

    def __post_init__(self):
        if int(self.n_trials) < 1:
            raise ValueError("n_trials must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.start < 0:
            raise ValueError("start must be >= 0")
        if self.experiment not in ("perfect", "statedep"):
            raise ValueError("experiment must be 'perfect' or 'statedep'")


@dataclass(frozen=True)
class FrequencyReport:
    labels: tuple[str, ...]
    counts: tuple[int, ...]
    analytic: tuple[float, ...]
    n_trials: int
    seed: int

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(c / self.n_trials for c in self.counts)

    @property
    def standard_errors(self) -> tuple[float, ...]:
        return tuple(math.sqrt(p * (1 - p) / self.n_trials) for p in self.analytic)

    @property
    def z_scores(self) -> tuple[float, ...]:
        out = []
        for f, p, se in zip(self.frequencies, self.analytic, self.standard_errors):
            if se > 0:
                out.append((f - p) / se)
            else:
                # p is 0 or 1: any deviation is impossible under the model
                out.append(0.0 if abs(f - p) < 1e-15 else math.inf)
        return tuple(out)

    @property
    def max_abs_z(self) -> float:
        return max(abs(z) for z in self.z_scores)

    def merge(self, other: FrequencyReport) -> FrequencyReport:
        if self.labels != other.labels or self.seed != other.seed:
            raise ValueError("can only merge reports of the same experiment and seed")
        return FrequencyReport(
            self.labels,
            tuple(a + b for a, b in zip(self.counts, other.counts)),
            self.analytic,
            self.n_trials + other.n_trials,
            self.seed,
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_trials": self.n_trials,
            "outcomes": [
                {"label": lab, "count": c, "frequency": f, "analytic": p, "stderr": se, "z": z}
                for lab, c, f, p, se, z in zip(
                    self.labels,
                    self.counts,
                    self.frequencies,
                    self.analytic,
                    self.standard_errors,
                    self.z_scores,
                )
            ],
            "max_abs_z": self.max_abs_z,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "count", "frequency", "analytic", "z"])
        for lab, c, f, p, z in zip(
            self.labels, self.counts, self.frequencies, self.analytic, self.z_scores
        ):
            w.writerow([lab, c, repr(f), repr(p), repr(z)])
        return buf.getvalue()


def _check_distribution(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(~np.isfinite(p)) or np.any(p < -PROB_SUM_TOL):
        raise ValueError("malformed probability distribution")
    if abs(p.sum() - 1) > PROB_SUM_TOL:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    return np.clip(p, 0, None)


def _inverse_cdf(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(p) - 1)


def sample_outcome(distribution: OutcomeDistribution | np.ndarray, rng: np.random.Generator) -> int:
    """Draw one outcome index (0-based, canonical order) by inverse-CDF.

    ``rng`` advances by one uniform draw.
    """
    probs = distribution.probabilities if isinstance(distribution, OutcomeDistribution) else distribution
    p = _check_distribution(probs)
    return int(_inverse_cdf(p, np.array([rng.random()]))[0])


def trial_uniforms(seed: int, start: int, n: int) -> np.ndarray:
    """Uniforms for trials ``start .. start + n - 1`` under the block seeding rule."""
    out = np.empty(n)
    i = start
    filled = 0
    while filled < n:
        block, offset = divmod(i, BLOCK_SIZE)
        take = min(BLOCK_SIZE - offset, n - filled)
        gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))
        out[filled : filled + take] = gen.random(BLOCK_SIZE)[offset : offset + take]
        filled += take
        i += take
    return out


def sample_counts(probs, seed: int, n: int, start: int = 0) -> np.ndarray:
    p = _check_distribution(probs)
    idx = _inverse_cdf(p, trial_uniforms(seed, start, n))
    return np.bincount(idx, minlength=len(p))


def analytic_distribution(config: TrialConfig) -> tuple[tuple[str, ...], tuple[float, ...]]:
    if config.experiment == "statedep":
        return OUTCOMES, outcome_probabilities(config.m, config.phi).probabilities
    res = run_perfect_protocol(
        config.m,
        config.phi,
        kz=config.kz,
        pair=config.pair,
        parity=config.parity,
        orientation=config.orientation,
        variant=config.variant,
    )
    p = res.success_probability
    return ("coincidence", "no_coincidence"), (p, 1 - p)


def run_trials(config: TrialConfig) -> FrequencyReport:
    labels, probs = analytic_distribution(config)
    counts = sample_counts(probs, config.seed, config.n_trials, config.start)
    return FrequencyReport(
        labels,
        tuple(int(c) for c in counts),
        tuple(float(p) for p in probs),
        config.n_trials,
        config.seed,
    )

"""Molecular superposition amplitudes and the working basis of each variant."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .statevec import BASES, Kind, StateVector, from_vector

VARIANTS = ("natural", "e-field", "faraday")

# Basis in which the conditional phase table acts, per variant.
HANDED_BASIS = {
    "natural": "chiral",
    "e-field": "false_chirality",
    "faraday": "faraday",
}


def check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return variant


@dataclass(frozen=True)
class MoleculeAmplitudes:
    """The pair (a, b) of ``a|h0> + b|h1>``, normalised on construction.

    ``h0``/``h1`` are L/R for natural optical activity, and the variant's
    handed pair otherwise.
    """

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        n = math.hypot(abs(a), abs(b))
        if not math.isfinite(n) or n == 0:
            raise ValueError("molecular amplitudes must be finite and not both zero")
        object.__setattr__(self, "a", a / n)
        object.__setattr__(self, "b", b / n)

    @classmethod
    def from_polar(cls, alpha: float, theta_a: float, beta: float, theta_b: float):
        return cls(alpha * cmath.exp(1j * theta_a), beta * cmath.exp(1j * theta_b))

    @classmethod
    def random(cls, rng: np.random.Generator) -> MoleculeAmplitudes:
        """Haar-random point on the Bloch sphere."""
        z = rng.normal(size=4)
        return cls(complex(z[0], z[1]), complex(z[2], z[3]))

    @property
    def alpha(self) -> float:
        return abs(self.a)

    @property
    def beta(self) -> float:
        return abs(self.b)

    @property
    def theta_a(self) -> float:
        return cmath.phase(self.a)

    @property
    def theta_b(self) -> float:
        return cmath.phase(self.b)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=complex)

    def to_dict(self) -> dict:
        return {"a_re": self.a.real, "a_im": self.a.imag, "b_re": self.b.real, "b_im": self.b.imag}


def molecule_state(m: MoleculeAmplitudes, variant: str = "natural") -> StateVector:
    return from_vector(Kind.MOLECULE, m.vector, HANDED_BASIS[check_variant(variant)])


def working_parity_state(sign: str, variant: str = "natural") -> StateVector:
    """(|h0> +/- |h1>)/sqrt2 in the variant's handed basis.

    For natural optical activity these are the parity eigenstates |+>, |->.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    s = 1 if sign == "+" else -1
    return from_vector(
        Kind.MOLECULE,
        [1 / math.sqrt(2), s / math.sqrt(2)],
        HANDED_BASIS[check_variant(variant)],
    )


def handed_labels(variant: str) -> tuple[str, str]:
    return BASES[HANDED_BASIS[check_variant(variant)]].labels

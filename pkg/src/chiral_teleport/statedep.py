"""State-dependent teleportation with the upper arm removed.

Photon 1 goes straight through the molecule.  Rewriting the result over
molecular parity and photon-1 linear polarisation leaves four branches, each
carrying an unnormalised photon-2 state ``|k'> = M_k (a, b)``.  The matrices
are not unitary, so the branch weights depend on (a, b); they are given in
closed form by :func:`outcome_probabilities`.

Phase convention: the closed forms here follow the phase table used by
:func:`~chiral_teleport.optics.conditional_phase`, where the psi-type
photon-2 states |1>, |2> collect ``exp(+i phi)`` and |3>, |4> collect
``exp(-i phi)``.  Written with the opposite sign of ``phi`` (i.e.
``teleportee_matrices(-phi)``) they take the other common form
``|1'> = i/(2 sqrt2) (e^{-i phi}|2> - e^{i phi}|4>)`` etc.; the probabilities
only involve ``cos 2 phi`` and are the same either way.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .molecule import MoleculeAmplitudes, working_parity_state
from .optics import OpticalParams, conditional_phase
from .perfect import PHOTON2_MAPS, prepare_initial
from .statevec import (
    Kind,
    StateVector,
    change_basis,
    drop_kind,
    from_vector,
    make_state,
    partial_inner,
    relabel,
    tensor,
    to_vector,
)

# branch k' -> (molecular parity sign, photon-1 linear polarisation)
BRANCH_LABELS = (("-", "y"), ("+", "y"), ("-", "x"), ("+", "x"))
OUTCOMES = ("1'", "2'", "3'", "4'")
SIN_2PHI_TOL = 1e-9


class SingularTransformError(ValueError):
    """sin(2 phi) vanishes; the teleportee matrices cannot be inverted."""


@dataclass(frozen=True)
class TeleporteeSet:
    states: tuple[StateVector, ...]
    matrices: tuple[np.ndarray, ...] = field(repr=False)
    labels: tuple[tuple[str, str], ...] = BRANCH_LABELS


@dataclass(frozen=True)
class OutcomeDistribution:
    labels: tuple[str, ...]
    probabilities: tuple[float, ...]
    post_states: tuple[StateVector | None, ...] = field(repr=False, default=())

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=float)


def teleportee_matrices(phi: float) -> tuple[np.ndarray, ...]:
    """The four 2x2 maps ``(a, b) -> |k'>`` in the {l2, r2} basis."""
    e = cmath.exp(1j * phi)
    c = 1 / (2 * math.sqrt(2))
    p1, p2, p3, p4 = (PHOTON2_MAPS[k] for k in (1, 2, 3, 4))
    return (
        1j * c * (e * p2 - p4 / e),
        1j * c * (e * p1 - p3 / e),
        c * (e * p1 + p3 / e),
        c * (e * p2 + p4 / e),
    )


def teleportee_states(m: MoleculeAmplitudes, phi: float) -> TeleporteeSet:
    mats = teleportee_matrices(phi)
    states = tuple(from_vector(Kind.PHOTON2_POL, M @ m.vector) for M in mats)
    return TeleporteeSet(states, mats)


def determinants(phi: float) -> tuple[complex, ...]:
    """det M_k; all equal ``i sin(2 phi) / 4`` up to sign."""
    return tuple(complex(np.linalg.det(M)) for M in teleportee_matrices(phi))


def outcome_probabilities(m: MoleculeAmplitudes, phi: float) -> OutcomeDistribution:
    """Closed-form branch weights.

    ``Pr(1') = Pr(3') = (1 - 2 alpha beta cos(theta_a - theta_b) cos 2phi) / 4``
    and ``Pr(2') = Pr(4')`` with the opposite sign.  The post-states are the
    renormalised teleportee states (``None`` for a vanishing branch).
    """
    w = 2 * m.alpha * m.beta * math.cos(m.theta_a - m.theta_b) * math.cos(2 * phi)
    low, high = (1 - w) / 4, (1 + w) / 4
    posts = []
    for s in teleportee_states(m, phi).states:
        posts.append(s.normalized() if s.norm() > 1e-12 else None)
    return OutcomeDistribution(OUTCOMES, (low, high, low, high), tuple(posts))


def dense_bottom_arm(m: MoleculeAmplitudes, params: OpticalParams) -> StateVector:
    """Simulate the arm-free setup and rewrite it over parity and linear polarisation.

    The path subsystem is dropped (everything is on the bottom arm).  For the
    natural variant the molecule is returned in the parity basis; the e-field
    and Faraday variants keep their handed basis, and branches must be
    extracted with :func:`dense_branches`.
    """
    s = relabel(prepare_initial(m, params.variant), Kind.PHOTON1_PATH, {"source": "bottom"})
    s = drop_kind(conditional_phase(s, params), Kind.PHOTON1_PATH)
    if params.variant == "natural":
        s = change_basis(s, Kind.MOLECULE, "parity")
    return change_basis(s, Kind.PHOTON1_POL, "linear")


def dense_branches(m: MoleculeAmplitudes, params: OpticalParams) -> tuple[StateVector, ...]:
    """Unnormalised photon-2 state of each branch, ``<parity, pol| psi_bot>``."""
    s = dense_bottom_arm(m, params)
    out = []
    for sign, pol in BRANCH_LABELS:
        target = tensor(
            working_parity_state(sign, params.variant),
            make_state([({"photon1_pol": pol}, 1.0)]),
        )
        out.append(partial_inner(target, s))
    return tuple(out)


def photon2_ratio(state: StateVector) -> complex:
    """Component ratio l/r of a photon-2 state (``inf`` when the r part vanishes)."""
    v = to_vector(state)
    if abs(v[1]) < 1e-15 * max(abs(v[0]), 1e-300):
        return complex(math.inf, 0)
    return complex(v[0] / v[1])


def bloch_vector(state: StateVector) -> np.ndarray:
    v = to_vector(state)
    v = v / np.linalg.norm(v)
    cross = np.conj(v[0]) * v[1]
    return np.array([2 * cross.real, 2 * cross.imag, abs(v[0]) ** 2 - abs(v[1]) ** 2])


def _check_invertible(phi: float) -> None:
    if abs(math.sin(2 * phi)) < SIN_2PHI_TOL:
        raise SingularTransformError(
            f"sin(2 phi) = {math.sin(2 * phi):.3g}: teleportee matrices are singular, "
            "amplitudes cannot be reconstructed"
        )


def _outcome_index(k) -> int:
    if isinstance(k, str):
        if k not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}")
        return OUTCOMES.index(k)
    if k not in (1, 2, 3, 4):
        raise ValueError("outcome index must be 1..4")
    return k - 1


def reconstruct_amplitudes(k, phi: float, ratio: complex) -> MoleculeAmplitudes:
    """Recover (a, b), up to a global phase, from branch ``k`` and the measured l/r ratio.

    ``k`` is 1..4 or one of ``"1'"``..``"4'"``.  An infinite ratio means a
    pure ``|l2>`` photon.
    """
    _check_invertible(phi)
    M = teleportee_matrices(phi)[_outcome_index(k)]
    ratio = complex(ratio)
    if not cmath.isfinite(ratio):
        v = np.array([1, 0], dtype=complex)
    elif abs(ratio) > 1:
        v = np.array([1, 1 / ratio], dtype=complex)
    else:
        v = np.array([ratio, 1], dtype=complex)
    ab = np.linalg.solve(M, v)
    return MoleculeAmplitudes(ab[0], ab[1])


def amplitude_fidelity(m1: MoleculeAmplitudes, m2: MoleculeAmplitudes) -> float:
    return min(float(abs(np.vdot(m1.vector, m2.vector)) ** 2), 1.0)


@dataclass(frozen=True)
class PairBitReport:
    """What the pair bit (which molecular parity was found) tells about (a, b).

    ``ratios`` are the l/r ratios of the four branches.  Within each pair
    {1', 3'} and {2', 4'} the ratio magnitudes agree and the ratios differ by
    a sign, so ``M_partner^-1 (ratio)`` equals ``M_own^-1 (-ratio)``.

    ``exact`` holds the round-trip fidelity when the full branch label is
    known; ``via_partner`` the fidelity when a branch is read through its
    partner's matrix after applying the sign relation.  ``pair_only``
    lists, per branch, the fidelities of the two candidates left when only the
    pair bit is known and the sign relation is *not* applied;
    ``pair_bit_sufficient`` is True only if both candidates coincide.
    """

    ratios: tuple[complex, ...]
    magnitudes_equal_in_pairs: bool
    within_pair_sign_flip: bool
    exact: dict[str, float]
    via_partner: dict[str, float]
    pair_only: dict[str, tuple[float, float]]
    pair_bit_sufficient: bool

    def to_dict(self) -> dict:
        return {
            "ratios": [[r.real, r.imag] for r in self.ratios],
            "magnitudes_equal_in_pairs": self.magnitudes_equal_in_pairs,
            "within_pair_sign_flip": self.within_pair_sign_flip,
            "exact": self.exact,
            "via_partner": self.via_partner,
            "pair_only": {k: list(v) for k, v in self.pair_only.items()},
            "pair_bit_sufficient": self.pair_bit_sufficient,
        }


_PARTNER = {0: 2, 2: 0, 1: 3, 3: 1}


def pair_bit_analysis(m: MoleculeAmplitudes, phi: float, tol: float = 1e-9) -> PairBitReport:
    _check_invertible(phi)
    ratios = tuple(photon2_ratio(s) for s in teleportee_states(m, phi).states)

    def close(x, y):
        if not (cmath.isfinite(x) and cmath.isfinite(y)):
            return cmath.isfinite(x) == cmath.isfinite(y)
        return abs(x - y) <= tol * max(1.0, abs(x), abs(y))

    mags = [abs(r) for r in ratios]
    mag_equal = close(mags[0], mags[2]) and close(mags[1], mags[3])
    sign_flip = close(ratios[2], -ratios[0]) and close(ratios[3], -ratios[1])

    exact, via_partner, pair_only = {}, {}, {}
    for own, partner in _PARTNER.items():
        r = ratios[own]
        name = OUTCOMES[own]
        exact[name] = amplitude_fidelity(reconstruct_amplitudes(own + 1, phi, r), m)
        via_partner[name] = amplitude_fidelity(reconstruct_amplitudes(partner + 1, phi, -r), m)
        pair_only[name] = (
            exact[name],
            amplitude_fidelity(reconstruct_amplitudes(partner + 1, phi, r), m),
        )
    sufficient = all(min(v) >= 1 - tol for v in pair_only.values())
    return PairBitReport(ratios, mag_equal, sign_flip, exact, via_partner, pair_only, sufficient)


def analysis_report(m: MoleculeAmplitudes, phi: float, *, reconstruct: bool = True) -> dict:
    """JSON-ready summary: probabilities, states, matrices, determinants, reconstruction."""
    dist = outcome_probabilities(m, phi)
    tset = teleportee_states(m, phi)
    report = {
        "labels": list(OUTCOMES),
        "branch_labels": [list(b) for b in BRANCH_LABELS],
        "probabilities": list(dist.probabilities),
        "post_states": [p.to_dict() if p is not None else None for p in dist.post_states],
        "matrices": [
            [[[z.real, z.imag] for z in row] for row in M.tolist()] for M in tset.matrices
        ],
        "determinants": [[d.real, d.imag] for d in determinants(phi)],
    }
    if reconstruct:
        _check_invertible(phi)
        verdicts = {}
        for idx, s in enumerate(tset.states):
            rec = reconstruct_amplitudes(idx + 1, phi, photon2_ratio(s))
            verdicts[OUTCOMES[idx]] = {
                "recovered": rec.to_dict(),
                "fidelity": amplitude_fidelity(rec, m),
            }
        report["reconstruction"] = verdicts
        report["pair_bit"] = pair_bit_analysis(m, phi).to_dict()
    return report

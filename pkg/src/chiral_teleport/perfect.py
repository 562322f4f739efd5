"""Perfect teleportation through the interferometer.

Pipeline: :func:`prepare_initial` -> :func:`run_interferometer` ->
:func:`pi_pulse_fluorescence` -> :func:`coincidence_project` ->
:func:`pauli_correction`.  :func:`run_perfect_protocol` strings them together.

Which photon-2 state a coincidence leaves behind depends on the selected Bell
pair, the parity of the excited state and the polaroid orientation.  The
mapping in :data:`OUTCOME_TABLE` was read off the dense simulation (see
``tests/test_perfect.py::test_outcome_table_matches_pipeline``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .molecule import (
    MoleculeAmplitudes,
    check_variant,
    handed_labels,
    molecule_state,
    working_parity_state,
)
from .optics import OpticalParams, beam_splitter, conditional_phase, path_phase
from .statevec import (
    DEGENERACY_TOL,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    Kind,
    LinearOp,
    StateVector,
    apply,
    change_basis,
    drop_kind,
    factor_out,
    fidelity_up_to_global_phase,
    from_vector,
    ket,
    make_state,
    partial_inner,
    project,
    relabel,
    tensor,
)

BELL_LABELS = ("psi-", "psi+", "phi-", "phi+")
PAIRS = ("psi", "phi")
PARITIES = ("odd", "even")
ORIENTATIONS = ("x", "y")

# |k> = PHOTON2_MAPS[k] @ (a, b)
PHOTON2_MAPS = {
    1: -np.eye(2, dtype=complex),
    2: -SIGMA_Z,
    3: SIGMA_X.copy(),
    4: -1j * SIGMA_Y,
}

# (bell pair, excited parity, polaroid) -> index k of the teleported |k>
OUTCOME_TABLE = {
    ("psi", "odd", "x"): 2,
    ("psi", "odd", "y"): 1,
    ("psi", "even", "x"): 1,
    ("psi", "even", "y"): 2,
    ("phi", "odd", "x"): 4,
    ("phi", "odd", "y"): 3,
    ("phi", "even", "x"): 3,
    ("phi", "even", "y"): 4,
}

SIN_PHI_TOL = 1e-7


class ProtocolInfeasibleError(ValueError):
    """The requested configuration cannot produce a coincidence."""


@dataclass(frozen=True)
class BellComponent:
    label: str
    bell_state: StateVector
    coefficient: float
    photon2: StateVector | None


@dataclass(frozen=True)
class BellDecomposition:
    """``s = sum_k coefficient_k |Bell_k> (x) photon2_k`` over molecule and photon 1."""

    components: tuple[BellComponent, ...]

    def __getitem__(self, label: str) -> BellComponent:
        for c in self.components:
            if c.label == label:
                return c
        raise KeyError(label)

    def recombine(self) -> StateVector:
        total = None
        for c in self.components:
            if c.photon2 is None:
                continue
            part = tensor(c.bell_state, c.photon2) * c.coefficient
            total = part if total is None else total + part
        if total is None:
            raise ValueError("empty decomposition")
        return total


@dataclass(frozen=True)
class PerfectResult:
    pair: str
    parity: str
    orientation: str
    outcome_index: int
    success_probability: float
    teleported_state: StateVector
    corrected_state: StateVector
    fidelity: float
    params: OpticalParams = field(repr=False)

    @property
    def outcome_label(self) -> str:
        return f"{self.pair}/{self.parity}/{self.orientation} -> |{self.outcome_index}>"

    def to_dict(self) -> dict:
        return {
            "outcome_label": self.outcome_label,
            "outcome_index": self.outcome_index,
            "success_probability": self.success_probability,
            "fidelity": self.fidelity,
            "teleported_state": self.teleported_state.to_dict(),
            "corrected_state": self.corrected_state.to_dict(),
        }


def photon2_state(m: MoleculeAmplitudes, k: int) -> StateVector:
    """The reference photon-2 state |k>, k = 1..4."""
    if k not in PHOTON2_MAPS:
        raise ValueError(f"outcome index must be 1..4, got {k}")
    return from_vector(Kind.PHOTON2_POL, PHOTON2_MAPS[k] @ m.vector)


def target_state(m: MoleculeAmplitudes) -> StateVector:
    return from_vector(Kind.PHOTON2_POL, m.vector)


def singlet_12() -> StateVector:
    """(|l1>|r2> - |r1>|l2>)/sqrt2."""
    s = 1 / math.sqrt(2)
    return make_state(
        [
            ({"photon1_pol": "l", "photon2_pol": "r"}, s),
            ({"photon1_pol": "r", "photon2_pol": "l"}, -s),
        ]
    )


def prepare_initial(m: MoleculeAmplitudes, variant: str = "natural") -> StateVector:
    """Molecule in ``a|h0> + b|h1>``, photons in the singlet, photon 1 at the source."""
    return tensor(tensor(molecule_state(m, variant), singlet_12()), ket(photon1_path="source"))


def bell_states(variant: str = "natural") -> dict[str, StateVector]:
    h0, h1 = handed_labels(variant)
    s = 1 / math.sqrt(2)

    def pair(p0, p1, sign):
        return make_state(
            [({"molecule": h0, "photon1_pol": p0}, s), ({"molecule": h1, "photon1_pol": p1}, sign * s)]
        )

    return {
        "psi-": pair("r", "l", -1),
        "psi+": pair("r", "l", 1),
        "phi-": pair("l", "r", -1),
        "phi+": pair("l", "r", 1),
    }


def bell_decompose(s: StateVector, variant: str = "natural") -> BellDecomposition:
    """Expand ``s`` over the molecule/photon-1 Bell basis.

    Kinds other than molecule, photon-1 polarisation and photon-2 polarisation
    are allowed only if they sit in a single basis state; they are dropped.
    """
    needed = {Kind.MOLECULE, Kind.PHOTON1_POL, Kind.PHOTON2_POL}
    if not needed <= set(s.kinds):
        raise ValueError("bell_decompose needs molecule, photon-1 and photon-2 polarisation")
    for kind in s.kinds:
        if kind not in needed:
            s = drop_kind(s, kind)
    comps = []
    for label, bell in bell_states(variant).items():
        part = partial_inner(bell, s)
        n = part.norm()
        comps.append(BellComponent(label, bell, n, part / n if n > DEGENERACY_TOL else None))
    return BellDecomposition(tuple(comps))


def tune_arm(phi: float, pair: str, kz: float = 0.0) -> float:
    """Top-arm phase that sends only the chosen Bell pair to detector 2.

    With the symmetric splitter convention the detector-2 amplitude is
    ``(exp(i chi) - U_bottom) psi / 2`` and the bottom-arm phase on the
    psi pair is ``exp(i(kz + phi))``, on the phi pair ``exp(i(kz - phi))``.
    Matching ``chi`` to the *other* pair's phase cancels it at detector 2.
    """
    if pair == "psi":
        chi = kz - phi
    elif pair == "phi":
        chi = kz + phi
    else:
        raise ValueError(f"pair must be 'psi' or 'phi', got {pair!r}")
    return chi % (2 * math.pi)


def run_interferometer(s: StateVector, params: OpticalParams) -> StateVector:
    pos = s.kinds.index(Kind.PHOTON1_PATH) if Kind.PHOTON1_PATH in s.kinds else None
    if pos is None or {key[pos] for key in s.terms} != {"source"}:
        raise ValueError("photon 1 must start at the source")
    s = beam_splitter(s, "source", ("top", "bottom"))
    s = conditional_phase(s, params)
    s = path_phase(s, "top", params.chi)
    return beam_splitter(s, ("top", "bottom"), ("D2", "other"))


def pi_pulse_fluorescence(s: StateVector, excited_parity: str, variant: str = "natural") -> StateVector:
    """Excite one parity component and record its fluorescence photon.

    With an odd-parity excited state only ``|+>`` couples, so
    ``|+>|nu0> -> |+>|nu1>`` and ``|->|nu0>`` is untouched; ``even`` swaps roles.
    """
    if excited_parity not in PARITIES:
        raise ValueError(f"excited_parity must be one of {PARITIES}")
    if Kind.FLUOR not in s.kinds:
        raise ValueError("state has no fluorescence mode")
    pos = s.kinds.index(Kind.FLUOR)
    if any(key[pos] != "nu0" for key in s.terms):
        raise ValueError("fluorescence mode already excited")
    excited = working_parity_state("+" if excited_parity == "odd" else "-", variant)
    coupled = tensor(excited, partial_inner(excited, s))
    return (s - coupled) + relabel(coupled, Kind.FLUOR, {"nu0": "nu1"})


def coincidence_project(s: StateVector, orientation: str) -> tuple[float, StateVector]:
    """Project on ``|nu1> (x) |D2> (x) |orientation>`` and return the photon-2 state."""
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    target = make_state(
        [({"photon1_pol": orientation, "photon1_path": "D2", "fluor": "nu1"}, 1.0)]
    )
    p, post = project(s, target)
    if post is None:
        raise ProtocolInfeasibleError(
            "coincidence probability is zero: no amplitude reaches detector 2 with a fluorescence photon"
        )
    return p, factor_out(post, Kind.PHOTON2_POL)


def pauli_correction(outcome: int, s: StateVector) -> StateVector:
    """Undo the sign/Pauli map that produced |outcome> from (a, b)."""
    if outcome not in PHOTON2_MAPS:
        raise ValueError(f"outcome index must be 1..4, got {outcome}")
    inv = np.linalg.inv(PHOTON2_MAPS[outcome])
    return apply(LinearOp.from_matrix(Kind.PHOTON2_POL, inv, unitary=True), s)


def coincidence_probability(phi: float) -> float:
    """Closed form sin(phi)^2 / 8 of one tuned coincidence channel.

    Half of the state lies in the selected Bell pair, at most all of it reaches
    detector 2 (``sin^2 phi`` of it does), and the parity/polaroid coincidence
    keeps one of four equal-weight terms.
    """
    return math.sin(phi) ** 2 / 8


def _check_feasible(phi: float) -> None:
    if abs(math.sin(phi)) < SIN_PHI_TOL:
        raise ProtocolInfeasibleError("sin(phi) = 0: no amplitude reaches detector 2")


def _run_configurations(m, phi, kz, variant, configs) -> list[PerfectResult]:
    check_variant(variant)
    _check_feasible(phi)
    for pair, parity, orientation in configs:
        if (pair, parity, orientation) not in OUTCOME_TABLE:
            raise ValueError(f"unknown configuration {(pair, parity, orientation)}")
    initial = prepare_initial(m, variant)
    target = target_state(m)
    stages: dict = {}
    results = []
    for pair, parity, orientation in configs:
        params = OpticalParams(phi=phi, kz=kz, chi=tune_arm(phi, pair, kz), variant=variant)
        if pair not in stages:
            s = run_interferometer(initial, params)
            stages[pair] = tensor(s, ket(fluor="nu0"))
        if (pair, parity) not in stages:
            pulsed = pi_pulse_fluorescence(stages[pair], parity, variant)
            # both polaroid settings project in the linear basis; convert once
            stages[(pair, parity)] = change_basis(pulsed, Kind.PHOTON1_POL, "linear")
        p, photon2 = coincidence_project(stages[(pair, parity)], orientation)
        k = OUTCOME_TABLE[(pair, parity, orientation)]
        corrected = pauli_correction(k, photon2)
        results.append(
            PerfectResult(
                pair=pair,
                parity=parity,
                orientation=orientation,
                outcome_index=k,
                success_probability=p,
                teleported_state=photon2,
                corrected_state=corrected,
                fidelity=fidelity_up_to_global_phase(corrected, target),
                params=params,
            )
        )
    return results


def run_perfect_protocol(
    m: MoleculeAmplitudes,
    phi: float,
    *,
    kz: float = 0.0,
    pair: str = "psi",
    parity: str = "odd",
    orientation: str = "x",
    variant: str = "natural",
) -> PerfectResult:
    """Teleport ``m`` onto photon 2 for one (pair, parity, polaroid) setting.

    Raises :class:`ProtocolInfeasibleError` when ``sin(phi)`` vanishes.
    """
    return _run_configurations(m, phi, kz, variant, [(pair, parity, orientation)])[0]


def run_all_configurations(
    m: MoleculeAmplitudes, phi: float, *, kz: float = 0.0, variant: str = "natural"
) -> list[PerfectResult]:
    """All eight settings of :data:`OUTCOME_TABLE`, sharing the common stages."""
    return _run_configurations(m, phi, kz, variant, list(OUTCOME_TABLE))

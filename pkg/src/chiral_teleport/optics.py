"""Optical elements of the interferometer as operators on :class:`StateVector`."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .molecule import HANDED_BASIS, check_variant, handed_labels
from .statevec import (
    DEGENERACY_TOL,
    BASES,
    Kind,
    LinearOp,
    StateVector,
    apply,
)

TWO_PI = 2 * math.pi
_S2 = 1 / math.sqrt(2)


def _reduce(angle: float, name: str) -> float:
    angle = float(angle)
    if not math.isfinite(angle):
        raise ValueError(f"{name} must be finite")
    return angle % TWO_PI


@dataclass(frozen=True)
class OpticalParams:
    """Phases of the setup, in radians, reduced modulo 2*pi.

    phi
        optical-activity phase; same-handed photon/molecule pairs pick up
        ``exp(i(kz - phi))``, opposite-handed pairs ``exp(i(kz + phi))``.
    kz
        free-space phase of the bottom arm.
    chi
        adjustable phase of the top arm; see :func:`~chiral_teleport.perfect.tune_arm`.
    variant
        ``natural``, ``e-field`` or ``faraday``; selects the molecular basis the
        phase table acts in.
    """

    phi: float = 0.0
    kz: float = 0.0
    chi: float = 0.0
    variant: str = "natural"

    def __post_init__(self):
        for name in ("phi", "kz", "chi"):
            object.__setattr__(self, name, _reduce(getattr(self, name), name))
        check_variant(self.variant)


def conditional_phase_op(params: OpticalParams) -> LinearOp:
    h0, h1 = handed_labels(params.variant)
    same = cmath.exp(1j * (params.kz - params.phi))
    opposite = cmath.exp(1j * (params.kz + params.phi))
    action = {}
    for mol in (h0, h1):
        for pol in ("l", "r"):
            same_handed = (mol, pol) in ((h0, "l"), (h1, "r"))
            w = same if same_handed else opposite
            action[(mol, pol, "bottom")] = (((mol, pol, "bottom"), w),)
    return LinearOp(
        (Kind.MOLECULE, Kind.PHOTON1_POL, Kind.PHOTON1_PATH),
        (HANDED_BASIS[params.variant], "circular", "path"),
        action,
        unitary=True,
        name="conditional_phase",
    )


def conditional_phase(s: StateVector, params: OpticalParams) -> StateVector:
    """Photon-molecule scattering in the bottom arm; other paths are untouched."""
    needed = {Kind.MOLECULE, Kind.PHOTON1_POL, Kind.PHOTON1_PATH}
    if not needed <= set(s.kinds):
        missing = sorted(k.value for k in needed - set(s.kinds))
        raise ValueError(f"conditional_phase needs subsystems {missing}")
    return apply(conditional_phase_op(params), s)


def beam_splitter_op(inputs, outputs: tuple[str, str]) -> LinearOp:
    if isinstance(inputs, str):
        inputs = (inputs,)
    out1, out2 = outputs
    if out1 == out2:
        raise ValueError("beam splitter outputs must be distinct")
    r = 1j * _S2
    action = {(inputs[0],): (((out1,), _S2), ((out2,), r))}
    if len(inputs) == 2:
        action[(inputs[1],)] = (((out1,), r), ((out2,), _S2))
    elif len(inputs) != 1:
        raise ValueError("a beam splitter has one or two input ports")
    return LinearOp((Kind.PHOTON1_PATH,), ("path",), action, unitary=True, name="beam_splitter")


def beam_splitter(s: StateVector, inputs, outputs: tuple[str, str]) -> StateVector:
    """50/50 splitter, symmetric convention (transmit 1/sqrt2, reflect i/sqrt2).

    ``inputs`` is one path label, or two for a recombining splitter where the
    second input maps to ``(i|out1> + |out2>)/sqrt2``.  Output ports that are
    not also inputs must be empty in ``s``.
    """
    ins = (inputs,) if isinstance(inputs, str) else tuple(inputs)
    paths = BASES["path"].labels
    for p in (*ins, *outputs):
        if p not in paths:
            raise ValueError(f"unknown path label {p!r}")
    pos = s.kinds.index(Kind.PHOTON1_PATH)
    occupied = {key[pos] for key in s.terms}
    clash = (occupied & set(outputs)) - set(ins)
    if clash:
        raise ValueError(f"output port(s) {sorted(clash)} already occupied")
    return apply(beam_splitter_op(ins, outputs), s)


def path_phase(s: StateVector, path: str, theta: float) -> StateVector:
    w = cmath.exp(1j * theta)
    op = LinearOp((Kind.PHOTON1_PATH,), ("path",), {(path,): (((path,), w),)}, True, "path_phase")
    return apply(op, s)


def polarizer(s: StateVector, path: str, orientation: str) -> tuple[float, StateVector | None]:
    """Ideal linear polariser in front of ``path``.

    Photon-1 amplitude on ``path`` is projected onto ``|x>`` or ``|y>``; other
    paths pass.  Returns the transmission probability and the renormalised
    state (``None`` if nothing gets through).
    """
    if orientation not in ("x", "y"):
        raise ValueError("orientation must be 'x' or 'y'")
    blocked = "y" if orientation == "x" else "x"
    op = LinearOp(
        (Kind.PHOTON1_POL, Kind.PHOTON1_PATH),
        ("linear", "path"),
        {(blocked, path): ()},
        name="polarizer",
    )
    out = apply(op, s)
    p = out.norm() ** 2
    if p < DEGENERACY_TOL:
        return p, None
    return p, out * (1 / math.sqrt(p))

"""Simulation of teleporting a chiral molecule's L/R amplitudes onto a photon."""

__version__ = "0.1.0"

from .molecule import VARIANTS, MoleculeAmplitudes
from .optics import OpticalParams
from .perfect import ProtocolInfeasibleError, run_all_configurations, run_perfect_protocol
from .statedep import SingularTransformError, outcome_probabilities, reconstruct_amplitudes
from .statevec import LinearOp, StateVector, ket, make_state, tensor

__all__ = [
    "VARIANTS",
    "LinearOp",
    "MoleculeAmplitudes",
    "OpticalParams",
    "ProtocolInfeasibleError",
    "SingularTransformError",
    "StateVector",
    "ket",
    "make_state",
    "outcome_probabilities",
    "reconstruct_amplitudes",
    "run_all_configurations",
    "run_perfect_protocol",
    "tensor",
]

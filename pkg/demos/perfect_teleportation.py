# Walk one molecule through the interferometer and watch its amplitudes
# land on photon 2.
import math

import numpy as np

from chiral_teleport.molecule import MoleculeAmplitudes
from chiral_teleport.optics import OpticalParams
from chiral_teleport.perfect import (
    bell_decompose,
    coincidence_project,
    pauli_correction,
    pi_pulse_fluorescence,
    prepare_initial,
    run_all_configurations,
    run_interferometer,
    target_state,
    tune_arm,
)
from chiral_teleport.statevec import fidelity_up_to_global_phase, ket, partial_inner, tensor

m = MoleculeAmplitudes(0.6, 0.8j)
phi = 0.3
print("molecule:", m.a, m.b)

# Before anything happens, the state splits evenly over the four Bell states.
s0 = prepare_initial(m)
for comp in bell_decompose(s0).components:
    print(f"  {comp.label:5s} weight {comp.coefficient:.4f}")

# Tune the top arm so only the psi pair can reach detector 2.
params = OpticalParams(phi=phi, chi=tune_arm(phi, "psi"))
s1 = run_interferometer(s0, params)
d2 = partial_inner(ket(photon1_path="D2"), s1)
print("probability photon 1 reaches D2:", d2.norm() ** 2, " sin^2(phi)/2 =", math.sin(phi) ** 2 / 2)

# Pi pulse on the odd-parity transition, then look for a coincidence
# behind an x polaroid.
s2 = pi_pulse_fluorescence(tensor(s1, ket(fluor="nu0")), "odd")
p, photon2 = coincidence_project(s2, "x")
print("coincidence probability:", p, " sin^2(phi)/8 =", math.sin(phi) ** 2 / 8)
print("photon 2 before correction:", photon2)

fixed = pauli_correction(2, photon2)
print("after correcting outcome |2>:", fixed)
print("fidelity:", fidelity_up_to_global_phase(fixed, target_state(m)))

# Same thing for all eight (pair, parity, polaroid) settings.
print()
for r in run_all_configurations(m, phi):
    print(f"  {r.outcome_label:24s} p={r.success_probability:.6f} F={r.fidelity:.12f}")

# A realistic cavity might only manage phi of order a tenth of a degree.
tiny = np.deg2rad(0.1)
print("\nphi = 0.1 deg -> coincidence probability", run_all_configurations(m, tiny)[0].success_probability)

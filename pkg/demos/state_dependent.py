# Without the top arm the map from (a, b) to photon 2 is no longer unitary.
import math

import numpy as np

from chiral_teleport.molecule import MoleculeAmplitudes
from chiral_teleport.statedep import (
    BRANCH_LABELS,
    determinants,
    outcome_probabilities,
    pair_bit_analysis,
    photon2_ratio,
    reconstruct_amplitudes,
    amplitude_fidelity,
    teleportee_states,
)

m = MoleculeAmplitudes.from_polar(0.8, 0.2, 0.6, -0.9)
phi = 0.3

dist = outcome_probabilities(m, phi)
for label, branch, p in zip(dist.labels, BRANCH_LABELS, dist.probabilities):
    print(f"{label}  parity {branch[0]} polaroid {branch[1]}  Pr = {p:.6f}")
print("sum:", sum(dist.probabilities))

# Branch weights depend on the molecule. Compare with a different state.
other = MoleculeAmplitudes(1, 1)
print("for (1, 1)/sqrt2:", np.round(outcome_probabilities(other, phi).probabilities, 6))

# Tomography on photon 2 plus the outcome label recovers (a, b).
for k, s in enumerate(teleportee_states(m, phi).states, start=1):
    rec = reconstruct_amplitudes(k, phi, photon2_ratio(s))
    print(f"outcome {k}': recovered fidelity {amplitude_fidelity(rec, m):.12f}")

# The maps become singular whenever sin(2 phi) = 0.
for angle in (0.3, math.pi / 4, math.pi / 2):
    print(f"phi={angle:.4f}  |det| = {abs(determinants(angle)[0]):.3e}")

# Within {1', 3'} and {2', 4'} the photon-2 ratios only differ by sign.
rep = pair_bit_analysis(m, phi)
print("ratios:", [f"{r:.4f}" for r in rep.ratios])
print("sign flip within pairs:", rep.within_pair_sign_flip)
print("fidelity of the two candidates with only the pair bit:", rep.pair_only)

# Sample the experiment many times and compare with the Born-rule numbers.
import math

from chiral_teleport.molecule import MoleculeAmplitudes
from chiral_teleport.sampler import TrialConfig, run_trials

m = MoleculeAmplitudes(0.6, 0.8)

rep = run_trials(TrialConfig(100_000, seed=2024, m=m, phi=0.3))
print(rep.to_csv())
print("largest |z|:", round(rep.max_abs_z, 3))

# Two halves run separately pool to exactly the same counts.
a = run_trials(TrialConfig(50_000, seed=2024, m=m, phi=0.3))
b = run_trials(TrialConfig(50_000, seed=2024, m=m, phi=0.3, start=50_000))
print("pooled == single run:", a.merge(b).counts == rep.counts)

perfect = run_trials(TrialConfig(100_000, seed=7, experiment="perfect", m=m, phi=math.pi / 2))
print(perfect.to_csv())

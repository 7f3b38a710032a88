"""Independent checks of the force law and the integrator.

Forces are compared with central differences of the energy, an explicit
Euler run is compared with the adaptive integrator, and the full invariant
suite (the same one behind `disclinations selfcheck`) is run for a seed.
"""
import numpy as np

from disclinations.core import Configuration, forces
from disclinations.flow import IntegratorSettings, simulate
from disclinations.verify import euler_reference, fd_gradient, run_invariant_suite

cfg = Configuration.from_arrays([1, -2, 1], [(0.1, 0.2), (-0.3, 0.1), (0.4, -0.5)])
fd = np.array([fd_gradient(cfg, k) for k in range(3)])
print(f"force vs energy differences: {np.abs(forces(cfg) - fd).max():.1e}")

ref = euler_reference(cfg, 1e-5, 0.2, sample_interval=0.01)
tr = simulate(cfg, IntegratorSettings(t_end=0.2))
print(f"Euler (dt = 1e-5) vs adaptive: {np.abs(ref.positions - tr.positions).max():.1e}\n")

for r in run_invariant_suite(seed=0):
    print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<26} abs {r.max_abs_error:.2e}  rel {r.max_rel_error:.2e}")

"""Superposed pairs as the limit of a rigidly offset pair.

Holding two disclinations at a fixed offset eps and letting eps shrink, the
leading member approaches the motion of one disclination of charge
(s1 + s2)/sqrt(2).  An annihilating pair (s2 = -s1) does not move at all.
"""
import math

import numpy as np

from disclinations.flow import analytic_single
from disclinations.pairlab import EffectivePair, effective_pair_rhs, simulate_constrained_eps, simulate_effective_pair

for eps in (1e-2, 1e-3, 1e-4):
    tr = simulate_constrained_eps(1, 2, (0.3, 0.0), eps, 1.0)
    ref = analytic_single(3 / math.sqrt(2), 0.3, 0.0, tr.times)
    gap = np.abs(tr.xi1 - ref).max()
    print(f"eps = {eps:g}: gap to the effective trajectory {gap:.2e}, "
          f"ends at T = {tr.times[-1]:.2f} ({tr.termination}), constraint residual {tr.residual.max():.1e}")

v, lam = effective_pair_rhs(EffectivePair(1, 2, (0.5, 0.0)))
print(f"\ns = (1, 2) at (0.5, 0): velocity {v}, reaction on the first member {lam}")

tr = simulate_effective_pair(1, -1, (0.3, -0.2), 1.0)
print(f"s = (1, -1): max displacement {np.abs(tr.xi1 - tr.xi1[0]).max():.1e} ({tr.termination})")

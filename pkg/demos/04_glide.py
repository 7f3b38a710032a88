"""Motion restricted to glide directions.

Each disclination moves along the admissible direction that best aligns with
its force.  When two directions are equally good the trajectory slides
along the switching surface with a blended velocity; otherwise it may
cross-slip from one direction to another.
"""
import numpy as np

from disclinations import glide
from disclinations.core import Configuration
from disclinations.flow import IntegratorSettings

axes = glide.axes()
print(glide.select_directions([0.3, 0.1], axes))
print(glide.select_directions([0.5, 0.5], axes).status)
print("alpha for F- = (3, 0), F+ = (-1, 0):", glide.sliding_coefficient([3, 0], [-1, 0], [1, 0]))

tr = glide.integrate_inclusion(Configuration.from_arrays([1.0], [(0.3, 0.3)]), axes, IntegratorSettings(t_end=0.5))
print(f"\nsingle on the diagonal: stays on it to {np.abs(np.diff(tr.positions[:, 0], axis=1)).max():.1e}")

for X, t_end in ((((-0.3, 0.2), (0.3, 0.0)), 1.0), (((-0.3, 0.15), (0.3, -0.18)), 0.6)):
    tr = glide.integrate_inclusion(Configuration.from_arrays([1, -1], X), axes, IntegratorSettings(t_end=t_end))
    print(f"\ndipole at {X}:")
    for e in tr.events:
        print(f"    {e.kind:<16} T = {e.time:.4f}  D{tuple(k + 1 for k in e.subjects)}")
    if tr.sliding_log:
        print(f"    sliding residual {max(abs(e) for _, _, e, _ in tr.sliding_log):.1e}")

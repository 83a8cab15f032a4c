"""
Filling a thin Reinhardt region with Hartogs figures
====================================================

``V_eps = {||z1| - |z2|| < eps, |z1|, |z2| <= 1}`` is a thin neighbourhood
of the cone ``|z1| = |z2|``.  Attaching Hartogs figures step by step grows
the largest bidisc inside the region until it reaches the unit bidisc, the
same answer as the logarithmically convex hull.
"""

import numpy as np

from levikit.hulls import ReinhardtRegion, hartogs_completion, log_convex_hull

eps = 0.2
V = ReinhardtRegion.v_eps(eps, n=256)
R, trace = hartogs_completion(V, eps)
L = log_convex_hull(V)

print("steps:", len(trace))
print("M' trace:", " ".join(f"{m:.3f}" for m in trace[:8]), "...", f"{trace[-1]:.3f}")
print("every step gains at least eps/12 - cell:",
      bool(np.all(np.diff(trace) >= eps / 12 - R.cell)))
print("completion agrees with the log-convex hull within one cell:", R.within_one_cell(L))
print("fraction of the modulus square filled: V_eps %.3f, completion %.3f"
      % (V.mask.mean(), R.mask.mean()))

# masks round-trip through plain P1 bitmaps
text = R.to_pbm()
print(text.splitlines()[:3])
assert np.array_equal(ReinhardtRegion.from_pbm(text).mask, R.mask)

"""
Two solutions of one Dirichlet problem for the Levi equation
============================================================

On the unit ball of C^2 the data ``g = |z1|^2`` on the sphere is matched by
``u = |z1|^2`` and by ``v = 1 - |z2|^2``; both satisfy the Levi equation in
the viscosity sense.  The extremal solutions are rebuilt from the hulls of
the level sets ``{g = c}`` of the data.
"""

import numpy as np

from levikit.core import BoundaryData, Domain
from levikit.hulls import ProbeFamily, extremal_via_hull_sweep
from levikit.operators import OperatorKind, viscosity_classify

# spot tests of the viscosity inequalities at a few hundred interior nodes
grid = Domain.ball(4, 1.0).grid(1 / 8)
nodes = np.argwhere(grid.interior)[::20]
for name, f in [("u = |z1|^2", lambda P: P[:, 0] ** 2 + P[:, 1] ** 2),
                ("v = 1 - |z2|^2", lambda P: 1 - P[:, 2] ** 2 - P[:, 3] ** 2)]:
    vals = np.zeros(grid.shape)
    vals[grid.closure] = f(grid.points(grid.closure))
    F = grid.copy(vals)
    kinds = [viscosity_classify(F, n, OperatorKind("LeviFull"), seed=i).kind
             for i, n in enumerate(nodes)]
    print(f"{name:16s} viscosity 'both' at {kinds.count('both')}/{len(kinds)} nodes")

# extremal solutions on the Reinhardt-reduced ball (coordinates |z1|, |z2|)
red = Domain.reduced_ball(1.0)
g = BoundaryData.from_function(red, lambda P: np.atleast_2d(P)[:, 0] ** 2)
lower, upper = extremal_via_hull_sweep(red, g, np.linspace(0, 1, 32), ProbeFamily(count=200),
                                       h=1 / 16)
P = lower.points(lower.closure)
print("max |u- - |z1|^2|     =", np.abs(lower.values[lower.closure] - P[:, 0] ** 2).max())
print("max |u+ - (1-|z2|^2)| =", np.abs(upper.values[upper.closure] - 1 + P[:, 1] ** 2).max())
gap = upper.values[upper.closure] - lower.values[lower.closure]
print("largest gap between the extremals:", round(gap.max(), 3), "(exact value 1, at the origin)")

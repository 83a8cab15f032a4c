"""
No graph over B(R) with curvature above 1/R
===========================================

The upper hemisphere ``v = (R^2 - |x|^2)^{1/2}`` solves the prescribed
curvature equation with ``k = 1/R``.  Comparing a candidate with it at the
lowest point of ``u - v`` shows that no Lipschitz solution exists over
``B(R)`` once ``k > 1/R``.
"""

import numpy as np

from levikit.core import BoundaryData, Domain
from levikit.solver import (SchemeConfig, curvature_bound_detect, principle_checks,
                            solve_graph_dirichlet)


def cap(R):
    return lambda P: np.sqrt(np.maximum(R * R - np.sum(np.atleast_2d(P) ** 2, axis=1), 0.0))


# a converging solve for admissible curvature
dom = Domain.ball(3, 0.8)
s = solve_graph_dirichlet(dom, BoundaryData.from_function(dom, cap(1.0)), 1.0, h=1 / 16)
f = s.field
err = np.abs(f.values[f.closure] - cap(1.0)(f.points(f.closure))).max()
print(f"k = 1 on B(0.8): converged {s.converged}, sup error {err:.2e}")
print("minimum-side checks:", principle_checks(s, "ge")["status"])

# the obstruction test on B(1)
dom = Domain.ball(3, 1.0)
g = BoundaryData.from_function(dom, cap(1.0))
for k in (0.5, 1.5):
    if k <= 1.0:
        grid = dom.grid(1 / 8)
        vals = np.zeros(grid.shape)
        vals[grid.closure] = cap(1 / k)(grid.points(grid.closure))
        cand = grid.copy(vals)
    else:
        sc = SchemeConfig(viscosity_seq=(0.1,), max_iters=200, relaxation=1.0)
        cand = solve_graph_dirichlet(dom, g, k, sc, h=1 / 8).field
    d = curvature_bound_detect(dom, k, cand)
    print(f"k = {k}: {d['verdict']:15s} touching point {np.round(d['direct']['point'], 3)}")

"""
The hull of the torus and its local maximum property
====================================================

The polynomial hull of the torus ``|z1| = |z2| = 1`` is the closed bidisc.
Probe hulls keep every bidisc point and exclude points outside it; away from
the torus the hull carries no strict local maxima of polynomial moduli.
"""

import numpy as np

from levikit.core import Domain, to_real, torus_samples
from levikit.geometry import PointCloudSet, PshProbe, lmp_test
from levikit.hulls import ProbeFamily, hull_compute, hull_lmp_certify

K = torus_samples(64)
probes = ProbeFamily(count=500)

queries = np.array([[0.5, 0.5], [0.9j, -0.2], [0.0, 0.0], [1.2, 0.1], [0.3, 1.1j]])
res = hull_compute(K, queries, probes)
for q, m in zip(queries, res.member):
    print(f"{np.round(q, 2)!s:28s} {'not excluded' if m else 'excluded'}")
print("witness for", queries[3], "->", res.witness_record(3)["probe"]["label"])

# the torus itself is totally real: it fails the local maximum property
T = PointCloudSet(to_real(torus_samples(256)), "torus", h=0.025)
v = lmp_test(T, np.array([1.0, 0, 1, 0]), 0.25, mode="pshProbe",
             probes=[PshProbe.torus_witness()])
print("torus near (1, 1):", v.kind, "margin", round(v.margin, 4))

# the hull minus the torus passes
cert = hull_lmp_certify(K, Domain.ball(4, np.sqrt(2)), probes, h=0.25, n_points=10,
                        budget=200)
print(f"hull points with the local maximum property: {cert['passed']}/{cert['tested']}")

"""
Probe hulls in C^2, their local maximum property, uniqueness diagnostics for
the Dirichlet problem, and Reinhardt completions in modulus coordinates.

A point ``q`` is excluded from the hull of a compact ``K`` as soon as one
probe ``phi`` satisfies ``phi(q) > max_K phi + tol``.  Finite probe families
can only exclude fewer points than the full class, so every "not excluded"
verdict is an outer approximation of the true hull.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, cKDTree

from .core import (BoundaryData, Domain, ScalarGrid, hopf_samples, sphere_samples,
                   to_complex)

log = logging.getLogger(__name__)

CLASS_TAGS = ("polynomialModulus", "pshQuadratic", "mixed")
CHUNK = 4096


# ---------------------------------------------------------------------------
# probes


def monomial_exponents(deg_max: int) -> np.ndarray:
    """Exponents ``(a, b)`` with ``a + b <= deg_max``, ordered by degree."""
    return np.array([(d - b, b) for d in range(deg_max + 1) for b in range(d + 1)], int)


def monomial_basis(Z: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """Matrix of ``z1**a * z2**b`` with one row per point."""
    top = int(exps.max()) if exps.size else 0
    p1 = Z[:, 0:1] ** np.arange(top + 1)
    p2 = Z[:, 1:2] ** np.arange(top + 1)
    return p1[:, exps[:, 0]] * p2[:, exps[:, 1]]


def as_complex_points(P) -> np.ndarray:
    P = np.asarray(P)
    if np.iscomplexobj(P):
        return np.atleast_2d(P).astype(complex)
    P = np.atleast_2d(P.astype(float))
    if P.shape[1] == 4:
        return to_complex(P)
    if P.shape[1] == 2:
        return P.astype(complex)
    raise ValueError("expected points in C^2 (complex pairs or real 4-vectors)")


@dataclass
class ProbeFamily:
    """
    A finite family of hull probes.

    ``polynomialModulus`` probes are ``|P|`` and ``Re P`` (the latter is
    ``log|exp P|``) for complex polynomials ``P`` of degree at most
    ``deg_max``.  The family always starts with the explicit ``extras`` (by
    default every monomial plus the real linear forms ``Re(+-z_j)``,
    ``Re(+-i z_j)``), followed by ``count`` random polynomials drawn in a
    fixed order from ``seed``: a family with a larger ``count`` contains the
    smaller one as a prefix.  ``pshQuadratic`` means a per-query linear
    programme over ``Re Q + lam |z|^2`` with ``deg Q <= 2`` and ``lam >= 0``.
    """

    class_tag: str = "polynomialModulus"
    deg_max: int = 8
    count: int = 500
    seed: int = 0
    extras: Optional[list] = None
    default_extras: bool = True
    decay: float = 0.5

    def __post_init__(self):
        if self.class_tag not in CLASS_TAGS:
            raise ValueError(f"unknown probe class {self.class_tag!r}")
        if self.count < 1:
            raise ValueError("a probe family needs at least one probe")
        if self.deg_max < 1:
            raise ValueError("deg_max must be at least 1")
        self.exps = monomial_exponents(self.deg_max)
        kinds, coefs, labels = [], [], []
        n = len(self.exps)
        if self.default_extras:
            for i in range(1, n):
                c = np.zeros(n, complex)
                c[i] = 1.0
                kinds.append("mod")
                coefs.append(c)
                labels.append(f"z1^{self.exps[i, 0]} z2^{self.exps[i, 1]}")
            for j in (0, 1):
                idx = 1 + j if self.deg_max >= 1 else None
                for unit, name in ((1, "+"), (-1, "-"), (1j, "+i"), (-1j, "-i")):
                    c = np.zeros(n, complex)
                    c[idx] = unit
                    kinds.append("re")
                    coefs.append(c)
                    labels.append(f"Re({name}z{j + 1})")
        for kind, c in self.extras or []:
            c = np.asarray(c, complex)
            if c.shape != (n,) or kind not in ("mod", "re"):
                raise ValueError("extra probes are (kind, coefficient vector) pairs")
            kinds.append(kind)
            coefs.append(c)
            labels.append("extra")
        rng = np.random.default_rng(self.seed)
        deg = self.exps.sum(axis=1)
        for i in range(self.count):
            kind = "mod" if rng.random() < 0.75 else "re"
            top = int(rng.integers(1, self.deg_max + 1))
            c = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * self.decay ** deg
            c[deg > top] = 0.0
            if kind == "re":
                c[0] = 0.0
            kinds.append(kind)
            coefs.append(c)
            labels.append(f"random#{i}")
        self.kinds = np.array(kinds)
        self.coefs = np.array(coefs).T          # (monomials, probes)
        self.labels = labels

    @property
    def size(self) -> int:
        return self.coefs.shape[1]

    @property
    def uses_polynomials(self) -> bool:
        return self.class_tag in ("polynomialModulus", "mixed")

    @property
    def uses_quadratics(self) -> bool:
        return self.class_tag in ("pshQuadratic", "mixed")

    def evaluate(self, Z: np.ndarray) -> np.ndarray:
        """Probe values, shape (points, probes)."""
        Z = as_complex_points(Z)
        V = monomial_basis(Z, self.exps) @ self.coefs
        return np.where(self.kinds == "mod", np.abs(V), V.real)

    def max_over(self, Z: np.ndarray) -> np.ndarray:
        Z = as_complex_points(Z)
        out = np.full(self.size, -np.inf)
        for s in range(0, len(Z), CHUNK):
            out = np.maximum(out, self.evaluate(Z[s:s + CHUNK]).max(axis=0))
        return out

    def describe(self, i: int) -> dict:
        c = self.coefs[:, i]
        nz = np.nonzero(c)[0]
        return {"index": int(i), "kind": str(self.kinds[i]), "label": self.labels[i],
                "terms": [[int(self.exps[k, 0]), int(self.exps[k, 1]),
                           float(c[k].real), float(c[k].imag)] for k in nz]}


def threshold(M: np.ndarray, rtol: float, atol: float) -> np.ndarray:
    """Largest probe value still compatible with membership."""
    with np.errstate(invalid="ignore"):
        return np.where(np.isfinite(M), M + rtol * np.abs(M) + atol, M)


# ---------------------------------------------------------------------------
# hull membership


@dataclass
class HullResult:
    member: np.ndarray                 # True = not excluded
    witness: np.ndarray                # probe index, -1 when not excluded
    margin: np.ndarray                 # best probe excess over the threshold
    probes: ProbeFamily
    K: np.ndarray
    quad_witness: dict = field(default_factory=dict)
    rtol: float = 1e-3
    atol: float = 1e-9

    def __post_init__(self):
        bad = ~self.member & (self.margin <= 0)
        if np.any(bad):
            raise AssertionError("excluded points must carry a positive margin")

    @property
    def fraction(self) -> float:
        return float(np.mean(self.member)) if self.member.size else 0.0

    def witness_record(self, i: int) -> dict:
        if self.member[i]:
            return {}
        if i in self.quad_witness:
            return {"query": int(i), "margin": float(self.margin[i]),
                    "probe": self.quad_witness[i]}
        return {"query": int(i), "margin": float(self.margin[i]),
                "probe": self.probes.describe(int(self.witness[i]))}


def _quadratic_features(Z: np.ndarray) -> np.ndarray:
    """Real features of ``Re Q`` (``deg Q <= 2``, no constant) and ``|z|^2``."""
    z1, z2 = Z[:, 0], Z[:, 1]
    mons = [z1, z2, z1 * z1, z1 * z2, z2 * z2]
    cols = []
    for m in mons:
        cols += [m.real, -m.imag]          # Re(a m) for a = 1 and a = i
    cols.append(np.abs(z1) ** 2 + np.abs(z2) ** 2)
    return np.stack(cols, -1)


def quadratic_exclusion(K: np.ndarray, q: np.ndarray, tol: float = 1e-7):
    """
    Best psh quadratic separating ``q`` from ``K``.

    Maximizes ``psi(q) - t`` over ``psi = Re Q + lam |z|^2`` with coefficients
    in [-1, 1], ``lam >= 0`` and ``psi <= t`` on ``K``.  Returns the optimal
    margin and the coefficient vector.
    """
    FK = _quadratic_features(K)
    fq = _quadratic_features(q[None, :])[0]
    n = FK.shape[1]
    # variables: coefficients (n), t
    c = -np.concatenate([fq, [-1.0]])
    A = np.hstack([FK, -np.ones((len(FK), 1))])
    b = np.zeros(len(FK))
    bounds = [(-1, 1)] * (n - 1) + [(0, 1), (None, None)]
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if not res.success:
        return 0.0, None
    return float(-res.fun), res.x[:n]


def hull_compute(K, queries, probes: ProbeFamily, rtol: float = 1e-3,
                 atol: float = 1e-9) -> HullResult:
    """
    Probe-hull membership of ``queries`` relative to the sample ``K``.

    Points may be complex pairs or real 4-vectors.  ``rtol`` and ``atol``
    absorb the sampling error of ``max_K``.
    """
    K = as_complex_points(K)
    Q = as_complex_points(queries)
    if len(K) == 0:
        raise ValueError("K must be nonempty")
    nq = len(Q)
    margin = np.full(nq, -np.inf)
    witness = np.full(nq, -1)
    quad = {}
    if probes.uses_polynomials:
        T = threshold(probes.max_over(K), rtol, atol)
        for s in range(0, nq, CHUNK):
            ex = probes.evaluate(Q[s:s + CHUNK]) - T
            i = np.argmax(ex, axis=1)
            margin[s:s + CHUNK] = ex[np.arange(len(i)), i]
            witness[s:s + CHUNK] = i
    if probes.uses_quadratics:
        scale = 1.0 + float(np.max(np.abs(K)) ** 2)
        for j in range(nq):
            if margin[j] > 0:
                continue
            m, coef = quadratic_exclusion(K, Q[j])
            m -= rtol * scale + atol
            if m > margin[j]:
                margin[j] = m
                if m > 0:
                    witness[j] = -2
                    quad[j] = {"kind": "pshQuadratic", "coefficients": coef.tolist()}
    member = margin <= 0
    witness[member] = -1
    return HullResult(member, witness, margin, probes, K, quad, rtol, atol)


# ---------------------------------------------------------------------------
# extremal solutions from level hulls


def sphere_level_sample(dom: Domain, g: BoundaryData, nt: int = 129, na: int = 64):
    """
    Dense boundary points in C^2 with the data ``g`` evaluated on them.

    Balls are sampled on the product lattice of ``nt`` circle radii and
    ``na`` x ``na`` angles (endpoints included); other domains fall back to
    their own boundary samples.
    """
    R = dom.radius if dom.radius is not None else 1.0
    if dom.reduced:
        X = R * hopf_samples(0, nt=nt, na=na, endpoints=True)
        Z = to_complex(X)
        return Z, g.evaluate(np.abs(Z))
    if dom.dims != 4:
        raise ValueError("hull sweeps need a domain in C^2")
    if g.rule == "extension" and dom.radius is not None:
        X = R * hopf_samples(0, nt=nt, na=na, endpoints=True)
        return to_complex(X), g.evaluate(X)
    return to_complex(g.samples), g.values


def _level_maxima(gvals: np.ndarray, levels: np.ndarray, Z: np.ndarray,
                  probes: ProbeFamily) -> tuple:
    """
    Per-level maxima of every probe over ``{g >= c}`` and ``{g <= c}``.

    Samples are sorted by ``g`` once; both bucket indices are monotone in
    that order, so each chunk of probe values is reduced twice.
    """
    nl = len(levels)
    order = np.argsort(gvals, kind="stable")
    Zs, gs = Z[order], gvals[order]
    b_ge = np.searchsorted(levels, gs, side="right")   # in {g >= c_l} for l < b
    b_le = np.searchsorted(levels, gs, side="left")    # in {g <= c_l} for l >= b
    B_ge = np.full((nl + 1, probes.size), -np.inf)
    B_le = np.full((nl + 1, probes.size), -np.inf)
    for s in range(0, len(Zs), CHUNK):
        vals = probes.evaluate(Zs[s:s + CHUNK])
        for B, bb in ((B_ge, b_ge[s:s + CHUNK]), (B_le, b_le[s:s + CHUNK])):
            starts = np.r_[0, np.nonzero(np.diff(bb))[0] + 1]
            red = np.maximum.reduceat(vals, starts, axis=0)
            B[bb[starts]] = np.maximum(B[bb[starts]], red)
    up = np.maximum.accumulate(B_ge[::-1], axis=0)[::-1][1:]
    down = np.maximum.accumulate(B_le, axis=0)[:nl]
    return up, down


def extremal_via_hull_sweep(dom: Domain, g: BoundaryData, c_grid=None,
                            probes: Optional[ProbeFamily] = None, h: float = 1 / 16,
                            sampling=(129, 64), rtol: float = 1e-3,
                            atol: float = 1e-9, grid: Optional[ScalarGrid] = None):
    """
    Lower and upper extremal solutions from the hulls of level sets of ``g``.

    ``u_plus(z)`` is the largest ``c`` in ``c_grid`` with ``z`` in the probe
    hull of ``{g >= c}``, ``u_minus(z)`` the smallest ``c`` with ``z`` in the
    hull of ``{g <= c}``.  Empty families default to ``min g`` and ``max g``.
    On the Reinhardt-reduced ball a node ``(r1, r2)`` stands for the torus of
    moduli ``(|r1|, |r2|)``.
    """
    probes = probes or ProbeFamily()
    Z, gv = sphere_level_sample(dom, g, *sampling)
    gmin, gmax = float(gv.min()), float(gv.max())
    if c_grid is None:
        c_grid = np.linspace(gmin, gmax, 64)
    levels = np.sort(np.asarray(c_grid, float))
    if grid is None:
        grid = dom.grid(h)
    nodes = grid.closure
    P = grid.points(nodes)
    Q = np.abs(P).astype(complex) if dom.reduced else to_complex(P)
    Mp, Mm = _level_maxima(gv, levels, Z, probes)
    Tp = threshold(Mp, rtol, atol)
    Tm = threshold(Mm, rtol, atol)
    nl = len(levels)
    up = np.full(len(Q), nl)
    lo = np.zeros(len(Q), int)
    for s in range(0, len(Q), CHUNK):
        V = probes.evaluate(Q[s:s + CHUNK])
        cu = np.full(len(V), nl)
        cl = np.zeros(len(V), int)
        for p in range(probes.size):
            # member of {g >= c_l} for l < count; thresholds decrease in l
            cu = np.minimum(cu, np.searchsorted(-Tp[:, p], -V[:, p], side="right"))
            # member of {g <= c_l} for l >= first; thresholds increase in l
            cl = np.maximum(cl, np.searchsorted(Tm[:, p], V[:, p], side="left"))
        up[s:s + CHUNK] = cu
        lo[s:s + CHUNK] = cl
    uplus = np.where(up >= 1, levels[np.maximum(up - 1, 0)], gmin)
    uminus = np.where(lo < nl, levels[np.minimum(lo, nl - 1)], gmax)
    fp = grid.copy(np.zeros(grid.shape))
    fm = grid.copy(np.zeros(grid.shape))
    fp.values[nodes] = uplus
    fm.values[nodes] = uminus
    return fm, fp


# ---------------------------------------------------------------------------
# diagnostics built on hulls


def hull_lmp_certify(S, dom: Domain, probes: Optional[ProbeFamily] = None,
                     h: float = 0.2, n_points: int = 50, radius: float = 0.25,
                     budget: int = 500, seed: int = 0, rtol: float = 1e-3) -> dict:
    """
    Local maximum property of the probe hull of ``S`` away from ``S``.

    The hull is computed on the grid of ``dom`` with spacing ``h``; at
    ``n_points`` hull nodes (drawn with ``seed``) at distance at least
    ``radius`` from ``S`` a polynomial-mode ``lmp_test`` is run on points
    sampled from the hull around the node.
    """
    from .geometry import PointCloudSet, lmp_test

    probes = probes or ProbeFamily()
    S = as_complex_points(S)
    grid = dom.grid(h)
    P = grid.points(grid.closure)
    res = hull_compute(S, P, probes, rtol=rtol)
    H = P[res.member]
    dist, _ = cKDTree(np.hstack([S.real, S.imag])[:, [0, 2, 1, 3]]).query(H)
    cand = H[dist > radius]
    rng = np.random.default_rng(seed)
    out = {"hull_nodes": int(len(H)), "candidates": int(len(cand)), "tested": 0,
           "passed": 0, "failed": 0, "inconclusive": 0, "witnesses": [],
           "budget": budget, "seed": seed, "vacuous": len(cand) == 0}
    if len(cand) == 0:
        return out
    pick = rng.choice(len(cand), size=min(n_points, len(cand)), replace=False)
    for k, i in enumerate(np.sort(pick)):
        c = cand[i]
        cloud = _local_hull_cloud(S, c, radius, probes, rng, rtol)
        X = PointCloudSet(cloud, "hull", 0.0, 0.0, h=radius / 8)
        v = lmp_test(X, c, radius, mode="polynomial", budget=budget, seed=seed + k)
        out["tested"] += 1
        out[{"pass": "passed", "fail": "failed"}.get(v.kind, "inconclusive")] += 1
        if v.kind == "fail":
            out["witnesses"].append(v.to_json())
    out["pass_rate"] = out["passed"] / out["tested"]
    return out


def _local_hull_cloud(S, c, radius, probes, rng, rtol, n=3000):
    """Random points of the ball around ``c`` that the probes do not exclude."""
    d = rng.standard_normal((n, 4))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = np.empty(n)
    r[: n // 2] = radius * (1 - 0.25 * rng.random(n // 2))    # shell half
    r[n // 2:] = radius * 0.75 * rng.random(n - n // 2) ** 0.25
    pts = c + r[:, None] * d
    keep = hull_compute(S, pts, probes, rtol=rtol).member
    return pts[keep]


def level_hull_masks(g: BoundaryData, levels, probes: ProbeFamily, grid: ScalarGrid,
                     band: float, sampling=(129, 64), rtol: float = 1e-3) -> list:
    """Probe hulls of ``{|g - c| <= band}`` on the closure nodes of ``grid``."""
    Z, gv = sphere_level_sample(g.domain, g, *sampling)
    P = grid.points(grid.closure)
    masks = []
    for c in levels:
        sel = np.abs(gv - c) <= band
        m = np.zeros(grid.shape, bool)
        if np.any(sel):
            m[grid.closure] = hull_compute(Z[sel], P, probes, rtol=rtol).member
        masks.append(m)
    return masks


def uniqueness_diagnostics(g: BoundaryData, levels: Sequence[float],
                           probes: Optional[ProbeFamily] = None, h: float = 1 / 8,
                           band: Optional[float] = None, sampling=(129, 64),
                           rtol: float = 1e-3) -> dict:
    """
    Hull-based uniqueness conditions for the Dirichlet problem with data ``g``.

    ``sufficientHolds``: every level hull has empty grid interior (no node
    whose full 3^4 neighbourhood is in the hull).  ``pairwiseDisjoint``: hulls
    of distinct levels share no node.  ``necessaryHolds``: each hull meets the
    domain closure only in a set without interior or is disjoint from the
    others, reported as the conjunction of the per-level checks.
    """
    probes = probes or ProbeFamily()
    grid = g.domain.grid(h)
    band = h / 4 if band is None else band
    levels = list(levels)
    masks = level_hull_masks(g, levels, probes, grid, band, sampling, rtol)
    st = np.ones((3,) * grid.dims, bool)
    interiors = [bool(np.any(ndimage.binary_erosion(m, st))) for m in masks]
    overlaps = []
    for i in range(len(levels)):
        for j in range(i + 1, len(levels)):
            if abs(levels[i] - levels[j]) > 2 * band and np.any(masks[i] & masks[j]):
                overlaps.append((levels[i], levels[j], int(np.sum(masks[i] & masks[j]))))
    disjoint = not overlaps
    return {"levels": levels, "band": band, "hull_nodes": [int(m.sum()) for m in masks],
            "interior_nonempty": interiors, "sufficientHolds": not any(interiors),
            "pairwiseDisjoint": disjoint, "overlaps": overlaps,
            "necessaryHolds": disjoint, "masks": masks, "grid": grid}


def lattice_components(sel: np.ndarray) -> int:
    """
    Components of a selection on the ``(t, a, b)`` sampling lattice of S^3.

    Neighbours are taken along each lattice axis, periodically in the two
    angles; the degenerate circles at ``t = 0`` and ``t = pi/2`` are joined
    by the angular edges.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    idx = np.full(sel.shape, -1)
    idx[sel] = np.arange(int(sel.sum()))
    rows, cols = [], []
    for axis, wrap in ((0, False), (1, True), (2, True)):
        nb = np.roll(idx, -1, axis=axis)
        ok = (idx >= 0) & (nb >= 0)
        if not wrap:
            edge = [slice(None)] * 3
            edge[axis] = -1
            ok[tuple(edge)] = False
        rows.append(idx[ok])
        cols.append(nb[ok])
    n = int(sel.sum())
    if n == 0:
        return 0
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    A = coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    return int(connected_components(A, directed=False)[0])


def maximal_element_check(g: BoundaryData, u: ScalarGrid, probes: Optional[ProbeFamily] = None,
                          band: Optional[float] = None, sampling=(65, 64),
                          rtol: float = 1e-3, zero_tol: Optional[float] = None) -> dict:
    """
    Compare the zero set of a solution with the hull of ``S = {g = 0}``.

    ``S`` is sampled as the boundary band ``{|g| <= band}``.  Reports the
    nodes of ``{|u| <= zero_tol}`` outside its probe hull (should be none),
    the hull nodes where ``|u|`` exceeds the band, and the symmetric
    difference of ``{|u| <= band}`` and the hull as a fraction of the
    closure.  ``S`` must split the boundary in two.
    """
    probes = probes or ProbeFamily()
    band = 2 * u.h if band is None else band
    dom = g.domain
    nt, na = sampling
    Z, gv = sphere_level_sample(dom, g, nt, na)
    off = np.abs(gv) > band
    ncomp = lattice_components(off.reshape(nt, na, na))
    if ncomp != 2:
        raise ValueError(f"S does not divide the boundary (found {ncomp} components)")
    S = Z[~off]
    nodes = u.closure
    P = u.points(nodes)
    hull = hull_compute(S, P, probes, rtol=rtol).member
    vals = np.abs(u.values[nodes])
    if zero_tol is None:
        zero_tol = 1e-6 * (1.0 + float(vals.max()))
    zero = vals <= zero_tol
    near = vals <= band
    zero_outside = zero & ~hull
    hull_off = hull & ~near
    return {"zero_nodes": int(zero.sum()), "hull_nodes": int(hull.sum()),
            "zero_outside_hull": int(zero_outside.sum()),
            "hull_outside_zero": int(hull_off.sum()),
            "symmetric_difference": float(np.mean(near ^ hull)),
            "inclusion_holds": not bool(np.any(zero_outside)), "band": band,
            "zero_tol": zero_tol, "components": ncomp}


def graph_hull_compare(v: ScalarGrid, g: BoundaryData, probes: Optional[ProbeFamily] = None,
                       band: float = 0.05, offsets=(0.1, 0.2, 0.4), rtol: float = 1e-2) -> dict:
    """
    Hull of the boundary graph versus the graph of a solution over ``D``.

    Points ``(x, v(x))`` must not be excluded by the probe hull of
    ``{(x, g(x)) : x in bD}``; points displaced vertically by more than
    ``band`` must be excluded.  The default probes are the ``mixed`` class:
    the graph of affine data is a piece of a real hyperplane ``{Re L = 0}``
    and only the linear part of the quadratic LP separates points off it.  The
    looser ``rtol`` absorbs the gap between the boundary sample and grid
    nodes lying on ``bD``, where degree-8 moduli peak.
    """
    probes = probes or ProbeFamily(class_tag="mixed")
    xb = g.samples
    Kg = np.hstack([xb, g.values[:, None]])
    nodes = v.closure
    P = v.points(nodes)
    vals = v.values[nodes]
    G = np.hstack([P, vals[:, None]])
    on = hull_compute(Kg, G, probes, rtol=rtol)
    inner = v.interior[nodes]
    off = []
    for d in offsets:
        for sgn in (1.0, -1.0):
            off.append(np.hstack([P[inner], (vals[inner] + sgn * d)[:, None]]))
    off = np.vstack(off) if off else np.zeros((0, 4))
    res = hull_compute(Kg, off, probes, rtol=rtol)
    return {"graph_points": int(len(G)), "graph_in_hull": int(on.member.sum()),
            "graph_contained": bool(np.all(on.member)),
            "offset_points": int(len(off)), "offset_not_excluded": int(res.member.sum()),
            "band_holds": not bool(np.any(res.member)), "band": band,
            "offsets": list(offsets)}


# ---------------------------------------------------------------------------
# Reinhardt regions


@dataclass
class ReinhardtRegion:
    """Boolean mask on the node grid ``r_k = i * rmax_k / (n_k - 1)``."""

    mask: np.ndarray
    rmax: tuple = (1.25, 1.25)

    def __post_init__(self):
        self.mask = np.asarray(self.mask, bool)
        if self.mask.ndim != 2:
            raise ValueError("Reinhardt masks are two dimensional")

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    def axes(self) -> tuple:
        n1, n2 = self.shape
        return (np.linspace(0, self.rmax[0], n1), np.linspace(0, self.rmax[1], n2))

    @property
    def cell(self) -> float:
        return max(self.rmax[0] / (self.shape[0] - 1), self.rmax[1] / (self.shape[1] - 1))

    def copy(self, mask=None) -> "ReinhardtRegion":
        return ReinhardtRegion(self.mask.copy() if mask is None else mask, self.rmax)

    @classmethod
    def from_predicate(cls, pred, n: int = 512, rmax=(1.25, 1.25)) -> "ReinhardtRegion":
        r1 = np.linspace(0, rmax[0], n)
        r2 = np.linspace(0, rmax[1], n)
        R1, R2 = np.meshgrid(r1, r2, indexing="ij")
        return cls(pred(R1, R2), tuple(rmax))

    @classmethod
    def v_eps(cls, eps: float, n: int = 512, rmax=(1.25, 1.25)) -> "ReinhardtRegion":
        """``{| |z1| - |z2| | < eps, |z1|, |z2| <= 1}``."""
        return cls.from_predicate(lambda a, b: (np.abs(a - b) < eps) & (a <= 1) & (b <= 1),
                                  n, rmax)

    @classmethod
    def bidisc(cls, radius: float = 1.0, n: int = 512, rmax=(1.25, 1.25)) -> "ReinhardtRegion":
        return cls.from_predicate(lambda a, b: (a <= radius) & (b <= radius), n, rmax)

    def within_one_cell(self, other: "ReinhardtRegion") -> bool:
        """Symmetric difference contained in the one-cell dilation of both masks."""
        st = np.ones((3, 3), bool)
        a, b = self.mask, other.mask
        return bool(np.all(a <= ndimage.binary_dilation(b, st))
                    and np.all(b <= ndimage.binary_dilation(a, st)))

    def to_pbm(self) -> str:
        """P1 bitmap: ``r1`` along the width, largest ``r2`` in the top row."""
        n1, n2 = self.shape
        rows = self.mask.T[::-1].astype(int)
        lines = ["P1", f"# rmax {float(self.rmax[0])!r} {float(self.rmax[1])!r}", f"{n1} {n2}"]
        lines += [" ".join(map(str, row)) for row in rows]
        return "\n".join(lines) + "\n"

    def save_pbm(self, path):
        Path(path).write_text(self.to_pbm())

    @classmethod
    def from_pbm(cls, text: str) -> "ReinhardtRegion":
        rmax = (1.25, 1.25)
        tokens = []
        lines = text.splitlines()
        if not lines or lines[0].strip() != "P1":
            raise ValueError("not a P1 bitmap")
        for line in lines[1:]:
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 3 and parts[0] == "rmax":
                    rmax = (float(parts[1]), float(parts[2]))
                continue
            tokens += line.split()
        n1, n2 = int(tokens[0]), int(tokens[1])
        bits = np.array(tokens[2:2 + n1 * n2], int).reshape(n2, n1)
        return cls(bits[::-1].T.astype(bool), rmax)

    @classmethod
    def load_pbm(cls, path) -> "ReinhardtRegion":
        return cls.from_pbm(Path(path).read_text())


LOG_FLOOR = -40.0


def monotone_fill(mask: np.ndarray, complete=(True, True)) -> np.ndarray:
    """Add every node dominated by a node of ``mask`` along the flagged axes."""
    m = mask[::-1, ::-1]
    for ax in (0, 1):
        if complete[ax]:
            m = np.logical_or.accumulate(m, axis=ax)
    return m[::-1, ::-1]


def log_convex_hull(R: ReinhardtRegion, complete=(True, True)) -> ReinhardtRegion:
    """
    Logarithmically convex, monotone completion of a Reinhardt mask.

    Nodes go to ``(log r1, log r2)`` with ``log 0`` clamped at -40; the
    result is every node whose log image lies in the convex hull of the log
    image of the mask, followed by the monotone fill.  ``complete[j]`` enables
    the fill towards ``r_j = 0``; switch it off when the region does not meet
    ``{z_j = 0}`` (Laurent rather than power series in ``z_j``).
    """
    if not R.mask.any():
        raise ValueError("empty Reinhardt region")
    r1, r2 = R.axes()
    with np.errstate(divide="ignore"):
        l1 = np.maximum(np.log(r1), LOG_FLOOR)
        l2 = np.maximum(np.log(r2), LOG_FLOOR)
    L1, L2 = np.meshgrid(l1, l2, indexing="ij")
    pts = np.stack([L1[R.mask], L2[R.mask]], -1)
    pts = np.unique(pts, axis=0)
    out = R.mask.copy()
    if len(pts) >= 3:
        try:
            hull = ConvexHull(pts)
            eq = hull.equations
            allp = np.stack([L1.ravel(), L2.ravel()], -1)
            tol = 1e-9 * (1.0 - LOG_FLOOR)
            inside = np.all(allp @ eq[:, :2].T + eq[:, 2] <= tol, axis=1)
            out |= inside.reshape(R.shape)
        except Exception:                   # degenerate (collinear) point sets
            log.debug("log hull degenerate; using monotone fill only")
    return R.copy(monotone_fill(out, complete))


def _largest_square(mask: np.ndarray, radii: np.ndarray) -> int:
    """Largest ``m`` with ``mask[:m, :m]`` entirely true."""
    n = min(mask.shape)
    m = 0
    while m < n and mask[m, : m + 1].all() and mask[: m + 1, m].all():
        m += 1
    return m


def hartogs_completion(R: ReinhardtRegion, eps: float, max_steps: int = 10000):
    """
    Grow ``A_M = V_eps u {|z1|, |z2| < M}`` with Hartogs figures.

    Each step takes ``M'`` (largest bidisc of nodes inside the current mask),
    checks that the Hartogs set ``H1 u H2`` with ``|alpha| = M' - eps/4``
    lies in the mask, attaches the rectangle swept by the bidiscs
    ``{|z1 - alpha| < eps/3, |z2| < M' + eps/12}`` and then does the same
    with the coordinates exchanged.  Radii are clamped at 1.  Returns the
    fixed point and the trace of ``M'`` per double step.
    """
    r1, r2 = R.axes()
    if not np.allclose(r1, r2):
        raise ValueError("hartogs_completion needs a square modulus grid")
    r = r1
    mask = R.mask.copy()
    cell = R.cell
    tol = 1e-12
    trace = []

    def nodes(lo, hi, closed_hi):
        sel = r > lo + tol
        sel &= (r <= hi + tol) if closed_hi else (r < hi - tol)
        return sel

    def nearest(x):
        return int(np.argmin(np.abs(r - x)))

    steps = 0
    while steps < max_steps:
        m = _largest_square(mask, r)
        Mp = r[m] if m < len(r) else np.inf
        if Mp > 1.0 + tol or m >= len(r):
            break
        trace.append(float(Mp))
        top = min(Mp + eps / 12, 1.0)
        closed = top >= 1.0 - tol
        a = max(Mp - eps / 4, 0.0)
        ia = nearest(a)
        for swap in (False, True):
            M = mask.T if swap else mask
            below = r <= top + tol
            h1 = M[ia, below]
            h2_rows = (r >= a - eps / 3 - tol) & (r <= a + eps / 3 + tol) & (r <= 1.0 + tol)
            it = int(np.nonzero(below)[0][-1])
            h2 = M[h2_rows, it]
            if not (h1.all() and h2.all()):
                raise RuntimeError(f"Hartogs figure not contained in the region at M'={Mp:.4f}; "
                                   f"trace={trace}")
            rows = nodes(Mp - 7 * eps / 12, top, closed)
            cols = nodes(-1.0, top, closed)
            M[np.ix_(rows, cols)] = True
        steps += 1
        m2 = _largest_square(mask, r)
        new = r[m2] if m2 < len(r) else np.inf
        if new < Mp + eps / 12 - cell and new <= 1.0:
            raise RuntimeError(f"stalled progress at M'={Mp:.4f}; trace={trace}")
    return R.copy(mask), trace


def save_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")

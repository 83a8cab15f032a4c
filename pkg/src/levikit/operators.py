"""
Pointwise Levi-type operators and viscosity spot tests.

All operators are degenerate elliptic: for fixed gradient they are
non-decreasing in the Hessian.  They are linear in the Hessian, so each one is
represented by a coefficient matrix ``A(Du)`` plus a lower-order term, which is
what the relaxation solver consumes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (INTERIOR, ComplexJet2, DimensionError, InvariantError, Jet2,
                   ScalarGrid, StencilError, complex_gradient, complex_hessian,
                   real_to_complex_jet)

# Graph operator curvature coefficient.  With 2 the sphere of radius R
# solves L(v; 1/R) = 0; with 1 (the raw printed form) it needs k = 2/R.
CURVATURE_FACTOR = 2.0

# Constant relating the graph operator to the Levi operator of v - x4.
BRIDGE_FACTOR = 16.0


# ---------------------------------------------------------------------------
# Levi operator in C^2


def levi_full(j: ComplexJet2) -> float:
    """Levi operator sum_{a,b} (delta_ab |du|^2 - u_abar u_b) u_{a bbar}."""
    j.check()
    w = j.dz
    n2 = float(np.sum(np.abs(w) ** 2))
    C = n2 * np.eye(2) - np.outer(j.dzbar, w)
    return float(np.real(np.sum(C * j.mixed)))


def levi_determinant(j: ComplexJet2) -> float:
    """Same quantity as ``levi_full`` written as minus a bordered determinant."""
    M = np.array([[0, j.dz[0], j.dz[1]],
                  [j.dzbar[0], j.mixed[0, 0], j.mixed[1, 0]],
                  [j.dzbar[1], j.mixed[0, 1], j.mixed[1, 1]]], dtype=complex)
    return float(np.real(-np.linalg.det(M)))


def dbar_norm(j: ComplexJet2) -> float:
    return float(np.sqrt(np.sum(np.abs(j.dz) ** 2)))


def levi_complete(j: ComplexJet2, kval: float) -> float:
    """Complete Levi operator ``levi_full(j) - k |du|^3``."""
    base = levi_full(j)
    if kval == 0:
        return base
    return base - kval * dbar_norm(j) ** 3


def levi_coefficients(grad: np.ndarray) -> np.ndarray:
    """
    Real 4x4 matrix ``A`` with ``levi_full = sum A_ij u_ij``.

    ``grad`` has shape (..., 4); the result has shape (..., 4, 4).
    """
    w = complex_gradient(grad)
    n2 = np.sum(np.abs(w) ** 2, axis=-1)
    C = n2[..., None, None] * np.eye(2) - w.conj()[..., :, None] * w[..., None, :]
    A = np.zeros(grad.shape[:-1] + (4, 4))
    for a in range(2):
        for b in range(2):
            i, j = 2 * a, 2 * a + 1
            k, l = 2 * b, 2 * b + 1
            re, im = 0.25 * C[..., a, b].real, 0.25 * C[..., a, b].imag
            A[..., i, k] += re
            A[..., j, l] += re
            A[..., i, l] -= im
            A[..., j, k] += im
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def levi_real(grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """Vectorized Levi operator from real derivatives (..., 4) and (..., 4, 4)."""
    return np.einsum("...ij,...ij->...", levi_coefficients(grad), hess)


# ---------------------------------------------------------------------------
# graph operator over R^3


def graph_coefficients(grad: np.ndarray) -> np.ndarray:
    """Coefficient matrix of the graph operator, shape (..., 3, 3)."""
    v1, v2, v3 = grad[..., 0], grad[..., 1], grad[..., 2]
    A = np.zeros(grad.shape[:-1] + (3, 3))
    A[..., 0, 0] = A[..., 1, 1] = 1 + v3 ** 2
    A[..., 2, 2] = v1 ** 2 + v2 ** 2
    A[..., 0, 2] = A[..., 2, 0] = v2 - v1 * v3
    A[..., 1, 2] = A[..., 2, 1] = -(v1 + v2 * v3)
    return A


def graph_weight(grad: np.ndarray) -> np.ndarray:
    """``(1 + |Dv|^2)^{3/2}``."""
    return (1.0 + np.sum(grad ** 2, axis=-1)) ** 1.5


def levi_graph(j: Jet2, kval: Optional[float] = None, raw: bool = False) -> float:
    """
    Levi operator for the graph ``{x4 = v}`` over a domain of R^3.

    Without ``kval`` this is the pure second-order expression.  With ``kval``
    the curvature term ``c k (1 + |Dv|^2)^{3/2}`` is added, ``c = 2``
    (sphere of radius R has curvature 1/R) or ``c = 1`` when ``raw``.
    """
    if j.dims != 3:
        raise DimensionError("graph operator is defined over R^3")
    val = float(np.sum(graph_coefficients(j.grad) * j.hess))
    if kval is not None:
        c = 1.0 if raw else CURVATURE_FACTOR
        val += c * kval * float(graph_weight(j.grad))
    return val


def graph_real(grad, hess, kval=None, raw: bool = False) -> np.ndarray:
    val = np.einsum("...ij,...ij->...", graph_coefficients(grad), hess)
    if kval is not None:
        c = 1.0 if raw else CURVATURE_FACTOR
        val = val + c * kval * graph_weight(grad)
    return val


def lift_graph_jet(j: Jet2) -> Jet2:
    """Jet of ``v(x1, x2, x3) - x4`` at ``(x, v(x))`` in R^4."""
    if j.dims != 3:
        raise DimensionError("expected a jet over R^3")
    H = np.zeros((4, 4))
    H[:3, :3] = j.hess
    pt = np.append(j.point, j.value)
    return Jet2(pt, 0.0, np.append(j.grad, -1.0), H)


def identity_residual(v, point=None) -> float:
    """
    ``|L(v) - 16 Levi(v - x4)|`` at a point.

    ``v`` is either a ``Jet2`` over R^3 or a callable, in which case its jet is
    taken by central differences at ``point`` (both sides see the same jet).
    """
    if not isinstance(v, Jet2):
        from .core import jet_of
        v = jet_of(v, point)
    lhs = levi_graph(v)
    rhs = BRIDGE_FACTOR * levi_full(real_to_complex_jet(lift_graph_jet(v)))
    return abs(lhs - rhs)


def sphere_cap_jet(R: float, x) -> Jet2:
    """Exact jet of ``(R^2 - |x|^2)^{1/2}`` at ``x`` in R^3."""
    x = np.asarray(x, float)
    s2 = R * R - x @ x
    if s2 <= 0:
        raise ValueError("point outside the ball")
    s = np.sqrt(s2)
    grad = -x / s
    hess = -np.eye(3) / s - np.outer(x, x) / s ** 3
    return Jet2(x, s, grad, hess)


def random_cubic_jet(rng: np.random.Generator, scale: float = 1.0) -> tuple:
    """Exact jet of a random cubic polynomial in R^3 at a random point.

    Returns ``(jet, coeffs)`` where ``coeffs`` maps exponent tuples to values.
    """
    exps = [e for e in itertools.product(range(4), repeat=3) if sum(e) <= 3]
    coeffs = {e: scale * rng.normal() for e in exps}
    x = rng.uniform(-1, 1, 3)
    val = 0.0
    grad = np.zeros(3)
    hess = np.zeros((3, 3))
    for e, c in coeffs.items():
        e = np.array(e)
        val += c * np.prod(x ** e)
        for i in range(3):
            if e[i] == 0:
                continue
            ei = e.copy()
            ei[i] -= 1
            grad[i] += c * e[i] * np.prod(x ** ei)
            for k in range(3):
                if ei[k] == 0:
                    continue
                ek = ei.copy()
                ek[k] -= 1
                hess[i, k] += c * e[i] * ei[k] * np.prod(x ** ek)
    return Jet2(x, val, grad, hess), coeffs


# ---------------------------------------------------------------------------
# operator selection


@dataclass
class OperatorKind:
    """
    Which operator to evaluate.

    ``tag`` is one of ``LeviFull``, ``LeviComplete`` (4D fields), ``Graph``,
    ``GraphK`` (3D fields).  ``k(x, t)`` is required for the two curvature
    variants; ``x`` is the base point and ``t`` the function value.
    """

    tag: str
    k: Optional[Callable] = None
    raw: bool = False

    TAGS = ("LeviFull", "LeviComplete", "Graph", "GraphK")

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ValueError(f"unknown operator {self.tag!r}")
        needs_k = self.tag in ("LeviComplete", "GraphK")
        if needs_k != (self.k is not None):
            raise ValueError(f"{self.tag}: curvature callable required iff curvature variant")

    @property
    def dims(self) -> int:
        return 4 if self.tag.startswith("Levi") else 3

    def kvalue(self, x, t):
        return self.k(np.asarray(x, float), t)

    def check(self, points: np.ndarray, values: np.ndarray):
        """Sampled finiteness check of the curvature function."""
        if self.k is None:
            return
        kv = np.array([self.kvalue(p, t) for p, t in zip(points, values)], float)
        if not np.all(np.isfinite(kv)):
            raise InvariantError("curvature function is not finite on the region")

    def __call__(self, j: Jet2) -> float:
        if j.dims != self.dims:
            raise DimensionError(f"{self.tag} needs a jet over R^{self.dims}")
        if self.tag == "LeviFull":
            return levi_full(real_to_complex_jet(j))
        if self.tag == "LeviComplete":
            return levi_complete(real_to_complex_jet(j), self.kvalue(j.point, j.value))
        if self.tag == "Graph":
            return levi_graph(j)
        return levi_graph(j, self.kvalue(j.point, j.value), raw=self.raw)


# ---------------------------------------------------------------------------
# viscosity spot tests


@dataclass
class ViscosityVerdict:
    """
    Outcome of a touching-quadratic test at one node.

    ``kind`` is ``both``, ``subsolution-ok``, ``supersolution-ok``,
    ``violated`` or ``inconclusive``.  ``margin`` is the largest violation
    over all probes (positive beyond ``tol`` means violated; NaN when the
    local fit was degenerate).
    """

    kind: str
    margin: float
    tol: float
    sub_ok: Optional[bool] = None
    super_ok: Optional[bool] = None
    witness: Optional[dict] = None
    probes: int = 0
    seed: int = 0

    def __post_init__(self):
        if (self.kind == "violated") != (self.witness is not None):
            raise InvariantError("violated verdicts carry a witness, others do not")


def _stencil(d: int) -> np.ndarray:
    return np.array(list(itertools.product((-1, 0, 1), repeat=d)))


def _quadratic_design(D: np.ndarray) -> tuple:
    d = D.shape[1]
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    cols = [np.ones(len(D))] + [D[:, i] for i in range(d)]
    for i, j in pairs:
        cols.append(0.5 * D[:, i] ** 2 if i == j else D[:, i] * D[:, j])
    return np.stack(cols, 1), pairs


def _psd_part(J: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(J)
    return (V * np.maximum(w, 0)) @ V.T


def viscosity_classify(field: ScalarGrid, node, op: OperatorKind, probe_budget: int = 16,
                       seed: int = 0, mode: str = "both",
                       jitter: float = 0.1) -> ViscosityVerdict:
    """
    Test the sub/supersolution inequalities with touching quadratics.

    A quadratic is fitted by least squares on the 3^d neighbourhood of
    ``node``.  Probe 0 is the fit itself; the other ``probe_budget`` probes
    add a Gaussian curvature jitter (its positive part for the subsolution
    side, the negative of it for the supersolution side).  Each probe is then
    shifted by a multiple of the identity so that ``field - phi`` has a
    discrete local maximum (sub) or minimum (super) at the node.
    """
    if probe_budget < 1:
        raise ValueError("probe_budget must be at least 1")
    if mode not in ("both", "sub", "super"):
        raise ValueError(mode)
    node = tuple(int(k) for k in node)
    d = field.dims
    if d != op.dims:
        raise DimensionError("operator and field dimensions differ")
    if field.mask[node] != INTERIOR:
        raise StencilError(f"node {node} is not interior")
    offs = _stencil(d)
    idx = tuple((np.array(node)[None, :] + offs).T)
    f = field.values[idx]
    f0 = field.values[node]
    D = offs * field.h
    X, pairs = _quadratic_design(D)
    coef, _, rank, sv = np.linalg.lstsq(X, f, rcond=None)
    nan_verdict = ViscosityVerdict("inconclusive", float("nan"), float("nan"),
                                   probes=0, seed=seed)
    if rank < X.shape[1] or sv[-1] < 1e-12 * sv[0]:
        return nan_verdict
    grad = coef[1:1 + d]
    H = np.zeros((d, d))
    for c, (i, j) in zip(coef[1 + d:], pairs):
        H[i, j] = H[j, i] = c
    if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(H))):
        return nan_verdict
    hnorm = float(np.linalg.norm(H, 2))
    tol = 1e-6 * (1.0 + hnorm)
    rng = np.random.default_rng(seed)
    jits = [np.zeros((d, d))]
    for _ in range(probe_budget):
        J = rng.normal(scale=jitter * (1.0 + hnorm), size=(d, d))
        jits.append(_psd_part(0.5 * (J + J.T)))
    nrm2 = np.sum(D ** 2, axis=1)
    nz = nrm2 > 0
    base_r = f - f0 - D @ grad
    x0 = field.point(node)
    worst = {"sub": -np.inf, "super": -np.inf}
    witness = None
    sides = ("sub", "super") if mode == "both" else (mode,)
    for side in sides:
        sgn = 1.0 if side == "sub" else -1.0
        for J in jits:
            Hp = H + sgn * J
            r = base_r - 0.5 * np.einsum("ni,ij,nj->n", D, Hp, D)
            # sub: need r <= 0 (max at node); super: need r >= 0
            need = np.max(sgn * 2 * r[nz] / nrm2[nz])
            mu = max(0.0, float(need))
            Hp = Hp + sgn * mu * np.eye(d)
            val = op(Jet2(x0, f0, grad, Hp))
            viol = -val if side == "sub" else val
            if viol > worst[side]:
                worst[side] = viol
                if viol > tol and (witness is None or viol > witness["margin"]):
                    witness = {"side": side, "point": x0.tolist(), "value": float(f0),
                               "grad": grad.tolist(), "hess": Hp.tolist(),
                               "op": float(val), "margin": float(viol)}
    sub_ok = worst["sub"] <= tol if "sub" in sides else None
    super_ok = worst["super"] <= tol if "super" in sides else None
    margin = max(worst[s] for s in sides)
    if witness is not None:
        kind = "violated"
    elif mode == "both":
        kind = "both"
    else:
        kind = "subsolution-ok" if mode == "sub" else "supersolution-ok"
    return ViscosityVerdict(kind, float(margin), tol, sub_ok, super_ok, witness,
                            probes=len(jits), seed=seed)


def operator_on_grid(field: ScalarGrid, op: OperatorKind) -> np.ndarray:
    """Operator applied with central differences; NaN off the interior."""
    from .core import fd_derivatives
    grad, hess = fd_derivatives(field.values, field.h)
    g = np.moveaxis(grad, 0, -1)
    H = np.moveaxis(np.moveaxis(hess, 0, -1), 0, -1)
    if op.tag.startswith("Levi"):
        val = levi_real(g, H)
        if op.tag == "LeviComplete":
            w = complex_gradient(g)
            kk = _k_on_grid(field, op)
            val = val - kk * np.sum(np.abs(w) ** 2, axis=-1) ** 1.5
    else:
        val = graph_real(g, H)
        if op.tag == "GraphK":
            c = 1.0 if op.raw else CURVATURE_FACTOR
            val = val + c * _k_on_grid(field, op) * graph_weight(g)
    out = np.full(field.shape, np.nan)
    inner = tuple(slice(1, n - 1) for n in field.shape)
    out[inner] = val
    out[field.mask != INTERIOR] = np.nan
    return out


def _k_on_grid(field: ScalarGrid, op: OperatorKind) -> np.ndarray:
    inner = tuple(slice(1, n - 1) for n in field.shape)
    X = np.stack([c[inner] for c in field.coords()], -1)
    T = field.values[inner]
    return np.vectorize(lambda *a: op.k(np.array(a[:-1]), a[-1]))(
        *[X[..., i] for i in range(field.dims)], T)

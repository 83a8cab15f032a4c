"""
Dirichlet solvers, extremal solutions from hull sweeps, and the
maximum-principle / curvature-bound checks applied to their output.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (BOUNDARY, INTERIOR, BoundaryData, Domain, ScalarGrid,
                   csv_summary, dump_grid, fd_derivatives)
from .operators import (CURVATURE_FACTOR, graph_coefficients, graph_weight,
                        levi_coefficients)

log = logging.getLogger(__name__)


@dataclass
class SchemeConfig:
    """
    Parameters of the vanishing-viscosity relaxation.

    The discrete equation at an interior node is
    ``A(Du) : D^2 u + f(x, u, Du) + eps * h**visc_power * Lap_h u = 0``
    with central differences.  ``method="sor"`` (default) relaxes it with
    multicolour successive over-relaxation, ``relaxation`` in (0, 2);
    ``method="jacobi"`` uses damped Jacobi sweeps, ``relaxation`` in (0, 1].
    """

    viscosity_seq: Sequence[float] = (1e-1, 3e-2, 1e-2, 3e-3)
    max_iters: int = 20000
    convergence_tol: float = 1e-9
    relaxation: float = 1.9
    seed: int = 0
    visc_power: float = 2.0
    blowup: float = 1e6
    method: str = "sor"

    def __post_init__(self):
        seq = np.asarray(self.viscosity_seq, float)
        if seq.size == 0 or np.any(seq <= 0) or np.any(np.diff(seq) >= 0):
            raise ValueError("viscosity sequence must be positive and strictly decreasing")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.method not in ("jacobi", "sor"):
            raise ValueError(f"unknown method {self.method!r}")
        top = 1.0 if self.method == "jacobi" else 2.0
        if not 0 < self.relaxation <= top or (top == 2.0 and self.relaxation == 2.0):
            raise ValueError(f"relaxation factor out of range for {self.method}")
        self.viscosity_seq = tuple(float(e) for e in seq)


@dataclass
class SolveReport:
    field: ScalarGrid
    stages: list = field(default_factory=list)   # (eps, iterations, residual)
    iterations: int = 0
    converged: bool = False
    diverged: bool = False
    principle_checks: dict = field(default_factory=dict)
    tol: float = 0.0
    relaxation: float = float("nan")

    @property
    def residual(self) -> float:
        return self.stages[-1][2] if self.stages else float("nan")

    def stage_csv(self) -> str:
        lines = ["epsilon,iterations,residual"]
        lines += [f"{e!r},{n},{r!r}" for e, n, r in self.stages]
        return "\n".join(lines) + "\n"

    def save(self, directory, stem: str = "solution"):
        from pathlib import Path
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        dump_grid(self.field, d / f"{stem}.grid")
        (d / f"{stem}_stages.csv").write_text(self.stage_csv())


def eval_k(k: Callable, X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Evaluate ``k(x, t)`` on stacked points; falls back to a Python loop."""
    if callable(k):
        try:
            out = np.asarray(k(X, T), float)
            if out.shape == T.shape:
                return out
            if out.ndim == 0:
                return np.full(T.shape, float(out))
        except Exception:
            pass
        flat = np.array([k(x, t) for x, t in zip(X.reshape(-1, X.shape[-1]), T.ravel())],
                        float)
        return flat.reshape(T.shape)
    return np.full(T.shape, float(k))


# ---------------------------------------------------------------------------
# relaxation engine


def _sl(shape, origin, shift):
    """Strided slice of the colour class ``origin`` moved by ``shift``."""
    return tuple(slice(1 + o + s, n - 1 + s, 2) for n, o, s in zip(shape, origin, shift))


def _local_derivatives(u, shape, origin, h):
    d = len(shape)
    e = np.eye(d, dtype=int)
    zero = [0] * d
    c = u[_sl(shape, origin, zero)]
    grad = np.empty(c.shape + (d,))
    hess = np.empty(c.shape + (d, d))
    for i in range(d):
        up = u[_sl(shape, origin, e[i])]
        dn = u[_sl(shape, origin, -e[i])]
        grad[..., i] = (up - dn) / (2 * h)
        hess[..., i, i] = (up - 2 * c + dn) / (h * h)
        for j in range(i + 1, d):
            pp = u[_sl(shape, origin, e[i] + e[j])]
            pm = u[_sl(shape, origin, e[i] - e[j])]
            mp = u[_sl(shape, origin, -e[i] + e[j])]
            mm = u[_sl(shape, origin, -e[i] - e[j])]
            hess[..., i, j] = hess[..., j, i] = (pp - pm - mp + mm) / (4 * h * h)
    return c, grad, hess


def relax(grid: ScalarGrid, coeffs: Callable, cfg: SchemeConfig) -> SolveReport:
    """
    Nonlinear relaxation continued along the viscosity sequence.

    ``coeffs(X, U, grad)`` returns ``(A, f)`` for a block of nodes, with
    ``A`` of shape (..., d, d) and ``f`` broadcastable to (...).  Boundary
    nodes are never modified.  ``cfg.method`` selects damped Jacobi (one
    simultaneous update per sweep) or multicolour SOR (2^d colour classes,
    none of which contains two nodes of a common 3^d stencil).
    """
    u = grid.values.copy()
    h = grid.h
    d = grid.dims
    shape = grid.shape
    coords = grid.coords()
    if cfg.method == "jacobi":
        origins = [None]
    else:
        origins = [tuple(o) for o in np.ndindex(*(2,) * d)]
    blocks = []
    for o in origins:
        if o is None:
            sl = tuple(slice(1, n - 1) for n in shape)
        else:
            sl = _sl(shape, o, [0] * d)
        X = np.stack([c[sl] for c in coords], -1)
        blocks.append((o, sl, X, grid.mask[sl] == INTERIOR))
    scale = 1.0 + float(np.max(np.abs(u[grid.closure])))
    report = SolveReport(grid.copy(u), tol=cfg.convergence_tol,
                         relaxation=cfg.relaxation)
    total = 0
    ok = True
    idx = np.arange(d)
    for eps in cfg.viscosity_seq:
        nu = eps * h ** cfg.visc_power
        it = 0
        upd = np.inf
        stage_ok = False
        while it < cfg.max_iters:
            upd = 0.0
            steps = []
            for o, sl, X, active in blocks:
                if o is None:
                    grad, hess = fd_derivatives(u, h)
                    g = np.moveaxis(grad, 0, -1)
                    H = np.moveaxis(np.moveaxis(hess, 0, -1), 0, -1)
                    c = u[sl]
                else:
                    c, g, H = _local_derivatives(u, shape, o, h)
                A, f = coeffs(X, c, g)
                F = (np.einsum("...ij,...ij->...", A, H) + f
                     + nu * np.trace(H, axis1=-2, axis2=-1))
                diag = 2.0 * (A[..., idx, idx].sum(-1) + d * nu) / (h * h)
                step = np.where(active, F / diag, 0.0)
                if o is None:
                    steps.append((sl, step))
                else:
                    u[sl] += cfg.relaxation * step
                m = float(np.max(np.abs(step))) if step.size else 0.0
                upd = max(upd, m)
            for sl, step in steps:
                u[sl] += cfg.relaxation * step
            upd *= cfg.relaxation
            it += 1
            if not np.isfinite(upd) or np.max(np.abs(u)) > cfg.blowup * scale:
                ok = False
                report.diverged = True
                break
            if upd <= cfg.convergence_tol:
                stage_ok = True
                break
        total += it
        resid = upd / cfg.relaxation
        report.stages.append((eps, it, resid))
        log.debug("eps=%g iterations=%d residual=%.3e", eps, it, resid)
        if not ok:
            break
        ok = stage_ok
    report.iterations = total
    report.converged = ok and not report.diverged
    report.field = grid.copy(u)
    return report


def _initial(grid: ScalarGrid, g: BoundaryData, init) -> ScalarGrid:
    start = g.impose(grid)
    inner = grid.interior
    if init is None:
        start.values[inner] = float(np.mean(start.values[grid.boundary]))
    elif callable(init):
        start.values[inner] = init(grid.points(inner))
    else:
        start.values[inner] = np.asarray(init, float)[inner]
    start.values[grid.mask == 0] = 0.0
    return start


GRAPH_RELAXATIONS = (1.9, 1.5, 1.0)


def solve_graph_dirichlet(dom: Domain, g: BoundaryData, k, cfg: Optional[SchemeConfig] = None,
                          h: float = 1 / 32, init=None, raw: bool = False) -> SolveReport:
    """
    Solve ``L(v; k) = 0`` in ``dom`` with ``v = g`` on the boundary.

    ``k`` is a callable ``k(x, t)`` (or a number); ``None`` means ``k = 0``.
    Without an explicit ``cfg`` the relaxation factor steps down through
    ``GRAPH_RELAXATIONS`` until a run does not blow up; for small curvature
    the symbol is close to rank two and strong over-relaxation diverges.
    """
    if dom.dims != 3:
        raise ValueError("graph problems live over domains in R^3")
    grid = dom.grid(h)
    start = _initial(grid, g, init)
    coef = CURVATURE_FACTOR if not raw else 1.0

    def coeffs(X, U, grad):
        A = graph_coefficients(grad)
        if k is None:
            return A, 0.0
        return A, coef * eval_k(k, X, U) * graph_weight(grad)

    if cfg is not None:
        return relax(start, coeffs, cfg)
    for w in GRAPH_RELAXATIONS:
        rep = relax(start, coeffs, SchemeConfig(relaxation=w))
        if not rep.diverged:
            break
        log.info("graph solve blew up at relaxation %g", w)
    return rep


def reduced_levi_coefficients(X: np.ndarray, grad: np.ndarray, h: float) -> tuple:
    """
    Quasilinear form of the Levi operator for functions of ``(|z1|, |z2|)``.

    In signed modulus coordinates ``r`` with ``p = Du``,
    ``16 L(u) = p1^2 (u_22 + p2/r2) + p2^2 (u_11 + p1/r1) - 2 p1 p2 u_12``.
    Data are even in each ``r_j`` so ``p_j / r_j`` tends to ``u_jj`` on the
    axis ``r_j = 0``; there the term moves into the second-order part.
    """
    p1, p2 = grad[..., 0], grad[..., 1]
    r1, r2 = X[..., 0], X[..., 1]
    on1 = np.abs(r1) < h / 2
    on2 = np.abs(r2) < h / 2
    A = np.empty(grad.shape[:-1] + (2, 2))
    A[..., 0, 0] = p2 ** 2 * np.where(on1, 2.0, 1.0)
    A[..., 1, 1] = p1 ** 2 * np.where(on2, 2.0, 1.0)
    A[..., 0, 1] = A[..., 1, 0] = -p1 * p2
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (np.where(on2, 0.0, p1 ** 2 * p2 / r2)
             + np.where(on1, 0.0, p2 ** 2 * p1 / r1))
    return A / 16.0, f / 16.0


def solve_levi_dirichlet(dom: Domain, g: BoundaryData, cfg: Optional[SchemeConfig] = None,
                         h: float = 1 / 8, init=None) -> SolveReport:
    """
    Approximate a weak solution of ``L(u) = 0`` in ``dom`` with ``u = g``.

    ``dom`` is a domain in R^4 or the Reinhardt-reduced ball
    (``dom.reduced``), in which case ``g`` must be a function of the moduli.
    Which solution the scheme selects is not controlled.  The Levi symbol
    has rank two and is far from diagonally dominant, so over-relaxation
    diverges; the default configuration uses plain Gauss-Seidel sweeps.
    """
    if not dom.strongly_pseudoconvex:
        raise ValueError("the Levi problem is posed on strongly pseudoconvex domains")
    cfg = cfg or SchemeConfig(relaxation=1.0)
    grid = dom.grid(h)
    start = _initial(grid, g, init)
    if dom.reduced:
        def coeffs(X, U, grad):
            return reduced_levi_coefficients(X, grad, h)
    elif dom.dims == 4:
        def coeffs(X, U, grad):
            return levi_coefficients(grad), 0.0
    else:
        raise ValueError("expected a domain in R^4 or a reduced ball")
    return relax(start, coeffs, cfg)


# ---------------------------------------------------------------------------
# checks on solver output


def _strict_local_extrema(field: ScalarGrid, kind: str) -> np.ndarray:
    """Interior nodes strictly above (``max``) or below (``min``) all 3^d neighbours."""
    u = field.values
    d = field.dims
    inner = field.interior
    out = inner.copy()
    sgn = 1.0 if kind == "max" else -1.0
    for off in np.ndindex(*(3,) * d):
        o = np.array(off) - 1
        if not o.any():
            continue
        nb = np.roll(u, tuple(-o), axis=tuple(range(d)))
        out &= sgn * (u - nb) > 0
    return out


def principle_checks(report: SolveReport, k_sign: str = "=0") -> dict:
    """
    Maximum-principle ledger for a solver output.

    ``k_sign`` is ``"=0"`` (both principles), ``"le"`` (k <= 0: maximum
    principle and no interior strict local maximum) or ``"ge"`` (the
    mirrored minimum-side checks).  Results are stored on the report.
    """
    if k_sign not in ("=0", "le", "ge"):
        raise ValueError(f"unknown curvature sign {k_sign!r}")
    f = report.field
    inner = f.values[f.interior]
    bnd = f.values[f.boundary]
    rng = float(bnd.max() - bnd.min()) if bnd.size else 0.0
    slack = 1e-6 * max(rng, 1e-300)
    res = {"k_sign": k_sign, "converged": bool(report.converged), "range": rng,
           "interior_max": float(inner.max()), "interior_min": float(inner.min()),
           "boundary_max": float(bnd.max()), "boundary_min": float(bnd.min()),
           "tol": slack}
    if not report.converged:
        res["status"] = "skipped"
        report.principle_checks = res
        return res
    if k_sign in ("=0", "le"):
        res["max_principle"] = bool(inner.max() <= bnd.max() + slack)
    if k_sign in ("=0", "ge"):
        res["min_principle"] = bool(inner.min() >= bnd.min() - slack)
    if k_sign == "le":
        res["strict_local_max"] = int(_strict_local_extrema(f, "max").sum())
        res["no_interior_max"] = res["strict_local_max"] == 0
    if k_sign == "ge":
        res["strict_local_min"] = int(_strict_local_extrema(f, "min").sum())
        res["no_interior_min"] = res["strict_local_min"] == 0
    flags = [v for key, v in res.items() if key in ("max_principle", "min_principle",
                                                   "no_interior_max", "no_interior_min")]
    res["status"] = "pass" if all(flags) else "fail"
    report.principle_checks = res
    return res


def mirror_field(u: ScalarGrid) -> ScalarGrid:
    """``u~(x1, x2, x3) = -u(x1, x2, -x3)`` on a grid symmetric in ``x3``."""
    if u.dims != 3:
        raise ValueError("mirroring acts on graph fields over R^3")
    if not np.isclose(u.lo[2], -u.hi[2], atol=1e-12 * (1 + abs(u.lo[2]))):
        raise ValueError("grid is not symmetric in x3")
    return ScalarGrid(u.lo.copy(), u.h, -u.values[:, :, ::-1], u.mask[:, :, ::-1].copy())


def mirror_curvature(k):
    """Curvature seen by the mirrored field: ``k~(x, t) = -k(x1, x2, -x3, -t)``."""
    if not callable(k):
        return -float(k)

    def kt(X, T):
        X = np.asarray(X, float).copy()
        X[..., 2] *= -1
        return -eval_k(k, X, -np.asarray(T, float))
    return kt


def _touching_point(R: float, k, u: ScalarGrid) -> dict:
    P = u.points(u.closure)
    vals = u.values[u.closure]
    cap = np.sqrt(np.maximum(R * R - np.sum(P ** 2, axis=1), 0.0))
    w = vals - cap
    bnd = u.boundary[u.closure]
    w = w - w[bnd].min()
    i = int(np.argmin(w))                    # first occurrence = smallest node index
    y = P[i]
    ky = float(eval_k(k, y[None, :], np.array([vals[i]]))[0])
    return {"point": y, "value": float(w[i]), "k": ky, "bound": 1.0 / R,
            "interior": bool(not bnd[i])}


def curvature_bound_detect(dom: Domain, k, candidate: ScalarGrid, tol: float = 1e-9,
                           lip_max: float = 1e6) -> dict:
    """
    Curvature obstruction on a ball ``B(R)``.

    The candidate is shifted so that ``min_{bB}(u - v) = 0`` with the cap
    ``v = (R^2 - |x|^2)^{1/2}`` solving ``L(v; 1/R) = 0``; at the first
    minimum point ``y`` of ``u - v`` a solution must satisfy ``k(y) <= 1/R``.
    The same test is applied to the mirrored pair ``(u~, k~)``; a violation
    of either is reported as ``VIOLATION``.
    """
    if dom.radius is None or dom.dims != 3:
        raise ValueError("curvature_bound_detect needs a ball in R^3")
    R = float(dom.radius)
    u = candidate
    for k_ax in range(u.dims):
        d = np.diff(u.values, axis=k_ax)
        both = np.logical_and(np.take(u.closure, range(u.shape[k_ax] - 1), axis=k_ax),
                              np.take(u.closure, range(1, u.shape[k_ax]), axis=k_ax))
        if both.any() and np.max(np.abs(d[both])) / u.h > lip_max:
            raise ValueError("candidate is not Lipschitz bounded on the grid")
    direct = _touching_point(R, k, u)
    mirrored = _touching_point(R, mirror_curvature(k), mirror_field(u))
    viol = [t["k"] > 1.0 / R + tol for t in (direct, mirrored)]
    out = {"verdict": "VIOLATION" if any(viol) else "NO-OBSTRUCTION",
           "R": R, "bound": 1.0 / R, "tol": tol,
           "direct": {**direct, "point": direct["point"].tolist(), "violated": viol[0]},
           "mirrored": {**mirrored, "point": mirrored["point"].tolist(),
                        "violated": viol[1]}}
    return out

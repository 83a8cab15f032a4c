"""
Level sets, local maximum property tests, continuity-principle probing of
pseudoconvexity, connectivity counts and the complex-line slice check.

All verdicts are sampled evidence: ``pass`` means no violation was found
with the recorded budget and seed.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import linprog

from .core import ScalarGrid, to_complex, to_real
from .hulls import as_complex_points, monomial_basis, monomial_exponents

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# level sets


@dataclass
class PointCloudSet:
    points: np.ndarray
    source: str = "field"
    level: float = 0.0
    tol: float = 0.0
    h: Optional[float] = None
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, float))
        if self.points.size == 0:
            self.points = self.points.reshape(0, 4)
        if self.h is None:
            self.h = self.tol
        if self.values is not None:
            self.values = np.asarray(self.values, float)
            if np.any(np.abs(self.values - self.level) > self.tol * (1 + 1e-12) + 1e-15):
                raise ValueError("point cloud contains points off the level band")

    @property
    def empty(self) -> bool:
        return len(self.points) == 0

    def __len__(self):
        return len(self.points)

    def in_c2(self) -> np.ndarray:
        """Points as real 4-vectors; R^3 samples sit in the hyperplane x4 = level."""
        P = self.points
        if P.shape[1] == 3:
            return np.hstack([P, np.full((len(P), 1), self.level)])
        return P


def extract_level(field: ScalarGrid, c: float, tol: float) -> PointCloudSet:
    """
    Nodes with ``|u - c| <= tol`` plus the linear crossing points of ``u = c``
    on grid edges whose end values straddle ``c``.
    """
    nodes = field.closure
    vals = field.values
    near = nodes & (np.abs(vals - c) <= tol)
    pts = [field.points(near)]
    vv = [vals[near]]
    lo = field.lo
    for k in range(field.dims):
        a = [slice(None)] * field.dims
        b = [slice(None)] * field.dims
        a[k] = slice(0, -1)
        b[k] = slice(1, None)
        a, b = tuple(a), tuple(b)
        both = nodes[a] & nodes[b]
        fa = vals[a] - c
        fb = vals[b] - c
        cross = both & (fa * fb < 0)
        if not np.any(cross):
            continue
        idx = np.argwhere(cross)
        t = fa[cross] / (fa[cross] - fb[cross])
        P = lo + field.h * idx.astype(float)
        P[:, k] += t * field.h
        pts.append(P)
        vv.append(np.full(len(P), c))
    P = np.vstack(pts) if pts else np.zeros((0, field.dims))
    out = PointCloudSet(P, "grid", c, tol, h=field.h, values=np.concatenate(vv))
    if out.empty:
        log.info("empty level set at c=%g", c)
    return out


# ---------------------------------------------------------------------------
# psh probes


QUAD_EXPS = monomial_exponents(2)[1:]            # z1, z2, z1^2, z1 z2, z2^2


@dataclass
class PshProbe:
    """
    ``psi(z) = Re sum a_k (z - p)^{e_k} + lam |z - p|^2`` over the degree 1
    and 2 monomials; strictly plurisubharmonic (complex Hessian ``lam I``)
    and zero at ``p``.  ``eps`` is the claimed strictness on the tested set.
    """

    center: np.ndarray
    coeffs: np.ndarray
    lam: float
    eps: float

    def __post_init__(self):
        self.center = as_complex_points(self.center)[0]
        self.coeffs = np.asarray(self.coeffs, complex)
        if self.coeffs.shape != (len(QUAD_EXPS),):
            raise ValueError("a psh probe has five complex coefficients")
        self.check()

    def check(self, h: float = 1e-4):
        if not self.lam > 0:
            raise ValueError("psh probes need lam > 0")
        # complex Hessian from a finite-difference jet at the centre
        from .core import complex_hessian, jet_of

        p = to_real(self.center[None, :])[0]
        j = jet_of(lambda X: self.evaluate(X), p, h=h)
        ev = np.linalg.eigvalsh(complex_hessian(j.hess))
        if ev.min() < self.lam * (1 - 1e-4) - 1e-6:
            raise ValueError("probe is not strictly plurisubharmonic")
        if abs(float(self.evaluate(p[None, :])[0])) > 1e-12:
            raise ValueError("probe must vanish at its centre")

    def evaluate(self, P) -> np.ndarray:
        Z = as_complex_points(P) - self.center
        B = monomial_basis(Z, QUAD_EXPS)
        return (B @ self.coeffs).real + self.lam * np.sum(np.abs(Z) ** 2, axis=1)

    def to_json(self) -> dict:
        return {"center": [[float(z.real), float(z.imag)] for z in self.center],
                "coeffs": [[float(a.real), float(a.imag)] for a in self.coeffs],
                "lam": float(self.lam), "eps": float(self.eps)}

    @classmethod
    def sphere_witness(cls, p=(1.0, 0.0)) -> "PshProbe":
        """``2 Re(z1 - 1) + |z - p|^2 / 2``; equals ``-|z - p|^2 / 2`` on S^3."""
        return cls(np.asarray(p, complex), [2.0, 0, 0, 0, 0], 0.5, 0.5)

    @classmethod
    def torus_witness(cls, p=(1.0, 1.0)) -> "PshProbe":
        """``Re((z1 - 1)^2 + (z2 - 1)^2) + |z - p|^2 / 2``; negative on T^2 near p."""
        return cls(np.asarray(p, complex), [0, 0, 1.0, 0, 1.0], 0.5, 0.25)


@dataclass
class LmpVerdict:
    kind: str                               # pass / fail / inconclusive
    margin: float
    budget: int
    seed: int
    mode: str
    witness: dict = field(default_factory=dict)
    n_inner: int = 0
    n_shell: int = 0

    def __post_init__(self):
        if self.kind not in ("pass", "fail", "inconclusive"):
            raise ValueError(self.kind)
        if (self.kind == "fail") != bool(self.witness):
            raise AssertionError("fail verdicts carry a witness and only those")

    def to_json(self) -> dict:
        return {"kind": self.kind, "margin": _num(self.margin), "budget": self.budget,
                "seed": self.seed, "mode": self.mode, "witness": self.witness,
                "n_inner": self.n_inner, "n_shell": self.n_shell}


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


def lmp_test(X: PointCloudSet, center, radius: float, mode: str = "polynomial",
             budget: int = 500, seed: int = 0, deg_max: int = 8, shell: Optional[float] = None,
             probes: Sequence[PshProbe] = (), rtol: float = 1e-3, atol: float = 1e-9,
             lp_tol: float = 1e-6) -> LmpVerdict:
    """
    Local maximum property of ``X`` inside the ball ``B(center, radius)``.

    ``polynomial``: for ``budget`` random polynomials ``P`` in
    ``(z - center) / radius`` (plus all monomials up to ``deg_max``), the
    maximum of ``|P|`` over ``X`` strictly inside the ball must not exceed
    its maximum over the shell ``radius - shell <= |z - center| <= radius``.

    ``pshProbe``: the explicit ``probes`` are tried first; a probe is a
    witness when it is at most ``-eps |z - p|^2`` on ``X`` in the ball, with
    margin ``psi(p) - max_shell psi``.  Then a linear programme looks for
    the largest ``mu`` with ``h + mu |z - p|^2 <= 0`` on ``X`` in the ball,
    ``h`` pluriharmonic of degree <= 2 with coefficients in [-1, 1] in the
    rescaled variable; ``mu > lp_tol`` is a witness.
    """
    if mode not in ("polynomial", "pshProbe"):
        raise ValueError(f"unknown mode {mode!r}")
    P = X.in_c2()
    c = to_real(as_complex_points(center))[0] if np.iscomplexobj(np.asarray(center)) \
        else np.asarray(center, float)
    if c.size == 3:
        c = np.append(c, X.level)
    shell = 2 * X.h if shell is None else shell
    if not shell > 0:
        shell = 0.25 * radius
    d = np.linalg.norm(P - c, axis=1)
    inner = P[d < radius - shell]
    outer = P[(d >= radius - shell) & (d <= radius)]
    base = dict(budget=budget, seed=seed, mode=mode, n_inner=len(inner), n_shell=len(outer))
    if len(outer) < 20 or len(inner) == 0:
        return LmpVerdict("inconclusive", float("nan"), **base)
    zc = to_complex(c[None, :])[0]
    if mode == "polynomial":
        return _lmp_polynomial(inner, outer, zc, radius, budget, seed, deg_max, rtol, atol, base)
    return _lmp_psh(inner, outer, P[d <= radius], zc, radius, probes, X, lp_tol, atol, base)


def lmp_polynomials(deg_max: int, budget: int, seed: int) -> tuple:
    """
    Coefficient matrix of the polynomial probes in the rescaled variable.

    Columns are every monomial up to ``deg_max``, the axis peak candidates
    ``1 + s e^{i phi} w_j``, then ``budget`` random polynomials alternating
    between decaying dense coefficients and peak candidates
    ``1 + s <w, u> + s^2 q(w)`` with random unit ``u``.
    """
    exps = monomial_exponents(deg_max)
    n = len(exps)
    deg = exps.sum(axis=1)
    rng = np.random.default_rng(seed)
    fixed = [np.eye(n, dtype=complex)[:, k] for k in range(1, n)]
    for j in (1, 2):
        for phase in (1, 1j, -1, -1j):
            for sc in (0.05, 0.1, 0.2, 0.4):
                col = np.zeros(n, complex)
                col[0] = 1.0
                col[j] = sc * phase
                fixed.append(col)
    nf = len(fixed)
    C = np.zeros((n, nf + budget), complex)
    C[:, :nf] = np.array(fixed).T
    for i in range(budget):
        if i % 2 == 0:
            top = int(rng.integers(1, deg_max + 1))
            col = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 0.5 ** deg
            col[deg > top] = 0.0
        else:
            u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            u /= np.linalg.norm(u)
            sc = 10 ** rng.uniform(-1.5, 0)
            col = np.zeros(n, complex)
            col[0] = 1.0
            col[1:3] = sc * u
            q = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            col[3:6] = 0.25 * sc ** 2 * q
        C[:, nf + i] = col
    return exps, C


def _lmp_polynomial(inner, outer, zc, radius, budget, seed, deg_max, rtol, atol, base):
    exps, C = lmp_polynomials(deg_max, budget, seed)
    Wi = (to_complex(inner) - zc) / radius
    Wo = (to_complex(outer) - zc) / radius
    Vi = np.abs(monomial_basis(Wi, exps) @ C)
    Vo = np.abs(monomial_basis(Wo, exps) @ C)
    mi = Vi.max(axis=0)
    mo = Vo.max(axis=0)
    excess = mi - (mo * (1 + rtol) + atol)
    j = int(np.argmax(excess))
    if excess[j] > 0:
        at = inner[int(np.argmax(Vi[:, j]))]
        nz = np.nonzero(C[:, j])[0]
        wit = {"probe": int(j), "center": [float(v) for v in to_real(zc[None, :])[0]],
               "radius": radius, "point": [float(v) for v in at],
               "terms": [[int(exps[k, 0]), int(exps[k, 1]), float(C[k, j].real),
                          float(C[k, j].imag)] for k in nz],
               "max_inner": float(mi[j]), "max_shell": float(mo[j])}
        return LmpVerdict("fail", float(mi[j] - mo[j]), witness=wit, **base)
    return LmpVerdict("pass", float(np.max(mi - mo)), **base)


def _lmp_psh(inner, outer, ball, zc, radius, probes, X, lp_tol, atol, base):
    # the centre of a witness has to be a point of X
    zb = to_complex(ball)
    zc = zb[int(np.argmin(np.linalg.norm(zb - zc, axis=1)))]
    for pr in probes:
        if np.linalg.norm(pr.center - zc) > 1e-9 * (1 + radius):
            continue
        psi = pr.evaluate(ball)
        dist2 = np.sum((ball - to_real(zc[None, :])[0]) ** 2, axis=1)
        if np.all(psi <= -pr.eps * dist2 + atol):
            margin = -float(np.max(pr.evaluate(outer)))
            if margin > 0:
                wit = {"probe": pr.to_json(), "source": "explicit",
                       "max_on_set_plus_eps": float(np.max(psi + pr.eps * dist2))}
                return LmpVerdict("fail", margin, witness=wit, **base)
    # linear programme in the rescaled variable w = (z - p) / radius
    W = (to_complex(ball) - zc) / radius
    B = monomial_basis(W, QUAD_EXPS)
    feats = np.hstack([B.real, -B.imag])                 # Re(a w^e), a = x + i y
    r2 = np.sum(np.abs(W) ** 2, axis=1)
    n = feats.shape[1]
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    A = np.hstack([feats, r2[:, None]])
    bounds = [(-1, 1)] * n + [(None, 10.0)]
    res = linprog(cost, A_ub=A, b_ub=np.zeros(len(A)), bounds=bounds, method="highs")
    mu = float(res.x[-1]) if res.success else 0.0
    if mu > lp_tol:
        a = res.x[:5] + 1j * res.x[5:10]
        # back to z: a_k (w)^e = a_k r^{-|e|} (z - p)^e, |w|^2 = |z - p|^2 / r^2
        scale = radius ** -QUAD_EXPS.sum(axis=1).astype(float)
        lam = 0.5 * mu / radius ** 2
        pr = PshProbe(zc, a * scale, lam, lam)
        margin = -float(np.max(pr.evaluate(outer)))
        wit = {"probe": pr.to_json(), "source": "lp", "mu": mu}
        return LmpVerdict("fail", margin, witness=wit, **base)
    return LmpVerdict("pass", -mu, **base)


# ---------------------------------------------------------------------------
# continuity principle


@dataclass
class DiscFamily:
    """Affine analytic discs ``zeta -> a[nu] + zeta * b[nu]`` on the closed unit disc."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.atleast_2d(np.asarray(self.a, complex))
        self.b = np.atleast_2d(np.asarray(self.b, complex))
        if len(self.b) == 1 and len(self.a) > 1:
            self.b = np.repeat(self.b, len(self.a), axis=0)
        if self.a.shape != self.b.shape or self.a.shape[1] != 2:
            raise ValueError("disc data are (N, 2) complex arrays")
        if np.any(np.linalg.norm(self.b, axis=1) == 0):
            raise ValueError("analytic discs must be non-constant")

    def __len__(self):
        return len(self.a)

    def boundary(self, nu: int, n: int = 64) -> np.ndarray:
        zeta = np.exp(2j * np.pi * np.arange(n) / n)
        return to_real(self.a[nu] + zeta[:, None] * self.b[nu])

    def interior(self, nu: int, n: int = 64, rings: int = 8) -> np.ndarray:
        rad = np.linspace(0.0, 1.0, rings + 1)[:-1]
        zeta = np.concatenate([r * np.exp(2j * np.pi * np.arange(n) / n) for r in rad[1:]]
                              + [np.zeros(1)])
        return to_real(self.a[nu] + zeta[:, None] * self.b[nu])

    @classmethod
    def translate(cls, start, direction, scale, axis: int, steps) -> "DiscFamily":
        """Discs along complex axis ``axis`` centred at ``start + t * direction``."""
        start = np.asarray(start, complex)
        direction = np.asarray(direction, complex)
        a = start[None, :] + np.asarray(steps, float)[:, None] * direction[None, :]
        b = np.zeros(2, complex)
        b[axis] = scale
        return cls(a, b[None, :])


@dataclass
class Region:
    """Open set given by a vectorized membership test on real 4-vectors."""

    contains: Callable[[np.ndarray], np.ndarray]
    lo: Optional[np.ndarray] = None
    hi: Optional[np.ndarray] = None
    name: str = "region"

    def __call__(self, P: np.ndarray) -> np.ndarray:
        return np.asarray(self.contains(np.atleast_2d(P)), bool)

    def in_box(self, P: np.ndarray) -> bool:
        if self.lo is None:
            return True
        return bool(np.all(P >= self.lo) and np.all(P <= self.hi))

    @classmethod
    def graph_side(cls, v: ScalarGrid, side: str = "above") -> "Region":
        """``{x4 > v(x)}`` or ``{x4 < v(x)}`` over the grid's closure."""
        vals = np.where(v.closure, v.values, np.nan)
        axes = [v.axis(k) for k in range(v.dims)]
        f = RegularGridInterpolator(axes, vals, bounds_error=False, fill_value=np.nan)
        sgn = 1.0 if side == "above" else -1.0

        def contains(P):
            w = f(P[:, :3])
            with np.errstate(invalid="ignore"):
                return np.isfinite(w) & (sgn * (P[:, 3] - w) > 0)

        vmin = float(np.nanmin(vals))
        vmax = float(np.nanmax(vals))
        span = vmax - vmin + 1.0
        lo = np.append(v.lo, vmin - span)
        hi = np.append(v.hi, vmax + span)
        return cls(contains, lo, hi, f"graph-{side}")


@dataclass
class KontVerdict:
    kind: str                                # nonpseudoconvex-witness / no-violation
    witness: dict = field(default_factory=dict)
    families: int = 0
    discs: int = 0
    skipped: int = 0

    def __post_init__(self):
        if (self.kind == "nonpseudoconvex-witness") != bool(self.witness):
            raise AssertionError("witness present exactly for violations")

    def to_json(self) -> dict:
        return {"kind": self.kind, "witness": self.witness, "families": self.families,
                "discs": self.discs, "skipped": self.skipped}


def _robust(U: Region, P: np.ndarray, delta: float, inside: bool) -> np.ndarray:
    """Membership (or non-membership) that survives axis moves of size delta."""
    ok = U(P) if inside else ~U(P)
    if delta > 0:
        for k in range(4):
            for s in (-delta, delta):
                Q = P.copy()
                Q[:, k] += s
                ok &= U(Q) if inside else ~U(Q)
    return ok


def default_battery(U: Region, n_start: int = 3, scales=(0.15, 0.3, 0.45),
                    steps: int = 12) -> list:
    """Axis-parallel complex discs at three scales, translated along real axes."""
    if U.lo is None:
        raise ValueError("a default disc battery needs a bounded region box")
    lo, hi = np.asarray(U.lo, float), np.asarray(U.hi, float)
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    ticks = [mid[k] + 0.5 * half[k] * np.linspace(-1, 1, n_start) for k in range(4)]
    starts = np.stack(np.meshgrid(*ticks, indexing="ij"), -1).reshape(-1, 4)
    starts = starts[U(starts)]
    fams = []
    size = float(np.min(half))
    for s0 in starts:
        z0 = to_complex(s0[None, :])[0]
        for axis in (0, 1):
            others = [2, 3] if axis == 0 else [0, 1]
            for sc in scales:
                for k in others:
                    for sgn in (1.0, -1.0):
                        e = np.zeros(4)
                        e[k] = sgn
                        dirc = to_complex(e[None, :])[0]
                        fams.append(DiscFamily.translate(
                            z0, dirc, sc * size, axis, np.linspace(0, 0.5 * half[k], steps)))
    return fams


def kontinuitaet_test(U, discs=None, delta: float = 0.0, n_boundary: int = 64,
                      rings: int = 8) -> KontVerdict:
    """
    Continuity-principle probe of the pseudoconvexity of ``U``.

    A family yields a witness when, up to its first disc ``nu*`` with a
    point robustly outside ``U`` (by margin ``delta``), every boundary circle
    stays robustly in ``U`` and the discs before ``nu*`` lie in ``U`` up to
    ``delta``.  A family whose first disc already leaves ``U`` says nothing.  Families leaving the region box are
    skipped with a warning.
    """
    if not isinstance(U, Region):
        U = Region(U)
    if discs is None:
        fams = default_battery(U)
    elif isinstance(discs, DiscFamily):
        fams = [discs]
    else:
        fams = list(discs)
    ndisc = 0
    skipped = 0
    for fi, fam in enumerate(fams):
        pts = [fam.interior(nu, n_boundary, rings) for nu in range(len(fam))]
        bnd = [fam.boundary(nu, n_boundary) for nu in range(len(fam))]
        if not all(U.in_box(p) for p in pts + bnd):
            skipped += 1
            continue
        for nu in range(len(fam)):
            ndisc += 1
            if not np.all(_robust(U, bnd[nu], delta, True)):
                break
            out = ~U(pts[nu])
            if not np.any(out):
                continue
            if nu == 0:
                break
            far = _robust(U, pts[nu][out], delta, False)
            if not np.any(far):
                continue                     # grazes bU within delta: inside up to tolerance
            y = pts[nu][out][np.argmax(far)]
            wit = {"family": fi, "disc": nu, "point": [float(t) for t in y],
                   "center": [float(t) for t in to_real(fam.a[nu][None, :])[0]],
                   "direction": [float(t) for t in to_real(fam.b[nu][None, :])[0]],
                   "delta": delta}
            return KontVerdict("nonpseudoconvex-witness", wit, len(fams), ndisc, skipped)
    if skipped:
        warnings.warn(f"{skipped} disc families left the region box and were skipped",
                      stacklevel=2)
    return KontVerdict("no-violation", {}, len(fams), ndisc, skipped)


# ---------------------------------------------------------------------------
# connectivity and slices


def component_count(region: np.ndarray) -> tuple:
    """
    Axis-adjacency components of a boolean mask.

    Labels follow the smallest row-major node index of each component,
    starting at 1; 0 marks the complement.
    """
    region = np.asarray(region, bool)
    if not region.any():
        raise ValueError("component_count needs a nonempty mask")
    labels, n = ndimage.label(region)
    return int(n), labels


def slice_compact_check(field: ScalarGrid, level: float, x3: float, tol: Optional[float] = None,
                        k_sign: Optional[str] = None) -> dict:
    """
    Compact components of ``{v = level}`` on the complex line ``z2 = x3 + i level``.

    The line lies in the hyperplane ``{x4 = level}``; on the grid slice at
    ``x3`` the band ``|v - level| <= tol`` is split into components and those
    not touching the boundary of the domain are reported.  ``k_sign`` is the
    sign of the curvature (``"le"`` for k <= 0): a compact component is a
    counterexample only under that hypothesis.
    """
    if field.dims != 3:
        raise ValueError("slices are taken of graph fields over R^3")
    i3 = int(round((x3 - field.lo[2]) / field.h))
    if not 0 <= i3 < field.shape[2]:
        return {"verdict": "vacuous", "components": 0, "compact": 0}
    tol = field.h if tol is None else tol
    closure = field.closure[:, :, i3]
    vals = field.values[:, :, i3]
    band = closure & (np.abs(vals - level) <= tol)
    if not band.any():
        return {"verdict": "vacuous", "components": 0, "compact": 0, "tol": tol}
    n, lab = component_count(band)
    edge = (field.mask[:, :, i3] == 1) | ~ndimage.binary_erosion(closure)
    touching = set(np.unique(lab[edge & band]).tolist()) - {0}
    compact = [k for k in range(1, n + 1) if k not in touching]
    if not compact:
        verdict = "pass"
    elif k_sign == "le":
        verdict = "counterexample"
    else:
        verdict = "hypothesis-not-applicable"
    sizes = [int(np.sum(lab == k)) for k in compact]
    return {"verdict": verdict, "components": n, "compact": len(compact),
            "compact_sizes": sizes, "tol": tol, "x3": float(field.axis(2)[i3])}

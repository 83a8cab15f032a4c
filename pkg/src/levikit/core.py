"""
Grids, domains, jets and the real/complex coordinate bridge.

Coordinates on C^2 are ``z1 = x1 + i x2`` and ``z2 = x3 + i x4``.  Axis
indices in arrays are zero based, so ``x1`` is axis 0.
"""

from __future__ import annotations

import csv
import io
import itertools
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

EXTERIOR, BOUNDARY, INTERIOR = 0, 1, 2
MAGIC = "LEVIKIT1"

# default cap on nodes per axis for grids over R^4
MAX_NODES_4D = 24


class StencilError(ValueError):
    """Raised when a finite-difference stencil leaves the interior."""


class DimensionError(ValueError):
    """Raised when an object has the wrong ambient dimension."""


class InvariantError(ValueError):
    """Raised when a data invariant (e.g. Hermitian symmetry) fails."""


# ---------------------------------------------------------------------------
# grids


@dataclass
class ScalarGrid:
    """
    A real function sampled on a uniform grid in R^d.

    Parameters
    ----------
    lo : array_like, shape (d,)
        Coordinates of node ``(0, ..., 0)``.
    h : float
        Uniform spacing, identical on all axes.
    values : ndarray
        Node values, ``values.shape`` gives the node counts.
    mask : ndarray of int8
        ``INTERIOR``, ``BOUNDARY`` or ``EXTERIOR`` per node.
    """

    lo: np.ndarray
    h: float
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.mask = np.asarray(self.mask, dtype=np.int8)
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        if self.values.shape != self.mask.shape:
            raise ValueError("values and mask shapes differ")
        if self.lo.shape != (self.values.ndim,):
            raise DimensionError("lo must have one entry per axis")

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def hi(self) -> np.ndarray:
        return self.lo + self.h * (np.array(self.shape) - 1)

    @property
    def interior(self) -> np.ndarray:
        return self.mask == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.mask == BOUNDARY

    @property
    def closure(self) -> np.ndarray:
        return self.mask != EXTERIOR

    def axis(self, k: int) -> np.ndarray:
        return self.lo[k] + self.h * np.arange(self.shape[k])

    def coords(self) -> list:
        """Coordinate arrays (``indexing='ij'``), one per axis."""
        return np.meshgrid(*[self.axis(k) for k in range(self.dims)], indexing="ij")

    def point(self, node) -> np.ndarray:
        return self.lo + self.h * np.asarray(node, dtype=float)

    def points(self, which: Optional[np.ndarray] = None) -> np.ndarray:
        """Coordinates of the selected nodes as an (N, d) array."""
        idx = np.argwhere(self.closure if which is None else which)
        return self.lo + self.h * idx

    def copy(self, values: Optional[np.ndarray] = None) -> "ScalarGrid":
        vals = self.values.copy() if values is None else np.asarray(values, dtype=float)
        return ScalarGrid(self.lo.copy(), self.h, vals, self.mask.copy())

    def check(self):
        """Validate the documented invariants; raises InvariantError."""
        if not np.all(np.isfinite(self.values[self.closure])):
            raise InvariantError("non-finite value on interior/boundary node")
        inner = self.interior
        if np.any(inner):
            ok = self.closure
            for k in range(self.dims):
                for s in (1, -1):
                    nb = np.roll(ok, -s, axis=k)
                    edge = [slice(None)] * self.dims
                    edge[k] = -1 if s == 1 else 0
                    nb[tuple(edge)] = False
                    if np.any(inner & ~nb):
                        raise InvariantError("interior node with a missing neighbour")


def make_grid(lo, hi, h: float) -> tuple:
    """Return (lo, shape) for a grid covering the box [lo, hi] at spacing h."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = np.floor((hi - lo) / h + 1e-9).astype(int) + 1
    return lo, tuple(int(k) for k in n)


def neighbourhood_mask(inside: np.ndarray) -> np.ndarray:
    """Nodes of ``inside`` whose whole 3^d neighbourhood is inside."""
    struct = np.ones((3,) * inside.ndim, dtype=bool)
    core = ndimage.binary_erosion(inside, structure=struct, border_value=0)
    return core


# ---------------------------------------------------------------------------
# domains


@dataclass
class Domain:
    """
    Bounded region ``{rho < 0}`` with a finite sample of its boundary.

    ``reduced`` marks the Reinhardt-reduced ball: coordinates are signed
    moduli ``(r1, r2)`` and functions are even in each of them.
    """

    dims: int
    signed_defining: Callable[[np.ndarray], np.ndarray]
    boundary_samples: np.ndarray
    strongly_pseudoconvex: bool = False
    bbox: tuple = None
    name: str = "domain"
    radius: Optional[float] = None
    reduced: bool = False
    tol_bd: float = 1e-12

    def __post_init__(self):
        self.boundary_samples = np.atleast_2d(np.asarray(self.boundary_samples, float))
        if self.boundary_samples.shape[1] != self.dims:
            raise DimensionError("boundary samples have the wrong dimension")
        rho = self.signed_defining(self.boundary_samples)
        if np.max(np.abs(rho)) > self.tol_bd:
            raise InvariantError("boundary samples are not on {rho = 0}")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return self.signed_defining(np.atleast_2d(pts)) < 0

    @classmethod
    def ball(cls, dims: int, radius: float = 1.0, n_samples: int = 4000,
             center=None) -> "Domain":
        c = np.zeros(dims) if center is None else np.asarray(center, float)
        r2 = radius * radius

        def rho(x):
            x = np.atleast_2d(x)
            return np.sum((x - c) ** 2, axis=-1) - r2

        samples = c + radius * sphere_samples(dims, n_samples)
        return cls(dims, rho, samples, strongly_pseudoconvex=(dims == 4),
                   bbox=(c - radius, c + radius), name=f"ball{dims}(R={radius:g})",
                   radius=radius, tol_bd=1e-9 * max(1.0, r2))

    @classmethod
    def box(cls, lo, hi, n_per_face: int = 16) -> "Domain":
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        dims = lo.size
        mid = (lo + hi) / 2
        half = (hi - lo) / 2

        def rho(x):
            x = np.atleast_2d(x)
            return np.max(np.abs(x - mid) / half, axis=-1) - 1.0

        faces = []
        ticks = [np.linspace(lo[k], hi[k], n_per_face) for k in range(dims)]
        for k in range(dims):
            others = [ticks[j] for j in range(dims) if j != k]
            mesh = np.stack(np.meshgrid(*others, indexing="ij"), -1).reshape(-1, dims - 1)
            for side in (lo[k], hi[k]):
                pts = np.insert(mesh, k, side, axis=1)
                faces.append(pts)
        return cls(dims, rho, np.unique(np.vstack(faces), axis=0),
                   strongly_pseudoconvex=False, bbox=(lo, hi), name="box", tol_bd=1e-12)

    @classmethod
    def reduced_ball(cls, radius: float = 1.0, n_samples: int = 721) -> "Domain":
        """Ball in C^2 viewed in modulus coordinates ``(|z1|, |z2|)``."""
        t = np.linspace(0, 2 * np.pi, n_samples, endpoint=False)
        samples = radius * np.stack([np.cos(t), np.sin(t)], -1)

        def rho(x):
            x = np.atleast_2d(x)
            return np.sum(x ** 2, axis=-1) - radius ** 2

        return cls(2, rho, samples, strongly_pseudoconvex=True,
                   bbox=(-radius * np.ones(2), radius * np.ones(2)),
                   name=f"reduced-ball(R={radius:g})", radius=radius, reduced=True,
                   tol_bd=1e-9)

    def grid(self, h: float, values=None, pad: int = 0) -> ScalarGrid:
        """Regular grid over the bounding box with the node classification.

        Interior nodes lie in ``{rho < 0}`` together with their whole 3^d
        neighbourhood; the remaining nodes of ``{rho <= 0}`` are boundary.
        """
        lo, hi = self.bbox
        lo = np.asarray(lo, float) - pad * h
        hi = np.asarray(hi, float) + pad * h
        # centre the lattice on the box so symmetric domains get symmetric grids
        lo0, shape = make_grid(lo, hi, h)
        slack = (hi - lo) - h * (np.array(shape) - 1)
        lo0 = lo + slack / 2
        if self.dims == 4 and max(shape) > MAX_NODES_4D + 1:
            warnings.warn(f"4D grid {shape} exceeds the default cap of "
                          f"{MAX_NODES_4D} nodes per axis", stacklevel=2)
        axes = [lo0[k] + h * np.arange(shape[k]) for k in range(self.dims)]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.dims)
        rho = self.signed_defining(X).reshape(shape)
        scale = np.max(np.abs(hi - lo)) ** 2
        inside = rho < -1e-12 * scale
        closed = rho <= 1e-12 * scale
        inner = neighbourhood_mask(inside)
        mask = np.full(shape, EXTERIOR, dtype=np.int8)
        mask[closed] = BOUNDARY
        mask[inner] = INTERIOR
        vals = np.zeros(shape) if values is None else np.asarray(values, float)
        return ScalarGrid(lo0, h, vals, mask)


def sphere_samples(dims: int, n: int) -> np.ndarray:
    """Deterministic, roughly uniform points on the unit sphere S^{dims-1}."""
    if dims == 2:
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], -1)
    if dims == 3:
        k = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * k / n)
        theta = np.pi * (1 + 5 ** 0.5) * k
        return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi),
                         np.cos(phi)], -1)
    if dims == 4:
        return hopf_samples(n)
    raise DimensionError("sphere samples implemented for dims 2..4")


def hopf_samples(n: int, nt: Optional[int] = None, na: Optional[int] = None,
                 endpoints: bool = False) -> np.ndarray:
    """Points on S^3 via z1 = cos(t) e^{ia}, z2 = sin(t) e^{ib}.

    ``t`` is spaced so that the Haar measure ``sin(2t) dt`` is equidistributed;
    with ``endpoints`` the circles ``t = 0`` and ``t = pi/2`` are included.
    ``nt`` and ``na`` override the number of ``t`` levels and angles.
    """
    m = max(2, int(round((n / 4) ** (1 / 3))))
    nt = m if nt is None else nt
    na = max(4, 2 * m) if na is None else na
    if endpoints:
        u = np.linspace(0.0, 1.0, nt)
    else:
        u = (np.arange(nt) + 0.5) / nt
    t = 0.5 * np.arccos(1 - 2 * u)
    a = 2 * np.pi * np.arange(na) / na
    T, A, B = np.meshgrid(t, a, a, indexing="ij")
    # stagger the second angle to break the product lattice
    B = B + np.pi / na * np.arange(nt)[:, None, None]
    pts = np.stack([np.cos(T) * np.cos(A), np.cos(T) * np.sin(A),
                    np.sin(T) * np.cos(B), np.sin(T) * np.sin(B)], -1)
    return pts.reshape(-1, 4)


def torus_samples(n1: int, n2: Optional[int] = None, r1: float = 1.0,
                  r2: float = 1.0) -> np.ndarray:
    """Samples of the torus ``{|z1| = r1, |z2| = r2}`` as complex (N, 2)."""
    n2 = n1 if n2 is None else n2
    a = 2 * np.pi * np.arange(n1) / n1
    b = 2 * np.pi * np.arange(n2) / n2
    A, B = np.meshgrid(a, b, indexing="ij")
    return np.stack([r1 * np.exp(1j * A.ravel()), r2 * np.exp(1j * B.ravel())], -1)


def to_complex(x: np.ndarray) -> np.ndarray:
    """(N, 4) real points -> (N, 2) complex points."""
    x = np.atleast_2d(np.asarray(x, float))
    if x.shape[-1] != 4:
        raise DimensionError("expected points in R^4")
    return np.stack([x[:, 0] + 1j * x[:, 1], x[:, 2] + 1j * x[:, 3]], -1)


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, complex))
    return np.stack([z[:, 0].real, z[:, 0].imag, z[:, 1].real, z[:, 1].imag], -1)


# ---------------------------------------------------------------------------
# boundary data


@dataclass
class BoundaryData:
    """
    Values of ``g`` on the boundary samples of a domain.

    ``rule`` selects how nodes of a grid receive boundary values:
    ``"extension"`` evaluates the ambient callable ``extension`` (the data is
    the trace of that function), ``"nearest"`` blends the values of the two
    nearest boundary samples linearly by distance.
    """

    domain: Domain
    values: np.ndarray
    rule: str = "nearest"
    extension: Optional[Callable[[np.ndarray], np.ndarray]] = None
    peak_points: Optional[tuple] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.shape != (len(self.domain.boundary_samples),):
            raise ValueError("one value per boundary sample is required")
        if self.rule not in ("nearest", "extension"):
            raise ValueError(f"unknown interpolation rule {self.rule!r}")
        if self.rule == "extension" and self.extension is None:
            raise ValueError("rule 'extension' needs an ambient callable")
        if self.peak_points is not None:
            self.check_peaks()

    @property
    def samples(self) -> np.ndarray:
        return self.domain.boundary_samples

    @classmethod
    def from_function(cls, domain: Domain, f, rule: str = "extension") -> "BoundaryData":
        vals = np.asarray(f(domain.boundary_samples), float)
        return cls(domain, vals, rule=rule, extension=f if rule == "extension" else None)

    def check_peaks(self, tol: float = 0.0):
        p, q = (np.asarray(t, float) for t in self.peak_points)
        pts = self.samples
        ip = np.argmin(np.sum((pts - p) ** 2, axis=1))
        iq = np.argmin(np.sum((pts - q) ** 2, axis=1))
        vals = self.values
        others_p = np.delete(vals, ip)
        others_q = np.delete(vals, iq)
        if not (vals[ip] > others_p.max() + tol and vals[iq] < others_q.min() - tol):
            raise InvariantError("peak points are not strict extrema of g")

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.rule == "extension":
            return np.asarray(self.extension(pts), float)
        tree = cKDTree(self.samples)
        d, i = tree.query(pts, k=2)
        d = np.maximum(d, 1e-300)
        w = 1.0 / d
        return np.sum(w * self.values[i], axis=1) / np.sum(w, axis=1)

    def impose(self, grid: ScalarGrid) -> ScalarGrid:
        """Copy of ``grid`` with boundary nodes set to ``g``."""
        out = grid.copy()
        bnd = grid.boundary
        out.values[bnd] = self.evaluate(grid.points(bnd))
        return out

    def level_samples(self, c: float, band: float, side: str = "eq") -> np.ndarray:
        """Boundary samples with ``g = c`` (within ``band``), ``g <= c`` or ``g >= c``."""
        g = self.values
        if side == "eq":
            sel = np.abs(g - c) <= band
        elif side == "le":
            sel = g <= c + band
        elif side == "ge":
            sel = g >= c - band
        else:
            raise ValueError(side)
        return self.samples[sel]


def cubic_cap(t: np.ndarray) -> np.ndarray:
    """C^1 bump ``1 - 3t^2 + 2t^3`` on [0, 1], zero beyond."""
    t = np.clip(np.abs(t), 0.0, 1.0)
    return 1.0 - 3.0 * t ** 2 + 2.0 * t ** 3


def minimal_defining(bd: BoundaryData, radius: float, p=None, q=None,
                     lift: float = 1.0) -> BoundaryData:
    """
    Turn ``g`` into a minimal defining function with peaks ``p`` and ``q``.

    Adds a positive cubic cap at a maximum point ``p`` and a negative one at a
    minimum point ``q``; the caps are supported in balls of ``radius`` which
    must stay inside ``{g > 0}`` and ``{g < 0}`` respectively, so the zero set
    of ``g`` is unchanged.
    """
    pts = bd.samples
    g = bd.values
    p = pts[np.argmax(g)] if p is None else np.asarray(p, float)
    q = pts[np.argmin(g)] if q is None else np.asarray(q, float)
    span = g.max() - g.min() + lift

    def bump(x, c):
        return cubic_cap(np.linalg.norm(np.atleast_2d(x) - c, axis=1) / radius)

    near_p = np.linalg.norm(pts - p, axis=1) < radius
    near_q = np.linalg.norm(pts - q, axis=1) < radius
    if np.any(g[near_p] <= 0) or np.any(g[near_q] >= 0):
        raise ValueError("bump supports must stay inside {g > 0} and {g < 0}")
    new = g + span * bump(pts, p) - span * bump(pts, q)
    ext = None
    if bd.extension is not None:
        f = bd.extension

        def ext(x):
            return f(x) + span * bump(x, p) - span * bump(x, q)

    ip = np.argmin(np.sum((pts - p) ** 2, axis=1))
    iq = np.argmin(np.sum((pts - q) ** 2, axis=1))
    return BoundaryData(bd.domain, new, rule=bd.rule, extension=ext,
                        peak_points=(pts[ip], pts[iq]))


# ---------------------------------------------------------------------------
# jets


@dataclass
class Jet2:
    """Second-order real Taylor data of a function at a point."""

    point: np.ndarray
    value: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        self.point = np.asarray(self.point, float)
        self.grad = np.asarray(self.grad, float)
        h = np.asarray(self.hess, float)
        # symmetric by construction from the upper triangle
        up = np.triu(h)
        self.hess = up + np.triu(h, 1).T

    @property
    def dims(self) -> int:
        return self.grad.size

    def __neg__(self) -> "Jet2":
        return Jet2(self.point, -self.value, -self.grad, -self.hess)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Value of the Taylor polynomial at points ``x`` (N, d)."""
        d = np.atleast_2d(x) - self.point
        return self.value + d @ self.grad + 0.5 * np.einsum("ni,ij,nj->n", d, self.hess, d)


@dataclass
class ComplexJet2:
    """
    Complex first derivatives and mixed second derivatives in (z1, z2).

    ``mixed[a, b]`` is d^2 u / dz_a dzbar_b.
    """

    point: np.ndarray
    dz: np.ndarray
    dzbar: np.ndarray
    mixed: np.ndarray
    value: float = 0.0

    def __post_init__(self):
        self.point = np.asarray(self.point, complex)
        self.dz = np.asarray(self.dz, complex)
        self.dzbar = np.asarray(self.dzbar, complex)
        self.mixed = np.asarray(self.mixed, complex)

    def check(self, tol: float = 1e-12):
        scale = 1.0 + np.max(np.abs(self.mixed))
        if np.max(np.abs(self.mixed - self.mixed.conj().T)) > tol * scale:
            raise InvariantError("mixed block is not Hermitian")

    def __neg__(self) -> "ComplexJet2":
        return ComplexJet2(self.point, -self.dz, -self.dzbar, -self.mixed, -self.value)


def complex_hessian(hess: np.ndarray) -> np.ndarray:
    """Mixed block d^2u/dz_a dzbar_b from a real 4x4 Hessian (batched on the
    leading axes ``hess[..., 4, 4]``)."""
    H = np.asarray(hess, float)
    out = np.empty(H.shape[:-2] + (2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            i, j = 2 * a, 2 * a + 1
            k, l = 2 * b, 2 * b + 1
            out[..., a, b] = 0.25 * (H[..., i, k] + H[..., j, l]
                                     + 1j * (H[..., i, l] - H[..., j, k]))
    return out


def complex_gradient(grad: np.ndarray) -> np.ndarray:
    """(u_z1, u_z2) from the real gradient (batched on leading axes)."""
    g = np.asarray(grad, float)
    return 0.5 * np.stack([g[..., 0] - 1j * g[..., 1], g[..., 2] - 1j * g[..., 3]], -1)


def real_to_complex_jet(j: Jet2) -> ComplexJet2:
    if j.dims != 4:
        raise DimensionError("complex jets need a jet over R^4")
    p = j.point
    dz = complex_gradient(j.grad)
    return ComplexJet2(np.array([p[0] + 1j * p[1], p[2] + 1j * p[3]]), dz, dz.conj(),
                       complex_hessian(j.hess), j.value)


def complex_to_real_jet(cj: ComplexJet2, pure: Optional[np.ndarray] = None) -> Jet2:
    """
    Rebuild the real jet.

    The mixed block fixes only the pluriharmonic-free part of the Hessian;
    the remaining part is carried by ``pure`` = (u_{z1z1}, u_{z1z2}, u_{z2z2}),
    zero when omitted.
    """
    dz = cj.dz
    grad = np.array([2 * dz[0].real, -2 * dz[0].imag, 2 * dz[1].real, -2 * dz[1].imag])
    P = np.zeros((2, 2), complex)
    if pure is not None:
        P[0, 0], P[0, 1], P[1, 1] = pure
        P[1, 0] = P[0, 1]
    M = cj.mixed
    # quadratic part is Re(z^T P z) + z^T M zbar;  recover H by polarization
    H = np.zeros((4, 4))
    basis = np.eye(4)
    zb = basis[:, 0::2] + 1j * basis[:, 1::2]   # real unit vector -> complex direction

    def q(zv):
        return np.real(zv @ P @ zv) + np.real(zv @ M @ zv.conj())

    for i in range(4):
        for k in range(4):
            H[i, k] = q(zb[i] + zb[k]) - q(zb[i]) - q(zb[k])
    pt = cj.point
    return Jet2(np.array([pt[0].real, pt[0].imag, pt[1].real, pt[1].imag]),
                float(np.real(cj.value)), grad, H)


# ---------------------------------------------------------------------------
# finite differences


def _shift(arr: np.ndarray, offs: Sequence[int]) -> np.ndarray:
    """View of ``arr[1:-1, ...]`` shifted by ``offs`` (entries in -1, 0, 1)."""
    sl = tuple(slice(1 + o, arr.shape[k] - 1 + o) for k, o in enumerate(offs))
    return arr[sl]


def fd_derivatives(values: np.ndarray, h: float) -> tuple:
    """
    Central differences on all nodes not on the array edge.

    Returns ``(grad, hess)`` with shapes ``(d,) + inner`` and
    ``(d, d) + inner`` where ``inner`` is ``values.shape`` minus 2 per axis.
    Second differences use the 3^d stencil; they are exact on quadratics.
    """
    d = values.ndim
    c = _shift(values, [0] * d)
    grad = np.empty((d,) + c.shape)
    hess = np.empty((d, d) + c.shape)
    e = np.eye(d, dtype=int)
    for i in range(d):
        up = _shift(values, e[i])
        dn = _shift(values, -e[i])
        grad[i] = (up - dn) / (2 * h)
        hess[i, i] = (up - 2 * c + dn) / (h * h)
        for j in range(i + 1, d):
            pp = _shift(values, e[i] + e[j])
            pm = _shift(values, e[i] - e[j])
            mp = _shift(values, -e[i] + e[j])
            mm = _shift(values, -e[i] - e[j])
            hess[i, j] = hess[j, i] = (pp - pm - mp + mm) / (4 * h * h)
    return grad, hess


def fd_jet(field: ScalarGrid, node) -> Jet2:
    """Second-order central-difference jet at an interior node."""
    node = tuple(int(k) for k in node)
    if len(node) != field.dims:
        raise DimensionError("node index has the wrong length")
    if any(k < 1 or k >= n - 1 for k, n in zip(node, field.shape)):
        raise StencilError("stencil leaves the grid")
    if field.mask[node] != INTERIOR:
        raise StencilError(f"node {node} is not interior")
    sl = tuple(slice(k - 1, k + 2) for k in node)
    grad, hess = fd_derivatives(field.values[sl], field.h)
    mid = (0,) * field.dims
    return Jet2(field.point(node), float(field.values[node]),
                grad[(slice(None),) + mid], hess[(slice(None), slice(None)) + mid])


def jet_of(f: Callable, point, h: float = 1e-3) -> Jet2:
    """Jet of a callable by central differences at step ``h`` (test helper)."""
    p = np.asarray(point, float)
    d = p.size
    offs = np.array(list(itertools.product((-1, 0, 1), repeat=d)))
    vals = np.asarray(f(p + h * offs), float).reshape((3,) * d)
    grad, hess = fd_derivatives(vals, h)
    mid = (0,) * d
    return Jet2(p, float(vals[(1,) * d]), grad[(slice(None),) + mid],
                hess[(slice(None), slice(None)) + mid])


# ---------------------------------------------------------------------------
# serialization


def dump_grid(grid: ScalarGrid, path) -> None:
    """Write the binary grid dump (ASCII header + little-endian float64)."""
    lines = [MAGIC, f"dims {grid.dims}"]
    for k in range(grid.dims):
        lines.append(f"axis {k} {grid.shape[k]} {float(grid.lo[k])!r} {float(grid.hi[k])!r}")
    lines.append("data")
    header = ("\n".join(lines) + "\n").encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes(order="C"))


def load_grid(path) -> ScalarGrid:
    raw = Path(path).read_bytes()
    end = raw.index(b"\ndata\n") + len(b"\ndata\n")
    lines = raw[:end].decode("ascii").split("\n")
    if lines[0] != MAGIC:
        raise ValueError("not a grid dump")
    dims = int(lines[1].split()[1])
    shape, lo, hi = [], [], []
    for k in range(dims):
        _, _, n, a, b = lines[2 + k].split()
        shape.append(int(n))
        lo.append(float(a))
        hi.append(float(b))
    values = np.frombuffer(raw[end:], dtype="<f8").reshape(shape).copy()
    h = (hi[0] - lo[0]) / (shape[0] - 1)
    mask = np.where(np.isfinite(values), BOUNDARY, EXTERIOR).astype(np.int8)
    return ScalarGrid(np.array(lo), h, values, mask)


def csv_summary(rows) -> str:
    """CSV text with columns ``name,value``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "value"])
    for name, value in rows:
        w.writerow([name, _fmt(value)])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)

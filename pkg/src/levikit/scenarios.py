"""
Scenario catalog.

Each scenario is a function ``run(cfg, report)`` that orchestrates the
library modules and records scalars, verdicts and artifacts on the report.
Parameters come from the scenario defaults, overridden by the ``params``
block of the JSON configuration; ``h`` is the main grid spacing and is
checked against the documented caps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .core import (BoundaryData, Domain, ScalarGrid, torus_samples, to_real)
from .geometry import PointCloudSet, component_count, lmp_test
from .hulls import (ProbeFamily, ReinhardtRegion, extremal_via_hull_sweep,
                    hartogs_completion, hull_compute, hull_lmp_certify,
                    log_convex_hull, maximal_element_check, uniqueness_diagnostics)
from .operators import OperatorKind, levi_graph, operator_on_grid, sphere_cap_jet, \
    viscosity_classify
from .report import Report
from .solver import (SchemeConfig, curvature_bound_detect, mirror_curvature, mirror_field,
                     principle_checks, solve_graph_dirichlet, solve_levi_dirichlet)

SEED_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    run: Callable
    defaults: dict
    h_min: float
    h_max: float


REGISTRY: dict = {}


def scenario(name: str, summary: str, h_min: float, h_max: float, **defaults):
    def deco(fn):
        REGISTRY[name] = Scenario(name, summary, fn, defaults, h_min, h_max)
        return fn
    return deco


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    """Validated configuration of one run."""

    scenario: str
    params: dict = field(default_factory=dict)
    scheme: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None

    def __post_init__(self):
        if self.scenario not in REGISTRY:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"known: {', '.join(sorted(REGISTRY))}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) \
                or not 0 <= self.seed <= SEED_MAX:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        spec = REGISTRY[self.scenario]
        unknown = set(self.params) - set(spec.defaults)
        if unknown:
            raise ConfigError(f"unknown parameters for {self.scenario}: {sorted(unknown)}")
        merged = dict(spec.defaults)
        merged.update(self.params)
        self.params = merged
        h = float(merged["h"])
        if not spec.h_min <= h <= spec.h_max:
            raise ConfigError(f"h={h} outside [{spec.h_min}, {spec.h_max}] for {self.scenario}")
        try:
            if self.scheme:
                SchemeConfig(**self.scheme)
            ProbeFamily(**self.probe_args())
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, doc: dict, scenario: Optional[str] = None,
                  seed: Optional[int] = None, out=None) -> "ScenarioConfig":
        allowed = {"scenario", "params", "scheme", "probes", "seed"}
        extra = set(doc) - allowed
        if extra:
            raise ConfigError(f"unknown configuration keys {sorted(extra)}")
        name = doc.get("scenario", scenario)
        if scenario is not None and name != scenario:
            raise ConfigError(f"config is for {name!r}, not {scenario!r}")
        return cls(scenario=name, params=dict(doc.get("params", {})),
                   scheme=dict(doc.get("scheme", {})), probes=dict(doc.get("probes", {})),
                   seed=doc.get("seed", 0) if seed is None else seed,
                   out=None if out is None else str(out))

    @classmethod
    def load(cls, path, **kw) -> "ScenarioConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except ValueError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        return cls.from_json(doc, **kw)

    @property
    def h(self) -> float:
        return float(self.params["h"])

    def probe_args(self) -> dict:
        args = {"seed": self.seed}
        args.update(self.probes)
        return args

    def probe_family(self) -> ProbeFamily:
        return ProbeFamily(**self.probe_args())

    def scheme_config(self) -> Optional[SchemeConfig]:
        return SchemeConfig(**self.scheme) if self.scheme else None

    def echo(self) -> dict:
        return {"scenario": self.scenario, "params": self.params, "scheme": self.scheme,
                "probes": self.probes, "seed": self.seed}


def run_scenario(cfg: ScenarioConfig) -> Report:
    """Run one scenario and return its (unwritten) report."""
    rep = Report(cfg.scenario, provenance={"config": cfg.echo(), "seed": cfg.seed,
                                           "version": __version__})
    REGISTRY[cfg.scenario].run(cfg, rep)
    return rep


# ---------------------------------------------------------------------------
# helpers


def _cap(R: float):
    def f(P):
        P = np.atleast_2d(P)
        return np.sqrt(np.maximum(R * R - np.sum(P ** 2, axis=-1), 0.0))
    return f


def _sampled(grid: ScalarGrid, f) -> ScalarGrid:
    vals = np.zeros(grid.shape)
    vals[grid.closure] = f(grid.points(grid.closure))
    return grid.copy(vals)


def _ball_points(rng, n: int, dims: int, radius: float) -> np.ndarray:
    d = rng.standard_normal((n, dims))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * radius * rng.random(n)[:, None] ** (1 / dims)


def _principles(rep: Report, name: str, solve, k_sign: str):
    res = principle_checks(solve, k_sign)
    rep.check(f"{name}_converged", solve.converged, solve.residual, solve.tol)
    for key in ("max_principle", "min_principle", "no_interior_max", "no_interior_min"):
        if key in res:
            rep.check(f"{name}_{key}", res[key], tolerance=res["tol"])
    rep.scalar(f"{name}_iterations", solve.iterations)
    rep.scalar(f"{name}_relaxation", solve.relaxation)


# ---------------------------------------------------------------------------
# sphere cap


@scenario("sphere-cap", "graph of (R^2-|x|^2)^(1/2) solves the curvature-1/R equation",
          h_min=1 / 64, h_max=1 / 8, h=1 / 32, R=1.0, r=0.8, points=1000, fd_h=1 / 32,
          refine=True)
def _sphere_cap(cfg: ScenarioConfig, rep: Report):
    p = cfg.params
    R, r = float(p["R"]), float(p["r"])
    rng = np.random.default_rng(cfg.seed)
    # analytic jets
    X = _ball_points(rng, int(p["points"]), 3, 0.9 * R)
    worst = 0.0
    for x in X:
        j = sphere_cap_jet(R, x)
        scale = abs(levi_graph(j))
        worst = max(worst, abs(levi_graph(j, 1.0 / R)) / scale)
    rep.check("analytic_residual", worst <= 1e-10, worst, 1e-10, budget=len(X))
    # central differences on the exact cap
    grid = Domain.ball(3, 0.9 * R).grid(float(p["fd_h"]))
    v = _sampled(grid, _cap(R))
    res = operator_on_grid(v, OperatorKind("GraphK", k=lambda x, t: 1.0 / R))
    base = np.abs(operator_on_grid(v, OperatorKind("Graph")))
    rel = float(np.nanmax(np.abs(res)) / np.nanmax(base))
    rep.check("fd_relative_residual", rel <= 0.02, rel, 0.02)
    # Dirichlet solve on B(r)
    dom = Domain.ball(3, r)
    g = BoundaryData.from_function(dom, _cap(R))

    def solve(h):
        s = solve_graph_dirichlet(dom, g, 1.0 / R, cfg.scheme_config(), h=h)
        f = s.field
        err = np.max(np.abs(f.values[f.closure] - _cap(R)(f.points(f.closure))))
        return s, float(err / R)

    s, err = solve(cfg.h)
    rep.check("sup_error", err <= 0.02, err, 0.02)
    _principles(rep, "solve", s, "ge")
    rep.grids["solution"] = s.field
    rep.tables["stages"] = s.stage_csv()
    if p["refine"]:
        s2, err2 = solve(2 * cfg.h)
        ratio = err2 / max(err, 1e-300)
        rep.scalar("sup_error_coarse", err2)
        rep.check("refinement_ratio", ratio >= 1.6, ratio, 1.6)


# ---------------------------------------------------------------------------
# non-uniqueness on the ball


@scenario("ball-nonunique", "|z1|^2 and 1-|z2|^2 are two solutions with the same data",
          h_min=1 / 64, h_max=1 / 8, h=1 / 32, h4=1 / 8, nodes=1000, budget=16,
          h_levi=1 / 16, levels=64, h_unique=1 / 8)
def _ball_nonunique(cfg: ScenarioConfig, rep: Report):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    # viscosity spot tests on the 4D grid
    grid = Domain.ball(4, 1.0).grid(float(p["h4"]))
    idx = np.argwhere(grid.interior)
    pick = idx[np.sort(rng.choice(len(idx), size=min(int(p["nodes"]), len(idx)),
                                  replace=False))]
    op = OperatorKind("LeviFull")
    fields = {"u": lambda P: P[:, 0] ** 2 + P[:, 1] ** 2,
              "v": lambda P: 1 - P[:, 2] ** 2 - P[:, 3] ** 2}
    for name, f in fields.items():
        F = _sampled(grid, f)
        kinds = [viscosity_classify(F, n, op, probe_budget=int(p["budget"]),
                                    seed=cfg.seed + i).kind for i, n in enumerate(pick)]
        frac = kinds.count("both") / len(kinds)
        rep.check(f"viscosity_both_{name}", frac >= 0.99, frac, 0.99, budget=int(p["budget"]))
    # extremal solutions from the hull sweep
    red = Domain.reduced_ball(1.0)
    g = BoundaryData.from_function(red, lambda P: np.atleast_2d(P)[:, 0] ** 2)
    probes = cfg.probe_family()
    fm, fp = extremal_via_hull_sweep(red, g, np.linspace(0, 1, int(p["levels"])),
                                     probes, h=cfg.h)
    step = 1.0 / (int(p["levels"]) - 1)
    P = fm.points(fm.closure)
    em = float(np.max(np.abs(fm.values[fm.closure] - P[:, 0] ** 2)))
    ep = float(np.max(np.abs(fp.values[fp.closure] - (1 - P[:, 1] ** 2))))
    tol = 0.03 + step
    rep.scalar("level_step", step)
    rep.check("u_minus_error", em <= tol, em, tol, budget=probes.size)
    rep.check("u_plus_error", ep <= tol, ep, tol, budget=probes.size)
    rep.grids["u_minus"] = fm
    rep.grids["u_plus"] = fp
    # a scheme solution sits between the extremals
    s = solve_levi_dirichlet(red, g, cfg.scheme_config(), h=float(p["h_levi"]))
    _principles(rep, "levi_solve", s, "=0")
    sm, sp = extremal_via_hull_sweep(red, g, np.linspace(0, 1, int(p["levels"])), probes,
                                     grid=s.field)
    m = s.field.closure
    delta = 0.03 + step
    below = float(np.max(sm.values[m] - s.field.values[m]))
    above = float(np.max(s.field.values[m] - sp.values[m]))
    rep.check("sandwich_lower", below <= delta, below, delta)
    rep.check("sandwich_upper", above <= delta, above, delta)
    rep.grids["levi_solution"] = s.field
    rep.tables["levi_stages"] = s.stage_csv()
    # level hulls of |z1|^2 overlap, so uniqueness cannot be certified
    d4 = Domain.ball(4, 1.0)
    g4 = BoundaryData.from_function(d4, lambda P: np.atleast_2d(P)[:, 0] ** 2
                                    + np.atleast_2d(P)[:, 1] ** 2)
    u = uniqueness_diagnostics(g4, [0.3, 0.6], probes, h=float(p["h_unique"]))
    gr = u["grid"]
    origin = tuple(int(np.argmin(np.abs(gr.axis(k)))) for k in range(gr.dims))
    both = all(bool(mk[origin]) for mk in u["masks"])
    rep.check("nonuniqueness_flagged", not u["pairwiseDisjoint"], u["overlaps"][0][2]
              if u["overlaps"] else 0, budget=probes.size)
    rep.check("origin_in_both_hulls", both, budget=probes.size)


# ---------------------------------------------------------------------------
# torus hull


@scenario("torus-hull", "the closed bidisc is the hull of the torus |z1|=|z2|=1",
          h_min=0.1, h_max=0.4, h=0.2, n_in=600, n_out=600, rin=0.95, rout=1.1,
          certify=True, cert_points=50, budget=500)
def _torus_hull(cfg: ScenarioConfig, rep: Report):
    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    K = torus_samples(64)
    probes = cfg.probe_family()
    n_in, n_out = int(p["n_in"]), int(p["n_out"])
    ang = np.exp(2j * np.pi * rng.random((n_in + n_out, 2)))
    mod = np.empty((n_in + n_out, 2))
    mod[:n_in] = float(p["rin"]) * np.sqrt(rng.random((n_in, 2)))
    big = rng.integers(0, 2, n_out)
    far = float(p["rout"]) + (1.4 - float(p["rout"])) * rng.random(n_out)
    other = 1.4 * rng.random(n_out)
    mod[n_in:, 0] = np.where(big == 0, far, other)
    mod[n_in:, 1] = np.where(big == 1, far, other)
    Q = mod * ang
    truth = np.arange(n_in + n_out) < n_in
    res = hull_compute(K, Q, probes)
    tp = int(np.sum(res.member & truth))
    fn = int(np.sum(~res.member & truth))
    fp = int(np.sum(res.member & ~truth))
    tn = int(np.sum(~res.member & ~truth))
    rep.tables["confusion"] = ("truth,not_excluded,excluded\n"
                               f"inside,{tp},{fn}\noutside,{fp},{tn}\n")
    acc = (tp + tn) / len(Q)
    rep.check("membership_accuracy", acc == 1.0, acc, 1.0, budget=probes.size)
    rep.witnesses += [res.witness_record(i) for i in range(n_in, min(n_in + 5, len(Q)))]
    if p["certify"]:
        cert = hull_lmp_certify(K, Domain.ball(4, np.sqrt(2.0)), probes, h=cfg.h,
                                n_points=int(p["cert_points"]), budget=int(p["budget"]),
                                seed=cfg.seed)
        rep.scalar("lmp_tested", cert["tested"])
        rep.check("hull_lmp_pass_rate", cert["tested"] >= int(p["cert_points"])
                  and cert["passed"] == cert["tested"], cert.get("pass_rate", 0.0), 1.0,
                  budget=int(p["budget"]))
        rep.witnesses += cert["witnesses"]


# ---------------------------------------------------------------------------
# Reinhardt completion


@scenario("reinhardt-completion", "Hartogs figures fill V_eps up to the unit bidisc",
          h_min=1 / 1024, h_max=1 / 64, h=1.25 / 511, eps=0.2)
def _reinhardt(cfg: ScenarioConfig, rep: Report):
    eps = float(cfg.params["eps"])
    n = int(round(1.25 / cfg.h)) + 1
    V = ReinhardtRegion.v_eps(eps, n=n)
    R, trace = hartogs_completion(V, eps)
    L = log_convex_hull(V)
    r1, r2 = R.axes()
    target = np.logical_and.outer(r1 <= 0.99, r2 <= 0.99)
    rep.scalar("resolution", n)
    rep.scalar("steps", len(trace))
    rep.check("covers_bidisc_0.99", bool(np.all(R.mask[target])))
    rep.check("matches_log_hull", R.within_one_cell(L), tolerance=R.cell)
    rep.check("inside_log_hull", bool(np.all(L.mask[R.mask])))
    gains = np.diff(trace)
    ok = bool(np.all(gains >= eps / 12 - R.cell)) if len(gains) else True
    rep.check("trace_progress", ok, float(gains.min()) if len(gains) else "",
              eps / 12, tolerance=R.cell)
    B, tb = hartogs_completion(ReinhardtRegion.bidisc(1.0, n=n), eps)
    rep.check("bidisc_fixed", len(tb) == 0 and bool(np.all(B.mask == R.bidisc(1.0, n).mask)))
    rep.masks["v_eps"] = V
    rep.masks["completion"] = R
    rep.masks["log_hull"] = L
    rep.tables["trace"] = "step,M_prime\n" + "".join(f"{i},{m!r}\n" for i, m in
                                                      enumerate(trace))


# ---------------------------------------------------------------------------
# Levi-flat hypersurfaces bounded by the torus


def _flat_pieces(which: str, center, radius: float, step: float) -> np.ndarray:
    """Lattice sample of a Levi-flat piece near ``center`` (complex pair)."""
    c1, c2 = center
    lo = radius + 2 * step
    ts = np.arange(-np.pi, np.pi, step)
    if which in ("disc-circle", "circle-disc"):
        dc, cc = (c1, c2) if which == "disc-circle" else (c2, c1)
        ax = np.arange(-1.0, 1.0 + 1e-12, step)
        A, B, T = np.meshgrid(ax, ax, ts, indexing="ij")
        D = (A + 1j * B).ravel()
        C = np.exp(1j * T.ravel())
        keep = (np.abs(D) <= 1.0) & (np.abs(D - dc) < lo) & (np.abs(C - cc) < lo)
        D, C = D[keep], C[keep]
        Z = np.stack([D, C] if which == "disc-circle" else [C, D], -1)
    else:                       # the cone {|z1| = |z2| <= 1}
        rho = np.arange(0.0, 1.0 + 1e-12, step)
        Rr, A, B = np.meshgrid(rho, ts, ts, indexing="ij")
        Z = np.stack([(Rr * np.exp(1j * A)).ravel(), (Rr * np.exp(1j * B)).ravel()], -1)
        Z = Z[np.max(np.abs(Z - np.array([c1, c2])), axis=1) < lo]
    return to_real(Z)


@scenario("levi-flat-pair", "two Stein Levi-flat fillings of the torus versus the cone",
          h_min=1 / 1024, h_max=1 / 64, h=1 / 255, eps=0.1, step=0.02, radius=0.25,
          budget=500)
def _levi_flat_pair(cfg: ScenarioConfig, rep: Report):
    p = cfg.params
    step, radius, eps = float(p["step"]), float(p["radius"]), float(p["eps"])
    pieces = {"disc_circle": ("disc-circle", (0.3, 1.0)),
              "circle_disc": ("circle-disc", (1.0, 0.3)),
              "cone": ("cone", (0.5, 0.5))}
    for k, (name, (which, c)) in enumerate(pieces.items()):
        X = PointCloudSet(_flat_pieces(which, c, radius, step), which, 0.0, 0.0, h=step)
        cen = to_real(np.array([c], complex))[0]
        v = lmp_test(X, cen, radius, mode="polynomial", budget=int(p["budget"]),
                     seed=cfg.seed + k)
        rep.scalar(f"lmp_margin_{name}", v.margin)
        rep.check(f"lmp_{name}", v.kind == "pass", v.margin, budget=int(p["budget"]))
    # the boundary torus itself is totally real and fails
    T = to_real(torus_samples(int(round(2 * np.pi / step))))
    T = T[np.linalg.norm(T - [1, 0, 1, 0], axis=1) < radius + 2 * step]
    v = lmp_test(PointCloudSet(T, "torus", 0.0, 0.0, h=step), np.array([1.0, 0, 1, 0]),
                 radius, mode="polynomial", budget=int(p["budget"]), seed=cfg.seed)
    rep.check("lmp_torus_fails", v.kind == "fail", v.margin, budget=int(p["budget"]))
    # Stein neighbourhoods: log-convex for the fillings, not for the cone
    n = int(round(1.25 / cfg.h)) + 1
    W1 = ReinhardtRegion.from_predicate(lambda a, b: (a < 1 + eps) & (np.abs(b - 1) < eps), n=n)
    W2 = ReinhardtRegion.from_predicate(lambda a, b: (b < 1 + eps) & (np.abs(a - 1) < eps), n=n)
    H1 = log_convex_hull(W1, (True, False))
    H2 = log_convex_hull(W2, (False, True))
    rep.check("disc_circle_neighbourhood_convex", W1.within_one_cell(H1), tolerance=W1.cell)
    rep.check("circle_disc_neighbourhood_convex", W2.within_one_cell(H2), tolerance=W2.cell)
    V = ReinhardtRegion.v_eps(eps, n=n)
    HV = log_convex_hull(V)
    r1, r2 = HV.axes()
    target = np.logical_and.outer(r1 <= 0.99, r2 <= 0.99)
    grows = bool(np.all(HV.mask[target])) and not V.within_one_cell(HV)
    rep.check("cone_completion_is_bidisc", grows)
    rep.masks["disc_circle_nbhd"] = W1
    rep.masks["cone_nbhd"] = V
    rep.masks["cone_completion"] = HV


# ---------------------------------------------------------------------------
# slices of Im z2


def _ball_lattice(h: float, dims: int = 4):
    """Open-grid coordinates of the centred lattice covering the unit ball."""
    n = int(np.floor(2.0 / h + 1e-9)) + 1
    ax = (np.arange(n) - (n - 1) / 2) * h
    return [ax.reshape([-1 if k == j else 1 for k in range(dims)]) for j in range(dims)]


@scenario("slice-eto", "{u != 0} has two components for the solution with data Im z2",
          h_min=1 / 48, h_max=1 / 4, h=1 / 24, h_fine=1 / 32, h_solve=1 / 6,
          h_unique=1 / 8, levels=[-0.5, 0.0, 0.5])
def _slice_eto(cfg: ScenarioConfig, rep: Report):
    p = cfg.params
    for tag, h in (("h", cfg.h), ("h_fine", float(p["h_fine"]))):
        X = _ball_lattice(h)
        closed = X[0] ** 2 + X[1] ** 2 + X[2] ** 2 + X[3] ** 2 <= 1.0 + 1e-12
        ncomp, _ = component_count(closed & (X[3] != 0))
        rep.scalar(f"nodes_per_axis_{tag}", closed.shape[0])
        rep.check(f"components_{tag}", ncomp == 2, ncomp, 2)
    X = _ball_lattice(cfg.h)
    closed = X[0] ** 2 + X[1] ** 2 + X[2] ** 2 + X[3] ** 2 <= 1.0 + 1e-12
    rep.check("components_upper_half", component_count(closed & (X[3] > 0))[0] == 1)
    rep.check("components_z1_sq", component_count(closed & (X[0] ** 2 + X[1] ** 2 != 0))[0]
              == 1)
    # scheme solution reproduces the pluriharmonic data
    dom = Domain.ball(4, 1.0)
    g = BoundaryData.from_function(dom, lambda P: np.atleast_2d(P)[:, 3])
    s = solve_levi_dirichlet(dom, g, cfg.scheme_config(), h=float(p["h_solve"]))
    f = s.field
    err = float(np.max(np.abs(f.values[f.closure] - f.points(f.closure)[:, 3])))
    rep.check("solution_error", err <= 1e-6, err, 1e-6)
    _principles(rep, "levi_solve", s, "=0")
    ncomp, _ = component_count(f.closure & (np.abs(f.values) > 1e-6))
    rep.check("components_solution", ncomp == 2, ncomp, 2, tolerance=1e-6)
    rep.grids["solution"] = f
    probes = cfg.probe_family()
    u = uniqueness_diagnostics(g, list(p["levels"]), probes, h=float(p["h_unique"]))
    rep.check("sufficient_condition", u["sufficientHolds"], budget=probes.size)
    rep.check("pairwise_disjoint", u["pairwiseDisjoint"], budget=probes.size)
    m = maximal_element_check(g, f, probes)
    rep.scalar("zero_nodes", m["zero_nodes"])
    rep.scalar("symmetric_difference", m["symmetric_difference"])
    rep.check("zero_set_in_hull", m["inclusion_holds"], m["zero_outside_hull"], 0,
              tolerance=m["zero_tol"], budget=probes.size)


# ---------------------------------------------------------------------------
# curvature obstruction


@scenario("curvature-bound", "no solution on B(R) when the curvature exceeds 1/R",
          h_min=1 / 32, h_max=1 / 4, h=1 / 8, cases=[[1.0, 1.5], [10.0, 0.2], [1.0, 0.5]],
          iters=200, h_zero=1 / 16)
def _curvature_bound(cfg: ScenarioConfig, rep: Report):
    p = cfg.params
    for R, k in p["cases"]:
        R, k = float(R), float(k)
        dom = Domain.ball(3, R)
        h = R * cfg.h
        tag = f"R{R:g}_k{k:g}"
        if k * R <= 1.0:
            # exact cap of curvature k spans B(R)
            cand = _sampled(dom.grid(h), _cap(1.0 / k))
            rep.scalar(f"{tag}_candidate", "cap")
        else:
            g = BoundaryData.from_function(dom, _cap(R))
            # a fixed number of Gauss-Seidel sweeps; there is no solution to reach
            sc = SchemeConfig(viscosity_seq=(0.1,), max_iters=int(p["iters"]), relaxation=1.0)
            s = solve_graph_dirichlet(dom, g, k, sc, h=h)
            cand = s.field
            rep.scalar(f"{tag}_candidate", "solver")
            rep.scalar(f"{tag}_solver_converged", s.converged)
        d = curvature_bound_detect(dom, k, cand)
        expect = "VIOLATION" if k > 1.0 / R else "NO-OBSTRUCTION"
        rep.check(f"{tag}_verdict", d["verdict"] == expect, d["verdict"], expect,
                  tolerance=d["tol"])
        m = curvature_bound_detect(dom, mirror_curvature(k), mirror_field(cand))
        same = (m["verdict"] == d["verdict"] and m["mirrored"] == d["direct"]
                and m["direct"] == d["mirrored"])
        rep.check(f"{tag}_mirror_invariant", same)
        rep.witnesses.append({"case": tag, **d})
        rep.grids[f"candidate_{tag}"] = cand
    # zero curvature: solutions obey both maximum principles
    dom = Domain.ball(3, 1.0)
    data = {"cap": _cap(1.0),
            "saddle": lambda P: np.atleast_2d(P)[:, 0] ** 2 - np.atleast_2d(P)[:, 2] ** 2}
    for name, f in data.items():
        g = BoundaryData.from_function(dom, f)
        s = solve_graph_dirichlet(dom, g, 0.0, cfg.scheme_config(), h=float(p["h_zero"]))
        _principles(rep, f"zero_{name}", s, "=0")
        d = curvature_bound_detect(dom, 0.0, s.field)
        rep.check(f"zero_{name}_no_obstruction", d["verdict"] == "NO-OBSTRUCTION")
        rep.grids[f"zero_{name}"] = s.field

import numpy as np
import pytest

from levikit.core import BoundaryData, Domain, hopf_samples, to_complex, torus_samples
from levikit.hulls import (ProbeFamily, ReinhardtRegion, graph_hull_compare, hartogs_completion,
                           hull_compute, hull_lmp_certify, log_convex_hull,
                           maximal_element_check, monotone_fill, quadratic_exclusion,
                           uniqueness_diagnostics)

TORUS = torus_samples(64, 64)
CIRCLE = np.stack([np.exp(2j * np.pi * np.arange(256) / 256), np.zeros(256)], -1)


@pytest.fixture(scope="module")
def probes():
    return ProbeFamily(count=200, seed=0)


# ---------------------------------------------------------------------------
# probe families and membership


def test_probe_family_validation():
    with pytest.raises(ValueError):
        ProbeFamily(class_tag="rational")
    with pytest.raises(ValueError):
        ProbeFamily(count=0)
    with pytest.raises(ValueError):
        ProbeFamily(deg_max=2, extras=[("mod", np.ones(3))])


def test_probe_family_prefix():
    small, big = ProbeFamily(count=10), ProbeFamily(count=40)
    assert np.array_equal(big.coefs[:, :small.size], small.coefs)


@pytest.mark.parametrize("K,q,member", [
    (TORUS, (0.5, 0.5), True),
    (TORUS, (1.2, 0.0), False),
    (TORUS, (0.0, -1.05j), False),
    (CIRCLE, (0.0, 0.0), True),
    (CIRCLE, (0.3j, 0.0), True),
    (CIRCLE, (0.0, 0.2), False),
])
def test_hull_examples(probes, K, q, member):
    res = hull_compute(K, np.array([q], complex), probes)
    assert bool(res.member[0]) == member
    if not member:
        rec = res.witness_record(0)
        assert rec["margin"] > 0 and rec["probe"]["terms"]


def test_hull_witness_depends_on_z1_only(probes):
    res = hull_compute(TORUS, np.array([[1.2, 0.0]], complex), probes)
    terms = res.witness_record(0)["probe"]["terms"]
    assert all(e2 == 0 for _, e2, _, _ in terms)


def test_hull_real_and_complex_inputs_agree(probes):
    from levikit.core import to_real
    Q = np.array([[0.2 + 0.1j, 0.4], [1.0, 1.0j], [0.9, 0.9]])
    a = hull_compute(TORUS, Q, probes).member
    b = hull_compute(to_real(TORUS), to_real(Q), probes).member
    assert np.array_equal(a, b)


def test_hull_empty_K(probes):
    with pytest.raises(ValueError):
        hull_compute(np.zeros((0, 2), complex), np.zeros((1, 2), complex), probes)


def test_torus_accuracy_oracle(probes):
    rng = np.random.default_rng(11)
    inside = (rng.random((300, 2)) ** 0.5 * 0.98) * np.exp(2j * np.pi * rng.random((300, 2)))
    r = 1.1 + 0.5 * rng.random(300)
    out = inside.copy()
    axis = rng.integers(0, 2, 300)
    out[np.arange(300), axis] = r * np.exp(2j * np.pi * rng.random(300))
    assert hull_compute(TORUS, inside, probes).member.all()
    assert not hull_compute(TORUS, out, probes).member.any()


def test_nested_families_monotone():
    rng = np.random.default_rng(5)
    Q = rng.normal(scale=0.8, size=(400, 2)) + 1j * rng.normal(scale=0.8, size=(400, 2))
    prev = None
    for count in np.linspace(10, 300, 10).astype(int):
        m = hull_compute(TORUS, Q, ProbeFamily(count=int(count))).member
        if prev is not None:
            assert np.all(m <= prev)
        prev = m


def test_hull_idempotent_on_grid(probes):
    g = Domain.ball(4, np.sqrt(2)).grid(0.25)
    P = g.points(g.closure)
    first = hull_compute(TORUS, P, probes, rtol=0.0, atol=0.0).member
    second = hull_compute(P[first], P, probes, rtol=0.0, atol=0.0).member
    assert np.array_equal(first, second)


def test_quadratic_probe_excludes_off_sphere():
    S = to_complex(hopf_samples(0, nt=17, na=16, endpoints=True))
    m, coef = quadratic_exclusion(S, np.array([1.2, 0.0], complex))
    assert m > 0.1 and coef is not None
    fam = ProbeFamily(class_tag="pshQuadratic", count=1)
    res = hull_compute(S, np.array([[1.2, 0], [0.3, 0.2j]], complex), fam)
    assert res.member.tolist() == [False, True]
    assert res.witness_record(0)["probe"]["kind"] == "pshQuadratic"


# ---------------------------------------------------------------------------
# diagnostics


def test_hull_lmp_certify_finite_set_vacuous(probes):
    pts = np.array([[1.0, 1.0], [-1.0, 1j], [1j, -1.0]], complex)
    dom = Domain.ball(4, np.sqrt(2), n_samples=200)
    out = hull_lmp_certify(pts, dom, probes, h=0.25, n_points=5, budget=50)
    assert out["vacuous"] and out["tested"] == 0


def test_hull_lmp_certify_torus(probes):
    dom = Domain.ball(4, np.sqrt(2), n_samples=200)
    out = hull_lmp_certify(TORUS, dom, probes, h=0.25, n_points=4, budget=100)
    assert out["tested"] == 4 and out["passed"] == 4 and not out["witnesses"]


def test_hull_lmp_certify_disc(probes):
    r = np.sqrt(2)
    S = np.stack([r * np.exp(2j * np.pi * np.arange(256) / 256), np.zeros(256)], -1)
    dom = Domain.ball(4, r, n_samples=200)
    # h = 0.2 gives an odd node count, so the lattice meets the disc {z2 = 0}
    out = hull_lmp_certify(S, dom, probes, h=0.2, n_points=3, budget=100)
    assert out["tested"] == 3 and out["failed"] == 0


@pytest.fixture(scope="module")
def ball4():
    return Domain.ball(4, 1.0, n_samples=500)


def data(dom, f):
    return BoundaryData.from_function(dom, lambda P: f(np.atleast_2d(P)))


def test_uniqueness_im_z2(ball4, probes):
    g = data(ball4, lambda P: P[:, 3])
    res = uniqueness_diagnostics(g, [-0.5, 0.0, 0.5], probes, h=1 / 4, sampling=(33, 32))
    assert res["sufficientHolds"] and res["pairwiseDisjoint"] and res["necessaryHolds"]


def test_uniqueness_z1_squared_flagged(ball4, probes):
    g = data(ball4, lambda P: P[:, 0] ** 2 + P[:, 1] ** 2)
    res = uniqueness_diagnostics(g, [0.3, 0.6], probes, h=1 / 4, sampling=(33, 32))
    o = tuple(np.argmin(np.abs(res["grid"].axis(k))) for k in range(4))
    assert res["masks"][0][o] and res["masks"][1][o]
    assert not res["pairwiseDisjoint"]


def test_uniqueness_constant_data(ball4, probes):
    g = data(ball4, lambda P: 0 * P[:, 0] + 0.5)
    res = uniqueness_diagnostics(g, [0.5], probes, h=1 / 4, sampling=(33, 32))
    assert not res["sufficientHolds"] and res["pairwiseDisjoint"]


def test_maximal_element_slice(ball4, probes):
    g = data(ball4, lambda P: P[:, 3])
    u = ball4.grid(1 / 4)
    P = u.points(np.ones(u.shape, bool)).reshape(u.shape + (4,))
    u = u.copy(np.where(u.closure, P[..., 3], 0.0))
    res = maximal_element_check(g, u, probes, sampling=(33, 32))
    assert res["inclusion_holds"] and res["zero_nodes"] > 0
    assert res["hull_outside_zero"] == 0 and res["components"] == 2


def test_maximal_element_rejects_whole_boundary(ball4, probes):
    g = data(ball4, lambda P: 0 * P[:, 0])
    with pytest.raises(ValueError):
        maximal_element_check(g, ball4.grid(1 / 4), probes, sampling=(17, 16))


def test_graph_hull_affine():
    dom = Domain.ball(3, 1.0, n_samples=1000)
    g = data(dom, lambda P: 0.5 * P[:, 0] - 0.2 * P[:, 2])
    v = dom.grid(1 / 4)
    P = v.points(np.ones(v.shape, bool)).reshape(v.shape + (3,))
    v = v.copy(np.where(v.closure, 0.5 * P[..., 0] - 0.2 * P[..., 2], 0.0))
    res = graph_hull_compare(v, g)
    assert res["graph_contained"] and res["band_holds"]


# ---------------------------------------------------------------------------
# Reinhardt regions


N = 256


def test_monotone_fill_axes():
    m = np.zeros((4, 4), bool)
    m[2, 3] = True
    assert monotone_fill(m).sum() == 12
    assert monotone_fill(m, (True, False)).sum() == 3
    assert monotone_fill(m, (False, False)).sum() == 1


def test_log_hull_bidisc_fixed():
    B = ReinhardtRegion.bidisc(n=N)
    assert np.array_equal(log_convex_hull(B).mask, B.mask)


def test_log_hull_v_eps_is_bidisc():
    H = log_convex_hull(ReinhardtRegion.v_eps(0.2, n=N))
    assert H.within_one_cell(ReinhardtRegion.bidisc(n=N))


def test_log_hull_hartogs_figure():
    def fig(a, b):
        return ((a <= 1) & (b <= 0.3)) | ((a >= 0.8) & (a <= 1) & (b <= 1))
    H = log_convex_hull(ReinhardtRegion.from_predicate(fig, n=N))
    assert H.within_one_cell(ReinhardtRegion.bidisc(n=N))


def test_log_hull_idempotent():
    H = log_convex_hull(ReinhardtRegion.v_eps(0.3, n=N))
    assert np.array_equal(log_convex_hull(H).mask, H.mask)


def test_log_hull_empty():
    with pytest.raises(ValueError):
        log_convex_hull(ReinhardtRegion(np.zeros((4, 4), bool)))


def test_hartogs_v_eps_fills_bidisc():
    R = ReinhardtRegion.v_eps(0.2, n=N)
    F, trace = hartogs_completion(R, 0.2)
    r = F.axes()[0]
    assert F.mask[np.ix_(r <= 0.99, r <= 0.99)].all()
    assert np.all(np.diff(trace) >= 0.2 / 12 - F.cell)
    assert np.all(F.mask <= log_convex_hull(R).mask)


def test_hartogs_bidisc_zero_steps():
    F, trace = hartogs_completion(ReinhardtRegion.bidisc(n=N), 0.2)
    assert trace == [] and np.array_equal(F.mask, ReinhardtRegion.bidisc(n=N).mask)


@pytest.mark.parametrize("seed", range(10))
def test_hartogs_matches_log_hull(seed):
    rng = np.random.default_rng(seed)
    eps = 0.15 + 0.25 * rng.random()
    R = ReinhardtRegion.v_eps(eps, n=N)
    F, _ = hartogs_completion(R, eps)
    assert F.within_one_cell(log_convex_hull(R))


def test_pbm_round_trip(tmp_path):
    R = ReinhardtRegion.v_eps(0.25, n=33, rmax=(1.5, 1.25))
    R.save_pbm(tmp_path / "r.pbm")
    back = ReinhardtRegion.load_pbm(tmp_path / "r.pbm")
    assert np.array_equal(back.mask, R.mask) and back.rmax == R.rmax
    assert (tmp_path / "r.pbm").read_text().startswith("P1\n")


def test_pbm_rejects_other_formats():
    with pytest.raises(ValueError):
        ReinhardtRegion.from_pbm("P2\n1 1\n0\n")

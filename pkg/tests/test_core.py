import numpy as np
import pytest

from levikit.core import (BOUNDARY, EXTERIOR, INTERIOR, MAGIC, BoundaryData, ComplexJet2,
                          DimensionError, Domain, InvariantError, Jet2, ScalarGrid,
                          StencilError, complex_to_real_jet, csv_summary, dump_grid, fd_jet,
                          hopf_samples, load_grid, minimal_defining, real_to_complex_jet,
                          to_complex, to_real, torus_samples)


def sampled(grid, f):
    P = grid.points(np.ones(grid.shape, bool)).reshape(grid.shape + (grid.dims,))
    return grid.copy(f(P))


@pytest.fixture
def box3():
    return Domain.box([-1, -1, -1], [1, 1, 1]).grid(0.125)


# ---------------------------------------------------------------------------
# grids and domains


@pytest.mark.parametrize("dims,h", [(3, 1 / 8), (4, 1 / 4), (2, 1 / 16)])
def test_ball_grid_invariants(dims, h):
    g = Domain.ball(dims, 1.0).grid(h)
    g.check()
    assert set(np.unique(g.mask)) <= {EXTERIOR, BOUNDARY, INTERIOR}
    P = g.points(g.interior)
    assert np.all(np.sum(P ** 2, axis=1) < 1)
    # centred lattice: symmetric under x -> -x
    assert np.allclose(g.lo, -g.hi)


def test_ball_defining_function_exact():
    dom = Domain.ball(3, 2.0)
    x = np.array([[0.3, -1.0, 0.5]])
    assert dom.signed_defining(x)[0] == pytest.approx(np.sum(x ** 2) - 4.0, abs=1e-15)
    assert np.max(np.abs(dom.signed_defining(dom.boundary_samples))) <= dom.tol_bd


def test_grid_rejects_bad_spacing():
    with pytest.raises(ValueError):
        ScalarGrid(np.zeros(2), 0.0, np.zeros((3, 3)), np.zeros((3, 3)))


def test_hopf_samples_on_sphere():
    X = hopf_samples(0, nt=9, na=8, endpoints=True)
    assert np.allclose(np.sum(X ** 2, axis=1), 1.0)
    Z = to_complex(X)
    assert np.allclose(to_real(Z), X)


def test_torus_samples_moduli():
    Z = torus_samples(16, 8, 1.0, 0.5)
    assert Z.shape == (128, 2)
    assert np.allclose(np.abs(Z[:, 0]), 1.0) and np.allclose(np.abs(Z[:, 1]), 0.5)


# ---------------------------------------------------------------------------
# finite-difference jets


def test_fd_jet_x1_squared(box3):
    f = sampled(box3, lambda P: P[..., 0] ** 2)
    node = (5, 7, 9)
    j = fd_jet(f, node)
    x = f.point(node)
    assert np.allclose(j.hess, np.diag([2.0, 0, 0]), atol=1e-10)
    assert np.allclose(j.grad, [2 * x[0], 0, 0], atol=1e-10)


def test_fd_jet_constant(box3):
    j = fd_jet(sampled(box3, lambda P: 0 * P[..., 0] + 3.5), (8, 8, 8))
    assert np.allclose(j.grad, 0) and np.allclose(j.hess, 0)


@pytest.mark.parametrize("seed", range(5))
def test_fd_jet_exact_on_quadratics(box3, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    A = A + A.T
    b = rng.normal(size=3)

    def f(P):
        return 0.5 * np.einsum("...i,ij,...j->...", P, A, P) + P @ b + 1.0

    j = fd_jet(sampled(box3, f), (4, 10, 6))
    x = j.point
    scale = 1 + np.abs(A).max()
    assert np.max(np.abs(j.hess - A)) <= 1e-10 * scale
    assert np.max(np.abs(j.grad - (A @ x + b))) <= 1e-10 * scale


def test_fd_jet_second_order():
    errs = []
    for h in (0.1, 0.05):
        g = Domain.box([-1, -1, -1], [1, 1, 1]).grid(h)
        f = sampled(g, lambda P: np.sin(P[..., 0]))
        node = tuple(np.argmin(np.abs(g.axis(k) - 0.3)) for k in range(3))
        j = fd_jet(f, node)
        x = j.point[0]
        errs.append(abs(j.grad[0] - np.cos(x)) + abs(j.hess[0, 0] + np.sin(x)))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_fd_jet_rejects_boundary(box3):
    f = sampled(box3, lambda P: P[..., 0])
    with pytest.raises(StencilError):
        fd_jet(f, (0, 4, 4))


# ---------------------------------------------------------------------------
# complex jets


def jet4(grad=None, hess=None, point=None):
    return Jet2(np.zeros(4) if point is None else np.asarray(point, float), 0.0,
                np.zeros(4) if grad is None else np.asarray(grad, float),
                np.zeros((4, 4)) if hess is None else np.asarray(hess, float))


def test_complex_jet_of_x1():
    cj = real_to_complex_jet(jet4(grad=[1, 0, 0, 0]))
    assert np.allclose(cj.dz, [0.5, 0])


def test_complex_jet_of_x4():
    cj = real_to_complex_jet(jet4(grad=[0, 0, 0, 1]))
    assert np.allclose(cj.dz, [0, -0.5j])


def test_complex_jet_of_z1_modulus_squared():
    cj = real_to_complex_jet(jet4(hess=np.diag([2.0, 2.0, 0, 0])))
    assert np.allclose(cj.mixed, [[1, 0], [0, 0]])


@pytest.mark.parametrize("seed", range(10))
def test_complex_jet_round_trip(seed):
    rng = np.random.default_rng(seed)
    H = rng.normal(size=(4, 4))
    H = H + H.T
    j = jet4(rng.normal(size=4), H, rng.normal(size=4))
    cj = real_to_complex_jet(j)
    cj.check()
    assert np.allclose(cj.dzbar, cj.dz.conj())
    # the pure second derivatives u_{z_a z_b} complete the real Hessian
    pure = []
    for a, b in ((0, 0), (0, 1), (1, 1)):
        i, k = 2 * a, 2 * b
        pure.append(0.25 * (H[i, k] - H[i + 1, k + 1] - 1j * (H[i, k + 1] + H[i + 1, k])))
    back = complex_to_real_jet(cj, np.array(pure))
    assert np.max(np.abs(back.hess - H)) <= 1e-12 * (1 + np.abs(H).max())
    assert np.allclose(back.grad, j.grad, atol=1e-12)
    assert np.allclose(back.point, j.point)


def test_complex_jet_needs_four_dims():
    with pytest.raises(DimensionError):
        real_to_complex_jet(Jet2(np.zeros(3), 0.0, np.zeros(3), np.zeros((3, 3))))


def test_complex_jet_hermitian_check():
    cj = ComplexJet2(np.zeros(2), np.zeros(2), np.zeros(2), [[1, 1j], [1j, 0]])
    with pytest.raises(InvariantError):
        cj.check()


# ---------------------------------------------------------------------------
# boundary data


def test_boundary_data_impose_extension():
    dom = Domain.ball(3, 1.0)
    g = BoundaryData.from_function(dom, lambda P: np.atleast_2d(P)[:, 0])
    grid = g.impose(dom.grid(0.25))
    P = grid.points(grid.boundary)
    assert np.allclose(grid.values[grid.boundary], P[:, 0])


def test_boundary_data_nearest_rule():
    dom = Domain.ball(3, 1.0)
    g = BoundaryData.from_function(dom, lambda P: np.atleast_2d(P)[:, 2], rule="nearest")
    v = g.evaluate(np.array([[0.0, 0.0, 1.0]]))
    assert v[0] == pytest.approx(1.0, abs=0.05)


def test_minimal_defining_peaks():
    dom = Domain.ball(4, 1.0, n_samples=2000)
    g = BoundaryData.from_function(dom, lambda P: np.atleast_2d(P)[:, 3])
    m = minimal_defining(g, radius=0.4)
    m.check_peaks()
    # zero set unchanged
    z = np.abs(g.values) < 1e-3
    assert np.allclose(m.values[z], g.values[z])


def test_minimal_defining_rejects_wide_bumps():
    dom = Domain.ball(4, 1.0, n_samples=500)
    g = BoundaryData.from_function(dom, lambda P: np.atleast_2d(P)[:, 3])
    with pytest.raises(ValueError):
        minimal_defining(g, radius=1.5)


# ---------------------------------------------------------------------------
# serialization


def test_grid_dump_round_trip(tmp_path):
    g = Domain.ball(3, 1.0).grid(0.25)
    f = sampled(g, lambda P: P[..., 0] * P[..., 1] + 0.1)
    dump_grid(f, tmp_path / "f.grid")
    raw = (tmp_path / "f.grid").read_bytes()
    assert raw.startswith(MAGIC.encode())
    back = load_grid(tmp_path / "f.grid")
    assert back.shape == f.shape and back.h == pytest.approx(f.h)
    assert np.array_equal(back.values, f.values)


def test_csv_summary():
    text = csv_summary([("a", 1.5), ("b", True), ("c", 3)])
    assert text.splitlines() == ["name,value", "a,1.5", "b,true", "c,3"]

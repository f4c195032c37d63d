"""Generator/semigroup/projection operations against independent oracles."""

import numpy as np
import pytest
import scipy.integrate

from mildlab.errors import IllConditionedResolventError, NoLimitError
from mildlab.operators import (
    SUP,
    WEIGHTED_L2,
    Generator,
    GridMeta,
    Projection,
    StateVector,
    dissipativity_check,
    expm_apply,
    limit_projection,
    neumann_laplacian_1d,
    resolvent_apply,
    state_norm,
)


def taylor_expm(matrix: np.ndarray, terms: int = 40) -> np.ndarray:
    """Scaled 40-term Taylor series with repeated squaring; the expm oracle."""
    norm = np.max(np.abs(matrix))
    squarings = max(0, int(np.ceil(np.log2(max(norm, 1e-300)))) + 1)
    scaled = matrix / 2.0 ** squarings
    acc = np.eye(matrix.shape[0])
    term = np.eye(matrix.shape[0])
    for k in range(1, terms + 1):
        term = term @ scaled / k
        acc = acc + term
    for _ in range(squarings):
        acc = acc @ acc
    return acc


def kolmogorov_3state() -> np.ndarray:
    return np.array([
        [-1.0, 0.7, 0.3],
        [0.2, -0.6, 0.4],
        [0.5, 0.5, -1.0],
    ])


def stationary_by_nullspace(q: np.ndarray) -> np.ndarray:
    """Stationary distribution via the SVD null space of Q^T; the projection oracle."""
    _, _, vt = np.linalg.svd(q.T)
    null = vt[-1]
    null = np.abs(null)
    return null / null.sum()


# --- expm_apply -----------------------------------------------------------

def test_expm_zero_matrix_is_identity():
    gen = Generator.from_matrix(np.zeros((3, 3)))
    x = StateVector(np.array([1.0, 2.0, 3.0]))
    out = expm_apply(gen, 7.0, x)
    assert np.array_equal(out.values, x.values)


def test_expm_nilpotent():
    gen = Generator.from_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    out = expm_apply(gen, 1.0, StateVector(np.array([0.0, 1.0])))
    assert np.allclose(out.values, [1.0, 1.0], atol=1e-14)


def test_expm_matches_taylor_oracle_on_symmetric_matrix():
    rng = np.random.default_rng(42)
    basis, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    eigs = rng.uniform(-5.0, 0.0, size=6)
    matrix = basis @ np.diag(eigs) @ basis.T
    gen = Generator.from_matrix(matrix)
    x = rng.standard_normal(6)
    expected = taylor_expm(0.3 * matrix) @ x
    got = expm_apply(gen, 0.3, StateVector(x)).values
    assert np.max(np.abs(got - expected)) <= 1e-10 * np.max(np.abs(expected))


def test_expm_t0_identity_path_and_validation():
    gen = Generator.from_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    x = StateVector(np.array([1.0, -1.0]))
    assert expm_apply(gen, 0.0, x) is x
    with pytest.raises(ValueError):
        expm_apply(gen, -1.0, x)
    with pytest.raises(ValueError):
        expm_apply(gen, 1.0, StateVector(np.ones(3)))


def test_expm_general_route_matches_taylor():
    rng = np.random.default_rng(5)
    matrix = rng.standard_normal((5, 5))
    gen = Generator.from_matrix(matrix, weights=rng.uniform(0.5, 1.5, 5))
    assert gen.propagator.mode == "general"
    x = rng.standard_normal(5)
    expected = taylor_expm(0.7 * matrix) @ x
    got = expm_apply(gen, 0.7, StateVector(x)).values
    assert np.max(np.abs(got - expected)) <= 1e-10 * max(1.0, np.max(np.abs(expected)))


# --- resolvent_apply ------------------------------------------------------

def test_resolvent_zero_generator():
    gen = Generator.from_matrix(np.zeros((2, 2)))
    out = resolvent_apply(gen, 2.0, StateVector(np.array([4.0, 6.0])))
    assert np.allclose(out.values, [2.0, 3.0], atol=1e-14)


def test_resolvent_inverse_identity():
    rng = np.random.default_rng(11)
    for _ in range(20):
        dim = int(rng.integers(2, 7))
        matrix = rng.standard_normal((dim, dim))
        matrix -= np.eye(dim) * (np.max(np.abs(np.linalg.eigvals(matrix)).real) + 0.5)
        gen = Generator.from_matrix(matrix, stability_bound=0.0)
        y = rng.standard_normal(dim)
        lam = float(rng.uniform(0.5, 3.0))
        x = resolvent_apply(gen, lam, StateVector(y)).values
        back = lam * x - matrix @ x
        assert np.max(np.abs(back - y)) <= 1e-9 * max(1.0, np.max(np.abs(y)))


def test_resolvent_matches_laplace_quadrature_oracle():
    gen = Generator.from_matrix(np.array([[-1.0]]))
    got = resolvent_apply(gen, 1.0, StateVector(np.array([1.0]))).values[0]
    assert got == pytest.approx(0.5, abs=1e-12)
    oracle, _ = scipy.integrate.quad(lambda t: np.exp(-1.0 * t) * np.exp(-t), 0.0, np.inf)
    assert abs(got - oracle) <= 1e-6


def test_resolvent_rejects_singular_shift():
    gen = Generator.from_matrix(np.diag([0.0, -1.0]), stability_bound=-2.0)
    with pytest.raises(IllConditionedResolventError):
        resolvent_apply(gen, 0.0, StateVector(np.ones(2)))
    with pytest.raises(ValueError):
        resolvent_apply(gen, -3.0, StateVector(np.ones(2)))


# --- limit_projection -----------------------------------------------------

def test_limit_projection_neumann_laplacian_is_weighted_average():
    lap, w = neumann_laplacian_1d(24)
    gen = Generator(lap, GridMeta(1.0 / 23, "neumann", w))
    proj = limit_projection(gen)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(24)
    mean = w @ f
    assert np.max(np.abs(proj.apply(f) - mean)) <= 1e-8
    assert np.max(np.abs(proj.matrix @ proj.matrix - proj.matrix)) <= 1e-10


def test_limit_projection_zero_matrix_is_identity():
    gen = Generator.from_matrix(np.zeros((4, 4)))
    proj = limit_projection(gen)
    assert np.allclose(proj.matrix, np.eye(4), atol=1e-12)
    assert proj.range_dim == 4


def test_limit_projection_kolmogorov_matches_nullspace_oracle():
    q = kolmogorov_3state()
    gen = Generator.from_matrix(q)
    proj = limit_projection(gen)
    pi = stationary_by_nullspace(q)
    for row in proj.matrix:
        assert np.max(np.abs(row - pi)) <= 1e-8


def test_limit_projection_rejects_rotation():
    gen = Generator.from_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]))
    with pytest.raises(NoLimitError):
        limit_projection(gen, t_big=5.0)


def test_projection_kernel_relation():
    # discrete analog of: the generator vanishes on the projection's range
    lap, w = neumann_laplacian_1d(16)
    gen = Generator(lap, GridMeta(1.0 / 15, "neumann", w))
    proj = limit_projection(gen)
    assert np.max(np.abs(proj.matrix @ gen.matrix @ proj.matrix)) <= 1e-8
    q = kolmogorov_3state()
    proj_q = limit_projection(Generator.from_matrix(q))
    assert np.max(np.abs(proj_q.matrix @ q @ proj_q.matrix)) <= 1e-8


# --- dissipativity_check --------------------------------------------------

def test_dissipativity_zero_generator():
    gen = Generator.from_matrix(np.zeros((3, 3)))
    assert dissipativity_check(gen, 3) == pytest.approx(1.0, abs=1e-12)


def test_dissipativity_neumann_laplacian_sup_contraction():
    n = 20
    lap, w = neumann_laplacian_1d(n)
    # maximum-principle oracle: explicit Euler with small dt is a convex
    # combination (nonneg entries, unit row sums), hence sup-contractive
    dt = 0.4 * (1.0 / (n - 1)) ** 2
    euler = np.eye(n) + dt * lap
    assert np.min(euler) >= 0
    assert np.allclose(euler.sum(axis=1), 1.0, atol=1e-12)
    gen = Generator(lap, GridMeta(1.0 / (n - 1), "neumann", w))
    assert dissipativity_check(gen, 5, norm_kind=SUP) <= 1.0 + 1e-8


def test_dissipativity_flags_expanding_generator():
    gen = Generator.from_matrix(np.array([[1.0]]))
    assert dissipativity_check(gen, 2) > 1.0


# --- type invariants ------------------------------------------------------

def test_generator_rejects_bad_input():
    with pytest.raises(ValueError):
        Generator.from_matrix(np.array([[np.nan, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        Generator.from_matrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        GridMeta(0.0, "neumann", np.ones(2))
    with pytest.raises(ValueError):
        GridMeta(1.0, "periodic", np.ones(2))


def test_projection_type_invariants():
    with pytest.raises(ValueError):
        Projection(np.array([[0.5, 0.0], [0.0, 1.0]]), 2)  # not idempotent
    with pytest.raises(ValueError):
        Projection(np.eye(3), 2)  # rank mismatch
    proj = Projection(np.eye(3), 3)
    assert proj.range_dim == 3


def test_state_norms():
    v = np.array([3.0, -4.0])
    w = np.array([0.5, 0.5])
    assert state_norm(v, SUP) == 4.0
    assert state_norm(v, WEIGHTED_L2, w) == pytest.approx(np.sqrt(12.5))
    assert state_norm(v, "weighted-l1", w) == pytest.approx(3.5)
    with pytest.raises(ValueError):
        state_norm(v, WEIGHTED_L2)


def test_stability_bound_claim_on_contractive_generators():
    # claimed bound 0 means ||exp(t A) x|| <= 1 + 1e-8 for unit x, t in {0.1, 1, 10}
    lap, w = neumann_laplacian_1d(12)
    gen = Generator(lap, GridMeta(1.0 / 11, "neumann", w), stability_bound=0.0)
    rng = np.random.default_rng(21)
    for _ in range(25):
        x = rng.standard_normal(12)
        x /= state_norm(x, SUP)
        for t in (0.1, 1.0, 10.0):
            y = gen.propagator.apply(t, x)
            assert state_norm(y, SUP) <= 1.0 + 1e-8


# --- semigroup properties -------------------------------------------------

def test_semigroup_law_random_generators():
    # equibounded scope: shift each draw so its numerical range is nonpositive
    rng = np.random.default_rng(100)
    for _ in range(100):
        dim = int(rng.integers(2, 7))
        matrix = rng.standard_normal((dim, dim))
        matrix -= np.eye(dim) * np.max(np.linalg.eigvalsh(0.5 * (matrix + matrix.T)))
        gen = Generator.from_matrix(matrix)
        s, t = rng.uniform(0.0, 2.0, size=2)
        x = rng.standard_normal(dim)
        once = gen.propagator.apply(s + t, x)
        twice = gen.propagator.apply(s, gen.propagator.apply(t, x))
        assert np.max(np.abs(once - twice)) <= 1e-9 * max(1.0, np.max(np.abs(x)))


def test_conservativity_of_kolmogorov_semigroups():
    rng = np.random.default_rng(33)
    for _ in range(100):
        dim = int(rng.integers(2, 6))
        q = rng.uniform(0.0, 2.0, size=(dim, dim))
        np.fill_diagonal(q, 0.0)
        np.fill_diagonal(q, -q.sum(axis=1))
        gen = Generator.from_matrix(q)
        t = float(rng.uniform(0.0, 5.0))
        e = gen.propagator.matrix_exp(t)
        assert np.max(np.abs(e.sum(axis=1) - 1.0)) <= 1e-10
        assert np.min(e) >= -1e-12

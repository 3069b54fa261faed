import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optsample import (
    FunctionalSet,
    GenerativeModel,
    InfoMatrix,
    Objective,
    ObjectiveKind,
    UnidentifiableError,
    build_f_matrix,
    build_info_matrix,
    check_identifiability,
    enumerate_bk,
    objective_value,
    simulate_estimation,
)
from optsample.model import Functional, objective_gradient

from .conftest import FIVE_PATH_VECTORS

RANK_TWO = [(1, 1, 3), (1, 1, 0), (-2, -2, 5)]


def random_identifiable_set(seed, n=4, size=7):
    rng = np.random.default_rng(seed)
    return FunctionalSet(rng.integers(-3, 4, size=(size, n)) + np.eye(size, n) * 5)


def random_simplex(rng, k):
    return rng.dirichlet(np.ones(k))


# ---------------------------------------------------------------------------
# construction


def test_functional_set_validation():
    with pytest.raises(ValueError):
        FunctionalSet([[0, 0, 0]])
    with pytest.raises(ValueError):
        FunctionalSet([[1, 0], [1, 0]])
    with pytest.raises(ValueError):
        FunctionalSet([[1, 0]], costs=[-1.0])
    with pytest.raises(ValueError):
        Functional((0.0, 0.0))
    fs = FunctionalSet.from_functionals([Functional((1, 0), 2.0), Functional((0, 1))])
    assert fs.costs.tolist() == [2.0, 1.0]
    assert [f.cost for f in fs] == [2.0, 1.0]


def test_info_matrix_rejects_non_psd():
    with pytest.raises(ValueError):
        InfoMatrix([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        InfoMatrix([[1.0, 0.5], [0.0, 1.0]])


def test_b1_uniform_is_scaled_identity():
    M = build_info_matrix(enumerate_bk(3, 1), np.full(3, 1 / 3))
    np.testing.assert_allclose(M.entries, np.eye(3) / 3, atol=1e-15)
    assert objective_value(M, ObjectiveKind.A_TRACE) == pytest.approx(9.0, rel=1e-12)


def test_rank_two_set_single_functional_with_variances():
    fs = FunctionalSet(RANK_TWO)
    M = build_info_matrix(fs, [1, 0, 0], variances=[1, 1, 2])
    x = np.array([1.0, 1.0, 3.0])
    np.testing.assert_allclose(M.entries, np.outer(x, x) / 20.0, atol=1e-15)


def test_five_path_dag_paths_match_brute_force_sum():
    X = np.array(sorted(FIVE_PATH_VECTORS), dtype=float)
    p = np.full(5, 0.2)
    expected = sum(pi * np.outer(x, x) / (x @ x) for x, pi in zip(X, p))
    np.testing.assert_allclose(build_info_matrix(FunctionalSet(X), p).entries, expected, atol=1e-12)


def test_b52_uniform_trace():
    fs = enumerate_bk(5, 2)
    M = build_info_matrix(fs, fs.uniform())
    np.testing.assert_allclose(M.eigenvalues, [0.15, 0.15, 0.15, 0.15, 0.4], atol=1e-12)
    assert objective_value(M, "a-trace") == pytest.approx(175 / 6, rel=1e-12)


# ---------------------------------------------------------------------------
# identifiability and objectives


def test_rank_two_set_identifiability():
    rep = check_identifiability(FunctionalSet(RANK_TWO))
    assert rep.rank == 2 and not rep.identifiable
    null = rep.null_basis[0]
    np.testing.assert_allclose(abs(null @ np.array([1, -1, 0]) / np.sqrt(2)), 1.0, atol=1e-9)
    M = build_info_matrix(FunctionalSet(RANK_TWO), np.full(3, 1 / 3))
    with pytest.raises(UnidentifiableError):
        objective_value(M, "a-trace")
    assert np.isfinite(objective_value(M, "a-pseudo-trace"))


def test_b1_identifiable():
    rep = check_identifiability(enumerate_bk(4, 1))
    assert rep.rank == 4 and rep.null_basis.shape == (0, 4)


def test_zero_matrix_is_unidentifiable():
    with pytest.raises(UnidentifiableError):
        objective_value(np.zeros((2, 2)), "a-pseudo-trace")


def test_e_criterion_is_min_eigenvalue():
    F = np.diag([3.0, 0.5, 2.0])
    assert objective_value(F, "e-min-eig") == 0.5
    assert Objective.coerce("e-min-eig").maximize
    assert not Objective.coerce("a-trace").maximize


def test_objective_rejects_bad_rank_tolerance():
    with pytest.raises(ValueError):
        Objective(ObjectiveKind.A_TRACE, rank_tolerance=0.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.01, 0.99))
def test_info_matrix_linear_and_psd(seed, lam):
    fs = random_identifiable_set(seed)
    rng = np.random.default_rng(seed)
    p, q = random_simplex(rng, len(fs)), random_simplex(rng, len(fs))
    Mp, Mq = build_info_matrix(fs, p), build_info_matrix(fs, q)
    Mpq = build_info_matrix(fs, lam * p + (1 - lam) * q)
    np.testing.assert_allclose(Mpq.entries, lam * Mp.entries + (1 - lam) * Mq.entries, atol=1e-12)
    assert Mpq.eigenvalues[0] >= -1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), lam=st.floats(0.01, 0.99))
def test_a_trace_convex(seed, lam):
    fs = random_identifiable_set(seed)
    rng = np.random.default_rng(seed + 1)
    p, q = random_simplex(rng, len(fs)), random_simplex(rng, len(fs))
    f = lambda w: objective_value(build_info_matrix(fs, w), "a-trace")  # noqa: E731
    assert f(lam * p + (1 - lam) * q) <= lam * f(p) + (1 - lam) * f(q) + 1e-9


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_pseudo_trace_equals_trace_when_nonsingular(seed):
    fs = random_identifiable_set(seed)
    M = build_info_matrix(fs, random_simplex(np.random.default_rng(seed), len(fs)))
    a = objective_value(M, "a-trace")
    assert objective_value(M, "a-pseudo-trace") == pytest.approx(a, rel=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    fs = random_identifiable_set(seed)
    rng = np.random.default_rng(seed)
    p = random_simplex(rng, len(fs))
    var = rng.uniform(0.5, 2.0, fs.dimension)
    grad = objective_gradient(fs, p, var, "a-trace")

    def f(w):
        X, s = fs.matrix, w / fs.functional_variances(var)
        return np.trace(np.linalg.inv((X * s[:, None]).T @ X))

    h = 1e-6
    for i in range(len(fs)):
        e = np.zeros(len(fs))
        e[i] = h
        fd = (f(p + e) - f(p - e)) / (2 * h)
        assert grad[i] == pytest.approx(fd, rel=1e-5, abs=1e-5)


@pytest.mark.parametrize("seed", range(5))
def test_identifiability_iff_finite_trace(seed):
    rng = np.random.default_rng(seed)
    n = 4
    rows = rng.integers(0, 2, size=(rng.integers(2, 7), n))
    rows = np.unique(rows[rows.any(axis=1)], axis=0)
    if len(rows) == 0:
        rows = np.eye(1, n)
    fs = FunctionalSet(rows)
    M = build_info_matrix(fs, random_simplex(rng, len(fs)) * 0.9 + 0.1 / len(fs))
    finite = True
    try:
        objective_value(M, "a-trace")
    except UnidentifiableError:
        finite = False
    assert finite == check_identifiability(fs).identifiable


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_loewner_sandwich(seed):
    fs = random_identifiable_set(seed)
    p = random_simplex(np.random.default_rng(seed), len(fs))
    M = build_info_matrix(fs, p).entries
    F = build_f_matrix(fs, p).entries
    norms = (fs.matrix**2).sum(axis=1)
    assert np.linalg.eigvalsh(F - norms.min() * M)[0] >= -1e-9
    assert np.linalg.eigvalsh(norms.max() * M - F)[0] >= -1e-9


def test_constant_norm_f_is_scaled_m():
    fs = enumerate_bk(6, 3)
    p = random_simplex(np.random.default_rng(0), len(fs))
    M, F = build_info_matrix(fs, p).entries, build_f_matrix(fs, p).entries
    assert np.max(np.abs(F - 3 * M)) <= 1e-10


# ---------------------------------------------------------------------------
# Monte-Carlo


def test_simulation_scalar_mean():
    fs = FunctionalSet([[1.0]])
    res = simulate_estimation(fs, [1.0], GenerativeModel([2.0]), samples=100, trials=2000, seed=1)
    assert res.predicted == pytest.approx(0.01, rel=1e-12)
    assert abs(res.empirical_mse_trace - res.predicted) <= 0.1 * res.predicted


def test_simulation_b1():
    fs = enumerate_bk(2, 1)
    res = simulate_estimation(fs, [0.5, 0.5], GenerativeModel([0.0, 1.0]), samples=1000, trials=2000, seed=2)
    assert abs(res.empirical_mse_trace - res.predicted) <= 0.1 * res.predicted


def test_simulation_rejects_dimension_mismatch():
    with pytest.raises(ValueError):
        simulate_estimation(enumerate_bk(2, 1), [0.5, 0.5], GenerativeModel([0.0]), 10, 10, 0)


def test_simulation_unidentifiable_support():
    with pytest.raises(UnidentifiableError):
        simulate_estimation(FunctionalSet([[1.0, 1.0]]), [1.0], GenerativeModel([0.0, 0.0]), 10, 2, 0, max_retries=3)

import numpy as np
import pytest

from unlearnkit import linalg
from unlearnkit.errors import DimensionMismatch, NotPositiveDefinite


def test_factorize_identity():
    f = linalg.factorize(np.eye(3))
    assert np.allclose(f.lower, np.eye(3))


def test_factorize_hand_cholesky():
    f = linalg.factorize([[4.0, 2.0], [2.0, 3.0]])
    expected = np.array([[2.0, 0.0], [1.0, np.sqrt(2.0)]])
    assert np.allclose(f.lower, expected)
    assert np.allclose(f.reconstruct(), [[4.0, 2.0], [2.0, 3.0]])


def test_factorize_indefinite_rejected():
    with pytest.raises(NotPositiveDefinite):
        linalg.factorize([[1.0, 2.0], [2.0, 1.0]])


def test_factorize_near_singular_rejected():
    with pytest.raises(NotPositiveDefinite):
        linalg.factorize(np.diag([1.0, 1e-13]))


def test_factorize_counts():
    before = linalg.factorization_count()
    linalg.factorize(np.eye(2))
    linalg.factorize(np.eye(2))
    assert linalg.factorization_count() == before + 2


def test_solve_identity():
    f = linalg.factorize(np.eye(2))
    assert np.allclose(linalg.solve(f, [3.0, -1.0]), [3.0, -1.0])


def test_solve_diagonal():
    f = linalg.factorize([[2.0, 0.0], [0.0, 4.0]])
    assert np.allclose(linalg.solve(f, [2.0, 4.0]), [1.0, 1.0])


def test_solve_hand_example():
    f = linalg.factorize([[4.0, 2.0], [2.0, 3.0]])
    x = linalg.solve(f, [6.0, 5.0])
    assert np.allclose(x, [1.0, 1.0])


def test_solve_dimension_mismatch():
    f = linalg.factorize(np.eye(2))
    with pytest.raises(DimensionMismatch):
        linalg.solve(f, [1.0, 2.0, 3.0])


@pytest.mark.parametrize("d", [1, 7, 120, 500])
def test_roundtrip_and_residual_random_spd(d):
    rng = np.random.default_rng(d)
    b = rng.standard_normal((d, d))
    h = b.T @ b + np.eye(d)
    f = linalg.factorize(h)
    rel = np.linalg.norm(f.reconstruct() - f.matrix) / np.linalg.norm(f.matrix)
    assert rel <= 1e-10
    rhs = rng.standard_normal(d)
    x = linalg.solve(f, rhs)
    assert np.linalg.norm(f.matrix @ x - rhs) <= 1e-8 * (1.0 + np.linalg.norm(rhs))


def test_sym_rejects_nonsquare():
    with pytest.raises(DimensionMismatch):
        linalg.sym(np.ones((2, 3)))


def test_vector_rejects_nan():
    with pytest.raises(ValueError):
        linalg.as_vector([1.0, np.nan])


def test_gaussian_zero_scale_exact():
    assert np.array_equal(linalg.gaussian_sample(0.0, 5, seed=3), np.zeros(5))


def test_gaussian_moments():
    s = linalg.gaussian_sample(1.0, 10**5, seed=7)
    assert abs(np.mean(s)) <= 0.02
    assert abs(np.std(s) - 1.0) <= 0.02


def test_gaussian_deterministic_per_seed():
    a = linalg.gaussian_sample(0.3, 10, seed=42)
    b = linalg.gaussian_sample(0.3, 10, seed=42)
    c = linalg.gaussian_sample(0.3, 10, seed=43)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_gaussian_rejects_negative_scale():
    with pytest.raises(ValueError):
        linalg.gaussian_sample(-1.0, 3, seed=0)

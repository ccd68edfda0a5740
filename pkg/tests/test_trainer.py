import numpy as np
import pytest

from conftest import make_dataset, scalar_dataset
from unlearnkit import data, objectives, trainer
from unlearnkit.errors import AllDataDeleted, EmptyDataset
from unlearnkit.objectives import L1, L2, NO_REG, LossKind, ObjectiveSpec

SQ_FREE = ObjectiveSpec(LossKind.SQUARED, NO_REG, lam=0.0)


def test_scalar_mean():
    model = trainer.train(scalar_dataset([1.0, 2.0, 3.0]), SQ_FREE)
    assert np.allclose(model.theta, [2.0], atol=1e-9)
    assert model.gradient_norm_at_solution <= model.tol


def test_l2_shrinkage():
    # minimize mean squared error + lam*theta^2 with z_bar=2, lam=1 -> 2/3
    spec = ObjectiveSpec(LossKind.SQUARED, L2, lam=1.0)
    model = trainer.train(scalar_dataset([1.0, 2.0, 3.0]), spec)
    assert np.allclose(model.theta, [2.0 / 3.0], atol=1e-9)


def test_l1_large_lambda_kills_coefficients():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((30, 3))
    y = rng.choice([-1.0, 1.0], size=30)
    ds = make_dataset(X, y)
    # threshold condition: lambda above the max mean score at the origin
    thresh = np.max(np.abs((X.T @ y) / 30.0)) / 2.0
    spec = ObjectiveSpec(LossKind.LOGISTIC, L1, lam=2.0 * thresh + 0.1)
    model = trainer.train(ds, spec)
    assert np.allclose(model.theta, 0.0, atol=1e-9)


def test_nonsmooth_residual_contract():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((40, 4))
    y = rng.choice([-1.0, 1.0], size=40)
    ds = make_dataset(X, y)
    spec = ObjectiveSpec(LossKind.LOGISTIC, L1, lam=0.01)
    model = trainer.train(ds, spec, tol=1e-8)
    assert trainer.prox_gradient_residual(spec, X, y, model.theta) <= 1e-8


def test_leave_out_empty_set_is_train():
    ds = scalar_dataset([1.0, 2.0, 3.0])
    a = trainer.train(ds, SQ_FREE)
    b = trainer.train_leave_out(ds, SQ_FREE, set())
    assert np.array_equal(a.theta, b.theta)


def test_leave_out_scalar_example():
    ds = scalar_dataset([0.0, 2.0])
    model = trainer.train_leave_out(ds, SQ_FREE, {1})
    assert np.allclose(model.theta, [0.0], atol=1e-9)


def test_leave_out_all_rows_rejected():
    ds = scalar_dataset([0.0, 2.0])
    with pytest.raises(AllDataDeleted):
        trainer.train_leave_out(ds, SQ_FREE, {0, 1})


def test_train_empty_dataset():
    ds = scalar_dataset([1.0])
    with pytest.raises(AllDataDeleted):
        trainer.train_leave_out(ds, SQ_FREE, {0})
    with pytest.raises(ValueError):
        trainer.train(ds, SQ_FREE, tol=0.0)
    with pytest.raises(EmptyDataset):
        trainer.train(make_dataset(np.zeros((0, 1)), np.zeros(0)), SQ_FREE)


def _outlier_dataset(n):
    values = np.full(n, -1.0 / n)
    values[-1] = float(n)
    return scalar_dataset(values)


@pytest.mark.parametrize("n", [2, 10])
def test_cv_selects_big_lambda_on_outlier_data(n):
    spec = ObjectiveSpec(LossKind.SQUARED, L2, lam=0.0)
    result = trainer.cv_select(_outlier_dataset(n), spec, [0.0, 1e12])
    assert result.selected == 1e12


def test_cv_selects_zero_after_outlier_removed():
    ds = _outlier_dataset(10).subset(np.arange(9))
    spec = ObjectiveSpec(LossKind.SQUARED, L2, lam=0.0)
    result = trainer.cv_select(ds, spec, [0.0, 1e12])
    assert result.selected == 0.0


def test_cv_single_lambda_grid():
    spec = ObjectiveSpec(LossKind.SQUARED, L2, lam=0.0)
    result = trainer.cv_select(scalar_dataset([1.0, 2.0]), spec, [0.25])
    assert result.selected == 0.25
    with pytest.raises(ValueError):
        trainer.cv_select(scalar_dataset([1.0, 2.0]), spec, [])


def test_train_deterministic(blobs_model, logistic_l2_spec):
    ds, model = blobs_model
    again = trainer.train(ds, logistic_l2_spec)
    assert np.array_equal(model.theta, again.theta)


def test_perturbation_optimality(blobs_model, logistic_l2_spec):
    ds, model = blobs_model
    spec = logistic_l2_spec
    base = objectives.objective_value(spec, ds.X, ds.y, model.theta)
    rng = np.random.default_rng(9)
    for _ in range(50):
        delta = rng.standard_normal(ds.d)
        delta *= 0.1 / np.linalg.norm(delta)
        assert objectives.objective_value(spec, ds.X, ds.y,
                                          model.theta + delta) >= base


def test_solver_consistency_across_tolerances(blobs_model, logistic_l2_spec):
    ds, _ = blobs_model
    mu = 2.0 * logistic_l2_spec.lam  # strong convexity from the L2 penalty
    a = trainer.train(ds, logistic_l2_spec, tol=1e-6)
    b = trainer.train(ds, logistic_l2_spec, tol=1e-10)
    assert np.linalg.norm(a.theta - b.theta) <= (1e-6 + 1e-10) / mu


def test_leave_out_proximity_bound():
    # ||theta_n - theta_{n,-U}|| <= m L / (mu n) with estimated constants
    spec = ObjectiveSpec(LossKind.LOGISTIC, L2, lam=0.05)
    rng = np.random.default_rng(10)
    for seed in (0, 1, 2):
        ds = data.synth_gaussian_blobs(300, 8, 2.0, seed=seed)
        model = trainer.train(ds, spec)
        k = objectives.estimate_constants(ds.X, ds.y, spec, model.theta)
        for m in (1, 5):
            U = set(int(i) for i in rng.choice(ds.ids, size=m, replace=False))
            rt = trainer.train_leave_out(ds, spec, U)
            gap = np.linalg.norm(model.theta - rt.theta)
            assert gap <= m * k.L / (k.mu * ds.n)

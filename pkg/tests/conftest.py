import numpy as np
import pytest

from unlearnkit import data, objectives, trainer


def make_dataset(X, y, test_idx=()):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    test_idx = np.asarray(test_idx, dtype=int)
    train_idx = np.setdiff1d(np.arange(n), test_idx)
    return data.Dataset(X=X, y=y, ids=np.arange(n),
                        train_idx=train_idx, test_idx=test_idx)


def scalar_dataset(values):
    """1-d squared-error data: feature is ignored, y holds the targets."""
    values = np.asarray(values, dtype=float)
    return make_dataset(np.ones((len(values), 1)), values)


@pytest.fixture
def logistic_l2_spec():
    return objectives.ObjectiveSpec(loss=objectives.LossKind.LOGISTIC,
                                    reg=objectives.L2, lam=0.05)


@pytest.fixture
def blobs_model(logistic_l2_spec):
    ds = data.synth_gaussian_blobs(200, 5, 3.0, seed=1)
    model = trainer.train(ds, logistic_l2_spec)
    return ds, model

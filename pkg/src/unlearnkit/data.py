"""Dataset container, CSV ingestion, synthetic generation, deletion streams."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadShape,
    NonBinaryLabels,
    ParseError,
    RaggedRows,
    StreamTooLong,
)


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with binary labels and stable row ids.

    Labels are held internally as {-1, +1}; {0, 1} inputs are remapped at
    ingestion. Optional train/test index arrays are disjoint row positions.
    """

    X: np.ndarray
    y: np.ndarray
    ids: np.ndarray
    train_idx: np.ndarray | None = None
    test_idx: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[0] != len(y):
            raise BadShape(f"X is {X.shape}, y has length {len(y)}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise BadShape("dataset contains NaN or Inf")
        if self.train_idx is not None and self.test_idx is not None:
            if np.intersect1d(self.train_idx, self.test_idx).size:
                raise BadShape("train and test splits overlap")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ids", np.asarray(self.ids))
        X.setflags(write=False)
        y.setflags(write=False)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    def subset(self, positions):
        positions = np.asarray(positions, dtype=int)
        return Dataset(self.X[positions].copy(), self.y[positions].copy(),
                       self.ids[positions].copy())

    def train_view(self):
        """Dataset restricted to the train split (self if no split)."""
        if self.train_idx is None:
            return self
        return self.subset(self.train_idx)

    def test_arrays(self):
        if self.test_idx is None:
            raise BadShape("dataset has no test split")
        return self.X[self.test_idx], self.y[self.test_idx]

    def rows_for_ids(self, id_list):
        """Row positions for the given stable ids, in the given order."""
        lookup = {v: i for i, v in enumerate(self.ids)}
        return np.array([lookup[i] for i in id_list], dtype=int)


def _remap_labels(y):
    vals = set(np.unique(y))
    if vals <= {-1.0, 1.0}:
        return y
    if vals <= {0.0, 1.0}:
        return 2.0 * y - 1.0
    raise NonBinaryLabels(f"labels must be in {{0,1}} or {{-1,+1}}, got {sorted(vals)}")


def load_csv(path, label_column, has_header=False):
    """Read a rectangular numeric CSV into a Dataset.

    label_column indexes the raw columns (including the label itself); all
    other columns become features. Row ids follow data-row order from 0.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, raw in enumerate(reader, start=1):
            if not raw:
                continue
            if has_header and lineno == 1:
                continue
            rows.append((lineno, raw))

    if not rows:
        raise ParseError(1, 1, "no data rows")
    width = len(rows[0][1])
    if not 0 <= label_column < width:
        raise ParseError(rows[0][0], label_column + 1, "label column out of range")

    feats, labels = [], []
    for lineno, raw in rows:
        if len(raw) != width:
            raise RaggedRows(lineno)
        parsed = []
        for col, cell in enumerate(raw, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ParseError(lineno, col, f"not a number: {cell!r}") from None
        labels.append(parsed[label_column])
        feats.append([v for i, v in enumerate(parsed) if i != label_column])

    X = np.asarray(feats, dtype=float)
    y = _remap_labels(np.asarray(labels, dtype=float))
    return Dataset(X, y, ids=np.arange(len(y)))


def synth_gaussian_blobs(n, d, separation, seed):
    """Two isotropic Gaussian classes at +-(separation/2) e1, 80/20 split."""
    if n < 2 or n % 2 != 0:
        raise BadShape(f"n must be even and >= 2, got {n}")
    if d < 1:
        raise BadShape(f"d must be >= 1, got {d}")
    if separation < 0:
        raise BadShape(f"separation must be nonnegative, got {separation}")
    rng = np.random.default_rng(seed)
    half = n // 2
    X = rng.standard_normal((n, d))
    y = np.concatenate([np.ones(half), -np.ones(half)])
    X[:, 0] += y * (separation / 2.0)
    perm = rng.permutation(n)
    X, y = X[perm], y[perm]
    n_train = int(round(0.8 * n))
    order = rng.permutation(n)
    return Dataset(X, y, ids=np.arange(n),
                   train_idx=np.sort(order[:n_train]),
                   test_idx=np.sort(order[n_train:]))


@dataclass(frozen=True)
class StreamPolicy:
    """How delete requests are drawn from the training rows."""

    kind: str  # "uniform" | "label_biased" | "explicit"
    length: int = 0
    seed: int = 0
    p_positive: float = 0.5
    explicit_ids: tuple = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "label_biased", "explicit"):
            raise ValueError(f"unknown stream kind {self.kind!r}")
        if self.kind == "label_biased" and not 0.0 <= self.p_positive <= 1.0:
            raise ValueError("p_positive must be in [0, 1]")


def make_stream(policy, dataset):
    """Ordered unique ids to delete, drawn from the dataset's train rows."""
    train = dataset.train_view()
    if policy.kind == "explicit":
        ids = list(policy.explicit_ids)
        if len(set(ids)) != len(ids):
            raise StreamTooLong("explicit ids must be unique")
        if len(ids) >= train.n:
            raise StreamTooLong(f"{len(ids)} requests for {train.n} train rows")
        return ids

    m = policy.length
    if m >= train.n:
        raise StreamTooLong(f"{m} requests for {train.n} train rows")
    rng = np.random.default_rng(policy.seed)
    if policy.kind == "uniform":
        picks = rng.choice(train.n, size=m, replace=False)
        return [train.ids[p] for p in picks]

    # label-biased: each draw is a positive row w.p. p_positive, renormalized
    # once a class runs out
    pos = list(np.flatnonzero(train.y > 0))
    neg = list(np.flatnonzero(train.y < 0))
    rng.shuffle(pos)
    rng.shuffle(neg)
    out = []
    for _ in range(m):
        take_pos = rng.random() < policy.p_positive
        if take_pos and not pos:
            take_pos = False
        if not take_pos and not neg:
            take_pos = True
        out.append(train.ids[(pos if take_pos else neg).pop()])
    return out

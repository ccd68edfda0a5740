"""Dense symmetric linear algebra and seeded Gaussian sampling.

Vectors are plain 1-d float64 numpy arrays and symmetric matrices are 2-d
float64 arrays; ``sym`` enforces exact symmetry by mirroring one triangle.
Factorizations count how often they run (module-level counter) so benchmark
tests can assert the one-time-inversion property of the online unlearner.
"""

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite

PIVOT_THRESHOLD = 1e-12

# incremented by factorize(); read via factorization_count()
_factorization_count = 0


def factorization_count():
    return _factorization_count


def as_vector(x):
    """Coerce to a finite 1-d float64 array, raising on NaN/Inf."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains NaN or Inf")
    return v


def sym(a):
    """Coerce to an exactly symmetric d x d float64 array."""
    m = np.asarray(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf")
    return (m + m.T) / 2.0


class PdFactor:
    """Lower-triangular Cholesky factor of a symmetric positive-definite matrix.

    Keeps the source matrix alongside the factor: coordinate-descent prox
    solves need the dense entries, Newton steps need the triangular solves.
    """

    __slots__ = ("lower", "matrix", "d")

    def __init__(self, lower, matrix):
        self.lower = lower
        self.matrix = matrix
        self.d = lower.shape[0]

    def reconstruct(self):
        return self.lower @ self.lower.T


def factorize(h):
    """Cholesky-factorize a symmetric matrix intended to be positive definite.

    Raises NotPositiveDefinite if any pivot is <= 1e-12, which signals a
    violation of the strong-convexity assumption; callers must reject the
    objective rather than proceed.
    """
    global _factorization_count
    m = sym(h)
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    # numpy succeeds on barely-positive pivots; enforce the threshold ourselves
    if np.min(np.diag(lower)) ** 2 <= PIVOT_THRESHOLD:
        raise NotPositiveDefinite(
            f"pivot {np.min(np.diag(lower))**2:.3e} <= {PIVOT_THRESHOLD:g}"
        )
    _factorization_count += 1
    return PdFactor(lower, m)


def solve(factor, b):
    """Solve H x = b given the Cholesky factor of H."""
    rhs = as_vector(b)
    if rhs.shape[0] != factor.d:
        raise DimensionMismatch(
            f"factor is {factor.d}-dimensional, rhs is {rhs.shape[0]}-dimensional"
        )
    y = solve_triangular(factor.lower, rhs, lower=True)
    x = solve_triangular(factor.lower.T, y, lower=False)
    return x


def gaussian_sample(scale, d, seed):
    """d i.i.d. draws from N(0, scale^2), deterministic per seed.

    scale = 0 returns exact zeros.
    """
    if scale < 0:
        raise ValueError(f"scale must be nonnegative, got {scale}")
    if d < 1:
        raise ValueError(f"d must be positive, got {d}")
    if scale == 0.0:
        return np.zeros(d)
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, scale, size=d)

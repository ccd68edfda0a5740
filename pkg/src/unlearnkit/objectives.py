"""Losses, regularizers, derivatives, and smoothness/convexity constants.

Two losses are supported: logistic (labels in {-1, +1}) and squared error
(target y, prediction x.theta; a scalar sample z is the pair x=[1], y=z).
The L2 penalty is ||theta||^2, NOT half of it, so its strong-convexity
contribution is 2*lambda and its Hessian is 2*lambda*I.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BadLabel, ConstantsInvalid, EmptyDataset, NonSmoothRegularizer


class LossKind(enum.Enum):
    LOGISTIC = "logistic"
    SQUARED = "squared"


@dataclass(frozen=True)
class Regularizer:
    """Penalty kind plus the l1 fraction for elastic net."""

    kind: str  # "l2" | "l1" | "elastic_net" | "none"
    mix: float = 0.0

    def __post_init__(self):
        if self.kind not in ("l2", "l1", "elastic_net", "none"):
            raise ValueError(f"unknown regularizer kind {self.kind!r}")
        if self.kind == "elastic_net" and not 0.0 <= self.mix <= 1.0:
            raise ValueError(f"elastic net mix must be in [0, 1], got {self.mix}")

    @property
    def is_smooth(self):
        if self.kind in ("l2", "none"):
            return True
        if self.kind == "elastic_net":
            return self.mix == 0.0
        return False

    @property
    def l1_weight(self):
        # coefficient on ||theta||_1
        if self.kind == "l1":
            return 1.0
        if self.kind == "elastic_net":
            return self.mix
        return 0.0

    @property
    def l2_weight(self):
        # coefficient on ||theta||^2
        if self.kind == "l2":
            return 1.0
        if self.kind == "elastic_net":
            return 1.0 - self.mix
        return 0.0


L2 = Regularizer("l2")
L1 = Regularizer("l1")
NO_REG = Regularizer("none")


def elastic_net(mix):
    return Regularizer("elastic_net", mix)


@dataclass(frozen=True)
class SmoothnessConstants:
    """Strong convexity mu, gradient bound L, Hessian smoothness M,
    Hessian Lipschitz C. Provenance records whether they were measured."""

    mu: float
    L: float
    M: float
    C: float
    provenance: str = "user"  # "user" | "estimated"

    def __post_init__(self):
        for name in ("mu", "L", "M", "C"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConstantsInvalid(f"{name} must be strictly positive, got {v}")


@dataclass(frozen=True)
class ObjectiveSpec:
    loss: LossKind
    reg: Regularizer
    lam: float
    constants: SmoothnessConstants | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if not self.reg.is_smooth and self.lam <= 0:
            raise ValueError("non-smooth regularizers require lambda > 0")

    @property
    def is_smooth(self):
        return self.reg.is_smooth

    def with_lambda(self, lam):
        return ObjectiveSpec(self.loss, self.reg, lam, self.constants)

    def with_constants(self, constants):
        return ObjectiveSpec(self.loss, self.reg, self.lam, constants)


def _check_logistic_labels(y):
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise BadLabel(f"logistic labels must be -1 or +1, got {set(np.unique(y))}")


# ---------------------------------------------------------------------------
# per-sample loss derivatives


def loss_value(spec, x, y, theta):
    x = np.asarray(x, dtype=float)
    if spec.loss is LossKind.LOGISTIC:
        _check_logistic_labels(y)
        t = y * (x @ theta)
        # log(1 + exp(-t)) computed stably
        return np.logaddexp(0.0, -t)
    r = y - x @ theta
    return 0.5 * r * r


def loss_grad(spec, x, y, theta):
    x = np.asarray(x, dtype=float)
    if spec.loss is LossKind.LOGISTIC:
        _check_logistic_labels(y)
        s = _sigmoid(-y * (x @ theta))  # 1 / (1 + exp(y x.theta))
        return -y * s * x
    return (x @ theta - y) * x


def loss_hessian(spec, x, y, theta):
    x = np.asarray(x, dtype=float)
    if spec.loss is LossKind.LOGISTIC:
        _check_logistic_labels(y)
        s = _sigmoid(-y * (x @ theta))
        return s * (1.0 - s) * np.outer(x, x)
    return np.outer(x, x)


def _sigmoid(t):
    """Numerically stable logistic sigmoid."""
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    et = np.exp(arr[~pos])
    out[~pos] = et / (1.0 + et)
    return float(out[0]) if np.isscalar(t) or np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# batched loss derivatives over a design matrix


def mean_loss_value(spec, X, y, theta):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if spec.loss is LossKind.LOGISTIC:
        _check_logistic_labels(y)
        t = y * (X @ theta)
        return float(np.mean(np.logaddexp(0.0, -t)))
    r = y - X @ theta
    return float(0.5 * np.mean(r * r))


def mean_loss_grad(spec, X, y, theta):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if spec.loss is LossKind.LOGISTIC:
        _check_logistic_labels(y)
        s = _sigmoid(-y * (X @ theta))
        return -(X.T @ (y * s)) / n
    return (X.T @ (X @ theta - y)) / n


def mean_loss_hessian(spec, X, y, theta):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    w = _hessian_weights(spec, X, y, theta)
    h = (X.T * w) @ X / n
    return (h + h.T) / 2.0


def _hessian_weights(spec, X, y, theta):
    """Per-sample curvature weights w_i with hessian_i = w_i x_i x_i^T."""
    if spec.loss is LossKind.LOGISTIC:
        _check_logistic_labels(y)
        s = _sigmoid(-np.asarray(y, float) * (X @ theta))
        return s * (1.0 - s)
    return np.ones(X.shape[0])


# ---------------------------------------------------------------------------
# regularizer


def reg_value(spec, theta):
    r = spec.reg
    v = 0.0
    if r.l2_weight:
        v += r.l2_weight * float(theta @ theta)
    if r.l1_weight:
        v += r.l1_weight * float(np.sum(np.abs(theta)))
    return v


def reg_grad_smooth(spec, theta):
    if not spec.reg.is_smooth:
        raise NonSmoothRegularizer(f"{spec.reg.kind} has no gradient")
    return 2.0 * spec.reg.l2_weight * np.asarray(theta, dtype=float)


def reg_hessian_smooth(spec, theta):
    if not spec.reg.is_smooth:
        raise NonSmoothRegularizer(f"{spec.reg.kind} has no Hessian")
    d = len(theta)
    return 2.0 * spec.reg.l2_weight * np.eye(d)


# ---------------------------------------------------------------------------
# full objective (smooth specs only for derivatives)


def objective_value(spec, X, y, theta):
    return mean_loss_value(spec, X, y, theta) + spec.lam * reg_value(spec, theta)


def objective_grad_smooth(spec, X, y, theta):
    return mean_loss_grad(spec, X, y, theta) + spec.lam * reg_grad_smooth(spec, theta)


def objective_hessian_smooth(spec, X, y, theta):
    return mean_loss_hessian(spec, X, y, theta) + spec.lam * reg_hessian_smooth(
        spec, theta
    )


# ---------------------------------------------------------------------------
# constants estimation

SAFETY_FACTOR = 1.5
CURVATURE_FLOOR = 1e-12
_PROBE_SCALES = (1e-3, 1e-2, 1e-1, 1.0)
_PROBE_DIRECTIONS = 3


def loss_strong_convexity(spec, X):
    """Worst-case (over theta) minimum eigenvalue of the mean loss Hessian.

    Logistic curvature decays to zero at infinity, so its global modulus is 0.
    Squared error has the constant Hessian X^T X / n.
    """
    if spec.loss is LossKind.LOGISTIC:
        return 0.0
    X = np.asarray(X, dtype=float)
    h = X.T @ X / X.shape[0]
    return max(0.0, float(np.linalg.eigvalsh((h + h.T) / 2.0)[0]))


def estimate_constants(X, y, spec, theta_ref, seed=0):
    """Empirical (mu, L, M, C) at a reference point, inflated by a 1.5x
    safety factor. User-supplied constants on the spec pass through untouched.
    """
    if spec.constants is not None and spec.constants.provenance == "user":
        return spec.constants
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise EmptyDataset("cannot estimate constants from an empty dataset")
    theta_ref = np.asarray(theta_ref, dtype=float)
    n, d = X.shape

    mu = 2.0 * spec.lam * spec.reg.l2_weight + loss_strong_convexity(spec, X)
    if mu <= 0:
        raise ConstantsInvalid(
            "no strong convexity: regularizer contributes 0 and the loss has "
            "global curvature floor 0"
        )

    if spec.loss is LossKind.LOGISTIC:
        s = _sigmoid(-y * (X @ theta_ref))
        grad_norms = np.abs(s) * np.linalg.norm(X, axis=1)
    else:
        grad_norms = np.abs(X @ theta_ref - y) * np.linalg.norm(X, axis=1)
    L = SAFETY_FACTOR * float(np.max(grad_norms))
    L = max(L, CURVATURE_FLOOR)

    # Hessian-difference quotients at probe perturbations around theta_ref.
    # Per-sample Hessians are w_i x_i x_i^T, so the per-sample spectral gap is
    # |delta w_i| * ||x_i||^2 and the mean-Hessian gap is assembled directly.
    rng = np.random.default_rng(seed)
    w0 = _hessian_weights(spec, X, y, theta_ref)
    row_sq = np.einsum("ij,ij->i", X, X)
    ref_scale = max(1.0, float(np.linalg.norm(theta_ref)))
    c_quot = 0.0
    m_quot = 0.0
    for _ in range(_PROBE_DIRECTIONS):
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        for scale in _PROBE_SCALES:
            step = scale * ref_scale
            w1 = _hessian_weights(spec, X, y, theta_ref + step * u)
            dw = w1 - w0
            c_quot = max(c_quot, float(np.max(np.abs(dw) * row_sq)) / step)
            dh = (X.T * dw) @ X / n
            m_quot = max(m_quot, float(np.linalg.norm(dh, 2)) / step)
    C = max(SAFETY_FACTOR * c_quot, CURVATURE_FLOOR)
    M = max(SAFETY_FACTOR * m_quot, CURVATURE_FLOOR)
    return SmoothnessConstants(mu=mu, L=L, M=M, C=C, provenance="estimated")

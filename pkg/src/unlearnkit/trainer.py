"""Empirical risk minimization, leave-U-out retraining, and CV tuning.

Smooth objectives use damped Newton with Armijo backtracking; non-smooth
objectives use accelerated proximal gradient with a fixed step from a
curvature bound. Optimality is reported as the gradient norm (smooth) or the
unit-step prox-gradient residual (non-smooth).
"""

from dataclasses import dataclass

import numpy as np

from . import linalg, objectives, prox
from .errors import AllDataDeleted, DidNotConverge, EmptyDataset

DEFAULT_TOL = 1e-10
MAX_ITERS = 10_000


@dataclass(frozen=True)
class ModelState:
    theta: np.ndarray
    lam: float
    n: int
    gradient_norm_at_solution: float
    spec: objectives.ObjectiveSpec
    tol: float


@dataclass(frozen=True)
class CvResult:
    cv_errors: dict  # lambda -> exact LOO CV error
    selected: float
    tie_break_applied: bool


def _smooth_grad(spec, X, y, theta):
    """Gradient of the smooth part: mean loss plus the reg's square term."""
    g = objectives.mean_loss_grad(spec, X, y, theta)
    w2 = spec.lam * spec.reg.l2_weight
    if w2:
        g = g + 2.0 * w2 * theta
    return g


def prox_gradient_residual(spec, X, y, theta):
    """Unit-step prox-gradient residual ||theta - prox(theta - g)||_2.

    Coincides with the gradient norm when the regularizer is smooth.
    """
    g = _smooth_grad(spec, X, y, theta)
    if spec.reg.is_smooth:
        return float(np.linalg.norm(g))
    # the square term is already in g; only the l1 part remains non-smooth
    step = prox.soft_threshold(theta - g, spec.lam * spec.reg.l1_weight)
    return float(np.linalg.norm(theta - step))


def _newton(spec, X, y, tol, max_iters):
    n, d = X.shape
    theta = np.zeros(d)
    value = objectives.objective_value(spec, X, y, theta)
    for _ in range(max_iters):
        g = objectives.objective_grad_smooth(spec, X, y, theta)
        gn = float(np.linalg.norm(g))
        if gn <= tol:
            return theta, gn
        h = objectives.objective_hessian_smooth(spec, X, y, theta)
        step = linalg.solve(linalg.factorize(h), g)
        decrement = float(g @ step)
        if decrement <= 1e-12 * (1.0 + abs(value)):
            # expected decrease is below float resolution; Armijo cannot
            # certify it, but the pure Newton step still contracts the grad
            theta = theta - step
        else:
            t = 1.0
            while t > 1e-14:
                cand_value = objectives.objective_value(spec, X, y,
                                                        theta - t * step)
                if cand_value <= value - 1e-4 * t * decrement:
                    break
                t /= 2.0
            theta = theta - t * step
        value = objectives.objective_value(spec, X, y, theta)
    raise DidNotConverge(max_iters, gn)


def _prox_gradient(spec, X, y, tol, max_iters):
    n, d = X.shape
    # curvature bound of the smooth part: logistic weights are <= 1/4,
    # squared-loss weights are exactly 1
    scale = 0.25 if spec.loss is objectives.LossKind.LOGISTIC else 1.0
    gram = scale * (X.T @ X) / n
    lip = float(np.linalg.eigvalsh((gram + gram.T) / 2.0)[-1])
    lip += 2.0 * spec.lam * spec.reg.l2_weight
    step = 1.0 / max(lip, 1e-30)
    w1 = spec.lam * spec.reg.l1_weight
    w2 = spec.lam * spec.reg.l2_weight

    def prox_step(v):
        return prox.soft_threshold(v, step * w1)

    theta = np.zeros(d)
    momentum = theta.copy()
    t_acc = 1.0
    last_value = np.inf
    for _ in range(max_iters):
        g = _smooth_grad(spec, X, y, momentum)
        new = prox_step(momentum - step * g)
        res = prox_gradient_residual(spec, X, y, new)
        if res <= tol:
            return new, res
        value = objectives.objective_value(spec, X, y, new)
        if value > last_value:  # restart acceleration on non-monotone step
            momentum = theta.copy()
            t_acc = 1.0
            last_value = np.inf
            continue
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_acc**2)) / 2.0
        momentum = new + ((t_acc - 1.0) / t_next) * (new - theta)
        theta = new
        t_acc = t_next
        last_value = value
    raise DidNotConverge(max_iters, res)


def train(dataset, spec, tol=DEFAULT_TOL, max_iters=MAX_ITERS):
    """Minimize the regularized empirical risk to the stated tolerance."""
    if dataset.n == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    X, y = dataset.X, dataset.y
    if spec.is_smooth:
        theta, res = _newton(spec, X, y, tol, max_iters)
    else:
        theta, res = _prox_gradient(spec, X, y, tol, max_iters)
    return ModelState(theta=theta, lam=spec.lam, n=dataset.n,
                      gradient_norm_at_solution=res, spec=spec, tol=tol)


def train_leave_out(dataset, spec, excluded_ids, tol=DEFAULT_TOL,
                    max_iters=MAX_ITERS):
    """Retrain on the dataset with the given ids removed (the RT baseline)."""
    excluded = set(excluded_ids)
    keep = np.array([i for i, rid in enumerate(dataset.ids) if rid not in excluded],
                    dtype=int)
    if keep.size == 0:
        raise AllDataDeleted(f"all {dataset.n} rows excluded")
    if keep.size == dataset.n:
        return train(dataset, spec, tol, max_iters)
    return train(dataset.subset(keep), spec, tol, max_iters)


def cv_select(dataset, spec_template, lam_grid, tol=DEFAULT_TOL):
    """Exact leave-one-out cross-validation over a lambda grid.

    Retrains n times per lambda (reference implementation). Ties break
    toward the largest lambda.
    """
    if len(lam_grid) == 0:
        raise ValueError("lambda grid is empty")
    errors = {}
    for lam in lam_grid:
        spec = spec_template.with_lambda(lam)
        total = 0.0
        for i in range(dataset.n):
            model = train_leave_out(dataset, spec, {dataset.ids[i]}, tol)
            total += objectives.loss_value(spec, dataset.X[i], dataset.y[i],
                                           model.theta)
        errors[lam] = total / dataset.n
    best = min(errors.values())
    winners = [lam for lam, e in errors.items() if e == best]
    return CvResult(cv_errors=errors, selected=max(winners),
                    tie_break_applied=len(winners) > 1)

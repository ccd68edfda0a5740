"""Removal mechanisms: online jackknife deletion (smooth and proximal
branches), the batch Newton baseline, noise-scale formulas, and the
deletion-capacity and generalization-bound calculators.

The online mechanism factorizes one Hessian at the reference model and never
again; the batch baseline assembles and factorizes a fresh leave-U-out
Hessian per call. Both paths count their Hessian assemblies and
factorizations so the cost asymmetry is testable.
"""

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg, objectives, prox
from .errors import (
    AllDataDeleted,
    AlreadyDeleted,
    BadBudget,
    BranchMismatch,
    CapacityExhausted,
    CapacityWarning,
    OutOfRegime,
)

# Hessian assemblies performed by this module (the trainer's are not counted)
_hessian_assembly_count = 0

DEFAULT_GAMMA = 0.01
PROX_TOL = 1e-12


def hessian_assembly_count():
    return _hessian_assembly_count


def operation_counts():
    return {
        "hessian_assemblies": _hessian_assembly_count,
        "factorizations": linalg.factorization_count(),
    }


class Branch(enum.Enum):
    SMOOTH = "smooth"
    NONSMOOTH = "nonsmooth"


@dataclass(frozen=True)
class Budget:
    eps: float
    delta: float

    def __post_init__(self):
        if not (self.eps > 0 and 0 < self.delta < 1):
            raise BadBudget(f"need eps > 0 and 0 < delta < 1, got {self}")


@dataclass(frozen=True)
class RemovedModel:
    noiseless: np.ndarray  # estimate before the Gaussian mechanism
    published: np.ndarray  # noiseless + N(0, c^2 I) draw
    noise_scale: float
    m: int  # deletions processed after this removal


def _check_budget(eps, delta):
    if not (eps > 0 and 0 < delta < 1):
        raise BadBudget(f"need eps > 0 and 0 < delta < 1, got eps={eps}, delta={delta}")


def noise_scale(branch, m, n, constants, eps, delta):
    """Per-publication Gaussian scale of the online mechanism.

    m is the number of deletions already processed, so the first deletion
    uses m = 0. Smooth branch prefactor is (2m+1), non-smooth is (m+1)^2.
    """
    _check_budget(eps, delta)
    if not 0 <= m < n:
        raise BadBudget(f"need 0 <= m < n, got m={m}, n={n}")
    k = constants
    base = (
        (2.0 * k.C * k.L * k.mu + k.M * k.L)
        / (k.mu**2 * n**2)
        * math.sqrt(2.0 * math.log(1.25 / delta))
        / eps
    )
    if branch is Branch.SMOOTH:
        return (2 * m + 1) * base
    return (m + 1) ** 2 * base


def ta_noise_scale(m, n, constants, eps, delta):
    """Gaussian scale for the batch Newton baseline removing m points at once.

    Calibrated to the m^2/n^2 proximity bound with the same constant
    structure as the online formulas; the exact expression is this package's
    concrete choice and is echoed into benchmark report metadata.
    """
    _check_budget(eps, delta)
    k = constants
    return (
        m**2
        * (2.0 * k.C * k.L * k.mu + k.M * k.L)
        / (k.mu**2 * n**2)
        * math.sqrt(2.0 * math.log(1.25 / delta))
        / eps
    )


def capacity_lower_bound(n, d, eps, delta, gamma, constants):
    """How many deletions keep excess population risk within gamma.

    Only claimed for eps <= 1 and delta <= 0.005.
    """
    if eps > 1 or delta > 0.005:
        raise OutOfRegime(f"bound requires eps <= 1 and delta <= 0.005, "
                          f"got eps={eps}, delta={delta}")
    _check_budget(eps, delta)
    if gamma < 0:
        raise BadBudget(f"gamma must be nonnegative, got {gamma}")
    k = constants
    c = min(
        1.0,
        gamma * (k.mu**3 / ((2.0 * k.C * k.mu + k.M * k.L) * k.L**2)
                 + k.mu / (4.0 * k.L**2)),
    )
    return int(math.floor(c * n * math.sqrt(eps)
                          / (d * math.log(1.0 / delta)) ** 0.25))


def generalization_bound(m, n, d, eps, delta, constants):
    """Explicit excess test-risk bound after m deletions."""
    _check_budget(eps, delta)
    k = constants
    if m == 0:
        return 0.0
    return (
        (1.0 + math.sqrt(d) * math.sqrt(2.0 * math.log(1.25 / delta)) / eps)
        * ((2.0 * k.C * k.mu + k.M * k.L) * m**2 * k.L**2 / (k.mu**3 * n**2))
        + 4.0 * m * k.L**2 / (k.mu * n)
    )


def _removal_gradient(spec, x, y, theta, smooth):
    """Per-sample gradient pushed through the inverse Hessian on removal.

    The smooth branch works with the per-sample regularized objective
    f(z, theta) = loss + lam*pi, so the reg gradient at the reference model
    rides along; without it the leave-out error picks up an O(1/n) bias from
    the rescaled regularizer and the quadratic-exactness of the batch Newton
    step breaks. The non-smooth branch handles the penalty in the prox.
    """
    g = objectives.loss_grad(spec, x, y, theta)
    if smooth and spec.lam:
        g = g + spec.lam * objectives.reg_grad_smooth(spec, theta)
    return g


def _assemble_loss_hessian(spec, X, y, theta):
    global _hessian_assembly_count
    _hessian_assembly_count += 1
    return objectives.mean_loss_hessian(spec, X, y, theta)


class UnlearnerState:
    """Single-owner mutable state of the online removal mechanism.

    The Hessian is assembled and factorized once, at the reference model,
    and never recomputed. The smooth branch advances a noiseless chain; the
    non-smooth branch advances the Newton accumulator and publishes its prox.
    """

    def __init__(self, dataset, model, factor, constants, budget, seed, branch,
                 noise_override=None, capacity_action="warn"):
        self.dataset = dataset
        self.model = model
        self.spec = model.spec
        self.theta_hat = model.theta.copy()
        self.factor = factor
        self.theta_bar = model.theta.copy()  # noiseless chain (smooth branch)
        self.accumulator = model.theta.copy()  # Newton accumulator (non-smooth)
        self.deleted_ids = []
        self._deleted_set = set()
        self.n = model.n
        self.d = len(model.theta)
        self.constants = constants
        self.budget = budget
        self.seed = seed
        self.branch = branch
        self.noise_override = noise_override
        self.capacity_action = capacity_action  # "warn" | "error" | "ignore"

    @property
    def m(self):
        return len(self.deleted_ids)


def init_unlearner(dataset, model, budget, seed, branch,
                   noise_override=None, capacity_action="warn"):
    """Assemble and factorize the reference Hessian; O(n d^2 + d^3) paid once."""
    spec = model.spec
    expected = Branch.SMOOTH if spec.is_smooth else Branch.NONSMOOTH
    if branch is not expected:
        raise BranchMismatch(
            f"{branch.value} branch requested for a "
            f"{'smooth' if spec.is_smooth else 'non-smooth'} objective"
        )
    X, y = dataset.X, dataset.y
    h = _assemble_loss_hessian(spec, X, y, model.theta)
    if branch is Branch.SMOOTH:
        h = h + spec.lam * objectives.reg_hessian_smooth(spec, model.theta)
    factor = linalg.factorize(h)
    constants = spec.constants
    if constants is None and budget is not None:
        # constants only drive noise calibration; noiseless runs skip them
        constants = objectives.estimate_constants(X, y, spec, model.theta)
    return UnlearnerState(dataset, model, factor, constants, budget, seed,
                          branch, noise_override, capacity_action)


def _capacity_check(state):
    if state.capacity_action == "ignore" or state.budget is None:
        return
    b = state.budget
    if b.eps > 1 or b.delta > 0.005:
        return  # capacity bound not claimed in this regime
    cap = capacity_lower_bound(state.n, state.d, b.eps, b.delta,
                               DEFAULT_GAMMA, state.constants)
    if state.m + 1 >= cap:
        msg = (f"deletion {state.m + 1} reaches the capacity lower bound "
               f"{cap} for gamma={DEFAULT_GAMMA}")
        if state.capacity_action == "error":
            raise CapacityExhausted(msg)
        warnings.warn(msg, CapacityWarning)


def _publication_noise(state, c):
    if c == 0.0:
        return np.zeros(state.d)
    # fresh draw per publication, deterministic in (seed, deletion index)
    return linalg.gaussian_sample(c, state.d, state.seed + state.m + 1)


def delete_one(state, j):
    """Process one delete request; mutates and returns the state.

    No Hessian assembly or factorization happens here: one triangular solve
    against the reference factor plus vector arithmetic (and a prox solve on
    the non-smooth branch).
    """
    if j in state._deleted_set:
        raise AlreadyDeleted(f"id {j} was already deleted")
    if state.m + 1 >= state.n:
        raise AllDataDeleted("cannot delete the entire training set")
    _capacity_check(state)

    row = state.dataset.rows_for_ids([j])[0]
    grad = _removal_gradient(state.spec, state.dataset.X[row],
                             state.dataset.y[row], state.theta_hat,
                             state.branch is Branch.SMOOTH)
    update = linalg.solve(state.factor, grad) / state.n

    if state.noise_override is not None:
        c = float(state.noise_override)
    elif state.budget is None:
        c = 0.0
    else:
        c = noise_scale(state.branch, state.m, state.n, state.constants,
                        state.budget.eps, state.budget.delta)

    if state.branch is Branch.SMOOTH:
        state.theta_bar = state.theta_bar + update
        noiseless = state.theta_bar
    else:
        state.accumulator = state.accumulator + update
        noiseless = prox.prox_solve(prox.ProxProblem(
            v=state.accumulator, metric=state.factor, lam=state.spec.lam,
            reg=state.spec.reg, tol=PROX_TOL))

    sigma = _publication_noise(state, c)
    state.deleted_ids.append(j)
    state._deleted_set.add(j)
    removed = RemovedModel(noiseless=noiseless.copy(),
                           published=noiseless + sigma,
                           noise_scale=c, m=state.m)
    return state, removed


def ta_batch_remove(dataset, model, U, budget, seed, smooth=None,
                    noise_override=None, constants=None):
    """Batch Newton removal: leave-U-out Hessian assembled and factorized
    for THIS request, then a single Newton correction (prox-wrapped when the
    regularizer is non-smooth)."""
    U = list(U)
    if not U:
        raise ValueError("U must be non-empty")
    spec = model.spec
    if smooth is None:
        smooth = spec.is_smooth
    n = model.n
    m = len(U)
    if m >= n:
        raise AllDataDeleted(f"cannot batch-remove all {n} points")

    rows = dataset.rows_for_ids(U)
    keep = np.setdiff1d(np.arange(dataset.n), rows)
    Xk, yk = dataset.X[keep], dataset.y[keep]

    h = _assemble_loss_hessian(spec, Xk, yk, model.theta)
    if smooth:
        h = h + spec.lam * objectives.reg_hessian_smooth(spec, model.theta)
    factor = linalg.factorize(h)

    grad_sum = np.zeros(dataset.d)
    for r in rows:
        grad_sum += _removal_gradient(spec, dataset.X[r], dataset.y[r],
                                      model.theta, smooth)
    v = model.theta + linalg.solve(factor, grad_sum) / (n - m)
    if smooth:
        noiseless = v
    else:
        noiseless = prox.prox_solve(prox.ProxProblem(
            v=v, metric=factor, lam=spec.lam, reg=spec.reg, tol=PROX_TOL))

    if noise_override is not None:
        c = float(noise_override)
    elif budget is None:
        c = 0.0
    else:
        if constants is None:
            constants = spec.constants
        if constants is None:
            constants = objectives.estimate_constants(dataset.X, dataset.y,
                                                      spec, model.theta)
        c = ta_noise_scale(m, n, constants, budget.eps, budget.delta)

    sigma = (np.zeros(dataset.d) if c == 0.0
             else linalg.gaussian_sample(c, dataset.d, seed))
    return RemovedModel(noiseless=noiseless, published=noiseless + sigma,
                        noise_scale=c, m=m)


@dataclass(frozen=True)
class BatchStreamGap:
    accumulator_gap: float  # internal chain vs batch sum
    output_gap: float  # published noiseless estimates


def batch_stream_check(dataset, model, U, branch, budget=None, seed=0):
    """Compare streaming one-by-one deletion against the one-shot batch
    formula over the same set U, with noise forced off."""
    U = list(U)
    state = init_unlearner(dataset, model, budget=None, seed=seed,
                           branch=branch, capacity_action="ignore")
    last = None
    for j in U:
        state, last = delete_one(state, j)

    # batch formula under the SAME full-data Hessian factor
    grad_sum = np.zeros(dataset.d)
    for r in dataset.rows_for_ids(U):
        grad_sum += _removal_gradient(model.spec, dataset.X[r], dataset.y[r],
                                      model.theta, branch is Branch.SMOOTH)
    batch_accum = model.theta + linalg.solve(state.factor, grad_sum) / model.n

    if branch is Branch.SMOOTH:
        gap = float(np.max(np.abs(state.theta_bar - batch_accum)))
        return BatchStreamGap(accumulator_gap=gap, output_gap=gap)

    accum_gap = float(np.max(np.abs(state.accumulator - batch_accum)))
    batch_out = prox.prox_solve(prox.ProxProblem(
        v=batch_accum, metric=state.factor, lam=model.spec.lam,
        reg=model.spec.reg, tol=PROX_TOL))
    out_gap = float(np.max(np.abs(last.noiseless - batch_out)))
    return BatchStreamGap(accumulator_gap=accum_gap, output_gap=out_gap)

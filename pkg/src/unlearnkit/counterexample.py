"""Failure mode of approximate removal under cross-validated tuning.

Builds the adversarial scalar dataset (n-1 points at -1/n, one outlier at n),
shows CV picks the huge penalty before deletion and zero penalty after, and
measures the gap between the removal mechanism's output and the honest
retrain-plus-retune pipeline. The closed-form removal update here follows the
printed convention with inverse curvature 1/(1+lambda), which differs from
the package's ||theta||^2 penalty convention (1/(1+2*lambda)); the selection
argmin is identical under both and the reported numbers use the former.
"""

from dataclasses import dataclass, asdict

import numpy as np

from . import trainer, unlearner
from .data import Dataset
from .errors import BadN
from .objectives import L2, LossKind, ObjectiveSpec, SmoothnessConstants

DEFAULT_BIG_LAMBDA = 1e12
# quadratic loss has exactly zero Hessian-Lipschitz constants; floored so the
# constants object stays valid
_QUADRATIC_FLOOR = 1e-12


@dataclass(frozen=True)
class CounterexampleReport:
    n: int
    big_lambda: float
    lam_selected_before: float
    lam_selected_after: float
    theta_mechanism: float  # unlearning-mechanism output (no re-tuning)
    theta_retrained: float  # retrain after re-running CV
    gap: float
    gap_times_n: float
    truncation_bound: float  # error from representing infinity by big_lambda
    noise_scale_prescribed: float
    noise_insufficient: bool  # prescribed noise scale < gap / 10

    def to_dict(self):
        return asdict(self)


def run_counterexample(n, big_lambda=DEFAULT_BIG_LAMBDA, eps=1.0, delta=0.005):
    """Reproduce the CV counterexample for a dataset of size n >= 2."""
    if n < 2:
        raise BadN(f"need n >= 2, got {n}")
    if big_lambda < 1e10:
        raise ValueError(f"big_lambda must be >= 1e10, got {big_lambda}")

    values = np.full(n, -1.0 / n)
    values[-1] = float(n)
    X = np.ones((n, 1))
    spec = ObjectiveSpec(LossKind.SQUARED, L2, lam=0.0)
    grid = [0.0, big_lambda]

    full = Dataset(X, values, ids=np.arange(n))
    pre = trainer.cv_select(full, spec, grid)

    # removal mechanism at the selected lambda, closed form with the printed
    # 1/(1+lambda) inverse curvature; the deleted point is the outlier
    lam = pre.selected
    z_bar = float(np.mean(values))
    theta_hat = z_bar / (1.0 + lam)
    z_deleted = float(n)
    theta_mech = theta_hat + (1.0 / n) * (1.0 / (1.0 + lam)) * (theta_hat - z_deleted)

    # honest pipeline: drop the point, re-run CV, retrain. A single remaining
    # sample has no held-out fold, so that degenerate case takes the
    # unpenalized fit directly.
    reduced = full.subset(np.arange(n - 1))
    if reduced.n >= 2:
        lam_post = trainer.cv_select(reduced, spec, grid).selected
    else:
        lam_post = 0.0
    theta_honest = float(np.mean(values[:-1])) / (1.0 + lam_post)

    gap = abs(theta_mech - theta_honest)
    constants = SmoothnessConstants(mu=1.0, L=float(n), M=_QUADRATIC_FLOOR,
                                    C=_QUADRATIC_FLOOR)
    c = unlearner.noise_scale(unlearner.Branch.SMOOTH, m=1, n=n,
                              constants=constants, eps=eps, delta=delta)
    return CounterexampleReport(
        n=n,
        big_lambda=big_lambda,
        lam_selected_before=pre.selected,
        lam_selected_after=lam_post,
        theta_mechanism=theta_mech,
        theta_retrained=theta_honest,
        gap=gap,
        gap_times_n=gap * n,
        truncation_bound=n / big_lambda,
        noise_scale_prescribed=c,
        noise_insufficient=c < gap / 10.0,
    )

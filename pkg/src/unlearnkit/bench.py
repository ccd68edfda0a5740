"""Benchmark harness: replay a deletion stream through the removal
mechanisms and record runtime, test accuracy, and distance to retraining.

Timing is fair-accounted: each mechanism is charged only for its own
per-request work, except the online mechanism's one-time Hessian
factorization which is charged before its first record so cumulative curves
stay honest. Records are line-delimited JSON behind a header record echoing
the full configuration.
"""

import json
import platform
import sys
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import objectives, trainer, unlearner
from .data import Dataset, StreamPolicy, load_csv, make_stream, synth_gaussian_blobs
from .errors import ConfigError
from .objectives import LossKind, ObjectiveSpec, Regularizer

MECHANISMS = ("IJ", "TA", "RT")

RECORD_KEYS = ("mechanism", "seed", "delete_index", "cum_runtime_s",
               "test_acc", "dist_to_rt", "noise_c")


@dataclass
class BenchConfig:
    # dataset: synthetic blobs or a CSV file
    source: str = "synthetic"  # "synthetic" | "csv"
    n: int = 1000
    d: int = 10
    separation: float = 6.0
    csv_path: str | None = None
    label_column: int = 0
    has_header: bool = False
    # objective
    loss: str = "logistic"  # "logistic" | "squared"
    reg: str = "l2"  # "l2" | "l1" | "elastic_net" | "none"
    mix: float = 0.5
    lam_grid: tuple = (1e-3, 1e-4, 1e-5, 1e-6)
    tol: float = 1e-10
    # deletion stream
    stream_kind: str = "uniform"  # "uniform" | "label_biased" | "explicit"
    m: int = 10
    p_positive: float = 0.5
    explicit_ids: tuple = ()
    # mechanisms and noise
    mechanisms: tuple = ("IJ", "TA", "RT")
    eps: float | None = None
    delta: float | None = None
    noise_override: float | None = None  # fixed c; None means formula/noiseless
    # run control
    seeds: tuple = (0,)
    eval_every: int = 1
    out: str | None = None
    plots: bool = True

    def validate(self):
        if self.source not in ("synthetic", "csv"):
            raise ConfigError(f"unknown source {self.source!r}")
        if self.source == "csv" and not self.csv_path:
            raise ConfigError("csv source requires csv_path")
        if not self.mechanisms:
            raise ConfigError("at least one mechanism required")
        for mech in self.mechanisms:
            if mech not in MECHANISMS:
                raise ConfigError(f"unknown mechanism {mech!r}")
        if not self.lam_grid:
            raise ConfigError("lambda grid is empty")
        if (self.eps is None) != (self.delta is None):
            raise ConfigError("eps and delta must be set together")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        return self

    def objective_template(self):
        try:
            loss = LossKind(self.loss)
        except ValueError:
            raise ConfigError(f"unknown loss {self.loss!r}") from None
        reg = Regularizer(self.reg, self.mix if self.reg == "elastic_net" else 0.0)
        return ObjectiveSpec(loss, reg, lam=max(self.lam_grid))

    def budget(self):
        if self.eps is None:
            return None
        return unlearner.Budget(self.eps, self.delta)


@dataclass
class BenchReport:
    header: dict
    records: list


def _environment_stamp():
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


def _accuracy(theta, X, y):
    pred = np.where(X @ theta >= 0, 1.0, -1.0)
    return float(np.mean(pred == y))


def _load_dataset(config, seed):
    if config.source == "synthetic":
        return synth_gaussian_blobs(config.n, config.d, config.separation, seed)
    ds = load_csv(config.csv_path, config.label_column, config.has_header)
    # CSVs carry no split; make a seeded 80/20 one
    rng = np.random.default_rng(seed)
    order = rng.permutation(ds.n)
    n_train = int(round(0.8 * ds.n))
    return Dataset(ds.X, ds.y, ds.ids,
                   train_idx=np.sort(order[:n_train]),
                   test_idx=np.sort(order[n_train:]))


def _select_lambda(config, train_ds, X_test, y_test):
    """Train once per lambda; pick the lowest held-out loss, ties to the
    largest lambda. All mechanisms share the selected model."""
    template = config.objective_template()
    best = None
    for lam in sorted(config.lam_grid, reverse=True):
        spec = template.with_lambda(lam)
        model = trainer.train(train_ds, spec, config.tol)
        held_out = objectives.mean_loss_value(spec, X_test, y_test, model.theta)
        if best is None or held_out < best[0]:
            best = (held_out, lam, spec, model)
    return best[1], best[2], best[3]


def run_bench(config):
    config.validate()
    budget = config.budget()
    records = []
    constants_echo = {}

    for seed in config.seeds:
        ds = _load_dataset(config, seed)
        train_ds = ds.train_view()
        X_test, y_test = ds.test_arrays()
        lam, spec, model = _select_lambda(config, train_ds, X_test, y_test)

        policy = StreamPolicy(kind=config.stream_kind, length=config.m,
                              seed=seed, p_positive=config.p_positive,
                              explicit_ids=tuple(config.explicit_ids))
        stream = make_stream(policy, ds)
        m = len(stream)

        constants = model.spec.constants or objectives.estimate_constants(
            train_ds.X, train_ds.y, spec, model.theta)
        constants_echo[str(seed)] = {
            "mu": constants.mu, "L": constants.L,
            "M": constants.M, "C": constants.C,
            "provenance": constants.provenance,
        }

        # run RT first when present so other mechanisms can report distance
        mechs = sorted(config.mechanisms, key=lambda x: x != "RT")
        rt_thetas = {}
        for mech in mechs:
            cum = 0.0
            state = None
            if mech == "IJ":
                branch = (unlearner.Branch.SMOOTH if spec.is_smooth
                          else unlearner.Branch.NONSMOOTH)
                t0 = time.perf_counter()
                state = unlearner.init_unlearner(
                    train_ds, model, budget, seed, branch,
                    noise_override=config.noise_override,
                    capacity_action="ignore")
                cum += time.perf_counter() - t0
            last_acc = _accuracy(model.theta, X_test, y_test)
            for idx in range(1, m + 1):
                j = stream[idx - 1]
                t0 = time.perf_counter()
                if mech == "IJ":
                    _, removed = unlearner.delete_one(state, j)
                    theta, noise_c = removed.published, removed.noise_scale
                elif mech == "TA":
                    removed = unlearner.ta_batch_remove(
                        train_ds, model, stream[:idx], budget, seed + idx,
                        noise_override=config.noise_override,
                        constants=constants)
                    theta, noise_c = removed.published, removed.noise_scale
                else:
                    retrained = trainer.train_leave_out(
                        train_ds, spec, set(stream[:idx]), config.tol)
                    theta, noise_c = retrained.theta, 0.0
                cum += time.perf_counter() - t0

                if idx % config.eval_every == 0 or idx == m:
                    last_acc = _accuracy(theta, X_test, y_test)
                if mech == "RT":
                    rt_thetas[idx] = theta
                    dist = 0.0
                elif idx in rt_thetas:
                    dist = float(np.linalg.norm(theta - rt_thetas[idx]))
                else:
                    dist = None
                records.append({
                    "mechanism": mech, "seed": seed, "delete_index": idx,
                    "cum_runtime_s": cum, "test_acc": last_acc,
                    "dist_to_rt": dist, "noise_c": noise_c,
                })

    header = {
        "record_type": "header",
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in asdict(config).items()},
        "constants": constants_echo,
        "ta_noise_rule": "m^2 (2CLmu + ML) sqrt(2 ln(1.25/delta)) / (mu^2 n^2 eps)",
        "environment": _environment_stamp(),
    }
    return BenchReport(header=header, records=records)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_report(report, path):
    """One JSON record per line, header first, stable key order."""
    with open(path, "w") as fh:
        fh.write(json.dumps(report.header, sort_keys=True,
                            default=_json_default) + "\n")
        for rec in report.records:
            ordered = {k: rec[k] for k in RECORD_KEYS}
            fh.write(json.dumps(ordered, default=_json_default) + "\n")


def read_report(path):
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("record_type") != "header":
        raise ConfigError(f"{path} is not a benchmark report")
    return BenchReport(header=lines[0], records=lines[1:])

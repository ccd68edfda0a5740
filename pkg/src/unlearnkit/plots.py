"""Render benchmark report figures next to the delimited output."""

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

_SERIES = (
    ("cum_runtime_s", "cumulative runtime (s)", "runtime"),
    ("test_acc", "test accuracy", "accuracy"),
    ("dist_to_rt", "parameter distance to retraining", "dist_to_rt"),
)


def _grouped(records, key):
    """mechanism -> delete_index -> list of values (over seeds)."""
    out = defaultdict(lambda: defaultdict(list))
    for rec in records:
        v = rec.get(key)
        if v is not None:
            out[rec["mechanism"]][rec["delete_index"]].append(v)
    return out


def render_report_figures(report, outdir, stem="bench"):
    """Write one PNG per metric (seed-averaged curves). Returns the paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for key, ylabel, suffix in _SERIES:
        grouped = _grouped(report.records, key)
        if not grouped:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        for mech in sorted(grouped):
            idx = sorted(grouped[mech])
            mean = [sum(grouped[mech][i]) / len(grouped[mech][i]) for i in idx]
            ax.plot(idx, mean, label=mech)
        ax.set_xlabel("delete request index")
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        path = os.path.join(outdir, f"{stem}_{suffix}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths

import json
import os

import numpy as np
import pytest

from unlearnkit import bench, cli, plots
from unlearnkit.errors import ConfigError

FAST = dict(source="synthetic", n=60, d=3, separation=6.0,
            loss="logistic", reg="l2", lam_grid=(1e-2, 1e-3),
            stream_kind="uniform", m=4, seeds=(0,), plots=False)


def test_config_validation():
    with pytest.raises(ConfigError):
        bench.BenchConfig(**{**FAST, "mechanisms": ()}).validate()
    with pytest.raises(ConfigError):
        bench.BenchConfig(**{**FAST, "mechanisms": ("XX",)}).validate()
    with pytest.raises(ConfigError):
        bench.BenchConfig(**{**FAST, "lam_grid": ()}).validate()
    with pytest.raises(ConfigError):
        bench.BenchConfig(**{**FAST, "eps": 0.5}).validate()  # delta missing
    with pytest.raises(ConfigError):
        bench.BenchConfig(**{**FAST, "source": "csv"}).validate()
    with pytest.raises(ConfigError):
        bench.BenchConfig(**{**FAST, "m": 0}).validate()


def test_rt_only_single_deletion():
    cfg = bench.BenchConfig(**{**FAST, "m": 1, "mechanisms": ("RT",)})
    rep = bench.run_bench(cfg)
    assert len(rep.records) == 1
    rec = rep.records[0]
    assert rec["mechanism"] == "RT"
    assert rec["dist_to_rt"] == 0.0
    assert rec["delete_index"] == 1


def test_quadratic_ta_matches_rt_in_reports():
    cfg = bench.BenchConfig(**{**FAST, "loss": "squared", "m": 5,
                               "mechanisms": ("TA", "RT")})
    rep = bench.run_bench(cfg)
    for rec in rep.records:
        if rec["mechanism"] == "TA":
            assert rec["dist_to_rt"] <= 1e-8


def test_record_counts_and_runtime_monotonicity():
    cfg = bench.BenchConfig(**{**FAST, "seeds": (0, 1)})
    rep = bench.run_bench(cfg)
    assert len(rep.records) == 3 * 2 * 4  # mechanisms x seeds x m
    series = {}
    for rec in rep.records:
        series.setdefault((rec["mechanism"], rec["seed"]), []).append(
            rec["cum_runtime_s"])
    for vals in series.values():
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_rt_distance_identically_zero_and_same_start_accuracy():
    cfg = bench.BenchConfig(**FAST)
    rep = bench.run_bench(cfg)
    accs_at_1 = set()
    for rec in rep.records:
        if rec["mechanism"] == "RT":
            assert rec["dist_to_rt"] == 0.0
        if rec["delete_index"] == 1:
            accs_at_1.add(rec["test_acc"])
    # well-separated blobs: one deletion cannot move any mechanism's accuracy
    assert len(accs_at_1) == 1


def test_determinism_modulo_runtime():
    cfg = bench.BenchConfig(**FAST)

    def strip(rep):
        return [{k: v for k, v in rec.items() if k != "cum_runtime_s"}
                for rec in rep.records]

    assert strip(bench.run_bench(cfg)) == strip(bench.run_bench(cfg))


def test_write_read_round_trip(tmp_path):
    cfg = bench.BenchConfig(**FAST)
    rep = bench.run_bench(cfg)
    path = str(tmp_path / "report.jsonl")
    bench.write_report(rep, path)
    back = bench.read_report(path)
    assert back.header["record_type"] == "header"
    assert back.records == [{k: rec[k] for k in bench.RECORD_KEYS}
                            for rec in rep.records]
    with open(path) as fh:
        first = json.loads(fh.readline())
        second = fh.readline()
    assert first["record_type"] == "header"
    assert list(json.loads(second)) == list(bench.RECORD_KEYS)
    # line count: header + mechanisms x seeds x m
    with open(path) as fh:
        assert sum(1 for _ in fh) == 1 + 3 * 1 * 4


def test_empty_report_writes_header_only(tmp_path):
    path = str(tmp_path / "empty.jsonl")
    bench.write_report(bench.BenchReport(header={"record_type": "header"},
                                         records=[]), path)
    back = bench.read_report(path)
    assert back.records == []
    with pytest.raises(ConfigError):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"mechanism": "IJ"}\n')
        bench.read_report(str(bad))


def test_eval_every_still_reports_final_accuracy():
    cfg = bench.BenchConfig(**{**FAST, "eval_every": 3})
    rep = bench.run_bench(cfg)
    assert all(rec["test_acc"] is not None for rec in rep.records)


def test_csv_source_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    rows = []
    for _ in range(40):
        y = rng.choice([0, 1])
        x = rng.standard_normal(2) + (3.0 if y else -3.0)
        rows.append(f"{x[0]},{x[1]},{y}")
    csv_path = tmp_path / "d.csv"
    csv_path.write_text("\n".join(rows) + "\n")
    cfg = bench.BenchConfig(**{**FAST, "source": "csv",
                               "csv_path": str(csv_path), "label_column": 2,
                               "m": 2, "mechanisms": ("IJ",)})
    rep = bench.run_bench(cfg)
    assert len(rep.records) == 2


def test_render_figures(tmp_path):
    cfg = bench.BenchConfig(**FAST)
    rep = bench.run_bench(cfg)
    paths = plots.render_report_figures(rep, str(tmp_path))
    assert paths
    for p in paths:
        assert os.path.exists(p) and p.endswith(".png")
    names = {os.path.basename(p) for p in paths}
    assert {"bench_runtime.png", "bench_accuracy.png"} <= names


def test_cli_bench_writes_report_and_figures(tmp_path):
    out = str(tmp_path / "r.jsonl")
    code = cli.main(["bench", "--n", "60", "--d", "3", "--m", "2",
                     "--mechanisms", "IJ,RT", "--lam-grid", "1e-2,1e-3",
                     "--seeds", "0", "--out", out])
    assert code == 0
    rep = bench.read_report(out)
    assert len(rep.records) == 4
    assert os.path.exists(str(tmp_path / "bench_runtime.png"))


def test_cli_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "bench.cfg"
    cfg_file.write_text(
        "# demo config\nn = 60\nd = 3\nm = 3\nmechanisms = IJ\n"
        "lam_grid = 1e-2,1e-3\nplots = false\n")
    out = str(tmp_path / "r.jsonl")
    code = cli.main(["bench", "--config", str(cfg_file), "--m", "2",
                     "--out", out])
    assert code == 0
    rep = bench.read_report(out)
    assert len(rep.records) == 2  # flag overrode the file's m


def test_cli_exit_codes(tmp_path):
    assert cli.main(["bench", "--mechanisms", "XX", "--plots", "false"]) == 2
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("nonsense_key = 1\n")
    assert cli.main(["bench", "--config", str(cfg_file)]) == 2
    # missing CSV file is a runtime failure, not a config failure
    assert cli.main(["bench", "--source", "csv", "--csv-path",
                     str(tmp_path / "missing.csv"), "--plots", "false"]) == 3


def test_cli_counterexample_and_capacity(tmp_path, capsys):
    out = str(tmp_path / "ce.json")
    assert cli.main(["--out", out, "counterexample", "--n", "10"]) == 0
    with open(out) as fh:
        payload = json.load(fh)
    assert payload["n"] == 10
    capsys.readouterr()
    assert cli.main(["capacity", "--n", "1000000", "--d", "16",
                     "--mu", "1", "--L", "1", "--M", "1", "--C", "1"]) == 0
    printed = capsys.readouterr().out.strip()
    assert printed.isdigit()


def test_cli_prox_check(capsys):
    assert cli.main(["prox-check", "--trials", "6"]) == 0
    assert "PASS" in capsys.readouterr().out

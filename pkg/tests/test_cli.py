"""Command-line behavior: exit codes, determinism, config validation."""

import dataclasses
import json
import os
import subprocess
import sys

import pytest

from pinchflow import cli
from pinchflow.errors import ConvexityLossError
from pinchflow.reports import strip_timestamp


def invoke(*argv):
    return cli.main(list(argv))


# --- verify-identities -------------------------------------------------------


def test_verify_identities_ok(tmp_path, capsys):
    code = invoke("verify-identities", "--draws", "500", "--out", str(tmp_path))
    assert code == 0
    out = capsys.readouterr().out
    assert "zero_order" in out and "ok" in out
    doc = json.loads((tmp_path / "identities.json").read_text())
    assert doc["pass"] is True


def test_verify_identities_seed_independent_status():
    assert invoke("verify-identities", "--draws", "400", "--seed", "0") == 0
    assert invoke("verify-identities", "--draws", "400", "--seed", "12345") == 0


def test_verify_identities_negative_control():
    # the hidden corruption hook must trip the independent-route comparison
    assert invoke("verify-identities", "--draws", "200", "--corrupt", "fdot") == 1
    assert invoke("verify-identities", "--draws", "200", "--corrupt", "fddot") == 1
    # and must not leak into later runs
    assert invoke("verify-identities", "--draws", "200") == 0


def test_verify_identities_bad_draws():
    assert invoke("verify-identities", "--draws", "-5") == 2


# --- q-sign ------------------------------------------------------------------


def test_q_sign_exit_codes(tmp_path):
    assert invoke("q-sign", "--family", "gauss_power", "--alpha", "2.0") == 0
    assert invoke("q-sign", "--family", "gauss_power", "--alpha", "0.4") == 1
    assert invoke("q-sign", "--family", "sum_power", "--alpha", "101") == 2
    assert invoke("q-sign", "--alpha", "2.0") == 2  # family required
    assert (
        invoke("q-sign", "--family", "gauss_power", "--alpha", "2.0", "--t-max", "1.2")
        == 2
    )


def test_q_sign_report_file(tmp_path):
    code = invoke(
        "q-sign", "--family", "gauss_power", "--alpha", "1.5", "--out", str(tmp_path)
    )
    assert code == 0
    doc = json.loads((tmp_path / "qsign.json").read_text())
    assert doc["verdict"] == "nonpositive_certified"
    assert doc["family"] == "gauss_power"


def test_q_sign_deterministic_bytes(tmp_path):
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    for d in (d1, d2):
        assert (
            invoke(
                "q-sign",
                "--family",
                "mean_power",
                "--alpha",
                "2.5",
                "--t-max",
                "1e4",
                "--out",
                str(d),
            )
            == 0
        )
    a = (d1 / "qsign.json").read_text()
    b = (d2 / "qsign.json").read_text()
    assert strip_timestamp(a) == strip_timestamp(b)
    assert json.loads(a).keys() == json.loads(b).keys()


def test_q_sign_config_file(tmp_path):
    cfg = tmp_path / "q.json"
    cfg.write_text(json.dumps({"family": "gauss_power", "alpha": 2.0}))
    assert invoke("q-sign", "--config", str(cfg)) == 0
    # explicit flags override the file
    assert invoke("q-sign", "--config", str(cfg), "--alpha", "2.1") == 1
    # unknown keys are rejected with the field named
    cfg.write_text(json.dumps({"family": "gauss_power", "alpha": 2.0, "spam": 1}))
    assert invoke("q-sign", "--config", str(cfg)) == 2


# --- threshold ---------------------------------------------------------------


def test_threshold_gauss(tmp_path, capsys):
    code = invoke(
        "threshold",
        "--family",
        "gauss_power",
        "--alpha-lo",
        "1.5",
        "--alpha-hi",
        "3.0",
        "--tol",
        "0.05",
        "--out",
        str(tmp_path),
    )
    assert code == 0
    doc = json.loads((tmp_path / "threshold.json").read_text())
    lo, hi = doc["bracket"]
    assert lo <= 2.0 <= hi
    assert doc["width"] <= 0.05
    assert "midpoint" in capsys.readouterr().out


def test_threshold_non_bracketing():
    code = invoke(
        "threshold",
        "--family",
        "gauss_power",
        "--alpha-lo",
        "0.6",
        "--alpha-hi",
        "1.9",
    )
    assert code == 2


def test_threshold_bad_range():
    assert (
        invoke(
            "threshold", "--family", "gauss_power", "--alpha-lo", "3", "--alpha-hi", "1"
        )
        == 2
    )


# --- flow --------------------------------------------------------------------


def test_flow_sphere_summary(tmp_path, capsys):
    code = invoke(
        "flow",
        "--family",
        "gauss_power",
        "--alpha",
        "2",
        "--n-nodes",
        "101",
        "--out",
        str(tmp_path),
    )
    assert code == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["status"] == "extinct_fraction"
    assert doc["t_extinct"] == pytest.approx(1.0 / 3.0, abs=1e-3)
    assert doc["sphere_t_exact"] == pytest.approx(1.0 / 3.0)
    assert all(doc["monotonicity"]["monotone"].values())
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0].startswith("step,t,dt,min_support")
    assert len(lines) > 10


def test_flow_invalid_config_no_partial_output(tmp_path):
    out = tmp_path / "never"
    code = invoke(
        "flow",
        "--family",
        "gauss_power",
        "--alpha",
        "2",
        "--n-nodes",
        "12",
        "--out",
        str(out),
    )
    assert code == 2
    assert not out.exists()


def test_flow_convexity_loss_exit_and_partial_trace(tmp_path, monkeypatch):
    small = cli.flowmod.FlowConfig("gauss_power", 2.0, n_nodes=101, record_every=500)
    trace = cli.flowmod.run(small)
    partial = dataclasses.replace(
        trace,
        status="convexity_loss",
        t_extinct=None,
        extinction_center=None,
        extinction_low_confidence=None,
        deviation=None,
    )

    def explode(config, profile=None):
        err = ConvexityLossError("synthetic loss", node=3)
        err.trace = partial
        raise err

    monkeypatch.setattr(cli.flowmod, "run", explode)
    code = invoke(
        "flow",
        "--family",
        "gauss_power",
        "--alpha",
        "2",
        "--n-nodes",
        "101",
        "--out",
        str(tmp_path),
    )
    assert code == 3
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["status"] == "convexity_loss"
    assert (tmp_path / "trace.csv").exists()


# --- sweep -------------------------------------------------------------------


def sweep_config(tmp_path, body):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(body))
    return str(path)


def test_sweep_runs_and_merges(tmp_path):
    cfg = sweep_config(
        tmp_path,
        {
            "base": {
                "family": "gauss_power",
                "a": 1.0,
                "b": 1.0,
                "n_nodes": 101,
                "record_every": 400,
            },
            "sweep": {"alpha": [1.0, 2.0]},
        },
    )
    out = tmp_path / "out"
    code = invoke("sweep", "--config", cfg, "--workers", "2", "--out", str(out))
    assert code == 0
    doc = json.loads((out / "sweep.json").read_text())
    assert [r["config"]["alpha"] for r in doc["runs"]] == [1.0, 2.0]
    assert doc["exit_codes"] == [0, 0]
    for i in range(2):
        assert (out / f"run_{i:03d}" / "summary.json").exists()


def test_sweep_explicit_runs_sequential(tmp_path):
    cfg = sweep_config(
        tmp_path,
        {
            "runs": [
                {"family": "gauss_power", "alpha": 2.0, "n_nodes": 101},
                {"family": "mean_power", "alpha": 1.0, "n_nodes": 101},
            ]
        },
    )
    out = tmp_path / "out"
    assert invoke("sweep", "--config", cfg, "--workers", "1", "--out", str(out)) == 0
    doc = json.loads((out / "sweep.json").read_text())
    assert [r["config"]["family"] for r in doc["runs"]] == [
        "gauss_power",
        "mean_power",
    ]


def test_sweep_validates_all_before_output(tmp_path):
    cfg = sweep_config(
        tmp_path,
        {
            "runs": [
                {"family": "gauss_power", "alpha": 2.0, "n_nodes": 101},
                {"family": "gauss_power", "alpha": 2.0, "n_nodes": 10},
            ]
        },
    )
    out = tmp_path / "out"
    assert invoke("sweep", "--config", cfg, "--out", str(out)) == 2
    assert not out.exists()


def test_sweep_rejects_ambiguous_config(tmp_path):
    cfg = sweep_config(
        tmp_path,
        {"runs": [{"family": "gauss_power", "alpha": 2.0}], "sweep": {"alpha": [1.0]}},
    )
    assert invoke("sweep", "--config", cfg) == 2
    assert invoke("sweep") == 2  # --config required


def test_sweep_deterministic_across_worker_counts(tmp_path):
    body = {
        "base": {"family": "gauss_power", "n_nodes": 101, "record_every": 500},
        "sweep": {"alpha": [1.0, 1.5, 2.0]},
    }
    outs = []
    for workers in ("1", "3"):
        out = tmp_path / f"w{workers}"
        code = invoke(
            "sweep",
            "--config",
            sweep_config(tmp_path, body),
            "--workers",
            workers,
            "--out",
            str(out),
        )
        assert code == 0
        outs.append(strip_timestamp((out / "sweep.json").read_text()))
    assert outs[0] == outs[1]


# --- entry point -------------------------------------------------------------


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pinchflow.cli", "q-sign", "--family", "gauss_power", "--alpha", "1.0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "nonpositive_certified" in proc.stdout

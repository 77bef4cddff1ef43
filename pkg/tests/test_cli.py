import json
import os
from pathlib import Path

import numpy as np
import pytest

from dualalp.cli import (EXIT_CAPACITY, EXIT_CONFIG, SEED_ENV_VAR, main)
from dualalp.trace import read_trace_csv

DATA = Path(__file__).parent / "data"


def base_config(tmp_path, **solver):
    cfg = {
        "problem": {"mdp_path": str(DATA / "mdp4.json")},
        "features": {"path": str(DATA / "features3.json")},
        "sampling": {"scheme": "uniform"},
        "solver": {"penalty": 2.0, "radius": 1.5, "iterations": 200, "seed": 7,
                   **solver},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def read_summary(out_dir):
    with open(Path(out_dir) / "summary.json") as handle:
        return json.load(handle)


def test_solve_avg_writes_outputs(tmp_path, capsys):
    cfg = base_config(tmp_path)
    out = tmp_path / "out"
    assert main(["solve-avg", "--config", str(cfg), "--out", str(out)]) == 0
    summary = read_summary(out)
    assert summary["config"]["mode"] == "solve-avg"
    assert summary["config"]["solver"]["seed"] == 7
    assert len(summary["result"]["theta"]) == 3
    assert "violations_exact" in summary["result"]
    cols = read_trace_csv(out / "trace.csv")
    assert cols["t"][-1] == 200
    # the resolved config materializes every default
    assert "failure_prob" in summary["config"]["solver"]
    assert summary["config"]["eval"]["mode"] == "none"


def test_solve_avg_byte_identical_reruns(tmp_path):
    cfg = base_config(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["solve-avg", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["solve-avg", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


def test_solve_avg_seed_changes_trace(tmp_path):
    cfg = base_config(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["solve-avg", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["solve-avg", "--config", str(cfg), "--out", str(out2),
                 "--seed", "8"]) == 0
    assert (out1 / "trace.csv").read_bytes() != (out2 / "trace.csv").read_bytes()
    assert read_summary(out2)["config"]["solver"]["seed"] == 8


def test_seed_env_override(tmp_path):
    cfg = base_config(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    os.environ[SEED_ENV_VAR] = "9"
    try:
        assert main(["solve-avg", "--config", str(cfg), "--out", str(out1)]) == 0
    finally:
        del os.environ[SEED_ENV_VAR]
    assert main(["solve-avg", "--config", str(cfg), "--out", str(out2),
                 "--seed", "9"]) == 0
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()


def test_solve_disc_pipeline(tmp_path):
    cfg = base_config(tmp_path, discount=0.85)
    out = tmp_path / "out"
    assert main(["solve-disc", "--config", str(cfg), "--out", str(out)]) == 0
    summary = read_summary(out)
    assert summary["result"]["discount"] == 0.85
    assert summary["result"]["alpha_spec"] == "uniform"
    assert (out / "trace.csv").exists()


def test_meta_avg_pipeline(tmp_path):
    cfg_doc = {
        "problem": {"mdp_path": str(DATA / "mdp4.json")},
        "features": {"path": str(DATA / "features3.json")},
        "solver": {"radius": 1.5, "seed": 3, "tolerance": 0.8, "failure_prob": 0.2},
        "meta": {"violation_bound": 1.0, "selection_weight": 1.0},
    }
    cfg = tmp_path / "meta.json"
    cfg.write_text(json.dumps(cfg_doc))
    out = tmp_path / "out"
    assert main(["meta-avg", "--config", str(cfg), "--out", str(out)]) == 0
    summary = read_summary(out)
    points = summary["result"]["grid_points"]
    assert len(points) >= 2
    for k in range(len(points)):
        assert (out / f"trace_{k:03d}.csv").exists()
    # selection bookkeeping is recomputable from the summary alone
    recomputed = [summary["result"]["linear_objectives"][k]
                  + points[k] * summary["result"]["violation_estimates"][k]
                  + summary["result"]["selection_weight"] / points[k]
                  for k in range(len(points))]
    np.testing.assert_allclose(recomputed, summary["result"]["selection_values"],
                               atol=1e-12)
    assert summary["result"]["chosen_index"] == int(np.argmin(recomputed))


def test_meta_disc_pipeline(tmp_path):
    cfg_doc = {
        "problem": {"mdp_path": str(DATA / "mdp4.json")},
        "features": {"path": str(DATA / "features3.json")},
        "solver": {"radius": 1.5, "seed": 3, "tolerance": 0.8, "failure_prob": 0.2,
                   "discount": 0.8},
        "meta": {"violation_bound": 1.0, "selection_weight": 1.0},
    }
    cfg = tmp_path / "meta.json"
    cfg.write_text(json.dumps(cfg_doc))
    out = tmp_path / "out"
    assert main(["meta-disc", "--config", str(cfg), "--out", str(out)]) == 0
    summary = read_summary(out)
    assert summary["result"]["discount"] == 0.8
    assert len(summary["result"]["grid_points"]) >= 2


def test_print_grid_stdout(capsys):
    assert main(["print-grid", "--v-max", "1.0", "--beta", "1.0",
                 "--epsilon", "0.5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert float(lines[0]) == pytest.approx(1.0)
    assert float(lines[1]) == pytest.approx(1.25)


def test_eval_policy_heuristic(tmp_path):
    small = {
        "problem": {"queue_preset": "desk"},
        "policy": {"heuristic": "LBFS"},
        "eval": {"mode": "simulated", "horizon": 3000, "burn_in": 300, "reps": 2},
    }
    cfg = tmp_path / "eval.json"
    cfg.write_text(json.dumps(small))
    out = tmp_path / "out"
    assert main(["eval-policy", "--config", str(cfg), "--out", str(out)]) == 0
    summary = read_summary(out)
    assert summary["result"]["policy"] == "LBFS"
    assert summary["result"]["simulated_loss"] > 0


def test_config_errors_exit_code(tmp_path):
    missing = tmp_path / "nope.json"
    assert main(["solve-avg", "--config", str(missing)]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text('{"problem": {}}')
    assert main(["solve-avg", "--config", str(bad), "--out",
                 str(tmp_path / "o")]) == EXIT_CONFIG
    unknown_key = tmp_path / "unknown.json"
    unknown_key.write_text(json.dumps({
        "problem": {"mdp_path": str(DATA / "mdp4.json")},
        "features": {"path": str(DATA / "features3.json")},
        "solver": {"bogus_knob": 1},
    }))
    assert main(["solve-avg", "--config", str(unknown_key), "--out",
                 str(tmp_path / "o2")]) == EXIT_CONFIG


def test_capacity_error_exit_code(tmp_path):
    cfg = tmp_path / "paper_bench.json"
    cfg.write_text(json.dumps({"problem": {"queue_preset": "paper"}}))
    # the paper preset cannot be solved exactly: meta-avg on it must refuse
    assert main(["meta-avg", "--config", str(cfg), "--out",
                 str(tmp_path / "o")]) == EXIT_CAPACITY

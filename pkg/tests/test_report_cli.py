import csv
import json
import xml.etree.ElementTree as ET

import numpy as np

from seqfo import harness
from seqfo.bench import Benchmark, aligned_layout, grid_search_optimum, quadratic_problem
from seqfo.cli import main
from seqfo.plant import Plant
from seqfo.report import moving_average, steady_value, tail_error, trajectory_header, write_power_svg


def _read_summary(path):
    out = {}
    for line in path.read_text().splitlines():
        if " = " in line:
            key, value = line.split(" = ", 1)
            out.setdefault(key, value)
    return out


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# report helpers

def test_header_layout():
    assert trajectory_header(2, 1) == ["k", "outer", "u_0", "u_1", "y_0", "cost", "total_power",
                                       "n_lin", "n_fwd", "elapsed_s"]


def test_steady_value_and_tail_error():
    s = np.concatenate([np.zeros(90), np.full(10, 3.0)])
    assert steady_value(s) == 3.0
    u = np.zeros((100, 1))
    u[-5] = 0.25
    assert tail_error(u, [0.0]) == 0.25


def test_moving_average_constant_and_window():
    np.testing.assert_allclose(moving_average(np.full(50, 2.0), 7), 2.0)
    m = moving_average(np.arange(11.0), 3)
    np.testing.assert_allclose(m[1:-1], np.arange(1.0, 10.0))


def test_svg_is_well_formed(tmp_path):
    path = write_power_svg(tmp_path / "p.svg", {"a": np.sin(np.arange(400) / 20), "b": np.ones(400)})
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    assert len([e for e in root.iter() if e.tag.endswith("polyline")]) == 4


# run

def test_run_scalar_design_step(tmp_path):
    out = tmp_path / "run"
    code = main(["run", "--plant", "scalar", "--alpha", "auto", "--max-outer", "3000",
                 "--out", str(out), "--emit-plot"])
    assert code == 0
    summary = _read_summary(out / "summary.txt")
    bound = float(summary["thm1_bound"])
    u_star = harness.resolve_benchmark(harness.ExperimentConfig(plant="scalar")).optimum[0]
    assert abs(float(summary["final_input"]) - u_star) <= 1.1 * bound
    rows = _rows(out / "trajectory.csv")
    assert rows[0] == trajectory_header(1, 1)
    assert len(rows) == 3000 + 1
    assert (out / "power.svg").exists()
    assert summary["certified"] == "yes"


def test_run_counts_table_relation(tmp_path):
    out = tmp_path / "t80"
    assert main(["run", "--plant", "scalar", "--algorithm", "smtfo", "--inner-T", "80",
                 "--max-outer", "1122", "--out", str(out)]) == 0
    summary = _read_summary(out / "summary.txt")
    assert summary["n_fwd"] == "89760" and summary["n_lin"] == "1122"


def test_run_is_byte_identical(tmp_path):
    args = ["run", "--plant", "farm:N=3", "--algorithm", "smtfo", "--inner_T", "5",
            "--max_outer", "60", "--seed", "3"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_record_time_fills_elapsed(tmp_path):
    main(["run", "--plant", "lti", "--max-outer", "20", "--record-time", "--out", str(tmp_path)])
    rows = _rows(tmp_path / "trajectory.csv")
    assert all(r[-1] != "" for r in rows[1:])
    assert float(rows[-1][-1]) >= float(rows[1][-1])


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"plant": "lti", "algorithm": "ideal", "max_outer": 50, "alpha": 0.1}))
    assert main(["run", "--config", str(cfg), "--max-outer", "12", "--out", str(tmp_path / "o")]) == 0
    assert len(_rows(tmp_path / "o" / "trajectory.csv")) == 13


def test_bad_config_exits_1(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"plant": "lti", "bogus": 1}))
    assert main(["run", "--config", str(cfg)]) == 1
    assert main(["run", "--plant", "nowhere", "--out", str(tmp_path)]) == 1
    assert main(["run", "--algorithm", "sfo", "--inner-T", "4", "--out", str(tmp_path)]) == 1


def _singular_bench():
    def f(x, u):
        return np.where(np.abs(u) > 1, 1.0, 0.5) * x + u

    def jac(x, u):
        return np.where(np.abs(u) > 1, 1.0, 0.5), [[1.0]], [[1.0]], [[0.0]]

    plant = Plant(1, 1, 1, f, lambda x, u: x, jacobians=jac)
    return Benchmark("singular", plant, quadratic_problem(u_target=4.0, alpha=0.4),
                     np.zeros(1), np.zeros(1))


def test_failure_flushes_partial_csv(tmp_path, monkeypatch):
    monkeypatch.setattr(harness, "resolve_benchmark", lambda cfg: _singular_bench())
    code = main(["run", "--plant", "lti", "--max-outer", "100", "--out", str(tmp_path)])
    assert code == 1
    rows = _rows(tmp_path / "trajectory.csv")
    assert 1 < len(rows) < 101
    assert "SingularityError" in (tmp_path / "summary.txt").read_text()


# certify

def test_certify_lti(tmp_path, capsys):
    assert main(["certify", "--plant", "lti", "--alpha", "0.1", "--T", "1", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "thm1_bound = 0.0" in text and "certified = yes" in text


def test_certify_scalar_designed(tmp_path):
    assert main(["certify", "--plant", "scalar", "--alpha", "auto", "--out", str(tmp_path)]) == 0


def test_certify_scalar_large_step_uncertified(tmp_path, capsys):
    assert main(["certify", "--plant", "scalar", "--alpha", "100", "--out", str(tmp_path)]) == 2
    assert "thm1_bound = uncertified" in capsys.readouterr().out


def test_certify_estimate_path_runs(tmp_path):
    code = main(["certify", "--plant", "lti", "--alpha", "0.1", "--estimate", "--samples", "16",
                 "--out", str(tmp_path)])
    assert code in (0, 2)
    assert "rho_f = 0.55" in (tmp_path / "certificate.txt").read_text()


def test_certify_contraction_violation_exits_1(tmp_path, monkeypatch, capsys):
    plant = Plant(1, 1, 1, lambda x, u: 0.97 * x + u, lambda x, u: x)
    bench = Benchmark("slow", plant, quadratic_problem(), np.zeros(1), np.zeros(1))
    monkeypatch.setattr(harness, "resolve_benchmark", lambda cfg: bench)
    assert main(["certify", "--plant", "lti", "--out", str(tmp_path)]) == 1
    assert "contraction" in capsys.readouterr().out.lower()


# sweep

def _sweep_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_sweep_T_counter_columns(tmp_path):
    assert main(["sweep", "--plant", "scalar", "--max-outer", "40", "--param", "T",
                 "--values", "1,5,10,20", "--jobs", "2", "--out", str(tmp_path)]) == 0
    rows = _sweep_rows(tmp_path / "sweep.csv")
    assert [r["value"] for r in rows] == ["1", "5", "10", "20"]
    for r in rows:
        assert int(r["n_fwd"]) == int(r["value"]) * int(r["n_lin"])
        assert (tmp_path / f"T_{r['value']}" / "trajectory.csv").exists()


def test_sweep_alpha_records_bounds_and_failures(tmp_path):
    assert main(["sweep", "--plant", "scalar", "--max-outer", "50", "--param", "alpha",
                 "--values", "0.1,-1,100", "--out", str(tmp_path)]) == 0
    rows = {r["value"]: r for r in _sweep_rows(tmp_path / "sweep.csv")}
    assert rows["0.1"]["status"] == "ok" and float(rows["0.1"]["thm1_bound"]) > 0
    assert rows["-1.0"]["status"] == "failed" and rows["-1.0"]["message"]
    assert rows["100.0"]["thm1_bound"] == "uncertified"


def test_sweep_all_failed_exits_1(tmp_path):
    assert main(["sweep", "--plant", "scalar", "--param", "alpha", "--values", "-1",
                 "--out", str(tmp_path)]) == 1


def test_sweep_mu_gamma_direction(tmp_path):
    assert main(["sweep", "--plant", "farm:N=3", "--max-outer", "3000", "--param", "mu_gamma",
                 "--values", "4e-5,5e-5,6e-5", "--jobs", "3", "--out", str(tmp_path)]) == 0
    rows = _sweep_rows(tmp_path / "sweep.csv")
    power = [float(r["final_power"]) for r in rows]
    yaw = [float(r["upstream_yaw"]) for r in rows]
    assert power[0] >= power[1] >= power[2]
    assert yaw[0] >= yaw[1] >= yaw[2] > 1.0


# greedy comparison

def _gain(out):
    return float(_read_summary(out / "summary.txt")["gain_percent"]) / 100


def test_compare_single_turbine_no_gain(tmp_path):
    # reference above reachable power: only the regularisation pulls thrust off Betz
    assert main(["compare-greedy", "--plant", "farm:N=1", "--p-ref", "2e6", "--max-outer", "2000",
                 "--out", str(tmp_path)]) == 0
    assert abs(_gain(tmp_path)) <= 1e-3
    rows = _rows(tmp_path / "compare.csv")
    assert rows[0] == ["k", "greedy_power", "sfo_power"] and len(rows) == 2001


def test_compare_two_turbines_near_grid_optimum(tmp_path):
    assert main(["compare-greedy", "--plant", "farm:N=2", "--max-outer", "4000",
                 "--out", str(tmp_path)]) == 0
    assert _gain(tmp_path) > 0
    u = np.array(_read_summary(tmp_path / "summary.txt")["final_input"].split(), dtype=float)
    ctrl, _ = grid_search_optimum(aligned_layout(2), resolution=100)
    # the cost is even in yaw: compare magnitudes
    np.testing.assert_allclose(u[:2], ctrl.thrust, atol=0.15)
    np.testing.assert_allclose(np.abs(u[2:]), np.abs(ctrl.yaw), atol=1.0)


def test_compare_three_turbines_gain(tmp_path):
    assert main(["compare-greedy", "--plant", "farm:N=3", "--algorithm", "smtfo", "--inner-T", "50",
                 "--max-outer", "80", "--out", str(tmp_path), "--emit-plot"]) == 0
    assert _gain(tmp_path) >= 0.05
    assert (tmp_path / "compare.svg").exists()


def test_compare_requires_farm(tmp_path):
    assert main(["compare-greedy", "--plant", "lti", "--out", str(tmp_path)]) == 1


def test_layout_file_selector(tmp_path):
    path = tmp_path / "farm.json"
    path.write_text(aligned_layout(2).to_json())
    assert main(["run", "--plant", f"farm:{path}", "--max-outer", "30", "--out", str(tmp_path / "o")]) == 0
    assert _rows(tmp_path / "o" / "trajectory.csv")[0][2:6] == ["u_0", "u_1", "u_2", "u_3"]

"""Experiment runner: config validation, exit codes, reports, determinism."""

import json

import pytest

from horolab.cli import ConfigError, main, parse_config, run_experiment

AXIOMS_CFG = {
    "experiment": "axioms",
    "space": {"kind": "lp", "p": 2, "dim": 2},
    "samples": 200,
    "grid_step": 0.25,
    "seed": 5,
}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_invalid_configs_exit_2(tmp_path, capsys):
    bad_norm = dict(AXIOMS_CFG, space={"kind": "lp", "p": 0.5, "dim": 2})
    assert main([_write(tmp_path, bad_norm), "--out", str(tmp_path / "o1")]) == 2
    assert "config error" in capsys.readouterr().err

    bad_exp = dict(AXIOMS_CFG, experiment="frobnicate")
    assert main([_write(tmp_path, bad_exp, "b.json"), "--out", str(tmp_path / "o2")]) == 2

    bad_space = dict(AXIOMS_CFG, space={"kind": "banach"})
    assert main([_write(tmp_path, bad_space, "c.json"), "--out", str(tmp_path / "o3")]) == 2

    with pytest.raises(ConfigError):
        parse_config({"experiment": "axioms"})
    with pytest.raises(ConfigError):
        parse_config(dict(AXIOMS_CFG, windows=[4.0, 4.0]))
    with pytest.raises(ConfigError):
        parse_config(dict(AXIOMS_CFG, grid_step=0.0))

    off_lattice_rebase = {
        "experiment": "horoboundary",
        "space": {"kind": "lp", "p": 1, "dim": 2},
        "directions": [{"unit": [1, 0]}],
        "windows": [4.0],
        "window_steps": [2.0],
        "radii_schedule": [16.0, 32.0, 64.0],
        "rebase_point": [1.0, 1.0],
    }
    assert main([_write(tmp_path, off_lattice_rebase, "d.json"), "--out", str(tmp_path / "o4")]) == 2


def test_axioms_suite_exits_0(tmp_path):
    out = tmp_path / "out"
    assert main([_write(tmp_path, AXIOMS_CFG), "--out", str(out), "-v"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["exit_status"] == 0
    assert report["constants"]["D1"] == 10.0
    names = [c["name"] for c in report["checks"]]
    assert names == ["metric_axioms", "quasi_geodesic", "convexity_i", "theta_ii"]
    assert all(c["passed"] for c in report["checks"])


def test_understated_cone_constants_exit_1(tmp_path):
    cfg = {
        "experiment": "cone_table",
        "space": {"kind": "snapped", "delta": 2.0, "inner": {"kind": "lp", "p": 1, "dim": 2}},
        "claim": {"lam": 1, "k": 0, "E": 1, "C": 0},
        "samples": 20000,
        "sample_radius": 12.0,
        "seed": 1,
    }
    out = tmp_path / "out"
    assert main([_write(tmp_path, cfg), "--out", str(out)]) == 1
    report = json.loads((out / "report.json").read_text())
    tri = next(c for c in report["checks"] if c["name"] == "quasi_triangle[floor]")
    assert tri["violation_count"] > 0
    witness = tri["violations"][0]
    assert len(witness["inputs"]) == 3 and witness["slack"] < 0
    # the honest claim passes on the same samples
    honest = dict(cfg)
    honest.pop("claim")
    assert run_experiment(parse_config(honest)).exit_status == 0


def test_gromov_experiment_table(tmp_path):
    cfg = {
        "experiment": "gromov",
        "space": {"kind": "lp", "p": 1, "dim": 2},
        "samples": 100,
        "scan_step": 0.01,
        "ray_radius": 10.0,
        "directions": [{"unit": [1, 0]}, {"unit": [0, 1]}],
        "seed": 2,
    }
    out = tmp_path / "out"
    assert main([_write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = (out / "product_table.csv").read_text().strip().splitlines()
    assert rows[0] == "x,y,product,visual"
    cross = [r.split(",") for r in rows[1:]]
    cross = [r for r in cross if r[0] == "unit:1;0" and r[1] == "unit:0;1"]
    assert cross and abs(float(cross[0][2]) - 5.0) <= 0.02


def test_open_cone_experiment(tmp_path):
    cfg = {
        "experiment": "open_cone_boundary",
        "space": {"kind": "open_cone", "labels": ["a", "b"], "matrix": [[0, 1], [1, 0]]},
        "windows": [5.0, 10.0],
        "midpoint_check": {"pair": ["a", "b"], "min_ratio": 0.99, "z_step": 0.05},
        "seed": 0,
    }
    out = tmp_path / "out"
    assert main([_write(tmp_path, cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    names = {c["name"] for c in report["checks"]}
    assert {"metric_axioms", "limit_exactness", "recovery_sup", "no_approximate_midpoint"} <= names


def test_reports_are_byte_identical_across_runs_and_workers(tmp_path):
    cfg_path = _write(tmp_path, AXIOMS_CFG)
    outs = []
    for i, workers in enumerate((1, 1, 4)):
        out = tmp_path / f"out{i}"
        assert main([cfg_path, "--out", str(out), "--workers", str(workers)]) == 0
        outs.append((out / "report.json").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_override_changes_report(tmp_path):
    cfg_path = _write(tmp_path, AXIOMS_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main([cfg_path, "--out", str(out1)]) == 0
    assert main([cfg_path, "--out", str(out2), "--seed", "99"]) == 0
    r1 = json.loads((out1 / "report.json").read_text())
    r2 = json.loads((out2 / "report.json").read_text())
    assert r1["checks"][0]["checked"] == r2["checks"][0]["checked"]


def test_horoboundary_experiment_tables(tmp_path):
    cfg = {
        "experiment": "horoboundary",
        "space": {"kind": "lp", "p": 1, "dim": 2},
        "directions": [{"unit": [1, 0], "name": "east"}],
        "windows": [4.0, 8.0],
        "radii_schedule": [16.0, 32.0, 64.0],
        "rebase_point": [1.0, 1.0],
        "seed": 3,
    }
    out = tmp_path / "out"
    assert main([_write(tmp_path, cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    names = [c["name"] for c in report["checks"]]
    assert names == ["busemann_closeness", "rebase_consistency"]
    csv_lines = (out / "limit_east.csv").read_text().strip().splitlines()
    # one row per window point plus the header
    from horolab import LpSpace, make_window

    w = make_window(LpSpace(2, 1.0), 8.0)
    assert len(csv_lines) == 1 + len(w.points)


def test_reduced_vs_ideal_small(tmp_path):
    cfg = {
        "experiment": "reduced_vs_ideal",
        "space": {"kind": "lp", "p": 1, "dim": 2},
        "directions": [
            {"unit": [1, 0], "name": "east"},
            {"unit": [1, 0], "offset": [0, 2], "name": "east+2"},
            {"unit": [0, 1], "name": "north"},
        ],
        "windows": [4.0, 8.0, 16.0],
        "radii_schedule": [32.0, 64.0, 128.0, 256.0],
        "thresholds": [5.0, 10.0, 20.0],
        "seed": 4,
    }
    out = tmp_path / "out"
    assert main([_write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = (out / "classification_matrix.csv").read_text().strip().splitlines()
    assert rows[0] == "dir1,dir2,verdict,same_ideal,plateau,slope"
    body = {tuple(r.split(",")[:4]) for r in rows[1:]}
    assert ("east", "east+2", "bounded", "True") in body
    assert ("east", "north", "growing", "False") in body

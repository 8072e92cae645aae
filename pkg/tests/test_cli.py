import csv

import pytest

from boxplan.cli import main
from boxplan.harness.records import read_curve, read_records


def run_cli(*args):
    return main(list(args))


def test_run_writes_episode_csv(tmp_path, capsys):
    out = tmp_path / "run"
    rc = run_cli(
        "run", "--preset", "goright-hand/q-learning",
        "--trials", "2", "--episodes", "4", "--seed", "3", "--out", str(out),
    )
    assert rc == 0
    records = read_records(out / "episodes.csv")
    assert {r.trial for r in records} == {0, 1}
    assert {r.episode for r in records} == {0, 1, 2, 3}
    assert (out / "config.yaml").exists()
    assert "final-episode eval return" in capsys.readouterr().out


def test_run_flag_overrides(tmp_path):
    out = tmp_path / "run"
    run_cli(
        "run", "--preset", "goright-hand", "--agent", "box",
        "--alpha", "0.2", "--tau", "0.5",
        "--trials", "1", "--episodes", "2", "--seed", "0", "--out", str(out),
    )
    import yaml

    cfg = yaml.safe_load((out / "config.yaml").read_text())
    assert cfg["agent"]["alpha"] == 0.2
    assert cfg["agent"]["tau"] == 0.5


def test_aggregate_roundtrip(tmp_path):
    out = tmp_path / "run"
    run_cli(
        "run", "--preset", "goright-hand/q-learning",
        "--trials", "2", "--episodes", "6", "--seed", "1", "--out", str(out),
    )
    curve_path = tmp_path / "curve.csv"
    rc = run_cli("aggregate", str(out / "episodes.csv"), "--out", str(curve_path))
    assert rc == 0
    rows = read_curve(curve_path)
    assert len(rows) == 6
    assert [e for e, _, _ in rows] == list(range(6))


def test_diag_fills_unc_error_column(tmp_path):
    out = tmp_path / "diag"
    rc = run_cli(
        "diag", "--preset", "goright-hand/box",
        "--trials", "1", "--episodes", "2", "--seed", "2", "--out", str(out),
    )
    assert rc == 0
    records = read_records(out / "episodes.csv")
    assert all(r.median_unc_error == 0.0 for r in records)


def test_sweep_writes_selection_table(tmp_path):
    out = tmp_path / "sweep"
    rc = run_cli(
        "sweep", "--preset", "goright-hand/box",
        "--alphas", "0.1,0.2", "--taus", "1.0",
        "--trials", "1", "--episodes", "3", "--seed", "4", "--out", str(out),
    )
    assert rc == 0
    with open(out / "selection.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert [r["selected"] for r in rows].count("1") == 1
    assert set(rows[0]) == {"alpha", "tau", "final_perf", "improvement_sum", "selected"}


def test_presets_listing(capsys):
    assert run_cli("presets") == 0
    out = capsys.readouterr().out
    assert "goright-hand/box" in out
    assert "acrobot-nn/mc-range-k40" in out


def test_missing_source_is_an_error():
    with pytest.raises(SystemExit):
        run_cli("run", "--trials", "1")

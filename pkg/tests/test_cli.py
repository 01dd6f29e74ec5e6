import json
from pathlib import Path

import numpy as np
import pytest

from oscim.cli import (
    BENCH_COLUMNS,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_USAGE,
    SCALING_HEADER,
    SWEEP_HEADER,
    TRACE_HEADER,
    main,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def solve_json(capsys, *argv):
    code, out, _ = run_cli(capsys, *argv)
    assert code == EXIT_OK
    return json.loads(out)


REPORT_KEYS = {
    "instance", "problem", "n", "edges", "params", "replicas", "workers",
    "best_objective", "satisfied_fraction", "reference", "accuracy_pct",
    "wall_time_s", "steps", "seed",
}
PARAM_KEYS = {"K", "ks_max", "ks_period", "kn", "h", "t_stop", "n_states", "seed", "batch_size"}


def test_solve_triangle_maxcut(capsys, fixtures_dir):
    report = solve_json(
        capsys, "solve", str(fixtures_dir / "tri.gset"),
        "--problem", "maxcut", "--seed", "7", "--replicas", "4", "--t-stop", "30",
    )
    assert report["best_objective"] == 2.0
    assert report["problem"] == "maxcut"
    # the report schema is pinned: reproducing a run needs params + seed
    assert set(report) == REPORT_KEYS
    assert set(report["params"]) == PARAM_KEYS


def test_solve_flag_overrides_reach_params(capsys, fixtures_dir):
    report = solve_json(
        capsys, "solve", str(fixtures_dir / "tri.gset"),
        "--K", "0.7", "--ks-max", "3.0", "--ks-period", "2.5", "--kn", "0.05",
        "--h", "0.02", "--t-stop", "12", "--seed", "9", "--batch-size", "32",
    )
    p = report["params"]
    assert p == {
        "K": 0.7, "ks_max": 3.0, "ks_period": 2.5, "kn": 0.05, "h": 0.02,
        "t_stop": 12.0, "n_states": 2, "seed": 9, "batch_size": 32,
    }


def test_solve_report_reproducible(capsys, fixtures_dir):
    args = ("solve", str(fixtures_dir / "weighted.gset"), "--seed", "3", "--t-stop", "20")
    first = solve_json(capsys, *args)
    second = solve_json(capsys, *args)
    assert first["best_objective"] == second["best_objective"]
    assert first["params"] == second["params"]


def test_solve_coloring_satisfied_fraction(capsys, fixtures_dir):
    report = solve_json(
        capsys, "solve", str(fixtures_dir / "tri.col"),
        "--problem", "coloring", "--colors", "3", "--seed", "1", "--t-stop", "30",
    )
    assert report["problem"] == "coloring"
    assert report["satisfied_fraction"] == 1.0
    assert report["best_objective"] == 0.0


def test_solve_reference_accuracy(capsys, fixtures_dir):
    report = solve_json(
        capsys, "solve", str(fixtures_dir / "tri.gset"),
        "--seed", "2", "--t-stop", "30", "--replicas", "4", "--reference", "2",
    )
    assert report["accuracy_pct"] == pytest.approx(100.0)
    no_ref = solve_json(
        capsys, "solve", str(fixtures_dir / "tri.gset"), "--seed", "2", "--t-stop", "30",
    )
    assert no_ref["accuracy_pct"] is None


def test_solve_missing_file_is_input_error(capsys):
    code, _, err = run_cli(capsys, "solve", "missing.gset")
    assert code == EXIT_INPUT
    assert "input error" in err


def test_solve_malformed_file_is_input_error(capsys, fixtures_dir):
    code, _, err = run_cli(capsys, "solve", str(fixtures_dir / "bad_selfloop.gset"))
    assert code == EXIT_INPUT


def test_solve_colors_with_maxcut_is_usage_error(capsys, fixtures_dir):
    code, _, err = run_cli(
        capsys, "solve", str(fixtures_dir / "tri.gset"), "--problem", "maxcut", "--colors", "3"
    )
    assert code == EXIT_USAGE


def test_unknown_flag_is_usage_error(capsys, fixtures_dir):
    code, _, _ = run_cli(capsys, "solve", str(fixtures_dir / "tri.gset"), "--bogus")
    assert code == EXIT_USAGE


def test_solve_trace_csv(tmp_path, capsys, fixtures_dir):
    trace = tmp_path / "trace.csv"
    solve_json(
        capsys, "solve", str(fixtures_dir / "tri.gset"),
        "--seed", "5", "--t-stop", "20", "--trace", str(trace),
    )
    lines = trace.read_text().strip().splitlines()
    assert lines[0] == TRACE_HEADER
    rows = [ln.split(",") for ln in lines[1:]]
    assert all(len(r) == 4 for r in rows)
    times = [float(r[0]) for r in rows]
    assert times == sorted(times)


def test_solve_out_file(tmp_path, capsys, fixtures_dir):
    out = tmp_path / "report.json"
    code, stdout, _ = run_cli(
        capsys, "solve", str(fixtures_dir / "tri.gset"),
        "--seed", "1", "--t-stop", "20", "--out", str(out),
    )
    assert code == EXIT_OK and stdout == ""
    assert json.loads(out.read_text())["best_objective"] == 2.0


# --- bench -------------------------------------------------------------------------

def write_manifest(tmp_path, fixtures_dir, rows):
    lines = ["# test manifest", "path,kind,reference"]
    lines += rows
    path = tmp_path / "manifest.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_bench_oracle_verified_rows(tmp_path, capsys, fixtures_dir):
    manifest = write_manifest(
        tmp_path, fixtures_dir,
        [
            f"{fixtures_dir}/tri.gset,maxcut,2",
            f"{fixtures_dir}/path3.gset,maxcut,1",
            f"{fixtures_dir}/tri.col,coloring,115",
        ],
    )
    code, out, err = run_cli(
        capsys, "bench", str(manifest), "--t-stop", "30", "--replicas", "4", "--seed", "3"
    )
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(BENCH_COLUMNS)
    assert len(lines) == 4
    accs = [float(ln.split(",")[5]) for ln in lines[1:]]
    assert accs == [pytest.approx(100.0)] * 3
    assert "bench:" in err


def test_bench_empty_manifest(tmp_path, capsys, fixtures_dir):
    path = tmp_path / "empty.csv"
    path.write_text("# nothing here\n")
    code, out, _ = run_cli(capsys, "bench", str(path))
    assert code == EXIT_OK
    assert out.strip().splitlines() == [",".join(BENCH_COLUMNS)] or out.strip() == ",".join(BENCH_COLUMNS)


def test_bench_row_failure_recorded_and_nonzero_exit(tmp_path, capsys, fixtures_dir):
    manifest = write_manifest(
        tmp_path, fixtures_dir,
        [
            f"{fixtures_dir}/tri.gset,maxcut,2",
            f"{tmp_path}/no_such_file.gset,maxcut,1",
        ],
    )
    code, out, _ = run_cli(capsys, "bench", str(manifest), "--t-stop", "20", "--replicas", "2")
    assert code == EXIT_INPUT
    lines = out.strip().splitlines()
    assert len(lines) == 3
    good, bad = lines[1], lines[2]
    assert good.split(",")[-1] == ""
    assert bad.split(",")[-1] != ""


def test_bench_json_mode(tmp_path, capsys, fixtures_dir):
    manifest = write_manifest(tmp_path, fixtures_dir, [f"{fixtures_dir}/tri.gset,maxcut,2"])
    code, out, _ = run_cli(
        capsys, "bench", str(manifest), "--json", "--t-stop", "20", "--replicas", "2"
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert set(doc) == {"rows", "aggregate"}
    assert doc["aggregate"]["instances"] == 1
    assert doc["aggregate"]["failures"] == 0


def test_bench_per_row_params(tmp_path, capsys, fixtures_dir):
    lines = [
        "path,kind,reference,replicas,seed,t_stop",
        f"{fixtures_dir}/tri.gset,maxcut,2,3,11,25",
    ]
    path = tmp_path / "m.csv"
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(capsys, "bench", str(path))
    assert code == EXIT_OK
    row = out.strip().splitlines()[1].split(",")
    cols = dict(zip(BENCH_COLUMNS, row))
    assert cols["replicas"] == "3" and cols["seed"] == "11"


# --- sweep -------------------------------------------------------------------------

def test_sweep_grid_shape(tmp_path, capsys, fixtures_dir):
    code, out, _ = run_cli(
        capsys, "sweep", str(fixtures_dir / "tri.gset"),
        "--k-range", "0.5:1.5", "--ks-range", "0.5:2.0", "--grid", "3x3",
        "--replicas", "2", "--t-stop", "10", "--reference", "2",
    )
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == SWEEP_HEADER
    assert len(lines) == 10
    ks = [float(ln.split(",")[0]) for ln in lines[1:]]
    assert ks == sorted(ks)


def test_sweep_single_cell_matches_direct_run(capsys, fixtures_dir):
    # degenerate 1x1 grid runs exactly one solve at those params; its cell
    # value is the final-state accuracy of that same run
    code, out, _ = run_cli(
        capsys, "sweep", str(fixtures_dir / "tri.gset"),
        "--k-range", "1.0:1.0", "--ks-range", "2.0:2.0", "--grid", "1x1",
        "--replicas", "1", "--t-stop", "30", "--seed", "5", "--reference", "2",
    )
    assert code == EXIT_OK
    _, _, acc = out.strip().splitlines()[1].split(",")

    from oscim import (SolverParams, run, load_gset, build_maxcut_coupling,
                       threshold_phases, cut_value)

    g = load_gset(fixtures_dir / "tri.gset")
    params = SolverParams.tuned_for(3, seed=5, K=1.0, ks_max=2.0, t_stop=30.0)
    res = run(build_maxcut_coupling(g), params, "maxcut")
    final_cut = cut_value(g, threshold_phases(res.final_phases, 2))
    assert float(acc) == pytest.approx(100.0 * final_cut / 2.0)
    # on this locked-in run the final state is also the best state
    assert res.best_objective == final_cut


def test_sweep_locking_disabled_degrades_accuracy(capsys, fixtures_dir):
    # paired-seed comparison over 50 replicas: the ks_max=0 cell (no phase
    # locking) reads out worse cuts than the locked cell on the triangle.
    # t_stop lands mid-cycle so the locked cell finishes at peak locking.
    code, out, _ = run_cli(
        capsys, "sweep", str(fixtures_dir / "tri.gset"),
        "--k-range", "1:1", "--ks-range", "0:2", "--grid", "1x2",
        "--replicas", "50", "--t-stop", "47.5", "--ks-period", "5",
        "--kn", "0.5", "--seed", "0", "--reference", "2",
    )
    assert code == EXIT_OK
    rows = [ln.split(",") for ln in out.strip().splitlines()[1:]]
    acc = {float(ks): float(a) for _, ks, a in rows}
    assert acc[0.0] < acc[2.0]


def test_sweep_rejects_bad_ranges(capsys, fixtures_dir):
    code, _, _ = run_cli(
        capsys, "sweep", str(fixtures_dir / "tri.gset"),
        "--k-range", "2.0:1.0", "--ks-range", "0:1", "--reference", "2",
    )
    assert code == EXIT_USAGE
    code, _, _ = run_cli(
        capsys, "sweep", str(fixtures_dir / "tri.gset"),
        "--k-range", "nope", "--ks-range", "0:1", "--reference", "2",
    )
    assert code == EXIT_USAGE


def test_sweep_maxcut_requires_reference(capsys, fixtures_dir):
    code, _, _ = run_cli(
        capsys, "sweep", str(fixtures_dir / "tri.gset"),
        "--k-range", "1:1", "--ks-range", "1:1",
    )
    assert code == EXIT_USAGE


# --- scaling -----------------------------------------------------------------------

def test_scaling_rows_per_worker_mode(capsys):
    code, out, err = run_cli(
        capsys, "scaling", "--sizes", "24", "--steps", "30", "--workers", "2"
    )
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == SCALING_HEADER
    assert len(lines) == 3  # workers=1 and workers=2 rows
    rows = [ln.split(",") for ln in lines[1:]]
    assert [r[1] for r in rows] == ["1", "2"]


def test_scaling_rejects_bad_sizes(capsys):
    code, _, _ = run_cli(capsys, "scaling", "--sizes", "1,abc")
    assert code == EXIT_USAGE

"""Command-line front end: solve single instances, run benchmark suites,
sweep parameters, and time scaling runs.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 numerical
failure.  The OSCIM_MAX_WORKERS environment variable caps --workers for
every subcommand.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .dynamics import (
    NumericalError,
    resolve_workers,
    run_replica_set,
    run_replicas,
)
from .model import (
    Graph,
    SolverParams,
    coloring_conflicts,
    cut_value,
    threshold_phases,
)
from .problems import ParseError, build_maxcut_coupling, load_instance

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

TRACE_HEADER = "t,energy,ks,best_objective"
BENCH_COLUMNS = [
    "instance", "kind", "n", "best_objective", "reference", "accuracy_pct",
    "satisfied_fraction", "wall_time_s", "steps", "seed", "replicas", "error",
]
SWEEP_HEADER = "K,ks_max,accuracy"
SCALING_HEADER = "n,workers,wall_time_s"

_PARAM_FLAGS = ("K", "ks_max", "ks_period", "kn", "h", "t_stop", "batch_size")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the documented contract is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=float, default=None, help="global coupling strength")
    p.add_argument("--ks-max", type=float, default=None, help="peak locking strength")
    p.add_argument("--ks-period", type=float, default=None, help="anneal cycle length (simulated time)")
    p.add_argument("--kn", type=float, default=None, help="noise strength")
    p.add_argument("--h", type=float, default=None, help="Euler time step")
    p.add_argument("--t-stop", type=float, default=None, help="total simulated time")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--replicas", type=int, default=1, help="independent restarts, best kept")
    p.add_argument("--batch-size", type=int, default=None, help="oscillators per worker batch")
    p.add_argument("--workers", type=int, default=1, help="worker threads for the step kernel")


def _params_from_args(args, n: int, n_states: int) -> SolverParams:
    overrides = {}
    for name in _PARAM_FLAGS:
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    return SolverParams.tuned_for(n, n_states=n_states, seed=args.seed, **overrides)


def _instance_from_args(args):
    kind = args.problem
    if kind == "maxcut" and args.colors is not None:
        raise UsageError("--colors is only valid with --problem coloring")
    n_states = args.colors if kind == "coloring" else 2
    return load_instance(args.path, kind, n_states)


def _report(inst, params, result, replicas: int, workers: int, reference: Optional[float]):
    if inst.kind == "coloring":
        conflicts, satisfied = coloring_conflicts(inst.graph, result.best_assignment)
        accuracy = 100.0 * satisfied if reference is not None else None
    else:
        satisfied = None
        accuracy = 100.0 * result.best_objective / reference if reference is not None else None
    return {
        "instance": inst.source_name,
        "problem": inst.kind,
        "n": inst.graph.node_count,
        "edges": inst.graph.edge_count,
        "params": {
            "K": params.K,
            "ks_max": params.ks_max,
            "ks_period": params.ks_period,
            "kn": params.kn,
            "h": params.h,
            "t_stop": params.t_stop,
            "n_states": params.n_states,
            "seed": params.seed,
            "batch_size": params.batch_size,
        },
        "replicas": replicas,
        "workers": workers,
        "best_objective": result.best_objective,
        "satisfied_fraction": satisfied,
        "reference": reference,
        "accuracy_pct": accuracy,
        "wall_time_s": result.wall_time,
        "steps": result.steps_executed,
        "seed": params.seed,
    }


def _write_trace(path: str, result) -> None:
    lines = [TRACE_HEADER]
    for (t, energy, ks), best in zip(result.energy_trace, result.best_trace):
        lines.append(f"{t!r},{energy!r},{ks!r},{best!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    inst = _instance_from_args(args)
    params = _params_from_args(args, inst.graph.node_count, inst.n_states)
    workers = resolve_workers(args.workers)
    result = run_replicas(inst.coupling(), params, inst.kind,
                          replicas=args.replicas, workers=workers)
    report = _report(inst, params, result, args.replicas, workers, args.reference)
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    if args.trace:
        _write_trace(args.trace, result)
    return EXIT_OK


def _read_manifest(path: str) -> List[dict]:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return []
    reader = csv.DictReader(io.StringIO("\n".join(lines)))
    required = {"path", "kind", "reference"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ParseError(f"manifest must have columns path,kind,reference (got {reader.fieldnames})")
    return list(reader)


def _row_value(row: dict, key: str, cast, default=None):
    val = row.get(key)
    if val is None or str(val).strip() == "":
        return default
    return cast(val)


def cmd_bench(args) -> int:
    rows = _read_manifest(args.manifest)
    base = Path(args.manifest).parent
    out_rows = []
    failures = 0
    numeric_failure = False
    accuracies = []
    total_time = 0.0
    for row in rows:
        rec = dict.fromkeys(BENCH_COLUMNS, "")
        inst_path = Path(row["path"])
        if not inst_path.is_absolute():
            inst_path = base / inst_path
        rec["instance"] = inst_path.name
        try:
            kind = row["kind"].strip()
            if kind not in ("maxcut", "coloring"):
                raise ParseError(f"unknown kind {kind!r} in manifest")
            colors = _row_value(row, "colors", int, 3)
            inst = load_instance(inst_path, kind, colors if kind == "coloring" else 2)
            overrides = {}
            for name in _PARAM_FLAGS:
                flag = getattr(args, name, None)
                val = _row_value(row, name, float if name != "batch_size" else int, flag)
                if val is not None:
                    overrides[name] = val
            if "batch_size" in overrides:
                overrides["batch_size"] = int(overrides["batch_size"])
            seed = _row_value(row, "seed", int, args.seed)
            replicas = _row_value(row, "replicas", int, args.replicas)
            reference = _row_value(row, "reference", float, None)
            params = SolverParams.tuned_for(
                inst.graph.node_count, n_states=inst.n_states, seed=seed, **overrides
            )
            workers = resolve_workers(args.workers)
            result = run_replicas(inst.coupling(), params, inst.kind,
                                  replicas=replicas, workers=workers)
            report = _report(inst, params, result, replicas, workers, reference)
            rec.update(
                kind=inst.kind,
                n=inst.graph.node_count,
                best_objective=report["best_objective"],
                reference="" if reference is None else reference,
                accuracy_pct="" if report["accuracy_pct"] is None else report["accuracy_pct"],
                satisfied_fraction="" if report["satisfied_fraction"] is None else report["satisfied_fraction"],
                wall_time_s=report["wall_time_s"],
                steps=report["steps"],
                seed=seed,
                replicas=replicas,
            )
            if report["accuracy_pct"] is not None:
                accuracies.append(report["accuracy_pct"])
            total_time += report["wall_time_s"]
        except NumericalError as exc:
            rec["error"] = str(exc)
            failures += 1
            numeric_failure = True
        except (ParseError, OSError, ValueError) as exc:
            rec["error"] = str(exc)
            failures += 1
        out_rows.append(rec)

    aggregate = {
        "instances": len(out_rows),
        "failures": failures,
        "min_accuracy_pct": min(accuracies) if accuracies else None,
        "mean_accuracy_pct": float(np.mean(accuracies)) if accuracies else None,
        "total_wall_time_s": total_time,
    }
    if args.json:
        _emit(json.dumps({"rows": out_rows, "aggregate": aggregate},
                         indent=2, sort_keys=True) + "\n", args.out)
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(out_rows)
        _emit(buf.getvalue(), args.out)
        print(f"bench: {aggregate['instances']} instances, {failures} failures, "
              f"min acc {aggregate['min_accuracy_pct']}, "
              f"mean acc {aggregate['mean_accuracy_pct']}, "
              f"total {total_time:.2f}s", file=sys.stderr)
    if numeric_failure:
        return EXIT_NUMERIC
    return EXIT_INPUT if failures else EXIT_OK


def _parse_range(raw: str, what: str):
    parts = raw.split(":")
    if len(parts) != 2:
        raise UsageError(f"{what} must look like LO:HI, got {raw!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"non-numeric {what}: {raw!r}") from None
    if hi < lo:
        raise UsageError(f"empty {what}: {raw!r}")
    return lo, hi


def _grid_points(lo: float, hi: float, count: int) -> List[float]:
    if count < 1:
        raise UsageError("grid steps must be >= 1")
    if count == 1:
        return [lo]
    return [float(x) for x in np.linspace(lo, hi, count)]


def cmd_sweep(args) -> int:
    inst = _instance_from_args(args)
    if inst.kind == "maxcut" and args.reference is None:
        raise UsageError("sweep over maxcut requires --reference for the accuracy axis")
    k_lo, k_hi = _parse_range(args.k_range, "--k-range")
    s_lo, s_hi = _parse_range(args.ks_range, "--ks-range")
    gp = args.grid.lower().split("x")
    if len(gp) != 2:
        raise UsageError(f"--grid must look like RxC, got {args.grid!r}")
    try:
        rows_n, cols_n = int(gp[0]), int(gp[1])
    except ValueError:
        raise UsageError(f"--grid must be integers, got {args.grid!r}") from None
    workers = resolve_workers(args.workers)
    lines = [SWEEP_HEADER]
    for K in _grid_points(k_lo, k_hi, rows_n):
        for ks_max in _grid_points(s_lo, s_hi, cols_n):
            overrides = {"K": K}
            for name in ("ks_period", "kn", "h", "t_stop", "batch_size"):
                val = getattr(args, name, None)
                if val is not None:
                    overrides[name] = val
            params = SolverParams.tuned_for(
                inst.graph.node_count, n_states=inst.n_states,
                seed=args.seed, ks_max=ks_max, **overrides,
            )
            # fixed base seed per cell: replica r sees the same stream in every
            # cell.  Accuracy scores the FINAL thresholded state, not the
            # best-of harvest, so the heat map reflects how well each (K,
            # ks_max) pair actually locks the dynamics in.
            results = run_replica_set(inst.coupling(), params, inst.kind,
                                      replicas=args.replicas, workers=workers)
            acc = []
            for r in results:
                s = threshold_phases(r.final_phases, params.n_states)
                if inst.kind == "maxcut":
                    acc.append(100.0 * cut_value(inst.graph, s) / args.reference)
                else:
                    acc.append(100.0 * coloring_conflicts(inst.graph, s)[1])
            lines.append(f"{K!r},{ks_max!r},{float(np.mean(acc))!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _dense_instance(n: int, seed: int) -> Graph:
    """Complete graph with random unit-magnitude signed weights."""
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    w = rng.choice([-1.0, 1.0], size=len(iu))
    return Graph(n, iu.astype(np.int64), iv.astype(np.int64), w)


def cmd_scaling(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be a comma list of integers, got {args.sizes!r}") from None
    if not sizes or any(s < 2 for s in sizes):
        raise UsageError("--sizes needs integers >= 2")
    steps = args.steps
    if steps < 1:
        raise UsageError("--steps must be >= 1")
    multi = resolve_workers(args.workers)
    h = 0.01
    lines = [SCALING_HEADER]
    for n in sizes:
        g = _dense_instance(n, seed=n)
        J = build_maxcut_coupling(g)
        # t_stop chosen so ceil(t_stop/h) lands exactly on the step budget
        params = SolverParams.tuned_for(n, seed=args.seed, h=h, t_stop=(steps - 0.5) * h,
                                        ks_period=max(steps * h / 2, 2 * h))
        for workers in dict.fromkeys([1, multi]):
            result = run_replicas(J, params, "maxcut", replicas=1, workers=workers)
            lines.append(f"{n},{workers},{result.wall_time!r}")
            print(f"scaling: n={n} workers={workers} steps={result.steps_executed} "
                  f"wall={result.wall_time:.3f}s", file=sys.stderr)
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oscim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", parents=[], help="solve one instance, print a JSON report")
    ps.add_argument("path", help="instance file (GSET layout, or DIMACS .col)")
    ps.add_argument("--problem", choices=("maxcut", "coloring"), default="maxcut")
    ps.add_argument("--colors", type=int, default=None, help="number of colors (coloring only)")
    _add_solver_flags(ps)
    ps.add_argument("--reference", type=float, default=None, help="best-known objective for accuracy")
    ps.add_argument("--trace", default=None, metavar="PATH", help="write energy trace CSV")
    ps.add_argument("--out", default=None, metavar="PATH", help="write report JSON here instead of stdout")
    ps.set_defaults(func=cmd_solve)

    pb = sub.add_parser("bench", help="run a manifest of instances, emit a CSV/JSON table")
    pb.add_argument("manifest", help="CSV manifest: path,kind,reference[,colors,replicas,seed,...]")
    _add_solver_flags(pb)
    pb.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    pb.add_argument("--out", default=None, metavar="PATH")
    pb.set_defaults(func=cmd_bench)

    pw = sub.add_parser("sweep", help="grid sweep over K and ks_max, emit accuracy heat-map CSV")
    pw.add_argument("path")
    pw.add_argument("--problem", choices=("maxcut", "coloring"), default="maxcut")
    pw.add_argument("--colors", type=int, default=None)
    pw.add_argument("--k-range", required=True, metavar="LO:HI")
    pw.add_argument("--ks-range", required=True, metavar="LO:HI")
    pw.add_argument("--grid", default="5x5", metavar="RxC")
    pw.add_argument("--kn", type=float, default=None)
    pw.add_argument("--ks-period", type=float, default=None)
    pw.add_argument("--h", type=float, default=None)
    pw.add_argument("--t-stop", type=float, default=None)
    pw.add_argument("--batch-size", type=int, default=None)
    pw.add_argument("--seed", type=int, default=0)
    pw.add_argument("--replicas", type=int, default=8)
    pw.add_argument("--workers", type=int, default=1)
    pw.add_argument("--reference", type=float, default=None)
    pw.add_argument("--out", default=None, metavar="PATH")
    pw.set_defaults(func=cmd_sweep)

    pc = sub.add_parser("scaling", help="time dense random instances at a fixed step count")
    pc.add_argument("--sizes", required=True, help="comma list of node counts")
    pc.add_argument("--steps", type=int, default=60, help="integration steps per run")
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--workers", type=int, default=4, help="multi-worker mode thread count")
    pc.add_argument("--out", default=None, metavar="PATH")
    pc.set_defaults(func=cmd_scaling)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # _Parser.error or --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"oscim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"oscim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ParseError as exc:
        print(f"oscim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:  # invalid parameter combinations
        print(f"oscim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"oscim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

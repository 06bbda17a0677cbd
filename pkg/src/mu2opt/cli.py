"""Command-line entry point: run, sweep, analyze, list-problems.

A thin sequential shell over the harness.  Exit codes: 0 success, 2
configuration error, 3 diverged run with artifacts still written.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as cfgmod
from . import harness
from .errors import ConfigurationError, IngestionError, NumericError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mu2opt",
                                description="Stochastic convex optimization experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("config", help="TOML configuration file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry (repeatable)")
        sp.add_argument("--seed", type=int, default=None,
                        help="master seed (overrides the run table's seeds)")
        sp.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: MU2OPT_WORKERS or 1)")

    common(sub.add_parser("run", help="execute a single (algo, lr, seed) run"))
    common(sub.add_parser("sweep", help="execute the full config grid"))

    an = sub.add_parser("analyze", help="recompute the sweep summary from a results CSV")
    an.add_argument("results", help="results.csv written by a sweep")
    an.add_argument("--out", default=".", help="output directory")
    an.add_argument("--factor", type=float, default=2.0,
                    help="stability threshold factor (default 2)")

    sub.add_parser("list-problems", help="print registered problem kinds")
    return p


def _load_grid(args) -> tuple[dict, harness.SweepGrid]:
    cfg = cfgmod.load_config(args.config)
    cfgmod.apply_overrides(cfg, args.overrides)
    if args.seed is not None:
        cfg.setdefault("run", {})["seeds"] = [args.seed]
    if args.workers is not None:
        cfg.setdefault("run", {})["workers"] = args.workers
    return cfg, cfgmod.build_grid(cfg)


def _provenance(args, cfg: dict, grid: harness.SweepGrid) -> dict:
    return {
        "config_path": str(args.config),
        "overrides": list(args.overrides),
        "seeds": grid.seeds,
        "config": _jsonable(cfg),
    }


def _jsonable(node):
    if isinstance(node, dict):
        return {k: _jsonable(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_jsonable(v) for v in node]
    if isinstance(node, (str, int, float, bool)) or node is None:
        return node
    return repr(node)


def _ensure_out(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise ConfigurationError(f"output directory {path!r} is not writable: {exc}")
    return out


def cmd_run(args) -> int:
    cfg, grid = _load_grid(args)
    if len(grid.algorithms) != 1 or len(grid.learning_rates) != 1 or len(grid.seeds) != 1:
        raise ConfigurationError(
            "run needs exactly one algorithm, one learning rate and one seed "
            f"(got {len(grid.algorithms)} x {len(grid.learning_rates)} x {len(grid.seeds)}); "
            "use sweep for grids")
    out = _ensure_out(args.out)
    records = harness.sweep(grid)
    record = records[0]
    harness.write_results_csv(records, out / "trajectory.csv")
    summary = {
        "algo": record.algorithm,
        "lr": record.lr,
        "seed": record.seed,
        "T": grid.T,
        "diverged": record.diverged,
        "final_f_gap": _json_float(record.final_f_gap),
        "samples_total": record.samples_total,
        "wall_time_s": record.wall_time,
        "gap_point": record.trajectory.gap_point,
        "provenance": _provenance(args, cfg, grid),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if args.verbose or record.diverged:
        print(f"{record.algorithm} lr={record.lr:g} seed={record.seed} "
              f"final_f_gap={record.final_f_gap:g} diverged={record.diverged}")
    return EXIT_DIVERGED if record.diverged else EXIT_OK


def cmd_sweep(args) -> int:
    cfg, grid = _load_grid(args)
    out = _ensure_out(args.out)
    records = harness.sweep(grid)
    harness.write_results_csv(records, out / "results.csv")
    rows = harness.read_results_csv(out / "results.csv")
    summary = harness.summarize_rows(rows)
    summary["provenance"] = _provenance(args, cfg, grid)
    (out / "sweep_summary.json").write_text(_dump_summary(summary))
    if args.verbose:
        n_div = sum(1 for r in records if r.diverged)
        print(f"{len(records)} runs, {n_div} diverged -> {out / 'results.csv'}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    rows = harness.read_results_csv(args.results)
    if not rows:
        raise ConfigurationError(f"{args.results}: no data rows")
    out = _ensure_out(args.out)
    summary = harness.summarize_rows(rows, factor=args.factor)
    (out / "sweep_summary.json").write_text(_dump_summary(summary))
    return EXIT_OK


def cmd_list_problems(args) -> int:
    for kind, info in cfgmod.PROBLEM_KINDS.items():
        print(f"{kind}")
        print(f"  params:    {info['params']}")
        print(f"  constants: {info['constants']}")
    return EXIT_OK


def _json_float(v: float):
    import math
    if math.isfinite(v):
        return v
    return repr(v)


def _dump_summary(summary: dict) -> str:
    def clean(node):
        if isinstance(node, dict):
            return {k: clean(v) for k, v in node.items()}
        if isinstance(node, list):
            return [clean(v) for v in node]
        if isinstance(node, float):
            return _json_float(node)
        return node
    return json.dumps(clean(summary), indent=2) + "\n"


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "sweep": cmd_sweep,
        "analyze": cmd_analyze,
        "list-problems": cmd_list_problems,
    }
    try:
        return handlers[args.subcommand](args)
    except (ConfigurationError, IngestionError, NumericError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

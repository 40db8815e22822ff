"""spanprof command line: calibrate / analyze / report / bench.

Exit codes: 0 success, 1 usage error, 2 malformed input, 3 I/O failure.
Diagnostics go to stderr; machine-readable output goes to files or stdout.
Every flag has an environment-variable mirror (SPANPROF_<FLAG>, dashes as
underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import codec
from .analysis import correlation  # noqa: F401  (re-exported for scripts)
from .bench import WorkloadSpec, calibrate_work, run_accuracy_experiment, \
    run_workload
from .calibration import CalibrationConfig, run_calibration
from .costmodel import CostModel
from .cycles import make_cycle_source
from .errors import (DuplicatePrimordial, IoFailure, MalformedTrace,
                     MixedSourceError, SpanprofError)
from .reconstruction import load_application_profile
from .report import (build_report, read_report, recompute_cv, write_heatmap_csv,
                     write_heatmap_svg, write_report)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MALFORMED = 2
EXIT_IO = 3

ENV_PREFIX = "SPANPROF_"


def _env(flag: str):
    return os.environ.get(ENV_PREFIX + flag.replace("-", "_").upper())


class _Parser(argparse.ArgumentParser):
    """argparse with env-var defaults and usage errors on stderr (exit 1)."""

    def add_argument(self, *args, **kwargs):  # noqa: D102
        for name in args:
            if name.startswith("--"):
                value = _env(name[2:])
                if value is not None:
                    if kwargs.get("action") == "store_true":
                        kwargs["default"] = value not in ("", "0", "false")
                    else:
                        kwargs["default"] = value
                    kwargs.pop("required", None)
                break
        return super().add_argument(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_source_flags(parser):
    parser.add_argument("--cycle-source", default="auto",
                        choices=["auto", "thread-cycles", "monotonic", "fake"],
                        help="cycle counter backend (fake is deterministic)")
    parser.add_argument("--fake-step", type=int, default=100,
                        help="tick increment per read for the fake source")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized harness paths")


def build_parser() -> _Parser:
    parser = _Parser(prog="spanprof",
                     description="Cycle-accurate pipeline/stream profiler")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    cal = sub.add_parser("calibrate", help="estimate instrumentation costs")
    cal.add_argument("--pairs", type=int, default=100_000,
                     help="span pairs per cost (full-scale setting: 1e7)")
    cal.add_argument("--out", required=True, help="cost model JSON path")
    cal.add_argument("--serialized-reads", action="store_true", default=True)
    cal.add_argument("--no-serialized-reads", dest="serialized_reads",
                     action="store_false")
    cal.add_argument("--kind", default="all",
                     choices=["anon", "prim", "supp", "all"])
    _add_source_flags(cal)

    ana = sub.add_parser("analyze", help="reconstruct traces into a report")
    ana.add_argument("--traces", required=True, help="trace directory")
    ana.add_argument("--locations", default=None,
                     help="location mapping file (default: TRACES/locations.tsv)")
    ana.add_argument("--costs", required=True, help="cost model JSON")
    ana.add_argument("--out", required=True, help="report JSON path")
    ana.add_argument("--pool-size", type=int, default=None)

    rep = sub.add_parser("report", help="render a report")
    rep.add_argument("--in", dest="input", required=True, help="report JSON")
    rep.add_argument("--heatmap", default=None, help="heatmap CSV path")
    rep.add_argument("--svg", default=None, help="heatmap SVG path")
    rep.add_argument("--hot-locations", type=int, default=10)
    rep.add_argument("--pool-size", type=int, default=None)

    ben = sub.add_parser("bench", help="run a synthetic workload")
    ben.add_argument("--workload", default="synthetic")
    ben.add_argument("--mode", default="seq", choices=["seq", "par", "mixed"])
    ben.add_argument("--spans", type=int, default=100)
    ben.add_argument("--depth", type=int, default=1)
    ben.add_argument("--skew", type=float, default=None)
    ben.add_argument("--workers", type=int, default=4)
    ben.add_argument("--work", type=int, default=100,
                     help="busy-loop iterations per span")
    ben.add_argument("--target-cps", type=float, default=None,
                     help="derive --work from a target cycles-per-span")
    ben.add_argument("--nesting", default="flat",
                     choices=["flat", "deep_recursive", "flatmap_style"])
    ben.add_argument("--warmup", type=int, default=5)
    ben.add_argument("--iterations", type=int, default=20)
    ben.add_argument("--profile", action="store_true")
    ben.add_argument("--costs", default=None, help="cost model JSON")
    ben.add_argument("--accuracy", action="store_true")
    ben.add_argument("--runs", type=int, default=10)
    ben.add_argument("--out", required=True, help="output directory")
    _add_source_flags(ben)
    return parser


def _cmd_calibrate(args) -> int:
    source = make_cycle_source(args.cycle_source,
                               serialized_reads=args.serialized_reads,
                               fake_step=args.fake_step)
    config = CalibrationConfig(pairs_per_cost=int(args.pairs),
                               serialized_reads=args.serialized_reads)
    kinds = ("anon", "prim", "supp") if args.kind == "all" else (args.kind,)
    import tempfile
    with tempfile.TemporaryDirectory(prefix="spanprof-cal-") as tmp:
        model = run_calibration(source, tmp, config, kinds)
    model.write(args.out)
    for warning in model.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if args.verbose:
        print(f"calibration written to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    trace_dir = args.traces
    try:
        entries = sorted(os.listdir(trace_dir))
    except OSError as exc:
        raise IoFailure(f"cannot list trace directory {trace_dir}: {exc}")
    paths = [os.path.join(trace_dir, p) for p in entries
             if p.endswith(".trace")]
    if not paths:
        raise MalformedTrace("Truncated", "no trace files found", trace_dir)
    location_path = args.locations or os.path.join(trace_dir, "locations.tsv")
    names = codec.read_location_file(location_path)
    model = CostModel.read(args.costs)
    profile = load_application_profile(paths)
    if profile.source is not None:
        model.check_source(profile.source)
    pool_size = int(args.pool_size) if args.pool_size is not None else None
    report = build_report(profile, model, names, pool_size)
    write_report(report, args.out)
    if args.verbose:
        print(f"report written to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_report(args) -> int:
    report = read_report(args.input)
    if args.heatmap:
        write_heatmap_csv(report, args.heatmap)
    if args.svg:
        write_heatmap_svg(report, args.svg)
    pool_size = int(args.pool_size) if args.pool_size is not None else None
    k = int(args.hot_locations)
    lines = {
        "tick_based": report.get("tick_based"),
        "totals": report["totals"],
        "hot_locations": report["locations"][:k],
    }
    balance = report.get("load_balance")
    if balance is not None:
        lines["load_balance"] = {
            "cv": recompute_cv(report, pool_size),
            "task_count": balance["task_count"],
            "workers_observed": len(balance["per_worker_cycles"]),
            "pool_size": pool_size or balance.get("pool_size"),
        }
    json.dump(lines, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.seed is not None:
        random.seed(int(args.seed))
    source = make_cycle_source(args.cycle_source, fake_step=args.fake_step)
    mode = {"seq": "sequential", "par": "parallel", "mixed": "mixed"}[args.mode]
    work = int(args.work)
    if args.target_cps is not None:
        work = calibrate_work(source, float(args.target_cps))
    spec = WorkloadSpec(
        name=args.workload, mode=mode, span_count=int(args.spans),
        nesting_profile=args.nesting, depth=int(args.depth),
        work_per_span=work,
        imbalance=float(args.skew) if args.skew is not None else None,
        workers=int(args.workers),
        target_cps=float(args.target_cps) if args.target_cps else None,
    )
    os.makedirs(args.out, exist_ok=True)
    summary: dict = {"workload": spec.name, "mode": mode,
                     "span_count": spec.span_count,
                     "work_per_span": spec.work_per_span}
    if args.accuracy:
        if not args.costs:
            print("error: --accuracy requires --costs", file=sys.stderr)
            return EXIT_USAGE
        model = CostModel.read(args.costs)
        record = run_accuracy_experiment(spec, int(args.runs), source, model,
                                         args.out, warmup=int(args.warmup))
        summary["accuracy"] = {
            "baseline_cycles": record.baseline_cycles,
            "compensated_cycles": record.compensated_cycles,
            "accuracy": record.accuracy,
            "cps": record.cps,
            "overhead_factor": record.overhead_factor,
            **record.extras,
        }
    else:
        result = run_workload(spec, args.profile, int(args.warmup),
                              int(args.iterations), source, args.out)
        summary["timings_s"] = result.timings
        if args.profile:
            summary["trace_dirs"] = [os.path.relpath(d, args.out)
                                     for d in result.trace_dirs]
        else:
            summary["baseline_totals"] = result.baseline_totals
    with open(os.path.join(args.out, "bench.json"), "w",
              encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.verbose:
        print(f"bench output in {args.out}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (MalformedTrace, MixedSourceError, DuplicatePrimordial) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpanprofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

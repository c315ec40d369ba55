"""Command-line front end.

Subcommands: generate | bounds | decompose | diagnose | bench.
Global flags: --seed, --output-dir, --keep-history, --timings.

Exit codes: 0 converged/ok, 2 stalled, 3 max_iters, 64 usage error,
65 data error.  Output files are byte-reproducible for identical seed and
configuration unless --timings is given (it puts measured wall times in the
trace file).
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .centroid import centroid_init, per_mode_bounds
from .diagnostics import swamp_report
from .generate import GeneratorSpec, generate
from .reduced import objective
from .solve import SolverConfig, decompose

EXIT_OK = 0
EXIT_STALLED = 2
EXIT_MAX_ITERS = 3
EXIT_USAGE = 64
EXIT_DATA = 65

_STATUS_CODES = {"converged": EXIT_OK, "stalled": EXIT_STALLED,
                 "max_iters": EXIT_MAX_ITERS}

_CONFIG_TYPES = {
    "rank": int, "method": str, "init": str, "max_iters": int,
    "tol_residual": float, "tol_stall": float, "rals_alpha0": float,
    "rals_decay": float, "rals_alpha_floor": float, "ls_interval": int,
    "symmetric": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "seed": int,
}


def load_config(path):
    """Read a key=value file with SolverConfig keys."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_TYPES:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](val)
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: bad value {val!r} for {key}") from None
    return values


def _parse_dims(text):
    parts = text.replace("x", ",").split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"dims must be I,J,K, got {text!r}")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be integers, got {text!r}")
    return dims


def _parse_list(text):
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cpkit",
        description="CP decomposition of dense third-order tensors.")
    parser.add_argument("--seed", type=int, default=0,
                        help="base seed for all randomness (default 0)")
    parser.add_argument("--output-dir", default=".",
                        help="directory for output files (default .)")
    parser.add_argument("--keep-history", action="store_true",
                        help="decompose: also write per-iteration factors")
    parser.add_argument("--timings", action="store_true",
                        help="record measured wall times in trace files "
                             "(breaks byte-reproducibility)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic tensor")
    p.add_argument("--kind", required=True,
                   choices=("random_factors", "swampy", "symmetric",
                            "diagonal", "noisy"))
    p.add_argument("--dims", required=True, type=_parse_dims)
    p.add_argument("--rank", required=True, type=int)
    p.add_argument("--collinearity", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--tensor-out", default="tensor.txt")
    p.add_argument("--factors-out", default="factors_true.txt")

    p = sub.add_parser("bounds", help="residual bounds for one tensor")
    p.add_argument("tensor")
    p.add_argument("--rank", required=True, type=int)
    p.add_argument("--report-out", default="bounds.json")

    p = sub.add_parser("decompose", help="run one solver configuration")
    p.add_argument("tensor")
    p.add_argument("--config", help="key=value file with SolverConfig keys")
    p.add_argument("--rank", type=int)
    p.add_argument("--method", choices=("als", "rals", "lsals"))
    p.add_argument("--init", choices=("random", "centroid",
                                      "centroid_symmetric"))
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol-residual", type=float)
    p.add_argument("--tol-stall", type=float)
    p.add_argument("--rals-alpha0", type=float)
    p.add_argument("--rals-decay", type=float)
    p.add_argument("--rals-alpha-floor", type=float)
    p.add_argument("--ls-interval", type=int)
    p.add_argument("--symmetric", action=argparse.BooleanOptionalAction)
    p.add_argument("--factors-out", default="factors.txt")
    p.add_argument("--trace-out", default="trace.jsonl")
    p.add_argument("--history-out", default="history.jsonl")

    p = sub.add_parser("diagnose", help="swamp metrics for a run history")
    p.add_argument("tensor")
    p.add_argument("--history", required=True)
    p.add_argument("--trace", help="trace file; enables stall flags")
    p.add_argument("--reference", help="factors file to measure drift against")
    p.add_argument("--stall-tol", type=float, default=1e-12)
    p.add_argument("--probes", type=int, default=1)
    p.add_argument("--report-out", default="swamp_report.jsonl")

    p = sub.add_parser("bench", help="method x init comparison table")
    p.add_argument("--tensor", help="tensor file (otherwise use a generator)")
    p.add_argument("--kind", choices=("random_factors", "swampy", "symmetric",
                                      "diagonal", "noisy"))
    p.add_argument("--dims", type=_parse_dims)
    p.add_argument("--rank", required=True, type=int)
    p.add_argument("--collinearity", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--methods", type=_parse_list, default=("als",))
    p.add_argument("--inits", type=_parse_list, default=("random", "centroid"))
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--target", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol-stall", type=float, default=1e-12)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--summary-out", default="summary.jsonl")
    return parser


def _outdir(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args):
    spec = GeneratorSpec(kind=args.kind, dims=args.dims, rank=args.rank,
                         seed=args.seed, collinearity=args.collinearity,
                         noise=args.noise)
    T, factors = generate(spec)
    out = _outdir(args)
    io.write_tensor(out / args.tensor_out, T)
    if factors is not None:
        io.write_factors(out / args.factors_out, factors)
    print(f"wrote {out / args.tensor_out}")
    return EXIT_OK


def cmd_bounds(args):
    T = io.read_tensor(args.tensor)
    bundle = centroid_init(T, args.rank)
    record = {
        "rank": args.rank,
        "mode_assignment": bundle.mode_assignment,
        "lower_bound": bundle.lower_bound,
        "upper_bound": bundle.upper_bound,
        "gap_bound": bundle.gap_bound,
        "centroid_norm": float(np.linalg.norm(bundle.centroid)),
        "lambda_sum": bundle.lambda_sum,
        "init_objective": objective(T, bundle.init_factors),
        "per_mode": per_mode_bounds(T, args.rank),
    }
    out = _outdir(args)
    io.write_json(out / args.report_out, record)
    print(io.json_dumps(record))
    return EXIT_OK


def _solver_config(args):
    values = {}
    if args.config:
        values.update(load_config(args.config))
    overrides = {
        "rank": args.rank, "method": args.method, "init": args.init,
        "max_iters": args.max_iters, "tol_residual": args.tol_residual,
        "tol_stall": args.tol_stall, "rals_alpha0": args.rals_alpha0,
        "rals_decay": args.rals_decay,
        "rals_alpha_floor": args.rals_alpha_floor,
        "ls_interval": args.ls_interval, "symmetric": args.symmetric,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    values.setdefault("seed", args.seed)
    if "rank" not in values:
        raise ValueError("rank must be given via --rank or the config file")
    return SolverConfig(**values)


def cmd_decompose(args):
    T = io.read_tensor(args.tensor)
    cfg = _solver_config(args)
    factors, trace, status = decompose(T, cfg, keep_history=args.keep_history)
    out = _outdir(args)
    io.write_factors(out / args.factors_out, factors)
    io.write_trace(out / args.trace_out, trace, timings=args.timings)
    if args.keep_history:
        io.write_history(out / args.history_out, trace.history)
    final = trace.records[-1].objective if trace.records else float("nan")
    print(f"status={status} iterations={len(trace)} objective={final:.6e}")
    return _STATUS_CODES[status]


def cmd_diagnose(args):
    T = io.read_tensor(args.tensor)
    history = io.read_history(args.history)
    if not history:
        raise ValueError(f"{args.history}: empty history")
    if history[0].dims != T.shape:
        raise ValueError(
            f"history dims {history[0].dims} do not match tensor {T.shape}")
    objectives = None
    if args.trace:
        trace = io.read_trace(args.trace)
        objectives = trace.objectives()
        if objectives.size != len(history):
            raise ValueError("trace and history lengths differ")
    reference = io.read_factors(args.reference) if args.reference else None
    report = swamp_report(history, objectives=objectives,
                          stall_tol=args.stall_tol, reference=reference,
                          probe_seed=args.seed, n_probes=args.probes)
    rows = []
    for k in range(report.proj_distance.shape[0]):
        row = {
            "iter": k + 1,
            "proj_distance": report.proj_distance[k],
            "condition": report.condition[k],
        }
        if report.reference_distance is not None:
            row["reference_distance"] = report.reference_distance[k]
        if report.stall_flags is not None:
            row["stalled"] = bool(report.stall_flags[k + 1])
        rows.append(row)
    out = _outdir(args)
    io.write_jsonl(out / args.report_out, rows)
    print(f"wrote {out / args.report_out} ({len(rows)} rows)")
    return EXIT_OK


def _bench_tensor(args, rep):
    if args.tensor:
        return io.read_tensor(args.tensor)
    if not args.kind or not args.dims:
        raise ValueError("bench needs --tensor or both --kind and --dims")
    spec = GeneratorSpec(kind=args.kind, dims=args.dims, rank=args.rank,
                         seed=args.seed + rep, collinearity=args.collinearity,
                         noise=args.noise)
    return generate(spec)[0]


def cmd_bench(args):
    if args.reps < 1:
        raise ValueError("--reps must be >= 1")
    rows = []
    for method in args.methods:
        for init in args.inits:
            iters_to_target = []
            finals = []
            reached = 0
            for rep in range(args.reps):
                T = _bench_tensor(args, rep)
                # offset decouples the init stream from the generator stream
                cfg = SolverConfig(
                    rank=args.rank, method=method, init=init,
                    max_iters=args.max_iters, tol_stall=args.tol_stall,
                    symmetric=args.symmetric,
                    seed=args.seed + 100003 + rep)
                _, trace, _ = decompose(T, cfg)
                obj = trace.objectives()
                hits = np.nonzero(obj < args.target)[0]
                if hits.size:
                    reached += 1
                    iters_to_target.append(int(hits[0]) + 1)
                else:
                    iters_to_target.append(args.max_iters)  # censored
                finals.append(float(obj[-1]))
            iters = np.array(iters_to_target, dtype=float)
            finals_arr = np.array(finals)
            q25, q75 = np.percentile(iters, [25, 75])
            rows.append({
                "method": method,
                "init": init,
                "reps": args.reps,
                "target": args.target,
                "n_reached": reached,
                "iters_median": float(np.median(iters)),
                "iters_iqr": float(q75 - q25),
                "resid_median": float(np.median(finals_arr)),
                "resid_iqr": float(np.percentile(finals_arr, 75)
                                   - np.percentile(finals_arr, 25)),
            })
    out = _outdir(args)
    io.write_jsonl(out / args.summary_out, rows)
    header = (f"{'method':8s} {'init':20s} {'reached':>7s} "
              f"{'med iters':>9s} {'iqr':>7s} {'med resid':>10s}")
    print(header)
    for row in rows:
        print(f"{row['method']:8s} {row['init']:20s} "
              f"{row['n_reached']:4d}/{row['reps']:<2d} "
              f"{row['iters_median']:9.1f} {row['iters_iqr']:7.1f} "
              f"{row['resid_median']:10.3e}")
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "bounds": cmd_bounds,
    "decompose": cmd_decompose,
    "diagnose": cmd_diagnose,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; remap per our contract
        raise SystemExit(EXIT_USAGE if exc.code == 2 else exc.code)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"cpkit: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: calibrate (divergence -> contamination parameters), simulate
(emit a labeled stream as CSV), run (full experiment producing
trajectories.csv / detections.csv / summary.txt / snapshots), bench (timing
table incl. backend comparison), resume (continue an estimator from a
snapshot on new data).
"""

import argparse
import json
import os
import sys

from . import backend
from .baseline import SampleCovEstimator
from .bench import TIMING_COLUMNS, micro_rows, time_pipeline, time_pipeline_subprocess
from .experiment import (build_config, load_config_file, load_rows,
                         run_experiment, write_csv)
from .metrics import DETECTION_COLUMNS
from .robust import RobustEstimator
from .rng import RngStream
from .simulate import ScenarioParams, calibrate, sample_stream, scenario


def _fmt(x):
    return repr(float(x))


# --- calibrate ---------------------------------------------------------------


def cmd_calibrate(args):
    rows = []
    for target in args.kl:
        k = calibrate(target, "k", d=args.d)
        l = calibrate(target, "l", d=args.d)
        rho1 = calibrate(target, "rho1", d=args.d)
        rows.append((target, k, l, rho1))
    header = f"{'kl':>10} {'k':>12} {'l':>14} {'rho1':>10}"
    print(header)
    for target, k, l, rho1 in rows:
        print(f"{target:>10.4g} {k:>12.6f} {l:>14.6f} {rho1:>10.6f}")
    if args.out:
        write_csv(args.out, ("kl", "k", "l", "rho1"), rows)
    return 0


# --- simulate ---------------------------------------------------------------


def cmd_simulate(args):
    params = _params_from_args(args)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write(",".join([f"x_{i}" for i in range(1, params.d + 1)] + ["label"]) + "\n")
        for s in sample_stream(params, args.n, RngStream(args.seed)):
            out.write(",".join(_fmt(v) for v in s.x) + f",{int(s.is_outlier)}\n")
    finally:
        if args.out:
            out.close()
    return 0


def _params_from_args(args):
    if args.scenario:
        return scenario(args.scenario, d=args.d, r=args.r)
    return ScenarioParams(d=args.d, r=args.r,
                          k=args.k or 0.0, l=args.l or 1.0,
                          rho1=args.rho1 if args.rho1 is not None else 0.3)


# --- run ---------------------------------------------------------------------

_CONFIG_KEYS = ("scenario", "k", "l", "rho1", "d", "n", "r", "seed", "replicates",
                "workers", "methods", "batch_size", "n_init", "n_mc", "alpha",
                "omega", "loc_c", "loc_gamma", "loc_n0", "rm_c", "rm_gamma",
                "rm_n0", "dist_c", "dist_gamma", "dist_n0", "checkpoint_every",
                "out_dir", "data")


def cmd_run(args):
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key) for key in _CONFIG_KEYS}
    cfg = build_config(file_values, overrides)
    if cfg.out_dir is None:
        raise ValueError("run needs an output directory (--out-dir)")
    reps = run_experiment(cfg)
    print(f"wrote {len(reps)} replicate(s) to {cfg.out_dir} "
          f"[backend={backend.ACTIVE}]")
    return 0


# --- bench -------------------------------------------------------------------


def cmd_bench(args):
    rows = []
    backends = (backend.available_backends() if args.compare_backends
                else [backend.ACTIVE])
    for n in args.n:
        for d in args.d:
            for method in args.methods:
                batch = args.batch_size if args.batch_size else (d if method == "streaming" else 1)
                for name in backends:
                    if name == backend.ACTIVE:
                        rows.append(time_pipeline(n=n, d=d, method=method,
                                                  batch_size=batch, seed=args.seed))
                    else:
                        rows.append(time_pipeline_subprocess(
                            name, n=n, d=d, method=method, batch_size=batch,
                            seed=args.seed))
    if args.micro:
        rows.extend(micro_rows())
    for row in rows:
        print(f"{row[0]:>9} {row[1]:>9} {row[2]:>10} n={row[3]:<8} d={row[4]:<4} "
              f"s={row[5]:<4} wall={row[6]:.3f}s eig={row[7]:<6} rate={row[8]:.1f}/s")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        write_csv(os.path.join(args.out_dir, "timings.csv"), TIMING_COLUMNS, rows)
    return 0


# --- resume ------------------------------------------------------------------


def cmd_resume(args):
    with open(args.snapshot) as fh:
        payload = json.load(fh)
    kind = payload.get("kind")
    if kind == "robust":
        est = RobustEstimator.from_snapshot(payload)
    elif kind == "naive":
        est = SampleCovEstimator.from_snapshot(payload)
    else:
        raise ValueError(f"unrecognized snapshot kind {kind!r}")
    xs, labels = load_rows(args.data)
    records = []
    if kind == "robust" and est.batch_size > 1:
        for pos in range(0, len(xs), est.batch_size):
            records.extend(est.update_block(xs[pos:pos + est.batch_size]))
    else:
        records.extend(est.update(row) for row in xs)
    if labels is not None:
        for i, rec in enumerate(records):
            rec.truth = bool(labels[i])
    os.makedirs(args.out_dir, exist_ok=True)
    det_rows = [("resumed", rec.index, rec.raw_distance, rec.scaled_distance,
                 int(rec.is_outlier), "" if rec.truth is None else int(rec.truth))
                for rec in records]
    write_csv(os.path.join(args.out_dir, "detections.csv"), DETECTION_COLUMNS, det_rows)
    with open(os.path.join(args.out_dir, f"snapshot_{kind}.json"), "w") as fh:
        json.dump(est.to_snapshot(), fh)
    print(f"resumed {kind} estimator through {len(xs)} observations "
          f"(n_obs={est.n_obs})")
    return 0


# --- parser ------------------------------------------------------------------


def _add_run_flags(p):
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--scenario", choices=list("ABCD") + list("abcd"))
    p.add_argument("--k", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--rho1", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--replicates", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--methods", help="comma list from online,streaming,naive,oracle")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--n-init", dest="n_init", type=int)
    p.add_argument("--n-mc", dest="n_mc", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--omega", type=float)
    for prefix in ("loc", "rm", "dist"):
        p.add_argument(f"--{prefix}-c", dest=f"{prefix}_c", type=float)
        p.add_argument(f"--{prefix}-gamma", dest=f"{prefix}_gamma", type=float)
        p.add_argument(f"--{prefix}-n0", dest=f"{prefix}_n0", type=float)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--data", help="CSV of observations ('-' = stdin) instead of simulation")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="robcov",
        description="Online robust covariance estimation and outlier detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="contamination parameters attaining KL targets")
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--kl", type=float, nargs="+", default=[1.0, 5.0, 10.0, 25.0])
    p.add_argument("--out", help="optional CSV output path")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="emit a labeled contaminated stream as CSV")
    p.add_argument("--scenario", choices=list("ABCD") + list("abcd"))
    p.add_argument("--k", type=float)
    p.add_argument("--l", type=float)
    p.add_argument("--rho1", type=float)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--r", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run estimators on a simulated or external stream")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="timing table; optionally compare backends")
    p.add_argument("--n", type=int, nargs="+", default=[10000])
    p.add_argument("--d", type=int, nargs="+", default=[10])
    p.add_argument("--methods", type=lambda s: s.split(","),
                   default=["online", "streaming"])
    p.add_argument("--batch-size", dest="batch_size", type=int,
                   help="streaming block size (default: d)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compare-backends", action="store_true")
    p.add_argument("--micro", action="store_true",
                   help="add kernel micro-benchmarks for every backend")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("resume", help="continue from a snapshot on new data")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--data", required=True, help="CSV of new observations ('-' = stdin)")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_resume)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"robcov: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

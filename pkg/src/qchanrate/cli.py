"""Command-line entry points.

Verbs:
  validate  parse a config and print the model validation reports
  estimate  run the configured sweep and write CSV (and SVG) results
  bound     like estimate but restricted to auxiliary lower bounds;
            accepts an external trajectory instead of channel sampling
  sample    draw one trajectory from the configured channel to a file
  oracle    small-length exact check of the recursions against brute force

Exit codes: 0 success, 2 configuration/validation failure, 3 runtime
failure.  Failures print one line ``error[<category>]: <message>``.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import channels
from .config import build_auxiliary, instantiate_channel, load_config
from .errors import ConfigError, QchanrateError
from .oracle import brute_force_oracle
from .rates import scaled_forward_classical, scaled_forward_quantum
from .runner import bound_rows_for_trajectory, run_experiment, write_rows_csv
from .sampling import load_trajectory, sample_trajectory, save_trajectory

ORACLE_CHECK_TOL = 1e-9


def _add_run_flags(sub):
    sub.add_argument("--seeds", help="comma-separated seed list overriding the config")
    sub.add_argument("--n", type=int, help="sequence length overriding the config")
    sub.add_argument("--out-dir", default=".", help="output directory (default: cwd)")
    sub.add_argument("--no-svg", action="store_true", help="skip the SVG plot")
    sub.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    sub.add_argument(
        "--timings",
        action="store_true",
        help="record measured wallclock per row (breaks byte-for-byte reproducibility)",
    )


def _apply_overrides(cfg, args):
    updates = {}
    if args.seeds:
        try:
            seeds = tuple(int(s) for s in args.seeds.split(","))
        except ValueError:
            raise ConfigError("--seeds", f"expected comma-separated integers, got {args.seeds!r}")
        if not seeds or any(s < 0 for s in seeds) or len(set(seeds)) != len(seeds):
            raise ConfigError("--seeds", "seeds must be distinct nonnegative integers")
        updates["seeds"] = seeds
    if args.n is not None:
        if args.n < 1:
            raise ConfigError("--n", f"n must be >= 1, got {args.n}")
        if cfg.burn_in >= args.n:
            raise ConfigError("--n", f"n must exceed the configured burn_in {cfg.burn_in}")
        updates["n"] = args.n
    return dataclasses.replace(cfg, **updates) if updates else cfg


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    model = instantiate_channel(cfg.channel)
    print(channels.validate(model).summary())
    for aux_spec in cfg.auxiliaries:
        aux = build_auxiliary(aux_spec)
        note = " (kernel floored)" if aux.smoothed else ""
        print(f"auxiliary {aux.label!r}{note}:")
        print(channels.validate(aux.model).summary())
    print(f"{args.config}: configuration is valid")
    return 0


def _run(cfg, args) -> int:
    out = run_experiment(
        cfg,
        args.out_dir,
        workers=max(1, args.threads),
        write_svg=not args.no_svg,
        timings=args.timings,
    )
    print(f"wrote {out.csv_path} ({len(out.rows)} rows)")
    if out.svg_path:
        print(f"wrote {out.svg_path}")
    if out.errors:
        print(f"warning: {len(out.errors)} estimator runs failed, see {out.errors_path}")
    if not out.rows:
        raise QchanrateError("every estimator run failed")
    return 0


def cmd_estimate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    return _run(cfg, args)


def cmd_bound(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if not cfg.auxiliaries:
        raise ConfigError("auxiliaries", "bound requires at least one auxiliary model")
    cfg = dataclasses.replace(cfg, estimators=("aux_lower",))
    if args.trajectory:
        traj = load_trajectory(args.trajectory)
        rows, errors = bound_rows_for_trajectory(cfg, traj)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / cfg.csv_name
        rows.sort(key=lambda r: (r.sweep_value, r.estimator_id, r.seed))
        write_rows_csv(csv_path, "external", rows)
        print(f"wrote {csv_path} ({len(rows)} rows)")
        for e in errors:
            print(f"warning: {e.estimator_id} failed [{e.category}]: {e.message}")
        if not rows:
            raise QchanrateError("every auxiliary evaluation failed")
        return 0
    return _run(cfg, args)


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    model = instantiate_channel(cfg.channel)
    n = args.n if args.n is not None else cfg.n
    if n < 1:
        raise ConfigError("--n", f"n must be >= 1, got {n}")
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    traj = sample_trajectory(model, cfg.input_law, n, seed)
    save_trajectory(traj, args.output)
    print(f"wrote {args.output} (n={traj.n}, seed={traj.seed})")
    return 0


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    model = instantiate_channel(cfg.channel)
    q = cfg.input_law
    n = args.oracle_n
    tables = brute_force_oracle(model, q, n)
    total_dev = abs(float(tables.joint.sum()) - 1.0)
    min_entry = float(tables.joint.min())
    print(f"joint table at n={n}: sum deviation {total_dev:.3e}, min entry {min_entry:.3e}")

    forward = (
        scaled_forward_classical
        if isinstance(model, channels.ClassicalFsmc)
        else scaled_forward_quantum
    )
    worst_y = 0.0
    worst_xy = 0.0
    y_seqs = [np.array(seq) for seq in np.ndindex(*(tables.y_size,) * n)]
    x_seqs = [np.array(seq) for seq in np.ndindex(*(tables.x_size,) * n)]
    for ys in y_seqs:
        p = tables.output_prob(ys)
        if p > 0:
            worst_y = max(worst_y, abs(-forward(model, q, ys).sum() - np.log(p)))
        for xs in x_seqs:
            pj = tables.joint_prob(xs, ys)
            if pj > 0:
                logp = -(forward(model, q, ys, xs).sum())
                worst_xy = max(worst_xy, abs(logp - np.log(pj)))
    print(f"recursion vs oracle: max |dlog p(y)| = {worst_y:.3e}, "
          f"max |dlog p(x,y)| = {worst_xy:.3e}")
    if total_dev > 1e-10 or min_entry < -1e-12 or max(worst_y, worst_xy) > ORACLE_CHECK_TOL:
        raise QchanrateError("oracle cross-check failed (see figures above)")
    print("oracle cross-check passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qchanrate",
        description="Information-rate estimation for channels with a quantum memory state",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a configuration file")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("estimate", help="run the configured estimation sweep")
    p.add_argument("config")
    _add_run_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bound", help="run auxiliary-model lower bounds")
    p.add_argument("config")
    p.add_argument("--trajectory", help="evaluate bounds on an imported trajectory file")
    _add_run_flags(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sample", help="sample a trajectory to a text file")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("oracle", help="exact small-length recursion cross-check")
    p.add_argument("config")
    p.add_argument("--oracle-n", type=int, default=3)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    except QchanrateError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

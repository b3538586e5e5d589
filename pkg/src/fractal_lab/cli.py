"""Command-line interface.

Every subcommand is deterministic given its flags: randomness flows only
from --seed, and when --seed is absent a generated seed is printed and
recorded in the outputs, so any run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .dimension import default_fit_range, estimate_dimension, threshold_profile
from .errors import FractalLabError
from .experiments import CSV_HEADER, ExperimentConfig, run_experiment
from .frostman import frostman_cascade, verify_frostman
from .grid import CantorSpec, GridSet, cantor_set, scale_counts
from .rng import PRNG_VERSION
from .walk import WalkPath, level_set, local_time, running_max, sample_walk, stream_walk_stats

_STREAMING_THRESHOLD = 24  # above this, localtime avoids materializing the path


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _default_jobs() -> int:
    env = os.environ.get("FRACTAL_LAB_JOBS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int.from_bytes(os.urandom(8), "little")
    print(f"generated seed: {seed}")
    return seed


def _load_grid(path: str) -> GridSet:
    blob = Path(path).read_bytes()
    if blob.lstrip()[:1] == b"{":
        return GridSet.from_json(blob.decode("utf-8"))
    return GridSet.from_binary(blob)


def _cmd_cantor(args, parser) -> int:
    spec = CantorSpec(base=args.base, kept_digits=args.kept, depth=args.depth)
    gs = cantor_set(spec)
    Path(args.out).write_text(gs.to_json() + "\n", encoding="utf-8")
    if args.binary:
        Path(args.binary).write_bytes(gs.to_binary())
    print(f"cells {gs.count} depth {gs.depth} base {gs.base} -> {args.out}")
    return 0


def _cmd_dim(args, parser) -> int:
    gs = _load_grid(args.set)
    counts = scale_counts(gs)
    lo, hi = (args.lo, args.hi)
    if lo is None or hi is None:
        lo, hi = default_fit_range(gs.depth)
    est = estimate_dimension(counts, lo, hi, base=gs.base)
    print(f"slope {est.slope:.6f}")
    if args.out:
        Path(args.out).write_text(est.to_json() + "\n", encoding="utf-8")
    if args.profile_out:
        betas = args.betas if args.betas else tuple(round(0.05 * i, 2) for i in range(21))
        profile = threshold_profile(gs, betas)
        Path(args.profile_out).write_text(profile.to_csv(), encoding="utf-8")
    return 0


def _cmd_frostman(args, parser) -> int:
    gs = _load_grid(args.set)
    measure = frostman_cascade(gs, args.alpha)
    Path(args.out).write_text(measure.to_json() + "\n", encoding="utf-8")
    if args.masses_csv:
        Path(args.masses_csv).write_text(measure.masses_csv(), encoding="utf-8")
    observed = verify_frostman(measure)
    flag = " (degenerate)" if measure.degenerate else ""
    print(f"frostman constant {measure.frostman_constant!r} observed {observed!r}{flag}")
    return 0


def _cmd_walk(args, parser) -> int:
    seed = _resolve_seed(args)
    path = sample_walk(args.steps_log2, seed)
    Path(args.out).write_bytes(path.to_binary())
    if args.stats_csv:
        n = path.n_steps
        zero = level_set(path, 0)
        stats = [
            ("final_units", float(path.positions[-1])),
            ("max_units", float(running_max(path)[-1])),
            ("zero_visits", float(zero.count)),
            ("local_time_zero", local_time(path, n, 0)),
        ]
        lines = [CSV_HEADER] + [f"0,{seed},,{name},{value!r}" for name, value in stats]
        Path(args.stats_csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"walk 2**{args.steps_log2} steps seed {seed} -> {args.out}")
    return 0


def _cmd_localtime(args, parser) -> int:
    if args.path:
        path = WalkPath.from_binary(Path(args.path).read_bytes())
        t_cells = args.t_cells if args.t_cells is not None else path.n_steps
        value = local_time(path, t_cells, args.x)
    else:
        if args.steps_log2 is None:
            parser.error("localtime needs --path or --steps-log2")
        seed = _resolve_seed(args)
        n = 1 << args.steps_log2
        t_cells = args.t_cells if args.t_cells is not None else n
        if args.steps_log2 > _STREAMING_THRESHOLD:
            visits = stream_walk_stats(args.steps_log2, seed, args.x, t_cells)["visits"]
            value = visits * 2.0 ** (-args.steps_log2 / 2.0)
        else:
            value = local_time(sample_walk(args.steps_log2, seed), t_cells, args.x)
    print(repr(value))
    return 0


_EXPERIMENT_CONFIG_FLAGS = (
    "kind", "steps_log2", "replicas", "seed", "fit_lo", "fit_hi",
    "base", "kept", "depth", "beta", "deltas",
)


def _cmd_experiment(args, parser) -> int:
    if args.config:
        conflicts = [
            f"--{name.replace('_', '-')}"
            for name in _EXPERIMENT_CONFIG_FLAGS
            if getattr(args, name) is not None
        ]
        if conflicts:
            parser.error(
                "--config conflicts with " + ", ".join(conflicts)
                + "; config files override nothing silently"
            )
        config = ExperimentConfig.from_json_file(args.config)
    else:
        if not args.kind:
            parser.error("experiment needs --kind or --config")
        seed = _resolve_seed(args)
        config = ExperimentConfig(
            kind=args.kind,
            steps_log2=args.steps_log2,
            replicas=args.replicas if args.replicas is not None else 1,
            master_seed=seed,
            fit_lo=args.fit_lo,
            fit_hi=args.fit_hi,
            cantor_base=args.base,
            cantor_kept=args.kept,
            cantor_depth=args.depth,
            beta=args.beta,
            deltas=args.deltas,
        )
    if args.smoke:
        config = config.smoke()
    report = run_experiment(config, jobs=args.jobs)
    csv_path, json_path = report.write(args.out)
    print(f"wrote {csv_path} and {json_path}")
    for stat, agg in report.aggregates.items():
        std = "n/a" if agg["std"] is None else f"{agg['std']:.6f}"
        print(f"  {stat}: mean {agg['mean']:.6f} std {std} n {agg['count']}")
    for key in ("ks_statistic", "p_max_positive", "ratio_mean_to_alpha", "hausdorff_sum"):
        if key in report.extras and report.extras[key] is not None:
            print(f"  {key}: {report.extras[key]:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractal-lab",
        description="Scale-counting dimension, Frostman cascades and lattice-walk experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s ({PRNG_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cantor", help="materialize a digit-restricted self-similar set")
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--kept", type=_parse_int_list, required=True, metavar="D0,D1,...")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--binary", help="also write the compact binary form")
    p.set_defaults(func=_cmd_cantor)

    p = sub.add_parser("dim", help="log-log slope of scale counts for a stored set")
    p.add_argument("--set", required=True, help="GridSet JSON or binary file")
    p.add_argument("--lo", type=int)
    p.add_argument("--hi", type=int)
    p.add_argument("--out", help="write the estimate as JSON")
    p.add_argument("--profile-out", help="write a beta,sum threshold profile CSV")
    p.add_argument("--betas", type=_parse_float_list, metavar="B0,B1,...")
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("frostman", help="build the cascade measure on a stored set")
    p.add_argument("--set", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--masses-csv", help="write (level,cell_index,mass) triples")
    p.set_defaults(func=_cmd_frostman)

    p = sub.add_parser("walk", help="sample a lattice walk and store it")
    p.add_argument("--steps-log2", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--stats-csv")
    p.set_defaults(func=_cmd_walk)

    p = sub.add_parser("localtime", help="local time of a walk at a lattice level")
    p.add_argument("--path", help="stored walk binary")
    p.add_argument("--steps-log2", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--x", type=int, default=0, help="lattice level in sqrt(dt) units")
    p.add_argument("--t-cells", type=int)
    p.set_defaults(func=_cmd_localtime)

    p = sub.add_parser("experiment", help="run a seeded replicated experiment")
    p.add_argument("--config", help="JSON config file (exclusive with config flags)")
    p.add_argument("--kind", choices=["zero_set_dim", "doubling", "perkins", "levy_identity", "cantor_exact"])
    p.add_argument("--steps-log2", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--fit-lo", type=int)
    p.add_argument("--fit-hi", type=int)
    p.add_argument("--base", type=int)
    p.add_argument("--kept", type=_parse_int_list, metavar="D0,D1,...")
    p.add_argument("--depth", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--deltas", type=_parse_float_list, metavar="D0,D1,...")
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--smoke", action="store_true", help="CI preset: small m, few replicas")
    p.add_argument("--out", required=True, help="output directory for rows.csv and report.json")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except FractalLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: ``gen`` (build and serialize a system), ``solve`` (run the
solver on a serialized system), ``bounds`` (evaluate bound curves),
``table2`` (noise-magnitude sweep), ``figure`` (trajectory + bound
dataset over a grid), ``precondition`` (gap-fill speedup demo).

Configs are JSON (see the README for the schema per subcommand).
``--seed`` overrides every seed in the config, so it fully determines
all stochastic behavior.  Diagnostics go to stderr; data goes to files.
Exit codes: 0 success, 1 configuration error, 2 failed numerical
hypothesis (the failing condition is printed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .bounds import evaluate_bound, write_bound_csv
from .errors import HypothesisError
from .experiments import (
    ExperimentConfig,
    apply_paper_scale,
    run_figure_experiment,
    run_preconditioner_demo,
    run_table2,
    write_band_csv,
)
from .kaczmarz import RkConfig, X0Mode, initial_iterate, record_points, solve, write_trajectory_csv
from .problems import (
    NoiseModel,
    SpectrumSpec,
    additive_noise,
    generate_system,
    load_system,
    multiplicative_noise,
    partial_consistent_noise,
    preconditioner_noise,
    save_system,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # usage text and exit code 1 on bad flags, instead of argparse's 2
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="noisyrk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, helptext in (
        ("gen", "generate a system plus noise and serialize it"),
        ("solve", "run randomized Kaczmarz on a serialized system"),
        ("bounds", "evaluate bound curves for a serialized system"),
        ("table2", "noise-magnitude sweep (table2.csv)"),
        ("figure", "trajectories and bound curves over a noise grid"),
        ("precondition", "gap-fill preconditioner speedup demo"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override every seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--scale", choices=("desk", "paper"), default="desk",
            help="'paper' swaps in full-size dimensions and budget (figure/table2)",
        )
        p.add_argument(
            "--threads", type=int, default=os.cpu_count(),
            help="worker pool size for grid points",
        )
    return parser


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _rk_from(data: dict, seed_override: int | None, default_seed: int) -> RkConfig:
    seed = seed_override if seed_override is not None else int(data.get("seed", default_seed))
    return RkConfig(
        max_iterations=int(data.get("max_iterations", 10_000)),
        trials=int(data.get("trials", 10)),
        record_stride=data.get("record_stride"),
        seed=seed,
        x0_mode=X0Mode(data.get("x0_mode", "range")),
    )


def _make_noisy(sys, noise: dict, seed: int):
    model = NoiseModel(noise.get("model", "additive"))
    sigma_a = float(noise.get("sigma_a", 0.0))
    sigma_b = float(noise.get("sigma_b", 0.0))
    if model is NoiseModel.ADDITIVE:
        return additive_noise(sys, sigma_a, sigma_b, seed)
    if model is NoiseModel.MULTIPLICATIVE:
        return multiplicative_noise(
            sys, sigma_a, sigma_b,
            use_e=bool(noise.get("use_e", True)),
            use_f=bool(noise.get("use_f", True)),
            seed=seed,
        )
    if model is NoiseModel.PARTIAL_CONSISTENT:
        return partial_consistent_noise(sys, float(noise.get("strength", 0.5)), seed)
    return preconditioner_noise(sys)


def _out_dir(args, cfg: dict, required: bool = True) -> Path | None:
    out = args.out or cfg.get("output_dir")
    if out is None:
        if required:
            raise ValueError("an output directory is required (--out or output_dir)")
        return None
    return Path(out)


def _cmd_gen(args, cfg: dict) -> int:
    out = _out_dir(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    sys_ = generate_system(SpectrumSpec(**cfg["spectrum"]), seed)
    noisy = _make_noisy(sys_, cfg.get("noise", {}), seed)
    save_system(noisy, out)
    return 0


def _cmd_solve(args, cfg: dict) -> int:
    out = _out_dir(args, cfg)
    noisy = load_system(cfg["system_dir"])
    rk = _rk_from(cfg.get("rk", {}), args.seed, default_seed=0)
    traj = solve(noisy, rk)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "traj.csv", traj)
    write_band_csv(out / "band.csv", traj)
    return 0


def _cmd_bounds(args, cfg: dict) -> int:
    out = _out_dir(args, cfg)
    noisy = load_system(cfg["system_dir"])
    rk = _rk_from(cfg.get("rk", {}), args.seed, default_seed=0)
    ks = record_points(rk.max_iterations, rk.record_stride)
    x0 = initial_iterate(noisy.a_tilde, rk, trial=0)
    out.mkdir(parents=True, exist_ok=True)
    for kind in cfg["bounds"]:
        curve = evaluate_bound(kind, noisy.base, noisy, x0, ks)
        write_bound_csv(out / f"bound_{curve.kind.value}.csv", curve)
    return 0


def _experiment_config(args, cfg: dict) -> ExperimentConfig:
    exp = ExperimentConfig.from_dict(cfg)
    if args.seed is not None:
        exp = replace(exp, master_seed=args.seed, rk=replace(exp.rk, seed=args.seed))
    if args.out is not None:
        exp = replace(exp, output_dir=args.out)
    if args.scale == "paper":
        exp = apply_paper_scale(exp)
    if exp.output_dir is None:
        raise ValueError("an output directory is required (--out or output_dir)")
    return exp


def _cmd_table2(args, cfg: dict) -> int:
    run_table2(_experiment_config(args, cfg), threads=args.threads)
    return 0


def _cmd_figure(args, cfg: dict) -> int:
    run_figure_experiment(_experiment_config(args, cfg), threads=args.threads)
    return 0


def _cmd_precondition(args, cfg: dict) -> int:
    out = _out_dir(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("master_seed", 0))
    rk = _rk_from(cfg.get("rk", {}), args.seed, default_seed=seed)
    run_preconditioner_demo(
        SpectrumSpec(**cfg["spectrum"]),
        tau=float(cfg["tau"]),
        rk=rk,
        master_seed=seed,
        output_dir=out,
        initial_sq_error=cfg.get("initial_sq_error"),
    )
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bounds": _cmd_bounds,
    "table2": _cmd_table2,
    "figure": _cmd_figure,
    "precondition": _cmd_precondition,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.subcommand](args, cfg)
    except HypothesisError as exc:
        print(f"hypothesis failed: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point for seeded kitchen-design experiments."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import (
    ConfigError,
    ProblemConfig,
    ROOM_VARIANTS,
    default_config,
    load_config,
    room_for_variant,
)
from .optimizer import OptimizeMode
from .planner import Policy
from .report import VerificationError, run_experiment


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kitchensynth",
        description="Synthesize kitchen layouts optimized for human-robot "
                    "collaborative cooking.")
    p.add_argument("--config", type=Path, default=None,
                   help="JSON problem configuration (default: bundled two-burger)")
    p.add_argument("--room", choices=ROOM_VARIANTS, default=None,
                   help="bundled room variant (overrides the config room)")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--runs", type=int, default=1, help="number of seeded runs")
    p.add_argument("--mode", choices=[m.value for m in OptimizeMode], default=None,
                   help="optimize layout and paths together or separately")
    p.add_argument("--iterations", type=int, default=None,
                   help="override the annealing iteration budget")
    p.add_argument("--out", type=Path, default=None,
                   help="output directory (default $KITCHENSYNTH_OUT or ./out)")
    p.add_argument("--render", dest="render", action="store_true", default=True)
    p.add_argument("--no-render", dest="render", action="store_false",
                   help="skip SVG output")
    p.add_argument("--always-inference", action="store_true",
                   help="robot always plans against a virtual human path")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock time in the report")
    return p


def resolve_config(args: argparse.Namespace) -> ProblemConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = default_config(args.room or "regular")
    if args.room is not None and args.config is not None:
        room, spawn_h, spawn_r = room_for_variant(args.room)
        cfg.room = room
        cfg.params = replace(cfg.params, spawn_human=spawn_h, spawn_robot=spawn_r)
    if args.mode is not None:
        cfg.anneal = replace(cfg.anneal, mode=OptimizeMode(args.mode))
    if args.iterations is not None:
        cfg.anneal = replace(cfg.anneal, iterations=args.iterations)
    if args.always_inference:
        cfg.policy = Policy.ALWAYS_INFERENCE
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out or Path(os.environ.get("KITCHENSYNTH_OUT", "out"))
    seeds = [args.seed + i for i in range(args.runs)]
    try:
        result = run_experiment(cfg, seeds, out_dir=out_dir, render=args.render,
                                include_timing=args.timing)
    except VerificationError as exc:
        print(f"error: verification failed: {exc}", file=sys.stderr)
        return 1

    n = len(result.report.solutions)
    if n == 0:
        diags = [r.diagnostic for r in result.results if r.diagnostic]
        print("no valid solutions found", file=sys.stderr)
        for d in diags:
            print(f"  {d}", file=sys.stderr)
        return 1
    print(f"{n} Pareto solution(s) written to {out_dir}")
    for i, sol in enumerate(result.report.solutions, start=1):
        c = sol["costs"]
        print(f"  solution {i}: total={c['total']:.4f} "
              f"length={c['path_length']:.3f} time={c['path_time']:.3f} "
              f"narrowness={c['path_narrowness']:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

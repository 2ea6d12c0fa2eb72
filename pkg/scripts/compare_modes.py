#!/usr/bin/env python3
"""Paired comparison: joint (together) vs staged (separate) optimization.

Runs the bundled two-burger problem on the regular room for a set of seeds
in both modes and reports the best total and the path-cost subtotal of the
best solution per run, plus per-mode medians.
"""

import argparse
import statistics
import sys
import time
from dataclasses import replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from kitchensynth.config import default_config
from kitchensynth.cost import path_cost_part
from kitchensynth.optimizer import OptimizeMode
from kitchensynth.report import run_one


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10, help="number of seeds")
    ap.add_argument("--seed0", type=int, default=0, help="first seed")
    ap.add_argument("--iterations", type=int, default=2000)
    args = ap.parse_args()

    results: dict[str, list[float]] = {}
    for mode in (OptimizeMode.TOGETHER, OptimizeMode.SEPARATE):
        cfg = default_config("regular")
        cfg.anneal = replace(cfg.anneal, mode=mode, iterations=args.iterations)
        path_costs = []
        for seed in range(args.seed0, args.seed0 + args.seeds):
            t0 = time.monotonic()
            res = run_one(cfg, seed)
            best = res.best
            pc = (path_cost_part(best.costs, cfg.weights)
                  if best is not None else float("nan"))
            path_costs.append(pc)
            total = best.total if best is not None else float("nan")
            print(f"{mode.value:9s} seed {seed}: total={total:.4f} "
                  f"path={pc:.4f} ({time.monotonic() - t0:.1f}s)", flush=True)
        results[mode.value] = path_costs

    print()
    for mode, pcs in results.items():
        print(f"{mode:9s} median path cost: {statistics.median(pcs):.4f}")
    wins = sum(t < s for t, s in zip(results["together"], results["separate"]))
    print(f"together wins {wins}/{args.seeds} paired seeds")
    return 0


if __name__ == "__main__":
    sys.exit(main())

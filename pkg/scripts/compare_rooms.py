#!/usr/bin/env python3
"""Room-shape comparison: regular 8x8 vs scaled-down vs L-shaped rooms.

Path costs are normalized by the room perimeter, so the comparison shows
how crowding (small room) and geometry (L-shape) affect the best layouts:
expect higher normalized path costs in the small room and higher
narrowness penalties in the L-shape.
"""

import argparse
import statistics
import sys
import time
from dataclasses import replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from kitchensynth.config import ROOM_VARIANTS, default_config
from kitchensynth.cost import path_cost_part
from kitchensynth.report import run_one


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10, help="number of seeds")
    ap.add_argument("--seed0", type=int, default=0, help="first seed")
    ap.add_argument("--iterations", type=int, default=2000)
    args = ap.parse_args()

    stats: dict[str, dict[str, float]] = {}
    for variant in ROOM_VARIANTS:
        cfg = default_config(variant)
        cfg.anneal = replace(cfg.anneal, iterations=args.iterations)
        path_costs, narrow = [], []
        for seed in range(args.seed0, args.seed0 + args.seeds):
            t0 = time.monotonic()
            res = run_one(cfg, seed)
            best = res.best
            if best is None:
                print(f"{variant:8s} seed {seed}: no solution "
                      f"({res.diagnostic})", flush=True)
                continue
            pc = path_cost_part(best.costs, cfg.weights)
            path_costs.append(pc)
            narrow.append(best.costs.path_narrowness)
            print(f"{variant:8s} seed {seed}: total={best.total:.4f} "
                  f"path={pc:.4f} narrow={best.costs.path_narrowness:.4f} "
                  f"({time.monotonic() - t0:.1f}s)", flush=True)
        stats[variant] = {
            "median_path": statistics.median(path_costs),
            "median_narrow": statistics.median(narrow),
        }

    print()
    for variant, st in stats.items():
        print(f"{variant:8s} median path cost {st['median_path']:.4f}  "
              f"median narrowness {st['median_narrow']:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Sweep the coverage thresholds for one random deployment.

Reproduces the threshold-sweep table: average and maximum coverage
probability depend only on n, while the qualified ratio drops as either
n or thold_p grows.
"""
from __future__ import annotations

import argparse
import time
from pathlib import Path

import landmark_coverage as lc

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description="Coverage threshold sweep")
    ap.add_argument("--scene", default=str(ROOT / "configs" / "table3_room.json"))
    ap.add_argument("--count", type=int, default=90, help="landmarks to place")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    scene = lc.load_scene(args.scene)
    deployment = lc.generate_random(scene, args.count, seed=args.seed)
    print(f"scene: {args.scene}")
    print(f"{scene.n_points} grid points, {scene.grid.n_cells} orientation cells, "
          f"K={args.count} landmarks")

    print(f"{'n':>3} {'thold_p':>8} {'avg_cp':>8} {'max_cp':>8} {'qualified':>10}")
    start = time.perf_counter()
    for n in (2, 3, 4):
        for thold_p in (0.50, 0.65, 0.80):
            variant = scene.with_coverage(n=n, thold_p=thold_p)
            met = lc.metrics(lc.evaluate_coverage(variant, deployment))
            print(f"{n:>3} {thold_p:>8.2f} {met.average_cp:>8.4f} "
                  f"{met.maximum_cp:>8.4f} {met.qualified_ratio:>10.4f}")
    print(f"swept 9 combinations in {time.perf_counter() - start:.2f} s")


if __name__ == "__main__":
    main()

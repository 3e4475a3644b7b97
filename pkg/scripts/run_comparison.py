#!/usr/bin/env python3
"""Four-way comparison of the falsification regimes over several seeds.

Writes one run directory per (mode, seed), a ``summary.csv`` with the best
reward of each run, and a learning-curve overlay per seed::

    python3 scripts/run_comparison.py --episodes 350 --seeds 0 1 2 --out runs/comparison
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import time

from acc_falsify import loops, plots
from acc_falsify.config import MODES, ExperimentConfig, load_config

log = logging.getLogger("run_comparison")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="base ExperimentConfig JSON (mode and seed are overridden)")
    ap.add_argument("--episodes", type=int, default=350)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--modes", nargs="+", choices=MODES, default=list(MODES))
    ap.add_argument("--out", default="runs/comparison")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    base = load_config(args.config).to_dict() if args.config else ExperimentConfig().to_dict()
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for seed in args.seeds:
        curves = []
        for mode in args.modes:
            d = dict(base, mode=mode, seed=seed, episodes=args.episodes,
                     out=os.path.join(args.out, f"{mode}_seed{seed}"))
            cfg = ExperimentConfig.from_dict(d)
            t0 = time.perf_counter()
            hist = loops.run(cfg)
            dt = time.perf_counter() - t0
            loops.write_history(hist, cfg.out)
            b = hist.best
            log.info("%-8s seed %d: best reward %.4g (rho %.3f) in %.1f s", mode, seed, b.reward, b.rho, dt)
            rows.append({"mode": mode, "seed": seed, "episodes": len(hist.records),
                         "best_episode": b.episode, "best_reward": repr(b.reward), "best_rho": repr(b.rho),
                         "safety_margin": repr(b.safety_margin),
                         "collision_time": "" if b.collision_time is None else repr(b.collision_time),
                         "seconds": f"{dt:.1f}"})
            if mode != "model":
                curves.append((mode, [r.episode for r in hist.records], hist.rewards()))
        if curves:
            with open(os.path.join(args.out, f"learning_curves_seed{seed}.svg"), "w") as fh:
                fh.write(plots.emit_learning_curve(curves, title=f"Learning progress, seed {seed}"))
    with open(os.path.join(args.out, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {os.path.join(args.out, 'summary.csv')}")


if __name__ == "__main__":
    main()

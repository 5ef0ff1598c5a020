"""
Full-size run
=============

The 400-antenna, 100-user configuration. One drop takes about half a
minute per core, so the default here is a handful of drops; pass a larger
count (and ``--workers``) for smoother curves. The script reports the
measured sum-rate gain of the graph scheme at its best threshold. There is
no pass/fail bound: the absolute threshold axis depends on link-budget
details the model leaves open.

Run with ``python3 demos/full_scale.py --drops 4 --workers 4``.
"""

import argparse
from dataclasses import replace

from fddtrain.harness import PRESETS, run_experiment

ap = argparse.ArgumentParser()
ap.add_argument("--drops", type=int, default=4)
ap.add_argument("--blocks", type=int, default=20)
ap.add_argument("--workers", type=int, default=1)
ap.add_argument("--out", default="results/full")
args = ap.parse_args()

cfg = replace(PRESETS["paper"], n_drops=args.drops, n_fading_blocks=args.blocks, output_dir=args.out)
res = run_experiment(cfg, n_workers=args.workers)

gi, oi = cfg.schemes.index("graph"), cfg.schemes.index("orthogonal")
sr = res.sum_rate().mean
best = res.best_delta_index()
for di, d in enumerate(cfg.delta_sweep_db):
    print(f"{d:6.0f} dB  orthogonal {sr[di, oi]:8.2f}  graph {sr[di, gi]:8.2f}  ratio {res.overhead().mean[di, gi]:.3f}")
g, o = sr[best[gi], gi], sr[best[oi], oi]
print(f"\ngraph best {g:.2f} at {cfg.delta_sweep_db[best[gi]]:g} dB, orthogonal best {o:.2f}: gain {100 * (g / o - 1):+.1f} %")

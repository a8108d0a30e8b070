"""Continual-pretraining what-ifs: re-warmup peak LR and ramp length.

A completed 20K-step cosine run is continued for 30K more steps under a
cosine schedule, re-warming the LR first.  Varying the re-warmup peak
changes the size of the loss bump (negative annealing area); varying the
ramp length barely changes the final loss.

Run:  python demos/04_continual_pretraining.py
"""

import numpy as np

from anneal_law import LawParams
from anneal_law.analysis import cosine_spec, cpt_predict

PARAMS = LawParams(L0=2.628, A=0.429, C=0.411, alpha=0.550)
CONTINUATION = cosine_spec(30_000, 30_000, 0.0, eta_max=4e-4, warmup=0)

print("== re-warmup peak LR (ramp 500 steps) ==")
for curve in cpt_predict(PARAMS, 20_000, [1e-4, 2e-4, 4e-4], [500], CONTINUATION):
    post = curve.loss[curve.rewarm_start :]
    print(
        f"  peak {curve.peak:.0e}: loss bump max {post.max():.4f}, "
        f"min S2 {curve.s2.min():+.4f}, final {curve.loss[-1]:.4f}"
    )
print("  higher peak -> higher bump, but lower final loss (larger S1 and S2).")

print("\n== re-warmup length (peak 2e-4) ==")
finals = []
for curve in cpt_predict(PARAMS, 20_000, [2e-4], [100, 500, 2000], CONTINUATION):
    finals.append(curve.loss[-1])
    print(f"  ramp {curve.rewarm_steps:>4} steps: final {curve.loss[-1]:.5f}")
spread = (max(finals) - min(finals)) / min(finals)
print(f"  final-loss spread across ramp lengths: {spread:.4%}")

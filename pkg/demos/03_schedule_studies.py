"""What-if studies over schedule design choices, using a fitted law.

Reproduces the classic schedule findings from the predicted side:
cosine cycle length and minimum LR, the constant-vs-cosine crossover,
the WSD annealing-ratio optimum, the annealing-function flip, and how the
momentum decay factor moves the optimal annealing ratio.

Run:  python demos/03_schedule_studies.py
"""

import numpy as np

from anneal_law import LawParams
from anneal_law.analysis import (
    compare_anneal_fns,
    crossover_constant_cosine,
    sweep_cosine,
    sweep_wsd,
)

PARAMS = LawParams(L0=2.628, A=0.429, C=0.411, alpha=0.550)

print("== cosine cycle length x min LR (60K steps) ==")
sweep = sweep_cosine(PARAMS, 60_000, [0.5, 1.0, 2.0], [0.0, 0.1])
for cell, loss in zip(sweep.axis, sweep.final_losses):
    marker = "  <-- best" if cell is sweep.axis[sweep.argmin_index] else ""
    print(
        f"  T={cell['cycle_factor']:>3}x total, min={cell['min_lr_frac']:.0%}: "
        f"final {loss:.4f}{marker}"
    )

print("\n== constant vs cosine finals across totals ==")
totals = [2_000, 5_000, 10_000, 20_000, 50_000, 100_000]
cross = crossover_constant_cosine(PARAMS, totals)
for i, total in enumerate(totals):
    c, k = cross.constant.final_losses[i], cross.cosine.final_losses[i]
    winner = "constant" if c < k else "cosine"
    print(f"  {total:>7} steps: constant {c:.4f}  cosine {k:.4f}  -> {winner}")
print(f"  analytic crossover forward area S1* = {cross.s1_star:.3f}")

print("\n== WSD annealing-ratio sweep (20K steps) ==")
ratios = [0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5]
wsd = sweep_wsd(PARAMS, [20_000], ratios)
best = wsd.axis[wsd.argmin_index]["anneal_ratio"]
losses = ", ".join(f"{r:.0%}:{l:.4f}" for r, l in zip(ratios, wsd.final_losses))
print(f"  {losses}")
print(f"  parabola-like with interior optimum at ratio {best:.0%}")

print("\n== annealing function choice depends on the ratio (50K steps) ==")
fns = compare_anneal_fns(PARAMS, 50_000, [0.1, 0.5], ["one_sqrt", "cosine"])
cells = {(c["anneal_fn"], c["anneal_ratio"]): l for c, l in zip(fns.axis, fns.final_losses)}
for ratio in (0.1, 0.5):
    s, c = cells[("one_sqrt", ratio)], cells[("cosine", ratio)]
    print(f"  ratio {ratio:.0%}: one_sqrt {s:.4f}  cosine {c:.4f}  -> "
          f"{'one_sqrt' if s < c else 'cosine'} wins")

print("\n== decay factor moves the optimal annealing ratio (20K steps) ==")
fine = [round(r, 2) for r in np.arange(0.01, 0.61, 0.01)]
for lam in (0.99, 0.999):
    s = sweep_wsd(PARAMS, [20_000], fine, lambda_=lam)
    print(f"  lambda={lam}: optimal ratio {s.axis[s.argmin_index]['anneal_ratio']:.0%}")

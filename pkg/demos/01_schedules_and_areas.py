"""Materialize each schedule family and inspect its S1/S2 areas.

Walks through the six schedule kinds, prints a compact per-family summary
(final LR, forward area S1, annealing area S2), and shows how the momentum
recurrence reacts to annealing vs re-warmup.

Run:  python demos/01_schedules_and_areas.py
"""

import numpy as np

from anneal_law import AreaConfig, ScheduleSpec, compute_areas, materialize

TOTAL = 10_000
WARMUP = 500
ETA_MAX = 2e-4

specs = {
    "constant": ScheduleSpec(
        kind="constant", total_steps=TOTAL, warmup_steps=WARMUP, eta_max=ETA_MAX
    ),
    "cosine (T = total)": ScheduleSpec(
        kind="cosine", total_steps=TOTAL, warmup_steps=WARMUP, eta_max=ETA_MAX
    ),
    "wsd (20% 1-sqrt)": ScheduleSpec(
        kind="wsd",
        total_steps=TOTAL,
        warmup_steps=WARMUP,
        eta_max=ETA_MAX,
        stable_end=8_000,
        anneal_fn="one_sqrt",
    ),
    "multi-step (80/10/10)": ScheduleSpec(
        kind="multi_step_cosine", total_steps=TOTAL, warmup_steps=WARMUP, eta_max=ETA_MAX
    ),
    "cyclic (two re-warmups)": ScheduleSpec(
        kind="cyclic",
        total_steps=TOTAL,
        warmup_steps=WARMUP,
        eta_max=ETA_MAX,
        cycle_spec=((0, 4_000), (1_000, 2_500), (1_000, 1_000)),
    ),
    "piecewise linear": ScheduleSpec(
        kind="piecewise_linear",
        total_steps=TOTAL,
        warmup_steps=WARMUP,
        eta_max=ETA_MAX,
        points=((501, ETA_MAX), (6_000, ETA_MAX / 2), (10_000, 0.0)),
    ),
}

print(f"{'family':<26} {'final LR':>10} {'S1':>8} {'S2':>9} {'min S2':>9}")
for name, spec in specs.items():
    series = materialize(spec)
    areas = compute_areas(series, AreaConfig(lambda_=0.999))
    print(
        f"{name:<26} {series.etas[-1]:>10.2e} {areas.s1[-1]:>8.3f} "
        f"{areas.s2[-1]:>9.4f} {areas.s2.min():>9.4f}"
    )

print()
print("Momentum around a re-warmup (cyclic schedule, first re-warm stage):")
series = materialize(specs["cyclic (two re-warmups)"])
areas = compute_areas(series, AreaConfig(lambda_=0.999))
rewarm_start = WARMUP + 4_000
for step in (rewarm_start - 1, rewarm_start + 100, rewarm_start + 500, rewarm_start + 999):
    print(
        f"  step {step + 1:>5}: lr={series.etas[step]:.2e} "
        f"m={areas.momentum[step]:+.2e} S2={areas.s2[step]:+.4f}"
    )
print("Negative momentum during re-warmup drags S2 down (loss bumps up).")

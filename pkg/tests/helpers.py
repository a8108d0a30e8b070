"""Shared test utilities: a mixed-family random schedule generator."""

import numpy as np

from anneal_law import ScheduleSpec
from anneal_law.schedule import ANNEAL_FNS, KINDS


def random_spec(rng: np.random.Generator, max_total: int = 2000) -> ScheduleSpec:
    """A valid random schedule spec drawn across every family."""
    kind = rng.choice(KINDS)
    total = int(rng.integers(20, max_total + 1))
    warmup = int(rng.integers(0, max(1, total // 5)))
    eta_max = float(10.0 ** rng.uniform(-4.5, -2.5))
    eta_min = eta_max * float(rng.choice([0.0, 0.1, 0.5]))
    base = dict(
        total_steps=total, warmup_steps=warmup, eta_max=eta_max, eta_min=eta_min
    )

    if kind == "constant":
        return ScheduleSpec(kind="constant", **base)
    if kind == "cosine":
        cycle = int(rng.integers(warmup + 1, 2 * total + 1))
        return ScheduleSpec(kind="cosine", cycle_T=cycle, **base)
    if kind == "wsd":
        stable = int(rng.integers(warmup, total + 1))
        fn = str(rng.choice(ANNEAL_FNS))
        return ScheduleSpec(kind="wsd", stable_end=stable, anneal_fn=fn, **base)
    if kind == "multi_step_cosine":
        k = int(rng.integers(2, 5))
        raw = rng.uniform(0.1, 1.0, size=k)
        fracs = raw / raw.sum()
        fracs[-1] = 1.0 - fracs[:-1].sum()
        scales = np.concatenate([[1.0], rng.uniform(0.0, 1.0, size=k - 1)])
        stages = tuple((float(f), float(s)) for f, s in zip(fracs, scales))
        return ScheduleSpec(kind="multi_step_cosine", stage_fractions=stages, **base)
    if kind == "cyclic":
        budget = total - warmup
        segments = []
        for _ in range(int(rng.integers(1, 4))):
            if budget < 1:
                break
            rewarm = int(rng.integers(0, max(1, budget // 3)))
            anneal = int(rng.integers(1, max(2, budget // 2)))
            if rewarm + anneal > budget:
                anneal = budget - rewarm
                if anneal < 1:
                    break
            segments.append((rewarm, anneal))
            budget -= rewarm + anneal
        if not segments:
            segments = [(0, total - warmup)]
        return ScheduleSpec(kind="cyclic", cycle_spec=tuple(segments), **base)
    # piecewise_linear
    lo = warmup + 1
    k = int(rng.integers(2, 6))
    steps = np.sort(rng.choice(np.arange(lo, total + 1), size=min(k, total - lo + 1), replace=False))
    values = rng.uniform(0.0, eta_max, size=len(steps))
    pts = tuple((int(s), float(v)) for s, v in zip(steps, values))
    return ScheduleSpec(kind="piecewise_linear", points=pts, **base)

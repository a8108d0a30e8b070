"""Acceptance suite: one test per release criterion.

Each test prints a single ``ACCEPTANCE <n>: PASS`` line on success (run with
``pytest -s tests/test_acceptance.py`` to see them).  Tolerances and runtime
budgets are asserted, not just reported.
"""

import dataclasses
import time

import numpy as np

from anneal_law import (
    AreaConfig,
    ChinchillaParams,
    FitConfig,
    LawParams,
    LossCurve,
    ScheduleSpec,
    compute_areas,
    compute_areas_bruteforce,
    eval_chinchilla,
    eval_curve,
    fit,
    fit_chinchilla,
    materialize,
    metrics,
    objective,
    predict_loss_curve,
)
from anneal_law.analysis import (
    compare_anneal_fns,
    constant_spec,
    cosine_spec,
    cost_table,
    cpt_predict,
    crossover_constant_cosine,
    reduction_experiment,
    sweep_cosine,
    sweep_wsd,
    wsd_spec,
)
from anneal_law.fit import objective_gradient

from helpers import random_spec

FIG2 = LawParams(L0=2.628, A=0.429, C=0.411, alpha=0.550)
ETA_MAX = 2e-4
WARMUP = 500


def report(n: int, text: str) -> None:
    print(f"\nACCEPTANCE {n}: PASS — {text}")


def test_acceptance_1_s2_oracle_equivalence():
    """200 random mixed-family schedules x 4 decay factors, 1e-10 agreement."""
    start = time.monotonic()
    rng = np.random.default_rng(20240811)
    worst = 0.0
    for _ in range(200):
        series = materialize(random_spec(rng, max_total=2000))
        for lam in (0.0, 0.9, 0.99, 0.999):
            cfg = AreaConfig(lambda_=lam)
            fast = compute_areas(series, cfg)
            slow = compute_areas_bruteforce(series, cfg)
            scale = max(float(np.max(np.abs(slow.s2))), 1e-30)
            worst = max(worst, float(np.max(np.abs(fast.s2 - slow.s2))) / scale)
            s1_scale = float(np.max(slow.s1))
            worst = max(worst, float(np.max(np.abs(fast.s1 - slow.s1))) / s1_scale)
    elapsed = time.monotonic() - start
    assert worst <= 1e-10
    assert elapsed < 30.0
    report(1, f"max relative deviation {worst:.2e} over 800 runs in {elapsed:.1f}s")


def test_acceptance_2_constant_lrs_reduction():
    """Constant schedules reduce to the endpoint power law exactly."""
    for eta_max, total in ((2e-4, 20_000), (6e-4, 5_000)):
        spec = ScheduleSpec(
            kind="constant", total_steps=total, warmup_steps=WARMUP, eta_max=eta_max
        )
        loss = eval_curve(FIG2, compute_areas(materialize(spec)))
        chin = ChinchillaParams(
            L0=FIG2.L0, A=FIG2.A * eta_max**-FIG2.alpha, alpha=FIG2.alpha
        )
        steps = np.arange(1, total + 1)
        assert np.max(np.abs(loss - eval_chinchilla(chin, steps))) <= 1e-12

    totals = list(range(5_000, 60_001, 5_000))
    endpoints = [
        (t, predict_loss_curve(FIG2, constant_spec(t))[-1]) for t in totals
    ]
    result = fit_chinchilla(endpoints)
    assert result.r_squared >= 1 - 1e-9
    report(2, f"pointwise identity <=1e-12; endpoint fit R^2 = {result.r_squared:.12f}")


def _fig3_family_specs(total: int) -> dict[str, ScheduleSpec]:
    """The five held-out schedule families at a given horizon."""
    budget = total - WARMUP
    seg = budget // 4
    rewarm = seg // 3
    cyclic = ScheduleSpec(
        kind="cyclic",
        total_steps=total,
        warmup_steps=WARMUP,
        eta_max=ETA_MAX,
        eta_min=0.0,
        cycle_spec=(
            (0, seg),
            (rewarm, seg - rewarm),
            (rewarm, seg - rewarm),
            (rewarm, budget - 3 * seg - rewarm),
        ),
    )
    return {
        "constant": constant_spec(total),
        "cosine_min10": cosine_spec(total, total, 0.1 * ETA_MAX),
        "multi_step": ScheduleSpec(
            kind="multi_step_cosine",
            total_steps=total,
            warmup_steps=WARMUP,
            eta_max=ETA_MAX,
        ),
        "wsd20": wsd_spec(total, 0.2),
        "cyclic": cyclic,
    }


def test_acceptance_3_synthetic_round_trip():
    """Fit noisy 20K constant+cosine curves; predict five 60K families to <=1%."""
    start = time.monotonic()
    rng = np.random.default_rng(3407)
    train_specs = {
        "constant_20k": constant_spec(20_000),
        "cosine_20k": cosine_spec(20_000, 20_000, 0.0),
    }
    curves = []
    for label, spec in train_specs.items():
        truth = predict_loss_curve(FIG2, spec)
        steps = np.arange(1, spec.total_steps + 1)
        noisy = truth * np.exp(rng.normal(0.0, 0.005, size=len(steps)))
        curves.append(LossCurve(steps=steps, losses=noisy, schedule=spec, label=label))

    fit_report = fit(curves, FitConfig())
    for per_curve in fit_report.per_curve:
        assert per_curve.r_squared >= 0.999, per_curve

    errors = {}
    for name, spec in _fig3_family_specs(60_000).items():
        truth = predict_loss_curve(FIG2, spec)
        predicted = predict_loss_curve(fit_report.params, spec)
        errors[name] = float(np.mean(np.abs(predicted - truth) / truth))
        assert errors[name] <= 0.01, (name, errors[name])
    elapsed = time.monotonic() - start
    assert elapsed < 120.0
    summary = ", ".join(f"{k}={v:.3%}" for k, v in errors.items())
    report(3, f"train R^2 >= 0.999; held-out errors {summary}; {elapsed:.0f}s")


def test_acceptance_4_reduction_experiment():
    """Seeded 1000-tuple reduction: mean R^2 >= 0.95, mean Huber <= 5e-4."""
    start = time.monotonic()
    rep = reduction_experiment(1000, seed=42)
    elapsed = time.monotonic() - start
    for family in ("cosine", "wsd"):
        stats = rep.per_lrs[family]
        assert stats.mean_r2 >= 0.95, (family, stats)
        assert stats.mean_huber <= 5e-4, (family, stats)
    assert elapsed < 300.0
    text = "; ".join(
        f"{f}: R^2 {rep.per_lrs[f].mean_r2:.4f}±{rep.per_lrs[f].std_r2:.4f}, "
        f"huber {rep.per_lrs[f].mean_huber:.2e}"
        for f in ("cosine", "wsd")
    )
    report(4, f"{text}; {elapsed:.0f}s")


def test_acceptance_5_cost_table():
    """P=100 cost table reproduces 5050K, 21.6% at r=0.2, 11.8% at r=0.1."""
    rows = {(r.method, r.lrs): r for r in cost_table(100, [0.2, 0.1])}
    assert rows[("chinchilla", "cosine")].total_steps_k == 5050
    assert round(rows[("chinchilla", "wsd_0.2")].percent, 1) == 21.6
    assert round(rows[("chinchilla", "wsd_0.1")].percent, 1) == 11.8
    report(5, "5050K baseline; 21.6% at r=0.2; 11.8% at r=0.1")


def test_acceptance_6_qualitative_conclusions():
    """Six qualitative schedule-design conclusions under the reference params."""
    # (a) cosine sweep: best cell is a full-length cycle annealed to zero.
    sweep = sweep_cosine(FIG2, 60_000, [0.5, 1.0, 2.0], [0.0, 0.1])
    best = sweep.axis[sweep.argmin_index]
    assert best["cycle_factor"] == 1.0 and best["min_lr_frac"] == 0.0

    # (b) constant wins at small totals, loses at large ones, with a crossover.
    totals = [2_000, 5_000, 10_000, 20_000, 50_000, 100_000]
    cross = crossover_constant_cosine(FIG2, totals)
    diff = cross.constant.final_losses - cross.cosine.final_losses
    assert diff[0] < 0 and diff[-1] > 0
    assert np.any(np.diff(np.sign(diff)) != 0)

    # (c) WSD ratio sweeps are unimodal with interior minima.
    ratios = [0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6]
    wsd = sweep_wsd(FIG2, [20_000, 60_000], ratios)
    for block_idx in range(2):
        block = wsd.final_losses[block_idx * len(ratios) : (block_idx + 1) * len(ratios)]
        k = int(np.argmin(block))
        assert 0 < k < len(ratios) - 1
        assert np.all(np.diff(block[: k + 1]) < 0) and np.all(np.diff(block[k:]) > 0)

    # (d) 1-sqrt beats cosine annealing at a 10% ratio and loses at 50%.
    fns = compare_anneal_fns(FIG2, 50_000, [0.1, 0.5], ["one_sqrt", "cosine"])
    cell = {
        (c["anneal_fn"], c["anneal_ratio"]): l
        for c, l in zip(fns.axis, fns.final_losses)
    }
    assert cell[("one_sqrt", 0.1)] < cell[("cosine", 0.1)]
    assert cell[("cosine", 0.5)] < cell[("one_sqrt", 0.5)]

    # (e) higher re-warmup peak -> higher predicted loss bump.
    continuation = cosine_spec(30_000, 30_000, 0.0, eta_max=4e-4, warmup=0)
    peaks = cpt_predict(FIG2, 20_000, [1e-4, 2e-4, 4e-4], [500], continuation)
    bumps = [float(np.max(c.loss[c.rewarm_start :])) for c in peaks]
    assert bumps[0] < bumps[1] < bumps[2]

    # (f) re-warmup length {100, 500, 2000} changes the final loss by < 0.5%.
    lengths = cpt_predict(FIG2, 20_000, [2e-4], [100, 500, 2000], continuation)
    finals = np.array([c.loss[-1] for c in lengths])
    assert (finals.max() - finals.min()) / finals.min() < 0.005

    report(6, "cosine optimum, crossover, WSD unimodality, annealing-fn flip, CPT peaks/steps")


def test_acceptance_7_gradient_correctness():
    """Analytic objective gradients match central differences to 1e-6."""
    rng = np.random.default_rng(777)
    specs = (constant_spec(2_000, warmup=100), cosine_spec(2_000, 2_000, 0.0, warmup=100))
    curves = []
    for i, spec in enumerate(specs):
        truth = predict_loss_curve(FIG2, spec)
        steps = np.arange(1, 2_001, 5)
        noisy = truth[steps - 1] * np.exp(rng.normal(0.0, 0.005, size=len(steps)))
        curves.append(LossCurve(steps=steps, losses=noisy, schedule=spec, label=f"g{i}"))
    cfg = FitConfig()

    worst = 0.0
    for _ in range(100):
        point = LawParams(
            L0=rng.uniform(1.0, 3.0),
            A=rng.uniform(0.3, 1.0),
            C=rng.uniform(0.2, 0.6),
            alpha=rng.uniform(0.4, 0.6),
        )
        grads = objective_gradient(point, curves, cfg)
        for name in ("L0", "A", "C", "alpha"):
            value = getattr(point, name)
            h = 1e-6 * value
            hi = dataclasses.replace(point, **{name: value + h})
            lo = dataclasses.replace(point, **{name: value - h})
            fd = (objective(hi, curves, cfg) - objective(lo, curves, cfg)) / (2 * h)
            rel = abs(fd - grads[name]) / max(abs(grads[name]), 1e-12)
            worst = max(worst, rel)
            assert rel <= 1e-6, (name, point, rel)
    report(7, f"100 random points; worst relative deviation {worst:.2e}")


def test_acceptance_8_lambda_sensitivity():
    """A larger decay factor favors a strictly larger optimal WSD ratio."""
    ratios = [round(r, 2) for r in np.arange(0.01, 0.81, 0.01)]
    best = {}
    for lam in (0.99, 0.999):
        sweep = sweep_wsd(FIG2, [20_000], ratios, lambda_=lam)
        best[lam] = sweep.axis[sweep.argmin_index]["anneal_ratio"]
    assert best[0.999] > best[0.99]
    report(8, f"optimal ratio {best[0.999]:.2f} (lambda=0.999) > {best[0.99]:.2f} (lambda=0.99)")

"""Fit the loss-curve law to two short runs, then predict longer unseen ones.

Synthesizes noisy "observed" curves for a constant and a cosine schedule at
20K steps from a known parameter tuple, fits the law (Huber on log residuals,
multi-start L-BFGS), and predicts five held-out 60K-step schedule families,
reporting prediction error against the noiseless ground truth.

Run:  python demos/02_fit_and_predict.py
"""

import numpy as np

from anneal_law import FitConfig, LawParams, LossCurve, fit, predict_loss_curve
from anneal_law.analysis import constant_spec, cosine_spec, wsd_spec
from anneal_law.schedule import ScheduleSpec

TRUE_PARAMS = LawParams(L0=2.628, A=0.429, C=0.411, alpha=0.550)
NOISE_SIGMA = 0.005

rng = np.random.default_rng(7)
train_specs = {
    "constant-20k": constant_spec(20_000),
    "cosine-20k": cosine_spec(20_000, 20_000, 0.0),
}

curves = []
for label, spec in train_specs.items():
    truth = predict_loss_curve(TRUE_PARAMS, spec)
    steps = np.arange(1, spec.total_steps + 1, 5)
    observed = truth[steps - 1] * np.exp(rng.normal(0, NOISE_SIGMA, len(steps)))
    curves.append(LossCurve(steps=steps, losses=observed, schedule=spec, label=label))

report = fit(curves, FitConfig())
print("fitted parameters (true values in parentheses):")
for name in ("L0", "A", "C", "alpha"):
    fitted = getattr(report.params, name)
    print(f"  {name:<6} {fitted:.4f}   ({getattr(TRUE_PARAMS, name)})")
print(f"training R^2 = {report.r_squared:.6f}, objective = {report.objective:.3e}")

held_out = {
    "constant-60k": constant_spec(60_000),
    "cosine-60k (min 10%)": cosine_spec(60_000, 60_000, 0.1 * 2e-4),
    "multi-step-60k": ScheduleSpec(
        kind="multi_step_cosine", total_steps=60_000, warmup_steps=500, eta_max=2e-4
    ),
    "wsd-60k (20%)": wsd_spec(60_000, 0.2),
}

print("\nheld-out 60K-step predictions:")
for label, spec in held_out.items():
    truth = predict_loss_curve(TRUE_PARAMS, spec)
    pred = predict_loss_curve(report.params, spec)
    err = np.mean(np.abs(pred - truth) / truth)
    print(
        f"  {label:<22} final true {truth[-1]:.4f}  predicted {pred[-1]:.4f}  "
        f"mean rel err {err:.3%}"
    )

"""Parameter estimation for the loss-curve law.

Fitting minimizes a Huber loss on log residuals, ``huber_delta(log(pred) -
log(observed))`` summed over every sampled step of every curve, with L-BFGS
in log-parameter space (which keeps all constants strictly positive) started
from a grid of initial points.  Gradients are analytic.

``fit_chinchilla`` applies the same machinery to the endpoint power law
``L0 + A * d**(-alpha)``.
"""

from __future__ import annotations

import itertools
import math
import os
import warnings as _warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .areas import AreaConfig, compute_areas
from .law import ChinchillaParams, LawParams
from .schedule import ScheduleSpec, materialize

VARIANTS = ("base", "lr_weighted", "zeta")

# Default multi-start grid; brackets the parameter magnitudes seen in
# practice for LM loss curves.
DEFAULT_INIT_GRID: tuple[LawParams, ...] = tuple(
    LawParams(L0=l0, A=a, C=c, alpha=al)
    for l0, a, c, al in itertools.product(
        (1.5, 2.5, 3.5), (0.3, 1.0), (0.2, 0.6), (0.4, 0.7)
    )
)

# Below this value, predictions are extended by a first-order surrogate of
# log() so the optimizer keeps a consistent restoring gradient instead of
# blowing up on non-positive predictions.
_PRED_FLOOR = 1e-6

_THETA_CLIP = 40.0


class FitNonConvergence(RuntimeError):
    """No optimizer start converged; ``report`` holds the best attempt."""

    def __init__(self, message: str, report: "FitReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class LossCurve:
    """Observed (step, loss) samples aligned with a schedule spec."""

    steps: np.ndarray
    losses: np.ndarray
    schedule: ScheduleSpec
    n: float | None = None
    label: str = ""

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=np.int64)
        losses = np.asarray(self.losses, dtype=float)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "losses", losses)
        if steps.shape != losses.shape or steps.ndim != 1 or len(steps) == 0:
            raise ValueError("steps and losses must be equal-length 1-D arrays")
        if np.any(np.diff(steps) <= 0):
            raise ValueError("steps must be strictly increasing")
        if steps[0] < 1 or steps[-1] > self.schedule.total_steps:
            raise ValueError("sampled steps must lie in [1, schedule.total_steps]")
        if not np.all(np.isfinite(losses)) or np.any(losses <= 0):
            raise ValueError("losses must be finite and > 0")
        if self.n is not None and not (self.n > 0):
            raise ValueError("n must be > 0 when present")

    def __len__(self) -> int:
        return len(self.steps)

    @classmethod
    def from_samples(cls, samples, schedule: ScheduleSpec, **kwargs) -> "LossCurve":
        pairs = list(samples)
        steps = np.array([s for s, _ in pairs], dtype=np.int64)
        losses = np.array([l for _, l in pairs], dtype=float)
        return cls(steps=steps, losses=losses, schedule=schedule, **kwargs)


@dataclass(frozen=True)
class FitConfig:
    """Fitting knobs.

    ``lambda_`` is a fixed hyper-parameter of the area computation, not a
    fitted constant.  ``variant`` selects the law flavor: ``base``,
    ``lr_weighted`` (fits an LR-weight exponent on the annealing area), or
    ``zeta`` (fits an exponent on S2; requires S2 >= 0 everywhere).
    """

    delta: float = 1e-3
    lambda_: float = 0.999
    init_grid: tuple[LawParams, ...] = DEFAULT_INIT_GRID
    max_iterations: int = 1000
    fit_extension: bool = False
    variant: str = "base"
    stride: int = 1

    def __post_init__(self):
        if not (self.delta > 0):
            raise ValueError("delta must be > 0")
        if not self.init_grid:
            raise ValueError("init_grid must be non-empty")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class CurveMetrics:
    label: str
    r_squared: float
    mean_rel_error: float


@dataclass(frozen=True)
class FitReport:
    """Result of a fit: best parameters plus goodness-of-fit diagnostics."""

    params: LawParams
    objective: float
    r_squared: float
    mean_rel_error: float
    per_curve: tuple[CurveMetrics, ...]
    starts_tried: int
    converged: bool
    epsilon: float = 0.0
    unconstrained: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "objective": self.objective,
            "r_squared": self.r_squared,
            "mean_rel_error": self.mean_rel_error,
            "per_curve": [
                {
                    "label": m.label,
                    "r_squared": m.r_squared,
                    "mean_rel_error": m.mean_rel_error,
                }
                for m in self.per_curve
            ],
            "starts_tried": self.starts_tried,
            "converged": self.converged,
            "epsilon": self.epsilon,
            "unconstrained": list(self.unconstrained),
            "notes": list(self.notes),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FitReport":
        return cls(
            params=LawParams.from_dict(doc["params"]),
            objective=doc["objective"],
            r_squared=doc["r_squared"],
            mean_rel_error=doc["mean_rel_error"],
            per_curve=tuple(
                CurveMetrics(m["label"], m["r_squared"], m["mean_rel_error"])
                for m in doc.get("per_curve", [])
            ),
            starts_tried=doc.get("starts_tried", 0),
            converged=doc.get("converged", True),
            epsilon=doc.get("epsilon", 0.0),
            unconstrained=tuple(doc.get("unconstrained", ())),
            notes=tuple(doc.get("notes", ())),
            config=doc.get("config", {}),
        )


def huber(r, delta: float):
    """Huber loss: quadratic within ``|r| <= delta``, linear outside."""
    if not (delta > 0):
        raise ValueError("delta must be > 0")
    r_arr = np.asarray(r, dtype=float)
    a = np.abs(r_arr)
    out = np.where(a <= delta, 0.5 * r_arr**2, delta * (a - 0.5 * delta))
    return float(out) if np.ndim(r) == 0 else out


def _huber_psi(r: np.ndarray, delta: float) -> np.ndarray:
    """d huber / d r."""
    return np.where(np.abs(r) <= delta, r, delta * np.sign(r))


# ---------------------------------------------------------------------------
# Curve preparation
# ---------------------------------------------------------------------------


@dataclass
class _Prepared:
    label: str
    loss: np.ndarray
    log_loss: np.ndarray
    steps: np.ndarray
    s1: np.ndarray
    ln_s1: np.ndarray
    s2: np.ndarray
    n: float | None
    # Full-length series, kept only when the LR-weighted variant refits S2
    # for each epsilon.
    idx: np.ndarray | None = None
    m_full: np.ndarray | None = None
    eta_full: np.ndarray | None = None


def _prepare(curves, config: FitConfig) -> list[_Prepared]:
    keep_full = config.variant == "lr_weighted"
    prepared = []
    for curve in curves:
        series = materialize(curve.schedule)
        areas = compute_areas(series, AreaConfig(lambda_=config.lambda_))
        steps = curve.steps[:: config.stride]
        losses = curve.losses[:: config.stride]
        idx = steps - 1
        s1 = areas.s1[idx]
        prepared.append(
            _Prepared(
                label=curve.label,
                loss=losses,
                log_loss=np.log(losses),
                steps=steps,
                s1=s1,
                ln_s1=np.log(s1),
                s2=areas.s2[idx],
                n=curve.n,
                idx=idx if keep_full else None,
                m_full=areas.momentum if keep_full else None,
                eta_full=series.area_etas if keep_full else None,
            )
        )
    return prepared


def _param_names(config: FitConfig) -> list[str]:
    names = ["L0", "A", "C", "alpha"]
    if config.fit_extension:
        names += ["B", "beta", "gamma"]
    if config.variant == "zeta":
        names.append("zeta")
    elif config.variant == "lr_weighted":
        names.append("epsilon")
    return names


_EXT_DEFAULTS = {"B": 400.0, "beta": 0.34, "gamma": 0.1}
_VARIANT_DEFAULTS = {"zeta": 1.0, "epsilon": 0.05}


def _pack(params: LawParams, config: FitConfig) -> np.ndarray:
    vals = []
    for name in _param_names(config):
        if name == "epsilon":
            vals.append(_VARIANT_DEFAULTS["epsilon"])
        elif name in _EXT_DEFAULTS:
            v = getattr(params, name)
            vals.append(v if v is not None else _EXT_DEFAULTS[name])
        else:
            vals.append(getattr(params, name))
    return np.log(np.asarray(vals, dtype=float))


def _unpack(theta: np.ndarray, config: FitConfig) -> tuple[LawParams, float]:
    vals = dict(zip(_param_names(config), np.exp(theta)))
    epsilon = vals.pop("epsilon", 0.0)
    return LawParams(**vals), epsilon


# ---------------------------------------------------------------------------
# Objective and analytic gradient
# ---------------------------------------------------------------------------


def _safe_log(x: np.ndarray) -> np.ndarray:
    # First-order extension below the floor keeps value/gradient consistent
    # for the optimizer when a trial point predicts near-zero loss.
    clipped = np.maximum(x, _PRED_FLOOR)
    return np.log(clipped) + (x - clipped) / _PRED_FLOOR


def _core(vals: dict, epsilon: float, prepared: list[_Prepared], delta: float):
    """Objective value and linear-space gradient of the Huber-log objective.

    Returns (value, grads, min_prediction); grads maps parameter name to
    dF/d(param).
    """
    L0, A, C, alpha = vals["L0"], vals["A"], vals["C"], vals["alpha"]
    ext = "B" in vals
    zeta = vals.get("zeta")
    grads = {name: 0.0 for name in vals}
    if "epsilon" in grads or epsilon:
        grads["epsilon"] = 0.0
    total = 0.0
    min_pred = np.inf

    for p in prepared:
        pow1 = np.exp(-alpha * p.ln_s1)
        if epsilon:
            eta = p.eta_full
            w = np.where(eta > 0, np.power(np.maximum(eta, 1e-300), epsilon), 0.0)
            lnw = np.where(eta > 0, np.log(np.maximum(eta, 1e-300)), 0.0)
            t2 = np.cumsum(p.m_full * w)[p.idx]
            dt2_deps = np.cumsum(p.m_full * w * lnw)[p.idx]
        else:
            t2 = p.s2
            dt2_deps = None
        if zeta is not None:
            base_t2 = t2
            t2 = np.where(base_t2 > 0, np.power(np.maximum(base_t2, 1e-300), zeta), 0.0)
            ln_t2 = np.where(base_t2 > 0, np.log(np.maximum(base_t2, 1e-300)), 0.0)
        else:
            ln_t2 = None

        if ext:
            n = p.n
            lnn = math.log(n)
            nb = n ** -vals["beta"]
            ng = n ** vals["gamma"]
        else:
            nb = ng = 1.0
            lnn = 0.0

        pred = L0 + A * pow1 - C * ng * t2
        if ext:
            pred = pred + vals["B"] * nb
        min_pred = min(min_pred, float(np.min(pred)))

        r = _safe_log(pred) - p.log_loss
        total += float(np.sum(huber(r, delta)))
        u = _huber_psi(r, delta) / np.maximum(pred, _PRED_FLOOR)

        grads["L0"] += float(np.sum(u))
        grads["A"] += float(np.sum(u * pow1))
        grads["alpha"] += float(np.sum(u * (-A * p.ln_s1 * pow1)))
        grads["C"] += float(np.sum(u * (-ng * t2)))
        if ext:
            grads["B"] += float(np.sum(u)) * nb
            grads["beta"] += float(np.sum(u)) * (-vals["B"] * lnn * nb)
            grads["gamma"] += float(np.sum(u * (-C * t2))) * ng * lnn
        if ln_t2 is not None:
            grads["zeta"] += float(np.sum(u * (-C * ng * t2 * ln_t2)))
        if dt2_deps is not None:
            grads["epsilon"] += float(np.sum(u * (-C * ng * dt2_deps)))
    return total, grads, min_pred


def _theta_objective(theta: np.ndarray, prepared, config: FitConfig):
    theta = np.clip(theta, -_THETA_CLIP, _THETA_CLIP)
    names = _param_names(config)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        vals = dict(zip(names, np.exp(theta)))
        epsilon = vals.pop("epsilon", 0.0)
        value, grads, _ = _core(vals, epsilon, prepared, config.delta)
        g = np.array(
            [
                grads[name] * (epsilon if name == "epsilon" else vals[name])
                for name in names
            ]
        )
    if not np.isfinite(value) or not np.all(np.isfinite(g)):
        return 1e30, np.zeros_like(theta)
    return value, g


def objective(params: LawParams, curves, config: FitConfig | None = None) -> float:
    """Summed Huber loss of log residuals over all curves.

    Returns ``inf`` (with a warning naming the offending step) when any
    prediction is non-positive.
    """
    config = config or FitConfig()
    prepared = _prepare(curves, config)
    vals = {"L0": params.L0, "A": params.A, "C": params.C, "alpha": params.alpha}
    if config.fit_extension:
        vals.update({"B": params.B, "beta": params.beta, "gamma": params.gamma})
    if config.variant == "zeta":
        vals["zeta"] = params.zeta
    value, _, min_pred = _core(vals, 0.0, prepared, config.delta)
    if min_pred <= 0:
        step = _first_nonpositive_step(vals, prepared)
        _warnings.warn(f"non-positive prediction at step {step}")
        return math.inf
    return value


def objective_gradient(params: LawParams, curves, config: FitConfig | None = None) -> dict:
    """Analytic gradient of :func:`objective` with respect to each parameter."""
    config = config or FitConfig()
    prepared = _prepare(curves, config)
    vals = {"L0": params.L0, "A": params.A, "C": params.C, "alpha": params.alpha}
    if config.fit_extension:
        vals.update({"B": params.B, "beta": params.beta, "gamma": params.gamma})
    if config.variant == "zeta":
        vals["zeta"] = params.zeta
    _, grads, min_pred = _core(vals, 0.0, prepared, config.delta)
    if min_pred <= 0:
        raise ValueError("gradient undefined: non-positive prediction")
    return grads


def _first_nonpositive_step(vals: dict, prepared) -> int:
    for p in prepared:
        pred = (
            vals["L0"]
            + vals["A"] * np.exp(-vals["alpha"] * p.ln_s1)
            - vals["C"] * p.s2
        )
        bad = np.nonzero(pred <= 0)[0]
        if len(bad):
            return int(p.steps[bad[0]])
    return -1


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


def max_workers() -> int:
    """Parallelism cap from the ANNEAL_LAW_THREADS environment variable."""
    return max(1, int(os.environ.get("ANNEAL_LAW_THREADS", "1")))


def _run_start(payload) -> tuple[float, np.ndarray, bool]:
    theta0, prepared, config = payload
    res = minimize(
        _theta_objective,
        theta0,
        args=(prepared, config),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": config.max_iterations, "ftol": 1e-15, "gtol": 1e-12},
    )
    return float(res.fun), res.x, bool(res.success)


def fit(curves, config: FitConfig | None = None) -> FitReport:
    """Estimate law parameters from one or more observed loss curves.

    Runs L-BFGS from every start in ``config.init_grid`` and keeps the best
    objective (ties broken by lowest start index).  Raises
    :class:`FitNonConvergence` carrying the best-so-far report if no start
    converges.
    """
    config = config or FitConfig()
    curves = list(curves)
    if not curves:
        raise ValueError("need at least one loss curve")
    if max(len(c) for c in curves) < 50:
        raise ValueError("need at least one curve with >= 50 samples")
    if config.fit_extension:
        ns = {c.n for c in curves}
        if None in ns or len(ns) < 2:
            raise ValueError("extension fit requires >= 2 distinct model sizes n")

    prepared = _prepare(curves, config)
    if config.variant == "zeta" and any(np.any(p.s2 < 0) for p in prepared):
        raise ValueError("zeta variant undefined for negative S2")

    notes: list[str] = []
    unconstrained: list[str] = []
    if all(np.max(np.abs(p.s2)) == 0 for p in prepared):
        unconstrained.append("C")
        notes.append("S2 is identically zero; C is unconstrained by the data")
    for p in prepared:
        if np.ptp(p.loss) == 0:
            notes.append(f"curve {p.label!r} has constant loss (ill-conditioned)")

    payloads = [
        (_pack(start, config), prepared, config) for start in config.init_grid
    ]
    workers = max_workers()
    if workers > 1 and len(payloads) > 1:
        # Starts are independent; results are merged deterministically below.
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_start, payloads))
    else:
        outcomes = [_run_start(p) for p in payloads]

    best = None  # (objective, start_index, theta, success)
    any_success = False
    for start_idx, (fun, theta, success) in enumerate(outcomes):
        any_success = any_success or success
        candidate = (fun, start_idx, theta, success)
        if best is None or candidate[:2] < best[:2]:
            best = candidate
    assert best is not None

    params, epsilon = _unpack(np.clip(best[2], -_THETA_CLIP, _THETA_CLIP), config)
    report = _build_report(
        params, epsilon, prepared, config, best[0], best[3], len(config.init_grid),
        tuple(unconstrained), tuple(notes),
    )
    if not any_success:
        raise FitNonConvergence("no optimizer start converged", report)
    return report


def _predict_prepared(params: LawParams, epsilon: float, p: _Prepared) -> np.ndarray:
    if epsilon:
        eta = p.eta_full
        w = np.where(eta > 0, np.power(np.maximum(eta, 1e-300), epsilon), 0.0)
        t2 = np.cumsum(p.m_full * w)[p.idx]
    else:
        t2 = p.s2
    if params.zeta != 1.0:
        t2 = np.where(t2 > 0, np.power(np.maximum(t2, 1e-300), params.zeta), 0.0)
    pred = params.L0 + params.A * np.exp(-params.alpha * p.ln_s1) - params.C * t2
    if params.has_extension and p.n is not None:
        pred = pred + params.B * p.n**-params.beta
        pred = pred - params.C * t2 * (p.n**params.gamma - 1.0)
    return pred


def _build_report(
    params, epsilon, prepared, config, objective_value, converged, starts,
    unconstrained, notes,
) -> FitReport:
    per_curve = []
    all_loss, all_pred = [], []
    for p in prepared:
        pred = _predict_prepared(params, epsilon, p)
        r2, mre = _r2_mre(pred, p.loss)
        per_curve.append(CurveMetrics(p.label, r2, mre))
        all_loss.append(p.loss)
        all_pred.append(pred)
    loss = np.concatenate(all_loss)
    pred = np.concatenate(all_pred)
    r2, mre = _r2_mre(pred, loss)
    return FitReport(
        params=params,
        objective=float(objective_value),
        r_squared=r2,
        mean_rel_error=mre,
        per_curve=tuple(per_curve),
        starts_tried=starts,
        converged=converged,
        epsilon=float(epsilon),
        unconstrained=unconstrained,
        notes=notes,
        config={
            "delta": config.delta,
            "lambda": config.lambda_,
            "variant": config.variant,
            "fit_extension": config.fit_extension,
            "stride": config.stride,
        },
    )


def _r2_mre(pred: np.ndarray, obs: np.ndarray) -> tuple[float, float]:
    ss_res = float(np.sum((obs - pred) ** 2))
    ss_tot = float(np.sum((obs - np.mean(obs)) ** 2))
    r2 = math.nan if ss_tot == 0 else 1.0 - ss_res / ss_tot
    mre = float(np.mean(np.abs(pred - obs) / obs))
    return r2, mre


def metrics(predicted, observed: LossCurve) -> tuple[float, float]:
    """(R^2, mean relative error) of predictions against an observed curve.

    ``predicted`` must align with ``observed.steps``.  R^2 is NaN when the
    observed losses have zero variance.
    """
    pred = np.asarray(predicted, dtype=float)
    if pred.shape != observed.losses.shape:
        raise ValueError("predicted must align with observed samples")
    return _r2_mre(pred, observed.losses)


# ---------------------------------------------------------------------------
# Endpoint power-law fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChinchillaFit:
    """Endpoint power-law fit result; ``huber`` is the mean per-point loss."""

    params: ChinchillaParams
    r_squared: float
    huber: float
    objective: float
    converged: bool


def _chinchilla_objective(theta, d_ln, log_loss, delta):
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        l0, a, alpha = np.exp(np.clip(theta, -_THETA_CLIP, _THETA_CLIP))
        pow_d = np.exp(-alpha * d_ln)
        pred = l0 + a * pow_d
        r = _safe_log(pred) - log_loss
        value = float(np.sum(huber(r, delta)))
        u = _huber_psi(r, delta) / np.maximum(pred, _PRED_FLOOR)
        g = np.array(
            [
                float(np.sum(u)) * l0,
                float(np.sum(u * pow_d)) * a,
                float(np.sum(u * (-a * d_ln * pow_d))) * alpha,
            ]
        )
    if not np.isfinite(value) or not np.all(np.isfinite(g)):
        return 1e30, np.zeros(3)
    return value, g


def fit_chinchilla(endpoints, delta: float = 1e-3) -> ChinchillaFit:
    """Fit ``L0 + A * d**(-alpha)`` to (data size, final loss) endpoints.

    Uses the same Huber/log/multi-start approach as :func:`fit`, with
    data-driven starting points.  Requires at least three endpoints with
    strictly increasing ``d``.
    """
    pairs = [(float(d), float(l)) for d, l in endpoints]
    if len(pairs) < 3:
        raise ValueError("need at least 3 endpoints")
    d = np.array([p[0] for p in pairs])
    loss = np.array([p[1] for p in pairs])
    if np.any(d <= 0) or np.any(np.diff(d) <= 0):
        raise ValueError("d must be positive and strictly increasing")
    if np.any(loss <= 0):
        raise ValueError("losses must be > 0")

    d_ln = np.log(d)
    log_loss = np.log(loss)
    lmin = float(np.min(loss))

    starts = []
    for f in (0.5, 0.9, 0.99):
        l0 = lmin * f
        for alpha in (0.3, 0.5, 0.7):
            a = max((loss[0] - l0) * d[0] ** alpha, 1e-8)
            starts.append(np.log([l0, a, alpha]))

    best = None
    any_success = False
    for idx, theta0 in enumerate(starts):
        res = minimize(
            _chinchilla_objective,
            theta0,
            args=(d_ln, log_loss, delta),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-12},
        )
        any_success = any_success or bool(res.success)
        cand = (float(res.fun), idx, res.x, bool(res.success))
        if best is None or cand[:2] < best[:2]:
            best = cand
        if best[0] < 1e-14:
            break

    l0, a, alpha = np.exp(np.clip(best[2], -_THETA_CLIP, _THETA_CLIP))
    pred = l0 + a * np.power(d, -alpha)
    r2, _ = _r2_mre(pred, loss)
    return ChinchillaFit(
        params=ChinchillaParams(L0=float(l0), A=float(a), alpha=float(alpha)),
        r_squared=r2,
        huber=best[0] / len(pairs),
        objective=best[0],
        converged=any_success,
    )

"""Schedule studies built on the loss-curve law.

Everything here evaluates an already-fitted law over families of candidate
schedules: grid sweeps over cosine cycle length and minimum LR, the
constant-vs-cosine crossover, WSD annealing-ratio and annealing-function
sweeps, continual-pretraining re-warmup what-ifs, a statistical check that
endpoint losses reduce to the endpoint power law, and the compute-cost
comparison for collecting power-law fitting points.

Defaults (eta_max 2e-4, 500 warmup steps, decay factor 0.999) mirror the
conventions used elsewhere in the package; every grid is overridable.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .areas import AreaConfig, compute_areas
from .fit import fit_chinchilla, max_workers
from .law import LawParams, crossover_s1, eval_curve
from .schedule import LRSeries, ScheduleSpec, materialize, _write_csv

DEFAULT_ETA_MAX = 2e-4
DEFAULT_WARMUP = 500
DEFAULT_LAMBDA = 0.999


# ---------------------------------------------------------------------------
# Spec builders
# ---------------------------------------------------------------------------


def cosine_spec(
    total: int,
    cycle: int | None = None,
    eta_min: float = 0.0,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
) -> ScheduleSpec:
    return ScheduleSpec(
        kind="cosine",
        total_steps=total,
        warmup_steps=warmup,
        eta_max=eta_max,
        eta_min=eta_min,
        cycle_T=cycle if cycle is not None else total,
    )


def wsd_spec(
    total: int,
    anneal_ratio: float,
    anneal_fn: str = "cosine",
    eta_min: float = 0.0,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
) -> ScheduleSpec:
    """WSD schedule annealing over the final ``anneal_ratio`` of total steps.

    ``anneal_ratio`` close to 1 clamps the stable phase to the warmup
    boundary, which degenerates into a plain cosine-style anneal over every
    post-warmup step.
    """
    anneal_steps = max(1, round(anneal_ratio * total))
    stable_end = max(warmup, total - anneal_steps)
    return ScheduleSpec(
        kind="wsd",
        total_steps=total,
        warmup_steps=warmup,
        eta_max=eta_max,
        eta_min=eta_min,
        stable_end=stable_end,
        anneal_fn=anneal_fn,
    )


def constant_spec(
    total: int, eta_max: float = DEFAULT_ETA_MAX, warmup: int = DEFAULT_WARMUP
) -> ScheduleSpec:
    return ScheduleSpec(
        kind="constant", total_steps=total, warmup_steps=warmup, eta_max=eta_max
    )


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    """Final predicted losses over a grid of schedule configurations."""

    axis: tuple[dict, ...]
    final_losses: np.ndarray
    argmin_index: int
    full_curves: tuple[np.ndarray, ...] | None = None
    per_group_argmin: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "axis": list(self.axis),
            "final_losses": [float(v) for v in self.final_losses],
            "argmin_index": self.argmin_index,
        }
        if self.per_group_argmin is not None:
            out["per_group_argmin"] = {str(k): v for k, v in self.per_group_argmin.items()}
        return out

    def to_csv(self, path_or_buf) -> None:
        keys = sorted(self.axis[0].keys())
        rows = (
            [cell[k] for k in keys] + [float(loss)]
            for cell, loss in zip(self.axis, self.final_losses)
        )
        _write_csv(path_or_buf, ",".join(keys + ["final_loss"]), rows)


def _sweep(params, specs, descriptors, lambda_, include_curves) -> SweepResult:
    finals = np.empty(len(specs))
    curves = [] if include_curves else None
    for i, spec in enumerate(specs):
        loss = predict(params, spec, lambda_)
        finals[i] = loss[-1]
        if curves is not None:
            curves.append(loss)
    return SweepResult(
        axis=tuple(descriptors),
        final_losses=finals,
        argmin_index=int(np.argmin(finals)),
        full_curves=tuple(curves) if curves is not None else None,
    )


def predict(params: LawParams, spec: ScheduleSpec, lambda_: float = DEFAULT_LAMBDA):
    areas = compute_areas(materialize(spec), AreaConfig(lambda_=lambda_))
    return eval_curve(params, areas)


def decompose(
    params: LawParams, spec: ScheduleSpec, lambda_: float = DEFAULT_LAMBDA
) -> tuple[np.ndarray, np.ndarray]:
    """Per-step (S1 term, negative S2 term); their sum plus L0 is the loss."""
    areas = compute_areas(materialize(spec), AreaConfig(lambda_=lambda_))
    s1_term = params.A * np.power(areas.s1, -params.alpha)
    s2_term = -params.C * areas.s2
    return s1_term, s2_term


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def sweep_cosine(
    params: LawParams,
    total: int,
    cycle_factors,
    min_lr_fracs,
    *,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
    lambda_: float = DEFAULT_LAMBDA,
    include_curves: bool = False,
) -> SweepResult:
    """Final loss over a grid of cosine cycle lengths and minimum LRs."""
    specs, cells = [], []
    for factor in cycle_factors:
        if factor <= 0:
            raise ValueError("cycle factors must be > 0")
        cycle = max(int(round(factor * total)), warmup + 1)
        for frac in min_lr_fracs:
            specs.append(cosine_spec(total, cycle, frac * eta_max, eta_max, warmup))
            cells.append(
                {
                    "cycle_factor": float(factor),
                    "min_lr_frac": float(frac),
                    "cycle_T": cycle,
                    "eta_min": frac * eta_max,
                }
            )
    return _sweep(params, specs, cells, lambda_, include_curves)


@dataclass(frozen=True)
class CrossoverResult:
    """Constant-vs-cosine final losses over totals, plus the analytic
    forward-area crossover where annealing starts to win."""

    constant: SweepResult
    cosine: SweepResult
    s1_star: float

    def to_dict(self) -> dict:
        return {
            "constant": self.constant.to_dict(),
            "cosine": self.cosine.to_dict(),
            "s1_star": self.s1_star,
        }


def crossover_constant_cosine(
    params: LawParams,
    totals,
    *,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
    lambda_: float = DEFAULT_LAMBDA,
) -> CrossoverResult:
    totals = list(totals)
    if any(b <= a for a, b in zip(totals, totals[1:])):
        raise ValueError("totals must be increasing")
    const_specs = [constant_spec(t, eta_max, warmup) for t in totals]
    cos_specs = [cosine_spec(t, t, 0.0, eta_max, warmup) for t in totals]
    cells = [{"total_steps": int(t)} for t in totals]
    return CrossoverResult(
        constant=_sweep(params, const_specs, cells, lambda_, False),
        cosine=_sweep(params, cos_specs, cells, lambda_, False),
        s1_star=crossover_s1(params),
    )


def sweep_wsd(
    params: LawParams,
    totals,
    ratios,
    anneal_fn: str = "cosine",
    *,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
    lambda_: float = DEFAULT_LAMBDA,
    include_curves: bool = False,
) -> SweepResult:
    """Final loss over (total steps, annealing ratio) for a WSD schedule.

    ``per_group_argmin`` maps each total to the grid index of its best ratio.
    """
    ratios = [float(r) for r in ratios]
    if any(not (0 < r <= 1) for r in ratios):
        raise ValueError("ratios must lie in (0, 1]")
    specs, cells = [], []
    for total in totals:
        for ratio in ratios:
            specs.append(wsd_spec(total, ratio, anneal_fn, 0.0, eta_max, warmup))
            cells.append({"total_steps": int(total), "anneal_ratio": ratio})
    result = _sweep(params, specs, cells, lambda_, include_curves)
    per_total = {}
    for i, total in enumerate(totals):
        block = result.final_losses[i * len(ratios) : (i + 1) * len(ratios)]
        per_total[int(total)] = i * len(ratios) + int(np.argmin(block))
    return replace(result, per_group_argmin=per_total)


def compare_anneal_fns(
    params: LawParams,
    total: int,
    ratios,
    fns,
    *,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
    lambda_: float = DEFAULT_LAMBDA,
    include_curves: bool = False,
) -> SweepResult:
    """Final loss per (annealing function, annealing ratio) at one total."""
    specs, cells = [], []
    for fn in fns:
        for ratio in ratios:
            specs.append(wsd_spec(total, ratio, fn, 0.0, eta_max, warmup))
            cells.append({"anneal_fn": fn, "anneal_ratio": float(ratio)})
    return _sweep(params, specs, cells, lambda_, include_curves)


# ---------------------------------------------------------------------------
# Continual pre-training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CptCurve:
    """Predicted curve for one (re-warmup peak, re-warmup steps) combination.

    Steps ``1..rewarm_start`` are the completed prior run; the re-warmup ramp
    occupies the next ``rewarm_steps`` steps.
    """

    peak: float
    rewarm_steps: int
    rewarm_start: int
    lr: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    loss: np.ndarray


def cpt_predict(
    params: LawParams,
    base_steps: int,
    rewarm_peaks,
    rewarm_steps,
    continuation: ScheduleSpec,
    *,
    base_spec: ScheduleSpec | None = None,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
    lambda_: float = DEFAULT_LAMBDA,
) -> list[CptCurve]:
    """Predict continual-pretraining curves for re-warmup what-ifs.

    A completed prior run (a full cosine over ``base_steps`` unless
    ``base_spec`` overrides it) is concatenated with a linear re-warmup ramp
    from the prior's final LR to each peak, followed by the continuation
    schedule (whose first ``rewarm_steps`` steps the ramp replaces).  The
    annealing area goes negative during re-warmup, producing a loss bump.

    One curve is returned per (peak, rewarm_steps) combination, peaks-major.
    """
    if base_spec is None:
        base_spec = cosine_spec(base_steps, base_steps, 0.0, eta_max, warmup)
    base = materialize(base_spec)
    prior_final = float(base.etas[-1])

    out = []
    for peak in rewarm_peaks:
        if peak > continuation.eta_max:
            raise ValueError(
                "re-warmup peak exceeds the continuation spec's eta_max bound"
            )
        for rsteps in rewarm_steps:
            rsteps = int(rsteps)
            if rsteps >= continuation.total_steps:
                raise ValueError("continuation must be longer than the re-warmup")
            if rsteps > 0:
                ramp = prior_final + (peak - prior_final) * np.arange(
                    1, rsteps + 1, dtype=float
                ) / rsteps
            else:
                ramp = np.empty(0)
            cont = materialize(
                replace(continuation, eta_max=peak, warmup_steps=rsteps)
            )
            etas = np.concatenate([base.etas, ramp, cont.etas[rsteps:]])
            area_etas = np.concatenate([base.area_etas, ramp, cont.area_etas[rsteps:]])
            series = LRSeries(
                etas=etas, area_etas=area_etas, warmup_steps=base.warmup_steps
            )
            areas = compute_areas(series, AreaConfig(lambda_=lambda_))
            out.append(
                CptCurve(
                    peak=float(peak),
                    rewarm_steps=rsteps,
                    rewarm_start=len(base.etas),
                    lr=etas,
                    s1=areas.s1,
                    s2=areas.s2,
                    loss=eval_curve(params, areas),
                )
            )
    return out


# ---------------------------------------------------------------------------
# Reduction to the endpoint power law
# ---------------------------------------------------------------------------

DEFAULT_PARAM_BOX = {
    "L0": (1.0, 3.0),
    "A": (0.3, 0.5),
    "C": (0.2, 0.6),
    "alpha": (0.4, 0.6),
}
DEFAULT_REDUCTION_TOTALS = tuple(range(5_000, 60_001, 5_000))


@dataclass(frozen=True)
class ReductionStats:
    mean_r2: float
    std_r2: float
    mean_huber: float


@dataclass(frozen=True)
class ReductionReport:
    """Aggregate endpoint-power-law fit quality over sampled parameter tuples."""

    n_tuples: int
    seed: int
    per_lrs: dict[str, ReductionStats]

    def to_dict(self) -> dict:
        return {
            "n_tuples": self.n_tuples,
            "seed": self.seed,
            "per_lrs": {
                name: {
                    "mean_r2": s.mean_r2,
                    "std_r2": s.std_r2,
                    "mean_huber": s.mean_huber,
                }
                for name, s in self.per_lrs.items()
            },
        }


def _family_spec(family: str, total: int, eta_max: float, warmup: int, wsd_ratio: float):
    if family == "cosine":
        return cosine_spec(total, total, 0.0, eta_max, warmup)
    if family == "wsd":
        return wsd_spec(total, wsd_ratio, "cosine", 0.0, eta_max, warmup)
    if family == "constant":
        return constant_spec(total, eta_max, warmup)
    raise ValueError(f"unknown LRS family {family!r}")


def _reduction_fit(payload) -> tuple[float, float]:
    totals, finals = payload
    result = fit_chinchilla(zip(totals, finals))
    return result.r_squared, result.huber


def reduction_experiment(
    n: int,
    seed: int,
    dists: dict | None = None,
    lrs_list=("cosine", "wsd"),
    totals=DEFAULT_REDUCTION_TOTALS,
    *,
    eta_max: float = DEFAULT_ETA_MAX,
    warmup: int = DEFAULT_WARMUP,
    lambda_: float = DEFAULT_LAMBDA,
    wsd_ratio: float = 0.1,
) -> ReductionReport:
    """Check how well endpoint losses follow a plain power law in data size.

    Samples ``n`` parameter tuples uniformly from ``dists`` (PCG64 generator
    seeded with ``seed``; draws in L0, A, C, alpha order), predicts the final
    loss for every total in ``totals`` under each schedule family, fits the
    endpoint power law to those finals, and aggregates R^2 and the mean
    per-point Huber loss.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    dists = dists or DEFAULT_PARAM_BOX
    totals = [int(t) for t in totals]
    rng = np.random.Generator(np.random.PCG64(seed))
    samples = {
        name: rng.uniform(*dists[name], size=n) for name in ("L0", "A", "C", "alpha")
    }

    per_lrs = {}
    for family in lrs_list:
        s1f = np.empty(len(totals))
        s2f = np.empty(len(totals))
        for j, total in enumerate(totals):
            spec = _family_spec(family, total, eta_max, warmup, wsd_ratio)
            areas = compute_areas(materialize(spec), AreaConfig(lambda_=lambda_))
            s1f[j] = areas.s1[-1]
            s2f[j] = areas.s2[-1]

        payloads = [
            (
                totals,
                samples["L0"][i]
                + samples["A"][i] * s1f ** -samples["alpha"][i]
                - samples["C"][i] * s2f,
            )
            for i in range(n)
        ]
        workers = max_workers()
        if workers > 1 and n > 1:
            # Tuples are independent; map preserves order, so aggregation is
            # identical to the sequential path.
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_reduction_fit, payloads, chunksize=32))
        else:
            outcomes = [_reduction_fit(p) for p in payloads]
        r2s = np.array([o[0] for o in outcomes])
        hubers = np.array([o[1] for o in outcomes])
        per_lrs[family] = ReductionStats(
            mean_r2=float(np.mean(r2s)),
            std_r2=float(np.std(r2s)),
            mean_huber=float(np.mean(hubers)),
        )
    return ReductionReport(n_tuples=n, seed=seed, per_lrs=per_lrs)


# ---------------------------------------------------------------------------
# Compute-cost comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CostRow:
    method: str
    lrs: str
    total_steps_k: float  # in multiples of the fitting-point interval K
    percent: float


def cost_table(
    interval_points: int, wsd_ratios, our_run_steps_k: float = 50.0
) -> list[CostRow]:
    """Training steps needed to collect endpoint-fit points, by method.

    Fitting an endpoint power law from ``P = interval_points`` runs spaced at
    interval K costs ``K + 2K + ... + PK = P(P+1)/2 * K`` with a cosine
    schedule per run.  With a WSD schedule only the annealing tail (ratio
    ``r``) must be re-run per point, giving ``(P + (P(P+1)/2 - P) * r) * K``.
    Fitting the loss-curve law needs a single run (``our_run_steps_k`` in K
    units).  Percentages are relative to the cosine baseline.
    """
    if interval_points < 1:
        raise ValueError("interval_points must be >= 1")
    p = interval_points
    cosine_cost = p * (p + 1) / 2
    rows = [CostRow("chinchilla", "cosine", cosine_cost, 100.0)]
    for r in wsd_ratios:
        cost = p + (cosine_cost - p) * r
        rows.append(
            CostRow(
                "chinchilla",
                f"wsd_{r:g}",
                cost,
                100.0 * cost / cosine_cost,
            )
        )
    rows.append(
        CostRow(
            "anneal_law",
            "any",
            float(our_run_steps_k),
            100.0 * our_run_steps_k / cosine_cost,
        )
    )
    return rows

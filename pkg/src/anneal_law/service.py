"""Stateless JSON-over-HTTP API for predictions, fits, and sweeps.

The app serves a read-only table of law-parameter fits loaded at startup;
every response is a pure function of the request body and that table.
Responses carrying per-step arrays are downsampled to at most
``max_points`` entries (uniform stride, final step always included) unless
the request opts out.

Error mapping: 400 for malformed schedule specs / request bodies (with
field-level messages), 422 for law-domain errors (e.g. the S2-exponent
variant on a schedule whose S2 goes negative), 413 for requests large enough
that the CLI is the better tool.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .areas import AreaConfig, compute_areas
from .fit import FitConfig, FitNonConvergence, FitReport, LossCurve, fit
from .law import LawParams, eval_curve
from .analysis import (
    compare_anneal_fns,
    cpt_predict,
    sweep_cosine,
    sweep_wsd,
)
from .schedule import SpecError, materialize, spec_from_dict

MAX_RESPONSE_POINTS = 5_000
MAX_PREDICT_STEPS = 2_000_000
MAX_FIT_SAMPLES = 20_000
MAX_FIT_STEPS = 100_000
MAX_SWEEP_CELLS = 512
MAX_SWEEP_STEPS = 500_000

DEFAULT_LAMBDA = 0.999


@dataclass(frozen=True)
class LoadedFit:
    params: LawParams
    lambda_: float = DEFAULT_LAMBDA
    epsilon: float = 0.0
    label: str = ""


@dataclass
class ApiSession:
    """Read-only server state: fits are immutable once loaded."""

    loaded_fits: dict[str, LoadedFit]
    default_lambda: float
    version: str


def load_fits(entries) -> dict[str, LoadedFit]:
    """Load ``id=path`` (or bare path) fit-report JSONs for serving."""
    fits: dict[str, LoadedFit] = {}
    for entry in entries:
        if "=" in entry:
            fit_id, path = entry.split("=", 1)
        else:
            path = entry
            fit_id = Path(path).stem
        if fit_id in fits:
            raise ValueError(f"duplicate fit id {fit_id!r}")
        with open(path) as fh:
            report = FitReport.from_dict(json.load(fh))
        fits[fit_id] = LoadedFit(
            params=report.params,
            lambda_=report.config.get("lambda", DEFAULT_LAMBDA),
            epsilon=report.epsilon,
            label=fit_id,
        )
    return fits


# ---------------------------------------------------------------------------
# Request bodies
# ---------------------------------------------------------------------------


class _Body(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")


class PredictRequest(_Body):
    schedule_spec: dict
    fit_id: str | None = None
    params: dict | None = None
    lambda_: float | None = Field(None, alias="lambda")
    epsilon: float | None = None
    downsample: bool = True
    max_points: int = Field(MAX_RESPONSE_POINTS, ge=2)


class FitCurveBody(_Body):
    samples: list[tuple[int, float]]
    schedule_spec: dict
    label: str = ""
    n: float | None = None


class FitRequest(_Body):
    curves: list[FitCurveBody]
    config: dict = Field(default_factory=dict)


class SweepRequest(_Body):
    fit_id: str | None = None
    params: dict | None = None
    lambda_: float | None = Field(None, alias="lambda")
    eta_max: float = 2e-4
    warmup: int = 500
    # cosine
    total: int | None = None
    cycle_factors: list[float] | None = None
    min_lr_fracs: list[float] | None = None
    # wsd / anneal-fn
    totals: list[int] | None = None
    ratios: list[float] | None = None
    anneal_fn: str = "cosine"
    fns: list[str] | None = None
    # cpt
    base_steps: int | None = None
    peaks: list[float] | None = None
    rewarm_steps: list[int] | None = None
    continuation: dict | None = None


# ---------------------------------------------------------------------------
# App factory
# ---------------------------------------------------------------------------


def _downsample_indices(n: int, max_points: int) -> np.ndarray:
    stride = max(1, -(-n // max_points))  # ceil division
    idx = np.arange(0, n, stride)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return idx


def create_app(
    fits: dict[str, LoadedFit] | None = None,
    default_lambda: float = DEFAULT_LAMBDA,
    ui_dir: str | None = None,
) -> FastAPI:
    session = ApiSession(
        loaded_fits=dict(fits or {}),
        default_lambda=default_lambda,
        version=__version__,
    )
    app = FastAPI(title="anneal-law", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"http://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request, exc: RequestValidationError):
        detail = [
            {
                "field": ".".join(str(p) for p in err.get("loc", ())[1:]),
                "message": err.get("msg", ""),
            }
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.exception_handler(SpecError)
    async def _spec_handler(request, exc: SpecError):
        return JSONResponse(
            status_code=400,
            content={"detail": [{"field": exc.field or "", "message": str(exc)}]},
        )

    @app.exception_handler(ValueError)
    async def _domain_handler(request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def resolve_params(fit_id, params, lambda_, epsilon=None):
        if fit_id is not None:
            loaded = session.loaded_fits.get(fit_id)
            if loaded is None:
                raise HTTPException(404, f"unknown fit id {fit_id!r}")
            return (
                loaded.params,
                lambda_ if lambda_ is not None else loaded.lambda_,
                epsilon if epsilon is not None else loaded.epsilon,
            )
        if params is None:
            raise SpecError("provide fit_id or params", field="params")
        return (
            LawParams.from_dict(params),
            lambda_ if lambda_ is not None else session.default_lambda,
            epsilon or 0.0,
        )

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "version": session.version}

    @app.get("/v1/fits")
    async def list_fits():
        return {
            "fits": [
                {
                    "id": fit_id,
                    "params": loaded.params.to_dict(),
                    "lambda": loaded.lambda_,
                    "epsilon": loaded.epsilon,
                }
                for fit_id, loaded in session.loaded_fits.items()
            ]
        }

    @app.post("/v1/predict")
    async def predict(body: PredictRequest):
        params, lambda_, epsilon = resolve_params(
            body.fit_id, body.params, body.lambda_, body.epsilon
        )
        spec = spec_from_dict(body.schedule_spec)
        if spec.total_steps > MAX_PREDICT_STEPS:
            raise HTTPException(413, "schedule too long; use the CLI")
        series = materialize(spec)
        areas = compute_areas(series, AreaConfig(lambda_=lambda_, epsilon=epsilon))
        loss = eval_curve(params, areas)
        n = len(loss)
        if body.downsample and n > body.max_points:
            idx = _downsample_indices(n, body.max_points)
        else:
            idx = np.arange(n)
        # Term decomposition is served so clients never evaluate the law
        # themselves: loss = L0 + s1_term + s2_term.
        s1_term = params.A * np.power(areas.s1[idx], -params.alpha)
        s2_term = loss[idx] - params.L0 - s1_term
        return {
            "steps": (idx + 1).tolist(),
            "lr": series.etas[idx].tolist(),
            "s1": areas.s1[idx].tolist(),
            "s2": areas.s2[idx].tolist(),
            "loss": loss[idx].tolist(),
            "s1_term": s1_term.tolist(),
            "s2_term": s2_term.tolist(),
            "l0": params.L0,
            "final_loss": float(loss[-1]),
            "total_steps": n,
        }

    @app.post("/v1/fit")
    async def fit_endpoint(body: FitRequest):
        total_samples = sum(len(c.samples) for c in body.curves)
        if total_samples > MAX_FIT_SAMPLES:
            raise HTTPException(413, "too many samples; use the CLI")
        curves = []
        for c in body.curves:
            spec = spec_from_dict(c.schedule_spec)
            if spec.total_steps > MAX_FIT_STEPS:
                raise HTTPException(413, "schedule too long for a service fit; use the CLI")
            curves.append(
                LossCurve.from_samples(c.samples, spec, n=c.n, label=c.label)
            )
        known = {"delta", "lambda", "variant", "fit_extension", "stride"}
        unknown = set(body.config) - known
        if unknown:
            raise SpecError(f"unknown fit config fields: {sorted(unknown)}", field="config")
        config = FitConfig(
            delta=body.config.get("delta", 1e-3),
            lambda_=body.config.get("lambda", session.default_lambda),
            variant=body.config.get("variant", "base"),
            fit_extension=body.config.get("fit_extension", False),
            stride=body.config.get("stride", 1),
        )
        try:
            report = fit(curves, config)
        except FitNonConvergence as exc:
            raise HTTPException(422, f"fit did not converge: {exc}") from exc
        return report.to_dict()

    def check_sweep_size(n_cells: int, *spec_totals: int):
        if n_cells > MAX_SWEEP_CELLS:
            raise HTTPException(413, "sweep grid too large; use the CLI")
        if any(t > MAX_SWEEP_STEPS for t in spec_totals):
            raise HTTPException(413, "sweep schedules too long; use the CLI")

    @app.post("/v1/sweep/cosine")
    async def sweep_cosine_endpoint(body: SweepRequest):
        params, lambda_, _ = resolve_params(body.fit_id, body.params, body.lambda_)
        if body.total is None or not body.cycle_factors or not body.min_lr_fracs:
            raise SpecError("cosine sweep needs total, cycle_factors, min_lr_fracs")
        check_sweep_size(
            len(body.cycle_factors) * len(body.min_lr_fracs), body.total
        )
        result = sweep_cosine(
            params,
            body.total,
            body.cycle_factors,
            body.min_lr_fracs,
            eta_max=body.eta_max,
            warmup=body.warmup,
            lambda_=lambda_,
        )
        return result.to_dict()

    @app.post("/v1/sweep/wsd")
    async def sweep_wsd_endpoint(body: SweepRequest):
        params, lambda_, _ = resolve_params(body.fit_id, body.params, body.lambda_)
        if not body.totals or not body.ratios:
            raise SpecError("wsd sweep needs totals and ratios")
        check_sweep_size(len(body.totals) * len(body.ratios), *body.totals)
        result = sweep_wsd(
            params,
            body.totals,
            body.ratios,
            body.anneal_fn,
            eta_max=body.eta_max,
            warmup=body.warmup,
            lambda_=lambda_,
        )
        return result.to_dict()

    @app.post("/v1/sweep/anneal-fn")
    async def sweep_anneal_fn_endpoint(body: SweepRequest):
        params, lambda_, _ = resolve_params(body.fit_id, body.params, body.lambda_)
        if body.total is None or not body.ratios or not body.fns:
            raise SpecError("anneal-fn sweep needs total, ratios, fns")
        check_sweep_size(len(body.fns) * len(body.ratios), body.total)
        result = compare_anneal_fns(
            params,
            body.total,
            body.ratios,
            body.fns,
            eta_max=body.eta_max,
            warmup=body.warmup,
            lambda_=lambda_,
        )
        return result.to_dict()

    @app.post("/v1/sweep/cpt")
    async def sweep_cpt_endpoint(body: SweepRequest):
        params, lambda_, _ = resolve_params(body.fit_id, body.params, body.lambda_)
        if (
            body.base_steps is None
            or not body.peaks
            or not body.rewarm_steps
            or body.continuation is None
        ):
            raise SpecError("cpt sweep needs base_steps, peaks, rewarm_steps, continuation")
        continuation = spec_from_dict(body.continuation)
        check_sweep_size(
            len(body.peaks) * len(body.rewarm_steps),
            body.base_steps + continuation.total_steps,
        )
        curves = cpt_predict(
            params,
            body.base_steps,
            body.peaks,
            body.rewarm_steps,
            continuation,
            eta_max=body.eta_max,
            warmup=body.warmup,
            lambda_=lambda_,
        )
        cells = []
        finals = []
        for c in curves:
            cells.append({"peak": c.peak, "rewarm_steps": c.rewarm_steps})
            finals.append(float(c.loss[-1]))
        idx = _downsample_indices(len(curves[0].loss), MAX_RESPONSE_POINTS)
        return {
            "axis": cells,
            "final_losses": finals,
            "argmin_index": int(np.argmin(finals)),
            "steps": (idx + 1).tolist(),
            "curves": [c.loss[idx].tolist() for c in curves],
            "lr": [c.lr[idx].tolist() for c in curves],
            "rewarm_start": curves[0].rewarm_start,
        }

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app

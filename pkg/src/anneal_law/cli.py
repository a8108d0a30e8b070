"""Command-line interface.

Every subcommand is a pure function of its flags and input files; each
invocation that writes outputs also writes a ``<out>.manifest.json`` with the
command, a config snapshot, and content hashes of inputs and outputs, so
repeated runs can be checked for bit-identical results.

Exit codes: 0 success, 2 input errors, 3 fit non-convergence, 4 I/O failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .areas import AreaConfig, compute_areas
from .fit import FitConfig, FitNonConvergence, FitReport, LossCurve, fit, metrics
from .ingest import IngestError, parse, to_loss_curve
from .law import LawParams, eval_curve
from .analysis import (
    compare_anneal_fns,
    cost_table,
    cpt_predict,
    crossover_constant_cosine,
    reduction_experiment,
    sweep_cosine,
    sweep_wsd,
)
from .schedule import SpecError, load_spec, materialize


def _csv_list(text: str, cast=float) -> list:
    return [cast(tok) for tok in text.split(",") if tok.strip() != ""]


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(args, inputs: list, outputs: list) -> None:
    if not outputs:
        return
    snapshot = {
        k: v for k, v in vars(args).items() if k != "func" and not k.startswith("_")
    }
    manifest = {
        "command": args._command,
        "config_snapshot": snapshot,
        "input_hashes": [
            {"path": str(p), "sha256": _sha256(p)} for p in inputs if p
        ],
        "output_paths": [
            {"path": str(p), "sha256": _sha256(p)} for p in outputs
        ],
        "tool_version": __version__,
    }
    _dump_json(manifest, str(outputs[0]) + ".manifest.json")


def _load_params(args) -> tuple[LawParams, float, float]:
    """Resolve (params, lambda, epsilon) from --fit/--params/--lambda flags."""
    lambda_ = DEFAULTS_LAMBDA if args.lambda_ is None else args.lambda_
    epsilon = 0.0
    if getattr(args, "fit", None):
        with open(args.fit) as fh:
            report = FitReport.from_dict(json.load(fh))
        params = report.params
        epsilon = report.epsilon
        if args.lambda_ is None:
            lambda_ = report.config.get("lambda", DEFAULTS_LAMBDA)
    elif getattr(args, "params", None):
        with open(args.params) as fh:
            params = LawParams.from_dict(json.load(fh))
    else:
        raise SpecError("provide --fit or --params")
    return params, lambda_, epsilon


DEFAULTS_LAMBDA = 0.999


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_schedule_gen(args) -> int:
    spec = load_spec(args.spec)
    series = materialize(spec)
    series.to_csv(args.out)
    _write_manifest(args, [args.spec], [args.out])
    return 0


def _cmd_areas(args) -> int:
    spec = load_spec(args.spec)
    series = materialize(spec)
    areas = compute_areas(
        series, AreaConfig(lambda_=args.lambda_, epsilon=args.epsilon)
    )
    areas.to_csv(args.out, series)
    _write_manifest(args, [args.spec], [args.out])
    return 0


def _load_curve(path, spec_path, fmt, column, stride, n, label) -> LossCurve:
    spec = load_spec(spec_path)
    log = parse(path, format=fmt, column_map={"value": column})
    return to_loss_curve(log, spec, stride=stride, n=n, label=label)


def _cmd_fit(args) -> int:
    spec_paths = [p for p in (args.spec_a, args.spec_b) if p]
    if len(spec_paths) != len(args.curves):
        raise SpecError(
            f"{len(args.curves)} curve file(s) but {len(spec_paths)} spec(s); "
            "pass --spec-a (and --spec-b) to match"
        )
    ns = [args.n_a, args.n_b]
    curves = [
        _load_curve(c, s, args.format, args.column, args.stride, n, Path(c).stem)
        for c, s, n in zip(args.curves, spec_paths, ns)
    ]
    config = FitConfig(
        delta=args.delta,
        lambda_=args.lambda_,
        variant=args.variant,
        fit_extension=args.extension,
    )
    report = fit(curves, config)
    _dump_json(report.to_dict(), args.out)
    _write_manifest(args, list(args.curves) + spec_paths, [args.out])
    print(
        f"fit: objective={report.objective:.6g} R^2={report.r_squared:.6f} "
        f"mean_rel_error={report.mean_rel_error:.4%}"
    )
    return 0


def _cmd_predict(args) -> int:
    params, lambda_, epsilon = _load_params(args)
    spec = load_spec(args.spec)
    series = materialize(spec)
    areas = compute_areas(series, AreaConfig(lambda_=lambda_, epsilon=epsilon))
    loss = eval_curve(params, areas)

    from .schedule import _write_csv

    steps = np.arange(1, len(loss) + 1)
    rows = zip(steps, series.etas, areas.s1, areas.s2, loss)
    _write_csv(args.out, "step,lr,s1,s2,loss", rows)

    inputs = [args.fit or args.params, args.spec]
    if args.observed:
        obs_log = parse(args.observed, column_map={"value": args.column})
        obs = to_loss_curve(obs_log, spec)
        r2, mre = metrics(loss[obs.steps - 1], obs)
        print(json.dumps({"r_squared": r2, "mean_rel_error": mre}, sort_keys=True))
        inputs.append(args.observed)
    _write_manifest(args, inputs, [args.out])
    return 0


def _emit_sweep(args, result, inputs) -> int:
    out = Path(args.out)
    _dump_json(result.to_dict(), out)
    outputs = [out]
    if hasattr(result, "to_csv"):
        csv_path = out.with_suffix(".csv")
        result.to_csv(csv_path)
        outputs.append(csv_path)
    _write_manifest(args, inputs, outputs)
    return 0


def _cmd_sweep_cosine(args) -> int:
    params, lambda_, _ = _load_params(args)
    result = sweep_cosine(
        params,
        args.total,
        _csv_list(args.factors),
        _csv_list(args.min_lr_fracs),
        eta_max=args.eta_max,
        warmup=args.warmup,
        lambda_=lambda_,
    )
    return _emit_sweep(args, result, [args.fit or args.params])


def _cmd_sweep_wsd(args) -> int:
    params, lambda_, _ = _load_params(args)
    result = sweep_wsd(
        params,
        _csv_list(args.totals, int),
        _csv_list(args.ratios),
        args.anneal_fn,
        eta_max=args.eta_max,
        warmup=args.warmup,
        lambda_=lambda_,
    )
    return _emit_sweep(args, result, [args.fit or args.params])


def _cmd_sweep_anneal_fn(args) -> int:
    params, lambda_, _ = _load_params(args)
    result = compare_anneal_fns(
        params,
        args.total,
        _csv_list(args.ratios),
        _csv_list(args.fns, str),
        eta_max=args.eta_max,
        warmup=args.warmup,
        lambda_=lambda_,
    )
    return _emit_sweep(args, result, [args.fit or args.params])


def _cmd_sweep_crossover(args) -> int:
    from .schedule import _write_csv

    params, lambda_, _ = _load_params(args)
    totals = _csv_list(args.totals, int)
    result = crossover_constant_cosine(
        params,
        totals,
        eta_max=args.eta_max,
        warmup=args.warmup,
        lambda_=lambda_,
    )
    out = Path(args.out)
    _dump_json(result.to_dict(), out)
    csv_path = out.with_suffix(".csv")
    rows = zip(totals, result.constant.final_losses, result.cosine.final_losses)
    _write_csv(csv_path, "total_steps,constant_final,cosine_final", rows)
    _write_manifest(args, [args.fit or args.params], [out, csv_path])
    return 0


def _cmd_sweep_cpt(args) -> int:
    params, lambda_, _ = _load_params(args)
    continuation = load_spec(args.continuation)
    curves = cpt_predict(
        params,
        args.base_steps,
        _csv_list(args.peaks),
        _csv_list(args.rewarm_steps, int),
        continuation,
        eta_max=args.eta_max,
        warmup=args.warmup,
        lambda_=lambda_,
    )
    doc = [
        {
            "peak": c.peak,
            "rewarm_steps": c.rewarm_steps,
            "rewarm_start": c.rewarm_start,
            "final_loss": float(c.loss[-1]),
            "max_loss_after_rewarm": float(np.max(c.loss[c.rewarm_start :])),
        }
        for c in curves
    ]
    out = Path(args.out)
    _dump_json(doc, out)
    from .schedule import _write_csv

    csv_path = out.with_suffix(".csv")
    rows = (
        (row["peak"], row["rewarm_steps"], row["final_loss"], row["max_loss_after_rewarm"])
        for row in doc
    )
    _write_csv(csv_path, "peak,rewarm_steps,final_loss,max_loss_after_rewarm", rows)
    _write_manifest(
        args, [args.fit or args.params, args.continuation], [out, csv_path]
    )
    return 0


def _cmd_reduce(args) -> int:
    report = reduction_experiment(
        args.n,
        args.seed,
        lrs_list=_csv_list(args.lrs, str),
        totals=_csv_list(args.totals, int),
        wsd_ratio=args.wsd_ratio,
    )
    _dump_json(report.to_dict(), args.out)
    _write_manifest(args, [], [args.out])
    for name, stats in report.per_lrs.items():
        print(
            f"{name}: mean_r2={stats.mean_r2:.4f} std_r2={stats.std_r2:.4f} "
            f"mean_huber={stats.mean_huber:.3e}"
        )
    return 0


def _cmd_cost_table(args) -> int:
    rows = cost_table(args.points, _csv_list(args.ratios))
    lines = ["method,lrs,total_steps_k,percent"]
    for row in rows:
        lines.append(
            f"{row.method},{row.lrs},{row.total_steps_k:g}K,{row.percent:.1f}%"
        )
    text = "\n".join(lines)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        _write_manifest(args, [], [args.out])
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_fits

    fits = load_fits(args.fit or [])
    ui_dir = args.ui_dir
    if ui_dir is None and Path("frontend/dist/index.html").is_file():
        ui_dir = "frontend/dist"
    app = create_app(fits, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_params_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fit", help="fit report JSON carrying the law parameters")
    p.add_argument("--params", help="bare LawParams JSON")
    p.add_argument("--lambda", dest="lambda_", type=float, default=None)
    p.add_argument("--eta-max", type=float, default=2e-4)
    p.add_argument("--warmup", type=int, default=500)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="anneal-law",
        description="Loss-curve modeling for learning-rate schedules",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_sched = sub.add_parser("schedule", help="schedule utilities")
    sched_sub = p_sched.add_subparsers(dest="subcommand", required=True)
    p = sched_sub.add_parser("gen", help="materialize a schedule to CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_schedule_gen)

    p = sub.add_parser("areas", help="compute S1/S2 series for a schedule")
    p.add_argument("--spec", required=True)
    p.add_argument("--lambda", dest="lambda_", type=float, default=DEFAULTS_LAMBDA)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_areas)

    p = sub.add_parser("fit", help="fit law parameters to observed curves")
    p.add_argument("--curves", nargs="+", required=True)
    p.add_argument("--spec-a", required=True)
    p.add_argument("--spec-b")
    p.add_argument("--n-a", type=float, default=None, help="model size of curve A")
    p.add_argument("--n-b", type=float, default=None, help="model size of curve B")
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--lambda", dest="lambda_", type=float, default=DEFAULTS_LAMBDA)
    p.add_argument("--variant", choices=("base", "lr_weighted", "zeta"), default="base")
    p.add_argument("--extension", action="store_true", help="fit the model-size terms")
    p.add_argument("--column", default="loss")
    p.add_argument("--format", choices=("csv", "json_lines"), default="csv")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="predict a loss curve for a schedule")
    p.add_argument("--fit", help="fit report JSON")
    p.add_argument("--params", help="bare LawParams JSON")
    p.add_argument("--spec", required=True)
    p.add_argument("--lambda", dest="lambda_", type=float, default=None)
    p.add_argument("--observed", help="observed curve CSV for metrics")
    p.add_argument("--column", default="loss")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p_sweep = sub.add_parser("sweep", help="schedule studies")
    sweep_sub = p_sweep.add_subparsers(dest="subcommand", required=True)

    p = sweep_sub.add_parser("cosine", help="cycle length x min LR grid")
    _add_params_flags(p)
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--factors", default="0.5,1,2")
    p.add_argument("--min-lr-fracs", default="0,0.1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep_cosine)

    p = sweep_sub.add_parser("wsd", help="annealing-ratio sweep")
    _add_params_flags(p)
    p.add_argument("--totals", required=True)
    p.add_argument("--ratios", default="0.02,0.05,0.1,0.15,0.2,0.3,0.4,0.5,0.6")
    p.add_argument("--anneal-fn", default="cosine")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep_wsd)

    p = sweep_sub.add_parser("anneal-fn", help="annealing-function comparison")
    _add_params_flags(p)
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--ratios", default="0.1,0.5")
    p.add_argument("--fns", default="one_sqrt,cosine")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep_anneal_fn)

    p = sweep_sub.add_parser("crossover", help="constant vs cosine finals")
    _add_params_flags(p)
    p.add_argument("--totals", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep_crossover)

    p = sweep_sub.add_parser("cpt", help="continual-pretraining re-warmup study")
    _add_params_flags(p)
    p.add_argument("--base-steps", type=int, required=True)
    p.add_argument("--peaks", required=True)
    p.add_argument("--rewarm-steps", required=True)
    p.add_argument("--continuation", required=True, help="continuation spec JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep_cpt)

    p = sub.add_parser("reduce", help="endpoint power-law reduction experiment")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--lrs", default="cosine,wsd")
    p.add_argument("--totals", default=",".join(str(t) for t in range(5000, 60001, 5000)))
    p.add_argument("--wsd-ratio", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("cost-table", help="fitting-cost comparison table")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--ratios", default="0.1,0.2")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_cost_table)

    p = sub.add_parser("serve", help="run the JSON API / designer UI server")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--fit", action="append", help="id=path or path of a fit JSON")
    p.add_argument(
        "--ui-dir",
        help="static UI assets to serve at / (default: frontend/dist when present)",
    )
    p.set_defaults(func=_cmd_serve)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    parts = [args.command]
    if getattr(args, "subcommand", None):
        parts.append(args.subcommand)
    args._command = " ".join(parts)
    try:
        return args.func(args)
    except FitNonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SpecError, IngestError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

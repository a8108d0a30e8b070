"""Loss-curve modeling for LR schedules: areas, law evaluation, fitting,
prediction, and schedule studies."""

__version__ = "0.1.0"

from .areas import AreaConfig, AreaSeries, compute_areas, compute_areas_bruteforce
from .fit import (
    ChinchillaFit,
    FitConfig,
    FitNonConvergence,
    FitReport,
    LossCurve,
    fit,
    fit_chinchilla,
    huber,
    metrics,
    objective,
)
from .law import (
    ChinchillaParams,
    LawParams,
    crossover_s1,
    eval_chinchilla,
    eval_curve,
    eval_curve_n,
    partials,
    predict_loss_curve,
)
from .schedule import (
    LRSeries,
    ScheduleSpec,
    SpecError,
    anneal_f,
    load_spec,
    materialize,
    spec_from_dict,
    spec_from_json,
)

__all__ = [
    "AreaConfig",
    "AreaSeries",
    "ChinchillaFit",
    "ChinchillaParams",
    "FitConfig",
    "FitNonConvergence",
    "FitReport",
    "LRSeries",
    "LawParams",
    "LossCurve",
    "ScheduleSpec",
    "SpecError",
    "anneal_f",
    "compute_areas",
    "compute_areas_bruteforce",
    "crossover_s1",
    "eval_chinchilla",
    "eval_curve",
    "eval_curve_n",
    "fit",
    "fit_chinchilla",
    "huber",
    "load_spec",
    "materialize",
    "metrics",
    "objective",
    "partials",
    "predict_loss_curve",
    "spec_from_dict",
    "spec_from_json",
]

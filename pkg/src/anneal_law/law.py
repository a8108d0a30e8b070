"""The loss-curve law: validation loss as a function of schedule areas.

The model is ``loss(s) = L0 + A * S1(s)**(-alpha) - C * S2(s)``: a power law
in the forward area plus a linear drop in the annealing area.  Optional
extensions cover model-size scaling (``+ B * N**(-beta)`` and an ``N**gamma``
multiplier on the annealing term) and an exponent ``zeta`` on S2.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .areas import AreaConfig, AreaSeries, compute_areas
from .schedule import ScheduleSpec, materialize


@dataclass(frozen=True)
class LawParams:
    """Fitted constants of the loss-curve law; all strictly positive.

    ``B``, ``beta``, ``gamma`` enable the model-size extension; ``zeta`` is
    an optional exponent on the annealing area (1 = plain linear term).
    """

    L0: float
    A: float
    C: float
    alpha: float
    B: float | None = None
    beta: float | None = None
    gamma: float | None = None
    zeta: float = 1.0

    def __post_init__(self):
        for name in ("L0", "A", "C", "alpha", "zeta"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be > 0")
        for name in ("B", "beta", "gamma"):
            value = getattr(self, name)
            if value is not None and not (value > 0):
                raise ValueError(f"{name} must be > 0 when present")

    @property
    def has_extension(self) -> bool:
        return None not in (self.B, self.beta, self.gamma)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        return {k: v for k, v in out.items() if v is not None}

    @classmethod
    def from_dict(cls, doc: dict) -> "LawParams":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown LawParams fields: {sorted(unknown)}")
        return cls(**doc)


@dataclass(frozen=True)
class ChinchillaParams:
    """Constants of the endpoint power law ``L0 + A * D**(-alpha) + B * N**(-beta)``.

    ``B = 0`` disables the model-size term, leaving the data-only power law.
    """

    L0: float
    A: float
    alpha: float
    B: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        # L0 = 0 is allowed for evaluation; fits always return L0 > 0.
        if self.L0 < 0 or not (self.A > 0 and self.alpha > 0):
            raise ValueError("need L0 >= 0 and A, alpha > 0")
        if self.B < 0 or not (self.beta > 0):
            raise ValueError("need B >= 0 and beta > 0")


def _s2_term(params: LawParams, s2: np.ndarray) -> np.ndarray:
    """``C * S2**zeta`` with the plain linear term for zeta == 1."""
    if params.zeta == 1.0:
        return params.C * s2
    if np.any(s2 < 0):
        raise ValueError("zeta variant undefined for negative S2")
    return params.C * np.where(s2 > 0, np.power(np.maximum(s2, 1e-300), params.zeta), 0.0)


def eval_curve(params: LawParams, areas: AreaSeries) -> np.ndarray:
    """Predicted loss at every step of an area series."""
    s1 = np.asarray(areas.s1, dtype=float)
    if len(s1) == 0:
        raise ValueError("areas must be non-empty")
    if np.any(s1 <= 0):
        raise ValueError("S1 must be > 0 at every step")
    return params.L0 + params.A * np.power(s1, -params.alpha) - _s2_term(params, areas.s2)


def eval_curve_n(params: LawParams, areas: AreaSeries, n: float) -> np.ndarray:
    """Predicted loss with the model-size extension, for ``n`` non-embedding params."""
    if not params.has_extension:
        raise ValueError("eval_curve_n requires B, beta, gamma")
    if not (n > 0):
        raise ValueError("n must be > 0")
    s1 = np.asarray(areas.s1, dtype=float)
    if np.any(s1 <= 0):
        raise ValueError("S1 must be > 0 at every step")
    size_term = params.B * n**-params.beta
    return (
        params.L0
        + params.A * np.power(s1, -params.alpha)
        + size_term
        - _s2_term(params, areas.s2) * n**params.gamma
    )


def eval_chinchilla(params: ChinchillaParams, d, n: float = 1.0):
    """Endpoint power-law loss at data size ``d`` (and model size ``n``)."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0) or not (n > 0):
        raise ValueError("d and n must be > 0")
    out = params.L0 + params.A * np.power(d_arr, -params.alpha)
    if params.B:
        out = out + params.B * n**-params.beta
    return float(out) if np.ndim(d) == 0 else out


def partials(params: LawParams, s1):
    """(dL/dS1, dL/dS2) of the base law; both strictly negative."""
    s1_arr = np.asarray(s1, dtype=float)
    if np.any(s1_arr <= 0):
        raise ValueError("s1 must be > 0")
    d_s1 = -params.alpha * params.A * np.power(s1_arr, -params.alpha - 1.0)
    if np.ndim(s1) == 0:
        return float(d_s1), -params.C
    return d_s1, np.full_like(d_s1, -params.C)


def crossover_s1(params: LawParams) -> float:
    """Forward area where |dL/dS1| equals |dL/dS2|.

    Below this area, growing S1 (keeping the LR high) reduces loss faster
    than annealing; above it, annealing wins.
    """
    return (params.alpha * params.A / params.C) ** (1.0 / (params.alpha + 1.0))


def predict_loss_curve(
    params: LawParams,
    spec: ScheduleSpec,
    lambda_: float = 0.999,
    epsilon: float = 0.0,
) -> np.ndarray:
    """Materialize a schedule, compute its areas, and evaluate the law."""
    areas = compute_areas(materialize(spec), AreaConfig(lambda_=lambda_, epsilon=epsilon))
    return eval_curve(params, areas)

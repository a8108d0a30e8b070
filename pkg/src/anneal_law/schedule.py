"""Learning-rate schedules: declarative specs and per-step materialization.

Supports the schedule families needed for loss-curve modeling: constant,
cosine (with arbitrary cycle length), warmup-stable-decay (WSD) with several
annealing functions, multi-step (staged constant levels), cyclic
re-warmup/annealing, and piecewise-linear.

Step indexing is 1-based: ``etas[i - 1]`` is the learning rate applied at
step ``i``.  Every materialized schedule carries a second series,
``area_etas``, in which the warmup ramp is replaced by a constant
``eta_max``; area computations (forward area, annealing area) integrate
``area_etas`` so that the noisy warmup phase contributes as if training had
started at full LR.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from importlib import resources

import jsonschema
import numpy as np

KINDS = ("constant", "cosine", "wsd", "multi_step_cosine", "cyclic", "piecewise_linear")
ANNEAL_FNS = ("cosine", "linear", "exponential", "one_sqrt", "one_square")

# Multi-step default: hold peak LR for 80% of steps, then two 10% stages at
# scaled-down constant levels (0.316 ~ sqrt(0.1)).
DEFAULT_STAGES = ((0.8, 1.0), (0.1, 0.316), (0.1, 0.1))

# Exponential annealing decays geometrically down to this fraction of the
# annealing amplitude, then clamps to the floor at the final step.
EXP_ANNEAL_FLOOR = 1e-3


class SpecError(ValueError):
    """Invalid schedule specification; ``field`` names the offending field."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class ScheduleSpec:
    """Declarative description of a learning-rate schedule.

    Args:
        kind: One of ``constant``, ``cosine``, ``wsd``, ``multi_step_cosine``,
            ``cyclic``, ``piecewise_linear``.
        total_steps: Number of training steps the schedule spans.
        eta_max: Peak learning rate.
        eta_min: Final/minimum learning rate (default 0).
        warmup_steps: Linear warmup length; must be < total_steps.
        cycle_T: Cosine cycle length (cosine only).  May exceed total_steps
            (incomplete annealing) or fall short of it (held at eta_min after
            the cycle).  Defaults to total_steps.
        stable_end: Last step of the constant phase (wsd only).
        anneal_fn: Annealing shape for the wsd decay phase (default cosine).
        stage_fractions: ``(fraction, eta_scale)`` pairs (multi_step_cosine
            only); each stage holds ``eta_scale * eta_max`` for
            ``fraction * total_steps`` steps.
        cycle_spec: ``(rewarm_steps, anneal_steps)`` pairs (cyclic only);
            each cycle linearly re-warms to eta_max then cosine-anneals to
            eta_min.
        points: ``(step, eta)`` knots (piecewise_linear only), strictly
            increasing in step.
    """

    kind: str
    total_steps: int
    eta_max: float
    eta_min: float = 0.0
    warmup_steps: int = 0
    cycle_T: int | None = None
    stable_end: int | None = None
    anneal_fn: str | None = None
    stage_fractions: tuple[tuple[float, float], ...] | None = None
    cycle_spec: tuple[tuple[int, int], ...] | None = None
    points: tuple[tuple[int, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown schedule kind {self.kind!r}", field="kind")
        if self.total_steps < 1:
            raise SpecError("total_steps must be >= 1", field="total_steps")
        if self.warmup_steps < 0:
            raise SpecError("warmup_steps must be >= 0", field="warmup_steps")
        if self.warmup_steps >= self.total_steps:
            raise SpecError("warmup_steps must be < total_steps", field="warmup_steps")
        if not (self.eta_max > 0):
            raise SpecError("eta_max must be > 0", field="eta_max")
        if not (0 <= self.eta_min <= self.eta_max):
            raise SpecError("need 0 <= eta_min <= eta_max", field="eta_min")

        only_for = {
            "cycle_T": "cosine",
            "stable_end": "wsd",
            "anneal_fn": "wsd",
            "stage_fractions": "multi_step_cosine",
            "cycle_spec": "cyclic",
            "points": "piecewise_linear",
        }
        for name, owner in only_for.items():
            if getattr(self, name) is not None and self.kind != owner:
                raise SpecError(f"{name} only applies to kind={owner!r}", field=name)

        check = getattr(self, f"_check_{self.kind}")
        check()

    def _check_constant(self):
        pass

    def _check_cosine(self):
        cycle = self.total_steps if self.cycle_T is None else self.cycle_T
        if cycle <= self.warmup_steps:
            raise SpecError("cycle_T must exceed warmup_steps", field="cycle_T")

    def _check_wsd(self):
        if self.stable_end is None:
            raise SpecError("wsd requires stable_end", field="stable_end")
        if not (self.warmup_steps <= self.stable_end <= self.total_steps):
            raise SpecError(
                "need warmup_steps <= stable_end <= total_steps", field="stable_end"
            )
        fn = self.anneal_fn or "cosine"
        if fn not in ANNEAL_FNS:
            raise SpecError(f"unknown anneal_fn {fn!r}", field="anneal_fn")

    def _check_multi_step_cosine(self):
        stages = self.stage_fractions or DEFAULT_STAGES
        fracs = [f for f, _ in stages]
        scales = [s for _, s in stages]
        if not stages or any(f <= 0 for f in fracs):
            raise SpecError("stage fractions must be positive", field="stage_fractions")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise SpecError("stage fractions must sum to 1", field="stage_fractions")
        if any(not (0 <= s <= 1) for s in scales):
            raise SpecError("stage eta scales must lie in [0, 1]", field="stage_fractions")

    def _check_cyclic(self):
        if not self.cycle_spec:
            raise SpecError("cyclic requires a non-empty cycle_spec", field="cycle_spec")
        for rewarm, anneal in self.cycle_spec:
            if rewarm < 0 or anneal < 1:
                raise SpecError(
                    "cycle_spec entries need rewarm >= 0 and anneal >= 1",
                    field="cycle_spec",
                )
        used = self.warmup_steps + sum(r + a for r, a in self.cycle_spec)
        if used > self.total_steps:
            raise SpecError("cycle phases exceed total_steps", field="cycle_spec")

    def _check_piecewise_linear(self):
        pts = self.points
        if not pts:
            raise SpecError("piecewise_linear requires points", field="points")
        steps = [s for s, _ in pts]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise SpecError("knot steps must be strictly increasing", field="points")
        if steps[0] != 1 and steps[0] <= self.warmup_steps:
            raise SpecError(
                "first knot must sit at step 1 or after the warmup", field="points"
            )
        if steps[-1] > self.total_steps:
            raise SpecError("knots beyond total_steps", field="points")
        if any(not (0 <= e <= self.eta_max) for _, e in pts):
            raise SpecError("knot etas must lie in [0, eta_max]", field="points")

    def to_dict(self) -> dict:
        """JSON-ready dict with only the fields that are set."""
        out: dict = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name in ("stage_fractions", "cycle_spec", "points"):
                value = [list(pair) for pair in value]
            out[f.name] = value
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class LRSeries:
    """Materialized per-step learning rates for one schedule.

    ``etas[i-1]`` is the LR at step i; ``area_etas`` is identical except that
    warmup steps are held at ``eta_max`` (the series that area computations
    integrate).
    """

    etas: np.ndarray
    area_etas: np.ndarray
    warmup_steps: int

    def __post_init__(self):
        if self.etas.shape != self.area_etas.shape:
            raise ValueError("etas and area_etas must have equal length")
        for arr in (self.etas, self.area_etas):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError("learning rates must be finite and >= 0")

    def __len__(self) -> int:
        return len(self.etas)

    @property
    def steps(self) -> np.ndarray:
        return np.arange(1, len(self.etas) + 1)

    def to_csv(self, path_or_buf) -> None:
        """Write the series as CSV with header ``step,lr``."""
        _write_csv(path_or_buf, "step,lr", zip(self.steps, self.etas))


def _write_csv(path_or_buf, header: str, rows) -> None:
    def dump(fh):
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")

    if hasattr(path_or_buf, "write"):
        dump(path_or_buf)
    else:
        with open(path_or_buf, "w") as fh:
            dump(fh)


def _csv_cell(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def anneal_f(fn: str, s, t_stable: int, t_total: int):
    """Annealing shape f(s) in [0, 1] over the decay window of a WSD schedule.

    The LR during annealing is ``eta_min + f(s) * (eta_max - eta_min)`` for
    ``t_stable < s <= t_total``.  Shapes:

    - ``cosine``:     (1 + cos(pi * u)) / 2
    - ``linear``:     1 - u
    - ``one_sqrt``:   1 - sqrt(u)
    - ``one_square``: 1 - u**2
    - ``exponential``: geometric decay from 1 down to a 1e-3 floor, clamped
      to exactly 0 at the final step

    where ``u = (s - t_stable) / (t_total - t_stable)``.

    Accepts a scalar or array ``s``; raises for s outside
    ``(t_stable, t_total]`` or an unknown ``fn``.
    """
    if fn not in ANNEAL_FNS:
        raise SpecError(f"unknown anneal_fn {fn!r}", field="anneal_fn")
    if t_total <= t_stable:
        raise SpecError("t_total must exceed t_stable", field="stable_end")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= t_stable) or np.any(s_arr > t_total):
        raise ValueError(f"step out of annealing range ({t_stable}, {t_total}]")
    u = (s_arr - t_stable) / (t_total - t_stable)
    if fn == "cosine":
        out = 0.5 * (1.0 + np.cos(np.pi * u))
    elif fn == "linear":
        out = 1.0 - u
    elif fn == "one_sqrt":
        out = 1.0 - np.sqrt(u)
    elif fn == "one_square":
        out = 1.0 - u**2
    else:  # exponential
        out = np.exp(math.log(EXP_ANNEAL_FLOOR) * u)
        out = np.where(u >= 1.0, 0.0, out)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.isscalar(s) or np.ndim(s) == 0 else out


def materialize(spec: ScheduleSpec) -> LRSeries:
    """Produce per-step learning rates for a schedule spec.

    Deterministic: identical specs yield bit-identical series.  The warmup
    ramp rises linearly from ``eta_max / warmup_steps`` to ``eta_max``; in
    ``area_etas`` those steps are held at ``eta_max``.
    """
    n = spec.total_steps
    w = spec.warmup_steps
    builder = _BUILDERS[spec.kind]
    etas = builder(spec)

    if w > 0:
        etas[:w] = spec.eta_max * np.arange(1, w + 1) / w
    area_etas = etas.copy()
    if w > 0:
        area_etas[:w] = spec.eta_max
    # Guard against sign flips from float cancellation in the builders.
    np.clip(etas, 0.0, None, out=etas)
    np.clip(area_etas, 0.0, None, out=area_etas)
    return LRSeries(etas=etas, area_etas=area_etas, warmup_steps=w)


def _build_constant(spec: ScheduleSpec) -> np.ndarray:
    return np.full(spec.total_steps, spec.eta_max, dtype=float)


def _build_cosine(spec: ScheduleSpec) -> np.ndarray:
    n, w = spec.total_steps, spec.warmup_steps
    cycle = spec.cycle_T if spec.cycle_T is not None else n
    etas = np.full(n, spec.eta_min, dtype=float)
    hi = min(cycle, n)
    i = np.arange(w + 1, hi + 1, dtype=float)
    frac = (i - w) / (cycle - w)
    etas[w:hi] = spec.eta_min + (spec.eta_max - spec.eta_min) * 0.5 * (
        1.0 + np.cos(np.pi * frac)
    )
    # Beyond the cycle (cycle < n) the LR is held at eta_min, as prefilled.
    return etas


def _build_wsd(spec: ScheduleSpec) -> np.ndarray:
    n, w = spec.total_steps, spec.warmup_steps
    stable = spec.stable_end
    fn = spec.anneal_fn or "cosine"
    etas = np.full(n, spec.eta_max, dtype=float)
    if stable < n:
        s = np.arange(stable + 1, n + 1)
        f = anneal_f(fn, s, stable, n)
        etas[stable:] = spec.eta_min + np.asarray(f) * (spec.eta_max - spec.eta_min)
    return etas


def _build_multi_step_cosine(spec: ScheduleSpec) -> np.ndarray:
    n = spec.total_steps
    stages = spec.stage_fractions or DEFAULT_STAGES
    etas = np.empty(n, dtype=float)
    cum = 0.0
    start = 0
    for idx, (frac, scale) in enumerate(stages):
        cum += frac
        end = n if idx == len(stages) - 1 else int(round(cum * n))
        etas[start:end] = scale * spec.eta_max
        start = end
    return etas


def _build_cyclic(spec: ScheduleSpec) -> np.ndarray:
    n, w = spec.total_steps, spec.warmup_steps
    etas = np.full(n, spec.eta_min, dtype=float)
    pos = w
    current = spec.eta_max  # LR level at the end of warmup
    for rewarm, anneal in spec.cycle_spec:
        if rewarm > 0:
            k = np.arange(1, rewarm + 1, dtype=float)
            etas[pos : pos + rewarm] = current + (spec.eta_max - current) * k / rewarm
            pos += rewarm
        k = np.arange(1, anneal + 1, dtype=float)
        etas[pos : pos + anneal] = spec.eta_min + (spec.eta_max - spec.eta_min) * 0.5 * (
            1.0 + np.cos(np.pi * k / anneal)
        )
        pos += anneal
        current = spec.eta_min
    # Any leftover steps stay at eta_min.
    return etas


def _build_piecewise_linear(spec: ScheduleSpec) -> np.ndarray:
    n = spec.total_steps
    steps = np.array([s for s, _ in spec.points], dtype=float)
    values = np.array([e for _, e in spec.points], dtype=float)
    i = np.arange(1, n + 1, dtype=float)
    # np.interp holds the boundary values outside the knot range.
    return np.interp(i, steps, values)


_BUILDERS = {
    "constant": _build_constant,
    "cosine": _build_cosine,
    "wsd": _build_wsd,
    "multi_step_cosine": _build_multi_step_cosine,
    "cyclic": _build_cyclic,
    "piecewise_linear": _build_piecewise_linear,
}


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

_SCHEMA = None


def schedule_spec_schema() -> dict:
    """The shared JSON schema for schedule-spec documents."""
    global _SCHEMA
    if _SCHEMA is None:
        text = (
            resources.files("anneal_law")
            .joinpath("schemas/schedule_spec.schema.json")
            .read_text()
        )
        _SCHEMA = json.loads(text)
    return _SCHEMA


def spec_from_dict(doc: dict) -> ScheduleSpec:
    """Build a ScheduleSpec from a JSON-style dict; unknown fields rejected."""
    try:
        jsonschema.validate(doc, schedule_spec_schema())
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or None
        raise SpecError(f"invalid schedule spec: {exc.message}", field=path) from exc
    kwargs = dict(doc)
    for name in ("stage_fractions", "cycle_spec", "points"):
        if name in kwargs:
            kwargs[name] = tuple(tuple(pair) for pair in kwargs[name])
    return ScheduleSpec(**kwargs)


def spec_from_json(text: str) -> ScheduleSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError("schedule spec must be a JSON object")
    return spec_from_dict(doc)


def load_spec(path) -> ScheduleSpec:
    with open(path) as fh:
        return spec_from_json(fh.read())

"""Forward area (S1) and annealing area (S2) of a learning-rate series.

S1 at step s is the running sum of per-step learning rates.  S2 is the
running sum of an annealing momentum ``m_i = decay * m_{i-1} + (eta_{i-1} -
eta_i)`` that accumulates LR decreases with an exponentially decaying memory;
it goes negative during re-warmup.  Both are computed from the
warmup-adjusted series (``LRSeries.area_etas``), with ``eta_0 := eta_1`` so a
schedule that starts flat contributes zero momentum at its first step.

``compute_areas`` is the O(s) production path; ``compute_areas_bruteforce``
evaluates the defining double sum literally in O(s^2) and exists purely as a
test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .schedule import LRSeries, _write_csv

BRUTEFORCE_STEP_CAP = 10_000

# Above this length, running sums switch to compensated (Neumaier) summation
# to keep accumulated rounding error negligible on very long runs.
_COMPENSATED_LEN = 100_000


@dataclass(frozen=True)
class AreaConfig:
    """Knobs for area computation.

    Args:
        lambda_: Decay factor of the annealing momentum, in [0, 1).
        epsilon: LR-weight exponent; when > 0 each momentum term is weighted
            by ``eta_i ** epsilon`` before summation (0 disables).
    """

    lambda_: float = 0.999
    epsilon: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.lambda_ < 1.0):
            raise ValueError("lambda_ must lie in [0, 1)")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


@dataclass(frozen=True)
class AreaSeries:
    """Per-step S1, S2, and momentum values for one schedule."""

    s1: np.ndarray
    s2: np.ndarray
    momentum: np.ndarray
    config: AreaConfig

    def __len__(self) -> int:
        return len(self.s1)

    def to_csv(self, path_or_buf, lr_series: LRSeries) -> None:
        """Write ``step,lr,s1,s2,momentum`` rows for plotting."""
        steps = np.arange(1, len(self.s1) + 1)
        rows = zip(steps, lr_series.etas, self.s1, self.s2, self.momentum)
        _write_csv(path_or_buf, "step,lr,s1,s2,momentum", rows)


def _running_sum(x: np.ndarray) -> np.ndarray:
    if len(x) <= _COMPENSATED_LEN:
        return np.cumsum(x)
    out = np.empty_like(x)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(x.tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out


def _lr_drops(eta: np.ndarray) -> np.ndarray:
    """Per-step LR decrease with eta_0 := eta_1 (first entry is 0)."""
    drops = np.empty_like(eta)
    drops[0] = 0.0
    np.subtract(eta[:-1], eta[1:], out=drops[1:])
    return drops


def _weighted_s2(momentum: np.ndarray, eta: np.ndarray, epsilon: float) -> np.ndarray:
    if epsilon == 0.0:
        return _running_sum(momentum)
    weights = np.where(eta > 0, np.power(eta, epsilon, where=eta > 0), 0.0)
    return _running_sum(momentum * weights)


def compute_areas(series: LRSeries, config: AreaConfig | None = None) -> AreaSeries:
    """Compute S1, S2, and momentum in O(s) via the linear recurrence."""
    config = config or AreaConfig()
    eta = series.area_etas
    s1 = _running_sum(eta)
    drops = _lr_drops(eta)
    momentum = lfilter([1.0], [1.0, -config.lambda_], drops)
    s2 = _weighted_s2(momentum, eta, config.epsilon)
    return AreaSeries(s1=s1, s2=s2, momentum=momentum, config=config)


def compute_areas_bruteforce(
    series: LRSeries, config: AreaConfig | None = None
) -> AreaSeries:
    """Literal O(s^2) evaluation of the defining sums; test oracle only.

    For every step i the momentum is evaluated directly as
    ``sum_k (eta_{k-1} - eta_k) * decay**(i-k)``, so it shares no code path
    with the recurrence used by :func:`compute_areas`.  Refuses series longer
    than ``BRUTEFORCE_STEP_CAP``.
    """
    config = config or AreaConfig()
    eta = series.area_etas
    n = len(eta)
    if n > BRUTEFORCE_STEP_CAP:
        raise ValueError(f"brute-force oracle capped at {BRUTEFORCE_STEP_CAP} steps")
    drops = _lr_drops(eta)
    powers = np.power(config.lambda_, np.arange(n, dtype=float))
    momentum = np.empty(n)
    s1 = np.empty(n)
    for i in range(n):
        momentum[i] = np.dot(drops[: i + 1], powers[i::-1])
        s1[i] = np.sum(eta[: i + 1])
    s2 = _weighted_s2(momentum, eta, config.epsilon)
    return AreaSeries(s1=s1, s2=s2, momentum=momentum, config=config)

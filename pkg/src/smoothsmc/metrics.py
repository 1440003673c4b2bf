"""Trajectory metrics: settling time, ultimate bound over a tail window, and
a total-variation chattering index, plus the per-run report record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .sim import Trajectory

STATE_NORM = "state-norm"
ERROR_NORM = "error-norm"
CONTROL = "control"
ESTIMATE = "estimate"


def _norm_series(traj: Trajectory, signal: str) -> np.ndarray:
    if signal == STATE_NORM:
        return np.linalg.norm(traj.x1, axis=1)
    if signal == ERROR_NORM:
        if traj.d_hat is None:
            raise ValueError("trajectory has no disturbance estimate")
        return np.linalg.norm(traj.d_hat - traj.d_true, axis=1)
    raise ValueError(f"unknown scalar signal {signal!r}")


def _vector_series(traj: Trajectory, signal: str) -> np.ndarray:
    if signal == CONTROL:
        return traj.u
    if signal == ESTIMATE:
        if traj.d_hat is None:
            raise ValueError("trajectory has no disturbance estimate")
        return traj.d_hat
    raise ValueError(f"unknown vector signal {signal!r}")


def _tail_mask(times: np.ndarray, tail_fraction: float) -> np.ndarray:
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0, 1)")
    cutoff = times[0] + (1.0 - tail_fraction) * (times[-1] - times[0])
    return times >= cutoff


def settling_time(traj: Trajectory, signal: str, threshold: float) -> float | None:
    """Earliest logged time after which the signal norm stays below the
    threshold through the end of the run; None if it never does."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    norms = _norm_series(traj, signal)
    above = np.flatnonzero(norms >= threshold)
    if above.size == 0:
        return float(traj.times[0])
    last = above[-1]
    if last == norms.shape[0] - 1:
        return None
    return float(traj.times[last + 1])


def ultimate_bound(traj: Trajectory, signal: str, tail_fraction: float = 0.2) -> float:
    """Max signal norm over the final fraction of the run."""
    mask = _tail_mask(traj.times, tail_fraction)
    return float(_norm_series(traj, signal)[mask].max())


def chattering_index(traj: Trajectory, signal: str, tail_fraction: float = 0.2) -> float:
    """Total variation per second of a vector signal over the tail window."""
    mask = _tail_mask(traj.times, tail_fraction)
    if int(mask.sum()) < 2:
        raise ValueError("need at least two tail samples for a variation rate")
    values = _vector_series(traj, signal)[mask]
    t = traj.times[mask]
    variation = float(np.linalg.norm(np.diff(values, axis=0), axis=1).sum())
    return variation / float(t[-1] - t[0])


@dataclass(frozen=True)
class ExperimentReport:
    """Comparison quantities for one (method, scenario) cell."""

    method_id: str
    scenario_id: str
    settling_time: float | None  # None encodes "not settled"
    ultimate_bound: float
    chattering_index: float
    final_L0: float | None
    dt_used: float
    settling_threshold: float
    tail_fraction: float
    certificate_summary: dict | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method_id,
            "scenario": self.scenario_id,
            "settling_time": "not settled" if self.settling_time is None else self.settling_time,
            "ultimate_bound": self.ultimate_bound,
            "chattering_index": self.chattering_index,
            "final_L0": self.final_L0,
            "dt": self.dt_used,
            "settling_threshold": self.settling_threshold,
            "tail_fraction": self.tail_fraction,
            "certificate": self.certificate_summary,
            "config": self.config,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


COMPARISON_HEADER = "method,scenario,settling_time,ultimate_bound,chattering_index,final_L0,dt"


def comparison_csv(reports: Iterable[ExperimentReport]) -> str:
    """CSV table across (method, scenario) cells."""
    lines = [COMPARISON_HEADER]
    for r in reports:
        settle = "not settled" if r.settling_time is None else format(r.settling_time, ".17g")
        l0 = "" if r.final_L0 is None else format(r.final_L0, ".17g")
        lines.append(",".join([
            r.method_id, r.scenario_id, settle,
            format(r.ultimate_bound, ".17g"),
            format(r.chattering_index, ".17g"),
            l0, format(r.dt_used, ".17g"),
        ]))
    return "\n".join(lines) + "\n"

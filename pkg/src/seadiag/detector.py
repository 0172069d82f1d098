"""Threshold stage: filtered residuals -> latched fault flags and report."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .residuals import CONSTRAINTS, ResidualLog

VERDICT_NOMINAL = "nominal"
VERDICT_FAULT = "fault-detected"


@dataclass
class Thresholds:
    """Violation thresholds per constraint plus the startup exclusion window."""

    torsional: float    # Nm
    dynamics: float     # Nm
    electrical: float   # V
    settling: float = 0.2   # s excluded at the start of every run

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in CONSTRAINTS:
            if not getattr(self, name) > 0.0:
                raise ConfigurationError(
                    f"threshold {name} must be positive, got {getattr(self, name)}")
        if not self.settling >= 0.0:
            raise ConfigurationError(
                f"settling must be >= 0, got {self.settling}")


@dataclass
class ConstraintReport:
    """Outcome of one constraint over a run."""

    triggered: bool
    first_crossing: float | None   # s, None when never triggered
    peak_filtered: float           # max filtered residual after settling
    margin: float                  # peak_filtered / threshold

    def to_dict(self):
        return {"triggered": self.triggered,
                "first_crossing": self.first_crossing,
                "peak_filtered": self.peak_filtered,
                "margin": self.margin}


@dataclass
class DiagnosticReport:
    """Per-constraint outcomes and the overall latched verdict."""

    constraints: dict   # constraint name -> ConstraintReport
    verdict: str

    def to_dict(self):
        return {"verdict": self.verdict,
                "constraints": {c: r.to_dict() for c, r in self.constraints.items()}}


def _as_arrays(residuals):
    if isinstance(residuals, ResidualLog):
        return residuals.t, residuals.filtered
    frames = list(residuals)
    if not frames:
        return np.empty(0), {c: np.empty(0) for c in CONSTRAINTS}
    t = np.array([f.t for f in frames])
    filtered = {c: np.array([f.filtered[c] for f in frames]) for c in CONSTRAINTS}
    return t, filtered


def evaluate(residuals, thresholds):
    """Flag each constraint at its first strict threshold crossing.

    A crossing counts only at t >= settling; once a constraint triggers the
    flag latches for the rest of the run (detection hands off to a fail-safe
    stop, not recovery). Raises on an empty stream.
    """
    t, filtered = _as_arrays(residuals)
    if len(t) == 0:
        raise ValueError("empty residual stream")
    mask = t >= thresholds.settling
    if not mask.any():
        raise ValueError(
            f"no samples at or after the settling window ({thresholds.settling} s)")
    t_eval = t[mask]
    reports = {}
    for name in CONSTRAINTS:
        values = filtered[name][mask]
        if not np.all(np.isfinite(values)):
            raise ValueError(f"non-finite filtered residual for {name}")
        limit = getattr(thresholds, name)
        peak = float(values.max())
        above = values > limit
        if above.any():
            crossing = float(t_eval[int(np.argmax(above))])
            reports[name] = ConstraintReport(True, crossing, peak, peak / limit)
        else:
            reports[name] = ConstraintReport(False, None, peak, peak / limit)
    verdict = VERDICT_FAULT if any(r.triggered for r in reports.values()) \
        else VERDICT_NOMINAL
    return DiagnosticReport(constraints=reports, verdict=verdict)


def tune_thresholds(nominal_runs, safety_factor, settling=0.2):
    """Thresholds from fault-free runs: safety_factor times the largest
    post-settling filtered residual observed per constraint."""
    runs = list(nominal_runs)
    if not runs:
        raise ValueError("tune_thresholds needs at least one nominal run")
    if not (math.isfinite(safety_factor) and safety_factor > 0.0):
        raise ConfigurationError(
            f"safety_factor must be positive and finite, got {safety_factor}")
    peaks = {c: 0.0 for c in CONSTRAINTS}
    for run in runs:
        t, filtered = _as_arrays(run)
        if len(t) == 0:
            raise ValueError("empty residual stream")
        mask = t >= settling
        if not mask.any():
            raise ValueError(
                f"no samples at or after the settling window ({settling} s)")
        for name in CONSTRAINTS:
            values = filtered[name][mask]
            if not np.all(np.isfinite(values)):
                raise ValueError(f"non-finite filtered residual for {name}")
            peaks[name] = max(peaks[name], float(values.max()))
    return Thresholds(
        torsional=safety_factor * peaks["torsional"],
        dynamics=safety_factor * peaks["dynamics"],
        electrical=safety_factor * peaks["electrical"],
        settling=settling)

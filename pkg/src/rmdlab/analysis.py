"""Thermalization-time extraction and scaling-law fits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NotThermalizedError
from .propagation import ObservableTrace


@dataclass(frozen=True)
class ThermalizationTime:
    """First threshold crossing of a normalized diagnostic."""

    tau: float
    diagnostic: str
    threshold_center: float
    threshold_band: float
    tau_lo: float
    tau_hi: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not self.tau_lo <= self.tau <= self.tau_hi:
            raise ValueError("band edges must bracket tau")


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of tau against 1/T."""

    model: str  # "power_law" or "exponential"
    exponent_or_rate: float
    intercept: float
    r_squared: float
    points: tuple = field(default=())

    def to_json(self, **extra) -> str:
        payload = {"model": self.model, "exponent": self.exponent_or_rate,
                   "intercept": self.intercept, "r2": self.r_squared,
                   "points": [list(p) for p in self.points]}
        payload.update(extra)
        return json.dumps(payload, sort_keys=True, indent=2)


def normalized_diagnostic(trace: ObservableTrace, diagnostic: str) -> np.ndarray:
    """Energy: <H_F^0>_t / <H_F^0>_0 (falls with heating); entropy: S_L / (L/2)."""
    if diagnostic == "energy":
        e0 = trace.energy[0]
        if e0 == 0.0:
            raise ValueError("initial energy vanishes; cannot normalize")
        return trace.energy / e0
    if diagnostic == "entropy":
        L = trace.metadata.get("params", {}).get("L")
        if L is None:
            raise ValueError("trace metadata lacks chain length L")
        return trace.entropy / (L / 2.0)
    raise ValueError(f"unknown diagnostic {diagnostic!r}")


def ensemble_average_trace(traces) -> ObservableTrace:
    """Pointwise average of several traces on their common time grid.

    Traces must share a sampling schedule; ones that stopped early simply
    truncate the grid.  Energy is averaged after normalizing by each
    trace's own initial value (realizations share E_0 up to rounding, and
    the normalized diagnostic is what gets thresholded downstream), then
    rescaled by the mean E_0 so the result is still an energy.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    m = min(len(tr.times) for tr in traces)
    if m < 2:
        raise ValueError("traces too short to average")
    times = traces[0].times[:m]
    for tr in traces[1:]:
        if not np.allclose(tr.times[:m], times, rtol=0, atol=1e-12):
            raise ValueError("traces do not share a sampling schedule")
    e0s = np.array([tr.energy[0] for tr in traces])
    if np.any(e0s == 0.0):
        raise ValueError("initial energy vanishes; cannot normalize")
    energy = np.mean([tr.energy[:m] / e0 for tr, e0 in zip(traces, e0s)],
                     axis=0) * float(np.mean(e0s))
    entropy = np.mean([tr.entropy[:m] for tr in traces], axis=0)
    mz = np.mean([tr.mz[:m] for tr in traces], axis=0)
    meta = dict(traces[0].metadata)
    meta["ensemble_size"] = len(traces)
    meta["seeds"] = [tr.metadata.get("seed") for tr in traces]
    return ObservableTrace(times=times, energy=energy, entropy=entropy,
                           mz=mz, metadata=meta)


def _first_crossing(times, y, level, rising) -> float:
    """First crossing time of `level`, interpolated linearly in log time.

    The t = 0 row cannot anchor a log interpolation, so crossings inside
    the first interval return the first positive sample time.
    """
    sign = 1.0 if rising else -1.0
    above = sign * (y - level) >= 0.0
    if above[0]:
        return times[0] if times[0] > 0 else times[1]
    hits = np.nonzero(above)[0]
    if len(hits) == 0:
        raise NotThermalizedError(
            f"diagnostic never crosses {level:g} within the trace")
    i = hits[0]
    t0, t1 = times[i - 1], times[i]
    if t0 <= 0.0:
        return t1
    frac = (level - y[i - 1]) / (y[i] - y[i - 1])
    return float(np.exp(np.log(t0) + frac * (np.log(t1) - np.log(t0))))


def thermalization_time(trace: ObservableTrace, diagnostic: str,
                        center: float, band: float) -> ThermalizationTime:
    """tau = first crossing of the threshold center; uncertainty from the
    crossings of center +/- band."""
    y = normalized_diagnostic(trace, diagnostic)
    rising = diagnostic == "entropy"
    tau = _first_crossing(trace.times, y, center, rising)
    edges = sorted(
        _first_crossing(trace.times, y, level, rising)
        for level in (center - band, center + band))
    return ThermalizationTime(tau=tau, diagnostic=diagnostic,
                              threshold_center=center, threshold_band=band,
                              tau_lo=min(edges[0], tau), tau_hi=max(edges[1], tau))


def _lsq(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def _validate_points(points):
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 4:
        raise ValueError("need at least 4 points to fit")
    if any(tau <= 0 for _, tau in pts):
        raise ValueError("thermalization times must be positive")
    return pts


def fit_power_law(points) -> ScalingFit:
    """log tau vs log(1/T); the slope is the heating exponent alpha."""
    pts = _validate_points(points)
    if any(invt <= 0 for invt, _ in pts):
        raise ValueError("driving rates must be positive")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept, r2 = _lsq(x, y)
    return ScalingFit(model="power_law", exponent_or_rate=slope,
                      intercept=intercept, r_squared=r2, points=tuple(pts))


def fit_exponential(points) -> ScalingFit:
    """log tau vs 1/T; the slope is the exponential rate."""
    pts = _validate_points(points)
    x = np.array([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept, r2 = _lsq(x, y)
    return ScalingFit(model="exponential", exponent_or_rate=slope,
                      intercept=intercept, r_squared=r2, points=tuple(pts))


def fit_residual_sum(fit: ScalingFit) -> float:
    """Sum of squared residuals of log tau under the fitted model."""
    invt = np.array([p[0] for p in fit.points])
    tau = np.log([p[1] for p in fit.points])
    x = np.log(invt) if fit.model == "power_law" else invt
    pred = fit.exponent_or_rate * x + fit.intercept
    return float(np.sum((tau - pred) ** 2))

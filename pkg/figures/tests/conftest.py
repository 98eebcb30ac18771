"""Synthetic rmd-lab artifact builders.

These tests must not import the simulation package: the figures component
consumes only the documented file formats, so the fixtures write those
files by hand.
"""

import json

import numpy as np
import pytest


def write_trace(out_dir, name, times, energy, entropy, mz, meta=None):
    rows = ["time,energy,entropy,mz_center"]
    for r in zip(times, energy, entropy, mz):
        rows.append(",".join(repr(float(v)) for v in r))
    (out_dir / f"{name}.csv").write_text("\n".join(rows) + "\n")
    sidecar = {"params": {"L": 8}, "protocol": "rmd"}
    sidecar.update(meta or {})
    (out_dir / f"{name}.json").write_text(json.dumps(sidecar))


def write_summary(out_dir, inv_ts, taus):
    rows = ["invT,tau,tau_lo,tau_hi,seed_count"]
    for x, t in zip(inv_ts, taus):
        x, t = float(x), float(t)
        rows.append(f"{x!r},{t!r},{0.9 * t!r},{1.1 * t!r},5")
    (out_dir / "summary.csv").write_text("\n".join(rows) + "\n")


def write_fit(out_dir, model, exponent, intercept, name="fit.json"):
    (out_dir / name).write_text(json.dumps({
        "model": model, "exponent": exponent, "intercept": intercept,
        "r2": 0.99, "points": []}))


@pytest.fixture
def artifact_writers():
    """Expose the builders to tests without a cross-package import.

    Importing `tests.conftest` from test modules would collide with the
    simulation package's own tests/ directory when pytest runs both from
    the repository root.
    """
    return write_summary, write_fit


@pytest.fixture
def sweep_dir(tmp_path):
    """A fig3-style RMD sweep with tau = (1/T)^3 exactly."""
    inv_ts = [20.0, 30.0, 40.0, 50.0]
    write_summary(tmp_path, inv_ts, [x ** 3 for x in inv_ts])
    write_fit(tmp_path, "power_law", 3.0, 0.0)
    times = np.geomspace(0.1, 1e4, 40)
    for x in inv_ts:
        tau = x ** 3
        energy = 2.0 * np.exp(-times / tau) - 1.0
        entropy = 2.77 * (1.0 - np.exp(-times / tau))
        write_trace(tmp_path, f"trace_invT{x:g}_mean", times, energy,
                    entropy, np.zeros_like(times))
    return tmp_path


@pytest.fixture
def tms_dir(tmp_path):
    """A fig2-style Thue-Morse sweep with tau = exp(0.35 / T)."""
    inv_ts = [14.0, 18.0, 22.0, 26.0, 30.0]
    write_summary(tmp_path, inv_ts, [np.exp(0.35 * x) for x in inv_ts])
    write_fit(tmp_path, "exponential", 0.35, 0.0)
    times = np.geomspace(0.1, 1e6, 30)
    for x in inv_ts:
        tau = np.exp(0.35 * x)
        energy = 2.0 * np.exp(-times / tau) - 1.0
        entropy = np.minimum(0.8 + 0.0 * times, 2.27) + 2.0 * (times > tau)
        entropy = np.clip(entropy, 0.0, 2.27)
        write_trace(tmp_path, f"trace_invT{x:g}", times, energy,
                    entropy, np.zeros_like(times))
    return tmp_path


@pytest.fixture
def dtc_dir(tmp_path):
    times = np.arange(0, 41) * 0.04
    alternating = np.where(np.arange(41) % 2 == 0, -1.0, 1.0)
    write_trace(tmp_path, "dtc_n1_invT50", times, -np.ones(41),
                np.zeros(41), alternating, {"protocol": "dtc", "n": 1,
                                            "epsilon_flip": 0.0})
    write_trace(tmp_path, "dtc_n0_invT50", times, -np.ones(41),
                np.zeros(41), alternating * np.exp(-times / 0.5),
                {"protocol": "dtc", "n": 0, "epsilon_flip": 0.0})
    return tmp_path

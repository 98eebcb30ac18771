"""Render publication-style figures from rmd-lab CSV/JSON artifacts.

Pure file-to-image plumbing: every number plotted here is read back from
the delimited outputs of the simulation CLI (trace CSVs plus their JSON
sidecars, sweep summaries, fit reports).  No simulation or fitting logic
lives in this package; the only formula evaluated locally is the Page
value (L ln2 - 1)/2 drawn as the saturation reference on entropy panels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_IDS = ("fig2", "fig3", "fig4", "spectrum", "bounds")

TRACE_HEADER = "time,energy,entropy,mz_center"
SUMMARY_HEADER = "invT,tau,tau_lo,tau_hi,seed_count"
BOUNDS_HEADER = "T,t,measured_error,dipole_bound,quadrupole_bound"
SPECTRUM_HEADER = "omega,power"

# Files that must exist per figure; traces and sidecars are discovered by
# glob on top of these.
REQUIRED_INPUTS = {
    "fig2": ("summary.csv", "fit.json"),
    "fig3": ("summary.csv", "fit.json"),
    "fig4": (),
    "spectrum": ("spectrum.csv", "slope.json"),
    "bounds": ("bounds.csv",),
}


class FigureInputError(ValueError):
    """An input file is missing, or parses without the documented columns."""


@dataclass
class FigureSpec:
    """What to render, from where, to which image file.

    `axis_scales` documents the per-panel scales the renderer will use;
    it is filled in by the renderer and checked by the structural tests.
    """

    figure_id: str
    input_dir: Path
    out_path: Path
    axis_scales: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.input_dir = Path(self.input_dir)
        self.out_path = Path(self.out_path)
        if self.figure_id not in FIGURE_IDS:
            raise FigureInputError(
                f"unknown figure id {self.figure_id!r}; "
                f"expected one of {', '.join(FIGURE_IDS)}")
        if not self.input_dir.is_dir():
            raise FigureInputError(f"input dir {self.input_dir} does not exist")
        for name in REQUIRED_INPUTS[self.figure_id]:
            if not (self.input_dir / name).is_file():
                raise FigureInputError(
                    f"{self.figure_id} needs {name} in {self.input_dir}")


# --- input parsing --------------------------------------------------------

def _read_table(path: Path, header: str) -> dict[str, np.ndarray]:
    rows = path.read_text().strip().split("\n")
    if not rows or rows[0].strip() != header:
        raise FigureInputError(
            f"{path} does not have the documented header {header!r}")
    names = header.split(",")
    try:
        data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    except ValueError as exc:
        raise FigureInputError(f"{path}: non-numeric row ({exc})") from exc
    if data.size == 0:
        raise FigureInputError(f"{path} has a header but no rows")
    if data.shape[1] != len(names):
        raise FigureInputError(f"{path}: wrong column count")
    return {name: data[:, i] for i, name in enumerate(names)}


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FigureInputError(f"cannot parse {path}: {exc}") from exc


def _sidecar(trace_csv: Path) -> dict:
    return _read_json(trace_csv.with_suffix(".json"))


def page_value(L: int) -> float:
    return (L * math.log(2.0) - 1.0) / 2.0


def _traces(input_dir: Path, pattern: str) -> list[tuple[Path, dict]]:
    found = sorted(input_dir.glob(pattern))
    if not found:
        raise FigureInputError(
            f"no trace files matching {pattern!r} in {input_dir}")
    return [(p, _read_table(p, TRACE_HEADER)) for p in found]


def _trace_label(path: Path) -> str:
    # trace_invT20_mean.csv -> 1/T = 20
    stem = path.stem
    for part in stem.split("_"):
        if part.startswith("invT"):
            return f"1/T = {part[4:]}"
    return stem


def _chain_length(trace_csv: Path) -> int:
    meta = _sidecar(trace_csv)
    try:
        return int(meta["params"]["L"])
    except (KeyError, TypeError) as exc:
        raise FigureInputError(
            f"{trace_csv.with_suffix('.json')} lacks params.L") from exc


# --- panel helpers --------------------------------------------------------

def _trace_panels(ax_e, ax_s, traces):
    """Energy and entropy vs log time, Page line on the entropy panel."""
    for path, tab in traces:
        label = _trace_label(path)
        mask = tab["time"] > 0
        ax_e.plot(tab["time"][mask], tab["energy"][mask] / tab["energy"][0],
                  lw=1.0, label=label)
        ax_s.plot(tab["time"][mask], tab["entropy"][mask], lw=1.0, label=label)
    L = _chain_length(traces[0][0])
    ax_s.axhline(page_value(L), color="0.3", ls="--", lw=1.0,
                 label=f"Page (L={L})")
    for ax in (ax_e, ax_s):
        ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.legend(fontsize=7, ncol=2)
    ax_e.set_ylabel(r"$\langle H_F^0\rangle_t / \langle H_F^0\rangle_0$")
    ax_s.set_ylabel(r"$S_{L/2}$")


def _tau_panel(ax, summary, fit, *, loglog: bool):
    """Thermalization times vs 1/T with the reported fit line overlaid."""
    x, tau = summary["invT"], summary["tau"]
    yerr = np.vstack([np.maximum(tau - summary["tau_lo"], 0.0),
                      np.maximum(summary["tau_hi"] - tau, 0.0)])
    ax.errorbar(x, tau, yerr=yerr, fmt="o", ms=4, capsize=2, label=r"$\tau$")
    grid = np.linspace(float(x.min()), float(x.max()), 200)
    if fit is not None:
        model = fit.get("model")
        if model == "power_law":
            label = (rf"$\propto (1/T)^{{{fit['exponent']:.2f}}}$"
                     f"  (r2={fit.get('r2', float('nan')):.3f})")
            curve = np.exp(fit["intercept"]) * grid ** fit["exponent"]
        elif model == "exponential":
            # the report stores the rate under the shared "exponent" key
            label = (rf"$\propto e^{{{fit['exponent']:.3f}/T}}$"
                     f"  (r2={fit.get('r2', float('nan')):.3f})")
            curve = np.exp(fit["intercept"]) * np.exp(fit["exponent"] * grid)
        else:
            raise FigureInputError(f"fit report has unknown model {model!r}")
        ax.plot(grid, curve, "-", color="C3", lw=1.2, label=label)
    ax.set_yscale("log")
    if loglog:
        ax.set_xscale("log")
    ax.set_xlabel("1/T")
    ax.set_ylabel(r"$\tau$")
    ax.legend(fontsize=7)


# --- figure renderers -----------------------------------------------------

def _render_fig2(spec: FigureSpec):
    """Thue-Morse run: traces plus the semilog exponential-fit panel."""
    traces = _traces(spec.input_dir, "trace_invT*.csv")
    summary = _read_table(spec.input_dir / "summary.csv", SUMMARY_HEADER)
    fit = _read_json(spec.input_dir / "fit.json")
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    _trace_panels(axes[0], axes[1], traces)
    _tau_panel(axes[2], summary, fit, loglog=False)
    return fig


def _render_fig3(spec: FigureSpec):
    """RMD sweep: traces, log-log power-law panel, and a semilog panel.

    Panel (d) shows a companion exponential-regime sweep if the input dir
    has a tms/ subdirectory with its own summary and fit; otherwise it
    replots the primary sweep on semilog axes without a fit line, so the
    panel count is stable either way.
    """
    mean_only = sorted(spec.input_dir.glob("trace_invT*_mean.csv"))
    pattern = "trace_invT*_mean.csv" if mean_only else "trace_invT*.csv"
    traces = _traces(spec.input_dir, pattern)
    summary = _read_table(spec.input_dir / "summary.csv", SUMMARY_HEADER)
    fit = _read_json(spec.input_dir / "fit.json")
    fig, axes = plt.subplots(2, 2, figsize=(7.5, 6.2))
    _trace_panels(axes[0, 0], axes[0, 1], traces)
    _tau_panel(axes[1, 0], summary, fit, loglog=True)
    tms_dir = spec.input_dir / "tms"
    if (tms_dir / "summary.csv").is_file():
        tms_summary = _read_table(tms_dir / "summary.csv", SUMMARY_HEADER)
        tms_fit = (_read_json(tms_dir / "fit.json")
                   if (tms_dir / "fit.json").is_file() else None)
        _tau_panel(axes[1, 1], tms_summary, tms_fit, loglog=False)
    else:
        _tau_panel(axes[1, 1], summary, None, loglog=False)
    return fig


def _render_fig4(spec: FigureSpec):
    """DTC magnetization traces, one panel per run, side by side."""
    traces = _traces(spec.input_dir, "dtc_n*.csv")
    fig, axes = plt.subplots(1, len(traces),
                             figsize=(3.6 * len(traces), 3.0), squeeze=False)
    for ax, (path, tab) in zip(axes[0], traces):
        meta = _sidecar(path)
        ax.plot(tab["time"], tab["mz_center"], lw=0.8, marker=".", ms=2)
        eps = meta.get("epsilon_flip", 0.0)
        title = f"n = {meta.get('n', '?')}"
        if eps:
            title += rf", $\epsilon$ = {eps:g}"
        ax.set_title(title, fontsize=9)
        ax.set_xlabel("t")
        ax.set_ylabel(r"$\langle\sigma^z_{L/2}\rangle$")
        ax.set_ylim(-1.05, 1.05)
    return fig


def _render_spectrum(spec: FigureSpec):
    tab = _read_table(spec.input_dir / "spectrum.csv", SPECTRUM_HEADER)
    report = _read_json(spec.input_dir / "slope.json")
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    mask = tab["power"] > 0
    ax.plot(tab["omega"][mask], tab["power"][mask], lw=0.8,
            label=f"n = {report.get('n', '?')} ensemble FFT")
    slope = report.get("envelope_slope")
    if slope is not None:
        w = tab["omega"][mask]
        guide_w = np.geomspace(float(w.min()), float(w.max()) / 4, 50)
        # anchor the guide to the largest plotted power at the window edge
        anchor = float(np.max(tab["power"][mask]))
        guide = anchor * (guide_w / guide_w[-1]) ** (2 * slope)
        ax.plot(guide_w, guide, "--", color="C3", lw=1.2,
                label=rf"$\omega^{{2 \times {slope:.2f}}}$ envelope")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\omega$")
    ax.set_ylabel(r"$\hat R(\omega)$")
    ax.legend(fontsize=7)
    return fig


def _render_bounds(spec: FigureSpec):
    tab = _read_table(spec.input_dir / "bounds.csv", BOUNDS_HEADER)
    fig, ax = plt.subplots(figsize=(4.2, 3.4))
    inv_t = 1.0 / tab["T"]
    ax.plot(inv_t, tab["measured_error"], "o-", ms=4, label="measured error")
    ax.plot(inv_t, tab["dipole_bound"], "s--", ms=4, label="dipole bound")
    ax.plot(inv_t, tab["quadrupole_bound"], "^--", ms=4,
            label="quadrupole bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("1/T")
    ax.set_ylabel("operator-norm error")
    ax.legend(fontsize=7)
    return fig


_RENDERERS = {
    "fig2": _render_fig2,
    "fig3": _render_fig3,
    "fig4": _render_fig4,
    "spectrum": _render_spectrum,
    "bounds": _render_bounds,
}


def render(spec: FigureSpec):
    """Render the figure, save it to spec.out_path, return the Figure.

    The returned object is kept open for the structural tests; callers
    that only want the file can close it with matplotlib.pyplot.close.
    """
    fig = _RENDERERS[spec.figure_id](spec)
    spec.axis_scales = [(ax.get_xscale(), ax.get_yscale())
                        for ax in fig.axes]
    fig.tight_layout()
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=160)
    return fig

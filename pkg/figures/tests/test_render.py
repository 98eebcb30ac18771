"""Structural golden checks: panel counts, axis scales, reference lines.

Pixel equality is deliberately avoided; what is asserted is the layout
the documentation promises (log-time trace panels, log-log power-law
panel, semilog exponential panel, Page line on every entropy panel,
fitted exponent in the legend).
"""

import json

import matplotlib.pyplot as plt
import numpy as np
import pytest

from rmdfigures import FigureInputError, FigureSpec, page_value, render


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close("all")


def legend_texts(ax):
    legend = ax.get_legend()
    return [t.get_text() for t in legend.get_texts()] if legend else []


def horizontal_lines(ax):
    out = []
    for line in ax.lines:
        y = line.get_ydata()
        if len(y) >= 2 and np.ptp(y) == 0:
            out.append(float(y[0]))
    return out


# --- spec validation ------------------------------------------------------

def test_unknown_figure_id(tmp_path):
    with pytest.raises(FigureInputError, match="unknown figure id"):
        FigureSpec("fig9", tmp_path, tmp_path / "x.png")


def test_missing_input_dir(tmp_path):
    with pytest.raises(FigureInputError, match="does not exist"):
        FigureSpec("fig3", tmp_path / "nope", tmp_path / "x.png")


def test_missing_required_file(tmp_path):
    with pytest.raises(FigureInputError, match="summary.csv"):
        FigureSpec("fig3", tmp_path, tmp_path / "x.png")


def test_missing_columns_is_descriptive(tmp_path):
    (tmp_path / "bounds.csv").write_text("T,t,wrong\n1,2,3\n")
    spec = FigureSpec("bounds", tmp_path, tmp_path / "x.png")
    with pytest.raises(FigureInputError, match="documented header"):
        render(spec)


def test_non_numeric_row(tmp_path, dtc_dir):
    (dtc_dir / "dtc_n1_invT50.csv").write_text(
        "time,energy,entropy,mz_center\n0.0,oops,0.0,0.0\n")
    spec = FigureSpec("fig4", dtc_dir, tmp_path / "x.png")
    with pytest.raises(FigureInputError, match="non-numeric"):
        render(spec)


# --- fig3 -----------------------------------------------------------------

def test_fig3_layout_and_scales(sweep_dir, tmp_path):
    out = tmp_path / "fig3.png"
    spec = FigureSpec("fig3", sweep_dir, out)
    fig = render(spec)
    assert out.is_file() and out.stat().st_size > 0
    assert len(fig.axes) == 4
    # traces on log time, power-law panel log-log, fallback panel semilog
    assert spec.axis_scales[0] == ("log", "linear")
    assert spec.axis_scales[1] == ("log", "linear")
    assert spec.axis_scales[2] == ("log", "log")
    assert spec.axis_scales[3] == ("linear", "log")


def test_fig3_slope_guide_in_legend(sweep_dir, tmp_path):
    fig = render(FigureSpec("fig3", sweep_dir, tmp_path / "f.png"))
    texts = " ".join(legend_texts(fig.axes[2]))
    assert "3.00" in texts  # synthetic tau = (1/T)^3 sweep
    assert "r2" in texts


def test_fig3_fit_line_matches_points(sweep_dir, tmp_path):
    fig = render(FigureSpec("fig3", sweep_dir, tmp_path / "f.png"))
    ax = fig.axes[2]
    # the drawn guide curve passes through the synthetic tau values
    guide = next(ln for ln in ax.lines if len(ln.get_xdata()) == 200)
    x, y = guide.get_xdata(), guide.get_ydata()
    assert np.allclose(y, x ** 3, rtol=1e-10)


def test_fig3_page_line_on_entropy_panel(sweep_dir, tmp_path):
    fig = render(FigureSpec("fig3", sweep_dir, tmp_path / "f.png"))
    assert any(np.isclose(y, page_value(8))
               for y in horizontal_lines(fig.axes[1]))
    assert any("Page" in t for t in legend_texts(fig.axes[1]))


def test_fig3_with_tms_companion(sweep_dir, tmp_path, artifact_writers):
    write_summary, write_fit = artifact_writers
    sub = sweep_dir / "tms"
    sub.mkdir()
    inv_ts = [14.0, 18.0, 22.0]
    write_summary(sub, inv_ts, [float(np.exp(0.4 * x)) for x in inv_ts])
    write_fit(sub, "exponential", 0.4, 0.0)
    spec = FigureSpec("fig3", sweep_dir, tmp_path / "f.png")
    fig = render(spec)
    assert spec.axis_scales[3] == ("linear", "log")
    assert any("0.400" in t for t in legend_texts(fig.axes[3]))


# --- fig2 -----------------------------------------------------------------

def test_fig2_layout(tms_dir, tmp_path):
    out = tmp_path / "fig2.svg"
    spec = FigureSpec("fig2", tms_dir, out)
    fig = render(spec)
    assert out.is_file()
    assert len(fig.axes) == 3
    assert spec.axis_scales[0] == ("log", "linear")
    assert spec.axis_scales[1] == ("log", "linear")
    assert spec.axis_scales[2] == ("linear", "log")  # semilog exponential fit


def test_fig2_rate_in_legend_and_page_line(tms_dir, tmp_path):
    fig = render(FigureSpec("fig2", tms_dir, tmp_path / "f.png"))
    assert any("0.350" in t for t in legend_texts(fig.axes[2]))
    assert any(np.isclose(y, page_value(8))
               for y in horizontal_lines(fig.axes[1]))


# --- fig4 -----------------------------------------------------------------

def test_fig4_side_by_side(dtc_dir, tmp_path):
    spec = FigureSpec("fig4", dtc_dir, tmp_path / "fig4.png")
    fig = render(spec)
    assert len(fig.axes) == 2
    assert all(s == ("linear", "linear") for s in spec.axis_scales)
    titles = sorted(ax.get_title() for ax in fig.axes)
    assert titles == ["n = 0", "n = 1"]


def test_fig4_requires_traces(tmp_path):
    spec = FigureSpec("fig4", tmp_path, tmp_path / "x.png")
    with pytest.raises(FigureInputError, match="no trace files"):
        render(spec)


# --- spectrum and bounds --------------------------------------------------

def test_spectrum_panel(tmp_path):
    omega = np.linspace(0.01, np.pi, 300)
    power = 2.0 * (1.0 - np.cos(omega))
    rows = ["omega,power"] + [f"{float(w)!r},{float(p)!r}"
                              for w, p in zip(omega, power)]
    (tmp_path / "spectrum.csv").write_text("\n".join(rows) + "\n")
    (tmp_path / "slope.json").write_text(json.dumps(
        {"n": 1, "envelope_slope": 1.02}))
    spec = FigureSpec("spectrum", tmp_path, tmp_path / "spec.png")
    fig = render(spec)
    assert len(fig.axes) == 1
    assert spec.axis_scales == [("log", "log")]
    assert any("1.02" in t for t in legend_texts(fig.axes[0]))


def test_bounds_panel(tmp_path):
    rows = ["T,t,measured_error,dipole_bound,quadrupole_bound"]
    for inv_t in (50, 60, 80):
        T = 1.0 / inv_t
        rows.append(f"{T!r},{100 * T!r},{T ** 2!r},{10 * T ** 2!r},{T ** 3!r}")
    (tmp_path / "bounds.csv").write_text("\n".join(rows) + "\n")
    spec = FigureSpec("bounds", tmp_path, tmp_path / "b.png")
    fig = render(spec)
    assert len(fig.axes) == 1
    assert spec.axis_scales == [("log", "log")]
    assert len(fig.axes[0].lines) == 3


# --- CLI ------------------------------------------------------------------

def test_cli_render(sweep_dir, tmp_path, capsys):
    from rmdfigures.cli import main
    out = tmp_path / "fig3.png"
    assert main(["render", "--figure", "fig3", "--input", str(sweep_dir),
                 "--out", str(out)]) == 0
    assert out.is_file()
    assert str(out) in capsys.readouterr().out


def test_cli_bad_input(tmp_path, capsys):
    from rmdfigures.cli import main
    code = main(["render", "--figure", "fig2", "--input", str(tmp_path),
                 "--out", str(tmp_path / "x.png")])
    assert code == 1
    assert "figure input error" in capsys.readouterr().err

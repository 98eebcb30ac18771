"""Experiment runner: sweeps, deterministic seeding, CSV/JSON artifacts.

Subcommands: sequence | simulate | tms | dtc | bounds | fit | spectrum.
Exit codes: 0 success, 1 config error, 2 resource cap exceeded,
3 analysis failure (no threshold crossing anywhere in a sweep).

Sweep parallelism is controlled by the RMDLAB_WORKERS environment
variable; per-job results are keyed and written in a fixed order so the
emitted files are byte-identical for any worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (ensemble_average_trace, fit_exponential,
                       fit_power_law, thermalization_time)
from .bounds import bound_constants, dipole_bound, quadrupole_bound
from .errors import ConfigError, NotThermalizedError, ResourceCapError
from .observables import subharmonic_weight
from .propagation import (ObservableTrace, evolve_dtc, evolve_tms,
                          expm_hermitian, heating_trajectory, iter_unit_cells,
                          make_propagators)
from .sequence import (ensemble_power_spectrum, generate_rmd,
                       low_frequency_exponent, sequence_to_text, spectrum_to_csv)
from .spinchain import SpinChainParams

# Paper-parameter presets {Jz, Jx, Bx, Bz, B0}; L is overridable downward.
PRESETS = {
    "fig2": {"Jz": 1.0, "Jx": 0.243, "Bx": 0.809, "Bz": 0.357, "B0": 0.21,
             "L": 10, "T": 0.05},
    "fig3": {"Jz": 1.0, "Jx": 0.71, "Bx": 3.2, "Bz": 0.25, "B0": 0.21,
             "L": 10, "T": 0.05},
    "fig4": {"Jz": 1.0, "Jx": 0.315, "Bx": 0.75, "Bz": 0.21, "B0": -0.05,
             "L": 10, "T": 0.02},
    "fig7": {"Jz": 1.0, "Jx": 0.315, "Bx": 0.25, "Bz": 0.21, "B0": -0.05,
             "L": 10, "T": 1.0 / 30.0},
    "fig8": {"Jz": 1.0, "Jx": 0.71, "Bx": 0.5, "Bz": 0.25, "B0": 0.21,
             "L": 10, "T": 0.05},
}


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("RMDLAB_WORKERS", "1")))
    except ValueError:
        return 1


def _load_params(args) -> SpinChainParams:
    if getattr(args, "config", None):
        d = json.loads(Path(args.config).read_text())
    elif getattr(args, "preset", None):
        d = dict(PRESETS[args.preset])
    else:
        raise ConfigError("either --config or --preset is required")
    if getattr(args, "L", None):
        d["L"] = args.L
    try:
        return SpinChainParams.from_dict(d)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _parse_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {text!r}") from exc


def _parse_threshold(text: str):
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("energy", "entropy"):
        raise ConfigError("threshold must look like energy:0.96:0.01")
    return parts[0], float(parts[1]), float(parts[2])


def _fmt(value: float) -> str:
    return repr(float(value))


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _manifest(out_dir: Path, config: dict):
    blob = json.dumps(config, sort_keys=True)
    manifest = {"config": config, "version": __version__,
                "config_hash": hashlib.sha256(blob.encode()).hexdigest()}
    _write(out_dir / "manifest.json",
           json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _write_trace(out_dir: Path, name: str, trace: ObservableTrace):
    _write(out_dir / f"{name}.csv", trace.to_csv())
    _write(out_dir / f"{name}.json", trace.sidecar() + "\n")


# --- subcommands ----------------------------------------------------------

def cmd_sequence(args) -> int:
    seq = generate_rmd(args.n, args.blocks, args.seed)
    text = sequence_to_text(seq)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_spectrum(args) -> int:
    if args.length & (args.length - 1):
        raise ConfigError("--len must be a power of two")
    n = args.n
    num_blocks = args.length >> n
    if num_blocks < 1:
        raise ConfigError("--len shorter than a single unit cell")
    spec = ensemble_power_spectrum(n, num_blocks, args.ensemble, args.seed)
    out = Path(args.out_dir)
    _write(out / "spectrum.csv", spectrum_to_csv(spec))
    report = {"n": n, "length": args.length, "ensemble": args.ensemble,
              "seed": args.seed}
    if n >= 1:
        try:
            report["envelope_slope"] = low_frequency_exponent(
                spec, args.omega_min, args.omega_max)
        except ValueError as exc:
            report["envelope_slope_error"] = str(exc)
    _write(out / "slope.json", json.dumps(report, sort_keys=True, indent=2) + "\n")
    _manifest(out, report)
    return 0


def _rmd_job(params, n, invt, seed, max_cells, record_factor, stop_ratio):
    p = params.with_inv_t(invt)
    pair = make_propagators(p)
    return heating_trajectory(pair, n, seed, max_cells=max_cells,
                              stop_energy_ratio=stop_ratio,
                              record_factor=record_factor)


def cmd_simulate(args) -> int:
    if args.protocol != "rmd":
        raise ConfigError(f"unknown protocol {args.protocol!r}")
    params = _load_params(args)
    inv_ts = _parse_list(args.invT)
    if not inv_ts or args.seeds < 1:
        raise ConfigError("sweep needs non-empty --invT and --seeds >= 1")
    diagnostic, center, band = _parse_threshold(args.threshold)
    seeds = [args.seed + i for i in range(args.seeds)]
    out = Path(args.out_dir)

    # Each realization stops a margin below the threshold band; the
    # seed-averaged curve is what gets thresholded, and its crossing must
    # land on the common (shortest-trace) grid.  A shallow margin usually
    # suffices and keeps runs short; sweep points whose averaged curve
    # does not bracket the band are rerun with a deeper margin.  The
    # retry decision depends only on trace contents, so output is still
    # deterministic for any worker count.
    def run_group(invt, margin):
        stop_ratio = max(0.0, center - band - margin)
        with ThreadPoolExecutor(max_workers=_workers()) as pool:
            return list(pool.map(
                lambda seed: _rmd_job(params, args.n, invt, seed,
                                      args.max_cells, args.record_factor,
                                      stop_ratio), seeds))

    groups = {}
    for invt in inv_ts:
        for margin in (0.05, 0.15, 0.35):
            group = run_group(invt, margin)
            mean_trace = ensemble_average_trace(group)
            try:
                tt = thermalization_time(mean_trace, diagnostic, center, band)
            except NotThermalizedError:
                tt = None
            groups[invt] = (group, mean_trace, tt)
            cell_time = (1 << args.n) / invt
            grid_exhausted = (mean_trace.times[-1]
                              >= (args.max_cells - 0.5) * cell_time)
            if tt is not None or grid_exhausted:
                break

    summary_rows = ["invT,tau,tau_lo,tau_hi,seed_count"]
    points = []
    for invt in inv_ts:
        group, mean_trace, tt = groups[invt]
        for seed, trace in zip(seeds, group):
            _write_trace(out, f"trace_invT{invt:g}_seed{seed}", trace)
        _write_trace(out, f"trace_invT{invt:g}_mean", mean_trace)
        if tt is None:
            continue  # dropped point, visible as a missing summary row
        summary_rows.append(",".join([
            _fmt(invt), _fmt(tt.tau), _fmt(tt.tau_lo), _fmt(tt.tau_hi),
            str(len(group))]))
        points.append((invt, tt.tau))
    _write(out / "summary.csv", "\n".join(summary_rows) + "\n")
    _manifest(out, {"command": "simulate", "protocol": "rmd", "n": args.n,
                    "params": params.to_dict(), "invT": inv_ts, "seeds": seeds,
                    "threshold": [diagnostic, center, band],
                    "max_cells": args.max_cells,
                    "record_factor": args.record_factor})
    if not points:
        print("no threshold crossing anywhere in sweep", file=sys.stderr)
        return 3
    if len(points) >= 4:
        fit = fit_power_law(points)
        _write(out / "fit.json",
               fit.to_json(n=args.n, diagnostic=diagnostic) + "\n")
    return 0


def _tms_job(params, invt, n_max):
    p = params.with_inv_t(invt)
    pair = make_propagators(p)
    return evolve_tms(np.eye(1, p.dim, 0, dtype=complex)[0],
                      iter_unit_cells(pair, n_max), pair)


def cmd_tms(args) -> int:
    params = _load_params(args)
    inv_ts = _parse_list(args.invT)
    if not inv_ts:
        raise ConfigError("sweep needs non-empty --invT")
    diagnostic, center, band = _parse_threshold(args.threshold)
    out = Path(args.out_dir)

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        traces = dict(zip(inv_ts, pool.map(
            lambda invt: _tms_job(params, invt, args.n_max), inv_ts)))

    summary_rows = ["invT,tau,tau_lo,tau_hi,seed_count"]
    points = []
    for invt in inv_ts:
        trace = traces[invt]
        _write_trace(out, f"trace_invT{invt:g}", trace)
        try:
            tt = thermalization_time(trace, diagnostic, center, band)
        except NotThermalizedError:
            continue
        summary_rows.append(",".join([
            _fmt(invt), _fmt(tt.tau), _fmt(tt.tau_lo), _fmt(tt.tau_hi), "1"]))
        points.append((invt, tt.tau))
    _write(out / "summary.csv", "\n".join(summary_rows) + "\n")
    _manifest(out, {"command": "tms", "params": params.to_dict(),
                    "invT": inv_ts, "n_max": args.n_max,
                    "threshold": [diagnostic, center, band]})
    if not points:
        print("no threshold crossing anywhere in sweep", file=sys.stderr)
        return 3
    if len(points) >= 4:
        fit = fit_exponential(points)
        _write(out / "fit.json", fit.to_json(diagnostic=diagnostic) + "\n")
    return 0


def cmd_dtc(args) -> int:
    params = _load_params(args)
    if args.invT:
        params = params.with_inv_t(float(args.invT))
    if args.n not in (0, 1):
        raise ConfigError("DTC protocol needs --n 0 or 1")
    pair = make_propagators(params)
    num_blocks = args.flips
    seq = generate_rmd(args.n, num_blocks, args.seed)
    psi0 = np.zeros(params.dim, dtype=complex)
    psi0[0] = 1.0
    trace = evolve_dtc(psi0, seq, pair, epsilon_flip=args.eps_flip)
    out = Path(args.out_dir)
    _write_trace(out, f"dtc_n{args.n}_invT{1.0 / params.T:g}", trace)
    weight = subharmonic_weight(trace.mz)
    report = {"command": "dtc", "n": args.n, "params": params.to_dict(),
              "eps_flip": args.eps_flip, "flips": args.flips,
              "seed": args.seed, "subharmonic_weight": weight}
    _write(out / "dtc.json", json.dumps(report, sort_keys=True, indent=2) + "\n")
    _manifest(out, report)
    return 0


def cmd_bounds(args) -> int:
    params = _load_params(args)
    scale = args.scale
    base = params.to_dict()
    for key in ("Jz", "Jx", "Bx", "Bz", "B0"):
        base[key] *= scale
    inv_ts = _parse_list(args.invT)
    rows = ["T,t,measured_error,dipole_bound,quadrupole_bound"]
    rng = np.random.Generator(np.random.Philox(key=np.uint64(args.seed)))
    for invt in inv_ts:
        p = SpinChainParams.from_dict({**base, "T": 1.0 / invt})
        pair = make_propagators(p)
        c = bound_constants(p)
        # cumulative error of a random dipole string against exp(-i H_F^0 t)
        U = np.eye(p.dim, dtype=complex)
        signs = rng.integers(0, 2, size=args.cells)
        for s in signs:
            D = (pair.U_minus @ pair.U_plus) if s else (pair.U_plus @ pair.U_minus)
            U = D @ U
        t_total = 2 * p.T * args.cells
        err = float(np.linalg.norm(U - expm_hermitian(pair.h_f0, t_total), 2))
        rows.append(",".join([_fmt(p.T), _fmt(t_total), _fmt(err),
                              _fmt(dipole_bound(c, p.T, t_total)),
                              _fmt(quadrupole_bound(c, p.T, t_total))]))
    out = Path(args.out_dir)
    _write(out / "bounds.csv", "\n".join(rows) + "\n")
    _manifest(out, {"command": "bounds", "params": base, "scale": scale,
                    "invT": inv_ts, "cells": args.cells, "seed": args.seed})
    return 0


def cmd_fit(args) -> int:
    text = Path(args.input).read_text().strip().split("\n")
    if not text or not text[0].startswith("invT,tau"):
        raise ConfigError("input must be a sweep summary CSV")
    points = []
    for row in text[1:]:
        cols = row.split(",")
        points.append((float(cols[0]), float(cols[1])))
    try:
        fit = (fit_power_law if args.model == "power_law"
               else fit_exponential)(points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = fit.to_json()
    if args.out:
        _write(Path(args.out), payload + "\n")
    else:
        print(payload)
    return 0


# --- argument parsing -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmd-lab",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common_model(sp):
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--config", help="JSON file with Jz,Jx,Bx,Bz,B0,L,T")
        sp.add_argument("--L", type=int, help="override chain length")

    sp = sub.add_parser("sequence", help="emit a drive sequence")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--blocks", type=int, required=True)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sequence)

    sp = sub.add_parser("spectrum", help="ensemble power spectrum + slope")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--len", dest="length", type=int, default=4096)
    sp.add_argument("--ensemble", type=int, default=200)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--omega-min", type=float, default=0.01)
    sp.add_argument("--omega-max", type=float, default=0.5)
    sp.add_argument("--out-dir", default="out_spectrum")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("simulate", help="RMD heating sweep")
    sp.add_argument("--protocol", default="rmd")
    sp.add_argument("--n", type=int, required=True)
    common_model(sp)
    sp.add_argument("--invT", required=True, help="comma-separated 1/T values")
    sp.add_argument("--seeds", type=int, default=5)
    sp.add_argument("--seed", type=int, default=1000, help="base seed")
    sp.add_argument("--threshold", default="energy:0.96:0.01")
    sp.add_argument("--max-cells", type=int, default=2_000_000)
    sp.add_argument("--record-factor", type=float, default=1.05)
    sp.add_argument("--out-dir", default="out_rmd")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("tms", help="Thue-Morse doubling sweep")
    common_model(sp)
    sp.add_argument("--invT", required=True)
    sp.add_argument("--n-max", type=int, default=40)
    sp.add_argument("--threshold", default="energy:0.7:0.1")
    sp.add_argument("--out-dir", default="out_tms")
    sp.set_defaults(func=cmd_tms)

    sp = sub.add_parser("dtc", help="time-crystal run")
    sp.add_argument("--n", type=int, required=True)
    common_model(sp)
    sp.add_argument("--invT", help="override 1/T")
    sp.add_argument("--eps-flip", type=float, default=0.0)
    sp.add_argument("--flips", type=int, default=100)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out-dir", default="out_dtc")
    sp.set_defaults(func=cmd_dtc)

    sp = sub.add_parser("bounds", help="Magnus bound vs measured error")
    common_model(sp)
    sp.add_argument("--scale", type=float, default=0.05,
                    help="coupling rescale so the bound is non-vacuous")
    sp.add_argument("--invT", default="30,40,50,60,80")
    sp.add_argument("--cells", type=int, default=50)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out-dir", default="out_bounds")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("fit", help="refit a sweep summary CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--model", choices=["power_law", "exponential"],
                    default="power_law")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ResourceCapError as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return 2
    except NotThermalizedError as exc:
        print(f"analysis failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

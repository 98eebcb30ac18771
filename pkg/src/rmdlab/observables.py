"""Energy, half-chain entanglement entropy, magnetization, DTC diagnostic."""

from __future__ import annotations

import numpy as np

SV_FLOOR = 1e-14  # singular values below this are decomposition noise


def energy_expectation(psi: np.ndarray, H: np.ndarray) -> float:
    """Re <psi|H|psi>; rejects a non-negligible imaginary part."""
    if H.shape != (len(psi), len(psi)):
        raise ValueError("state/operator dimension mismatch")
    val = np.vdot(psi, H @ psi)
    scale = max(1.0, float(np.abs(val)))
    if abs(val.imag) > 1e-10 * scale:
        raise ValueError(f"expectation has imaginary part {val.imag:g}")
    return float(val.real)


def half_chain_entropy(psi: np.ndarray) -> float:
    """Von Neumann entropy of the half-chain reduction, natural log.

    Amplitudes are reshaped to 2^(L/2) x 2^(L/2) with the low bits
    (sites 0..L/2-1) as columns; entropy comes from the singular values.
    """
    L = int(np.log2(len(psi)))
    if 1 << L != len(psi):
        raise ValueError("state dimension is not a power of two")
    if L % 2:
        raise ValueError("half-chain cut needs even L")
    half = 1 << (L // 2)
    M = np.reshape(psi, (half, half))
    s = np.linalg.svd(M, compute_uv=False)
    s = s[s > SV_FLOOR]
    p = s * s
    return float(-np.sum(p * np.log(p)))


def page_entropy(L: int) -> float:
    """Random-state half-chain average (L ln 2 - 1)/2."""
    if L % 2:
        raise ValueError("page value defined here for even L")
    return (L * np.log(2.0) - 1.0) / 2.0


def local_magnetization(psi: np.ndarray, site: int, axis: str = "z") -> float:
    """<sigma_site^axis> for axis in {x, y, z}."""
    dim = len(psi)
    L = int(np.log2(dim))
    if not 0 <= site < L:
        raise IndexError(f"site {site} out of range for L={L}")
    mask = 1 << site
    idx = np.arange(dim)
    s = 2 * ((idx & mask) >> site) - 1
    if axis == "z":
        val = np.sum(np.abs(psi) ** 2 * s) + 0j
    elif axis == "x":
        val = np.vdot(psi, psi[idx ^ mask])
    elif axis == "y":
        # sigma^y |down> = i |up>, sigma^y |up> = -i |down>
        val = np.vdot(psi, 1j * s * psi[idx ^ mask])
    else:
        raise ValueError(f"unknown axis {axis!r}")
    if abs(val.imag) > 1e-10:
        raise ValueError(f"magnetization has imaginary part {val.imag:g}")
    return float(val.real)


def subharmonic_weight(magnetizations, flip_interval: float | None = None) -> float:
    """Period-doubling fidelity zeta = |sum (-1)^k m_k| / sum |m_k| in [0, 1].

    Accepts either a plain magnetization array sampled at flip boundaries
    or an ObservableTrace; for a trace, `flip_interval` selects the rows
    that sit on flip boundaries (within rounding).
    """
    m = _flip_samples(magnetizations, flip_interval)
    if len(m) < 8:
        raise ValueError("need at least 8 flip-boundary samples")
    denom = np.sum(np.abs(m))
    if denom == 0:
        return 0.0
    signs = (-1.0) ** np.arange(len(m))
    return float(abs(np.sum(signs * m)) / denom)


def _flip_samples(magnetizations, flip_interval):
    trace = getattr(magnetizations, "mz", None)
    if trace is None:
        return np.asarray(magnetizations, dtype=float)
    times = magnetizations.times
    m = np.asarray(magnetizations.mz, dtype=float)
    if flip_interval is None:
        return m
    ratio = times / flip_interval
    on_boundary = np.abs(ratio - np.round(ratio)) < 1e-9
    return m[on_boundary]

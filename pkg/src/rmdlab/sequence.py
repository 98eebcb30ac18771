"""Random multipolar drive sequences and their spectral statistics.

An order-n sequence is a concatenation of unit cells of length 2^n drawn
from {cell_n, -cell_n}, where cell_0 = [+1] and each level doubles by
appending the sign-flipped copy.  Sequences are stored in *time order*:
the operator product U_1 = U_- U_+ applies U_+ first, so its symbols here
read [+1, -1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceCapError

# Hard default cap on symbol count; generous for desk-scale runs.
SEQUENCE_LENGTH_CAP = 1 << 24


def _rng(seed):
    # Counter-based generator: cheap to split by offsetting the key,
    # one draw per block keeps realizations reproducible under chunking.
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


@dataclass(frozen=True)
class DriveSequence:
    """Time-ordered +/-1 symbols with multipole order and RNG provenance."""

    symbols: np.ndarray
    order_n: int
    seed: int | None
    num_blocks: int

    def __post_init__(self):
        sym = np.ascontiguousarray(self.symbols, dtype=np.int8)
        object.__setattr__(self, "symbols", sym)
        if self.order_n < 0:
            raise ValueError("multipole order must be non-negative")
        if len(sym) != self.num_blocks * self.cell_length:
            raise ValueError("symbol count does not match num_blocks * 2^n")

    @property
    def cell_length(self) -> int:
        return 1 << self.order_n

    def __len__(self):
        return len(self.symbols)

    def block(self, block_index: int) -> np.ndarray:
        """Aligned unit cell number `block_index` (time order)."""
        if not 0 <= block_index < self.num_blocks:
            raise IndexError(f"block index {block_index} out of range")
        w = self.cell_length
        return self.symbols[block_index * w:(block_index + 1) * w]


@dataclass(frozen=True)
class SpectrumEstimate:
    """Discrete power spectrum |x^(omega)|^2 on frequencies in (0, pi]."""

    frequencies: np.ndarray
    power: np.ndarray
    ensemble_size: int = 1

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        p = np.asarray(self.power, dtype=float)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "power", p)
        if len(f) != len(p):
            raise ValueError("frequency/power length mismatch")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(p < 0):
            raise ValueError("power must be non-negative")


def _check_length(n: int, num_blocks: int, cap: int):
    length = num_blocks << n
    if length > cap:
        raise ResourceCapError(
            f"sequence length {length} exceeds cap {cap}")
    return length


def thue_morse_cell(n: int, cap: int = SEQUENCE_LENGTH_CAP) -> DriveSequence:
    """Deterministic order-n cell: the first 2^n Thue-Morse symbols."""
    if n < 0:
        raise ValueError("order must be non-negative")
    _check_length(n, 1, cap)
    cell = np.array([1], dtype=np.int8)
    for _ in range(n):
        cell = np.concatenate([cell, -cell])
    return DriveSequence(symbols=cell, order_n=n, seed=None, num_blocks=1)


def generate_rmd(n: int, num_blocks: int, seed: int,
                 cap: int = SEQUENCE_LENGTH_CAP) -> DriveSequence:
    """Random order-n multipolar sequence of `num_blocks` unit cells.

    Each cell is independently cell_n or its global sign flip with equal
    probability; deterministic given (n, num_blocks, seed).
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    if num_blocks < 1:
        raise ValueError("num_blocks must be positive")
    _check_length(n, num_blocks, cap)
    cell = thue_morse_cell(n, cap=cap).symbols
    signs = (1 - 2 * _rng(seed).integers(0, 2, size=num_blocks)).astype(np.int8)
    symbols = (signs[:, None] * cell[None, :]).reshape(-1)
    return DriveSequence(symbols=symbols, order_n=n, seed=int(seed),
                         num_blocks=num_blocks)


def block_moment(seq: DriveSequence, block_index: int, k: int) -> int:
    """Sum_t t^k b[t] over one aligned cell, t = 0 .. 2^n - 1.

    Vanishes exactly for all k < n; integer arithmetic throughout.
    """
    if k < 0:
        raise ValueError("moment order must be non-negative")
    b = seq.block(block_index).astype(object)
    t = np.arange(seq.cell_length, dtype=object)
    return int(np.sum(t**k * b))


def autocorrelation_empirical(n: int, num_blocks: int, lag: int,
                              ensemble_size: int, seed: int) -> float:
    """Ensemble- and time-averaged R(tau) = <x(t) x(t+tau)>.

    Realization i uses seed + i; the average runs over all valid t.
    """
    length = num_blocks << n
    tau = abs(int(lag))
    if tau >= length:
        raise ValueError(f"lag {lag} out of range for length {length}")
    acc = 0.0
    for i in range(ensemble_size):
        x = generate_rmd(n, num_blocks, seed + i).symbols.astype(np.float64)
        acc += float(np.mean(x[:length - tau] * x[tau:]))
    return acc / ensemble_size


def spectral_density_analytic(n: int, omega) -> float | np.ndarray:
    """Closed-form spectral density 2^n prod_{j=1..n} [1 - cos(2^{j-1} w)]."""
    w = np.asarray(omega, dtype=float)
    out = np.ones_like(w)
    for j in range(1, n + 1):
        out *= 1.0 - np.cos(2.0**(j - 1) * w)
    out *= 2.0**n
    return out if out.ndim else float(out)


def spectral_density_recursive(n: int, omega) -> np.ndarray:
    """Same density via the level recursion R_n = R_{n-1} [2 - 2 cos(2^{n-1} w)]."""
    w = np.asarray(omega, dtype=float)
    out = np.ones_like(w)
    for level in range(1, n + 1):
        out = out * (2.0 - 2.0 * np.cos(2.0**(level - 1) * w))
    return out


def power_spectrum_fft(seq: DriveSequence) -> SpectrumEstimate:
    """|x^(omega)|^2 at the positive DFT frequencies, normalized per unit cell.

    The autocorrelation behind the closed-form density counts lag products
    per unit cell, so the matching normalization is 1/num_blocks, i.e.
    2^n/length; ensemble averages then converge to the analytic density.
    Power at omega = 0 is excluded (frequencies lie in (0, pi]).
    """
    x = seq.symbols.astype(np.float64)
    if len(x) == 0:
        raise ValueError("empty sequence")
    length = len(x)
    spectrum = np.fft.rfft(x)
    power = np.abs(spectrum) ** 2 / seq.num_blocks  # = |X|^2 * 2^n / length
    omega = 2.0 * np.pi * np.arange(len(spectrum)) / length
    return SpectrumEstimate(frequencies=omega[1:], power=power[1:],
                            ensemble_size=1)


def ensemble_power_spectrum(n: int, num_blocks: int, ensemble_size: int,
                            seed: int,
                            cap: int = SEQUENCE_LENGTH_CAP) -> SpectrumEstimate:
    """Average power_spectrum_fft over `ensemble_size` seeded realizations.

    Summation runs in fixed realization order so results do not depend on
    scheduling.
    """
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be positive")
    length = _check_length(n, num_blocks, cap)
    acc = np.zeros(length // 2 + 1)
    for i in range(ensemble_size):
        x = generate_rmd(n, num_blocks, seed + i, cap=cap).symbols.astype(np.float64)
        acc += np.abs(np.fft.rfft(x)) ** 2
    power = acc / (ensemble_size * num_blocks)
    omega = 2.0 * np.pi * np.arange(len(acc)) / length
    return SpectrumEstimate(frequencies=omega[1:], power=power[1:],
                            ensemble_size=ensemble_size)


def low_frequency_exponent(spec: SpectrumEstimate, omega_min: float,
                           omega_max: float, num_bins: int = 12) -> float:
    """Log-log slope of the low-frequency amplitude envelope.

    The envelope is the per-bin maximum of |x^| over logarithmically spaced
    bins in [omega_min, omega_max]; for an order-n drive the slope
    approaches n as omega_max -> 0.
    """
    if not 0.0 < omega_min < omega_max <= np.pi / 4:
        raise ValueError("need 0 < omega_min < omega_max <= pi/4")
    mask = (spec.frequencies >= omega_min) & (spec.frequencies <= omega_max)
    if np.count_nonzero(mask) < 10:
        raise ValueError("fewer than 10 frequency bins in range")
    w = spec.frequencies[mask]
    amp = np.sqrt(spec.power[mask])
    edges = np.geomspace(omega_min, omega_max, max(num_bins, 8) + 1)
    idx = np.clip(np.searchsorted(edges, w, side="right") - 1, 0, len(edges) - 2)
    log_w, log_a = [], []
    for b in range(len(edges) - 1):
        sel = idx == b
        if not np.any(sel):
            continue
        peak = np.max(amp[sel])
        if peak <= 0:
            continue
        log_w.append(np.log(np.sqrt(edges[b] * edges[b + 1])))
        log_a.append(np.log(peak))
    if len(log_w) < 4:
        raise ValueError("too few populated envelope bins")
    slope = np.polyfit(log_w, log_a, 1)[0]
    return float(slope)


# --- serialization ---------------------------------------------------------

def sequence_to_text(seq: DriveSequence) -> str:
    """Two lines: JSON header {n, seed, num_blocks} then '+'/'-' symbols."""
    header = json.dumps({"n": seq.order_n, "seed": seq.seed,
                         "num_blocks": seq.num_blocks})
    body = "".join("+" if s > 0 else "-" for s in seq.symbols)
    return header + "\n" + body + "\n"


def sequence_from_text(text: str) -> DriveSequence:
    header_line, body = text.strip().split("\n", 1)
    header = json.loads(header_line)
    body = body.strip().replace("−", "-")
    symbols = np.array([1 if c == "+" else -1 for c in body], dtype=np.int8)
    return DriveSequence(symbols=symbols, order_n=header["n"],
                         seed=header["seed"], num_blocks=header["num_blocks"])


def spectrum_to_csv(spec: SpectrumEstimate) -> str:
    lines = ["omega,power"]
    for w, p in zip(spec.frequencies, spec.power):
        lines.append(f"{float(w)!r},{float(p)!r}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text: str, ensemble_size: int = 1) -> SpectrumEstimate:
    rows = text.strip().split("\n")
    if rows[0].strip() != "omega,power":
        raise ValueError("expected header 'omega,power'")
    freq, power = [], []
    for row in rows[1:]:
        w, p = row.split(",")
        freq.append(float(w))
        power.append(float(p))
    return SpectrumEstimate(frequencies=np.array(freq), power=np.array(power),
                            ensemble_size=ensemble_size)

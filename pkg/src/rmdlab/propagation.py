"""Exact propagators, recursive unit cells, and stroboscopic evolution.

Propagators are built by spectral decomposition of the dense Hamiltonians;
trajectories apply them symbol by symbol (matrix-vector), while full cell
matrices are only formed for the Thue-Morse doubling trick, the bound
checks, and per-cell fast paths of heating sweeps.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceCapError
from .observables import energy_expectation, half_chain_entropy, local_magnetization
from .sequence import DriveSequence, _rng
from .spinchain import SpinChainParams, build_hamiltonian, global_flip

UNITARY_DIM_CAP = 1 << 14


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) for Hermitian H via eigendecomposition."""
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * t * w)) @ V.conj().T


@dataclass(frozen=True)
class PropagatorPair:
    """U_+/- = exp(-i T H_+/-) plus the effective Hamiltonian H_F^0."""

    U_plus: np.ndarray
    U_minus: np.ndarray
    params: SpinChainParams
    h_f0: np.ndarray

    def unitary(self, symbol: int) -> np.ndarray:
        return self.U_plus if symbol > 0 else self.U_minus


@dataclass(frozen=True)
class UnitCellPair:
    """Level-n cell operators U_n and its sign-flipped partner."""

    U_n: np.ndarray
    U_tilde_n: np.ndarray
    level: int


def make_propagators(p: SpinChainParams) -> PropagatorPair:
    if p.dim > UNITARY_DIM_CAP:
        raise ResourceCapError(f"dimension {p.dim} exceeds cap")
    h_plus = build_hamiltonian(p, +1)
    h_minus = build_hamiltonian(p, -1)
    return PropagatorPair(U_plus=expm_hermitian(h_plus, p.T),
                          U_minus=expm_hermitian(h_minus, p.T),
                          params=p,
                          h_f0=build_hamiltonian(p, 0))


def iter_unit_cells(pair: PropagatorPair, n_max: int):
    """Yield UnitCellPair for n = 1..n_max via U_{n+1} = U~_n U_n, U~_{n+1} = U_n U~_n.

    Generator form keeps only one level in memory, so the Thue-Morse
    doubling evolution can run to large n.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    U = pair.U_minus @ pair.U_plus
    Ut = pair.U_plus @ pair.U_minus
    yield UnitCellPair(U_n=U, U_tilde_n=Ut, level=1)
    for level in range(2, n_max + 1):
        U, Ut = Ut @ U, U @ Ut
        yield UnitCellPair(U_n=U, U_tilde_n=Ut, level=level)


def build_unit_cells(pair: PropagatorPair, n_max: int) -> list[UnitCellPair]:
    return list(iter_unit_cells(pair, n_max))


def cell_matrix(pair: PropagatorPair, symbols) -> np.ndarray:
    """Product of elementary propagators for time-ordered symbols."""
    U = np.eye(pair.params.dim, dtype=complex)
    for s in symbols:
        U = pair.unitary(s) @ U
    return U


@dataclass
class ObservableTrace:
    """Rows of (time, energy <H_F^0>, half-chain entropy, central <sigma^z>)."""

    times: np.ndarray
    energy: np.ndarray
    entropy: np.ndarray
    mz: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.energy = np.asarray(self.energy, dtype=float)
        self.entropy = np.asarray(self.entropy, dtype=float)
        self.mz = np.asarray(self.mz, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def to_csv(self) -> str:
        lines = ["time,energy,entropy,mz_center"]
        for row in zip(self.times, self.energy, self.entropy, self.mz):
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def sidecar(self) -> str:
        meta = dict(self.metadata)
        blob = json.dumps(meta, sort_keys=True)
        meta["config_hash"] = hashlib.sha256(blob.encode()).hexdigest()
        return json.dumps(meta, sort_keys=True, indent=2)

    @classmethod
    def from_csv(cls, text: str, metadata: dict | None = None) -> "ObservableTrace":
        rows = text.strip().split("\n")
        if rows[0].strip() != "time,energy,entropy,mz_center":
            raise ValueError("unexpected trace header")
        cols = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
        return cls(times=cols[:, 0], energy=cols[:, 1], entropy=cols[:, 2],
                   mz=cols[:, 3], metadata=metadata or {})


class _Recorder:
    def __init__(self, pair: PropagatorPair, metadata: dict):
        self.pair = pair
        self.rows = []
        self.metadata = metadata

    def record(self, t: float, psi: np.ndarray):
        site = self.pair.params.L // 2
        self.rows.append((t,
                          energy_expectation(psi, self.pair.h_f0),
                          half_chain_entropy(psi),
                          local_magnetization(psi, site, "z")))

    def trace(self) -> ObservableTrace:
        arr = np.array(self.rows)
        return ObservableTrace(times=arr[:, 0], energy=arr[:, 1],
                               entropy=arr[:, 2], mz=arr[:, 3],
                               metadata=self.metadata)


def evolve_rmd(psi0: np.ndarray, seq: DriveSequence, pair: PropagatorPair,
               record_every: int = 1, record_each_step: bool = False) -> ObservableTrace:
    """Apply U_+/- per time-ordered symbol, recording at cell boundaries.

    Records at t = 0 and every `record_every`-th multipole cell boundary;
    `record_each_step` additionally records after every elementary step
    (mid-cell quasi-conservation checks).
    """
    p = pair.params
    if len(psi0) != p.dim:
        raise ValueError("state dimension does not match params")
    rec = _Recorder(pair, {
        "protocol": "rmd", "n": seq.order_n, "seed": seq.seed,
        "num_blocks": seq.num_blocks, "params": p.to_dict(),
        "sampling": "cell boundaries",
    })
    psi = psi0.astype(complex)
    rec.record(0.0, psi)
    cell_len = seq.cell_length
    for step, symbol in enumerate(seq.symbols, start=1):
        psi = pair.unitary(symbol) @ psi
        at_cell = step % cell_len == 0
        if record_each_step and not at_cell:
            rec.record(step * p.T, psi)
        elif at_cell and (step // cell_len) % record_every == 0:
            rec.record(step * p.T, psi)
    return rec.trace()


def evolve_tms(psi0: np.ndarray, cells, pair: PropagatorPair,
               n_record_max: int | None = None) -> ObservableTrace:
    """Thue-Morse evolution recorded at doubling times 2^n T.

    Uses |psi(2^{n+1} T)> = U~_n |psi(2^n T)>, so reaching time 2^n T
    costs n matrix-vector products beyond the cell construction.
    `cells` is any iterable of consecutive UnitCellPair starting at level 1.
    """
    p = pair.params
    rec = _Recorder(pair, {
        "protocol": "tms", "params": p.to_dict(),
        "sampling": "doubling times 2^n T",
    })
    psi = psi0.astype(complex)
    rec.record(0.0, psi)
    prev = None
    for cell in cells:
        if prev is None:
            if cell.level != 1:
                raise ValueError("cells must start at level 1")
            psi = cell.U_n @ psi
        else:
            if cell.level != prev.level + 1:
                raise ValueError("cells must be consecutive levels")
            psi = prev.U_tilde_n @ psi
        rec.record((1 << cell.level) * p.T, psi)
        prev = cell
        if n_record_max is not None and cell.level >= n_record_max:
            break
    return rec.trace()


def evolve_dtc(psi0: np.ndarray, seq: DriveSequence, pair: PropagatorPair,
               epsilon_flip: float = 0.0) -> ObservableTrace:
    """Dipolar (n=1) or random (n=0) drive with a global flip per cell.

    The cell operator is U' = (propagators of the cell, time order) X, i.e.
    the flip acts first within each cell; observables are recorded at every
    flip boundary (cell end).
    """
    if seq.order_n not in (0, 1):
        raise ValueError("DTC protocol defined for n in {0, 1}")
    p = pair.params
    X = global_flip(p.L, epsilon_flip)
    rec = _Recorder(pair, {
        "protocol": "dtc", "n": seq.order_n, "seed": seq.seed,
        "epsilon_flip": epsilon_flip, "params": p.to_dict(),
        "flip_interval": seq.cell_length * p.T,
        "sampling": "flip boundaries",
    })
    psi = psi0.astype(complex)
    rec.record(0.0, psi)
    cell_len = seq.cell_length
    for b in range(seq.num_blocks):
        psi = X @ psi
        for symbol in seq.block(b):
            psi = pair.unitary(symbol) @ psi
        rec.record((b + 1) * cell_len * p.T, psi)
    return rec.trace()


def heating_trajectory(pair: PropagatorPair, n: int, seed: int, *,
                       max_cells: int, stop_energy_ratio: float | None = None,
                       record_factor: float = 1.08,
                       block_chunk: int = 4096) -> ObservableTrace:
    """Fast-path RMD heating run with per-cell matrices and sparse recording.

    Equivalent to evolve_rmd on generate_rmd(n, max_cells, seed) sampled on
    a geometric schedule of cell boundaries (ratio `record_factor`), but one
    matrix-vector product per cell.  Stops early once the normalized energy
    <H_F^0>_t / <H_F^0>_0 falls below `stop_energy_ratio`.  Block signs come
    from the same counter-based stream as generate_rmd, drawn in chunks of
    `block_chunk`, so the trajectory is chunking-independent.
    """
    p = pair.params
    cell = np.array([1], dtype=np.int8)
    for _ in range(n):
        cell = np.concatenate([cell, -cell])
    M_plus = cell_matrix(pair, cell)
    M_minus = cell_matrix(pair, -cell)
    cell_time = (1 << n) * p.T

    psi = np.zeros(p.dim, dtype=complex)
    psi[0] = 1.0  # all spins down
    rec = _Recorder(pair, {
        "protocol": "rmd", "n": n, "seed": seed, "params": p.to_dict(),
        "sampling": "geometric cell boundaries",
        "record_factor": record_factor,
    })
    rec.record(0.0, psi)
    e0 = rec.rows[0][1]

    rng = _rng(seed)
    next_record = 1
    done_cells = 0
    while done_cells < max_cells:
        take = min(block_chunk, max_cells - done_cells)
        signs = 1 - 2 * rng.integers(0, 2, size=take)
        for s in signs:
            psi = (M_plus if s > 0 else M_minus) @ psi
            done_cells += 1
            if done_cells >= next_record:
                rec.record(done_cells * cell_time, psi)
                next_record = max(next_record + 1,
                                  int(np.ceil(next_record * record_factor)))
                if (stop_energy_ratio is not None and e0 != 0.0
                        and rec.rows[-1][1] / e0 < stop_energy_ratio):
                    return rec.trace()
    if rec.rows[-1][0] < done_cells * cell_time:
        rec.record(done_cells * cell_time, psi)
    return rec.trace()

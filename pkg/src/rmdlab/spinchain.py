"""Driven Ising chain on a ring: Hamiltonians, product states, spin flips.

Basis convention: bit i of the computational index is the sigma^z
eigenvalue of site i, with bit 0 meaning down (eigenvalue -1).  Pauli
matrices (eigenvalues +/-1), periodic boundary conditions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .errors import ResourceCapError

L_CAP = 14


@dataclass(frozen=True)
class SpinChainParams:
    """Couplings and geometry of the driven chain.

    H_pm = sum_i Jx XX + Jz ZZ + (B0 +/- Bx) X + Bz Z, sites mod L.
    T is the elementary interval of each drive symbol.
    """

    J_z: float
    J_x: float
    B_x: float
    B_z: float
    B_0: float
    L: int
    T: float

    def __post_init__(self):
        if self.L % 2 or not 4 <= self.L <= L_CAP:
            raise ValueError(f"L must be even and in [4, {L_CAP}], got {self.L}")
        if self.T <= 0:
            raise ValueError("T must be positive")

    @property
    def dim(self) -> int:
        return 1 << self.L

    def with_inv_t(self, inv_t: float) -> "SpinChainParams":
        return replace(self, T=1.0 / inv_t)

    def to_dict(self) -> dict:
        return {"Jz": self.J_z, "Jx": self.J_x, "Bx": self.B_x,
                "Bz": self.B_z, "B0": self.B_0, "L": self.L, "T": self.T}

    @classmethod
    def from_dict(cls, d: dict) -> "SpinChainParams":
        return cls(J_z=d["Jz"], J_x=d["Jx"], B_x=d["Bx"], B_z=d["Bz"],
                   B_0=d["B0"], L=int(d["L"]), T=float(d["T"]))

    @classmethod
    def from_json(cls, text: str) -> "SpinChainParams":
        return cls.from_dict(json.loads(text))


def _z_signs(L: int):
    """(dim, L) array of sigma^z eigenvalues per basis state and site."""
    idx = np.arange(1 << L)
    bits = (idx[:, None] >> np.arange(L)[None, :]) & 1
    return 2 * bits - 1


def build_hamiltonian(p: SpinChainParams, drive_sign: int) -> np.ndarray:
    """Dense H_+ (sign +1), H_- (sign -1) or H_F^0 (sign 0, drive omitted).

    Built by bit-wise Pauli action; real symmetric in the z basis.
    """
    if drive_sign not in (-1, 0, 1):
        raise ValueError("drive_sign must be one of {-1, 0, +1}")
    if p.L > L_CAP:
        raise ResourceCapError(f"L={p.L} exceeds cap {L_CAP}")
    dim = p.dim
    idx = np.arange(dim)
    s = _z_signs(p.L)

    H = np.zeros((dim, dim))
    diag = np.zeros(dim)
    for i in range(p.L):
        j = (i + 1) % p.L
        diag += p.J_z * s[:, i] * s[:, j] + p.B_z * s[:, i]
    H[idx, idx] = diag

    bx = p.B_0 + drive_sign * p.B_x
    for i in range(p.L):
        flip_i = idx ^ (1 << i)
        if bx != 0.0:
            H[flip_i, idx] += bx
        flip_ij = flip_i ^ (1 << ((i + 1) % p.L))
        H[flip_ij, idx] += p.J_x
    return H


def product_state(pattern) -> np.ndarray:
    """Computational basis state for a list of 'up'/'down' (or +/-1) per site."""
    bits = []
    for entry in pattern:
        if entry in ("up", 1, +1):
            bits.append(1)
        elif entry in ("down", -1, 0):
            bits.append(0)
        else:
            raise ValueError(f"unrecognized spin label {entry!r}")
    L = len(bits)
    index = sum(b << i for i, b in enumerate(bits))
    psi = np.zeros(1 << L, dtype=complex)
    psi[index] = 1.0
    return psi


def all_down_state(L: int) -> np.ndarray:
    return product_state(["down"] * L)


def global_flip(L: int, epsilon_flip: float = 0.0) -> np.ndarray:
    """exp(i (pi + eps)/2 sum_i sigma_i^x); eps = 0 is a perfect flip."""
    if abs(epsilon_flip) >= np.pi / 2:
        raise ValueError("flip imperfection must satisfy |eps| < pi/2")
    theta = (np.pi + epsilon_flip) / 2.0
    r = np.array([[np.cos(theta), 1j * np.sin(theta)],
                  [1j * np.sin(theta), np.cos(theta)]])
    return reduce(np.kron, [r] * L)


def rotate_bits(index: int, L: int, shift: int = 1) -> int:
    """Cyclic left rotation of the L-bit index (one-site translation)."""
    shift %= L
    mask = (1 << L) - 1
    return ((index << shift) | (index >> (L - shift))) & mask


def translation_operator(L: int) -> np.ndarray:
    """Permutation matrix of the one-site cyclic shift."""
    dim = 1 << L
    P = np.zeros((dim, dim))
    for i in range(dim):
        P[rotate_bits(i, L), i] = 1.0
    return P


def momentum_zero_basis(L: int) -> np.ndarray:
    """Orthonormal basis of the k=0 translation sector, as a (dim, m) matrix.

    Optional optimization path only; the core dynamics run in the full
    basis.  Column r is the normalized sum over the translation orbit of
    its representative.
    """
    dim = 1 << L
    seen = np.zeros(dim, dtype=bool)
    columns = []
    for rep in range(dim):
        if seen[rep]:
            continue
        orbit = set()
        i = rep
        while i not in orbit:
            orbit.add(i)
            seen[i] = True
            i = rotate_bits(i, L)
        col = np.zeros(dim)
        col[list(orbit)] = 1.0 / np.sqrt(len(orbit))
        columns.append(col)
    return np.column_stack(columns)

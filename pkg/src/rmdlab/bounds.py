"""Rigorous Magnus error bounds and golden-rule heating rates.

The bound constants follow the local-energy bookkeeping of the driven
Ising ring: every site touches two x-bonds, two z-bonds, both static
fields and the drive.  The inequalities are checked against measured
spectral-norm errors; they are valid but far from tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceCapError
from .propagation import PropagatorPair, expm_hermitian
from .spinchain import SpinChainParams

FGR_N_MAX = 80


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the single-cell error bound.

    n0 / n0_prime are the optimal Magnus truncation orders for the dipole
    and quadrupole bounds; math.inf marks the degenerate lambda = 0 case
    where the expansion never diverges.
    """

    k: int
    J: float
    lam: float
    V0: float
    n0: float
    n0_prime: float


@dataclass(frozen=True)
class FgrParams:
    """Golden-rule rate inputs: free prefactor A and bandwidth eps are
    fit parameters, Omega = 2 pi / T, x0 locates the Thue-Morse gap."""

    A: float
    eps: float
    Omega: float
    n: int
    x0: float = 1.0

    def __post_init__(self):
        if self.A <= 0 or self.eps <= 0 or self.Omega < 0:
            raise ValueError("A, eps must be positive and Omega non-negative")
        if self.n < 0:
            raise ValueError("n must be non-negative")


def bound_constants(p: SpinChainParams) -> BoundConstants:
    """Per-site energy scale J, lambda = 2kJ, extensive drive norm V0,
    and the truncation orders floor(1/(16 lambda 2T)), floor(1/(16 lambda 4T))."""
    k = 2
    J = 2 * abs(p.J_x) + 2 * abs(p.J_z) + abs(p.B_0) + abs(p.B_z) + abs(p.B_x)
    lam = 2 * k * J
    V0 = p.L * abs(p.B_x)
    if lam == 0.0:
        n0 = n0p = math.inf
    else:
        n0 = math.floor(1.0 / (16.0 * lam * 2.0 * p.T))
        n0p = math.floor(1.0 / (16.0 * lam * 4.0 * p.T))
    return BoundConstants(k=k, J=J, lam=lam, V0=V0, n0=n0, n0_prime=n0p)


def dipole_bound(c: BoundConstants, T: float, t: float) -> float:
    """Error bound V0 [6 * 2^-n0 + lambda T] t for t a multiple of 2T."""
    return c.V0 * (6.0 * 2.0 ** -c.n0 + c.lam * T) * t


def quadrupole_bound(c: BoundConstants, T: float, t: float) -> float:
    """Improved bound V0 [6 * 2^-n0' + (4/9)(4 T lambda)^2] t, t a multiple of 4T."""
    return c.V0 * (6.0 * 2.0 ** -c.n0_prime + (4.0 / 9.0) * (4.0 * T * c.lam) ** 2) * t


_CELLS = {
    # symbols in time order; the product premultiplies, so the operator
    # reads right to left
    "dipole": ((+1, -1), 2),        # U_- U_+
    "antidipole": ((-1, +1), 2),    # U_+ U_-
    "quadrupole": ((+1, -1, -1, +1), 4),      # U_+ U_- U_- U_+
    "antiquadrupole": ((-1, +1, +1, -1), 4),  # U_- U_+ U_+ U_-
}


def measured_cell_error(pair: PropagatorPair, h_f0: np.ndarray,
                        cell: str, T: float) -> float:
    """Spectral norm of (cell product) - exp(-i H_F^0 * cell duration)."""
    if pair.params.L > 10:
        raise ResourceCapError("operator-norm check capped at L = 10")
    if cell not in _CELLS:
        raise ValueError(f"unknown cell {cell!r}")
    factors, periods = _CELLS[cell]
    U = np.eye(pair.params.dim, dtype=complex)
    for sign in factors:
        U = pair.unitary(sign) @ U
    target = expm_hermitian(h_f0, periods * T)
    return float(np.linalg.norm(U - target, 2))


def fgr_rate(fp: FgrParams) -> float:
    """Closed-form rate A (2n)! (eps/Omega)^(2n+1) of the golden-rule
    integral over an omega^n low-frequency envelope."""
    if fp.n > FGR_N_MAX:
        raise ValueError(f"n={fp.n} exceeds factorial range cap {FGR_N_MAX}")
    if fp.Omega == 0:
        raise ValueError("algebraic rate diverges at Omega = 0")
    return fp.A * math.factorial(2 * fp.n) * (fp.eps / fp.Omega) ** (2 * fp.n + 1)


def fgr_rate_tms(fp: FgrParams) -> float:
    """Gapped (Thue-Morse) rate A exp(-x0 Omega / eps)."""
    if fp.x0 <= 0:
        raise ValueError("gap location x0 must be positive")
    return fp.A * math.exp(-fp.x0 * fp.Omega / fp.eps)

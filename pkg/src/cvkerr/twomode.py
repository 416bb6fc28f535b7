"""Two-mode checks of the exact quartic-gate identities.

Tensor ordering: mode 1 is the slow index, mode 2 the fast one, i.e.
``|n1, n2>`` sits at ``n1 * dim + n2``. Every two-mode generator used here
is a product ``A1 (x) B2`` of commuting single-mode hermitians (or a
single-mode operator), so its exponential comes from the single-mode
eigendecompositions without diagonalizing a ``dim^2`` matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, MemoryGuardError
from .fock import quadrature_power

MAX_TWO_MODE_DIM = 60


def _eig(M):
    w, v = np.linalg.eigh(M)
    return w, v


def exp_product(A: np.ndarray, B: np.ndarray, s: float) -> np.ndarray:
    """``exp(i s A (x) B)`` for hermitian single-mode ``A``, ``B``."""
    wa, va = _eig(A)
    wb, vb = _eig(B)
    V = np.kron(va, vb)
    phases = np.exp(1j * s * np.kron(wa, wb))
    return (V * phases) @ V.conj().T


def exp_mode(A: np.ndarray, s: float, mode: int) -> np.ndarray:
    """``exp(i s A)`` acting on one mode, identity on the other."""
    w, v = _eig(A)
    U = (v * np.exp(1j * s * w)) @ v.conj().T
    eye = np.eye(A.shape[0])
    return np.kron(U, eye) if mode == 1 else np.kron(eye, U)


def interior_indices(dim: int, block: int) -> np.ndarray:
    n1, n2 = np.meshgrid(np.arange(block), np.arange(block), indexing="ij")
    return (n1 * dim + n2).ravel()


def block_residual(A: np.ndarray, B: np.ndarray, dim: int, block: int) -> float:
    idx = interior_indices(dim, block)
    return float(np.linalg.norm((A - B)[:, idx], 2))


@dataclass(frozen=True)
class AppendixResiduals:
    residual1: float
    residual2: float
    residual2_swapped: float
    dim: int
    block: int

    def to_dict(self) -> dict:
        return {"residual1": self.residual1, "residual2": self.residual2,
                "residual2_swapped_order": self.residual2_swapped,
                "dim": self.dim, "block": self.block}


def appendix_default_block(dim: int) -> int:
    return dim // 4 + 1


def verify_appendix_identities(t1: float, t2: float, dim: int = 30,
                               block: int | None = None,
                               max_dim: int = MAX_TWO_MODE_DIM) -> AppendixResiduals:
    """Residuals of the two exact quartic-building identities.

    ``residual1`` compares the seven-gate product of cubic and ``X1 P2``
    gates against ``exp(3/2 i t1^2 t2 X1^2 X2)``. ``residual2`` compares the
    group commutator ``e^A e^B e^-A e^-B`` (``A = i t1 X1^2 P2``,
    ``B = i t1 X1^2 X2``) against ``exp(i t1^2/2 X1^4)``;
    ``residual2_swapped`` does the same for the ordering
    ``e^A e^B e^-B e^-A``, which collapses to the identity.
    Norms are taken over input states with both photon numbers below ``block``.
    """
    if dim > max_dim:
        raise MemoryGuardError(f"two-mode dim {dim} exceeds cap {max_dim} ({dim**2} states)")
    if dim < 4:
        raise InvalidArgument("dim must be >= 4")
    k = appendix_default_block(dim) if block is None else block
    if not 1 <= k <= dim:
        raise InvalidArgument("block must lie in 1..dim")
    # single-mode powers; the mode is fixed by the kron slot
    X = quadrature_power("X", 1, dim)
    X2 = quadrature_power("X", 2, dim)
    X3 = quadrature_power("X", 3, dim)
    X4 = quadrature_power("X", 4, dim)
    P = quadrature_power("P", 1, dim)

    cub_m = exp_mode(X3, -t2, 2)
    cub_p = exp_mode(X3, t2, 2)
    sh1 = exp_product(X, P, t1)
    sh2 = exp_product(X, P, -2 * t1)
    lhs1 = cub_m @ sh1 @ cub_p @ sh2 @ cub_p @ sh1 @ cub_m
    rhs1 = exp_product(X2, X, 1.5 * t1 ** 2 * t2)
    r1 = block_residual(lhs1, rhs1, dim, k)

    eA = exp_product(X2, P, t1)
    eB = exp_product(X2, X, t1)
    eAm = eA.conj().T
    eBm = eB.conj().T
    rhs2 = exp_mode(X4, t1 ** 2 / 2, 1)
    r2 = block_residual(eA @ eB @ eAm @ eBm, rhs2, dim, k)
    r2p = block_residual(eA @ eB @ eBm @ eAm, rhs2, dim, k)
    return AppendixResiduals(r1, r2, r2p, dim, k)

"""Truncated Fock-space operator algebra.

Polynomial quadrature operators are built as *exact truncations*: the
product is formed in a padded basis and cropped, so every retained matrix
element equals the infinite-dimensional one. Only the exponentials feel the
cutoff, and identity checks are therefore restricted to an interior block.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import BranchCutError, InvalidArgument, NumericalFailure
from .states import DEFAULT_DIM, FockState, default_margin

HERMITIAN_TOL = 1e-12
BRANCH_TOL = 1e-8


class Quadratures(NamedTuple):
    a: np.ndarray
    adag: np.ndarray
    X: np.ndarray
    P: np.ndarray
    N: np.ndarray


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def quadrature_operators(dim: int) -> Quadratures:
    """Ladder, quadrature and number operators on ``|0>..|dim-1>``."""
    if dim < 2:
        raise InvalidArgument(f"dim must be >= 2, got {dim}")
    a = _ladder(dim)
    adag = a.conj().T
    X = (adag + a) / 2
    P = 1j * (adag - a) / 2
    N = np.diag(np.arange(dim, dtype=float)).astype(complex)
    return Quadratures(a, adag, X, P, N)


@lru_cache(maxsize=64)
def _padded(dim: int, pad: int):
    q = quadrature_operators(dim + pad)
    return q.X, q.P


def operator_product(factors, dim: int) -> np.ndarray:
    """Exact truncation of ``Q1^k1 Q2^k2 ...`` for factors like ``[("X", 3), ("P", 3)]``."""
    pad = sum(k for _, k in factors) + 2
    X, P = _padded(dim, pad)
    out = np.eye(dim + pad, dtype=complex)
    for basis, k in factors:
        M = X if basis == "X" else P
        out = out @ np.linalg.matrix_power(M, k)
    return out[:dim, :dim]


@lru_cache(maxsize=256)
def _quadrature_power(basis: str, k: int, dim: int) -> np.ndarray:
    m = operator_product([(basis, k)], dim)
    m.setflags(write=False)
    return m


def quadrature_power(basis: str, k: int, dim: int) -> np.ndarray:
    if basis not in ("X", "P"):
        raise InvalidArgument(f"basis must be 'X' or 'P', got {basis!r}")
    return _quadrature_power(basis, int(k), int(dim))


def polynomial_operator(basis: str, coeffs: dict, dim: int) -> np.ndarray:
    """Hermitian ``sum_k c_k Q^k``."""
    H = np.zeros((dim, dim), complex)
    for k, c in coeffs.items():
        if c:
            H = H + c * quadrature_power(basis, k, dim)
    return H


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def cubic_commutator(dim: int) -> np.ndarray:
    """Exact truncation of ``[X^3, P^3]`` (anti-hermitian)."""
    return operator_product([("X", 3), ("P", 3)], dim) - operator_product([("P", 3), ("X", 3)], dim)


def interior(M: np.ndarray, margin: int | None = None) -> np.ndarray:
    k = M.shape[0] - (margin if margin is not None else default_margin(M.shape[0]))
    return M[:k, :k]


def is_hermitian(H: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    scale = max(float(np.abs(H).max()), 1.0)
    return float(np.abs(H - H.conj().T).max()) <= tol * scale


def unitarity_defect(U: np.ndarray, block: int | None = None) -> float:
    """``||(U^dag U - I) Pi_k||_2`` with ``Pi_k`` projecting onto the first ``block`` states."""
    dim = U.shape[0]
    k = block if block is not None else dim - default_margin(dim)
    D = U.conj().T @ U - np.eye(dim)
    return float(np.linalg.norm(D[:, :k], 2))


def unitary_from_generator(H: np.ndarray, t: float = 1.0) -> np.ndarray:
    """``exp(i t H)`` for hermitian ``H`` through its eigendecomposition."""
    H = np.asarray(H, complex)
    if not is_hermitian(H):
        raise InvalidArgument("generator is not hermitian")
    if t == 0:
        return np.eye(H.shape[0], dtype=complex)
    try:
        w, v = np.linalg.eigh((H + H.conj().T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    return (v * np.exp(1j * t * w)) @ v.conj().T


def unitary_log(U: np.ndarray, branch_tol: float = BRANCH_TOL) -> np.ndarray:
    """Principal logarithm of a (near-)unitary matrix; result is anti-hermitian.

    Raises :class:`BranchCutError` when an eigenvalue lies within
    ``branch_tol`` (in phase) of -1.
    """
    U = np.asarray(U, complex)
    T, Z = sla.schur(U, output="complex")
    diag = np.diag(T)
    phases = np.angle(diag)
    if np.any(np.pi - np.abs(phases) < branch_tol):
        raise BranchCutError("eigenvalue on the -1 branch cut; reduce the gate amplitude")
    off = T - np.diag(diag)
    if np.abs(off).max() <= 1e-10 * max(1.0, np.abs(diag).max()):
        logs = np.log(np.abs(diag)) + 1j * phases
        return (Z * logs) @ Z.conj().T
    # non-normal input: fall back to the general Schur-Parlett algorithm
    return sla.logm(U)


def kerr_generator(t: float, dim: int = DEFAULT_DIM) -> np.ndarray:
    """``G = i t (X^4 + P^4) + (4/9) t [X^3, P^3]`` (anti-hermitian)."""
    X4 = quadrature_power("X", 4, dim)
    P4 = quadrature_power("P", 4, dim)
    return 1j * t * (X4 + P4) + (4.0 / 9.0) * t * cubic_commutator(dim)


def kerr_target_unitary(t: float, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Reference Kerr evolution ``exp(G)``, Gaussian rotation and global phase dropped."""
    if abs(t) > 1:
        warnings.warn(f"Kerr amplitude |t|={abs(t)} > 1; truncation effects grow", stacklevel=2)
    if t == 0:
        return np.eye(dim, dtype=complex)
    G = kerr_generator(t, dim)
    # G is anti-hermitian, so -iG is hermitian
    return unitary_from_generator(-1j * G, 1.0)


def number_phase_unitary(phase_fn, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Diagonal ``exp(i f(n))`` on the number basis."""
    n = np.arange(dim)
    return np.diag(np.exp(1j * phase_fn(n)))


def rotation_unitary(theta: float, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Phase rotation ``exp(i theta N)``."""
    return number_phase_unitary(lambda n: theta * n, dim)


def displacement_unitary(beta: complex, dim: int = DEFAULT_DIM) -> np.ndarray:
    """``D(beta) = exp(beta a^dag - beta* a)`` from the padded-space exponential."""
    pad = 40
    q = quadrature_operators(dim + pad)
    G = beta * q.adag - np.conj(beta) * q.a
    return sla.expm(G)[:dim, :dim]


def apply(U: np.ndarray, state: FockState) -> FockState:
    if U.shape[0] != state.dim:
        raise InvalidArgument("operator and state truncations differ")
    return FockState(U @ state.coeffs, state.margin)


def expectation(op: np.ndarray, state: FockState) -> complex:
    c = state.coeffs
    return complex(np.vdot(c, op @ c) / np.vdot(c, c))


def interior_residual(A: np.ndarray, B: np.ndarray, block: int) -> float:
    """Operator 2-norm of ``(A - B)`` restricted to the first ``block`` input states."""
    return float(np.linalg.norm((A - B)[:, :block], 2))


def traceless(M: np.ndarray) -> np.ndarray:
    k = M.shape[0]
    return M - np.trace(M) / k * np.eye(k)


def phase_aligned_distance(A: np.ndarray, B: np.ndarray, block: int) -> float:
    """Block residual after removing the best global phase between ``A`` and ``B``."""
    a = A[:, :block]
    b = B[:, :block]
    ov = np.vdot(b, a)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - ph * b, 2))


def log10_or_floor(x: float, floor: float = -17.0) -> float:
    return math.log10(x) if x > 0 else floor

"""Position-grid wavefunctions and the gates that act on them.

The Fourier gate ``(F psi)(y) = pi^-1/2 \\int exp(2ixy) psi(x) dx`` becomes
an orthonormal centred DFT on the self-dual lattice. ``F X F^dag = P`` and
``F P F^dag = -X``, so ``F = exp(i pi N / 2)`` up to phase.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import fft as sfft

from .errors import AliasingError, DomainError, InvalidArgument, TruncationError
from .states import DEFAULT_TAIL_TOL, FockState, GridSpec, GridState

ALIAS_TOL = 1e-6
MAX_RECURRENCE_N = 200


def oscillator_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """Rows ``u_0..u_{n_max-1}`` of the hbar=1/2 oscillator eigenfunctions at ``x``.

    ``u_0 = (2/pi)^(1/4) exp(-x^2)`` and ``2x u_n = sqrt(n+1) u_{n+1} + sqrt(n) u_{n-1}``.
    The recurrence runs on scaled rows; a running log-scale absorbs the
    Gaussian so large ``|x|`` neither underflows nor overflows.
    """
    if n_max > MAX_RECURRENCE_N:
        raise InvalidArgument(f"recurrence is only validated up to n={MAX_RECURRENCE_N}")
    x = np.asarray(x, float)
    table = np.empty((n_max, x.size))
    log_scale = -x ** 2 + 0.25 * math.log(2 / math.pi)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    table[0] = np.exp(log_scale)
    for n in range(n_max - 1):
        nxt = (2 * x * cur - math.sqrt(n) * prev) / math.sqrt(n + 1)
        # per-step renormalization keeps the scaled rows O(1)
        s = np.maximum(np.abs(nxt), np.abs(cur))
        s = np.where(s > 0, s, 1.0)
        prev, cur = cur / s, nxt / s
        log_scale = log_scale + np.log(s)
        table[n + 1] = cur * np.exp(log_scale)
    return table


def fock_to_position(state: FockState, spec: GridSpec | None = None,
                     tail_tol: float = DEFAULT_TAIL_TOL, check: bool = True) -> GridState:
    spec = spec or GridSpec()
    if check and state.tail_mass() > tail_tol:
        raise TruncationError(f"Fock tail mass {state.tail_mass():.2e} exceeds {tail_tol:.0e}")
    table = oscillator_table(state.dim, spec.x)
    psi = GridState(spec, state.coeffs @ table)
    if check and psi.boundary_mass() > tail_tol:
        raise DomainError(f"grid window too small: boundary mass {psi.boundary_mass():.2e}")
    if check and abs(psi.norm - state.norm) > 1e-6:
        raise DomainError(f"grid sampling lost norm: {psi.norm:.9f} vs {state.norm:.9f}")
    return psi


def position_to_fock(state: GridState, dim: int, min_norm: float = 0.999) -> FockState:
    table = oscillator_table(dim, state.spec.x)
    c = table @ state.values * state.spec.dx
    out = FockState(c)
    if out.norm < min_norm * state.norm:
        raise TruncationError(f"Fock projection kept norm {out.norm:.6f} of {state.norm:.6f}")
    return out


def _alternating(n: int) -> np.ndarray:
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def _fourier_raw(values: np.ndarray, direction: str) -> np.ndarray:
    s = _alternating(values.size)
    if direction == "forward":
        return s * sfft.ifft(s * values, norm="ortho")
    if direction == "inverse":
        return s * sfft.fft(s * values, norm="ortho")
    raise InvalidArgument(f"direction must be 'forward' or 'inverse', got {direction!r}")


def fourier_gate(state: GridState, direction: str = "forward", power: int = 1,
                 alias_tol: float | None = ALIAS_TOL) -> GridState:
    """Apply ``F`` (forward) or ``F^dag`` (inverse) ``power`` times."""
    v = state.values
    for _ in range(power % 4):
        v = _fourier_raw(v, direction)
    out = GridState(state.spec, v)
    if alias_tol is not None and out.boundary_mass() > alias_tol:
        raise AliasingError(f"boundary mass {out.boundary_mass():.2e} after Fourier transform "
                             f"on {state.spec.n_points} points; use a larger grid")
    return out


def polynomial_values(coeffs: dict, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    for k, c in coeffs.items():
        if not 1 <= k <= 4:
            raise InvalidArgument(f"polynomial power {k} outside 1..4")
        out = out + c * x ** k
    return out


def apply_phase_polynomial(state: GridState, basis: str, coeffs: dict,
                           alias_tol: float | None = ALIAS_TOL) -> GridState:
    """``exp(i sum_k c_k Q^k)`` with ``Q`` the position (X) or momentum (P) quadrature."""
    if not coeffs or not any(coeffs.values()):
        return state
    phase = np.exp(1j * polynomial_values(coeffs, state.spec.x))
    if basis == "X":
        return GridState(state.spec, phase * state.values)
    if basis == "P":
        # exp(i f(P)) = F exp(i f(X)) F^dag
        mom = fourier_gate(state, "inverse", alias_tol=alias_tol)
        return fourier_gate(GridState(state.spec, phase * mom.values), "forward", alias_tol=alias_tol)
    raise InvalidArgument(f"basis must be 'X' or 'P', got {basis!r}")


def apply_momentum_multiplier(state: GridState, profile: np.ndarray,
                              alias_tol: float | None = ALIAS_TOL) -> GridState:
    """Multiply the momentum wavefunction by ``profile`` (sampled on the lattice)."""
    mom = fourier_gate(state, "inverse", alias_tol=alias_tol)
    return fourier_gate(GridState(state.spec, profile * mom.values), "forward", alias_tol=alias_tol)


def momentum_derivative_action(state: GridState) -> GridState:
    """``P psi`` computed spectrally."""
    mom = fourier_gate(state, "inverse", alias_tol=None)
    return fourier_gate(GridState(state.spec, state.spec.x * mom.values), "forward", alias_tol=None)


def gaussian(spec: GridSpec, center: float = 0.0, width: float = 1.0) -> GridState:
    """Normalized ``exp(-((x - center)/width)^2)``; width 1 is the vacuum."""
    return GridState(spec, np.exp(-((spec.x - center) / width) ** 2)).normalized()

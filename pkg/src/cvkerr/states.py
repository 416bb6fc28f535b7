"""Single-mode state containers and the overlap error metric.

Two representations are used throughout the package:

* :class:`FockState` -- coefficients on the truncated number basis ``|0>..|dim-1>``.
* :class:`GridState` -- samples of the position wavefunction on a uniform,
  self-dual lattice described by :class:`GridSpec`.

Quadratures follow the hbar = 1/2 convention, ``[X, P] = i/2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, InvalidArgument

DEFAULT_DIM = 60
DEFAULT_TAIL_TOL = 1e-8
DEFAULT_N_POINTS = 1024
EDGE_FRACTION = 0.05


def default_margin(dim: int) -> int:
    return max(dim // 4, 1)


@dataclass(frozen=True)
class FockState:
    coeffs: np.ndarray
    margin: int | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size < 1:
            raise InvalidArgument("Fock coefficients must be a non-empty vector")
        if not np.all(np.isfinite(c)):
            raise InvalidArgument("Fock coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return self.coeffs.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "FockState":
        n = self.norm
        if n == 0:
            raise InvalidArgument("cannot normalize the zero vector")
        return FockState(self.coeffs / n, self.margin)

    def tail_mass(self, margin: int | None = None) -> float:
        """Probability carried by the top ``margin`` number states."""
        m = margin if margin is not None else (self.margin or default_margin(self.dim))
        p = np.abs(self.coeffs) ** 2
        return float(p[self.dim - m:].sum() / p.sum())

    def is_trusted(self, tol: float = DEFAULT_TAIL_TOL) -> bool:
        return self.tail_mass() <= tol

    def inner(self, other: "FockState") -> complex:
        if other.dim != self.dim:
            raise InvalidArgument(f"Fock dimensions differ: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.coeffs, other.coeffs))

    @classmethod
    def basis(cls, n: int, dim: int = DEFAULT_DIM) -> "FockState":
        if not 0 <= n < dim:
            raise InvalidArgument(f"number state |{n}> outside truncation {dim}")
        c = np.zeros(dim, complex)
        c[n] = 1.0
        return cls(c)

    @classmethod
    def superposition(cls, amplitudes, dim: int = DEFAULT_DIM) -> "FockState":
        """Normalized ``sum_n amplitudes[n] |n>``."""
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.size > dim:
            raise InvalidArgument("more amplitudes than the truncation holds")
        c = np.zeros(dim, complex)
        c[: amps.size] = amps
        return cls(c).normalized()

    @classmethod
    def coherent(cls, beta: complex, dim: int = DEFAULT_DIM) -> "FockState":
        """Coherent state with <X> = Re(beta); wavefunction (2/pi)^(1/4) exp(-(x-beta)^2) for real beta."""
        from scipy.special import gammaln

        n = np.arange(dim)
        beta = complex(beta)
        if beta == 0:
            return cls.basis(0, dim)
        log_mag = -abs(beta) ** 2 / 2 + n * math.log(abs(beta)) - 0.5 * gammaln(n + 1)
        c = np.exp(log_mag) * np.exp(1j * n * np.angle(beta))
        # truncation drops the tail, so renormalize what is kept
        return cls(c).normalized()


@dataclass(frozen=True)
class GridSpec:
    """Uniform position lattice ``x_j = (j - N/2) dx`` with ``N dx^2 = pi``.

    The self-dual spacing makes the scaled kernel ``exp(2ixy)`` an exact
    centred DFT, so the Fourier gate is unitary and its fourth power is the
    identity on the lattice.
    """

    n_points: int = DEFAULT_N_POINTS
    requested_x_max: float | None = field(default=None, compare=False)

    def __post_init__(self):
        n = self.n_points
        if n < 256 or n & (n - 1):
            raise InvalidArgument(f"n_points must be a power of two >= 256, got {n}")

    @classmethod
    def from_window(cls, x_max: float, n_points: int = DEFAULT_N_POINTS) -> "GridSpec":
        """Self-dual grid with ``n_points`` samples; the requested window is only recorded."""
        if x_max <= 0:
            raise InvalidArgument("x_max must be positive")
        return cls(n_points, requested_x_max=float(x_max))

    @property
    def dx(self) -> float:
        return math.sqrt(math.pi / self.n_points)

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.dx

    @property
    def x_min(self) -> float:
        return -(self.n_points // 2) * self.dx

    @property
    def x_max(self) -> float:
        return (self.n_points // 2 - 1) * self.dx

    @property
    def resampled(self) -> bool:
        return self.requested_x_max is not None and not math.isclose(
            self.requested_x_max, -self.x_min, rel_tol=1e-9)

    def edge_mask(self, fraction: float = EDGE_FRACTION) -> np.ndarray:
        k = max(int(round(fraction * self.n_points)), 1)
        mask = np.zeros(self.n_points, bool)
        mask[:k] = True
        mask[-k:] = True
        return mask

    def to_dict(self) -> dict:
        return {"n_points": self.n_points, "dx": self.dx, "x_min": self.x_min,
                "x_max": self.x_max, "requested_x_max": self.requested_x_max}


@dataclass(frozen=True)
class GridState:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.spec.n_points,):
            raise InvalidArgument(
                f"expected {self.spec.n_points} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("grid samples must be finite")
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.values) ** 2)) * self.spec.dx)

    def normalized(self) -> "GridState":
        n = self.norm
        if n == 0:
            raise InvalidArgument("cannot normalize the zero wavefunction")
        return GridState(self.spec, self.values / n)

    def boundary_mass(self, fraction: float = EDGE_FRACTION) -> float:
        p = np.abs(self.values) ** 2
        total = p.sum()
        if total == 0:
            return 0.0
        return float(p[self.spec.edge_mask(fraction)].sum() / total)

    def is_trusted(self, tol: float = DEFAULT_TAIL_TOL) -> bool:
        return self.boundary_mass() <= tol

    def inner(self, other: "GridState") -> complex:
        if other.spec.n_points != self.spec.n_points:
            raise InvalidArgument("grid states live on different lattices")
        return complex(np.vdot(self.values, other.values) * self.spec.dx)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "re", "im"])
            for xi, v in zip(self.spec.x, self.values):
                w.writerow([repr(float(xi)), repr(float(v.real)), repr(float(v.imag))])
        return path

    @classmethod
    def from_csv(cls, path) -> "GridState":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        spec = GridSpec(data.shape[0])
        if not np.allclose(data[:, 0], spec.x, rtol=0, atol=1e-12):
            raise DomainError("CSV abscissae are not a self-dual lattice")
        return cls(spec, data[:, 1] + 1j * data[:, 2])


def fidelity_error(a, b, check_norm: bool = True) -> float:
    """``1 - |<a|b>|`` for two normalized states in the same representation."""
    if type(a) is not type(b) or not isinstance(a, (FockState, GridState)):
        raise InvalidArgument("fidelity_error needs two FockStates or two GridStates")
    if check_norm:
        for s in (a, b):
            if abs(s.norm - 1) > 1e-6:
                raise InvalidArgument(f"state is not normalized (norm={s.norm:.12g})")
    overlap = abs(a.inner(b))
    return float(min(max(1.0 - overlap, 0.0), 1.0))


def aligned_difference(exact: GridState, approx: GridState) -> np.ndarray:
    """``approx`` rotated onto ``exact``'s global phase, minus ``exact``."""
    ov = exact.inner(approx)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return approx.values / phase - exact.values

"""Ancilla wavefunctions for gate teleportation.

An ancilla ``|alpha> = \\int alpha(x) |x> dx`` teleports the diagonal gate
``A(X)`` with ``A(x) ~ alpha(x)``. Three recipes are supported: the ideal
phase profile, its first-order Taylor polynomial on a wide Gaussian, and
the photon-subtraction construction ``prod_k (X + iP + c_k)`` applied to
that Gaussian.

The wide Gaussian ``exp(-(x/w)^2)`` with ``w = e^r / sqrt(2)`` stands in for
the squeezed vacuum, itself an approximation of ``|p=0>``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, InvalidArgument, NumericalFailure
from .grid import momentum_derivative_action, polynomial_values
from .states import GridSpec, GridState

KINDS = ("ideal", "first_order", "photon_subtracted")
DEFAULT_SQUEEZING = 3.0
ROOT_TOL = 1e-9
EDGE_AMPLITUDE_TOL = 1e-6


@dataclass(frozen=True)
class AncillaSpec:
    kind: str = "ideal"
    t3: float = 0.0
    t4: float = 0.0
    squeezing: float = DEFAULT_SQUEEZING
    roots: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown ancilla kind {self.kind!r}")
        roots = tuple(complex(c) for c in self.roots)
        if self.kind == "photon_subtracted":
            if len(roots) not in (1, 2, 3, 4):
                raise InvalidArgument("photon subtraction needs 1..4 displacement roots")
        elif roots:
            raise InvalidArgument(f"roots only apply to photon_subtracted ancillae, not {self.kind}")
        if self.squeezing <= 0:
            raise InvalidArgument("squeezing parameter must be positive")
        object.__setattr__(self, "roots", roots)

    @property
    def envelope_width(self) -> float:
        return math.exp(self.squeezing) / math.sqrt(2.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t3": self.t3, "t4": self.t4, "squeezing": self.squeezing,
                "roots": [[c.real, c.imag] for c in self.roots]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "AncillaSpec":
        return cls(d["kind"], float(d.get("t3", 0.0)), float(d.get("t4", 0.0)),
                   float(d.get("squeezing", DEFAULT_SQUEEZING)),
                   tuple(complex(r, i) for r, i in d.get("roots", [])))

    @classmethod
    def from_json(cls, text: str) -> "AncillaSpec":
        return cls.from_dict(json.loads(text))


def squeezed_proxy(spec: GridSpec, squeezing: float = DEFAULT_SQUEEZING) -> GridState:
    w = math.exp(squeezing) / math.sqrt(2.0)
    return GridState(spec, np.exp(-(spec.x / w) ** 2))


def make_ancilla(spec: AncillaSpec, grid: GridSpec | None = None) -> GridState:
    grid = grid or GridSpec()
    x = grid.x
    if spec.kind == "ideal":
        # the flat phase state is windowed by the lattice; no boundary check
        phase = polynomial_values({3: spec.t3, 4: spec.t4}, x)
        return GridState(grid, np.exp(1j * phase)).normalized()
    if spec.kind == "first_order":
        poly = 1 + 1j * polynomial_values({3: spec.t3, 4: spec.t4}, x)
        return GridState(grid, poly * squeezed_proxy(grid, spec.squeezing).values).normalized()
    return photon_subtracted_ancilla(spec.roots, spec.squeezing, grid)


def photon_subtracted_ancilla(roots, squeezing: float = DEFAULT_SQUEEZING,
                              grid: GridSpec | None = None) -> GridState:
    """Normalized ``prod_k (X + iP + c_k)`` on the squeezed proxy; ``iP`` is applied spectrally."""
    grid = grid or GridSpec()
    psi = squeezed_proxy(grid, squeezing)
    edge = float(np.abs(psi.values[[0, -1]]).max())
    if edge > EDGE_AMPLITUDE_TOL:
        # a clipped envelope wraps discontinuously, and the spectral P rings everywhere
        raise AliasingError(
            f"squeezed envelope (r={squeezing}) reaches the grid edge with amplitude {edge:.1e}; "
            "use a larger grid or smaller r")
    x = grid.x
    for c in roots:
        p_psi = momentum_derivative_action(psi)
        psi = GridState(grid, x * psi.values + 1j * p_psi.values + complex(c) * psi.values)
    return psi.normalized()


def lowering_expansion(roots) -> np.ndarray:
    """Coefficients (constant first) of ``prod_k (x + d/(2dx) + c_k) 1``.

    Acting on the constant function is the ``|p=0>`` limit. Each factor is
    applied to the polynomial explicitly, so the result does not rely on
    any closed form.
    """
    poly = np.array([1.0 + 0j])
    for c in roots:
        shifted = np.concatenate([[0.0], poly])           # x * p(x)
        deriv = np.array([k * poly[k] for k in range(1, poly.size)] + [0.0, 0.0])
        padded = np.concatenate([poly, [0.0]])
        poly = shifted + 0.5 * deriv[: shifted.size] + complex(c) * padded
    return poly


def _sort_roots(roots) -> list:
    return sorted((complex(r) for r in roots), key=lambda z: (round(z.imag, 12), round(z.real, 12)))


def displacement_polynomial(t3: float, t4: float = 0.0) -> np.ndarray:
    """Monic polynomial (highest power first) whose roots are the displacement coefficients."""
    if t4 == 0.0:
        if t3 == 0.0:
            raise InvalidArgument("need a nonzero cubic or quartic amplitude")
        # e1 = 0, e2 = -3/2, e3 = 1/(i t3)
        e = [0.0, -1.5, -1j / t3]
    else:
        e1 = t3 / t4
        e = [e1, -3.0, -1.5 * e1, 0.75 - 1j / t4]
    coeffs = [1.0 + 0j]
    for j, ej in enumerate(e, start=1):
        coeffs.append((-1) ** j * ej)
    return np.array(coeffs, complex)


def condition_residuals(roots, t: float, order: int, t3: float = 0.0) -> tuple:
    c = [complex(z) for z in roots]
    if order == 3:
        c1, c2, c3 = c
        return (abs(c1 + c2 + c3), abs(c1 * c2 + c2 * c3 + c1 * c3 + 1.5),
                abs(1j * t * c1 * c2 * c3 - 1))
    # quartic: the expansion must be proportional to 1 + i t3 x^3 + i t x^4
    poly = lowering_expansion(c)
    scale = poly[0]
    target = np.array([1.0, 0.0, 0.0, 1j * t3, 1j * t])
    return tuple(float(v) for v in np.abs(poly / scale - target))


def solve_displacement_roots(t: float, order: int = 3, t3: float = 0.0) -> list:
    """Displacement coefficients ``c_k`` realizing ``1 + i t x^3`` (order 3) or ``1 + i t3 x^3 + i t x^4`` (order 4).

    Roots are sorted by imaginary part, then real part.
    """
    if not t > 0:
        raise InvalidArgument("t must be positive")
    if order == 3:
        poly = displacement_polynomial(t)
    elif order == 4:
        poly = displacement_polynomial(t3, t)
    else:
        raise InvalidArgument("order must be 3 or 4")
    roots = np.roots(poly)
    if roots.size != order or not np.all(np.isfinite(roots)):
        raise NumericalFailure("root finder did not return a full root set")
    # one Newton polish per root tightens the residuals for large 1/t
    dp = np.polyder(poly)
    roots = np.array([r - np.polyval(poly, r) / np.polyval(dp, r) for r in roots])
    out = _sort_roots(roots)
    res = condition_residuals(out, t, order, t3)
    if max(res) > ROOT_TOL:
        raise NumericalFailure(f"root conditions violated: {res}")
    return out


def envelope_gap(roots, t3: float, squeezing: float = DEFAULT_SQUEEZING,
                 grid: GridSpec | None = None, window: float = 2.0, t4: float = 0.0) -> float:
    """Sup over ``|x| <= window`` of the envelope-stripped photon-subtracted profile minus ``1 + i t3 x^3 + i t4 x^4``.

    The profile is divided by the squeezed proxy and scaled to 1 at the
    origin, so only the polynomial factor is compared.
    """
    grid = grid or GridSpec()
    psi = photon_subtracted_ancilla(roots, squeezing, grid)
    x = grid.x
    mask = np.abs(x) <= window
    q = psi.values[mask] / squeezed_proxy(grid, squeezing).values[mask]
    q = q / (psi.values[grid.n_points // 2] / squeezed_proxy(grid, squeezing).values[grid.n_points // 2])
    target = 1 + 1j * polynomial_values({3: t3, 4: t4}, x[mask])
    return float(np.abs(q - target).max())

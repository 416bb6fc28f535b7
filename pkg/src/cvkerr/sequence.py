"""Gate sequences and the Kerr decomposition schemes.

A :class:`GateSequence` stores terms in *application order*: ``terms[0]``
acts on the state first, i.e. it is the rightmost factor of the written
operator product. Each term is ``exp(i sum_k c_k Q^k)`` with ``Q`` in
{X, P} and powers 1..4.

Every Kerr scheme uses the cubic rescaling ``X^3 -> X^3 / sqrt(t)``,
``P^3 -> P^3 / sqrt(t)``, which promotes the ``t^2 [X^3, P^3]`` term of the
unscaled product to the order-``t`` cross term of the Kerr generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import fock
from .errors import InvalidArgument, NumericalFailure
from .grid import apply_phase_polynomial
from .states import DEFAULT_DIM, FockState, GridState

SQRT15 = math.sqrt(15.0)
THIRD_ORDER_COEFFS = (
    (9 - SQRT15) / 6,
    (-3 + SQRT15) / 3,
    -math.sqrt(5.0 / 3.0),
    (3 + SQRT15) / 6,
)
CROSS = 4.0 / 9.0

Q2_VARIANTS = ("q2", "inverse", "reversed", "inv_reversed")
SCHEME_KINDS = ("first_order", "separated", "q2", "q2_inverse", "q2_reversed",
                "q2_inv_reversed", "third_order")


@dataclass(frozen=True)
class GateTerm:
    basis: str
    coeffs: tuple = ()

    def __post_init__(self):
        if self.basis not in ("X", "P"):
            raise InvalidArgument(f"basis must be 'X' or 'P', got {self.basis!r}")
        raw = dict(self.coeffs)
        items = []
        for k, c in sorted(raw.items()):
            k = int(k)
            if not 1 <= k <= 4:
                raise InvalidArgument(f"power {k} outside 1..4")
            c = float(c)
            if not math.isfinite(c):
                raise InvalidArgument("gate coefficients must be finite")
            if c != 0.0:
                items.append((k, c))
        object.__setattr__(self, "coeffs", tuple(items))

    @property
    def as_dict(self) -> dict:
        return dict(self.coeffs)

    @property
    def is_identity(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return max((k for k, _ in self.coeffs), default=0)

    def coeff(self, k: int) -> float:
        return self.as_dict.get(k, 0.0)

    def merged(self, other: "GateTerm") -> "GateTerm":
        if other.basis != self.basis:
            raise InvalidArgument("only same-basis terms commute and merge")
        d = self.as_dict
        for k, c in other.coeffs:
            d[k] = d.get(k, 0.0) + c
        return GateTerm(self.basis, d)

    def scaled(self, s: float) -> "GateTerm":
        return GateTerm(self.basis, {k: s * c for k, c in self.coeffs})

    def inverse(self) -> "GateTerm":
        return self.scaled(-1.0)

    def to_dict(self) -> dict:
        return {"basis": self.basis, "coeffs": {str(k): c for k, c in self.coeffs}}

    @classmethod
    def from_dict(cls, d: dict) -> "GateTerm":
        return cls(d["basis"], {int(k): float(v) for k, v in d["coeffs"].items()})

    def __repr__(self):
        body = " + ".join(f"{c:.6g} {self.basis}^{k}" for k, c in self.coeffs) or "0"
        return f"exp(i[{body}])"


def X(**kw) -> GateTerm:
    return GateTerm("X", _powers(kw))


def P(**kw) -> GateTerm:
    return GateTerm("P", _powers(kw))


def _powers(kw):
    names = {"c1": 1, "c2": 2, "c3": 3, "c4": 4}
    return {names[k]: v for k, v in kw.items()}


@dataclass(frozen=True)
class GateSequence:
    terms: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise InvalidArgument("a gate sequence needs at least one term")
        for t in terms:
            if not isinstance(t, GateTerm):
                raise InvalidArgument(f"not a GateTerm: {t!r}")
        object.__setattr__(self, "terms", terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def __add__(self, other: "GateSequence") -> "GateSequence":
        """``self`` is applied first, then ``other``."""
        return GateSequence(self.terms + other.terms)

    def reversed(self) -> "GateSequence":
        return GateSequence(self.terms[::-1], dict(self.meta))

    def inverse(self) -> "GateSequence":
        return GateSequence(tuple(t.inverse() for t in reversed(self.terms)))

    def merge_adjacent(self) -> "GateSequence":
        out = []
        for t in self.terms:
            if out and out[-1].basis == t.basis:
                out[-1] = out[-1].merged(t)
            else:
                out.append(t)
        out = [t for t in out if not t.is_identity] or [GateTerm("X")]
        return GateSequence(tuple(out), dict(self.meta))

    def with_meta(self, **meta) -> "GateSequence":
        m = dict(self.meta)
        m.update(meta)
        return GateSequence(self.terms, m)

    def to_json(self) -> str:
        return json.dumps({
            "application_order": "terms[0] acts first (rightmost operator factor)",
            "terms": [t.to_dict() for t in self.terms],
            "meta": self.meta,
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GateSequence":
        d = json.loads(text)
        return cls(tuple(GateTerm.from_dict(t) for t in d["terms"]), d.get("meta", {}))


def _check_amplitude(t: float):
    if not (0 < t <= 0.5):
        raise InvalidArgument(f"Kerr amplitude must satisfy 0 < t <= 0.5, got {t}")


def kerr_first_order(t: float) -> GateSequence:
    """Four-gate postselected sequence.

    Operator product ``e^{i s P^3} e^{i a X^3} e^{-i s P^3 + i t P^4} e^{-i a X^3 + i t X^4}``
    with ``s = sqrt(t)`` and ``a = 4 s / 9``.
    """
    _check_amplitude(t)
    s = math.sqrt(t)
    a = CROSS * s
    terms = (
        GateTerm("X", {3: -a, 4: t}),
        GateTerm("P", {3: -s, 4: t}),
        GateTerm("X", {3: a}),
        GateTerm("P", {3: s}),
    )
    return GateSequence(terms, {"scheme": "first_order", "t": t})


def kerr_separated(t: float) -> GateSequence:
    """Six-gate variant with every cubic and quartic factor on its own, used deterministically."""
    _check_amplitude(t)
    s = math.sqrt(t)
    a = CROSS * s
    terms = (
        GateTerm("X", {4: t}),
        GateTerm("X", {3: -a}),
        GateTerm("P", {4: t}),
        GateTerm("P", {3: -s}),
        GateTerm("X", {3: a}),
        GateTerm("P", {3: s}),
    )
    return GateSequence(terms, {"scheme": "separated", "t": t})


def _q2_unscaled(t: float, cubic_scale: float) -> list:
    """Second-order product in application order, cubic amplitudes divided by ``cubic_scale``."""
    c = t / cubic_scale
    return [
        GateTerm("X", {4: t / 2, 3: -CROSS * c}),
        GateTerm("P", {3: -c}),
        GateTerm("X", {3: CROSS * c}),
        GateTerm("P", {4: t, 3: c}),
        GateTerm("X", {4: t / 2}),
    ]


def q2_family(t: float, variant: str = "q2", cubic_scale: float | None = None) -> GateSequence:
    """The second-order product and its inverse / reversed / inverse-reversed forms.

    ``cubic_scale`` defaults to ``sqrt(|t|)``; ``1.0`` gives the unscaled
    product whose logarithm is ``i t (X^4 + P^4) + (4/9) t^2 [X^3, P^3] + O(t^3)``.
    """
    if t == 0:
        raise InvalidArgument("t must be nonzero")
    if variant not in Q2_VARIANTS:
        raise InvalidArgument(f"unknown Q2 variant {variant!r}")
    scale = math.sqrt(abs(t)) if cubic_scale is None else float(cubic_scale)
    base = _q2_unscaled(t, scale)
    if variant == "q2":
        terms = base
    elif variant == "inverse":
        terms = [g.inverse() for g in reversed(base)]
    elif variant == "reversed":
        terms = list(reversed(base))
    else:
        terms = [g.inverse() for g in base]
    return GateSequence(tuple(terms), {"scheme": f"q2:{variant}", "t": t})


def _segment(ct: float, reversed_form: bool, cubic_scale: float) -> list:
    """``Q2(ct)`` or ``Q2rev(ct)``; negative ``ct`` goes through the explicit variants.

    ``Q2(-u)`` is the inverse-reversed form at ``u`` and ``Q2rev(-u)`` the
    inverse form at ``u``, so no coefficient is sign-flipped by hand.
    """
    if ct > 0:
        variant = "reversed" if reversed_form else "q2"
    else:
        variant = "inverse" if reversed_form else "inv_reversed"
    return list(q2_family(abs(ct), variant, cubic_scale).terms)


def third_order(t: float, cubic_scale: float | None = None) -> GateSequence:
    """``Q2(c1 t) Q2rev(c2 t) Q2(c3 t) Q2rev(c4 t)`` with the third-order coefficient set.

    All four segments share the overall rescaling ``sqrt(|t|)``, so the
    ``[X^3, P^3]`` weight of segment ``i`` is ``+-(4/9) c_i^2 t``.
    """
    if t == 0:
        raise InvalidArgument("t must be nonzero")
    if t < 0:
        raise InvalidArgument("negative Kerr amplitude: compose inverse sequences instead")
    scale = math.sqrt(t) if cubic_scale is None else float(cubic_scale)
    c1, c2, c3, c4 = THIRD_ORDER_COEFFS
    # rightmost factor acts first
    terms = (_segment(c4 * t, True, scale) + _segment(c3 * t, False, scale)
             + _segment(c2 * t, True, scale) + _segment(c1 * t, False, scale))
    seq = GateSequence(tuple(terms)).merge_adjacent()
    return seq.with_meta(scheme="third_order", t=t)


def verify_order_conditions(c) -> tuple:
    c1, c2, c3, c4 = (float(v) for v in c)
    r_a = abs(c1 + c2 + c3 + c4 - 1)
    r_b = abs(c1 ** 2 - c2 ** 2 + c3 ** 2 - c4 ** 2 - 1)
    r_c = abs(c1 ** 3 + c2 ** 3 + c3 ** 3 + c4 ** 3)
    r_d = abs(c1 ** 2 * c2 + c1 * c2 ** 2 + c1 ** 2 * c3 - c2 ** 2 * c3 - c1 * c3 ** 2
              - c2 * c3 ** 2 + c1 ** 2 * c4 - c2 ** 2 * c4 + c3 ** 2 * c4 + c1 * c4 ** 2
              + c2 * c4 ** 2 + c3 * c4 ** 2)
    return (r_a, r_b, r_c, r_d)


@dataclass(frozen=True)
class CompositionScheme:
    kind: str
    t: float
    repetitions: int = 1

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise InvalidArgument(f"unknown scheme kind {self.kind!r}")
        if self.t == 0:
            raise InvalidArgument("Kerr amplitude must be nonzero")
        if self.repetitions < 1:
            raise InvalidArgument("repetitions must be >= 1")

    @property
    def total_amplitude(self) -> float:
        return self.t * self.repetitions

    def base_sequence(self) -> GateSequence:
        k = self.kind
        if k == "first_order":
            return kerr_first_order(self.t)
        if k == "separated":
            return kerr_separated(self.t)
        if k == "third_order":
            return third_order(self.t)
        variant = {"q2": "q2", "q2_inverse": "inverse", "q2_reversed": "reversed",
                   "q2_inv_reversed": "inv_reversed"}[k]
        return q2_family(self.t, variant)

    def sequence(self) -> GateSequence:
        return repeat_scheme(self, self.repetitions)


def repeat_scheme(scheme, n: int) -> GateSequence:
    """``n``-fold concatenation of a scheme's base sequence (no cross-repetition merging)."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    base = scheme.base_sequence() if isinstance(scheme, CompositionScheme) else scheme
    seq = GateSequence(base.terms * n, dict(base.meta))
    return seq.with_meta(repetitions=n)


# ---------------------------------------------------------------- compilation

@lru_cache(maxsize=4096)
def _term_unitary(basis: str, coeffs: tuple, dim: int) -> np.ndarray:
    H = fock.polynomial_operator(basis, dict(coeffs), dim)
    U = fock.unitary_from_generator(H, 1.0)
    U.setflags(write=False)
    return U


def term_unitary(term: GateTerm, dim: int = DEFAULT_DIM) -> np.ndarray:
    if term.is_identity:
        return np.eye(dim, dtype=complex)
    return _term_unitary(term.basis, term.coeffs, dim)


def compile_sequence(seq: GateSequence, dim: int = DEFAULT_DIM) -> np.ndarray:
    U = np.eye(dim, dtype=complex)
    for term in seq:
        U = term_unitary(term, dim) @ U
    return U


def apply_sequence(seq: GateSequence, state):
    """Run ``seq`` on a :class:`GridState` (phase gates) or :class:`FockState` (compiled terms)."""
    if isinstance(state, GridState):
        for term in seq:
            state = apply_phase_polynomial(state, term.basis, term.as_dict)
        return state
    if isinstance(state, FockState):
        c = state.coeffs
        for term in seq:
            c = term_unitary(term, state.dim) @ c
        return FockState(c, state.margin)
    raise InvalidArgument("state must be a GridState or FockState")


# ------------------------------------------------------------ BCH diagnostics

BCH_BLOCK = 10


def log_residual(seq: GateSequence, generator: np.ndarray, block: int = BCH_BLOCK) -> float:
    """Traceless block norm of ``log(U G_target^dag)`` for ``G_target = exp(generator)``."""
    dim = generator.shape[0]
    U = compile_sequence(seq, dim)
    T = fock.unitary_from_generator(-1j * generator, 1.0)
    L = fock.unitary_log(U @ T.conj().T)
    return float(np.linalg.norm(fock.traceless(L[:block, :block]), 2))


def scaling_exponent(ts, residuals) -> float:
    """Least-squares slope of ``log10(residual)`` against ``log10(t)``."""
    return float(np.polyfit(np.log10(ts), np.log10(residuals), 1)[0])


def unscaled_q2_generator(t: float, dim: int = DEFAULT_DIM) -> np.ndarray:
    """``i t (X^4 + P^4) + (4/9) t^2 [X^3, P^3]``: the logarithm the unscaled Q2 targets."""
    X4 = fock.quadrature_power("X", 4, dim)
    P4 = fock.quadrature_power("P", 4, dim)
    return 1j * t * (X4 + P4) + CROSS * t * t * fock.cubic_commutator(dim)


@dataclass(frozen=True)
class LogExpansionCheck:
    fitted: tuple
    predicted: tuple
    residuals: tuple
    condition: float


def concatenation_sequence(p, t: float) -> GateSequence:
    """Four-factor product with free coefficients ``p1..p8``."""
    p1, p2, p3, p4, p5, p6, p7, p8 = (float(v) for v in p)
    s = math.sqrt(t)
    return GateSequence((
        GateTerm("X", {3: p7 * s, 4: p8 * t}),
        GateTerm("P", {3: p5 * s, 4: p6 * t}),
        GateTerm("X", {3: p3 * s, 4: p4 * t}),
        GateTerm("P", {3: p1 * s, 4: p2 * t}),
    ))


def verify_log_expansion(p, t: float, dim: int = DEFAULT_DIM, block: int = BCH_BLOCK,
                         max_condition: float = 1e8) -> LogExpansionCheck:
    """Fit ``log U`` on a low block to ``i(a X^3 + b P^3 + c X^4 + d P^4) + e [X^3,P^3] + const``.

    Returns fitted ``(a, b, c, d, e)``, the values predicted by the
    second-order expansion and their absolute differences.
    """
    if t <= 0 or t > 1e-2:
        raise InvalidArgument("verify_log_expansion needs 0 < t <= 1e-2")
    p1, p2, p3, p4, p5, p6, p7, p8 = (float(v) for v in p)
    s = math.sqrt(t)
    predicted = ((p3 + p7) * s, (p1 + p5) * s, (p4 + p8) * t, (p2 + p6) * t,
                 0.5 * (p1 * p3 - p3 * p5 + p1 * p7 + p5 * p7) * t)
    U = compile_sequence(concatenation_sequence(p, t), dim)
    L = fock.unitary_log(U)[:block, :block]
    basis = [1j * fock.quadrature_power("X", 3, dim), 1j * fock.quadrature_power("P", 3, dim),
             1j * fock.quadrature_power("X", 4, dim), 1j * fock.quadrature_power("P", 4, dim),
             fock.cubic_commutator(dim), 1j * np.eye(dim)]
    A = np.stack([b[:block, :block].ravel() for b in basis], axis=1)
    # real coefficients: stack real and imaginary parts
    A_r = np.vstack([A.real, A.imag])
    y_r = np.concatenate([L.ravel().real, L.ravel().imag])
    cond = float(np.linalg.cond(A_r))
    if cond > max_condition:
        raise NumericalFailure(f"basis projection ill-conditioned (cond={cond:.2e}); enlarge dim")
    coef, *_ = np.linalg.lstsq(A_r, y_r, rcond=None)
    fitted = tuple(float(v) for v in coef[:5])
    residuals = tuple(abs(f - q) for f, q in zip(fitted, predicted))
    return LogExpansionCheck(fitted, predicted, residuals, cond)


def as_terms(items: Iterable) -> GateSequence:
    """Build a sequence from ``(basis, {power: coeff})`` pairs."""
    return GateSequence(tuple(GateTerm(b, c) for b, c in items))

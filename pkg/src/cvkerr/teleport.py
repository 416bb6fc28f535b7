"""Measurement-based gate teleportation on position-grid wavefunctions.

One teleportation step couples the input to an ancilla ``alpha(x)``,
measures the input's P quadrature with outcome ``beta`` and leaves

    A(X) F^dag exp(2i beta X) |psi> = A(X) exp(-2i beta P) F^dag |psi>

on the ancilla mode, i.e. ``alpha(x) * (F^dag psi)(x - beta)``. A P-basis
step runs the same circuit conjugated by ``F`` and yields
``A(P) exp(2i beta X) F^dag |psi>``. Either way a step applies the gate
followed by an inverse Fourier transform, so a run tracks the Fourier
count ``m`` and teleports the rotated gate ``F^dag^(m+1) g F^(m+1)`` to
realize the logical gate ``g``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import fft as sfft

from .ancilla import (DEFAULT_SQUEEZING, displacement_polynomial, photon_subtracted_ancilla,
                      squeezed_proxy)
from .errors import DomainError, InvalidArgument, NumericalFailure, PostselectFailure
from .grid import (apply_phase_polynomial, fock_to_position, fourier_gate,
                   polynomial_values)
from .sequence import CompositionScheme, GateSequence, GateTerm, apply_sequence, kerr_separated
from .states import FockState, GridSpec, GridState

MODES = ("direct", "postselect", "deterministic")
STRATEGIES = ("primed", "preapply")
ANCILLA_KINDS = ("ideal", "first_order", "photon_subtracted")


# ------------------------------------------------------------ single steps

def _check_pair(state: GridState, ancilla: GridState):
    if state.spec.n_points != ancilla.spec.n_points:
        raise InvalidArgument("input and ancilla live on different grids")


def _x_step(state: GridState, ancilla: GridState, beta: float, alias_tol) -> GridState:
    spec = state.spec
    if not spec.x_min <= beta <= spec.x_max:
        raise DomainError(f"outcome beta={beta} outside the grid range")
    mod = GridState(spec, np.exp(2j * beta * spec.x) * state.values)
    phi = fourier_gate(mod, "inverse", alias_tol=alias_tol)
    return GridState(spec, ancilla.values * phi.values)


def teleport_step(state: GridState, ancilla: GridState, beta: float = 0.0, basis: str = "X",
                  alias_tol: float | None = 1e-6, normalize: bool = True) -> GridState:
    """One teleportation step with measurement outcome ``beta``.

    ``basis='P'`` reads the ancilla profile as a momentum wavefunction.
    """
    _check_pair(state, ancilla)
    if basis == "X":
        out = _x_step(state, ancilla, beta, alias_tol)
    elif basis == "P":
        inner = fourier_gate(state, "inverse", alias_tol=alias_tol)
        out = fourier_gate(_x_step(inner, ancilla, beta, alias_tol), "forward", alias_tol=alias_tol)
    else:
        raise InvalidArgument(f"basis must be 'X' or 'P', got {basis!r}")
    if not normalize:
        return out
    if out.norm == 0:
        raise NumericalFailure("teleportation output vanished")
    return out.normalized()


def _shift_index(spec: GridSpec) -> np.ndarray:
    """Lattice shift ``s`` (mod N) for each outcome ``beta_j = x_j``."""
    n = spec.n_points
    return (np.arange(n) - n // 2) % n


def homodyne_density(state: GridState, ancilla: GridState, basis: str = "X") -> np.ndarray:
    """Outcome density on the lattice ``beta_j = x_j``, normalized so ``sum p dx = 1``.

    ``p(beta) = \\int |alpha(x)|^2 |phi(x - beta)|^2 dx`` with ``phi = F^dag psi``
    (X basis), evaluated as a circular correlation.
    """
    _check_pair(state, ancilla)
    spec = state.spec
    src = state if basis == "X" else fourier_gate(state, "inverse", alias_tol=None)
    phi = fourier_gate(src, "inverse", alias_tol=None).values
    a2 = np.abs(ancilla.values) ** 2
    f2 = np.abs(phi) ** 2
    corr = sfft.ifft(sfft.fft(a2) * np.conj(sfft.fft(f2))).real
    p = np.clip(corr[_shift_index(spec)], 0.0, None)
    total = p.sum() * spec.dx
    if not np.isfinite(total) or total <= 1e-300:
        raise NumericalFailure("homodyne density is degenerate")
    return p / total


def homodyne_sample(state: GridState, ancilla: GridState, rng: np.random.Generator,
                    basis: str = "X", size: int | None = None):
    """Draw lattice outcomes from :func:`homodyne_density`."""
    p = homodyne_density(state, ancilla, basis) * state.spec.dx
    idx = rng.choice(p.size, size=size, p=p / p.sum())
    return state.spec.x[idx] if size is not None else float(state.spec.x[idx])


def window_probability(density: np.ndarray, spec: GridSpec, window: float) -> float:
    return float(density[np.abs(spec.x) <= window].sum() * spec.dx)


# ------------------------------------------------------ corrections, Fourier

def _shifted_difference(coeffs: dict, beta: float) -> dict:
    """Coefficients of ``f(q) - f(q + beta)`` for ``f(q) = sum_k c_k q^k``."""
    out = {}
    for k, c in coeffs.items():
        for j in range(k):
            out[j] = out.get(j, 0.0) - c * math.comb(k, j) * beta ** (k - j)
    out.pop(0, None)  # global phase
    return out


def correction_sequence(gate: GateTerm, beta: float) -> GateSequence:
    """``A exp(2i beta P) A^dag`` (X gate) or ``A exp(-2i beta X) A^dag`` (P gate).

    Returned in application order: the displacement first, then the
    polynomial ``f(Q) - f(Q + beta)`` of degree ``deg A - 1``.
    """
    if gate.basis == "X":
        disp = GateTerm("P", {1: 2 * beta})
    else:
        disp = GateTerm("X", {1: -2 * beta})
    poly = GateTerm(gate.basis, _shifted_difference(gate.as_dict, beta))
    terms = tuple(t for t in (disp, poly) if not t.is_identity)
    return GateSequence(terms or (GateTerm(gate.basis),), {"beta": beta})


def rotate_term(term: GateTerm, n: int = 1) -> GateTerm:
    """``F^dag^n (term) F^n`` using ``F^dag X F = -P`` and ``F^dag P F = X``."""
    basis, coeffs = term.basis, term.as_dict
    for _ in range(n % 4):
        if basis == "X":
            basis, coeffs = "P", {k: c * (-1) ** k for k, c in coeffs.items()}
        else:
            basis = "X"
    return GateTerm(basis, coeffs)


def fourier_modify(seq: GateSequence) -> GateSequence:
    """Primed sequence whose teleportation chain realizes ``G_n ... G_1 F^dag^n``.

    Term ``k`` (1-based, of ``n``) becomes ``F^(n-k) G_k F^dag^(n-k)``, so the
    last term is unchanged.
    """
    n = len(seq)
    return GateSequence(tuple(rotate_term(g, (k - n) % 4) for k, g in enumerate(seq, start=1)),
                        dict(seq.meta))


# -------------------------------------------------------------- ancillae

def ancilla_for_term(term: GateTerm, grid: GridSpec, kind: str = "ideal",
                     squeezing: float = DEFAULT_SQUEEZING) -> GridState:
    """Ancilla profile for one physical gate.

    Quadratic and linear parts are Gaussian and always exact; the
    ``kind`` only affects the cubic and quartic factor.
    """
    x = grid.x
    d = term.as_dict
    gauss = {k: d[k] for k in (1, 2) if k in d}
    cq = {k: d[k] for k in (3, 4) if k in d}
    base = np.exp(1j * polynomial_values(gauss, x))
    if kind == "ideal":
        prof = base * np.exp(1j * polynomial_values(cq, x))
    elif kind == "first_order":
        prof = base * (1 + 1j * polynomial_values(cq, x)) * squeezed_proxy(grid, squeezing).values
    elif kind == "photon_subtracted":
        if cq:
            roots = np.roots(displacement_polynomial(cq.get(3, 0.0), cq.get(4, 0.0)))
            core = photon_subtracted_ancilla(roots, squeezing, grid).values
        else:
            core = squeezed_proxy(grid, squeezing).values
        prof = base * core
    else:
        raise InvalidArgument(f"unknown ancilla kind {kind!r}")
    return GridState(grid, prof).normalized()


# -------------------------------------------------------------- protocol

@dataclass(frozen=True)
class ProtocolConfig:
    mode: str = "direct"
    postselect_window: float = 0.05
    max_retries: int = 1000
    rng_seed: int = 0
    forced_beta: float | None = None
    ancilla: str = "ideal"
    squeezing: float = DEFAULT_SQUEEZING
    fourier_strategy: str = "primed"
    alias_tol: float | None = 1e-6

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgument(f"mode must be one of {MODES}")
        if self.mode == "postselect" and not self.postselect_window > 0:
            raise InvalidArgument("postselect window must be positive")
        if self.max_retries < 1:
            raise InvalidArgument("max_retries must be >= 1")
        if self.ancilla not in ANCILLA_KINDS:
            raise InvalidArgument(f"ancilla must be one of {ANCILLA_KINDS}")
        if self.fourier_strategy not in STRATEGIES:
            raise InvalidArgument(f"fourier_strategy must be one of {STRATEGIES}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class StepRecord:
    index: int
    role: str
    gate: GateTerm
    beta: float = 0.0
    accepted: bool = True
    attempts: int = 1
    acceptance_probability: float = 1.0
    correction: GateSequence | None = None
    fourier_count: int = 0
    logical: int | None = None

    def to_dict(self) -> dict:
        return {"index": self.index, "role": self.role, "gate": self.gate.to_dict(),
                "beta": self.beta, "accepted": self.accepted, "attempts": self.attempts,
                "acceptance_probability": self.acceptance_probability,
                "correction": None if self.correction is None
                else [t.to_dict() for t in self.correction],
                "fourier_count": self.fourier_count, "logical": self.logical}

    @classmethod
    def from_dict(cls, d: dict) -> "StepRecord":
        corr = d.get("correction")
        return cls(d["index"], d["role"], GateTerm.from_dict(d["gate"]), d["beta"], d["accepted"],
                   d["attempts"], d["acceptance_probability"],
                   None if corr is None else GateSequence(tuple(GateTerm.from_dict(t) for t in corr)),
                   d["fourier_count"], d.get("logical"))


@dataclass
class ProtocolTranscript:
    mode: str
    seed: int
    steps: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def fourier_count(self) -> int:
        return self.steps[-1].fourier_count if self.steps else 0

    @property
    def teleport_count(self) -> int:
        """Steps that carry a gate or a correction; closing and pre-applied Fourier steps excluded."""
        return sum(1 for s in self.steps if s.role in ("gate", "correction"))

    @property
    def closing_steps(self) -> int:
        return sum(1 for s in self.steps if s.role == "closing")

    @property
    def success_probability(self) -> float:
        return float(np.prod([s.acceptance_probability for s in self.steps])) if self.steps else 1.0

    def schedule(self) -> list:
        return [f"{s.role}:{s.gate!r}" for s in self.steps]

    def to_dict(self) -> dict:
        return {"mode": self.mode, "seed": self.seed, "config": self.config,
                "fourier_count": self.fourier_count, "teleport_count": self.teleport_count,
                "closing_steps": self.closing_steps,
                "success_probability": self.success_probability,
                "steps": [s.to_dict() for s in self.steps]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ProtocolTranscript":
        d = json.loads(text)
        return cls(d["mode"], d["seed"], [StepRecord.from_dict(s) for s in d["steps"]],
                   d.get("config", {}))


@dataclass
class ProtocolResult:
    output: GridState | FockState
    transcript: ProtocolTranscript


def _resolve_sequence(scheme, mode: str) -> GateSequence:
    if isinstance(scheme, GateSequence):
        return scheme
    if not isinstance(scheme, CompositionScheme):
        raise InvalidArgument("scheme must be a CompositionScheme or GateSequence")
    if mode == "deterministic" and scheme.kind == "first_order":
        # corrections need each cubic and quartic factor on its own
        base = kerr_separated(scheme.t)
        return GateSequence(base.terms * scheme.repetitions, dict(base.meta))
    return scheme.sequence()


class _Runner:
    def __init__(self, state: GridState, config: ProtocolConfig):
        self.state = state
        self.cfg = config
        self.grid = state.spec
        self.rng = np.random.default_rng(config.rng_seed)
        self.m = 0
        self.transcript = ProtocolTranscript(config.mode, config.rng_seed, [], config.to_dict())
        self._ancilla_cache = {}

    def ancilla(self, term: GateTerm) -> GridState:
        key = (term.basis, term.coeffs)
        if key not in self._ancilla_cache:
            self._ancilla_cache[key] = ancilla_for_term(term, self.grid, self.cfg.ancilla,
                                                        self.cfg.squeezing)
        return self._ancilla_cache[key]

    def weight(self, anc: GridState) -> GridState:
        """Ancilla whose ``|alpha|^2`` sets the outcome density.

        A flat phase profile gives a uniform density over the whole window;
        ideal ancillae therefore take their outcome statistics from the
        finitely squeezed envelope, while the teleported gate stays exact.
        """
        if self.cfg.ancilla != "ideal":
            return anc
        return squeezed_proxy(self.grid, self.cfg.squeezing).normalized()

    def _outcome(self, anc: GridState, basis: str):
        cfg = self.cfg
        if cfg.forced_beta is not None:
            return float(cfg.forced_beta), 1, 1.0
        dens = homodyne_density(self.state, self.weight(anc), basis)
        if cfg.mode != "postselect":
            p = dens * self.grid.dx
            j = self.rng.choice(p.size, p=p / p.sum())
            return float(self.grid.x[j]), 1, 1.0
        prob = window_probability(dens, self.grid, cfg.postselect_window)
        p = dens * self.grid.dx
        p = p / p.sum()
        for attempt in range(1, cfg.max_retries + 1):
            beta = float(self.grid.x[self.rng.choice(p.size, p=p)])
            if abs(beta) <= cfg.postselect_window:
                return beta, attempt, prob
        raise PostselectFailure(
            f"no outcome within |beta| <= {cfg.postselect_window} after {cfg.max_retries} tries",
            attempts=cfg.max_retries, acceptance_probability=prob)

    def step(self, physical: GateTerm, role: str, logical: int | None = None,
             degree: int = 0):
        """Teleport ``physical``; returns the pending non-Gaussian correction, if any.

        ``degree`` is the structural degree of the step: a correction is
        scheduled as if ``beta`` were generic, so the step count does not
        depend on the sampled outcomes.
        """
        degree = max(physical.degree, degree)
        anc = self.ancilla(physical)
        beta, attempts, prob = self._outcome(anc, physical.basis)
        self.state = teleport_step(self.state, anc, beta, physical.basis, self.cfg.alias_tol)
        self.m += 1
        rec = StepRecord(len(self.transcript.steps), role, physical, beta, True, attempts, prob,
                         None, self.m, logical)
        self.transcript.steps.append(rec)
        if self.cfg.mode != "deterministic":
            return None
        corr = correction_sequence(physical, beta)
        rec.correction = corr
        remainder = GateTerm(physical.basis)
        for term in corr:
            d = term.as_dict
            free = {k: c for k, c in d.items() if k == 1}
            if free:
                self.state = apply_phase_polynomial(self.state, term.basis, free, self.cfg.alias_tol)
            rest = {k: c for k, c in d.items() if k >= 2}
            if rest:
                remainder = GateTerm(term.basis, rest)
        if degree >= 3:
            return _Pending(remainder, degree - 1)
        return None


@dataclass(frozen=True)
class _Pending:
    """Correction still to be teleported, with its structural degree."""

    term: GateTerm
    degree: int


def _merge(a: GateTerm, b: GateTerm) -> GateTerm:
    if a.is_identity:
        return GateTerm(a.basis, b.as_dict)
    return a.merged(b) if not b.is_identity else a


def run_protocol(state, scheme, config: ProtocolConfig | None = None,
                 grid: GridSpec | None = None) -> ProtocolResult:
    """Run a scheme directly, with postselected teleportation, or with corrections.

    In deterministic mode a gate's non-Gaussian correction is folded into
    the next gate when both are diagonal in the same quadrature after the
    Fourier bookkeeping; otherwise it gets its own teleportation step.
    Linear terms and displacements are applied directly. Flat-ancilla
    steps at the end bring the Fourier count to a multiple of four.
    """
    config = config or ProtocolConfig()
    seq = _resolve_sequence(scheme, config.mode)
    if config.mode == "direct":
        out = apply_sequence(seq, state)
        return ProtocolResult(out, ProtocolTranscript("direct", config.rng_seed, [], config.to_dict()))
    if isinstance(state, FockState):
        state = fock_to_position(state.normalized(), grid or GridSpec())
    elif not isinstance(state, GridState):
        raise InvalidArgument("state must be a GridState or FockState")
    run = _Runner(state.normalized(), config)
    pending = None
    for i, g in enumerate(seq):
        if config.fourier_strategy == "preapply":
            while pending is not None:
                pending = run.step(rotate_term(pending.term, 1), "correction", degree=pending.degree)
            while run.m % 4 != 3:
                run.step(GateTerm("X"), "preapply")
        degree = 0
        while True:
            physical = rotate_term(g, run.m + 1)
            if pending is None:
                break
            folded = rotate_term(pending.term, 1)
            if folded.basis == physical.basis:
                physical = _merge(physical, folded)
                degree = pending.degree
                pending = None
                break
            pending = run.step(folded, "correction", degree=pending.degree)
        pending = run.step(physical, "gate", logical=i, degree=degree)
    while pending is not None:
        pending = run.step(rotate_term(pending.term, 1), "correction", degree=pending.degree)
    while run.m % 4:
        run.step(GateTerm("X"), "closing")
    return ProtocolResult(run.state, run.transcript)


def fock_reference(state: FockState, seq: GateSequence, grid: GridSpec | None = None) -> GridState:
    """Direct application on the grid, for comparison with protocol output."""
    psi = fock_to_position(state.normalized(), grid or GridSpec())
    return apply_sequence(seq, psi)

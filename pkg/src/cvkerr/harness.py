"""Registered numerical experiments and their reports.

Every experiment compares a decomposed evolution against the exact Kerr
target through ``eps = 1 - |<exact|approx>|`` and writes ``report.json``
plus ``state.csv`` (exact and phase-aligned approximate wavefunctions on
the position grid). Protocol runs also write ``transcript.json``.
"""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fock
from .errors import InvalidArgument
from .grid import fock_to_position
from .sequence import (CompositionScheme, GateSequence, apply_sequence, kerr_first_order,
                       kerr_separated, repeat_scheme)
from .states import DEFAULT_DIM, FockState, GridSpec, GridState, fidelity_error
from .teleport import ProtocolConfig, run_protocol
from .twomode import verify_appendix_identities

SCHEME_ALIASES = {"first": "first_order", "separated": "separated", "q2": "q2",
                  "third": "third_order"}

# reference log10 errors and the accepted deviation
REFERENCES = {
    "table1": {(1e-3, 1.0): -7.7594, (1e-3, 5.0): -2.6641,
               (1e-2, 1.0): -4.9653, (1e-2, 5.0): -0.7526},
    "fig1": -7.7594,
    "fig3": -2.7446,
    "single_photon": -7.9853,
    "third_order": -9.9569,
    "strong_kerr": -3.8252,
    "ns_gate": -3.2423,
}
TOLERANCE = {"fig3": 0.7, "third_order": 0.7}
DEFAULT_TOL = 0.5
FIG1_POINTWISE = 1e-3
APPENDIX_TOL = 1e-6
EQUIV_TOL = 1e-6


@dataclass
class ExperimentConfig:
    experiment: str
    dim: int = DEFAULT_DIM
    n_points: int = 1024
    t: float | None = None
    coherent: float | None = None
    fock_coeffs: tuple | None = None
    scheme: str | None = None
    mode: str = "direct"
    reps: int | None = None
    seed: int = 0
    ancilla: str | None = None
    squeezing: float = 3.0
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgument(f"unknown experiment {self.experiment!r}; see `cvkerr list`")
        if self.dim < 2 or self.n_points < 256:
            raise InvalidArgument("dim must be >= 2 and n_points >= 256")
        if self.t is not None and self.t <= 0:
            raise InvalidArgument("t must be positive")
        if self.reps is not None and self.reps < 1:
            raise InvalidArgument("reps must be >= 1")
        if self.jobs < 1:
            raise InvalidArgument("jobs must be >= 1")
        if self.scheme is not None and self.scheme not in SCHEME_ALIASES:
            raise InvalidArgument(f"scheme must be one of {sorted(SCHEME_ALIASES)}")
        if self.fock_coeffs is not None:
            self.fock_coeffs = tuple(complex(c) for c in self.fock_coeffs)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.fock_coeffs is not None:
            d["fock_coeffs"] = [[c.real, c.imag] for c in self.fock_coeffs]
        d.pop("out")
        d.pop("jobs")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if d.get("fock_coeffs") is not None:
            d["fock_coeffs"] = tuple(complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                                     for c in d["fock_coeffs"])
        return cls(**d)


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    error: float
    log10_error: float
    reference: float | None
    tolerance: float | None
    passed: bool
    diagnostics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    runtime_s: float = 0.0

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = asdict(self)
        if not include_runtime:
            d.pop("runtime_s")
        return d

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=1, sort_keys=True)


# ---------------------------------------------------------------- helpers

def within(log_err: float, reference: float, tol: float) -> bool:
    return abs(log_err - reference) <= tol


def _input_state(cfg: ExperimentConfig, default_amp: float | None = 1.0,
                 default_coeffs=None) -> FockState:
    if cfg.fock_coeffs is not None:
        return FockState.superposition(cfg.fock_coeffs, cfg.dim)
    if cfg.coherent is not None:
        return FockState.coherent(cfg.coherent, cfg.dim)
    if default_coeffs is not None:
        return FockState.superposition(default_coeffs, cfg.dim)
    return FockState.coherent(default_amp, cfg.dim)


def _scheme(cfg: ExperimentConfig, default: str, t: float) -> CompositionScheme:
    kind = SCHEME_ALIASES[cfg.scheme] if cfg.scheme else default
    return CompositionScheme(kind, t, cfg.reps or 1)


@dataclass
class Evolution:
    """Exact and decomposed outputs of one run, in Fock or grid form."""

    exact: FockState | GridState
    approx: FockState | GridState
    error: float
    transcript: object = None
    diagnostics: dict = field(default_factory=dict)


def _target(t_total: float, state: FockState) -> FockState:
    with warnings.catch_warnings():
        # strong-Kerr runs deliberately exceed unit amplitude; tail mass is reported instead
        warnings.simplefilter("ignore", UserWarning)
        return fock.apply(fock.kerr_target_unitary(t_total, state.dim), state)


def fock_evolution(seq: GateSequence, state: FockState, t_total: float) -> Evolution:
    target = _target(t_total, state)
    out = apply_sequence(seq, state)
    diag = {"target_tail_mass": target.tail_mass(), "output_tail_mass": out.tail_mass(),
            "output_norm": out.norm}
    out = out.normalized()
    return Evolution(target.normalized(), out, fidelity_error(target.normalized(), out), None, diag)


def protocol_evolution(scheme: CompositionScheme, state: FockState, t_total: float,
                       pcfg: ProtocolConfig, grid: GridSpec) -> Evolution:
    target = _target(t_total, state).normalized()
    exact = fock_to_position(target, grid, check=False).normalized()
    psi = fock_to_position(state.normalized(), grid, check=False)
    res = run_protocol(psi, scheme, pcfg, grid)
    t = res.transcript
    diag = {"target_tail_mass": target.tail_mass(), "teleport_count": t.teleport_count,
            "closing_steps": t.closing_steps, "fourier_count": t.fourier_count}
    return Evolution(exact, res.output, fidelity_error(exact, res.output), t, diag)


def evolve(cfg: ExperimentConfig, scheme: CompositionScheme, state: FockState,
           t_total: float, ancilla: str = "ideal") -> Evolution:
    if cfg.mode == "direct":
        return fock_evolution(scheme.sequence(), state, t_total)
    pcfg = ProtocolConfig(mode=cfg.mode, rng_seed=cfg.seed,
                          forced_beta=0.0 if cfg.mode == "postselect" else None,
                          ancilla=cfg.ancilla or ancilla, squeezing=cfg.squeezing,
                          alias_tol=None)
    return protocol_evolution(scheme, state, t_total, pcfg, GridSpec(cfg.n_points))


def as_grid(state, grid: GridSpec) -> GridState:
    if isinstance(state, GridState):
        return state
    return fock_to_position(state, grid, check=False)


def write_state_csv(path: Path, exact: GridState, approx: GridState) -> Path:
    """Columns ``x, re_exact, im_exact, re_approx, im_approx``; approx is phase-aligned to exact."""
    ov = exact.inner(approx)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    a = approx.values / phase
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re_exact", "im_exact", "re_approx", "im_approx"])
        for xi, e, v in zip(exact.spec.x, exact.values, a):
            w.writerow([repr(float(xi)), repr(float(e.real)), repr(float(e.imag)),
                        repr(float(v.real)), repr(float(v.imag))])
    return Path(path)


def error_from_csv(path) -> float:
    """Recompute ``eps`` from an emitted ``state.csv``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    dx = data[1, 0] - data[0, 0]
    e = data[:, 1] + 1j * data[:, 2]
    a = data[:, 3] + 1j * data[:, 4]
    e = e / math.sqrt(np.sum(np.abs(e) ** 2) * dx)
    a = a / math.sqrt(np.sum(np.abs(a) ** 2) * dx)
    return float(1 - abs(np.vdot(e, a) * dx))


def max_pointwise_gap(exact: GridState, approx: GridState) -> float:
    ov = exact.inner(approx)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.abs(approx.values / phase - exact.values).max())


def _log(eps: float) -> float:
    return fock.log10_or_floor(eps)


@dataclass
class _Outcome:
    error: float
    reference: float | None
    tolerance: float | None
    passed: bool
    diagnostics: dict
    evolution: Evolution | None = None
    extra_csv: dict = field(default_factory=dict)


def _single(cfg, name, default_t, default_scheme, default_amp=1.0, default_coeffs=None,
            ancilla="ideal", total=None):
    t = cfg.t or default_t
    scheme = _scheme(cfg, default_scheme, t)
    state = _input_state(cfg, default_amp, default_coeffs)
    t_total = total if total is not None else t * scheme.repetitions
    ev = evolve(cfg, scheme, state, t_total, ancilla)
    ref = REFERENCES.get(name)
    if isinstance(ref, dict):
        ref = ref.get((t, cfg.coherent))
    tol = TOLERANCE.get(name, DEFAULT_TOL)
    lg = _log(ev.error)
    diag = dict(ev.diagnostics)
    diag.update({"t": t, "scheme": scheme.kind, "repetitions": scheme.repetitions,
                 "t_total": t_total})
    passed = ref is None or within(lg, ref, tol)
    return _Outcome(ev.error, ref, tol if ref is not None else None, passed, diag, ev)


# ------------------------------------------------------------ experiments

def exp_table1(cfg: ExperimentConfig) -> _Outcome:
    cells = [(t, a) for t in (1e-3, 1e-2) for a in (1.0, 5.0)]

    def run(cell):
        t, amp = cell
        c = replace(cfg, t=t, coherent=amp, fock_coeffs=None)
        return cell, _single(c, "table1", t, "first_order")

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        results = list(pool.map(run, cells))
    rows, ok, worst = [], True, 0.0
    extra = {}
    for (t, amp), o in results:
        ref = REFERENCES["table1"][(t, amp)]
        lg = _log(o.error)
        good = within(lg, ref, DEFAULT_TOL)
        ok &= good
        worst = max(worst, o.error)
        rows.append({"t": t, "coherent": amp, "error": o.error, "log10_error": lg,
                     "reference": ref, "passed": good,
                     "target_tail_mass": o.diagnostics.get("target_tail_mass")})
        extra[f"state_t{t:g}_a{amp:g}.csv"] = o.evolution
    first = results[0][1]
    return _Outcome(first.error, REFERENCES["table1"][(1e-3, 1.0)], DEFAULT_TOL, ok,
                    {"cells": rows, "max_error": worst}, first.evolution, extra)


def exp_fig1(cfg):
    o = _single(cfg, "fig1", 1e-3, "first_order")
    grid = GridSpec(cfg.n_points)
    gap = max_pointwise_gap(as_grid(o.evolution.exact, grid), as_grid(o.evolution.approx, grid))
    o.diagnostics["max_pointwise_gap"] = gap
    o.passed = o.passed and gap <= FIG1_POINTWISE
    return o


def exp_fig2(cfg):
    o = _single(cfg, "fig2", 1e-1, "first_order")
    weak = _single(replace(cfg, t=1e-3), "fig1", 1e-3, "first_order")
    grid = GridSpec(cfg.n_points)
    o.diagnostics["max_pointwise_gap"] = max_pointwise_gap(as_grid(o.evolution.exact, grid),
                                                           as_grid(o.evolution.approx, grid))
    o.diagnostics["fig1_error"] = weak.error
    # no reference number: the error must be visibly larger than the weak-Kerr case
    o.passed = o.error > 100 * weak.error
    return o


def exp_fig3(cfg):
    c = replace(cfg, mode="postselect" if cfg.mode == "direct" else cfg.mode)
    o = _single(c, "fig3", 1e-3, "first_order", ancilla="first_order")
    o.diagnostics["ancilla"] = c.ancilla or "first_order"
    o.diagnostics["squeezing"] = c.squeezing
    o.diagnostics["operator_replacement_log10_error"] = _log(
        operator_replacement_error(c.t or 1e-3, _input_state(c), normalize=False))
    return o


def operator_replacement_error(t: float, state: FockState, normalize: bool = True) -> float:
    """Error when every gate ``exp(i f(Q))`` is replaced by the operator ``1 + i f(Q)``.

    With ``normalize=False`` the output is left unnormalized, which is the
    overlap of the raw polynomial-operator product with the target.
    """
    dim = state.dim
    c = state.normalized().coeffs
    for term in kerr_first_order(t):
        H = fock.polynomial_operator(term.basis, term.as_dict, dim)
        c = c + 1j * (H @ c)
    target = fock.apply(fock.kerr_target_unitary(t, dim), state.normalized())
    if normalize:
        c = c / np.linalg.norm(c)
    return float(abs(1 - abs(np.vdot(target.coeffs, c))))


def exp_single_photon(cfg):
    return _single(cfg, "single_photon", 1e-3, "first_order", default_coeffs=(1.0, 1.0))


def exp_third_order(cfg):
    o = _single(cfg, "third_order", 1e-3, "third_order")
    first = _single(replace(cfg, scheme="first", reps=None), "fig1", cfg.t or 1e-3, "first_order")
    gain = _log(first.error) - _log(o.error)
    o.diagnostics["first_order_log10_error"] = _log(first.error)
    o.diagnostics["gain_orders"] = gain
    o.passed = o.passed and gain >= 1.5
    return o


def exp_strong_kerr(cfg):
    reps = cfg.reps or 1000
    t = cfg.t or 1e-3
    return _single(replace(cfg, reps=reps), "strong_kerr", t, "third_order")


NS_INPUT = (1.0, 1.0, 1.0)


def exp_ns_gate(cfg):
    reps = cfg.reps or 500
    t = cfg.t or math.pi * 1e-3
    o = _single(replace(cfg, reps=reps), "ns_gate", t, "third_order", default_coeffs=NS_INPUT)
    total = t * reps
    approx = o.evolution.approx
    if isinstance(approx, FockState):
        # exp(i total (N^2 + N)) times exp(-2 i total N) = exp(i total N(N-1)), a sign flip on |2> at pi/2
        rot = fock.apply(fock.rotation_unitary(-2 * total, approx.dim), approx)
        ideal = FockState.superposition((1.0, 1.0, -1.0), approx.dim)
        c = rot.coeffs
        ratios = [c[k] / c[0] for k in range(3)]
        flipped = bool(ratios[1].real > 0 and ratios[2].real < 0)
        o.diagnostics.update({
            "ideal_sign_flip_error": fidelity_error(ideal, rot.normalized()),
            "amplitude_ratios_re": [float(r.real) for r in ratios],
            "amplitude_ratios_im": [float(r.imag) for r in ratios],
            "sign_flipped": flipped})
        o.passed = o.passed and flipped
    return o


def exp_appendix(cfg):
    t = cfg.t or 0.05
    dim = cfg.dim if cfg.dim != DEFAULT_DIM else 30
    res = verify_appendix_identities(t, t, dim)
    err = max(res.residual1, res.residual2)
    return _Outcome(err, None, APPENDIX_TOL, err <= APPENDIX_TOL, res.to_dict())


def exp_teleport_equiv(cfg):
    t = cfg.t or 1e-3
    kind = SCHEME_ALIASES[cfg.scheme] if cfg.scheme else "first_order"
    mode = cfg.mode if cfg.mode != "direct" else "deterministic"
    scheme = CompositionScheme(kind, t, cfg.reps or 1)
    state = _input_state(cfg)
    grid = GridSpec(cfg.n_points)
    psi = fock_to_position(state, grid)
    pcfg = ProtocolConfig(mode=mode, rng_seed=cfg.seed,
                          forced_beta=0.0 if mode == "postselect" else None,
                          ancilla="ideal", squeezing=cfg.squeezing)
    res = run_protocol(psi, scheme, pcfg, grid)
    seq = scheme.sequence()
    if mode == "deterministic" and kind == "first_order":
        seq = repeat_scheme(kerr_separated(t), scheme.repetitions)
    direct = apply_sequence(seq, psi).normalized()
    err = fidelity_error(direct, res.output)
    tr = res.transcript
    diag = {"mode": mode, "scheme": kind, "teleport_count": tr.teleport_count,
            "closing_steps": tr.closing_steps, "fourier_count": tr.fourier_count,
            "betas": [s.beta for s in tr.steps]}
    ok = err <= EQUIV_TOL and tr.fourier_count % 4 == 0
    return _Outcome(err, None, EQUIV_TOL, ok, diag, Evolution(direct, res.output, err, tr))


EXPERIMENTS = {
    "table1": (exp_table1, "Table of errors: t in {1e-3, 1e-2} x coherent amplitude in {1, 5}"),
    "fig1": (exp_fig1, "t=1e-3 Kerr on coherent 1, wavefunction data"),
    "fig2": (exp_fig2, "t=1e-1 Kerr on coherent 1, visible errors"),
    "fig3": (exp_fig3, "t=1e-3 Kerr with first-order approximate ancillae"),
    "single_photon": (exp_single_photon, "(|0>+|1>)/sqrt2 under t=1e-3"),
    "third_order": (exp_third_order, "third-order composition at t=1e-3 on coherent 1"),
    "strong_kerr": (exp_strong_kerr, "1000 x third_order(1e-3) vs Kerr amplitude 1"),
    "ns_gate": (exp_ns_gate, "500 x third_order(pi 1e-3) on (|0>+|1>+|2>)/sqrt3, sign flip"),
    "appendix": (exp_appendix, "two-mode exact quartic identities"),
    "teleport_equiv": (exp_teleport_equiv, "protocol output vs direct compilation"),
}


def list_experiments() -> list:
    return [(k, v[1]) for k, v in EXPERIMENTS.items()]


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    start = time.perf_counter()
    outcome = EXPERIMENTS[cfg.experiment][0](cfg)
    files = []
    out_dir = Path(cfg.out) if cfg.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        grid = GridSpec(cfg.n_points)
        ev = outcome.evolution
        if ev is not None:
            files.append(write_state_csv(out_dir / "state.csv", as_grid(ev.exact, grid),
                                         as_grid(ev.approx, grid)).name)
            if ev.transcript is not None:
                (out_dir / "transcript.json").write_text(ev.transcript.to_json())
                files.append("transcript.json")
        for name, extra in outcome.extra_csv.items():
            files.append(write_state_csv(out_dir / name, as_grid(extra.exact, grid),
                                         as_grid(extra.approx, grid)).name)
        files.append("report.json")
    eps = float(min(max(outcome.error, 0.0), 1.0))
    report = ExperimentReport(cfg.experiment, cfg.to_dict(), eps, _log(eps), outcome.reference,
                              outcome.tolerance, bool(outcome.passed), _jsonable(outcome.diagnostics),
                              files, time.perf_counter() - start)
    if out_dir is not None:
        (out_dir / "report.json").write_text(report.to_json())
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvkerr import fock
from cvkerr.errors import InvalidArgument
from cvkerr.sequence import (THIRD_ORDER_COEFFS, CompositionScheme, GateSequence, GateTerm,
                             apply_sequence, compile_sequence, kerr_first_order, kerr_separated,
                             log_residual, q2_family, repeat_scheme, scaling_exponent,
                             third_order, unscaled_q2_generator, verify_log_expansion,
                             verify_order_conditions)
from cvkerr.grid import fock_to_position
from cvkerr.states import FockState, GridSpec, fidelity_error

T = 1e-3


def kerr_error(seq, state, t_total, dim=60):
    target = fock.apply(fock.kerr_target_unitary(t_total, dim), state)
    out = fock.apply(compile_sequence(seq, dim), state).normalized()
    return fidelity_error(target.normalized(), out)


def test_gate_term_validation():
    with pytest.raises(InvalidArgument):
        GateTerm("Y", {3: 1.0})
    with pytest.raises(InvalidArgument):
        GateTerm("X", {5: 1.0})
    assert GateTerm("X").is_identity
    assert GateTerm("P", {3: 0.0}).is_identity


def test_first_order_layout():
    seq = kerr_first_order(T)
    s = math.sqrt(T)
    assert len(seq) == 4
    first = seq[0]
    assert first.basis == "X"
    assert math.isclose(first.coeff(3), -(4 / 9) * 0.0316228, rel_tol=1e-5)
    assert first.coeff(4) == T
    assert [g.basis for g in seq] == ["X", "P", "X", "P"]
    assert seq[3].coeff(3) == s


def test_amplitude_bounds():
    for bad in (0.0, -1e-3, 0.6):
        with pytest.raises(InvalidArgument):
            kerr_first_order(bad)
        with pytest.raises(InvalidArgument):
            kerr_separated(bad)


def test_first_order_error(coh1):
    assert abs(math.log10(kerr_error(kerr_first_order(T), coh1, T)) + 7.7594) < 0.05


def test_separated_matches_first_order(coh1):
    a = fock.apply(compile_sequence(kerr_first_order(T), 60), coh1)
    b = fock.apply(compile_sequence(kerr_separated(T), 60), coh1)
    assert fidelity_error(a.normalized(), b.normalized()) < 1e-5
    assert len(kerr_separated(T)) == 6


def test_q2_shape_and_inverse(coh1):
    q = q2_family(T)
    assert len(q) == 5
    mid = q[2]
    assert mid.basis == "X" and list(mid.as_dict) == [3]
    U = compile_sequence(q2_family(T, "inverse"), 60) @ compile_sequence(q, 60)
    assert fidelity_error(fock.apply(U, coh1).normalized(), coh1) < 1e-9


def test_q2_reversal_law():
    q = q2_family(T)
    r = q2_family(T, "reversed")
    assert r.terms == q.terms[::-1]


def test_inv_reversed_is_negated_q2():
    q = q2_family(T, "inv_reversed")
    assert q.terms == q2_family(-T).terms


def test_order_conditions_reference_solution():
    assert max(verify_order_conditions(THIRD_ORDER_COEFFS)) <= 1e-12
    assert abs(sum(THIRD_ORDER_COEFFS) - 1) < 1e-14


def test_order_conditions_trivial_inputs():
    assert verify_order_conditions((1, 0, 0, 0)) == (0, 0, 1, 0)
    r = verify_order_conditions((0.25, 0.25, 0.25, 0.25))
    assert r[0] == 0 and r[1] == 1


def test_third_order_error_and_merging(coh1):
    seq = third_order(T)
    assert len(seq) == 17
    assert all(a.basis != b.basis for a, b in zip(seq, seq[1:]))
    assert abs(math.log10(kerr_error(seq, coh1, T)) + 9.9569) < 0.05


def test_repeat_scheme_length():
    sc = CompositionScheme("third_order", T)
    assert repeat_scheme(sc, 1).terms == sc.base_sequence().terms
    assert len(repeat_scheme(sc, 7)) == 7 * 17


def test_scheme_validation():
    with pytest.raises(InvalidArgument):
        CompositionScheme("fifth", T)
    with pytest.raises(InvalidArgument):
        CompositionScheme("q2", 0.0)
    with pytest.raises(InvalidArgument):
        CompositionScheme("q2", T, 0)


def test_json_round_trip_bit_exact():
    seq = third_order(T)
    back = GateSequence.from_json(seq.to_json())
    assert back.terms == seq.terms
    assert "application_order" in seq.to_json()


def test_determinism():
    assert third_order(2e-3).to_json() == third_order(2e-3).to_json()


def test_identity_term_compiles_to_identity():
    assert np.array_equal(compile_sequence(GateSequence((GateTerm("X"),)), 10), np.eye(10))


def test_single_term_matches_generator():
    U = compile_sequence(GateSequence((GateTerm("X", {3: T}),)), 30)
    ref = fock.unitary_from_generator(fock.quadrature_power("X", 3, 30), T)
    assert np.allclose(U, ref)


def test_grid_and_fock_paths_agree(grid, coh1):
    seq = kerr_first_order(1e-2)
    a = fock_to_position(fock.apply(compile_sequence(seq, 60), coh1).normalized(), grid)
    b = apply_sequence(seq, fock_to_position(coh1, grid))
    assert fidelity_error(a, b.normalized()) < 1e-9


def test_log_expansion_kerr_solution():
    p = (1, 0, 4 / 9, 0, -1, 1, -4 / 9, 1)  # first-order Kerr solution
    chk = verify_log_expansion(p, 1e-3)
    assert np.allclose(chk.predicted, (0, 0, 1e-3, 1e-3, 4 / 9 * 1e-3))
    assert max(chk.residuals) < 10 * 1e-3 ** 1.5


def test_log_expansion_zero():
    chk = verify_log_expansion((0,) * 8, 1e-3)
    assert max(abs(v) for v in chk.fitted) < 1e-12


def test_log_expansion_scaling():
    rng = np.random.default_rng(3)
    p = rng.uniform(-1, 1, 8)
    r3 = max(verify_log_expansion(p, 1e-3).residuals)
    r4 = max(verify_log_expansion(p, 1e-4).residuals)
    assert 1.2 < math.log10(r3 / r4) < 1.8


def test_log_expansion_rejects_large_t():
    with pytest.raises(InvalidArgument):
        verify_log_expansion((0,) * 8, 0.1)


def _slope(build, gen):
    ts = [1e-2, 1e-3, 1e-4]
    return scaling_exponent(ts, [log_residual(build(t), gen(t)) for t in ts])


def test_first_order_bch_slope():
    assert _slope(kerr_first_order, lambda t: fock.kerr_generator(t, 60)) >= 1.4


def test_unscaled_q2_bch_slope():
    gen = lambda t: unscaled_q2_generator(t, 60)
    assert _slope(lambda t: q2_family(t, cubic_scale=1.0), gen) >= 2.5


def test_unscaled_third_order_bch_slope():
    gen = lambda t: unscaled_q2_generator(t, 60)
    assert _slope(lambda t: third_order(t, cubic_scale=1.0), gen) >= 3.4


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(1, 4), st.floats(-1, 1, allow_nan=False), min_size=1),
       st.sampled_from(["X", "P"]))
def test_gate_term_json_property(coeffs, basis):
    g = GateTerm(basis, coeffs)
    assert GateTerm.from_dict(g.to_dict()) == g


@settings(max_examples=15, deadline=None)
@given(st.floats(1e-4, 1e-2))
def test_merge_keeps_product(t):
    raw = GateSequence(tuple(q2_family(t).terms) + tuple(q2_family(t).terms))
    merged = raw.merge_adjacent()
    assert len(merged) == 9
    # on the grid each term is a diagonal phase, so merging is exact
    psi = fock_to_position(FockState.coherent(1.0, 40), GridSpec())
    assert fidelity_error(apply_sequence(raw, psi), apply_sequence(merged, psi)) < 1e-12

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvkerr import fock
from cvkerr.errors import BranchCutError, InvalidArgument
from cvkerr.states import FockState, fidelity_error


def test_ladder_small_dims():
    q = fock.quadrature_operators(2)
    assert q.a[0, 1] == 1
    assert np.count_nonzero(q.a) == 1
    assert fock.quadrature_operators(3).X[0, 1] == 0.5


def test_rejects_tiny_dim():
    with pytest.raises(InvalidArgument):
        fock.quadrature_operators(1)


def test_canonical_commutator_interior():
    q = fock.quadrature_operators(40)
    C = fock.commutator(q.X, q.P)
    k = 39
    assert np.abs(C[:k, :k] - 0.5j * np.eye(k)).max() < 1e-12


def test_number_operator_identity():
    q = fock.quadrature_operators(20)
    X2 = fock.quadrature_power("X", 2, 20)
    P2 = fock.quadrature_power("P", 2, 20)
    assert np.allclose(X2 + P2, q.N + 0.5 * np.eye(20))


def test_exact_truncation_matches_padded_product():
    X3 = fock.quadrature_power("X", 3, 10)
    big = fock.quadrature_operators(30).X
    assert np.allclose(X3, np.linalg.matrix_power(big, 3)[:10, :10])


def test_quadrature_power_is_read_only():
    M = fock.quadrature_power("P", 2, 8)
    with pytest.raises(ValueError):
        M[0, 0] = 1


def test_unitary_from_generator_basic():
    H = fock.quadrature_power("X", 3, 30)
    U = fock.unitary_from_generator(H, 1e-3)
    assert fock.unitarity_defect(U) < 1e-10
    assert np.allclose(fock.unitary_from_generator(H, 0.0), np.eye(30))


def test_unitary_from_generator_rejects_non_hermitian():
    with pytest.raises(InvalidArgument):
        fock.unitary_from_generator(fock.quadrature_operators(5).a, 1.0)


def test_unitary_log_round_trip():
    H = fock.quadrature_power("P", 4, 20) * 1e-3
    U = fock.unitary_from_generator(H, 1.0)
    L = fock.unitary_log(U)
    assert np.allclose(L, 1j * H, atol=1e-12)
    assert np.allclose(L, -L.conj().T, atol=1e-12)


def test_unitary_log_branch_cut():
    U = np.diag([1.0, -1.0]).astype(complex)
    with pytest.raises(BranchCutError):
        fock.unitary_log(U)


def test_kerr_target_is_number_diagonal():
    t = 1e-2
    U = fock.kerr_target_unitary(t, 60)
    off = U - np.diag(np.diag(U))
    assert np.abs(off).max() < 1e-12
    # exp(i t (N^2 + N)) up to a global phase
    n = np.arange(60)
    ref = np.exp(1j * t * (n ** 2 + n))
    ph = np.diag(U)[0] / ref[0]
    assert np.abs(np.diag(U) - ph * ref).max() < 1e-12


def test_kerr_target_warns_for_large_amplitude():
    with pytest.warns(UserWarning):
        fock.kerr_target_unitary(2.0, 10)


def test_kerr_target_identity_at_zero():
    assert np.allclose(fock.kerr_target_unitary(0.0, 12), np.eye(12))


def test_fidelity_error_identical_and_orthogonal():
    a = FockState.basis(0, 10)
    b = FockState.basis(1, 10)
    assert fidelity_error(a, a) == 0.0
    assert fidelity_error(a, b) == 1.0


def test_fidelity_error_phase_invariant():
    a = FockState.coherent(0.7, 30)
    b = FockState(a.coeffs * np.exp(0.3j))
    assert fidelity_error(a, b) < 1e-15


def test_fidelity_error_requires_normalization():
    with pytest.raises(InvalidArgument):
        fidelity_error(FockState(np.ones(3)), FockState.basis(0, 3))


def test_displacement_of_vacuum_is_coherent():
    D = fock.displacement_unitary(0.8, 40)
    out = fock.apply(D, FockState.basis(0, 40))
    assert fidelity_error(out.normalized(), FockState.coherent(0.8, 40)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.5, 0.5), st.integers(3, 4))
def test_phase_gate_unitary_interior(s, k):
    H = fock.quadrature_power("X", k, 40)
    U = fock.unitary_from_generator(H, s * 1e-2)
    assert fock.unitarity_defect(U) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 2 * math.pi))
def test_rotation_unitary_phases(theta):
    R = fock.rotation_unitary(theta, 6)
    assert np.allclose(np.diag(R), np.exp(1j * theta * np.arange(6)))

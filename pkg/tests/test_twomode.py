import numpy as np
import pytest

from cvkerr.errors import MemoryGuardError
from cvkerr.twomode import (appendix_default_block, exp_product, verify_appendix_identities)
from cvkerr.fock import quadrature_power


def test_appendix_residuals_small():
    res = verify_appendix_identities(0.05, 0.05, dim=30)
    assert res.block == appendix_default_block(30)
    assert res.residual1 <= 1e-6
    assert res.residual2 <= 1e-6


def test_swapped_ordering_collapses():
    # e^A e^B e^-B e^-A is the identity, so it cannot produce the quartic term
    res = verify_appendix_identities(0.05, 0.05, dim=30)
    assert res.residual2_swapped > 1e-3


def test_residuals_shrink_with_smaller_block():
    small = verify_appendix_identities(0.05, 0.05, dim=30, block=5)
    large = verify_appendix_identities(0.05, 0.05, dim=30, block=10)
    assert small.residual1 < large.residual1


def test_memory_guard():
    with pytest.raises(MemoryGuardError):
        verify_appendix_identities(0.1, 0.1, dim=61)


def test_exp_product_matches_dense():
    from scipy.linalg import expm

    d = 6
    A = quadrature_power("X", 2, d)
    B = quadrature_power("P", 1, d)
    dense = expm(1j * 0.3 * np.kron(A, B))
    assert np.allclose(exp_product(A, B, 0.3), dense, atol=1e-12)

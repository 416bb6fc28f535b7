import math

import numpy as np
import pytest

from cvkerr.ancilla import (AncillaSpec, condition_residuals, envelope_gap, lowering_expansion,
                            make_ancilla, photon_subtracted_ancilla, solve_displacement_roots,
                            squeezed_proxy)
from cvkerr.errors import AliasingError, InvalidArgument
from cvkerr.states import GridSpec

REFERENCE_ROOTS = [complex(-8.70356, -4.975), complex(8.70356, -4.975), complex(0, 9.95)]


def test_reference_roots():
    roots = solve_displacement_roots(1e-3, 3)
    for r, ref in zip(roots, REFERENCE_ROOTS):
        assert abs(r.real - ref.real) < 1e-3
        assert abs(r.imag - ref.imag) < 1e-3


def test_roots_sum_to_zero():
    for t in (1e-3, 1e-2, 0.3):
        assert abs(sum(solve_displacement_roots(t))) < 1e-12


def test_condition_residuals_small():
    roots = solve_displacement_roots(1e-2)
    assert max(condition_residuals(roots, 1e-2, 3)) <= 1e-9


def test_expansion_oracle_low_orders():
    # (x + c) and x^2 + (c1 + c2) x + c1 c2 + 1/2
    assert np.allclose(lowering_expansion([2.0]), [2.0, 1.0])
    assert np.allclose(lowering_expansion([1.0, 3.0]), [3.5, 4.0, 1.0])


def test_cubic_roots_reproduce_target():
    roots = solve_displacement_roots(1e-3)
    poly = lowering_expansion(roots)
    poly = poly / poly[0]
    assert np.allclose(poly, [1, 0, 0, 1e-3j], atol=1e-12)


def test_quartic_roots():
    roots = solve_displacement_roots(1e-3, 4, t3=5e-4)
    assert len(roots) == 4
    assert max(condition_residuals(roots, 1e-3, 4, 5e-4)) <= 1e-9


def test_bad_order_and_amplitude():
    with pytest.raises(InvalidArgument):
        solve_displacement_roots(1e-3, 5)
    with pytest.raises(InvalidArgument):
        solve_displacement_roots(-1e-3)


def test_spec_validation_and_json():
    with pytest.raises(InvalidArgument):
        AncillaSpec("cat")
    with pytest.raises(InvalidArgument):
        AncillaSpec("ideal", roots=(1j,))
    s = AncillaSpec("photon_subtracted", 1e-3, roots=tuple(REFERENCE_ROOTS))
    assert AncillaSpec.from_json(s.to_json()) == s


def test_flat_ideal_ancilla(grid):
    a = make_ancilla(AncillaSpec("ideal"), grid)
    assert np.allclose(a.values, a.values[0])
    assert abs(a.norm - 1) < 1e-8


def test_all_kinds_normalized(grid):
    roots = solve_displacement_roots(1e-3)
    for spec in (AncillaSpec("ideal", 1e-3, 1e-3), AncillaSpec("first_order", 1e-3),
                 AncillaSpec("photon_subtracted", 1e-3, squeezing=2.0, roots=tuple(roots))):
        assert abs(make_ancilla(spec, grid).norm - 1) < 1e-8


def test_first_order_taylor_bound(grid):
    t3 = 1e-4
    x = grid.x
    w = math.exp(3.0) / math.sqrt(2)
    env = np.exp(-(x / w) ** 2)
    ideal = np.exp(1j * t3 * x ** 3) * env
    approx = (1 + 1j * t3 * x ** 3) * env
    assert np.abs(ideal - approx).max() <= (t3 * grid.x_max ** 3) ** 2 / 2


def test_photon_subtracted_matches_first_order(grid):
    roots = solve_displacement_roots(1e-3)
    a = photon_subtracted_ancilla(roots, 2.0, grid)
    b = make_ancilla(AncillaSpec("first_order", 1e-3, squeezing=2.0), grid)
    assert 1 - abs(a.inner(b)) < 1e-4


def test_photon_subtracted_convergence():
    roots = solve_displacement_roots(1e-3)
    big = GridSpec(4096)  # r=3 needs the wider lattice
    gaps = [envelope_gap(roots, 1e-3, r, big) for r in (1, 2, 3)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_single_subtraction_profile(grid):
    a = photon_subtracted_ancilla([0.7], 2.0, grid)
    env = squeezed_proxy(grid, 2.0).values
    w2 = (math.exp(2.0) / math.sqrt(2)) ** 2
    ref = (grid.x * (1 - 1 / w2) + 0.7) * env
    ref = ref / math.sqrt(np.sum(np.abs(ref) ** 2) * grid.dx)
    assert np.abs(a.values - ref).max() < 1e-10


def test_parity_pattern(grid):
    roots = solve_displacement_roots(1e-3)
    a = photon_subtracted_ancilla(roots, 2.0, grid).values
    n = grid.n_points
    # psi(-x) = conj(psi(x)) up to a global phase, as for 1 + i t x^3
    ph = a[n // 2] / abs(a[n // 2])
    b = a / ph
    mirrored = b[1:][::-1]
    assert np.abs(mirrored - np.conj(b[1:]))[n // 4: 3 * n // 4].max() < 1e-10


def test_clipped_envelope_is_rejected():
    with pytest.raises(AliasingError):
        photon_subtracted_ancilla(solve_displacement_roots(1e-3), 3.0, GridSpec())
    big = photon_subtracted_ancilla(solve_displacement_roots(1e-3), 3.0, GridSpec(4096))
    assert abs(big.norm - 1) < 1e-8

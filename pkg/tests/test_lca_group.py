import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_convolve, brute_dft, brute_idft
from scatterlab.lca_group import (
    FrequencySet,
    GroupMismatchError,
    GroupSpec,
    Signal,
    SpectralSignal,
    convolve,
    fourier,
    inverse_fourier,
    negate,
    power_set,
    sumset,
)

GROUPS = [(4,), (3, 5), (16,), (4, 6), (2, 2, 3), (8, 8), (1, 7)]


def test_group_basics():
    g = GroupSpec((4, 6))
    assert g.order == 24
    for i in range(g.order):
        assert g.index(g.residues(i)) == i
    assert g.residues(0) == (0, 0)
    assert GroupSpec.parse("4 x 6") == g == GroupSpec.parse("4x6")
    with pytest.raises(ValueError):
        GroupSpec((0,))
    with pytest.raises(ValueError):
        GroupSpec(())


def test_group_law_is_componentwise():
    g = GroupSpec((3, 4))
    for a, b in itertools.product(range(g.order), repeat=2):
        ra, rb = g.residues(a), g.residues(b)
        expected = g.index(((ra[0] + rb[0]) % 3, (ra[1] + rb[1]) % 4))
        assert g.add_table[a, b] == expected
    assert all(g.add_table[a, g.neg_table[a]] == 0 for a in range(g.order))


def test_delta_has_constant_spectrum():
    g = GroupSpec((4,))
    np.testing.assert_allclose(fourier(Signal.delta(g)).coeffs, np.ones(4), atol=1e-15)


def test_constant_spectrum_and_plancherel():
    g = GroupSpec((4,))
    F = fourier(Signal.constant(g))
    np.testing.assert_allclose(F.coeffs, [4, 0, 0, 0], atol=1e-15)
    assert Signal.constant(g).norm_sq() == 4.0
    assert F.norm_sq() == pytest.approx(4.0, rel=1e-15)


def test_fourier_matches_brute_force(rng):
    g = GroupSpec((3, 5))
    f = Signal.random(g, rng)
    np.testing.assert_allclose(fourier(f).coeffs, brute_dft(g, f.values), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("factors", GROUPS)
def test_plancherel_many_signals(factors, rng):
    g = GroupSpec(factors)
    for _ in range(100):
        f = Signal.random(g, rng)
        assert abs(fourier(f).norm_sq() - f.norm_sq()) <= 1e-10 * f.norm_sq()


def test_round_trip_z16(rng):
    g = GroupSpec((16,))
    for _ in range(100):
        f = Signal.random(g, rng)
        back = inverse_fourier(fourier(f)).values
        assert np.linalg.norm(back - f.values) <= 1e-10 * np.linalg.norm(f.values)


def test_inverse_of_constant_spectrum_is_delta():
    g = GroupSpec((4,))
    f = inverse_fourier(SpectralSignal(g, np.ones(4)))
    np.testing.assert_allclose(f.values, [1, 0, 0, 0], atol=1e-15)


def test_inverse_matches_brute_force(rng):
    g = GroupSpec((12,))
    F = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    np.testing.assert_allclose(inverse_fourier(SpectralSignal(g, F)).values, brute_idft(g, F),
                               rtol=1e-12, atol=1e-12)


def test_convolution_unit(rng):
    g = GroupSpec((8,))
    f = Signal.random(g, rng)
    np.testing.assert_allclose(convolve(f, Signal.delta(g)).values, f.values, atol=1e-14)


@pytest.mark.parametrize("factors", [(6,), (3, 4), (2, 3, 5), (8, 8), (4, 6)])
def test_convolution_matches_direct_sum(factors, rng):
    g = GroupSpec(factors)
    f, h = Signal.random(g, rng), Signal.random(g, rng)
    direct = brute_convolve(g, f.values, h.values)
    got = convolve(f, h).values
    assert np.linalg.norm(got - direct) <= 1e-10 * np.linalg.norm(direct)


def test_convolution_theorem(rng):
    g = GroupSpec((4, 6))
    f, h = Signal.random(g, rng), Signal.random(g, rng)
    lhs = fourier(convolve(f, h)).coeffs
    np.testing.assert_allclose(lhs, fourier(f).coeffs * fourier(h).coeffs, rtol=1e-12, atol=1e-12)


def test_disjoint_spectra_convolve_to_zero():
    g = GroupSpec((8,))
    xi = Signal.character(g, 3)
    psi_hat = np.zeros(8)
    psi_hat[[1, 2, 5]] = 1.0
    psi = inverse_fourier(SpectralSignal(g, psi_hat))
    assert np.max(np.abs(convolve(xi, psi).values)) < 1e-14


def test_group_mismatch_raises(rng):
    with pytest.raises(GroupMismatchError):
        convolve(Signal.random(GroupSpec((4,)), rng), Signal.random(GroupSpec((2, 2)), rng))


def test_signal_rejects_nan_and_wrong_length():
    g = GroupSpec((4,))
    with pytest.raises(ValueError):
        Signal(g, [1, 2, np.nan, 0])
    with pytest.raises(ValueError):
        Signal(g, [1, 2, 3])


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(5,), (2, 3), (4, 2), (3, 3, 2)]))
@settings(max_examples=40, deadline=None)
def test_convolution_commutative_associative(seed, factors):
    g = GroupSpec(factors)
    r = np.random.default_rng(seed)
    a, b, c = (Signal.random(g, r) for _ in range(3))
    ab = convolve(a, b).values
    assert np.allclose(ab, convolve(b, a).values, rtol=1e-9, atol=1e-9)
    left = convolve(convolve(a, b), c).values
    right = convolve(a, convolve(b, c)).values
    assert np.linalg.norm(left - right) <= 1e-9 * np.linalg.norm(left)


# ------------------------------------------------------------ sumsets


def test_sumset_small():
    g = GroupSpec((8,))
    A = FrequencySet.of(g, [0, 1])
    assert sumset(A, A).sorted() == [0, 1, 2]
    assert power_set(FrequencySet.of(g, [0]), 8).sorted() == [0]
    assert power_set(A, 0).sorted() == [0]
    with pytest.raises(ValueError):
        power_set(A, -1)


def test_power_set_matches_enumeration():
    g = GroupSpec((12,))
    A = FrequencySet.of(g, [0, 1, -1])
    brute = {(a + b) % 12 for a in A for b in A}
    assert power_set(A, 2).members == brute
    assert power_set(A, 2) == FrequencySet.of(g, [0, 1, -1, 2, -2])


def test_negate_and_symmetry():
    g = GroupSpec((3, 4))
    A = FrequencySet.of(g, [(1, 1), (0, 2)])
    assert negate(A).members == {g.index((2, 3)), g.index((0, 2))}
    assert not A.is_symmetric()
    assert A.union(negate(A)).is_symmetric()


def test_measures():
    g = GroupSpec((4, 6))
    assert FrequencySet.everything(g).measure() == 1
    assert FrequencySet(g).measure() == 0
    assert FrequencySet.of(g, [0, 1, 2]).measure() == 3 / 24


@given(st.sets(st.integers(0, 19), min_size=1, max_size=5), st.integers(0, 4), st.integers(0, 4))
@settings(max_examples=60, deadline=None)
def test_power_set_additive(members, a, b):
    g = GroupSpec((20,))
    A = FrequencySet(g, frozenset(members))
    assert power_set(A, a + b) == sumset(power_set(A, a), power_set(A, b))


@given(st.sets(st.integers(0, 11), max_size=6), st.sets(st.integers(0, 11), max_size=6))
@settings(max_examples=60, deadline=None)
def test_sumset_matches_pairs(a, b):
    g = GroupSpec((3, 4))
    A, B = FrequencySet(g, frozenset(a)), FrequencySet(g, frozenset(b))
    brute = {int(g.add_table[x, y]) for x in a for y in b}
    assert sumset(A, B).members == brute

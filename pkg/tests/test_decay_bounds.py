import dataclasses
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scatterlab.decay_bounds import (
    BoundReport,
    EigenWitness,
    HypothesisViolation,
    layer_step_margins,
    bound_report,
    certify,
    corollary1_bound,
    covering_number,
    exact_cover,
    find_gamma,
    gamma_candidates,
    greedy_cover,
    thm3_bound,
    thm4_alpha,
    thm4_bound,
)
from scatterlab.extractor_core import complete_to_parseval, mean_projector, propagate, scattering_layer
from scatterlab.filter_frames import (
    build_ideal_partition_bank,
    build_random_smooth_bank,
    singleton_partition_bank,
)
from scatterlab.lca_group import FrequencySet, GroupSpec, Signal, power_set

Z8, Z12, Z16, Z64 = (GroupSpec((n,)) for n in (8, 12, 16, 64))


def brute_cover(supp: FrequencySet, K: FrequencySet) -> int:
    """Smallest k such that some k translates of K cover supp (plain enumeration)."""
    translates = {K.translate(xi).members for xi in range(supp.group.order)}
    for k in range(0, len(supp) + 1):
        for combo in itertools.combinations(translates, k):
            if supp.members <= frozenset().union(*combo):
                return k


def z8_one_band():
    return build_ideal_partition_bank(Z8, FrequencySet.of(Z8, [0]), [FrequencySet.of(Z8, range(1, 8))])


def z64_bank():
    gap = FrequencySet.of(Z64, range(-8, 9))
    bands = [FrequencySet.of(Z64, [s * k for k in range(a, b) for s in (1, -1)]) for a, b in ((9, 21), (21, 33))]
    return build_ideal_partition_bank(Z64, gap, bands)


# ------------------------------------------------------------ cor1: eigen-witness decay


def test_cor1_mean_projector_base():
    for d in (4, 6, 8):
        layer = complete_to_parseval(mean_projector(d))
        eta = np.full(d, 1 / math.sqrt(d))
        w = EigenWitness(1.0, eta)
        assert w.residual(mean_projector(d)) <= 1e-12
        e = corollary1_bound([layer], np.ones(d), 4, w)
        assert e.base == pytest.approx(1 - 1 / d, abs=1e-15)


def test_cor1_default_witness_on_convolution_bank():
    bank = z8_one_band()
    e = corollary1_bound([scattering_layer(bank)], np.ones(8), 4)
    assert e.constants["lambda"] == pytest.approx(1.0, abs=1e-12)
    assert e.base == pytest.approx(1 - 1 / 8, abs=1e-12)
    # generic route is weaker than the abelian one: 1 - 1/#G >= 1 - 1/S
    assert e.base >= thm3_bound(bank, np.ones(8)).base


def test_cor1_rejects_non_positive_witness():
    d = 4
    layer = complete_to_parseval(mean_projector(d))
    # eigenvector of P with eigenvalue 0 and mixed signs
    eta = np.array([1, -1, 0, 0]) / math.sqrt(2)
    with pytest.raises(HypothesisViolation, match="not positive"):
        corollary1_bound([layer], np.ones(d), 3, EigenWitness(0.0, eta))


def test_cor1_rejects_non_eigenvector():
    layer = complete_to_parseval(mean_projector(4))
    eta = np.array([1, 2, 3, 4]) / math.sqrt(30)
    with pytest.raises(HypothesisViolation, match="not an eigenvector"):
        corollary1_bound([layer], np.ones(4), 3, EigenWitness(1.0, eta))


def test_cor1_requires_modulus():
    layer = complete_to_parseval(mean_projector(4), sigma="real-relu")
    with pytest.raises(HypothesisViolation):
        corollary1_bound([layer], np.ones(4), 3)


def test_zero_signal_bound_is_zero():
    bank = z8_one_band()
    f = np.zeros(8)
    rep = bound_report(bank, f, 3)
    led = propagate([scattering_layer(bank)], f, 3).ledger
    res = certify(led, rep)
    assert res.passed
    assert all(m == 0.0 for row in res.margins.values() for m in row)


# ------------------------------------------------------------ thm3: support-size decay


def test_thm3_z8_single_band():
    e = thm3_bound(z8_one_band(), np.ones(8))
    assert e.constants["S"] == 7 and e.constants["S_alt"] == 7
    assert e.base == float(Fraction(6, 7))


def test_thm3_singleton_bank_base_zero(rng):
    bank = singleton_partition_bank(Z8)
    f = Signal.random(Z8, rng)
    e = thm3_bound(bank, f)
    assert e.base == 0.0
    led = propagate([scattering_layer(bank)], f, 3).ledger
    assert led.propagated[2] <= 1e-12 * f.norm_sq()
    assert certify(led, bound_report(bank, f, 3, ["thm3"])).passed


def test_layer_step_inequality(rng):
    for bank in (z8_one_band(), build_random_smooth_bank(Z16, 3, FrequencySet.of(Z16, [0]), 7)):
        for _ in range(20):
            f = Signal.random(bank.group, rng)
            for lhs, rhs in layer_step_margins(bank, f):
                assert lhs >= rhs - 1e-9 * f.norm_sq()


def test_thm3_rejects_non_parseval():
    bank = z8_one_band()
    from scatterlab.filter_frames import FilterBank
    bad = FilterBank(Z8, bank.chi_hat, 0.5 * bank.psi_hats)
    with pytest.raises(HypothesisViolation):
        thm3_bound(bad, np.ones(8))


# ------------------------------------------------------------ Gamma search


def test_find_gamma_forced_identity():
    assert find_gamma(FrequencySet.of(Z8, [0])).sorted() == [0]


def test_find_gamma_small_interval_in_z64():
    gap = FrequencySet.of(Z64, range(-4, 5))
    # {0, +-1}^8 = [-8, 8] is not inside [-4, 4]
    assert not power_set(FrequencySet.of(Z64, [0, 1, -1]), 8).issubset(gap)
    assert find_gamma(gap).sorted() == [0]


def test_find_gamma_subgroup():
    H = FrequencySet.of(Z12, [0, 4, 8])
    assert find_gamma(H) == H
    H2 = FrequencySet.of(Z12, [0, 3, 6, 9])
    assert find_gamma(H2) == H2


def test_find_gamma_requires_identity():
    with pytest.raises(HypothesisViolation):
        find_gamma(FrequencySet.of(Z8, [1, 7]))


def test_gamma_candidates_greedy_chain_z64():
    gap = FrequencySet.of(Z64, range(-8, 9))
    cands = gamma_candidates(gap)
    assert [c.sorted() for c in cands] == [[0], [0, 1, 63]]


@given(st.sets(st.integers(1, 11), max_size=8))
@settings(max_examples=40, deadline=None)
def test_gamma_candidates_valid(extra):
    gap = FrequencySet(Z12, frozenset({0} | extra))
    for c in gamma_candidates(gap):
        assert 0 in c and c.is_symmetric()
        assert power_set(c, 8).issubset(gap)


# ------------------------------------------------------------ covering numbers


def test_cover_by_itself_and_singletons():
    K = FrequencySet.of(Z12, [0, 1, -1])
    assert covering_number([K], K).n_exact == 1
    bank = build_ideal_partition_bank(
        Z12, FrequencySet.of(Z12, [0, 1, -1]),
        [FrequencySet.of(Z12, [2, -2, 3, -3, 4, -4]), FrequencySet.of(Z12, [5, -5, 6])])
    res = covering_number(bank, FrequencySet.identity(Z12))
    assert res.n_exact == 6 == res.n_greedy == res.n_ruzsa


def test_cover_z12_example():
    K = FrequencySet.of(Z12, [0, 1, -1])
    supp = FrequencySet.of(Z12, [2, 3, 4, 7, 8])
    res = covering_number([supp], K)
    assert res.n_exact == brute_cover(supp, K) == 2
    assert res.n_greedy >= res.n_exact and res.n_ruzsa >= res.n_exact


def test_greedy_strictly_worse_instance():
    K = FrequencySet.of(Z12, [0, 1, -1])
    supp = FrequencySet.of(Z12, [1, 2, 6, 9, 11])
    assert brute_cover(supp, K) == 3
    assert greedy_cover(supp, K) == 4
    assert exact_cover(supp, K) == 3


def test_cover_errors():
    with pytest.raises(ValueError):
        covering_number([FrequencySet.of(Z12, [1])], FrequencySet(Z12))


def test_ruzsa_with_gamma():
    gamma = FrequencySet.of(Z16, [0, 1, -1])
    K = power_set(gamma, 2)
    supp = FrequencySet.of(Z16, [3, 4, 5, 6, 7, 8, 9, 10])
    res = covering_number([supp], K, gamma)
    # #(supp + gamma) = #[2, 11] = 10 -> floor(10 / 3) = 3
    assert res.n_ruzsa == 3
    assert res.n_exact == brute_cover(supp, K) == 2


@given(st.sets(st.integers(0, 15), min_size=1, max_size=10),
       st.sampled_from([[0], [0, 1, -1], [0, 1, -1, 2, -2], [0, 4, -4, 8]]))
@settings(max_examples=60, deadline=None)
def test_covering_sandwich_property(members, Kl):
    K = FrequencySet.of(Z16, Kl)
    supp = FrequencySet(Z16, frozenset(members))
    res = covering_number([supp], K)
    exact = brute_cover(supp, K)
    assert res.n_exact == exact
    assert exact <= res.n_greedy and exact <= res.n_ruzsa


# ------------------------------------------------------------ thm4: sumset covering decay


def test_thm4_alpha_formula():
    gamma = FrequencySet.of(Z64, [0, 1, -1])
    assert thm4_alpha(gamma, 6) == float(1 - Fraction(25, 6 * 81))
    assert thm4_alpha(FrequencySet.identity(Z64), 7) == float(Fraction(6, 7))


def test_thm4_collapses_to_thm3():
    bank = z8_one_band()
    e4 = thm4_bound(bank, np.ones(8), gamma=FrequencySet.identity(Z8))
    e3 = thm3_bound(bank, np.ones(8))
    assert e4.base == e3.base
    assert e4.constants["n_exact"] == 7


def test_thm4_z64_pipeline(rng):
    bank = z64_bank()
    gamma = FrequencySet.of(Z64, [0, 1, -1])
    f = Signal.random(Z64, rng)
    e = thm4_bound(bank, f, 3, gamma)
    assert e.constants["gamma2_size"] == 5 and e.constants["gamma4_size"] == 9
    assert 0 <= e.base < 1
    assert e.constants["alpha_greedy"] <= e.constants["alpha_ruzsa"]
    auto = thm4_bound(bank, f, 3)
    assert auto.constants["gamma"] == [0, 1, 63]  # beats Gamma = {0} here
    led = propagate([scattering_layer(bank)], f, 3).ledger
    rep = BoundReport(f.norm_sq(), 3)
    rep.add(e)
    assert certify(led, rep).passed


def test_thm4_rejects_bad_gamma():
    bank = z64_bank()
    with pytest.raises(HypothesisViolation):
        thm4_bound(bank, np.ones(64), gamma=FrequencySet.of(Z64, [0, 1, -1, 2, -2]))
    with pytest.raises(HypothesisViolation):
        thm4_bound(bank, np.ones(64), gamma=FrequencySet.of(Z64, [0, 1]))


def test_alpha_monotone_in_cover_count():
    gamma = FrequencySet.of(Z16, [0, 1, -1])
    alphas = [thm4_alpha(gamma, n) for n in range(1, 8)]
    assert alphas == sorted(alphas)


# ------------------------------------------------------------ certification


def test_certify_end_to_end(rng):
    bank = build_random_smooth_bank(Z16, 3, FrequencySet.of(Z16, [0]), seed=7)
    for _ in range(5):
        f = Signal.random(Z16, rng)
        led = propagate([scattering_layer(bank)], f, 4).ledger
        res = certify(led, bound_report(bank, f, 4))
        assert res.passed
        assert set(res.margins) == {"cor1", "thm3", "thm4"}


def test_certify_detects_corruption(rng):
    bank = z8_one_band()
    f = Signal.random(Z8, rng)
    led = propagate([scattering_layer(bank)], f, 4).ledger
    rep = bound_report(bank, f, 4, ["thm3"])
    W = list(led.propagated)
    W[2] *= 2
    # inflate enough that even the loosest layer-2 bound is violated
    W[2] = max(W[2], 2 * rep.entries["thm3"].curve(2))
    bad = dataclasses.replace(led, propagated=W)
    res = certify(bad, rep)
    assert not res.passed
    assert res.failures[0][:2] == ("thm3", 2)


def test_certify_metadata_mismatch(rng):
    bank = z8_one_band()
    f, g = Signal.random(Z8, rng), Signal.random(Z8, rng)
    led = propagate([scattering_layer(bank)], f, 3).ledger
    with pytest.raises(ValueError, match="different signals"):
        certify(led, bound_report(bank, g, 3))
    with pytest.raises(ValueError, match="depth"):
        certify(led, bound_report(bank, f, 5))


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.sets(st.integers(1, 15), max_size=4))
@settings(max_examples=25, deadline=None)
def test_bounds_valid_for_random_banks(seed, m, extra_gap):
    gap = FrequencySet(Z16, frozenset({0} | extra_gap))
    bank = build_random_smooth_bank(Z16, m, gap, seed)
    f = Signal.random(Z16, np.random.default_rng(seed))
    led = propagate([scattering_layer(bank)], f, 3).ledger
    rep = bound_report(bank, f, 3)
    assert certify(led, rep).passed
    assert rep.entries["cor1"].base >= rep.entries["thm3"].base

"""Built-in invariant suite run by ``scatterlab verify``.

Every check uses fixed seeds and returns ``(passed, detail)``.  Checks that
need a Parseval bank take it from :func:`fixture_banks`, so a corrupted
fixture (``inject="lp-violation"``) surfaces as a named failure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .decay_bounds import bound_report, certify, covering_number
from .extractor_core import nonexpansiveness_probe, propagate, scattering_layer
from .filter_frames import (
    FilterBank,
    audit,
    build_ideal_partition_bank,
    build_random_smooth_bank,
    singleton_partition_bank,
)
from .lca_group import FrequencySet, GroupSpec, Signal, convolve, fourier

SEED = 20240521
INJECTIONS = ("lp-violation",)


def fixture_banks(inject: str | None = None) -> dict[str, FilterBank]:
    z8, z12, z16, z46 = GroupSpec((8,)), GroupSpec((12,)), GroupSpec((16,)), GroupSpec((4, 6))
    banks = {
        "ideal-z8": build_ideal_partition_bank(
            z8, FrequencySet.of(z8, [0]), [FrequencySet.of(z8, range(1, 8))]),
        "ideal-z12": build_ideal_partition_bank(
            z12, FrequencySet.of(z12, [0, 1, -1]),
            [FrequencySet.of(z12, [2, -2, 3, -3, 4, -4]), FrequencySet.of(z12, [5, -5, 6])]),
        "random-z16": build_random_smooth_bank(z16, 3, FrequencySet.of(z16, [0]), seed=7),
        "random-z4x6": build_random_smooth_bank(z46, 3, FrequencySet.of(z46, [0]), seed=11),
    }
    if inject == "lp-violation":
        b = banks["ideal-z12"]
        banks["ideal-z12"] = FilterBank(b.group, b.chi_hat, 1.05 * b.psi_hats, b.support_threshold)
    elif inject is not None:
        raise ValueError(f"unknown injection {inject!r}; choose from {INJECTIONS}")
    return banks


def _rel(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300))


def check_plancherel(banks) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for factors in [(4,), (3, 5), (16,), (4, 6), (2, 2, 3)]:
        g = GroupSpec(factors)
        for _ in range(100):
            f = Signal.random(g, rng)
            worst = max(worst, abs(fourier(f).norm_sq() - f.norm_sq()) / f.norm_sq())
    return worst <= 1e-10, f"max relative error {worst:.2e}"


def check_convolution_oracle(banks) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for factors in [(6,), (3, 4), (8, 8), (2, 3, 5)]:
        g = GroupSpec(factors)
        f, h = Signal.random(g, rng), Signal.random(g, rng)
        table = g.add_table
        neg = g.neg_table
        direct = np.array([sum(f.values[y] * h.values[table[x, neg[y]]] for y in range(g.order))
                           for x in range(g.order)])
        worst = max(worst, _rel(convolve(f, h).values, direct))
    return worst <= 1e-10, f"max relative error {worst:.2e}"


def check_parseval_equality(banks) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED + 2)
    worst, bad = 0.0, []
    for name, bank in banks.items():
        a = audit(bank)
        if not a.parseval:
            bad.append(f"{name}: {'; '.join(a.violations)}")
            continue
        for _ in range(20):
            f = Signal.random(bank.group, rng)
            total = convolve(f, bank.chi()).norm_sq() + sum(
                convolve(f, bank.psi(j)).norm_sq() for j in range(bank.num_filters))
            worst = max(worst, abs(total - f.norm_sq()) / f.norm_sq())
    if bad:
        return False, "; ".join(bad)
    return worst <= 1e-9, f"max relative error {worst:.2e}"


def _ledgers(banks, count=10, depth=3, seed=SEED + 3):
    rng = np.random.default_rng(seed)
    for name, bank in banks.items():
        layers = [scattering_layer(bank)]
        for _ in range(count):
            f = Signal.random(bank.group, rng)
            yield name, bank, f, propagate(layers, f, depth).ledger


def check_energy_step(banks) -> tuple[bool, str]:
    worst = 0.0
    for name, bank, f, led in _ledgers(banks):
        parseval = audit(bank).parseval
        for N in range(led.depth):
            gap = led.propagated[N] - led.output[N] - led.propagated[N + 1]
            rel = gap / led.input_energy
            if rel < -1e-9 or (parseval and abs(rel) > 1e-9):
                return False, f"{name}: layer {N} slack {rel:.2e}"
            worst = max(worst, abs(rel))
    return True, f"max relative slack {worst:.2e}"


def check_energy_total(banks) -> tuple[bool, str]:
    worst = 0.0
    for name, bank, f, led in _ledgers(banks):
        for N in range(led.depth + 1):
            rel = (led.cumulative_output(N) + led.propagated[N] - led.input_energy) / led.input_energy
            if rel > 1e-9 or (audit(bank).parseval and abs(rel) > 1e-9):
                return False, f"{name}: N={N} relative deviation {rel:.2e}"
            worst = max(worst, abs(rel))
    return True, f"max relative deviation {worst:.2e}"


def check_nonexpansive(banks) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED + 4)
    bank = banks["random-z16"]
    layers = [scattering_layer(bank)]
    ratio = 0.0
    for _ in range(30):
        f, g = Signal.random(bank.group, rng), Signal.random(bank.group, rng)
        r = nonexpansiveness_probe(layers, f, g, 3)
        if not r.holds:
            return False, f"lhs {r.lhs!r} > rhs {r.rhs!r}"
        ratio = max(ratio, r.lhs / r.rhs)
    return True, f"max lhs/rhs {ratio:.4f}"


def check_s1_annihilation(banks) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED + 5)
    bank = singleton_partition_bank(GroupSpec((8,)))
    worst = 0.0
    for _ in range(20):
        f = Signal.random(bank.group, rng)
        led = propagate([scattering_layer(bank)], f, 2).ledger
        worst = max(worst, led.propagated[2] / led.input_energy)
    return worst <= 1e-12, f"max W_2/||f||^2 {worst:.2e}"


def check_covering_sandwich(banks) -> tuple[bool, str]:
    rng = np.random.default_rng(SEED + 6)
    checked = 0
    for order in (12, 16):
        g = GroupSpec((order,))
        for K in (FrequencySet.of(g, [0, 1, -1]), FrequencySet.of(g, [0, 1, -1, 2, -2])):
            for _ in range(5):
                supp = FrequencySet(g, frozenset(rng.choice(order, size=int(rng.integers(2, 10)),
                                                            replace=False).tolist()))
                res = covering_number([supp], K)
                brute = _brute_cover(supp, K)
                if res.n_exact != brute or res.n_greedy < brute or res.n_ruzsa < brute:
                    return False, f"supp={supp.sorted()} K={K.sorted()} exact={res.n_exact} brute={brute}"
                checked += 1
    return True, f"{checked} instances"


def _brute_cover(supp: FrequencySet, K: FrequencySet) -> int:
    g = supp.group
    translates = [K.translate(xi).members for xi in range(g.order)]
    for k in range(1, len(supp) + 1):
        for combo in itertools.combinations(translates, k):
            if supp.members <= frozenset().union(*combo):
                return k
    return 0


def check_bound_validity(banks) -> tuple[bool, str]:
    worst = np.inf
    for name, bank, f, led in _ledgers(banks, count=5, seed=SEED + 7):
        a = audit(bank)
        if not a.parseval:
            return False, f"{name}: bank is not Parseval"
        res = certify(led, bound_report(bank, f, led.depth))
        if not res.passed:
            return False, f"{name}: {res.failures[0]}"
        worst = min(worst, min(min(m) for m in res.margins.values()) / led.input_energy)
    return True, f"min relative margin {worst:.2e}"


@dataclass
class Check:
    name: str
    fn: Callable


CHECKS = [
    Check("plancherel", check_plancherel),
    Check("convolution-oracle", check_convolution_oracle),
    Check("parseval-equality", check_parseval_equality),
    Check("energy-step", check_energy_step),
    Check("energy-total", check_energy_total),
    Check("nonexpansive", check_nonexpansive),
    Check("s1-annihilation", check_s1_annihilation),
    Check("covering-sandwich", check_covering_sandwich),
    Check("bound-validity", check_bound_validity),
]


def select(filter_text: str | None) -> list[Check]:
    if filter_text is None:
        return list(CHECKS)
    return [c for c in CHECKS if filter_text in c.name]


def run_checks(checks: list[Check], inject: str | None = None) -> list[tuple[str, bool, str]]:
    banks = fixture_banks(inject)
    results = []
    for c in checks:
        try:
            ok, detail = c.fn(banks)
        except Exception as exc:  # a crash counts as a named failure
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((c.name, ok, detail))
    return results

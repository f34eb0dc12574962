"""Semi-discrete Parseval frames ``{chi} u Psi`` of convolution filters on a finite group.

Banks are stored spectrally.  ``chi_hat`` is the output (low-pass) filter and
each row of ``psi_hats`` one high-pass filter.  The frame is Parseval iff the
Littlewood-Paley sum ``|chi^|^2 + sum |psi^|^2`` equals one at every character.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lca_group import FrequencySet, GroupSpec, Signal, SpectralSignal, inverse_fourier

DEFAULT_SUPPORT_THRESHOLD = 1e-12
PARSEVAL_TOL = 1e-9
SUB_PARSEVAL_TOL = 1e-12


class FrameError(ValueError):
    """Invalid filter bank construction or a failed strict audit."""


@dataclass(frozen=True, eq=False)
class FilterBank:
    group: GroupSpec
    chi_hat: np.ndarray
    psi_hats: np.ndarray
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD
    names: tuple[str, ...] = ()

    def __post_init__(self):
        n = self.group.order
        chi = np.asarray(self.chi_hat, dtype=complex).reshape(n).copy()
        psi = np.asarray(self.psi_hats, dtype=complex).reshape(-1, n).copy()
        if not (np.all(np.isfinite(chi)) and np.all(np.isfinite(psi))):
            raise FrameError("filter coefficients must be finite")
        if self.support_threshold < 0:
            raise FrameError("support threshold must be nonnegative")
        chi.setflags(write=False)
        psi.setflags(write=False)
        object.__setattr__(self, "chi_hat", chi)
        object.__setattr__(self, "psi_hats", psi)
        names = tuple(self.names) or tuple(f"psi{j}" for j in range(psi.shape[0]))
        if len(names) != psi.shape[0]:
            raise FrameError(f"{len(names)} names for {psi.shape[0]} filters")
        object.__setattr__(self, "names", names)

    @property
    def num_filters(self) -> int:
        return self.psi_hats.shape[0]

    def lp_sum(self) -> np.ndarray:
        return np.abs(self.chi_hat) ** 2 + np.sum(np.abs(self.psi_hats) ** 2, axis=0)

    def chi(self) -> Signal:
        return inverse_fourier(SpectralSignal(self.group, self.chi_hat))

    def psi(self, j: int) -> Signal:
        return inverse_fourier(SpectralSignal(self.group, self.psi_hats[j]))

    def support(self, j: int) -> FrequencySet:
        idx = np.flatnonzero(np.abs(self.psi_hats[j]) > self.support_threshold)
        return FrequencySet(self.group, frozenset(idx.tolist()))

    def supports(self) -> list[FrequencySet]:
        return [self.support(j) for j in range(self.num_filters)]

    def frequency_gap(self) -> FrequencySet:
        """Characters where every high-pass filter vanishes (up to the threshold)."""
        active = np.any(np.abs(self.psi_hats) > self.support_threshold, axis=0)
        return FrequencySet(self.group, frozenset(np.flatnonzero(~active).tolist()))


@dataclass
class FrameAudit:
    lp_deficiency: float
    lp_max: float
    gap: FrequencySet
    per_filter_supports: list[FrequencySet]
    max_support: int
    chi_gap_deviation: float
    highpass_ok: bool
    violations: list[str] = field(default_factory=list)

    @property
    def parseval(self) -> bool:
        return self.lp_deficiency <= PARSEVAL_TOL

    @property
    def sub_parseval(self) -> bool:
        return self.lp_max <= 1 + SUB_PARSEVAL_TOL

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        return (f"lp_deficiency={self.lp_deficiency:.3e} S={self.max_support} "
                f"#gap={len(self.gap)} filters={len(self.per_filter_supports)}")


def audit(bank: FilterBank, strict: bool = False, parseval: bool = True) -> FrameAudit:
    """Measure LP deficiency, supports, S and the frequency gap of ``bank``.

    With ``parseval=False`` only the sub-Parseval bound ``LP <= 1`` is required.
    Violations are listed on the returned audit; ``strict=True`` raises instead.
    """
    lp = bank.lp_sum()
    deficiency = float(np.max(np.abs(lp - 1.0)))
    lp_max = float(np.max(lp))
    supports = bank.supports()
    gap = bank.frequency_gap()
    S = max((len(s) for s in supports), default=0)
    gap_idx = gap.sorted()
    chi_dev = float(np.max(np.abs(np.abs(bank.chi_hat[gap_idx]) - 1.0))) if gap_idx else 0.0
    highpass_ok = 0 in gap

    violations = []
    if parseval and deficiency > PARSEVAL_TOL:
        violations.append(f"Littlewood-Paley deficiency {deficiency:.3e} exceeds {PARSEVAL_TOL:g}")
    if not parseval and lp_max > 1 + SUB_PARSEVAL_TOL:
        violations.append(f"Littlewood-Paley sum {lp_max!r} exceeds 1")
    if not highpass_ok:
        bad = [bank.names[j] for j in range(bank.num_filters) if 0 in supports[j]]
        violations.append(f"high-pass condition violated at the trivial character by {bad}")
    if parseval and chi_dev > PARSEVAL_TOL:
        violations.append(f"|chi^| deviates from 1 on the gap by {chi_dev:.3e}")
    if S > bank.group.order - len(gap):
        violations.append("support size exceeds #G - #gap")  # cannot happen; set arithmetic

    result = FrameAudit(deficiency, lp_max, gap, supports, S, chi_dev, highpass_ok, violations)
    if strict and violations:
        raise FrameError("; ".join(violations))
    return result


def build_ideal_partition_bank(group: GroupSpec, low_set: FrequencySet,
                               bands: Sequence[FrequencySet],
                               support_threshold: float = DEFAULT_SUPPORT_THRESHOLD) -> FilterBank:
    """Indicator filters of a partition of the dual: ``chi^ = 1_low``, ``psi_j^ = 1_band_j``."""
    problems = []
    for s in [low_set, *bands]:
        group._check(s.group)
    if 0 not in low_set:
        problems.append("trivial character 0 must belong to the low set")
    for j, b in enumerate(bands):
        if not b.members:
            problems.append(f"band {j} is empty")
    count = np.zeros(group.order, dtype=int)
    for s in [low_set, *bands]:
        count[list(s.members)] += 1
    overlap = np.flatnonzero(count > 1).tolist()
    missing = np.flatnonzero(count == 0).tolist()
    if overlap:
        problems.append(f"overlapping frequencies {overlap}")
    if missing:
        problems.append(f"missing frequencies {missing}")
    if problems:
        raise FrameError("not a partition of the dual: " + "; ".join(problems))

    chi = low_set.mask().astype(complex)
    psi = np.array([b.mask() for b in bands], dtype=complex).reshape(len(bands), group.order)
    return FilterBank(group, chi, psi, support_threshold)


def singleton_partition_bank(group: GroupSpec, low_set: FrequencySet | None = None) -> FilterBank:
    """One single-frequency filter per character outside ``low_set`` (default ``{0}``)."""
    low_set = low_set or FrequencySet.identity(group)
    bands = [FrequencySet(group, frozenset({k})) for k in low_set.complement().sorted()]
    return build_ideal_partition_bank(group, low_set, bands)


def build_random_smooth_bank(group: GroupSpec, m: int, gap: FrequencySet, seed: int,
                             support_threshold: float = DEFAULT_SUPPORT_THRESHOLD) -> FilterBank:
    """Random Parseval bank whose high-pass filters vanish on ``gap``.

    Each filter gets a Gaussian bump profile (random center and width, measured
    in cyclic distance on the dual); the low-pass filter gets a bump at the
    identity.  Profiles are zeroed on ``gap``, ``chi^`` is set to one there, and
    every character is normalized so the Littlewood-Paley sum is exactly one.
    """
    group._check(gap.group)
    if 0 not in gap:
        raise FrameError("trivial character 0 must belong to the gap")
    if m < 0:
        raise FrameError(f"number of filters must be >= 0, got {m}")
    if len(gap) == group.order:
        raise FrameError("gap is the whole dual: every high-pass filter would be zero (empty effective Psi)")
    if m == 0:
        raise FrameError("m = 0 cannot satisfy Littlewood-Paley outside the gap")

    rng = np.random.default_rng(seed)
    n = np.asarray(group.factors, dtype=float)
    coords = group.coords.astype(float)

    def bump(center, width):
        d = np.abs(coords - center)
        d = np.minimum(d, n - d) / n
        return np.exp(-np.sum(d ** 2, axis=1) / (2 * width ** 2))

    outside = ~gap.mask()
    centers = rng.integers(0, group.factors, size=(m, len(group.factors)))
    widths = rng.uniform(0.05, 0.35, size=m)
    psi = np.array([bump(c, w) for c, w in zip(centers, widths)])
    # floor keeps every profile strictly positive off the gap
    psi = (psi + 1e-3) * outside
    chi = bump(np.zeros(len(group.factors)), rng.uniform(0.05, 0.2))
    chi = np.where(outside, chi, 1.0)

    total = np.sqrt(chi ** 2 + np.sum(psi ** 2, axis=0))
    chi = chi / total
    psi = psi / total
    return FilterBank(group, chi.astype(complex), psi.astype(complex), support_threshold)

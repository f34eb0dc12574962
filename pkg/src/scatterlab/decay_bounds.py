"""Energy-decay bounds for layered extractors and their certification.

Every bound has the shape ``W_N(f) <= base**(N-1) * (||f||^2 - ||A^(0) f||^2)``
for ``N >= 1``.  Three bases are available:

* ``cor1``: ``1 - C_M * C_A`` from an eigenpair ``(lam, eta)`` of ``A*A`` with
  ``sqrt(lam) * eta >= sqrt(C_A)`` pointwise (generic finite-dimensional mode).
* ``thm3``: ``1 - 1/S`` with ``S`` the largest spectral support of a high-pass
  filter (finite abelian groups).
* ``thm4``: ``1 - #(G2)^2 / (n * #(G4)^2)`` for a symmetric neighborhood
  ``Gamma`` of the identity with ``Gamma^8`` inside the frequency gap, where
  ``G2, G4`` are its sumset powers and ``n`` covers every filter support by
  translates of ``G2``.
"""
from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .extractor_core import (
    ConvolutionOperator,
    EnergyLedger,
    LayerSpec,
    as_operator,
    layer_at,
    scattering_layer,
)
from .filter_frames import FilterBank, audit
from .lca_group import FrequencySet, Signal, convolve, negate, power_set, sumset

CERT_SLACK = 1e-9
EIGEN_TOL = 1e-9
EXACT_COVER_LIMIT = 20
GAMMA_EXHAUSTIVE_LIMIT = 16
THEOREMS = ("cor1", "thm3", "thm4")


class HypothesisViolation(ValueError):
    """The inputs do not meet the hypotheses of the requested bound."""


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SCATTERLAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class EigenWitness:
    lam: float
    eta: np.ndarray
    source: str = "explicit"

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=complex).reshape(-1)
        if not 0.0 <= self.lam <= 1.0 + 1e-12:
            raise HypothesisViolation(f"eigenvalue {self.lam!r} outside [0, 1]")
        if abs(np.linalg.norm(self.eta) - 1.0) > 1e-12:
            raise HypothesisViolation("witness eta must have unit norm")

    def residual(self, A) -> float:
        """``||A*A eta - lam eta||``."""
        A = as_operator(A)
        return float(np.linalg.norm(A.adjoint()(A(self.eta)) - self.lam * self.eta))


def constant_witness(A) -> EigenWitness:
    """Constant unit vector with its Rayleigh quotient as eigenvalue."""
    A = as_operator(A)
    d = A.shape[1]
    eta = np.full(d, 1 / math.sqrt(d), dtype=complex)
    Aeta = A(eta)
    lam = float(np.vdot(Aeta, Aeta).real)
    return EigenWitness(min(lam, 1.0), eta, "constant-function")


@dataclass
class BoundEntry:
    theorem: str
    base: float
    prefactor: float
    constants: dict = field(default_factory=dict)

    def curve(self, N: int) -> float:
        if N < 1:
            raise ValueError("bounds are stated for N >= 1")
        if self.prefactor == 0.0:
            return 0.0
        return self.base ** (N - 1) * self.prefactor


@dataclass
class BoundReport:
    input_energy: float
    depth: int
    entries: dict[str, BoundEntry] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def add(self, entry: BoundEntry):
        self.entries[entry.theorem] = entry


def _input_energy(f) -> float:
    v = f.values if isinstance(f, Signal) else np.asarray(f)
    return math.fsum(np.abs(v) ** 2)


def _prefactor(A0, f) -> float:
    v = np.asarray(f.values if isinstance(f, Signal) else f, dtype=complex)
    out = as_operator(A0)(v[None, :])[0]
    return max(0.0, _input_energy(v) - math.fsum(np.abs(out) ** 2))


def _base(fr: Fraction) -> float:
    return float(fr)


def corollary1_bound(layers: Sequence[LayerSpec], f, depth: int,
                     witness: EigenWitness | None = None, C_M: float = 1.0) -> BoundEntry:
    """Generic bound from a positive eigen-witness of ``A*A`` shared by layers ``1..depth-1``.

    ``C_M`` is the smallest positive point mass of the measure (1 for counting
    measure).  The witness defaults to the constant function.
    """
    layers = list(layers)
    for ell in range(1, max(depth, 2)):
        if layer_at(layers, ell - 1).sigma != "modulus":
            raise HypothesisViolation("nonnegative nonlinearity required; only modulus is accepted")
    A1 = layer_at(layers, 1).output
    if witness is None:
        witness = constant_witness(A1)
    for ell in range(1, max(depth, 2)):
        A = layer_at(layers, ell).output
        if A.shape[1] != witness.eta.shape[0]:
            raise HypothesisViolation(f"witness dimension {witness.eta.shape[0]} != layer {ell} dimension")
        r = witness.residual(A)
        if r > EIGEN_TOL:
            raise HypothesisViolation(f"witness is not an eigenvector of A*A at layer {ell} (residual {r:.3e})")
    scaled = math.sqrt(witness.lam) * witness.eta
    if np.max(np.abs(scaled.imag)) > 1e-12:
        raise HypothesisViolation("witness must be real-valued")
    m = float(np.min(scaled.real))
    if m <= 0:
        raise HypothesisViolation(f"min sqrt(lam)*eta = {m!r} is not positive; no bound emitted")
    C_A = m * m
    base = 1.0 - C_M * C_A
    return BoundEntry("cor1", base, _prefactor(layer_at(layers, 0).output, f),
                      {"lambda": witness.lam, "C_A": C_A, "C_M": C_M, "witness": witness.source})


def layer_step_margins(bank: FilterBank, f) -> list[tuple[float, float]]:
    """Per-filter pairs ``(||(|f*psi|)*chi||^2, ||f*psi||^2 / #supp psi^)``.

    The first entry dominates the second for every nonzero filter; zero filters are skipped.
    """
    f = f if isinstance(f, Signal) else Signal(bank.group, f)
    chi = bank.chi()
    out = []
    for j, supp in enumerate(bank.supports()):
        if not supp.members:
            continue
        u = convolve(f, bank.psi(j))
        lhs = convolve(Signal(bank.group, np.abs(u.values)), chi).norm_sq()
        out.append((lhs, u.norm_sq() / len(supp)))
    return out


def thm3_bound(bank: FilterBank, f, depth: int | None = None) -> BoundEntry:
    """Finite-group bound with ``S = max #supp(psi^)``; ``S = 0`` means ``W_N = 0`` for ``N >= 1``."""
    a = audit(bank)
    if not a.parseval:
        raise HypothesisViolation("thm3 requires a Parseval bank: " + "; ".join(a.violations))
    S = a.max_support
    base = _base(1 - Fraction(1, S)) if S > 0 else 0.0
    f = f if isinstance(f, Signal) else Signal(bank.group, f)
    pref = _prefactor(ConvolutionOperator(bank.group, bank.chi_hat), f)
    if S == 0:
        pref = 0.0
    step = layer_step_margins(bank, f)
    return BoundEntry("thm3", base, pref, {
        "S": S, "S_alt": bank.group.order - len(a.gap), "order": bank.group.order,
        "gap_size": len(a.gap),
        "step_min_margin": min((l - r for l, r in step), default=0.0),
    })


def _symmetric_pairs(gap: FrequencySet) -> list[frozenset[int]]:
    """Symmetric pairs ``{xi, -xi}`` inside ``gap`` without the identity, in canonical order.

    Canonical order: cyclic height of the element (sum over factors of the
    distance to 0), then smallest flat index.
    """
    g = gap.group
    neg = g.neg_table
    seen, pairs = set(), []
    for xi in gap.sorted():
        if xi == 0 or xi in seen:
            continue
        if int(neg[xi]) not in gap:
            continue
        pair = frozenset({xi, int(neg[xi])})
        seen |= pair
        pairs.append(pair)
    pairs.sort(key=lambda p: (g.height(min(p)), min(p)))
    return pairs


def _valid_gamma(gamma: FrequencySet, gap: FrequencySet, power: int = 8) -> bool:
    return power_set(gamma, power).issubset(gap)


def gamma_candidates(gap: FrequencySet, power: int = 8) -> list[FrequencySet]:
    """Symmetric sets ``Gamma`` containing 0 with ``Gamma^power`` inside ``gap``.

    Exhaustive over all symmetric subsets when ``#gap <= 16``; otherwise the
    chain of sets accepted by the greedy search.
    """
    if 0 not in gap:
        raise HypothesisViolation("trivial character is not in the gap; no neighborhood Gamma exists")
    g = gap.group
    pairs = _symmetric_pairs(gap)
    base = FrequencySet.identity(g)
    if len(gap) <= GAMMA_EXHAUSTIVE_LIMIT:
        found = []
        for r in range(len(pairs) + 1):
            for combo in itertools.combinations(pairs, r):
                cand = FrequencySet(g, frozenset({0}).union(*combo))
                if _valid_gamma(cand, gap, power):
                    found.append(cand)
        return found
    chain = [base]
    current = base
    for pair in pairs:
        cand = FrequencySet(g, current.members | pair)
        if _valid_gamma(cand, gap, power):
            current = cand
            chain.append(cand)
    return chain


def find_gamma(gap: FrequencySet, power: int = 8) -> FrequencySet:
    """Largest symmetric neighborhood found; ties go to the first in canonical order."""
    cands = gamma_candidates(gap, power)
    return max(cands, key=len)


@dataclass
class CoveringResult:
    n_exact: int | None
    n_greedy: int
    n_ruzsa: int
    per_filter: list[dict] = field(default_factory=list)
    exact_degraded: bool = False

    @property
    def best(self) -> int:
        vals = [self.n_greedy, self.n_ruzsa]
        if self.n_exact is not None:
            vals.append(self.n_exact)
        return min(vals)


def _translate_masks(supp: list[int], K: FrequencySet) -> list[int]:
    """Bitmasks (over ``supp``) of ``(xi + K) & supp`` for every useful translate ``xi``."""
    g = K.group
    pos = {s: i for i, s in enumerate(supp)}
    table = g.add_table
    negK = [int(g.neg_table[k]) for k in K.members]
    shifts = sorted({int(table[s, nk]) for s in supp for nk in negK})
    masks = []
    for xi in shifts:
        m = 0
        for k in K.members:
            i = pos.get(int(table[xi, k]))
            if i is not None:
                m |= 1 << i
        masks.append(m)
    return masks


def greedy_cover(supp: FrequencySet, K: FrequencySet) -> int:
    """Greedy cover by translates: most newly covered first, smallest translate index on ties."""
    elems = supp.sorted()
    if not elems:
        return 0
    g = K.group
    pos = {s: i for i, s in enumerate(elems)}
    table = g.add_table
    masks = []
    for xi in range(g.order):
        m = 0
        for k in K.members:
            i = pos.get(int(table[xi, k]))
            if i is not None:
                m |= 1 << i
        masks.append(m)
    uncovered = (1 << len(elems)) - 1
    n = 0
    while uncovered:
        best = max(range(g.order), key=lambda xi: (bin(masks[xi] & uncovered).count("1"), -xi))
        uncovered &= ~masks[best]
        n += 1
    return n


class _Timeout(Exception):
    pass


def exact_cover(supp: FrequencySet, K: FrequencySet, upper: int | None = None,
                deadline: float | None = None) -> int:
    """Minimum number of translates of ``K`` covering ``supp`` (branch and bound).

    Iterative deepening; each level branches on the translates containing the
    lowest uncovered element and prunes when even the largest translate cannot
    finish in the remaining budget.
    """
    elems = supp.sorted()
    if not elems:
        return 0
    masks = sorted(set(_translate_masks(elems, K)) - {0}, key=lambda m: -bin(m).count("1"))
    masks = [m for m in masks if not any(o != m and (o | m) == o for o in masks)]
    biggest = max(bin(m).count("1") for m in masks)
    by_elem = [[m for m in masks if m >> i & 1] for i in range(len(elems))]
    full = (1 << len(elems)) - 1
    upper = upper if upper is not None else len(elems)

    def search(uncovered: int, k: int) -> bool:
        if not uncovered:
            return True
        if k == 0 or bin(uncovered).count("1") > k * biggest:
            return False
        if deadline is not None and time.monotonic() > deadline:
            raise _Timeout
        low = (uncovered & -uncovered).bit_length() - 1
        return any(search(uncovered & ~m, k - 1) for m in by_elem[low])

    k = -(-len(elems) // biggest)
    while k < upper:
        if search(full, k):
            return k
        k += 1
    return upper


def ruzsa_bound(supp: FrequencySet, gamma: FrequencySet) -> int:
    """``floor(#(Gamma + supp) / #Gamma)``."""
    if not supp.members:
        return 0
    return len(sumset(gamma, supp)) // len(gamma)


def _ruzsa_gamma(K: FrequencySet) -> FrequencySet:
    """Largest symmetric ``Gamma`` with ``Gamma^2`` inside ``K`` (used when only ``K`` is given)."""
    if 0 not in K:
        return FrequencySet.identity(K.group)
    return find_gamma(K, power=2)


def covering_number(supports, K: FrequencySet, gamma: FrequencySet | None = None,
                    exact_limit: int = EXACT_COVER_LIMIT, time_budget: float = 30.0) -> CoveringResult:
    """Covering counts of filter supports by translates of ``K`` (maximized over filters).

    ``supports`` is a :class:`FilterBank` or a list of frequency sets.  The
    Ruzsa estimate uses ``gamma`` (normally ``K = Gamma^2``); without it, the
    largest symmetric ``Gamma`` with ``Gamma^2`` inside ``K`` is used.  Exact
    counts are computed for supports of size ``<= exact_limit``; if any
    support is larger or the time budget runs out, ``n_exact`` is ``None``.
    """
    if not K.members:
        raise ValueError("covering set K must be nonempty")
    if 0 not in K:
        raise ValueError("covering set K must contain the trivial character")
    if isinstance(supports, FilterBank):
        supports = supports.supports()
    gamma = gamma if gamma is not None else _ruzsa_gamma(K)
    deadline = time.monotonic() + time_budget

    def one(supp: FrequencySet) -> dict:
        ng = greedy_cover(supp, K)
        nr = ruzsa_bound(supp, gamma)
        ne = None
        degraded = False
        if len(supp) <= exact_limit:
            try:
                ne = exact_cover(supp, K, upper=ng, deadline=deadline)
            except _Timeout:
                degraded = True
        else:
            degraded = True
        return {"size": len(supp), "n_exact": ne, "n_greedy": ng, "n_ruzsa": nr, "degraded": degraded}

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        per = list(pool.map(one, supports))
    if not per:
        return CoveringResult(0, 0, 0, [], False)
    degraded = any(p["degraded"] for p in per)
    n_exact = None if degraded else max(p["n_exact"] for p in per)
    return CoveringResult(n_exact, max(p["n_greedy"] for p in per),
                          max(p["n_ruzsa"] for p in per), per, degraded)


def thm4_alpha(gamma: FrequencySet, n: int) -> float:
    if n == 0:
        return 0.0
    g2 = len(power_set(gamma, 2))
    g4 = len(power_set(gamma, 4))
    return _base(1 - Fraction(g2 * g2, n * g4 * g4))


def _check_gamma(gamma: FrequencySet, gap: FrequencySet):
    if 0 not in gamma:
        raise HypothesisViolation("Gamma must contain the trivial character")
    if gamma != negate(gamma):
        raise HypothesisViolation("Gamma must be symmetric")
    if not _valid_gamma(gamma, gap):
        raise HypothesisViolation("Gamma^8 is not contained in the frequency gap")


def thm4_bound(bank: FilterBank, f, depth: int | None = None,
               gamma: FrequencySet | None = None) -> BoundEntry:
    """Neighborhood/covering bound.  Without ``gamma``, picks the candidate minimizing alpha
    (ties: smaller ``#Gamma``)."""
    a = audit(bank)
    if not a.parseval:
        raise HypothesisViolation("thm4 requires a Parseval bank: " + "; ".join(a.violations))
    if gamma is not None:
        _check_gamma(gamma, a.gap)
        candidates = [gamma]
    else:
        candidates = gamma_candidates(a.gap)

    best = None
    for cand in candidates:
        K = power_set(cand, 2)
        cov = covering_number(a.per_filter_supports, K, cand)
        alpha = thm4_alpha(cand, cov.best)
        key = (alpha, len(cand))
        if best is None or key < best[0]:
            best = (key, cand, cov, alpha)
    _, gam, cov, alpha = best

    f = f if isinstance(f, Signal) else Signal(bank.group, f)
    pref = _prefactor(ConvolutionOperator(bank.group, bank.chi_hat), f)
    consts = {
        "gamma": gam.sorted(), "gamma_size": len(gam),
        "gamma2_size": len(power_set(gam, 2)), "gamma4_size": len(power_set(gam, 4)),
        "n_exact": cov.n_exact, "n_greedy": cov.n_greedy, "n_ruzsa": cov.n_ruzsa,
        "n_used": cov.best, "exact_degraded": cov.exact_degraded,
        "alpha_greedy": thm4_alpha(gam, cov.n_greedy),
        "alpha_ruzsa": thm4_alpha(gam, cov.n_ruzsa),
        "alpha_exact": thm4_alpha(gam, cov.n_exact) if cov.n_exact is not None else None,
    }
    return BoundEntry("thm4", alpha, pref, consts)


def bound_report(bank: FilterBank, f, depth: int, theorems: Sequence[str] = THEOREMS) -> BoundReport:
    """All requested bounds for a scattering extractor built from ``bank``."""
    f = f if isinstance(f, Signal) else Signal(bank.group, f)
    report = BoundReport(f.norm_sq(), depth)
    for name in theorems:
        if name == "cor1":
            try:
                report.add(corollary1_bound([scattering_layer(bank)], f, depth))
            except HypothesisViolation as exc:
                report.notes.append(f"cor1: no entry ({exc})")
        elif name == "thm3":
            report.add(thm3_bound(bank, f, depth))
        elif name == "thm4":
            report.add(thm4_bound(bank, f, depth))
        else:
            raise ValueError(f"unknown theorem {name!r}; choose from {THEOREMS}")
    return report


@dataclass
class CertificationResult:
    passed: bool
    margins: dict[str, list[float]]
    failures: list[tuple[str, int, float]]
    slack: float


def certify(ledger: EnergyLedger, report: BoundReport, slack: float = CERT_SLACK) -> CertificationResult:
    """Check ``W_N <= curve(N) + slack * ||f||^2`` for every entry and ``1 <= N <= depth``."""
    e = ledger.input_energy
    if abs(report.input_energy - e) > 1e-12 * max(e, 1.0):
        raise ValueError(f"ledger and report belong to different signals "
                         f"(||f||^2 {e!r} vs {report.input_energy!r})")
    if report.depth > ledger.depth:
        raise ValueError(f"report depth {report.depth} exceeds ledger depth {ledger.depth}")
    margins, failures = {}, []
    tol = slack * e
    for name, entry in report.entries.items():
        row = []
        for N in range(1, report.depth + 1):
            margin = entry.curve(N) - ledger.propagated[N]
            row.append(margin)
            if margin < -tol:
                failures.append((name, N, margin))
        margins[name] = row
    return CertificationResult(not failures, margins, failures, slack)


def format_certificate(result: CertificationResult, report: BoundReport, label: str = "") -> str:
    lines = [f"certificate {label}".rstrip(),
             f"  input_energy = {report.input_energy:.15g}",
             f"  depth = {report.depth}"]
    for name, entry in report.entries.items():
        status = "FAIL" if any(fl[0] == name for fl in result.failures) else "PASS"
        lines.append(f"  [{status}] {name}: base = {entry.base:.15g}, prefactor = {entry.prefactor:.15g}")
        for k in sorted(entry.constants):
            lines.append(f"      {k} = {entry.constants[k]}")
        for N, m in enumerate(result.margins.get(name, []), start=1):
            lines.append(f"      N={N} margin = {m:.15g}")
    for note in report.notes:
        lines.append(f"  note: {note}")
    for name, N, m in result.failures:
        lines.append(f"  FAILURE theorem={name} layer={N} margin={m:.15g}")
    lines.append(f"  overall: {'PASS' if result.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"

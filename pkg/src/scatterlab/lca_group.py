"""Finite abelian groups Z_{n1} x ... x Z_{nk}, their duals and Fourier analysis.

Elements of the group and of its dual are both addressed by flat indices in
row-major mixed-radix order, via the canonical isomorphism ``k -> xi_k`` with
``xi_k(x) = exp(2 pi i sum_j x_j k_j / n_j)``.  The flat index 0 is the
identity of the group and the trivial character of the dual.

Measure conventions: the group carries the counting measure, the dual the
uniform measure with point mass ``1/#G``.  With these the Fourier transform is
unitary and ``(f * g)^ = f^ . g^`` holds without extra factors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GroupMismatchError(ValueError):
    """Raised when objects living on different groups are combined."""


@dataclass(frozen=True)
class GroupSpec:
    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(n) for n in self.factors)
        if not factors:
            raise ValueError("a group needs at least one cyclic factor")
        if any(n < 1 for n in factors):
            raise ValueError(f"cyclic orders must be >= 1, got {factors}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def cyclic(cls, n: int) -> "GroupSpec":
        return cls((n,))

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        """Parse ``"4 x 6"``, ``"4x6"`` or ``"12"``."""
        parts = [p for p in text.replace("×", "x").lower().split("x") if p.strip()]
        try:
            return cls(tuple(int(p) for p in parts))
        except ValueError as exc:
            raise ValueError(f"cannot parse group spec {text!r}") from exc

    def __str__(self):
        return " x ".join(str(n) for n in self.factors)

    @property
    def order(self) -> int:
        return int(np.prod(self.factors))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.factors

    @cached_property
    def coords(self) -> np.ndarray:
        """Residue tuples of all elements, shape ``(order, k)``."""
        grids = np.unravel_index(np.arange(self.order), self.factors)
        return np.stack(grids, axis=1)

    def index(self, residues: Sequence[int]) -> int:
        if len(residues) != len(self.factors):
            raise ValueError(f"expected {len(self.factors)} residues, got {tuple(residues)}")
        reduced = tuple(int(r) % n for r, n in zip(residues, self.factors))
        return int(np.ravel_multi_index(reduced, self.factors))

    def residues(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.order:
            raise IndexError(f"element index {index} out of range for order {self.order}")
        return tuple(int(r) for r in self.coords[index])

    def add(self, a, b):
        """Group law on flat indices (scalars or arrays)."""
        ca = self.coords[np.asarray(a)]
        cb = self.coords[np.asarray(b)]
        s = (ca + cb) % np.asarray(self.factors)
        return np.ravel_multi_index(tuple(np.moveaxis(s, -1, 0)), self.factors)

    def neg(self, a):
        c = (-self.coords[np.asarray(a)]) % np.asarray(self.factors)
        return np.ravel_multi_index(tuple(np.moveaxis(c, -1, 0)), self.factors)

    @cached_property
    def add_table(self) -> np.ndarray:
        """``add_table[a, b]`` is the flat index of ``a + b``."""
        idx = np.arange(self.order)
        return np.asarray(self.add(idx[:, None], idx[None, :]))

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.asarray(self.neg(np.arange(self.order)))

    def height(self, index: int) -> int:
        """Cyclic distance of an element from the identity (sum over factors)."""
        return sum(min(r, n - r) for r, n in zip(self.residues(index), self.factors))

    def character(self, k: int) -> np.ndarray:
        """Values of the character ``xi_k`` on every group element."""
        ck = self.coords[k]
        phase = (self.coords * ck).astype(float) / np.asarray(self.factors)
        return np.exp(2j * np.pi * phase.sum(axis=1))

    def _check(self, other: "GroupSpec"):
        if self != other:
            raise GroupMismatchError(f"group mismatch: {self} vs {other}")


def _as_values(group: GroupSpec, values) -> np.ndarray:
    arr = np.asarray(values, dtype=complex).reshape(-1)
    if arr.shape[0] != group.order:
        raise ValueError(f"expected {group.order} values for group {group}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal values must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Signal:
    """Complex function on the group, one value per element (flat order)."""

    group: GroupSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.group, self.values))

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def __add__(self, other: "Signal") -> "Signal":
        self.group._check(other.group)
        return Signal(self.group, self.values + other.values)

    def __sub__(self, other: "Signal") -> "Signal":
        self.group._check(other.group)
        return Signal(self.group, self.values - other.values)

    @classmethod
    def delta(cls, group: GroupSpec, at: int = 0) -> "Signal":
        v = np.zeros(group.order, dtype=complex)
        v[at] = 1.0
        return cls(group, v)

    @classmethod
    def constant(cls, group: GroupSpec, c: complex = 1.0) -> "Signal":
        return cls(group, np.full(group.order, c, dtype=complex))

    @classmethod
    def character(cls, group: GroupSpec, k: int) -> "Signal":
        return cls(group, group.character(k))

    @classmethod
    def random(cls, group: GroupSpec, rng: np.random.Generator) -> "Signal":
        v = rng.standard_normal(group.order) + 1j * rng.standard_normal(group.order)
        return cls(group, v)


@dataclass(frozen=True, eq=False)
class SpectralSignal:
    """Function on the dual group, one coefficient per character."""

    group: GroupSpec
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_values(self.group, self.coeffs))

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2)) / self.group.order


def fourier(f: Signal) -> SpectralSignal:
    """``f^(xi) = sum_x f(x) conj(xi(x))``, computed factor-wise by FFT."""
    g = f.group
    return SpectralSignal(g, np.fft.fftn(f.values.reshape(g.shape)).reshape(-1))


def inverse_fourier(F: SpectralSignal) -> Signal:
    g = F.group
    return Signal(g, np.fft.ifftn(F.coeffs.reshape(g.shape)).reshape(-1))


def convolve(f: Signal, g: Signal) -> Signal:
    """``(f * g)(x) = sum_y f(y) g(x - y)``, evaluated through the dual."""
    f.group._check(g.group)
    F = fourier(f).coeffs * fourier(g).coeffs
    return inverse_fourier(SpectralSignal(f.group, F))


def spectral_multiply(values: np.ndarray, group: GroupSpec, multiplier: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier to a batch of signals of shape ``(..., order)``.

    This is convolution with ``inverse_fourier(multiplier)`` on every row.
    """
    values = np.asarray(values)
    lead = values.shape[:-1]
    axes = tuple(range(-len(group.shape), 0))
    x = values.reshape(lead + group.shape)
    m = np.asarray(multiplier).reshape(group.shape)
    out = np.fft.ifftn(np.fft.fftn(x, axes=axes) * m, axes=axes)
    return out.reshape(lead + (group.order,))


@dataclass(frozen=True)
class FrequencySet:
    """Finite subset of the dual group, stored as flat indices."""

    group: GroupSpec
    members: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        members = frozenset(int(m) for m in self.members)
        bad = [m for m in members if not 0 <= m < self.group.order]
        if bad:
            raise ValueError(f"frequencies {sorted(bad)} outside dual of {self.group}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, group: GroupSpec, elements: Iterable) -> "FrequencySet":
        """Build from flat indices (negative ints mean the group inverse) or residue tuples."""
        return cls(group, frozenset(resolve_element(group, e) for e in elements))

    @classmethod
    def everything(cls, group: GroupSpec) -> "FrequencySet":
        return cls(group, frozenset(range(group.order)))

    @classmethod
    def identity(cls, group: GroupSpec) -> "FrequencySet":
        return cls(group, frozenset({0}))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __contains__(self, item):
        return item in self.members

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def measure(self) -> float:
        return len(self.members) / self.group.order

    def mask(self) -> np.ndarray:
        m = np.zeros(self.group.order, dtype=bool)
        m[list(self.members)] = True
        return m

    def complement(self) -> "FrequencySet":
        return FrequencySet(self.group, frozenset(range(self.group.order)) - self.members)

    def union(self, other: "FrequencySet") -> "FrequencySet":
        self.group._check(other.group)
        return FrequencySet(self.group, self.members | other.members)

    def issubset(self, other: "FrequencySet") -> bool:
        self.group._check(other.group)
        return self.members <= other.members

    def is_symmetric(self) -> bool:
        return self == negate(self)

    def translate(self, xi: int) -> "FrequencySet":
        table = self.group.add_table
        return FrequencySet(self.group, frozenset(int(table[xi, a]) for a in self.members))


def resolve_element(group: GroupSpec, e) -> int:
    """Flat index for ``e``: an int (``-k`` is the inverse of ``k``) or a residue tuple."""
    if isinstance(e, (tuple, list)):
        return group.index(e)
    k = int(e)
    if k < 0:
        if -k >= group.order:
            raise ValueError(f"element {k} out of range for group {group}")
        return int(group.neg_table[-k])
    if k >= group.order:
        raise ValueError(f"element {k} out of range for group {group}")
    return k


def sumset(A: FrequencySet, B: FrequencySet) -> FrequencySet:
    A.group._check(B.group)
    if not A.members or not B.members:
        return FrequencySet(A.group)
    a = np.fromiter(A.members, dtype=int)
    b = np.fromiter(B.members, dtype=int)
    sums = A.group.add_table[np.ix_(a, b)]
    return FrequencySet(A.group, frozenset(np.unique(sums).tolist()))


def power_set(A: FrequencySet, k: int) -> FrequencySet:
    """k-fold sumset ``A + ... + A``; ``k = 0`` gives ``{0}``."""
    if k < 0:
        raise ValueError(f"sumset power must be >= 0, got {k}")
    out = FrequencySet.identity(A.group)
    for _ in range(k):
        nxt = sumset(out, A)
        if nxt == out:
            break
        out = nxt
    return out


def negate(A: FrequencySet) -> FrequencySet:
    table = A.group.neg_table
    return FrequencySet(A.group, frozenset(int(table[a]) for a in A.members))

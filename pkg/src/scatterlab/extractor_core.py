"""Layered feature extractors, path propagation and the energy ledger.

A network is a list of :class:`LayerSpec`.  Entry ``i`` bundles the output
operator ``A^(i)`` with the filters ``L^(i+1)`` and nonlinearity ``sigma^(i+1)``
of the next layer, which is exactly the group of operators constrained by the
frame inequality ``||A^(i) h||^2 + sum_L ||L h||^2 <= ||h||^2``.  When fewer
entries than needed are given, the last one is repeated (identical
architecture in every layer, as for scattering).

Signals are 1-D complex arrays carrying the counting measure.  All signals on a
layer are propagated as one ``(num_paths, dim)`` batch; paths are ordered
lexicographically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .filter_frames import FilterBank
from .lca_group import GroupSpec, Signal, spectral_multiply

DEFAULT_BUDGET = 10 ** 6
ASSUMPTION_TOL = 1e-9


class BudgetExceeded(RuntimeError):
    def __init__(self, depth: int, count: int, budget: int):
        super().__init__(f"path budget exceeded at depth {depth}: "
                         f"{count} path-signal evaluations > budget {budget}")
        self.depth = depth
        self.count = count
        self.budget = budget


class ConvolutionOperator:
    """Convolution on a finite abelian group, held as its Fourier multiplier."""

    def __init__(self, group: GroupSpec, multiplier):
        self.group = group
        self.multiplier = np.asarray(multiplier, dtype=complex).reshape(group.order)

    @property
    def shape(self):
        return (self.group.order, self.group.order)

    def __call__(self, x):
        return spectral_multiply(x, self.group, self.multiplier)

    def adjoint(self) -> "ConvolutionOperator":
        return ConvolutionOperator(self.group, np.conj(self.multiplier))

    def to_matrix(self) -> np.ndarray:
        return self(np.eye(self.group.order, dtype=complex)).T


class MatrixOperator:
    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2:
            raise ValueError(f"operator matrix must be 2-D, got shape {m.shape}")
        self.matrix = m

    @property
    def shape(self):
        return self.matrix.shape

    def __call__(self, x):
        x = np.asarray(x)
        if x.shape[-1] != self.matrix.shape[1]:
            raise ValueError(f"dimension mismatch: operator expects {self.matrix.shape[1]}, "
                             f"signal has {x.shape[-1]}")
        return x @ self.matrix.T

    def adjoint(self) -> "MatrixOperator":
        return MatrixOperator(self.matrix.conj().T)

    def to_matrix(self) -> np.ndarray:
        return self.matrix


def as_operator(op):
    if isinstance(op, (ConvolutionOperator, MatrixOperator)):
        return op
    return MatrixOperator(op)


def modulus(x):
    return np.abs(x).astype(complex)


def real_relu(x):
    # acts on real and imaginary parts separately
    return np.maximum(x.real, 0) + 1j * np.maximum(x.imag, 0)


def identity(x):
    return np.asarray(x, dtype=complex)


NONLINEARITIES: dict[str, Callable] = {
    "modulus": modulus,
    "real-relu": real_relu,
    "identity": identity,
}


@dataclass
class LayerSpec:
    output: object
    filters: list = field(default_factory=list)
    sigma: str = "modulus"

    def __post_init__(self):
        if self.sigma not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.sigma!r}; choose from {sorted(NONLINEARITIES)}")
        self.output = as_operator(self.output)
        self.filters = [as_operator(L) for L in self.filters]

    @property
    def nonlinearity(self) -> Callable:
        return NONLINEARITIES[self.sigma]


def scattering_layer(bank: FilterBank) -> LayerSpec:
    """Scattering architecture of a filter bank: ``A = C_chi``, ``L = {C_psi}``, modulus."""
    g = bank.group
    return LayerSpec(ConvolutionOperator(g, bank.chi_hat),
                     [ConvolutionOperator(g, p) for p in bank.psi_hats], "modulus")


def layer_at(layers: Sequence[LayerSpec], i: int) -> LayerSpec:
    if not layers:
        raise ValueError("at least one layer is required")
    return layers[min(i, len(layers) - 1)]


@dataclass
class AssumptionCheck:
    max_singular_value: float
    passed: bool


def check_assumption1(layer: LayerSpec, tol: float = ASSUMPTION_TOL) -> AssumptionCheck:
    """Operator norm of the stacked map ``[A; L_1; ...; L_m]``; passes iff ``<= 1 + tol``."""
    ops = [layer.output, *layer.filters]
    if all(isinstance(op, ConvolutionOperator) for op in ops):
        for op in ops[1:]:
            ops[0].group._check(op.group)
        # square singular value of stacked multipliers = pointwise LP sum
        lp = sum(np.abs(op.multiplier) ** 2 for op in ops)
        smax = math.sqrt(float(np.max(lp)))
    else:
        mats = [op.to_matrix() for op in ops]
        cols = {m.shape[1] for m in mats}
        if len(cols) != 1:
            raise ValueError(f"dimension mismatch in stacked operator: input dims {sorted(cols)}")
        smax = float(np.linalg.norm(np.vstack(mats), 2))
    return AssumptionCheck(smax, smax <= 1 + tol)


def complete_to_parseval(A, sigma: str = "modulus", tol: float = 1e-12) -> LayerSpec:
    """Add ``L = (I - A*A)^(1/2)`` so that ``||Ah||^2 + ||Lh||^2 = ||h||^2``."""
    A = as_operator(A)
    M = A.to_matrix()
    norm = float(np.linalg.norm(M, 2))
    if norm > 1 + tol:
        raise ValueError(f"operator norm {norm!r} exceeds 1; cannot complete to a Parseval layer")
    d = M.shape[1]
    G = np.eye(d) - M.conj().T @ M
    G = (G + G.conj().T) / 2
    w, V = np.linalg.eigh(G)
    L = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    return LayerSpec(A, [MatrixOperator(L)], sigma)


def mean_projector(d: int) -> np.ndarray:
    return np.full((d, d), 1.0 / d)


@dataclass
class EnergyLedger:
    """Per-layer energies of one propagation run.

    ``propagated[N]`` is ``W_N``, ``output[N]`` the output energy of layer N,
    ``contraction[N]`` the realized minimum of ``||A U[p]f||^2 / ||U[p]f||^2``
    over nonzero ``U[p]f`` (``None`` if every path vanished).  The contraction
    is an empirical value over the realized paths only.
    """

    input_energy: float
    propagated: list[float]
    output: list[float]
    contraction: list[float | None]
    num_paths: list[int]

    @property
    def depth(self) -> int:
        return len(self.propagated) - 1

    def cumulative_output(self, N: int) -> float:
        """Output energy of layers ``0..N-1``."""
        return math.fsum(self.output[:N])


@dataclass
class ScatteringOutput:
    paths: list[tuple[int, ...]]
    u_energy: dict[tuple[int, ...], float]
    s_energy: dict[tuple[int, ...], float]
    ledger: EnergyLedger
    s_signals: dict[tuple[int, ...], np.ndarray] | None = None
    u_signals: dict[tuple[int, ...], np.ndarray] | None = None


def _as_array(f) -> np.ndarray:
    if isinstance(f, Signal):
        return np.asarray(f.values, dtype=complex)
    arr = np.asarray(f, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal values must be finite")
    return arr


def path_counts(layers: Sequence[LayerSpec], depth: int) -> list[int]:
    counts = [1]
    for ell in range(1, depth + 1):
        counts.append(counts[-1] * len(layer_at(layers, ell - 1).filters))
    return counts


def check_budget(layers: Sequence[LayerSpec], depth: int, budget: int = DEFAULT_BUDGET) -> int:
    """Total path-signal evaluations up to ``depth``; raises before any work if over budget."""
    total = 0
    for ell, c in enumerate(path_counts(layers, depth)):
        total += c
        if total > budget:
            raise BudgetExceeded(ell, total, budget)
    return total


def _energies(x: np.ndarray) -> np.ndarray:
    return np.sum(x.real ** 2 + x.imag ** 2, axis=1)


def propagate(layers: Sequence[LayerSpec], f, depth: int, budget: int = DEFAULT_BUDGET,
              keep_signals: bool = False) -> ScatteringOutput:
    """Compute ``U[p]f`` and ``S[p]f`` for every path of length ``<= depth``."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    check_budget(layers, depth, budget)
    x = _as_array(f)[None, :]
    paths: list[tuple[int, ...]] = [()]
    all_paths, u_energy, s_energy = [], {}, {}
    s_signals = {} if keep_signals else None
    u_signals = {} if keep_signals else None
    W, O, iota, counts = [], [], [], []

    for ell in range(depth + 1):
        layer = layer_at(layers, ell)
        s = layer.output(x) if len(paths) else x
        ue, se = _energies(x), _energies(s)
        W.append(math.fsum(ue))
        O.append(math.fsum(se))
        counts.append(len(paths))
        nz = ue > 0
        iota.append(float(np.min(se[nz] / ue[nz])) if np.any(nz) else None)
        for i, p in enumerate(paths):
            u_energy[p] = float(ue[i])
            s_energy[p] = float(se[i])
            if keep_signals:
                s_signals[p] = s[i].copy()
                u_signals[p] = x[i].copy()
        all_paths.extend(paths)
        if ell == depth:
            break
        sigma = layer.nonlinearity
        m = len(layer.filters)
        if m == 0 or not paths:
            x = np.zeros((0, x.shape[1]), dtype=complex)
            paths = []
            continue
        nxt = np.stack([sigma(L(x)) for L in layer.filters], axis=1)
        x = nxt.reshape(len(paths) * m, -1)
        paths = [p + (j,) for p in paths for j in range(m)]

    ledger = EnergyLedger(math.fsum(_energies(_as_array(f)[None, :])), W, O, iota, counts)
    return ScatteringOutput(all_paths, u_energy, s_energy, ledger, s_signals, u_signals)


@dataclass
class ProbeResult:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300


def nonexpansiveness_probe(layers: Sequence[LayerSpec], f, g, depth: int,
                           budget: int = DEFAULT_BUDGET) -> ProbeResult:
    """``lhs = sum_p ||S[p]f - S[p]g||^2`` over paths of length ``<= depth``, ``rhs = ||f - g||^2``."""
    a = propagate(layers, f, depth, budget, keep_signals=True)
    b = propagate(layers, g, depth, budget, keep_signals=True)
    diffs = [float(np.sum(np.abs(a.s_signals[p] - b.s_signals[p]) ** 2)) for p in a.paths]
    rhs = float(np.sum(np.abs(_as_array(f) - _as_array(g)) ** 2))
    return ProbeResult(math.fsum(diffs), rhs)

"""Plain-text formats for signals, spectra, filter banks and matrices.

All formats are UTF-8 text.  Complex values are written as ``re im`` with
``repr`` floats, which round-trip exactly.  Element order is row-major
mixed-radix (flat index order).
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .filter_frames import FilterBank
from .lca_group import GroupSpec, Signal, SpectralSignal


class FormatError(ValueError):
    pass


def _fmt(z: complex) -> str:
    return f"{float(z.real)!r} {float(z.imag)!r}"


def _lines(path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def _header(line: str, key: str) -> str:
    name, sep, value = line.partition(":")
    if not sep or name.strip() != key:
        raise FormatError(f"expected '{key}: ...' header, got {line!r}")
    return value.strip()


def _parse_values(lines: list[str], count: int, where: str) -> np.ndarray:
    if len(lines) < count:
        raise FormatError(f"{where}: expected {count} value lines, got {len(lines)}")
    out = np.empty(count, dtype=complex)
    for i, ln in enumerate(lines[:count]):
        parts = ln.split()
        if len(parts) != 2:
            raise FormatError(f"{where}: line {i + 1} should be 're im', got {ln!r}")
        try:
            out[i] = complex(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise FormatError(f"{where}: line {i + 1}: {exc}") from exc
    return out


def atomic_write(path, text: str):
    """Write ``text`` to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_values(group: GroupSpec, values) -> str:
    return "\n".join([f"group: {group}", *(_fmt(z) for z in values)]) + "\n"


def write_signal(path, f: Signal):
    atomic_write(path, format_values(f.group, f.values))


def write_spectrum(path, F: SpectralSignal):
    atomic_write(path, format_values(F.group, F.coeffs))


def _read_values(path):
    lines = _lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    group = GroupSpec.parse(_header(lines[0], "group"))
    values = _parse_values(lines[1:], group.order, str(path))
    if len(lines) - 1 != group.order:
        raise FormatError(f"{path}: expected {group.order} value lines, got {len(lines) - 1}")
    return group, values


def read_signal(path) -> Signal:
    return Signal(*_read_values(path))


def read_spectrum(path) -> SpectralSignal:
    return SpectralSignal(*_read_values(path))


def format_bank(bank: FilterBank) -> str:
    out = [f"group: {bank.group}",
           f"support_threshold: {float(bank.support_threshold)!r}",
           f"filters: {bank.num_filters + 1}",
           "filter chi"]
    out += [_fmt(z) for z in bank.chi_hat]
    for name, row in zip(bank.names, bank.psi_hats):
        out.append(f"filter {name}")
        out += [_fmt(z) for z in row]
    return "\n".join(out) + "\n"


def write_bank(path, bank: FilterBank):
    atomic_write(path, format_bank(bank))


def read_bank(path) -> FilterBank:
    lines = _lines(path)
    if len(lines) < 3:
        raise FormatError(f"{path}: truncated bank file")
    header = {}
    i = 0
    while i < len(lines) and not lines[i].startswith("filter "):
        key, sep, value = lines[i].partition(":")
        if not sep:
            raise FormatError(f"{path}: bad header line {lines[i]!r}")
        header[key.strip()] = value.strip()
        i += 1
    for key in ("group", "filters"):
        if key not in header:
            raise FormatError(f"{path}: missing '{key}:' header")
    group = GroupSpec.parse(header["group"])
    threshold = float(header.get("support_threshold", "1e-12"))
    count = int(header["filters"])
    blocks = []
    n = group.order
    for b in range(count):
        if i >= len(lines) or not lines[i].startswith("filter "):
            raise FormatError(f"{path}: expected 'filter <name>' for block {b}")
        name = lines[i].split(None, 1)[1]
        blocks.append((name, _parse_values(lines[i + 1:i + 1 + n], n, f"{path} [{name}]")))
        i += 1 + n
    if i != len(lines):
        raise FormatError(f"{path}: {len(lines) - i} trailing lines")
    if not blocks or blocks[0][0] != "chi":
        raise FormatError(f"{path}: first filter block must be 'chi'")
    psi = np.array([v for _, v in blocks[1:]], dtype=complex).reshape(len(blocks) - 1, n)
    return FilterBank(group, blocks[0][1], psi, threshold, tuple(nm for nm, _ in blocks[1:]))


def format_matrix(M) -> str:
    M = np.asarray(M, dtype=complex)
    rows, cols = M.shape
    return "\n".join([f"matrix {rows} {cols}", *(_fmt(z) for z in M.reshape(-1))]) + "\n"


def write_matrix(path, M):
    atomic_write(path, format_matrix(M))


def read_matrix(path) -> np.ndarray:
    lines = _lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    parts = lines[0].split()
    if len(parts) != 3 or parts[0] != "matrix":
        raise FormatError(f"{path}: expected 'matrix <rows> <cols>', got {lines[0]!r}")
    rows, cols = int(parts[1]), int(parts[2])
    # accept either one pair per line or a full row of pairs per line
    tokens = " ".join(lines[1:]).split()
    if len(tokens) != 2 * rows * cols:
        raise FormatError(f"{path}: expected {rows * cols} 're im' pairs, got {len(tokens) / 2:g}")
    vals = np.array([float(t) for t in tokens]).reshape(-1, 2)
    return (vals[:, 0] + 1j * vals[:, 1]).reshape(rows, cols)

"""Command-line driver: ``scatterlab run | verify | gen-frame``.

Exit codes: 0 success, 1 usage or config error, 2 path budget exceeded,
3 certification or invariant failure.

Run configs are YAML mappings::

    group: [8]                 # cyclic orders, or the string "4 x 6"
    bank:
      kind: ideal              # ideal | singleton | random | file
      low: [0]                 # ideal/singleton: low-pass set
      bands: [[1, 2, 3, 4, 5, 6, 7]]   # ideal: omitted -> singleton bands
      # random: m, gap, seed;  file: path
    signals: {kind: random, count: 1, seed: 0}   # delta(at) | constant(value) | character(k) | file(path)
    depth: 3
    bounds: [thm3, thm4, cor1]
    budget: 1000000
    output: out

Frequencies are flat indices (``-k`` is the inverse of ``k``) or residue
lists such as ``[1, 2]``.  ``SCATTERLAB_THREADS`` sets the worker count for
covering searches and never changes results.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import invariants
from .decay_bounds import (
    THEOREMS,
    BoundReport,
    CertificationResult,
    HypothesisViolation,
    bound_report,
    certify,
    format_certificate,
)
from .extractor_core import BudgetExceeded, EnergyLedger, check_budget, propagate, scattering_layer
from .fileio import FormatError, atomic_write, format_bank, read_bank, read_signal, write_bank
from .filter_frames import (
    FilterBank,
    FrameError,
    audit,
    build_ideal_partition_bank,
    build_random_smooth_bank,
)
from .lca_group import FrequencySet, GroupSpec, Signal

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_CERT = 0, 1, 2, 3
SCHEMA = "scatterlab-run/1"
ENERGY_HEADER = "signal,layer,num_paths,W_N,output_energy,cumulative_output"
BOUNDS_HEADER = "signal,layer,theorem,base,prefactor,bound_value,measured_W,margin"


class ConfigError(ValueError):
    pass


def _g(x: float) -> str:
    return "%.17g" % x


# ---------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    group: GroupSpec
    bank: dict
    signals: dict
    depth: int
    bounds: list[str]
    budget: int
    output: Path
    base_dir: Path = field(default_factory=Path.cwd)
    raw: dict = field(default_factory=dict)

    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _parse_group(value) -> GroupSpec:
    try:
        if isinstance(value, str):
            return GroupSpec.parse(value)
        if isinstance(value, int):
            return GroupSpec((value,))
        return GroupSpec(tuple(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'group': {exc}") from exc


def _freqs(group: GroupSpec, value, where: str) -> FrequencySet:
    try:
        return FrequencySet.of(group, value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{where}': {exc}") from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(raw, base_dir=path.parent)


def parse_config(raw, base_dir=None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - {"group", "bank", "signals", "depth", "bounds", "budget", "output"}
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}")
    for key in ("group", "bank", "depth"):
        if key not in raw:
            raise ConfigError(f"missing required field '{key}'")
    group = _parse_group(raw["group"])
    bank = raw["bank"]
    if not isinstance(bank, dict) or bank.get("kind") not in ("ideal", "singleton", "random", "file"):
        raise ConfigError("field 'bank.kind' must be one of ideal, singleton, random, file")
    signals = raw.get("signals", {"kind": "random", "count": 1, "seed": 0})
    if not isinstance(signals, dict) or signals.get("kind") not in (
            "delta", "constant", "character", "random", "file"):
        raise ConfigError("field 'signals.kind' must be one of delta, constant, character, random, file")
    depth = raw["depth"]
    if not isinstance(depth, int) or depth < 1:
        raise ConfigError(f"field 'depth' must be an integer >= 1, got {depth!r}")
    bounds = raw.get("bounds", list(THEOREMS))
    if not isinstance(bounds, list) or any(b not in THEOREMS for b in bounds):
        raise ConfigError(f"field 'bounds' must be a subset of {list(THEOREMS)}, got {bounds!r}")
    budget = raw.get("budget", 10 ** 6)
    if not isinstance(budget, int) or budget < 1:
        raise ConfigError(f"field 'budget' must be a positive integer, got {budget!r}")
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    output = Path(raw.get("output", "out"))
    return ExperimentConfig(group, bank, signals, depth, list(bounds), budget,
                            output if output.is_absolute() else base_dir / output, base_dir, raw)


def build_bank(cfg: ExperimentConfig) -> FilterBank:
    spec, g = cfg.bank, cfg.group
    threshold = float(spec.get("support_threshold", 1e-12))
    kind = spec["kind"]
    if kind == "file":
        if "path" not in spec:
            raise ConfigError("field 'bank.path' is required for kind 'file'")
        bank = read_bank(cfg.base_dir / spec["path"])
        if bank.group != g:
            raise ConfigError(f"field 'bank.path': bank group {bank.group} differs from {g}")
        return bank
    if kind == "random":
        for key in ("m", "seed"):
            if not isinstance(spec.get(key), int):
                raise ConfigError(f"field 'bank.{key}' must be an integer")
        gap = _freqs(g, spec.get("gap", [0]), "bank.gap")
        return build_random_smooth_bank(g, spec["m"], gap, spec["seed"], threshold)
    low = _freqs(g, spec.get("low", [0]), "bank.low")
    if kind == "singleton" or "bands" not in spec:
        bands = [FrequencySet(g, frozenset({k})) for k in low.complement().sorted()]
    else:
        if not isinstance(spec["bands"], list):
            raise ConfigError("field 'bank.bands' must be a list of frequency lists")
        bands = [_freqs(g, b, f"bank.bands[{i}]") for i, b in enumerate(spec["bands"])]
    return build_ideal_partition_bank(g, low, bands, threshold)


def build_signals(cfg: ExperimentConfig) -> list[Signal]:
    spec, g = cfg.signals, cfg.group
    kind = spec["kind"]
    if kind == "delta":
        return [Signal.delta(g, _freqs(g, [spec.get("at", 0)], "signals.at").sorted()[0])]
    if kind == "constant":
        return [Signal.constant(g, complex(spec.get("value", 1.0)))]
    if kind == "character":
        return [Signal.character(g, _freqs(g, [spec.get("k", 0)], "signals.k").sorted()[0])]
    if kind == "file":
        if "path" not in spec:
            raise ConfigError("field 'signals.path' is required for kind 'file'")
        f = read_signal(cfg.base_dir / spec["path"])
        if f.group != g:
            raise ConfigError(f"field 'signals.path': signal group {f.group} differs from {g}")
        return [f]
    count, seed = spec.get("count", 1), spec.get("seed", 0)
    if not isinstance(count, int) or count < 1 or not isinstance(seed, int):
        raise ConfigError("fields 'signals.count' (>= 1) and 'signals.seed' must be integers")
    rng = np.random.default_rng(seed)
    return [Signal.random(g, rng) for _ in range(count)]


# ---------------------------------------------------------------- run


@dataclass
class SignalRecord:
    ledger: EnergyLedger
    report: BoundReport
    certification: CertificationResult


@dataclass
class RunRecord:
    config_hash: str
    records: list[SignalRecord]
    schema: str = SCHEMA

    @property
    def passed(self) -> bool:
        return all(r.certification.passed for r in self.records)


def energies_csv(records: list[SignalRecord]) -> str:
    rows = [ENERGY_HEADER]
    for s, rec in enumerate(records):
        led = rec.ledger
        for N in range(led.depth + 1):
            rows.append(",".join([str(s), str(N), str(led.num_paths[N]), _g(led.propagated[N]),
                                  _g(led.output[N]), _g(led.cumulative_output(N))]))
    return "\n".join(rows) + "\n"


def bounds_csv(records: list[SignalRecord]) -> str:
    rows = [BOUNDS_HEADER]
    for s, rec in enumerate(records):
        for name, entry in rec.report.entries.items():
            for N in range(1, rec.report.depth + 1):
                bound, measured = entry.curve(N), rec.ledger.propagated[N]
                rows.append(",".join([str(s), str(N), name, _g(entry.base), _g(entry.prefactor),
                                      _g(bound), _g(measured), _g(bound - measured)]))
    return "\n".join(rows) + "\n"


def run(cfg: ExperimentConfig) -> RunRecord:
    """Full pipeline; writes ``energies.csv``, ``bounds.csv`` and ``certificate.txt``."""
    bank = build_bank(cfg)
    layers = [scattering_layer(bank)]
    check_budget(layers, cfg.depth, cfg.budget)
    signals = build_signals(cfg)
    records = []
    for f in signals:
        led = propagate(layers, f, cfg.depth, cfg.budget).ledger
        rep = bound_report(bank, f, cfg.depth, cfg.bounds)
        records.append(SignalRecord(led, rep, certify(led, rep)))
    record = RunRecord(cfg.digest(), records)

    a = audit(bank)
    cert = [f"schema: {SCHEMA}", f"config_sha256: {record.config_hash}", f"group: {bank.group}",
            f"bank: {a.summary()}", ""]
    cert += [format_certificate(r.certification, r.report, f"signal {s}") for s, r in enumerate(records)]
    cert.append(f"RESULT: {'PASS' if record.passed else 'FAIL'}\n")
    cfg.output.mkdir(parents=True, exist_ok=True)
    atomic_write(cfg.output / "energies.csv", energies_csv(records))
    atomic_write(cfg.output / "bounds.csv", bounds_csv(records))
    atomic_write(cfg.output / "certificate.txt", "\n".join(cert))
    return record


# ---------------------------------------------------------------- commands


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.output = Path(args.out)
        record = run(cfg)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, FrameError, FormatError, HypothesisViolation) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for s, rec in enumerate(record.records):
        for name, N, margin in rec.certification.failures:
            print(f"certification failure: signal={s} theorem={name} layer={N} margin={margin:.6g}",
                  file=sys.stderr)
    print(f"{len(record.records)} signal(s), depth {cfg.depth}: "
          f"{'all certificates pass' if record.passed else 'CERTIFICATION FAILED'} -> {cfg.output}")
    return EXIT_OK if record.passed else EXIT_CERT


def _cmd_verify(args) -> int:
    checks = invariants.select(args.filter)
    if not checks:
        print(f"usage error: --filter {args.filter!r} selects no invariant; available: "
              f"{', '.join(c.name for c in invariants.CHECKS)}", file=sys.stderr)
        return EXIT_USAGE
    results = invariants.run_checks(checks, inject=args.inject)
    width = max(len(n) for n, _, _ in results)
    for name, ok, detail in results:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    failed = [n for n, ok, _ in results if not ok]
    if failed:
        print(f"failed: {', '.join(failed)}")
        return EXIT_CERT
    return EXIT_OK


def _tokens(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            neg = tok.startswith("-")
            res = [int(t) for t in tok.lstrip("-").split(":")]
            out.append([-r for r in res] if neg else res)
        else:
            out.append(int(tok))
    return out


def _cmd_gen_frame(args) -> int:
    try:
        g = GroupSpec.parse(args.group)
        if args.kind == "ideal":
            low = FrequencySet.of(g, _tokens(args.low))
            if args.bands:
                bands = [FrequencySet.of(g, _tokens(b)) for b in args.bands.split(";")]
            else:
                bands = [FrequencySet(g, frozenset({k})) for k in low.complement().sorted()]
            bank = build_ideal_partition_bank(g, low, bands, args.threshold)
        else:
            bank = build_random_smooth_bank(g, args.m, FrequencySet.of(g, _tokens(args.gap)),
                                            args.seed, args.threshold)
    except (FrameError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    a = audit(bank)
    summary = f"lp_deficiency={a.lp_deficiency:.3e} S={a.max_support} gap_size={len(a.gap)}"
    if args.out:
        write_bank(args.out, bank)
        print(summary)
    else:
        sys.stdout.write(format_bank(bank))
        print(summary, file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scatterlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output directory (overrides the config)")
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("verify", help="run the built-in invariant suite")
    v.add_argument("--filter", help="substring selecting invariants by name")
    v.add_argument("--inject", choices=invariants.INJECTIONS, help="corrupt a fixture on purpose")
    v.set_defaults(func=_cmd_verify)

    gf = sub.add_parser("gen-frame", help="construct and audit a filter bank")
    gf.add_argument("--group", required=True, help='e.g. "16" or "4x6"')
    gf.add_argument("--kind", required=True, choices=["ideal", "random"])
    gf.add_argument("--low", default="0", help="ideal: low-pass frequencies, e.g. 0,1,-1")
    gf.add_argument("--bands", help="ideal: ';'-separated bands, e.g. '2,-2,3;4,5'")
    gf.add_argument("--m", type=int, default=3, help="random: number of high-pass filters")
    gf.add_argument("--gap", default="0", help="random: frequencies where psi vanishes")
    gf.add_argument("--seed", type=int, default=0)
    gf.add_argument("--threshold", type=float, default=1e-12, help="support threshold")
    gf.add_argument("--out", help="bank file to write (default: stdout)")
    gf.set_defaults(func=_cmd_gen_frame)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line frontend.

Subcommands: ``validate`` (oracle self-checks), ``optimize`` (one
realization end to end), ``ber`` / ``convergence`` / ``sweep`` / ``timing``
(Monte-Carlo experiments writing CSV files plus a run manifest).

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .channel import equivalent_channel
from .config import ConfigError, SystemConfig, load_config, _parse_value
from .harness import (
    DEFAULT_SCHEMES,
    ConvergenceRecord,
    ExperimentSpec,
    run_ber,
    run_convergence,
    timing_report,
    write_ber_csv,
    write_convergence_csv,
    write_manifest,
    write_timing_csv,
    _rng,
    _sample_trial_channels,
)
from .optimizer import ao_solve, exhaustive_config_search
from .validation import run_validation

SWEEP_AXES = ("snr_db", "rsr_db", "m_o", "n_t", "modulation")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, help="master seed override")
    parser.add_argument("--workers", type=int, help="worker process count override")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="config override, repeatable",
    )
    parser.add_argument("--mode", help="optimizer mode override (fris|ris_fixed|exhaustive)")
    parser.add_argument("--filter", help="only run checks whose name contains this string")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frislab",
        description="Leakage-aware surface configuration and link simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("validate", "run the oracle self-check suite"),
        ("optimize", "optimize one channel realization end to end"),
        ("ber", "Monte-Carlo bit error rates at the configured point"),
        ("convergence", "per-iteration leakage traces over seeded trials"),
        ("sweep", "BER sweep over one configuration axis"),
        ("timing", "per-block wallclock report across a parameter"),
    ):
        p = sub.add_parser(name, help=text)
        _add_common_options(p)
        if name in ("sweep", "timing"):
            p.add_argument("--axis", choices=SWEEP_AXES, help="swept configuration key")
            p.add_argument("--values", help="comma-separated axis values")
        if name in ("ber", "sweep"):
            p.add_argument(
                "--schemes",
                default=",".join(DEFAULT_SCHEMES),
                help="comma-separated scheme list",
            )
    return parser


def _resolve_config(args) -> SystemConfig:
    cfg = load_config(args.config, tuple(args.overrides))
    updates = {}
    if args.seed is not None:
        updates["init_seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.mode is not None and args.mode != "exhaustive":
        updates["mode"] = args.mode
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_axis_values(axis: str, raw: str) -> tuple:
    return tuple(_parse_value(axis, item) for item in raw.split(","))


def cmd_validate(args) -> int:
    results = run_validation(name_filter=args.filter, seed=args.seed or 0)
    if not results:
        print(f"no checks match filter {args.filter!r}")
        return EXIT_VALIDATION
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
        failures += 0 if r.passed else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_VALIDATION


def cmd_optimize(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    channels = _sample_trial_channels(cfg, _rng(cfg.init_seed, 0, 0, 0))
    ao_cfg = cfg.ao_config()

    if args.mode == "exhaustive":
        ports, phases, w, value = exhaustive_config_search(channels, ao_cfg)
        certificate = {
            "ports": [int(p) for p in ports],
            "phases": [float(p) for p in phases],
            "beamformer_real": [float(v) for v in w.real],
            "beamformer_imag": [float(v) for v in w.imag],
            "leakage": value,
            "global_optimum": True,
        }
        path = out / "certificate.json"
        path.write_text(json.dumps(certificate, indent=2) + "\n", encoding="utf-8")
        write_manifest(out, cfg, "optimize", {"mode": "exhaustive"})
        print(f"exhaustive optimum leakage {value:.6g} -> {path}")
        return EXIT_OK

    mode = cfg.mode
    rng = _rng(cfg.init_seed, 0, 0, 1, 0 if mode == "fris" else 1)
    report = ao_solve(channels, ao_cfg, mode=mode, rng=rng)
    rows = [ConvergenceRecord(0, it, stage, value) for it, stage, value in report.trace]
    write_convergence_csv(out / "convergence.csv", rows)
    h_eq = equivalent_channel(channels, report.state(cfg.m_p))
    solution = {
        "mode": mode,
        "ports": [int(p) for p in report.ports],
        "phases": [float(p) for p in report.phases],
        "beamformer_real": [float(v) for v in report.beamformer.real],
        "beamformer_imag": [float(v) for v in report.beamformer.imag],
        "leakage": report.final_leakage,
        "initial_leakage": report.initial_leakage,
        "converged_at": report.converged_at,
        "equivalent_channel_frobenius": float(np.linalg.norm(h_eq)),
    }
    (out / "solution.json").write_text(json.dumps(solution, indent=2) + "\n", encoding="utf-8")
    write_manifest(out, cfg, "optimize")
    print(
        f"mode={mode} leakage {report.initial_leakage:.6g} -> {report.final_leakage:.6g} "
        f"in {report.trace[-1][0]} iterations (converged_at={report.converged_at})"
    )
    return EXIT_OK


def _scheme_tuple(args) -> tuple[str, ...]:
    return tuple(s.strip() for s in args.schemes.split(",") if s.strip())


def cmd_ber(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    spec = ExperimentSpec(config=cfg, schemes=_scheme_tuple(args))
    records = run_ber(spec)
    write_ber_csv(out / "ber.csv", records)
    write_manifest(out, cfg, "ber", {"schemes": list(spec.schemes)})
    for r in records:
        print(f"{r.scheme:>14}: ber={r.ber:.6g} ({r.bit_errors}/{r.total_bits} bits)")
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    spec = ExperimentSpec(config=cfg)
    records = run_convergence(spec)
    write_convergence_csv(out / "convergence.csv", records)
    write_manifest(out, cfg, "convergence")
    trials = len({r.trial for r in records})
    print(f"wrote {len(records)} trace rows over {trials} trials")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.axis or not args.values:
        raise ConfigError("sweep requires --axis and --values")
    cfg = _resolve_config(args)
    out = _out_dir(args)
    values = _parse_axis_values(args.axis, args.values)
    spec = ExperimentSpec(
        config=cfg, axis=args.axis, values=values, schemes=_scheme_tuple(args)
    )
    records = run_ber(spec)
    write_ber_csv(out / "sweep.csv", records)
    write_manifest(out, cfg, "sweep", {"axis": args.axis, "values": list(values)})
    for r in records:
        print(f"{args.axis}={r.axis_value} {r.scheme:>14}: ber={r.ber:.6g}")
    return EXIT_OK


def cmd_timing(args) -> int:
    cfg = _resolve_config(args)
    out = _out_dir(args)
    axis = args.axis or "n_t"
    if args.values:
        values = _parse_axis_values(axis, args.values)
    else:
        values = (8, 16) if axis == "n_t" else (getattr(cfg, axis),)
    spec = ExperimentSpec(config=cfg, axis=axis, values=values, schemes=("fris_ao",))
    records = timing_report(spec)
    write_timing_csv(out / "timing.csv", records)
    write_manifest(out, cfg, "timing", {"axis": axis, "values": list(values)})
    for r in records:
        print(f"{r.block:>6} {r.param}={r.value}: {r.mean_ms:.3f} +- {r.std_ms:.3f} ms")
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "optimize": cmd_optimize,
    "ber": cmd_ber,
    "convergence": cmd_convergence,
    "sweep": cmd_sweep,
    "timing": cmd_timing,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

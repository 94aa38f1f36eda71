"""Monte-Carlo orchestration: seeded trials, BER counting, CSV output.

Trial ``i`` of axis point ``a`` draws all of its randomness from generators
seeded by ``(master_seed, a, i, stream)``, so results are independent of
execution order and worker count, and schemes within a trial share the same
channel, symbols, and noise (paired comparisons).
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .channel import equivalent_channel, sample_channel_set
from .config import SystemConfig
from .detection import (
    DetectorInput,
    count_bit_errors,
    detect_exhaustive_ls,
    detect_scalar_ls,
    detect_wl_ls,
    detect_zf_known_phase,
)
from .measurement import alignment_phasors, calibrate, scaled_reference
from .optimizer import ao_solve, cd_refine_phases, cem_select_ports, make_port_objective, update_beamformer

# scheme name -> (optimizer mode, detector)
SCHEME_TABLE: dict[str, tuple[str, str]] = {
    "fris_ao": ("fris", "scalar_ls"),
    "ris_fixed": ("ris_fixed", "scalar_ls"),
    "zf_known": ("fris", "zf_known"),
    "exhaustive_ls": ("fris", "exhaustive_ls"),
    "wl_ls": ("fris", "wl_ls"),
}
DEFAULT_SCHEMES = ("fris_ao", "ris_fixed", "zf_known", "exhaustive_ls")
_MODE_IDS = {"fris": 0, "ris_fixed": 1}
_STREAM_CHANNEL, _STREAM_AO, _STREAM_SYMBOLS, _STREAM_NOISE = 0, 1, 2, 3

BER_HEADER = "scheme,axis,axis_value,trials,bit_errors,total_bits,ber,seed"
CONVERGENCE_HEADER = "trial,iter,stage,leakage"
TIMING_HEADER = "block,param,value,mean_ms,std_ms"

MAX_FAILED_TRIAL_FRACTION = 0.01


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a base config, an optional sweep axis, schemes."""

    config: SystemConfig
    axis: str | None = None
    values: tuple = ()
    schemes: tuple[str, ...] = DEFAULT_SCHEMES

    def __post_init__(self):
        for scheme in self.schemes:
            if scheme not in SCHEME_TABLE:
                raise ValueError(f"unknown scheme {scheme!r}")
        if self.axis is not None and not self.values:
            raise ValueError("a sweep axis needs at least one value")

    @property
    def master_seed(self) -> int:
        return self.config.init_seed

    def axis_points(self) -> list[tuple[str, object, SystemConfig]]:
        if self.axis is None:
            return [("", "", self.config)]
        points = []
        for value in self.values:
            points.append(
                (self.axis, value, dataclasses.replace(self.config, **{self.axis: value}))
            )
        return points


@dataclass(frozen=True)
class BerRecord:
    scheme: str
    axis: str
    axis_value: object
    trials: int
    bit_errors: int
    total_bits: int
    ber: float
    wallclock_s: float
    seed: int


@dataclass(frozen=True)
class ConvergenceRecord:
    trial: int
    iteration: int
    stage: str
    leakage: float


@dataclass(frozen=True)
class TimingRecord:
    block: str
    param: str
    value: object
    mean_ms: float
    std_ms: float


@dataclass
class TrialResult:
    axis_index: int
    trial: int
    ok: bool
    bit_errors: dict[str, int] = field(default_factory=dict)
    total_bits: dict[str, int] = field(default_factory=dict)
    error: str = ""


def _rng(master_seed: int, axis_index: int, trial: int, stream: int, extra: int = 0):
    return np.random.default_rng([master_seed, axis_index, trial, stream, extra])


def _sample_trial_channels(cfg: SystemConfig, rng: np.random.Generator):
    geometry = cfg.geometry()
    return sample_channel_set(
        geometry,
        cfg.atomic_params(),
        cfg.n_t,
        cfg.n_r,
        cfg.rician_k,
        rng,
        shape_rv=cfg.shape_rv,
    )


def _solve_modes(cfg, channels, modes, master_seed, axis_index, trial):
    ao_cfg = cfg.ao_config()
    solutions = {}
    for mode in sorted(modes):
        rng = _rng(master_seed, axis_index, trial, _STREAM_AO, _MODE_IDS[mode])
        solutions[mode] = ao_solve(channels, ao_cfg, mode=mode, rng=rng)
    return solutions


def _ber_trial(task) -> TrialResult:
    cfg, schemes, master_seed, axis_index, trial = task
    try:
        channels = _sample_trial_channels(
            cfg, _rng(master_seed, axis_index, trial, _STREAM_CHANNEL)
        )
        constellation = cfg.constellation()
        modes = {SCHEME_TABLE[s][0] for s in schemes}
        solutions = _solve_modes(cfg, channels, modes, master_seed, axis_index, trial)
        n_sym = cfg.symbols_per_trial
        sym_idx = constellation.draw_indices(
            n_sym, _rng(master_seed, axis_index, trial, _STREAM_SYMBOLS)
        )
        symbols = constellation.points[sym_idx]
        d_r = alignment_phasors(channels.reference)

        result = TrialResult(axis_index=axis_index, trial=trial, ok=True)
        for scheme in schemes:
            mode, detector = SCHEME_TABLE[scheme]
            report = solutions[mode]
            h_eq = equivalent_channel(channels, report.state(cfg.m_p))
            w = report.beamformer
            h_w = h_eq @ w
            link = calibrate(h_eq, w, channels.reference, cfg.snr_db, cfg.rsr_db)
            reference = scaled_reference(channels.reference, link)
            # re-seeding per scheme keeps the underlying noise draws identical
            # across schemes, so comparisons are paired
            noise_rng = _rng(master_seed, axis_index, trial, _STREAM_NOISE)
            noise = np.sqrt(link.sigma2 / 2.0) * (
                noise_rng.standard_normal((n_sym, h_w.size))
                + 1j * noise_rng.standard_normal((n_sym, h_w.size))
            )
            field = symbols[:, None] * h_w[None, :]
            if detector == "zf_known":
                detected = detect_zf_known_phase(field + noise, h_eq, w, constellation)
            else:
                y = np.abs(field + reference[None, :] + noise)
                if detector == "exhaustive_ls":
                    detected = detect_exhaustive_ls(y, h_eq, w, reference, constellation)
                else:
                    inp = DetectorInput(
                        y=y, reference=reference, gain=d_r * h_w, constellation=constellation
                    )
                    detected = (
                        detect_scalar_ls(inp) if detector == "scalar_ls" else detect_wl_ls(inp)
                    )
            result.bit_errors[scheme] = count_bit_errors(sym_idx, detected, constellation)
            result.total_bits[scheme] = n_sym * constellation.bits_per_symbol
        return result
    except Exception as exc:  # trial-level containment; counted and re-checked below
        return TrialResult(axis_index=axis_index, trial=trial, ok=False, error=repr(exc))


def _map_tasks(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    chunk = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def run_ber_trials(spec: ExperimentSpec) -> list[TrialResult]:
    """All per-trial error counts, ordered by (axis point, trial)."""
    cfg = spec.config
    workers = cfg.resolved_workers()
    tasks = []
    for axis_index, (_, _, point_cfg) in enumerate(spec.axis_points()):
        for trial in range(cfg.trials):
            tasks.append((point_cfg, spec.schemes, spec.master_seed, axis_index, trial))
    results = _map_tasks(_ber_trial, tasks, workers)
    failed = [r for r in results if not r.ok]
    if len(failed) > MAX_FAILED_TRIAL_FRACTION * max(len(results), 1):
        raise RuntimeError(
            f"{len(failed)}/{len(results)} trials failed; first error: {failed[0].error}"
        )
    return results


def run_ber(spec: ExperimentSpec) -> list[BerRecord]:
    """Aggregate BER per (scheme, axis value) from seeded paired trials."""
    start = time.perf_counter()
    results = run_ber_trials(spec)
    elapsed = time.perf_counter() - start
    points = spec.axis_points()
    records = []
    per_point = elapsed / max(len(points), 1)
    for axis_index, (axis, value, _) in enumerate(points):
        batch = [r for r in results if r.axis_index == axis_index and r.ok]
        for scheme in spec.schemes:
            errors = sum(r.bit_errors[scheme] for r in batch)
            bits = sum(r.total_bits[scheme] for r in batch)
            records.append(
                BerRecord(
                    scheme=scheme,
                    axis=axis,
                    axis_value=value,
                    trials=len(batch),
                    bit_errors=errors,
                    total_bits=bits,
                    ber=errors / bits if bits else 0.0,
                    wallclock_s=per_point,
                    seed=spec.master_seed,
                )
            )
    return records


def _convergence_trial(task) -> tuple[int, list[ConvergenceRecord], str]:
    cfg, master_seed, trial = task
    try:
        channels = _sample_trial_channels(cfg, _rng(master_seed, 0, trial, _STREAM_CHANNEL))
        mode = cfg.mode if cfg.mode in _MODE_IDS else "fris"
        rng = _rng(master_seed, 0, trial, _STREAM_AO, _MODE_IDS[mode])
        report = ao_solve(channels, cfg.ao_config(), mode=mode, rng=rng)
        rows: list[ConvergenceRecord] = []
        by_iter: dict[int, list[tuple[str, float]]] = {}
        for iteration, stage, value in report.trace:
            by_iter.setdefault(iteration, []).append((stage, value))
        for iteration in sorted(by_iter):
            for stage, value in by_iter[iteration]:
                rows.append(ConvergenceRecord(trial, iteration, stage, value))
                if stage == "gamma" and iteration - 1 < len(report.cd_traces):
                    for sweep_value in report.cd_traces[iteration - 1]:
                        rows.append(ConvergenceRecord(trial, iteration, "cd", sweep_value))
        return trial, rows, ""
    except Exception as exc:
        return trial, [], repr(exc)


def run_convergence(spec: ExperimentSpec) -> list[ConvergenceRecord]:
    """Per-iteration leakage traces (outer blocks plus inner CD sweeps)."""
    cfg = spec.config
    tasks = [(cfg, spec.master_seed, trial) for trial in range(cfg.trials)]
    outcomes = _map_tasks(_convergence_trial, tasks, cfg.resolved_workers())
    failures = [err for _, _, err in outcomes if err]
    if len(failures) > MAX_FAILED_TRIAL_FRACTION * max(len(outcomes), 1):
        raise RuntimeError(f"{len(failures)} convergence trials failed: {failures[0]}")
    records: list[ConvergenceRecord] = []
    for _, rows, err in sorted(outcomes, key=lambda item: item[0]):
        if not err:
            records.extend(rows)
    return records


def timing_report(spec: ExperimentSpec, repeats: int = 5) -> list[TimingRecord]:
    """Wallclock per optimizer block across the sweep values (informative).

    No tolerance contract: the numbers document how block cost scales with
    the swept parameter.
    """
    records = []
    for axis_index, (axis, value, cfg) in enumerate(spec.axis_points()):
        channels = _sample_trial_channels(cfg, _rng(spec.master_seed, axis_index, 0, 0))
        d_r = alignment_phasors(channels.reference)
        ao_cfg = cfg.ao_config()
        rng = _rng(spec.master_seed, axis_index, 0, _STREAM_AO)
        report = ao_solve(channels, ao_cfg, mode="fris", rng=rng)
        h_eq = equivalent_channel(channels, report.state(cfg.m_p))
        w = report.beamformer
        phase_table = np.ones(channels.n_ports, dtype=complex)
        phase_table[report.ports] = np.exp(1j * report.phases)

        def time_block(fn):
            samples = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                fn()
                samples.append(1e3 * (time.perf_counter() - t0))
            return float(np.mean(samples)), float(np.std(samples))

        blocks = {
            "w": lambda: update_beamformer(h_eq, d_r, ao_cfg.kappa, ao_cfg.power),
            "gamma": lambda: cem_select_ports(
                make_port_objective(channels, phase_table, w, d_r, ao_cfg.kappa),
                channels.n_ports,
                ao_cfg.m_o,
                ao_cfg,
                _rng(spec.master_seed, axis_index, 1, _STREAM_AO),
            ),
            "theta": lambda: cd_refine_phases(
                report.ports, report.phases, w, channels, d_r, ao_cfg.kappa,
                ao_cfg.m_p, ao_cfg.t_theta,
            ),
        }
        param = axis or "n_t"
        shown = value if axis else cfg.n_t
        for block, fn in blocks.items():
            mean_ms, std_ms = time_block(fn)
            records.append(TimingRecord(block, param, shown, mean_ms, std_ms))
    return records


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_ber_csv(path, records: list[BerRecord]) -> None:
    lines = [BER_HEADER]
    for r in records:
        lines.append(
            f"{r.scheme},{r.axis},{_fmt(r.axis_value)},{r.trials},"
            f"{r.bit_errors},{r.total_bits},{_fmt(r.ber)},{r.seed}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_convergence_csv(path, records: list[ConvergenceRecord]) -> None:
    lines = [CONVERGENCE_HEADER]
    for r in records:
        lines.append(f"{r.trial},{r.iteration},{r.stage},{_fmt(r.leakage)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_timing_csv(path, records: list[TimingRecord]) -> None:
    lines = [TIMING_HEADER]
    for r in records:
        lines.append(f"{r.block},{r.param},{_fmt(r.value)},{_fmt(r.mean_ms)},{_fmt(r.std_ms)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(out_dir, config: SystemConfig, command: str, extra: dict | None = None) -> Path:
    """Resolved config, seed, and version, written beside the run's outputs."""
    manifest = {
        "artifact": "frislab",
        "version": __version__,
        "command": command,
        "seed": config.init_seed,
        "config": config.as_dict(),
    }
    if extra:
        manifest.update(extra)
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path

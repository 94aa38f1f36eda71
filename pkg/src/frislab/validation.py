"""Self-contained oracle checks behind the ``validate`` subcommand.

Each check re-derives an expected result through an independent route
(dense evaluation, grid search, exhaustive enumeration, Monte-Carlo moments)
and compares the production path against it.  All checks are seeded and run
in well under a minute.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import objective as objective_mod
from .channel import ChannelSet, Geometry, build_correlation
from .measurement import alignment_phasors
from .modulation import make_constellation
from .numerics import QuarticCoefficients, min_eigenpair, psd_sqrt, quartic_roots, unit_circle_roots
from .objective import LeakageContext, aligned_gain, leakage, leakage_of_gain
from .optimizer import (
    AOConfig,
    ao_solve,
    cem_select_ports,
    continuous_phase_minimizer,
    update_beamformer,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_channels(rng, n_ports=6, n_t=3, n_r=4) -> ChannelSet:
    def cplx(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    return ChannelSet(
        h_ur=cplx(n_ports, n_t),
        h_rv=cplx(n_r, n_ports),
        h_uv=cplx(n_r, n_t),
        reference=cplx(n_r),
    )


def check_psd_sqrt(rng) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        b = rng.standard_normal((6, 6))
        mat = b @ b.T
        root = psd_sqrt(mat)
        err = np.linalg.norm(root @ root - mat) / np.linalg.norm(mat)
        worst = max(worst, err)
    return CheckResult("numerics.psd_sqrt", worst <= 1e-8, f"worst relative error {worst:.2e}")


def check_min_eigenpair(rng) -> CheckResult:
    worst = 0.0
    for _ in range(20):
        a = rng.standard_normal((8, 8))
        mat = 0.5 * (a + a.T)
        value, vector = min_eigenpair(mat)
        residual = np.linalg.norm(mat @ vector - value * vector) / np.linalg.norm(mat)
        probes = rng.standard_normal((2000, 8))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        rayleigh = np.einsum("ij,jk,ik->i", probes, mat, probes).min()
        worst = max(worst, residual, value - rayleigh)
    return CheckResult("numerics.min_eigenpair", worst <= 1e-8, f"worst residual/gap {worst:.2e}")


def check_quartic(rng) -> CheckResult:
    worst = 0.0
    missing = 0
    for _ in range(200):
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        beta = complex(rng.standard_normal(), rng.standard_normal())
        coeffs = QuarticCoefficients.from_phase_coefficients(alpha, beta)
        roots = quartic_roots(coeffs)
        if roots.size:
            worst = max(worst, float(np.max(coeffs.residual(roots))) / coeffs.scale)
        if unit_circle_roots(roots).size == 0:
            missing += 1
    ok = worst <= 1e-8 and missing == 0
    return CheckResult(
        "quartic.residual", ok, f"worst residual {worst:.2e}, {missing} without unit root"
    )


def check_phase_minimizer_grid(rng) -> CheckResult:
    grid = np.linspace(0.0, 2.0 * np.pi, 100_000, endpoint=False)
    phasors = np.exp(1j * grid)
    worst = 0.0
    for _ in range(50):
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        beta = complex(rng.standard_normal(), rng.standard_normal())
        best = continuous_phase_minimizer(alpha, beta)
        closed = np.real(alpha * best + beta * best * best)
        gridded = float(np.min(np.real(alpha * phasors + beta * phasors**2)))
        worst = max(worst, closed - gridded)
    return CheckResult("quartic.grid", worst <= 1e-8, f"worst objective gap {worst:.2e}")


def check_correlation(rng) -> CheckResult:
    geometry = Geometry(
        d_ur_m=16.0, d_rv_m=12.0, d_uv_m=20.0, carrier_frequency_hz=5e9, n_x=6, w_x=2.0
    )
    corr = build_correlation(geometry)
    x = 2.0 * np.pi / 3.0
    expected = math.sin(x) / x
    checks = [
        abs(np.max(np.abs(np.diag(corr.matrix) - 1.0))) < 1e-12,
        abs(corr.matrix[0, 1] - expected) < 1e-12,
        np.linalg.norm(corr.sqrt @ corr.sqrt - corr.matrix)
        <= 1e-8 * np.linalg.norm(corr.matrix),
    ]
    return CheckResult("channel.correlation", all(checks), f"neighbor correlation {corr.matrix[0, 1]:.6f}")


def check_equivalent_channel_dense(rng) -> CheckResult:
    from .channel import FrisState, equivalent_channel

    channels = _random_channels(rng)
    ports = np.array([1, 3, 4])
    phases = 2.0 * np.pi * np.array([1, 0, 3]) / 4
    state = FrisState(ports=ports, phases=phases, codebook_size=4)
    fast = equivalent_channel(channels, state)
    selector = np.zeros((channels.n_ports, ports.size))
    selector[ports, np.arange(ports.size)] = 1.0
    dense = (
        channels.h_rv @ selector @ np.diag(np.exp(1j * phases)) @ selector.T @ channels.h_ur
        + channels.h_uv
    )
    err = np.max(np.abs(fast - dense))
    return CheckResult("channel.equivalent_dense", err <= 1e-12, f"max deviation {err:.2e}")


def check_leakage_monte_carlo(rng) -> CheckResult:
    worst = 0.0
    for kappa_label in ("qam4", "bpsk"):
        constellation = make_constellation(kappa_label)
        channels = _random_channels(rng)
        w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        d_r = alignment_phasors(channels.reference)
        ctx = LeakageContext(d_r=d_r, h_eq=channels.h_uv, w=w, kappa=constellation.kappa)
        closed = leakage(ctx)
        draws = constellation.points[rng.integers(0, constellation.size, size=1_000_000)]
        gain = aligned_gain(d_r, channels.h_uv, w)
        estimate = float(np.mean(np.sum(np.imag(np.outer(draws, gain)) ** 2, axis=1)))
        worst = max(worst, abs(closed - estimate) / max(abs(closed), 1e-12))
    return CheckResult("objective.monte_carlo", worst <= 1e-2, f"worst relative error {worst:.2e}")


def fit_cd_coefficients(evaluate) -> tuple[float, complex, complex]:
    """Recover (offset, linear, quadratic) coefficients by point evaluation.

    ``evaluate(phase)`` must return the exact objective at a unit-modulus
    coordinate value ``exp(j*phase)``.  The quarter-turn points determine the
    offset, the linear coefficient, and the real part of the quadratic one;
    an eighth-turn point pins down its imaginary part.
    """
    v1 = evaluate(0.0)
    vj = evaluate(np.pi / 2.0)
    vm1 = evaluate(np.pi)
    vmj = evaluate(3.0 * np.pi / 2.0)
    v8 = evaluate(np.pi / 4.0)
    offset = (v1 + vj + vm1 + vmj) / 4.0
    alpha = complex((v1 - vm1) / 2.0, -(vj - vmj) / 2.0)
    beta_re = (v1 + vm1 - vj - vmj) / 4.0
    phase8 = np.exp(1j * np.pi / 4.0)
    beta_im = offset + np.real(alpha * phase8) - v8
    return offset, alpha, complex(beta_re, beta_im)


def check_cd_fit(rng) -> CheckResult:
    """Point-evaluation fit oracle for the coordinate cost coefficients."""
    from .channel import FrisState, equivalent_channel

    worst = 0.0
    kappa = 0.8 + 0.3j
    for _ in range(10):
        channels = _random_channels(rng)
        ports = np.array([0, 2, 5])
        phases = np.zeros(3)
        w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        d_r = alignment_phasors(channels.reference)
        coord = int(rng.integers(0, 3))
        alpha, beta = objective_mod.cd_coefficients(
            coord, ports, phases, w, kappa, d_r, channels
        )

        def evaluate(phase, coord=coord, channels=channels, w=w, d_r=d_r):
            state_phases = phases.copy()
            state_phases[coord] = phase
            state = FrisState(ports=ports, phases=state_phases, codebook_size=8)
            h_eq = equivalent_channel(channels, state)
            return leakage_of_gain(aligned_gain(d_r, h_eq, w), kappa)

        _, fit_alpha, fit_beta = fit_cd_coefficients(evaluate)
        worst = max(
            worst,
            abs(fit_alpha - alpha) / (abs(alpha) + 1.0),
            abs(fit_beta - beta) / (abs(beta) + 1.0),
        )
    return CheckResult("objective.cd_fit", worst <= 1e-9, f"worst coefficient gap {worst:.2e}")


def check_beamformer_grid(rng) -> CheckResult:
    worst = 0.0
    psi = np.linspace(0.0, 2.0 * np.pi, 200_000, endpoint=False)
    candidates = np.exp(1j * psi)
    for _ in range(5):
        channels = _random_channels(rng, n_t=1)
        d_r = alignment_phasors(channels.reference)
        kappa = 0.6 - 0.2j
        h_eq = channels.h_uv
        w = update_beamformer(h_eq, d_r, kappa, power=2.0)
        closed = leakage_of_gain(aligned_gain(d_r, h_eq, w), kappa)
        gains = np.sqrt(2.0) * np.outer(candidates, aligned_gain(d_r, h_eq, np.ones(1)))
        sampled = float(np.min(leakage_of_gain(gains, kappa)))
        worst = max(worst, (closed - sampled) / max(abs(sampled), 1e-12))
    return CheckResult("beamformer.grid", worst <= 1e-8, f"worst relative excess {worst:.2e}")


def check_beamformer_random(rng) -> CheckResult:
    worst = 0.0
    for _ in range(5):
        channels = _random_channels(rng, n_t=2)
        d_r = alignment_phasors(channels.reference)
        kappa = 1.0
        h_eq = channels.h_uv
        w = update_beamformer(h_eq, d_r, kappa, power=1.0)
        closed = leakage_of_gain(aligned_gain(d_r, h_eq, w), kappa)
        z = rng.standard_normal((100_000, 2)) + 1j * rng.standard_normal((100_000, 2))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        gains = (d_r[None, :] * (z @ h_eq.T))
        sampled = float(np.min(leakage_of_gain(gains, kappa)))
        worst = max(worst, (closed - sampled) / max(abs(sampled), 1e-12))
    return CheckResult("beamformer.random", worst <= 1e-9, f"worst relative excess {worst:.2e}")


def check_cem_exhaustive(rng) -> CheckResult:
    n_ports, m_o = 10, 3
    hits = 0
    runs = 10
    for run in range(runs):
        channels = _random_channels(rng, n_ports=n_ports, n_t=2, n_r=3)
        d_r = alignment_phasors(channels.reference)
        w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        phase_table = np.ones(n_ports, dtype=complex)
        from .optimizer import make_port_objective

        fn = make_port_objective(channels, phase_table, w, d_r, kappa=0.5)
        best = min(
            float(fn(np.array(sub)[None, :])[0])
            for sub in itertools.combinations(range(n_ports), m_o)
        )
        cfg = AOConfig(m_o=m_o, m_p=4, kappa=0.5)
        found = cem_select_ports(fn, n_ports, m_o, cfg, np.random.default_rng(run))
        if float(fn(found[None, :])[0]) <= best + 1e-12:
            hits += 1
    return CheckResult("cem.exhaustive", hits >= 9, f"{hits}/{runs} runs found the optimum")


def check_ao_monotone(rng) -> CheckResult:
    violations = 0
    for run in range(25):
        channels = _random_channels(rng, n_ports=8, n_t=2, n_r=4)
        cfg = AOConfig(m_o=2, m_p=4, kappa=1.0, cem_k=50, cem_iters=5, t_theta=2, ao_max_iters=6)
        report = ao_solve(channels, cfg, mode="fris", rng=np.random.default_rng(1000 + run))
        values = [value for _, _, value in report.trace]
        if np.any(np.diff(values) > 1e-12):
            violations += 1
        for sweeps in report.cd_traces:
            if np.any(np.diff(sweeps) > 1e-12):
                violations += 1
    return CheckResult("ao.monotone", violations == 0, f"{violations} trace violations")


def check_detection_slicer(rng) -> CheckResult:
    from .detection import DetectorInput, detect_scalar_ls

    constellation = make_constellation("qam4")
    mismatches = 0
    for _ in range(200):
        gain = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        residual = rng.standard_normal(4)
        inp = DetectorInput(
            y=residual, reference=np.zeros(4), gain=gain, constellation=constellation
        )
        idx = detect_scalar_ls(inp)
        g_real = gain.real
        s_tilde = residual @ g_real / (g_real @ g_real)
        brute = int(np.argmin(np.abs(s_tilde - constellation.points) ** 2))
        if idx != brute:
            mismatches += 1
    return CheckResult("detection.slicer", mismatches == 0, f"{mismatches}/200 mismatches")


ALL_CHECKS = (
    ("numerics.psd_sqrt", check_psd_sqrt),
    ("numerics.min_eigenpair", check_min_eigenpair),
    ("quartic.residual", check_quartic),
    ("quartic.grid", check_phase_minimizer_grid),
    ("channel.correlation", check_correlation),
    ("channel.equivalent_dense", check_equivalent_channel_dense),
    ("objective.monte_carlo", check_leakage_monte_carlo),
    ("objective.cd_fit", check_cd_fit),
    ("beamformer.grid", check_beamformer_grid),
    ("beamformer.random", check_beamformer_random),
    ("cem.exhaustive", check_cem_exhaustive),
    ("ao.monotone", check_ao_monotone),
    ("detection.slicer", check_detection_slicer),
)


def run_validation(name_filter: str | None = None, seed: int = 0) -> list[CheckResult]:
    results = []
    for index, (name, check) in enumerate(ALL_CHECKS):
        if name_filter and name_filter not in name:
            continue
        results.append(check(np.random.default_rng([seed, index])))
    return results

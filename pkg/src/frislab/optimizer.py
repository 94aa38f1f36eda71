"""Three-block alternating optimization of beamformer, port set, and phases.

One outer iteration updates, in order:

1. the transmit beamformer, in closed form through a real-embedded
   eigenproblem,
2. the active port subset, by cross-entropy search over size-``m_o``
   subsets,
3. the discrete phases, by coordinate descent whose stationary points solve
   a quartic on the unit circle.

Each block's proposal is accepted only if it does not increase the leakage,
so the reported trace is non-increasing by construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, FrisState, center_port_set, codebook, equivalent_channel
from .measurement import alignment_phasors
from .numerics import (
    AllZeroCoefficientsError,
    QuarticCoefficients,
    min_eigenpair,
    quartic_roots,
    unit_circle_roots,
)
from .objective import CoordinateWorkspace, aligned_gain, leakage_of_gain

PMF_FLOOR = 1e-9
CODEBOOK_ENUM_LIMIT = 64


class TooLargeError(ValueError):
    """The requested exhaustive enumeration exceeds the configured bound."""


@dataclass(frozen=True)
class AOConfig:
    """Hyperparameters of the alternating optimizer."""

    power: float = 1.0
    m_o: int = 9
    m_p: int = 8
    kappa: complex = 0j
    cem_k: int = 200
    cem_iters: int = 20
    cem_rho: float = 0.1
    cem_alpha: float = 0.7
    t_theta: int = 3
    ao_eps: float = 1e-8
    ao_max_iters: int = 50
    stop_rule: str = "abs"
    gamma_shortlist: int = 12
    gamma_restarts: int = 8

    def __post_init__(self):
        if self.power <= 0 or self.m_o < 1 or self.m_p < 1:
            raise ValueError("power, m_o and m_p must be positive")
        if not 0.0 < self.cem_rho < 1.0:
            raise ValueError("elite ratio must lie in (0, 1)")
        if not 0.0 < self.cem_alpha <= 1.0:
            raise ValueError("smoothing factor must lie in (0, 1]")
        if self.cem_rho * self.cem_k < 1.0:
            raise ValueError("elite ratio times sample count must be at least 1")
        if self.stop_rule not in ("abs", "rel"):
            raise ValueError("stop_rule must be 'abs' or 'rel'")


@dataclass
class AOReport:
    """Outcome of one alternating-optimization run."""

    trace: list[tuple[int, str, float]]
    ports: np.ndarray
    phases: np.ndarray
    beamformer: np.ndarray
    converged_at: int | None
    cd_traces: list[list[float]] = field(default_factory=list)

    @property
    def final_leakage(self) -> float:
        return self.trace[-1][2]

    @property
    def initial_leakage(self) -> float:
        return self.trace[0][2]

    def state(self, m_p: int) -> FrisState:
        return FrisState(ports=self.ports, phases=self.phases, codebook_size=m_p)


def initial_beamformer(n_t: int, power: float) -> np.ndarray:
    return np.full(n_t, np.sqrt(power / n_t), dtype=complex)


def real_embedding(h_eq: np.ndarray, d_r: np.ndarray, kappa: complex) -> np.ndarray:
    """Real symmetric matrix whose quadratic form equals the leakage scale.

    With ``R = H^H H`` and ``B = H^T diag(d_r^2) H``, splitting
    ``R = R_r + j R_i`` and ``kappa B = C_r + j C_i`` gives the 2x2 block
    matrix acting on stacked real/imaginary beamformer parts.
    """
    h = np.asarray(h_eq, dtype=complex)
    d2 = np.asarray(d_r, dtype=complex) ** 2
    r_mat = h.conj().T @ h
    c_mat = kappa * (h.T @ (d2[:, None] * h))
    r_r, r_i = r_mat.real, r_mat.imag
    c_r, c_i = c_mat.real, c_mat.imag
    g = np.block([[r_r - c_r, -r_i + c_i], [r_i + c_i, r_r + c_r]])
    return 0.5 * (g + g.T)


def update_beamformer(
    h_eq: np.ndarray, d_r: np.ndarray, kappa: complex, power: float
) -> np.ndarray:
    """Closed-form leakage-minimizing beamformer at the given power budget.

    The minimizer is ``sqrt(power)`` times the smallest eigenvector of the
    real embedding, recombined into a complex vector.
    """
    if not np.any(h_eq):
        raise ValueError("equivalent channel is identically zero")
    g = real_embedding(h_eq, d_r, kappa)
    _, v = min_eigenpair(g)
    n_t = np.asarray(h_eq).shape[1]
    return np.sqrt(power) * (v[:n_t] + 1j * v[n_t:])


def _normalized_pmf(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, PMF_FLOOR, None)
    return p / p.sum()


def elite_pmf(
    subsets: np.ndarray, values: np.ndarray, k_elite: int, n_ports: int
) -> np.ndarray:
    """Elite-membership frequencies, renormalized onto the simplex.

    The raw frequency of port ``n`` among the ``k_elite`` best subsets sums
    to the subset size over ports, so it is scaled back to sum to one.
    """
    order = np.argsort(values, kind="stable")
    threshold = values[order[k_elite - 1]]
    elite = subsets[values <= threshold]
    counts = np.zeros(n_ports)
    np.add.at(counts, elite.ravel(), 1.0)
    p_hat = counts / k_elite
    return p_hat / p_hat.sum()


def _sample_subsets(
    p: np.ndarray, n_draws: int, m_o: int, rng: np.random.Generator
) -> np.ndarray:
    """Size-``m_o`` subsets without replacement, one per row.

    Weighted sampling without replacement via Gumbel-perturbed log
    probabilities: the ``m_o`` largest keys per row form the sample.
    """
    n = p.shape[0]
    keys = np.log(p)[None, :] + rng.gumbel(size=(n_draws, n))
    if m_o == n:
        return np.tile(np.arange(n), (n_draws, 1))
    part = np.argpartition(keys, n - m_o, axis=1)[:, n - m_o:]
    return np.sort(part, axis=1)


def _cem_search(
    objective_fn,
    n_ports: int,
    m_o: int,
    cfg: AOConfig,
    rng: np.random.Generator,
) -> dict[tuple, float]:
    """Run the cross-entropy loop; return sampled subsets and their values.

    The returned dict maps each distinct evaluated subset (as a sorted
    tuple) to its objective value, and always includes the top-probability
    set extracted from the final PMF.
    """
    p = np.full(n_ports, 1.0 / n_ports)
    k_elite = math.ceil(cfg.cem_rho * cfg.cem_k)
    seen: dict[tuple, float] = {}
    for _ in range(cfg.cem_iters):
        subsets = _sample_subsets(p, cfg.cem_k, m_o, rng)
        values = np.asarray(objective_fn(subsets), dtype=float)
        for row, value in zip(subsets, values):
            key = tuple(int(i) for i in row)
            if key not in seen or value < seen[key]:
                seen[key] = float(value)
        p_hat = elite_pmf(subsets, values, k_elite, n_ports)
        p = _normalized_pmf((1.0 - cfg.cem_alpha) * p + cfg.cem_alpha * p_hat)
    top = np.sort(np.lexsort((np.arange(n_ports), -p))[:m_o])
    key = tuple(int(i) for i in top)
    if key not in seen:
        seen[key] = float(objective_fn(top[None, :])[0])
    return seen


def cem_select_ports(
    objective_fn,
    n_ports: int,
    m_o: int,
    cfg: AOConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Cross-entropy search for the best size-``m_o`` port subset.

    ``objective_fn`` maps an ``(n, m_o)`` integer array of sorted subsets to
    ``n`` objective values.  The sampling PMF is refit to the elite fraction
    of each batch and smoothed; the output is the better of the final
    top-probability set and the best subset ever sampled, so the search
    never returns something worse than its own best sample.
    """
    if m_o > n_ports:
        raise ValueError("cannot select more ports than exist")
    seen = _cem_search(objective_fn, n_ports, m_o, cfg, rng)
    best_key = min(seen, key=lambda key: (seen[key], key))
    return np.array(best_key, dtype=int)


def cem_shortlist(
    objective_fn,
    n_ports: int,
    m_o: int,
    cfg: AOConfig,
    rng: np.random.Generator,
    size: int,
) -> list[np.ndarray]:
    """The ``size`` best distinct subsets found by one cross-entropy run."""
    seen = _cem_search(objective_fn, n_ports, m_o, cfg, rng)
    ranked = sorted(seen, key=lambda key: (seen[key], key))
    return [np.array(key, dtype=int) for key in ranked[:size]]


def continuous_phase_minimizer(alpha: complex, beta: complex) -> complex:
    """Unit-modulus minimizer of ``Re{alpha u} + Re{beta u^2}``.

    Stationary points are unit-circle roots of the associated quartic; the
    returned phasor is the root with the smallest objective value.
    """
    if alpha == 0 and beta == 0:
        raise AllZeroCoefficientsError("phase objective is constant")
    roots = quartic_roots(QuarticCoefficients.from_phase_coefficients(alpha, beta))
    candidates = unit_circle_roots(roots)
    if candidates.size == 0:
        # round-off pushed every root off the certificate; retry with a looser
        # circle tolerance before falling back to a polished grid search
        candidates = unit_circle_roots(roots, tol=1e-3)
    if candidates.size == 0:
        grid = np.exp(2j * np.pi * np.arange(4096) / 4096)
        candidates = np.array([grid[np.argmin(_phase_objective(grid, alpha, beta))]])
        for _ in range(3):
            theta = np.angle(candidates[0])
            d1 = -np.imag(alpha * np.exp(1j * theta) + 2 * beta * np.exp(2j * theta))
            d2 = -np.real(alpha * np.exp(1j * theta) + 4 * beta * np.exp(2j * theta))
            if d2 != 0:
                candidates = np.array([np.exp(1j * (theta - d1 / d2))])
    values = _phase_objective(candidates, alpha, beta)
    return complex(candidates[np.argmin(values)])


def _phase_objective(u: np.ndarray, alpha: complex, beta: complex) -> np.ndarray:
    return np.real(alpha * u + beta * u * u)


def project_to_codebook(phasor: complex, m_p: int) -> int:
    """Index of the codebook phase nearest in angle to ``phasor``."""
    return int(np.round(m_p * np.angle(phasor) / (2.0 * np.pi))) % m_p


def cd_refine_phases(
    ports: np.ndarray,
    phases_init: np.ndarray,
    w: np.ndarray,
    channels: ChannelSet,
    d_r: np.ndarray,
    kappa: complex,
    m_p: int,
    t_theta: int,
    solve_continuous: bool = True,
) -> tuple[np.ndarray, list[float]]:
    """Coordinate-descent refinement of the selected ports' discrete phases.

    Every coordinate step evaluates the exact scalar objective on the
    projected continuous minimizer, the current value, and (for codebooks up
    to 64 entries) the whole codebook, accepting the argmin.  The accepted
    value therefore never increases the leakage, even after quantization.
    Returns the refined phases and the leakage after each full sweep.

    When the codebook is small enough to enumerate, the projected continuous
    minimizer is one of the enumerated candidates, so ``solve_continuous``
    may be turned off on hot paths without changing the result.
    """
    ports = np.asarray(ports, dtype=int)
    angles = codebook(m_p)
    steps = np.asarray(phases_init) * m_p / (2.0 * np.pi)
    idx = np.round(steps).astype(int) % m_p
    if np.max(np.abs(steps - np.round(steps))) > 1e-9:
        raise ValueError("initial phases must lie on the codebook grid")
    phasors_cb = np.exp(1j * angles)
    phasors_cb_sq = phasors_cb * phasors_cb
    workspace = CoordinateWorkspace(channels, ports, w, d_r, kappa)
    gains = workspace.port_gains
    phasors = phasors_cb[idx]
    total = workspace.total_gain(phasors)
    enumerate_codebook = m_p <= CODEBOOK_ENUM_LIMIT
    sweep_leakage: list[float] = []
    for _ in range(t_theta):
        for coord in range(ports.size):
            g = gains[:, coord]
            rest = total - phasors[coord] * g
            alpha = complex(np.vdot(rest, g) - kappa * np.dot(rest, g))
            beta = complex(-0.5 * kappa * np.dot(g, g))
            if alpha == 0 and beta == 0:
                continue
            if enumerate_codebook:
                if solve_continuous:
                    # redundant for the argmin (the projection lands on an
                    # enumerated candidate) but keeps the continuous path
                    # exercised on the canonical route
                    project_to_codebook(continuous_phase_minimizer(alpha, beta), m_p)
                scores = np.real(alpha * phasors_cb) + np.real(beta * phasors_cb_sq)
                best = int(np.argmin(scores))
            else:
                projected = project_to_codebook(
                    continuous_phase_minimizer(alpha, beta), m_p
                )
                candidates = np.unique([projected, idx[coord]])
                scores = _phase_objective(phasors_cb[candidates], alpha, beta)
                best = int(candidates[np.argmin(scores)])
            if best != idx[coord]:
                idx[coord] = best
                phasors[coord] = phasors_cb[best]
                total = rest + phasors_cb[best] * g
        # recompute from the phases to keep sweep values drift-free
        total = workspace.total_gain(phasors)
        sweep_leakage.append(leakage_of_gain(total, kappa))
    return angles[idx], sweep_leakage


def make_port_objective(
    channels: ChannelSet,
    phase_phasors: np.ndarray,
    w: np.ndarray,
    d_r: np.ndarray,
    kappa: complex,
):
    """Batched leakage evaluator over candidate port subsets.

    ``phase_phasors`` holds a phasor for every port; candidate subsets pick
    their phases out of this table.  The returned callable maps an
    ``(n, m_o)`` index array to ``n`` leakage values using only rank-one
    contractions.
    """
    tx_gain = channels.h_ur @ w
    rv_aligned = np.asarray(d_r)[:, None] * channels.h_rv
    direct = np.asarray(d_r) * (channels.h_uv @ w)

    def objective(subsets: np.ndarray) -> np.ndarray:
        subsets = np.atleast_2d(subsets)
        coef = phase_phasors[subsets] * tx_gain[subsets]
        gains = np.einsum("rnm,nm->nr", rv_aligned[:, subsets], coef)
        gains = gains + direct[None, :]
        return leakage_of_gain(gains, kappa)

    return objective


def _pairwise_phase_descent(
    workspace: CoordinateWorkspace,
    idx: np.ndarray,
    phasors_cb: np.ndarray,
    passes: int = 2,
) -> np.ndarray:
    """Exact descent over two-coordinate joint codebook moves.

    Single-coordinate descent parks at points where only simultaneous phase
    changes help; enumerating every pair's joint codebook escapes those
    traps while staying monotone.  All pair objectives reduce to a handful
    of precomputed Gram-matrix scalars, so the inner loop does no
    vector-length work.  Mutates and returns ``idx``.
    """
    m = idx.size
    m_p = phasors_cb.size
    kappa = workspace.kappa
    gains = workspace.port_gains
    gram_h = gains.conj().T @ gains  # [c, a] = g_c^H g_a
    gram_t = gains.T @ gains  # [c, a] = sum g_c g_a
    vd = gains.conj().T @ workspace.direct_gain  # g_a^H d
    dd = gains.T @ workspace.direct_gain
    grid_a = phasors_cb[:, None]
    grid_b = phasors_cb[None, :]
    # six fixed basis tables; each pair objective is one coefficient mix
    basis = np.stack(
        [
            np.broadcast_to(grid_a, (m_p, m_p)),
            np.broadcast_to(grid_b, (m_p, m_p)),
            np.broadcast_to(grid_a**2, (m_p, m_p)),
            np.broadcast_to(grid_b**2, (m_p, m_p)),
            grid_a * np.conj(grid_b),
            grid_a * grid_b,
        ]
    ).reshape(6, m_p * m_p)
    phasors = phasors_cb[idx]
    conj_phasors = np.conj(phasors)
    # c[a] = <total, g_a> (conjugated-total dot), p[a] = plain dot
    c_tot = np.conj(vd) + conj_phasors @ gram_h
    p_tot = dd + phasors @ gram_t
    coeffs = np.empty(6, dtype=complex)
    for _ in range(passes):
        improved = False
        for a in range(m):
            for b in range(a + 1, m):
                conj_dot_a = c_tot[a] - conj_phasors[a] * gram_h[a, a] - conj_phasors[b] * gram_h[b, a]
                conj_dot_b = c_tot[b] - conj_phasors[a] * gram_h[a, b] - conj_phasors[b] * gram_h[b, b]
                dot_a = p_tot[a] - phasors[a] * gram_t[a, a] - phasors[b] * gram_t[b, a]
                dot_b = p_tot[b] - phasors[a] * gram_t[a, b] - phasors[b] * gram_t[b, b]
                coeffs[0] = conj_dot_a - kappa * dot_a
                coeffs[1] = conj_dot_b - kappa * dot_b
                coeffs[2] = -0.5 * kappa * gram_t[a, a]
                coeffs[3] = -0.5 * kappa * gram_t[b, b]
                coeffs[4] = gram_h[b, a]
                coeffs[5] = -kappa * gram_t[a, b]
                table = (coeffs @ basis).real
                flat = int(np.argmin(table))
                if table[flat] < table[idx[a] * m_p + idx[b]]:
                    best_a, best_b = divmod(flat, m_p)
                    delta_a = phasors_cb[best_a] - phasors[a]
                    delta_b = phasors_cb[best_b] - phasors[b]
                    c_tot += np.conj(delta_a) * gram_h[a, :] + np.conj(delta_b) * gram_h[b, :]
                    p_tot += delta_a * gram_t[a, :] + delta_b * gram_t[b, :]
                    idx[a], idx[b] = best_a, best_b
                    phasors[a] = phasors_cb[best_a]
                    phasors[b] = phasors_cb[best_b]
                    conj_phasors[a] = np.conj(phasors[a])
                    conj_phasors[b] = np.conj(phasors[b])
                    improved = True
        if not improved:
            break
    return idx


def _refine_phases_fixed_w(
    channels: ChannelSet,
    ports: np.ndarray,
    phases_init: np.ndarray,
    w: np.ndarray,
    d_r: np.ndarray,
    cfg: AOConfig,
) -> tuple[float, np.ndarray]:
    """Coordinate descent plus pairwise escape at a fixed beamformer."""
    phases, _ = cd_refine_phases(
        ports, phases_init, w, channels, d_r, cfg.kappa, cfg.m_p, cfg.t_theta,
        solve_continuous=False,
    )
    angles = codebook(cfg.m_p)
    phasors_cb = np.exp(1j * angles)
    workspace = CoordinateWorkspace(channels, ports, w, d_r, cfg.kappa)
    idx = np.round(phases * cfg.m_p / (2 * np.pi)).astype(int) % cfg.m_p
    if ports.size > 1:
        idx = _pairwise_phase_descent(workspace, idx, phasors_cb)
    return workspace.leakage(phasors_cb[idx]), angles[idx]


def _polish_pair(
    channels: ChannelSet,
    ports: np.ndarray,
    phases_init: np.ndarray,
    w_start: np.ndarray,
    d_r: np.ndarray,
    cfg: AOConfig,
    rounds: int = 3,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Co-adapt beamformer and phases on a fixed port set.

    Each round re-solves the beamformer for the current phases first (so an
    initialization already sitting in a good joint basin is not dragged out
    of it by descent under a stale beamformer), then refines the phases.
    Returns the best (value, phases, beamformer) triple seen.
    """
    w = np.asarray(w_start, dtype=complex)
    phases = np.asarray(phases_init, dtype=float)
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for _ in range(rounds):
        state = FrisState(ports=ports, phases=phases, codebook_size=cfg.m_p)
        h_eq = equivalent_channel(channels, state)
        w_new = update_beamformer(h_eq, d_r, cfg.kappa, cfg.power)
        resolved = leakage_of_gain(aligned_gain(d_r, h_eq, w_new), cfg.kappa)
        current = leakage_of_gain(aligned_gain(d_r, h_eq, w), cfg.kappa)
        if resolved <= current:
            w = w_new
        if best is None or min(resolved, current) < best[0]:
            best = (min(resolved, current), phases.copy(), w)
        value_fixed_w, phases = _refine_phases_fixed_w(
            channels, ports, phases, w, d_r, cfg
        )
        if value_fixed_w < best[0]:
            best = (value_fixed_w, phases.copy(), w)
        else:
            break
    return best


def _stalled(previous: float, current: float, cfg: AOConfig) -> bool:
    delta = abs(previous - current)
    if cfg.stop_rule == "rel":
        return delta < cfg.ao_eps * max(abs(previous), np.finfo(float).tiny)
    return delta < cfg.ao_eps


def ao_solve(
    channels: ChannelSet,
    cfg: AOConfig,
    mode: str = "fris",
    rng: np.random.Generator | None = None,
    fixed_ports: np.ndarray | None = None,
) -> AOReport:
    """Run the alternating optimizer on one channel realization.

    ``mode="fris"`` optimizes the port subset with cross-entropy search;
    ``mode="ris_fixed"`` freezes the ports (``fixed_ports`` if given, else
    the grid-center set) and only updates phases and beamformer.
    """
    if mode not in ("fris", "ris_fixed"):
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    n_ports, n_t = channels.h_ur.shape
    d_r = alignment_phasors(channels.reference)
    angles = codebook(cfg.m_p)
    phasors_cb = np.exp(1j * angles)

    if mode == "ris_fixed":
        if fixed_ports is not None:
            ports = np.sort(np.asarray(fixed_ports, dtype=int))
        else:
            n_x = math.isqrt(n_ports)
            if n_x * n_x != n_ports:
                raise ValueError(
                    "ris_fixed needs fixed_ports when the port count is not a square grid"
                )
            ports = center_port_set(n_x, cfg.m_o)
        if ports.size != cfg.m_o:
            raise ValueError("fixed port set size must equal m_o")
    else:
        ports = np.arange(cfg.m_o)

    phase_idx = np.zeros(n_ports, dtype=int)
    w = initial_beamformer(n_t, cfg.power)

    def current_h_eq():
        state = FrisState(
            ports=ports, phases=angles[phase_idx[ports]], codebook_size=cfg.m_p
        )
        return equivalent_channel(channels, state)

    h_eq = current_h_eq()
    incumbent = leakage_of_gain(aligned_gain(d_r, h_eq, w), cfg.kappa)
    trace: list[tuple[int, str, float]] = [(0, "init", incumbent)]
    cd_traces: list[list[float]] = []
    converged_at: int | None = None

    for t in range(1, cfg.ao_max_iters + 1):
        previous = incumbent

        w_new = update_beamformer(h_eq, d_r, cfg.kappa, cfg.power)
        value = leakage_of_gain(aligned_gain(d_r, h_eq, w_new), cfg.kappa)
        if value <= incumbent:
            w, incumbent = w_new, value
        trace.append((t, "w", incumbent))

        if mode == "fris":
            objective = make_port_objective(
                channels, phasors_cb[phase_idx], w, d_r, cfg.kappa
            )
            # Candidate sets are scored by the sampler under the current
            # (theta, w), which systematically undersells unfamiliar ports.
            # Give every distinct candidate a one-round co-adaptation score
            # (matched phases plus a beamformer re-solve), then fully polish
            # the best few before applying the acceptance guard.
            slate = cem_shortlist(
                objective, n_ports, cfg.m_o, cfg, rng, 8 * cfg.gamma_shortlist
            )
            scored = []
            for candidate in slate:
                value, cand_phases, cand_w = _polish_pair(
                    channels, candidate, angles[phase_idx[candidate]], w, d_r, cfg,
                    rounds=1,
                )
                scored.append((value, candidate, cand_phases, cand_w))
            scored.sort(key=lambda item: item[0])
            best_prop = scored[0] if scored else None
            for _, candidate, matched_phases, _ in scored[: cfg.gamma_shortlist]:
                inits = [matched_phases] + [
                    angles[rng.integers(0, cfg.m_p, cfg.m_o)]
                    for _ in range(cfg.gamma_restarts)
                ]
                for init in inits:
                    value, cand_phases, cand_w = _polish_pair(
                        channels, candidate, init, w, d_r, cfg
                    )
                    if value < best_prop[0]:
                        best_prop = (value, candidate, cand_phases, cand_w)
            if best_prop is not None and best_prop[0] <= incumbent:
                value, candidate, cand_phases, cand_w = best_prop
                ports = candidate
                phase_idx[ports] = (
                    np.round(cand_phases * cfg.m_p / (2 * np.pi)).astype(int) % cfg.m_p
                )
                w = cand_w
                incumbent = value
        trace.append((t, "gamma", incumbent))

        phases_new, sweeps = cd_refine_phases(
            ports, angles[phase_idx[ports]], w, channels, d_r, cfg.kappa,
            cfg.m_p, cfg.t_theta,
        )
        if sweeps and sweeps[-1] <= incumbent:
            phase_idx[ports] = np.round(phases_new * cfg.m_p / (2 * np.pi)).astype(int) % cfg.m_p
            incumbent = sweeps[-1]
        cd_traces.append(sweeps)
        trace.append((t, "theta", incumbent))

        h_eq = current_h_eq()
        if _stalled(previous, incumbent, cfg):
            converged_at = t
            break

    return AOReport(
        trace=trace,
        ports=ports.copy(),
        phases=angles[phase_idx[ports]],
        beamformer=w,
        converged_at=converged_at,
        cd_traces=cd_traces,
    )


def exhaustive_config_search(
    channels: ChannelSet, cfg: AOConfig, limit: int = 10**6
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Global minimum over all discrete configurations, desk scale only.

    Enumerates every size-``m_o`` port subset and phase assignment, solving
    the closed-form beamformer per configuration.  Raises ``TooLargeError``
    when the enumeration would exceed ``limit`` configurations.
    """
    n_ports = channels.n_ports
    n_configs = math.comb(n_ports, cfg.m_o) * cfg.m_p**cfg.m_o
    if n_configs > limit:
        raise TooLargeError(f"{n_configs} configurations exceed the bound {limit}")
    d_r = alignment_phasors(channels.reference)
    angles = codebook(cfg.m_p)
    best = None
    for subset in itertools.combinations(range(n_ports), cfg.m_o):
        ports = np.array(subset, dtype=int)
        sub_rv = channels.h_rv[:, ports]
        sub_ur = channels.h_ur[ports, :]
        for phase_idx in itertools.product(range(cfg.m_p), repeat=cfg.m_o):
            phases = angles[list(phase_idx)]
            h_eq = (sub_rv * np.exp(1j * phases)) @ sub_ur + channels.h_uv
            w = update_beamformer(h_eq, d_r, cfg.kappa, cfg.power)
            value = leakage_of_gain(aligned_gain(d_r, h_eq, w), cfg.kappa)
            if best is None or value < best[3]:
                best = (ports, phases, w, value)
    ports, phases, w, value = best
    return ports, phases, w, float(value)

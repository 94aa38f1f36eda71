"""Signal-averaged quadrature-leakage objective.

For a transmit vector ``w`` carrying unit-energy symbols with
pseudo-variance ``kappa``, the average energy of the imaginary part of the
reference-aligned received signal has the closed form

    L = 0.5 * (||g||^2 - Re{kappa * sum_m g_m^2}),   g = d_r * (H_eq @ w),

which this module evaluates either through that rank-one reduction (default)
or through the dense trace expression kept as a verification path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet


@dataclass(frozen=True)
class LeakageContext:
    """Everything needed to score one (channel, alignment, beamformer) triple."""

    d_r: np.ndarray
    h_eq: np.ndarray
    w: np.ndarray
    kappa: complex

    def __post_init__(self):
        d_r = np.asarray(self.d_r, dtype=complex)
        if np.max(np.abs(np.abs(d_r) - 1.0)) > 1e-9:
            raise ValueError("alignment phasors must be unit modulus")
        object.__setattr__(self, "d_r", d_r)


def aligned_gain(d_r: np.ndarray, h_eq: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Reference-aligned per-cell complex gain ``d_r * (H_eq @ w)``."""
    return np.asarray(d_r) * (np.asarray(h_eq) @ np.asarray(w))


def leakage_of_gain(gain: np.ndarray, kappa: complex) -> float:
    """Leakage value from an aligned gain vector (rank-one fast path)."""
    gain = np.asarray(gain)
    total = np.sum(np.abs(gain) ** 2, axis=-1)
    pseudo = np.sum(gain * gain, axis=-1)
    value = 0.5 * (total - np.real(kappa * pseudo))
    return float(value) if np.ndim(value) == 0 else value


def leakage(ctx: LeakageContext, dense: bool = False) -> float:
    """Average quadrature-leakage energy of the context."""
    if dense:
        return leakage_dense(ctx)
    return leakage_of_gain(aligned_gain(ctx.d_r, ctx.h_eq, ctx.w), ctx.kappa)


def leakage_dense(ctx: LeakageContext) -> float:
    """Dense trace evaluation, kept as an independent check of the fast path."""
    a = np.asarray(ctx.h_eq)
    w = np.asarray(ctx.w)
    q = np.outer(w, np.conj(w))
    p = ctx.kappa * np.outer(w, w)
    covariance = np.trace(a @ q @ a.conj().T).real
    # trace(A P A^T D^2) with diagonal D^2 = diag(d_r^2)
    d2 = np.asarray(ctx.d_r) ** 2
    pseudo = np.trace(a @ p @ a.T @ np.diag(d2))
    return 0.5 * (covariance - np.real(pseudo))


class CoordinateWorkspace:
    """Rank-one contractions for per-port phase updates on a fixed port set.

    Building the workspace costs one pass over the channel matrices; after
    that every coordinate update touches only length-``n_r`` vectors.
    """

    def __init__(
        self,
        channels: ChannelSet,
        ports: np.ndarray,
        w: np.ndarray,
        d_r: np.ndarray,
        kappa: complex,
    ):
        ports = np.asarray(ports, dtype=int)
        w = np.asarray(w, dtype=complex)
        self.kappa = complex(kappa)
        self.ports = ports
        # column l is the aligned gain contributed by port l at unit phase
        tx_gain = channels.h_ur[ports, :] @ w
        self.port_gains = np.asarray(d_r)[:, None] * channels.h_rv[:, ports] * tx_gain[None, :]
        self.direct_gain = np.asarray(d_r) * (channels.h_uv @ w)

    def total_gain(self, phasors: np.ndarray) -> np.ndarray:
        return self.direct_gain + self.port_gains @ phasors

    def leakage(self, phasors: np.ndarray) -> float:
        return leakage_of_gain(self.total_gain(phasors), self.kappa)

    def coefficients(self, coord: int, phasors: np.ndarray) -> tuple[complex, complex]:
        """Linear and quadratic cost coefficients for one coordinate.

        With all other phases frozen, the leakage is
        ``C + Re{alpha * phi} + Re{beta * phi^2}`` in the coordinate's unit-
        modulus phasor ``phi``.
        """
        g = self.port_gains[:, coord]
        y_rest = self.total_gain(phasors) - phasors[coord] * g
        alpha = complex(np.vdot(y_rest, g) - self.kappa * np.dot(y_rest, g))
        beta = complex(-0.5 * self.kappa * np.dot(g, g))
        return alpha, beta

    def offset(self, coord: int, phasors: np.ndarray) -> float:
        """The coordinate-independent term ``C`` matching :meth:`coefficients`."""
        g = self.port_gains[:, coord]
        y_rest = self.total_gain(phasors) - phasors[coord] * g
        const = 0.5 * (np.vdot(y_rest, y_rest).real + np.vdot(g, g).real)
        return float(const - 0.5 * np.real(self.kappa * np.dot(y_rest, y_rest)))


def cd_coefficients(
    coord: int,
    ports: np.ndarray,
    phases: np.ndarray,
    w: np.ndarray,
    kappa: complex,
    d_r: np.ndarray,
    channels: ChannelSet,
) -> tuple[complex, complex]:
    """Stand-alone version of :meth:`CoordinateWorkspace.coefficients`."""
    workspace = CoordinateWorkspace(channels, ports, w, d_r, kappa)
    return workspace.coefficients(coord, np.exp(1j * np.asarray(phases)))

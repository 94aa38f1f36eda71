"""Magnitude-only heterodyne front end: readout, calibration, linearization.

The receiver observes ``y = |H_eq x + r + n|`` element-wise.  With a strong
reference ``r`` the residual ``y - |r|`` is approximately the reference-
aligned real part of the signal, which is what the detector consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ZeroSignalError(ValueError):
    """The beamformed signal has zero power; calibration is undefined."""


@dataclass(frozen=True)
class MeasurementConfig:
    snr_db: float
    rsr_db: float
    lambda_c_m: float
    lambda_p_m: float

    def __post_init__(self):
        if self.lambda_c_m <= 0 or self.lambda_p_m <= 0:
            raise ValueError("laser wavelengths must be positive")


@dataclass(frozen=True)
class CalibratedLink:
    """Noise variance and LO power multiplier hitting the SNR/RSR targets."""

    sigma2: float
    p_b_scale: float


def alignment_phasors(reference: np.ndarray) -> np.ndarray:
    """Per-cell conjugate reference phases ``exp(-j angle(r))``."""
    reference = np.asarray(reference, dtype=complex)
    mags = np.abs(reference)
    if np.any(mags == 0):
        raise ZeroSignalError("reference has a zero entry; its phase is undefined")
    return np.conj(reference) / mags


def calibrate(
    h_eq: np.ndarray,
    w: np.ndarray,
    reference_raw: np.ndarray,
    snr_db: float,
    rsr_db: float,
) -> CalibratedLink:
    """Pick noise variance and LO scaling for the target SNR and RSR.

    With unit-energy symbols the received signal power is ``||H_eq w||^2``,
    so ``sigma2 = ||H_eq w||^2 / (n_r * 10^(snr/10))`` meets the SNR target
    exactly, and the LO power multiplier makes the scaled reference satisfy
    ``||r||^2 = 10^(rsr/10) * (||H_eq w||^2 + n_r * sigma2)``.
    """
    signal = np.asarray(h_eq) @ np.asarray(w)
    signal_power = float(np.vdot(signal, signal).real)
    if signal_power == 0:
        raise ZeroSignalError("beamformed signal is identically zero")
    n_r = signal.shape[0]
    sigma2 = signal_power / (n_r * 10.0 ** (snr_db / 10.0))
    ref_power = float(np.vdot(reference_raw, reference_raw).real)
    if ref_power == 0:
        raise ZeroSignalError("raw reference is identically zero")
    target = 10.0 ** (rsr_db / 10.0) * (signal_power + n_r * sigma2)
    return CalibratedLink(sigma2=sigma2, p_b_scale=target / ref_power)


def scaled_reference(reference_raw: np.ndarray, link: CalibratedLink) -> np.ndarray:
    """Reference after applying the calibrated LO power multiplier."""
    return np.sqrt(link.p_b_scale) * np.asarray(reference_raw, dtype=complex)


def readout(
    h_eq: np.ndarray,
    x: np.ndarray,
    reference: np.ndarray,
    sigma2: float,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Element-wise magnitude of signal plus reference plus shot noise.

    ``x`` may be a single transmit vector or a batch with shape
    ``(n_symbols, n_t)``; the result matches (``(n_r,)`` or
    ``(n_symbols, n_r)``).
    """
    x = np.asarray(x, dtype=complex)
    field = x @ np.asarray(h_eq).T + reference
    if sigma2 > 0:
        if rng is None:
            raise ValueError("sigma2 > 0 requires an RNG for the noise draw")
        noise = np.sqrt(sigma2 / 2.0) * (
            rng.standard_normal(field.shape) + 1j * rng.standard_normal(field.shape)
        )
        field = field + noise
    return np.abs(field)


def linearized_residual(y: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Strong-reference residual ``y - |r|``.

    Approximately the reference-aligned real part of the received signal,
    with additive real noise of variance ``sigma2 / 2`` per entry.
    """
    return np.asarray(y) - np.abs(reference)


def at_splitting_to_rabi(delta_f_hz, lambda_c_m: float, lambda_p_m: float):
    """Convert an observed line splitting to the driving field's Rabi rate."""
    if lambda_c_m <= 0 or lambda_p_m <= 0:
        raise ValueError("laser wavelengths must be positive")
    return 2.0 * np.pi * np.asarray(delta_f_hz) * (lambda_p_m / lambda_c_m)


def rabi_to_at_splitting(omega_rad_s, lambda_c_m: float, lambda_p_m: float):
    """Inverse of :func:`at_splitting_to_rabi`."""
    if lambda_c_m <= 0 or lambda_p_m <= 0:
        raise ValueError("laser wavelengths must be positive")
    return np.asarray(omega_rad_s) * (lambda_c_m / lambda_p_m) / (2.0 * np.pi)

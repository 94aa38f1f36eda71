"""Symbol detection from magnitude readouts after the link is optimized.

The default detector treats the aligned per-cell gain as real (which the
leakage-aware design drives it toward), reducing detection to a scalar
least-squares estimate followed by nearest-neighbor slicing.  Two benchmark
detectors are included: an exhaustive search over the constellation against
the exact magnitude model, and an idealized coherent receiver that sees the
complex field directly.  All detectors return constellation indices (ties
broken by index order) and accept a single readout or a batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modulation import SymbolModel


class ZeroGainError(ValueError):
    """The detection statistic is undefined because the gain vanishes."""


@dataclass(frozen=True)
class DetectorInput:
    """Readout batch plus the quantities fixed after optimization."""

    y: np.ndarray
    reference: np.ndarray
    gain: np.ndarray
    constellation: SymbolModel


def _slice_real(estimates: np.ndarray, points: np.ndarray) -> np.ndarray:
    d2 = np.abs(estimates[..., None] - points) ** 2
    return np.argmin(d2, axis=-1)


def detect_scalar_ls(inp: DetectorInput) -> np.ndarray | int:
    """Scalar least squares on the real part of the aligned gain.

    ``s_tilde = Re(g)^T (y - |r|) / ||Re(g)||^2``, then slice to the nearest
    constellation point.
    """
    g_real = np.real(inp.gain)
    norm = float(g_real @ g_real)
    if norm == 0.0:
        raise ZeroGainError("real part of the aligned gain is zero")
    residual = np.asarray(inp.y) - np.abs(inp.reference)
    estimates = residual @ g_real / norm
    idx = _slice_real(estimates, inp.constellation.points)
    return int(idx) if np.ndim(idx) == 0 else idx


def detect_wl_ls(inp: DetectorInput) -> np.ndarray | int:
    """Widely-linear diagnostic detector using both gain quadratures.

    Fits ``residual ~ Re(g) Re(s) - Im(g) Im(s)`` by real least squares and
    slices the recombined complex estimate.  Off by default; useful when the
    quadrature component of the gain is not negligible.
    """
    g = np.asarray(inp.gain)
    if float(np.vdot(g, g).real) == 0.0:
        raise ZeroGainError("aligned gain is zero")
    basis = np.stack([np.real(g), -np.imag(g)], axis=1)
    residual = np.atleast_2d(np.asarray(inp.y) - np.abs(inp.reference))
    coeffs, *_ = np.linalg.lstsq(basis, residual.T, rcond=None)
    estimates = coeffs[0] + 1j * coeffs[1]
    idx = _slice_real(estimates, inp.constellation.points)
    return int(idx[0]) if np.ndim(inp.y) == 1 else idx


def detect_exhaustive_ls(
    y: np.ndarray,
    h_eq: np.ndarray,
    w: np.ndarray,
    reference: np.ndarray,
    constellation: SymbolModel,
) -> np.ndarray | int:
    """Enumerate the constellation against the noise-free magnitude model.

    Picks ``argmin_s || y - |H_eq w s + r| ||^2`` by direct evaluation.
    """
    h_w = np.asarray(h_eq) @ np.asarray(w)
    models = np.abs(constellation.points[:, None] * h_w[None, :] + reference[None, :])
    y = np.asarray(y)
    diff = y[..., None, :] - models
    idx = np.argmin(np.sum(diff**2, axis=-1), axis=-1)
    return int(idx) if np.ndim(idx) == 0 else idx


def detect_zf_known_phase(
    y_complex: np.ndarray,
    h_eq: np.ndarray,
    w: np.ndarray,
    constellation: SymbolModel,
) -> np.ndarray | int:
    """Idealized coherent receiver with access to the complex field.

    Matched-filter estimate ``h^H y / ||h||^2`` with ``h = H_eq w``, sliced
    to the nearest constellation point.
    """
    h = np.asarray(h_eq) @ np.asarray(w)
    norm = float(np.vdot(h, h).real)
    if norm == 0.0:
        raise ZeroGainError("beamformed channel is zero")
    estimates = np.asarray(y_complex) @ np.conj(h) / norm
    idx = _slice_real(estimates, constellation.points)
    return int(idx) if np.ndim(idx) == 0 else idx


def count_bit_errors(
    true_idx: np.ndarray, detected_idx: np.ndarray, constellation: SymbolModel
) -> int:
    table = constellation.bit_distance_table()
    return int(np.sum(table[np.asarray(true_idx), np.asarray(detected_idx)]))

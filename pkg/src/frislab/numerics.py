"""Dense numerical kernels: PSD square roots, extremal eigenpairs, quartic roots.

Everything here is pure and operates on small dense matrices (dimensions up
to a few hundred), which is all the rest of the package ever needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-10
INDEFINITE_TOL = 1e-6
UNIT_CIRCLE_TOL = 1e-6
DEGENERATE_QUARTIC_TOL = 1e-14


class NonSymmetricError(ValueError):
    """Input matrix is not symmetric within tolerance."""


class StronglyIndefiniteError(ValueError):
    """Matrix has a negative eigenvalue too large to be round-off."""


class AllZeroCoefficientsError(ValueError):
    """Every polynomial coefficient vanishes; there is nothing to solve."""


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * scale:
        raise NonSymmetricError(
            f"asymmetry {np.max(np.abs(m - m.T)):.3e} exceeds tolerance"
        )
    return 0.5 * (m + m.T)


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root with round-off clamping.

    Eigenvalues that are slightly negative (round-off from a kernel that is
    PSD in exact arithmetic) are clamped to zero.  A most-negative eigenvalue
    below ``-1e-6 * max|eig|`` is treated as a genuine modeling bug and
    raises ``StronglyIndefiniteError``.
    """
    m = _check_symmetric(m)
    vals, vecs = np.linalg.eigh(m)
    top = max(np.max(np.abs(vals)), np.finfo(float).tiny)
    if vals[0] < -INDEFINITE_TOL * top:
        raise StronglyIndefiniteError(
            f"eigenvalue {vals[0]:.3e} is too negative relative to {top:.3e}"
        )
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return 0.5 * (root + root.T)


def min_eigenpair(m: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit-norm eigenvector of a symmetric matrix."""
    m = _check_symmetric(m)
    vals, vecs = np.linalg.eigh(m)
    v = vecs[:, 0]
    return float(vals[0]), v / np.linalg.norm(v)


@dataclass(frozen=True)
class QuarticCoefficients:
    """Coefficients of ``c4 u^4 + c3 u^3 + c1 u + c0`` (no quadratic term).

    The phase-update stationarity condition produces exactly this shape with
    ``c4 = 2*quad``, ``c3 = lin``, ``c1 = -conj(lin)``, ``c0 = -2*conj(quad)``
    where ``lin`` and ``quad`` are the linear/quadratic cost coefficients.
    """

    c4: complex
    c3: complex
    c1: complex
    c0: complex

    @classmethod
    def from_phase_coefficients(cls, lin: complex, quad: complex) -> "QuarticCoefficients":
        return cls(
            c4=2.0 * quad,
            c3=complex(lin),
            c1=-np.conj(lin),
            c0=-2.0 * np.conj(quad),
        )

    def residual(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        return np.abs(self.c4 * u**4 + self.c3 * u**3 + self.c1 * u + self.c0)

    @property
    def scale(self) -> float:
        return abs(self.c4) + abs(self.c3) + 1.0


def quartic_roots(q: QuarticCoefficients) -> np.ndarray:
    """Roots of the degree-4 polynomial held by ``q``.

    Uses the companion-matrix eigenvalues (``numpy.roots``) followed by two
    Newton polish steps.  Roots that fail the residual certificate
    ``|p(u)| <= 1e-8 * (|c4| + |c3| + 1)`` are discarded; for a degenerate
    leading coefficient the cubic ``c3 u^3 + c1 u = 0`` is solved instead,
    dropping its zero root.
    """
    if q.c4 == 0 and q.c3 == 0 and q.c1 == 0 and q.c0 == 0:
        raise AllZeroCoefficientsError("all quartic coefficients are zero")
    if abs(q.c4) <= DEGENERATE_QUARTIC_TOL * abs(q.c3):
        # c3 u^3 + c1 u = 0 with c1 = -conj(c3): nonzero roots solve
        # u^2 = conj(c3) / c3.
        if q.c3 == 0:
            raise AllZeroCoefficientsError("degenerate quartic with zero cubic term")
        u = np.sqrt(np.conj(q.c3) / q.c3)
        return np.array([u, -u], dtype=complex)

    roots = np.roots(np.array([q.c4, q.c3, 0.0, q.c1, q.c0], dtype=complex))
    for _ in range(2):
        deriv = 4.0 * q.c4 * roots**3 + 3.0 * q.c3 * roots**2 + q.c1
        val = q.c4 * roots**4 + q.c3 * roots**3 + q.c1 * roots + q.c0
        step = np.where(deriv != 0, val / np.where(deriv == 0, 1.0, deriv), 0.0)
        roots = roots - step
    ok = q.residual(roots) <= 1e-8 * q.scale
    return roots[ok]


def unit_circle_roots(roots: np.ndarray, tol: float = UNIT_CIRCLE_TOL) -> np.ndarray:
    """Roots within ``tol`` of the unit circle, renormalized onto it."""
    roots = np.asarray(roots, dtype=complex)
    mag = np.abs(roots)
    keep = np.abs(mag - 1.0) <= tol
    selected = roots[keep]
    if selected.size == 0:
        return selected
    return selected / np.abs(selected)

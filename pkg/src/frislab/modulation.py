"""Symbol constellations with Gray bit labels and pseudo-variance bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SymbolModel:
    """Finite constellation with unit average energy and a uniform prior.

    ``kappa`` is the second moment without conjugation, ``mean(points**2)``;
    it vanishes for square QAM and equals one for BPSK.
    """

    name: str
    points: np.ndarray
    bits: np.ndarray
    kappa: complex = field(init=False)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex)
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.shape[0] != points.shape[0]:
            raise ValueError("one bit label per constellation point required")
        energy = float(np.mean(np.abs(points) ** 2))
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"constellation energy {energy} is not 1")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "kappa", complex(np.mean(points * points)))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def bits_per_symbol(self) -> int:
        return self.bits.shape[1]

    def bit_distance_table(self) -> np.ndarray:
        """(size, size) table of Hamming distances between point labels."""
        return np.sum(self.bits[:, None, :] != self.bits[None, :, :], axis=2)

    def draw_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.size, size=n)


def _square_qam(order: int, name: str) -> SymbolModel:
    # Per-axis Gray labeling: ascending levels -3,-1,+1,+3,... carry the Gray
    # code of their rank, so neighboring levels differ in exactly one bit.
    bits_per_axis = int(np.log2(order)) // 2
    n_axis = 1 << bits_per_axis
    levels = 2 * np.arange(n_axis) - (n_axis - 1)
    labels = [k ^ (k >> 1) for k in range(n_axis)]
    points = np.zeros(order, dtype=complex)
    bits = np.zeros((order, 2 * bits_per_axis), dtype=np.uint8)
    for i_rank in range(n_axis):
        for q_rank in range(n_axis):
            idx = i_rank * n_axis + q_rank
            points[idx] = levels[i_rank] + 1j * levels[q_rank]
            word = (labels[i_rank] << bits_per_axis) | labels[q_rank]
            for b in range(2 * bits_per_axis):
                bits[idx, b] = (word >> (2 * bits_per_axis - 1 - b)) & 1
    points /= np.sqrt(np.mean(np.abs(points) ** 2))
    return SymbolModel(name=name, points=points, bits=bits)


def make_constellation(name: str) -> SymbolModel:
    """Build one of the supported constellations: ``bpsk``, ``qam4``, ``qam16``."""
    key = name.lower()
    if key == "bpsk":
        return SymbolModel(
            name="bpsk",
            points=np.array([1.0 + 0j, -1.0 + 0j]),
            bits=np.array([[0], [1]], dtype=np.uint8),
        )
    if key in ("qam4", "4qam", "qpsk"):
        return _square_qam(4, "qam4")
    if key in ("qam16", "16qam"):
        return _square_qam(16, "qam16")
    raise ValueError(f"unknown modulation {name!r}")

"""Channel synthesis for the surface-assisted atomic link.

One realization consists of three matrices plus the local-oscillator
reference vector:

* ``h_ur`` — transmitter to surface, correlation-shaped Rician fading,
* ``h_rv`` — surface to vapor cells, dipole path-sum entries shaped by the
  same port correlation,
* ``h_uv`` — direct transmitter to vapor cells, dipole path-sum entries,
* ``reference`` — local-oscillator field at each vapor cell.

Ports live on an ``n_x x n_x`` grid inside a normalized aperture; their
correlation follows the sinc kernel ``sin(x)/x`` of the inter-port distance,
and shaping multiplies the uncorrelated links by the PSD square root of that
kernel.  Port indices are row-major and 0-based everywhere in code and in
CSV output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import psd_sqrt

SPEED_OF_LIGHT = 299792458.0
HBAR = 1.054571817e-34
ELEMENTARY_CHARGE = 1.602e-19
BOHR_RADIUS = 5.292e-11

# Transition dipole moment for the default receiver states, oriented along y.
DIPOLE_COEFFICIENT = 1785.916


def default_dipole_moment() -> np.ndarray:
    return np.array([0.0, DIPOLE_COEFFICIENT * ELEMENTARY_CHARGE * BOHR_RADIUS, 0.0])


@dataclass(frozen=True)
class Geometry:
    """Link distances, carrier, and surface grid layout."""

    d_ur_m: float
    d_rv_m: float
    d_uv_m: float
    carrier_frequency_hz: float
    n_x: int
    w_x: float

    def __post_init__(self):
        if min(self.d_ur_m, self.d_rv_m, self.d_uv_m) <= 0:
            raise ValueError("link distances must be positive")
        if self.carrier_frequency_hz <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.n_x < 1:
            raise ValueError("n_x must be at least 1")
        if self.w_x <= 0:
            raise ValueError("normalized aperture must be positive")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def spacing_m(self) -> float:
        return self.w_x * self.wavelength_m / self.n_x

    @property
    def n_ports(self) -> int:
        return self.n_x * self.n_x


def port_positions(geometry: Geometry) -> np.ndarray:
    """(n_ports, 2) grid coordinates in meters, row-major ordering."""
    idx = np.arange(geometry.n_ports)
    rows, cols = divmod(idx, geometry.n_x)
    return geometry.spacing_m * np.stack([rows, cols], axis=1).astype(float)


def center_port_set(n_x: int, m_o: int) -> np.ndarray:
    """The ``m_o`` grid ports closest to the surface center, ties by index.

    This is the deterministic port set used by the fixed-element baseline.
    """
    if m_o > n_x * n_x:
        raise ValueError("cannot select more ports than the grid holds")
    idx = np.arange(n_x * n_x)
    rows, cols = divmod(idx, n_x)
    center = (n_x - 1) / 2.0
    dist2 = (rows - center) ** 2 + (cols - center) ** 2
    order = np.lexsort((idx, dist2))
    return np.sort(order[:m_o])


@dataclass(frozen=True)
class PortCorrelation:
    matrix: np.ndarray
    sqrt: np.ndarray


def build_correlation(geometry: Geometry) -> PortCorrelation:
    """Port correlation ``sin(x)/x`` of ``x = 2*pi*distance/wavelength``."""
    pos = port_positions(geometry)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2)
    # np.sinc(t) = sin(pi t)/(pi t), so j0(2 pi d / lambda) = sinc(2 d / lambda).
    matrix = np.sinc(2.0 * dist / geometry.wavelength_m)
    matrix = 0.5 * (matrix + matrix.T)
    return PortCorrelation(matrix=matrix, sqrt=psd_sqrt(matrix))


def sample_rician(
    n_rows: int, n_cols: int, k_factor: float, rng: np.random.Generator
) -> np.ndarray:
    """Unit-power Rician matrix: rank-one random-phase LOS plus i.i.d. NLOS."""
    if k_factor < 0:
        raise ValueError("Rician factor must be nonnegative")
    a = np.exp(2j * np.pi * rng.random(n_rows))
    b = np.exp(2j * np.pi * rng.random(n_cols))
    los = np.outer(a, np.conj(b))
    nlos = (rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal((n_rows, n_cols))) / np.sqrt(2.0)
    return np.sqrt(k_factor / (k_factor + 1.0)) * los + np.sqrt(1.0 / (k_factor + 1.0)) * nlos


@dataclass(frozen=True)
class AtomicPathParams:
    """Dipole coupling and multipath model for the atomic links.

    The first path is line-of-sight with free-space amplitude
    ``wavelength / (4 pi distance)``; every further path is a scatter path
    ``scatter_gain_db`` below it.  Polarizations are drawn uniformly on the
    unit circle orthogonal to each path's propagation direction.
    """

    dipole_moment: np.ndarray = field(default_factory=default_dipole_moment)
    hbar: float = HBAR
    paths_per_link: int = 2
    scatter_gain_db: float = -10.0

    def __post_init__(self):
        if self.paths_per_link < 1:
            raise ValueError("at least one path per link is required")

    def path_amplitudes(self, distance_m: float, wavelength_m: float) -> np.ndarray:
        if distance_m <= 0:
            raise ValueError("path distance must be positive")
        los = wavelength_m / (4.0 * np.pi * distance_m)
        amps = np.full(self.paths_per_link, los * 10.0 ** (self.scatter_gain_db / 20.0))
        amps[0] = los
        return amps


def _random_orthogonal_polarizations(
    directions: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Unit vectors uniform on the circle orthogonal to each direction."""
    d = directions / np.linalg.norm(directions, axis=-1, keepdims=True)
    ref = np.zeros_like(d)
    use_x = np.abs(d[..., 0]) < 0.9
    ref[..., 0] = np.where(use_x, 1.0, 0.0)
    ref[..., 1] = np.where(use_x, 0.0, 1.0)
    e1 = np.cross(d, ref)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(d, e1)
    psi = 2.0 * np.pi * rng.random(d.shape[:-1])
    return np.cos(psi)[..., None] * e1 + np.sin(psi)[..., None] * e2


def path_sum_entries(
    params: AtomicPathParams,
    polarizations: np.ndarray,
    amplitudes: np.ndarray,
    phases: np.ndarray,
) -> np.ndarray:
    """Dipole path-sum ``sum_l mu.eps_l * rho_l * exp(j phi_l) / hbar``.

    ``polarizations`` has shape ``(..., L, 3)``; ``amplitudes`` and
    ``phases`` have shape ``(..., L)``.  The leading dimensions index matrix
    entries.
    """
    coupling = polarizations @ np.asarray(params.dipole_moment, dtype=float)
    terms = coupling * np.asarray(amplitudes) * np.exp(1j * np.asarray(phases))
    return terms.sum(axis=-1) / params.hbar


def sample_atomic_channel(
    n_rows: int,
    n_cols: int,
    distance_m: float,
    params: AtomicPathParams,
    wavelength_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Matrix of independent dipole path-sum entries for one link."""
    shape = (n_rows, n_cols, params.paths_per_link)
    directions = rng.standard_normal(shape + (3,))
    polarizations = _random_orthogonal_polarizations(directions, rng)
    phases = 2.0 * np.pi * rng.random(shape)
    amplitudes = np.broadcast_to(
        params.path_amplitudes(distance_m, wavelength_m), shape
    )
    return path_sum_entries(params, polarizations, amplitudes, phases)


def sample_reference(
    n_r: int, p_b: float, params: AtomicPathParams, rng: np.random.Generator
) -> np.ndarray:
    """Local-oscillator field at each vapor cell.

    The LO sits next to the cells, so all entries share a common amplitude
    (folded into ``p_b``) while polarization and phase vary per cell.
    """
    if p_b <= 0:
        raise ValueError("LO power must be positive")
    directions = rng.standard_normal((n_r, 3))
    polarizations = _random_orthogonal_polarizations(directions, rng)
    coupling = polarizations @ np.asarray(params.dipole_moment, dtype=float)
    phases = 2.0 * np.pi * rng.random(n_r)
    return coupling * np.sqrt(p_b) * np.exp(1j * phases) / params.hbar


@dataclass(frozen=True)
class FrisState:
    """Selected port subset plus their discrete phases."""

    ports: np.ndarray
    phases: np.ndarray
    codebook_size: int

    def __post_init__(self):
        ports = np.asarray(self.ports, dtype=int)
        phases = np.asarray(self.phases, dtype=float)
        if ports.ndim != 1 or phases.shape != ports.shape:
            raise ValueError("ports and phases must be matching 1-D arrays")
        if np.unique(ports).size != ports.size:
            raise ValueError("port indices must be distinct")
        steps = phases * self.codebook_size / (2.0 * np.pi)
        if np.max(np.abs(steps - np.round(steps))) > 1e-9:
            raise ValueError("phases must lie on the codebook grid")
        object.__setattr__(self, "ports", ports)
        object.__setattr__(self, "phases", phases)


def codebook(m_p: int) -> np.ndarray:
    """The ``m_p`` evenly spaced phase values ``2 pi k / m_p``."""
    return 2.0 * np.pi * np.arange(m_p) / m_p


@dataclass(frozen=True)
class ChannelSet:
    """One realization of the three links plus the LO reference."""

    h_ur: np.ndarray
    h_rv: np.ndarray
    h_uv: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        n_ports, n_t = self.h_ur.shape
        n_r = self.h_rv.shape[0]
        if self.h_rv.shape[1] != n_ports:
            raise ValueError("h_rv column count must match the port count")
        if self.h_uv.shape != (n_r, n_t):
            raise ValueError("h_uv shape must match (n_r, n_t)")
        if self.reference.shape != (n_r,):
            raise ValueError("reference must be a length n_r vector")
        for name in ("h_ur", "h_rv", "h_uv", "reference"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def n_ports(self) -> int:
        return self.h_ur.shape[0]

    @property
    def n_tx(self) -> int:
        return self.h_ur.shape[1]

    @property
    def n_rx(self) -> int:
        return self.h_rv.shape[0]

    def scaled(self, factor: float) -> "ChannelSet":
        """Rescale the received field: both receiver-side links and the LO.

        The transmitter-to-surface link is left alone so that every term of
        the equivalent channel (cascade and direct) scales by the same
        factor, as a change of field units would.
        """
        return ChannelSet(
            h_ur=self.h_ur,
            h_rv=factor * self.h_rv,
            h_uv=factor * self.h_uv,
            reference=factor * self.reference,
        )


def equivalent_channel(channels: ChannelSet, state: FrisState) -> np.ndarray:
    """Cascaded channel through the selected ports plus the direct link.

    Only the selected sub-matrices are touched; no dense selection matrix is
    ever materialized.
    """
    ports = state.ports
    if ports.size and (ports.min() < 0 or ports.max() >= channels.n_ports):
        raise IndexError("port index out of range")
    sub_rv = channels.h_rv[:, ports]
    sub_ur = channels.h_ur[ports, :]
    return (sub_rv * np.exp(1j * state.phases)) @ sub_ur + channels.h_uv


def port_coupling(channels: ChannelSet, port: int) -> tuple[np.ndarray, np.ndarray]:
    """Rank-one factors (a, b) of one port's contribution a @ b.T."""
    return channels.h_rv[:, port], channels.h_ur[port, :]


def sample_channel_set(
    geometry: Geometry,
    atomic: AtomicPathParams,
    n_t: int,
    n_r: int,
    rician_k: float,
    rng: np.random.Generator,
    correlation: PortCorrelation | None = None,
    shape_rv: bool = True,
    lo_power: float = 1.0,
) -> ChannelSet:
    """Draw one full channel realization.

    ``correlation`` may be passed in to reuse the (geometry-determined) port
    correlation across Monte-Carlo trials.  ``shape_rv=False`` skips the
    correlation shaping of the surface-to-receiver link, leaving its raw
    path-sum entries.
    """
    if correlation is None:
        correlation = build_correlation(geometry)
    n_ports = geometry.n_ports
    wavelength = geometry.wavelength_m

    h_ur = correlation.sqrt @ sample_rician(n_ports, n_t, rician_k, rng)
    h_rv_raw = sample_atomic_channel(n_r, n_ports, geometry.d_rv_m, atomic, wavelength, rng)
    h_rv = h_rv_raw @ correlation.sqrt if shape_rv else h_rv_raw
    h_uv = sample_atomic_channel(n_r, n_t, geometry.d_uv_m, atomic, wavelength, rng)
    reference = sample_reference(n_r, lo_power, atomic, rng)
    return ChannelSet(h_ur=h_ur, h_rv=h_rv, h_uv=h_uv, reference=reference)

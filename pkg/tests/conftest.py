import numpy as np
import pytest

from frislab.channel import ChannelSet


def complex_normal(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_channel_set(seed, n_ports=8, n_t=2, n_r=4) -> ChannelSet:
    """Synthetic desk-scale realization with unit-scale entries."""
    rng = np.random.default_rng([42, seed])
    return ChannelSet(
        h_ur=complex_normal(rng, n_ports, n_t),
        h_rv=complex_normal(rng, n_r, n_ports),
        h_uv=complex_normal(rng, n_r, n_t),
        reference=complex_normal(rng, n_r),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

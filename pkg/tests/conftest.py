import numpy as np
import pytest

from arisim.channels import ChannelSet


def random_channel_set(rng, m, k, n, scale=1.0, si_delta=0.0):
    """Unit-scale random channels for solver-level tests (no geometry)."""
    def c(shape, s=scale):
        return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    H = None
    if si_delta > 0.0:
        H = si_delta * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    return ChannelSet(G=c((n, m)), h=c((k, m)), f=c((k, n)), H=H)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

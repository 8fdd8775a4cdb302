import numpy as np
import pytest

from pressure_lab.holder import OscillationProfile, dense_profile_1d


def dense_slice_profile(values, length=2.0 * np.pi, kmax=None):
    """Exhaustive 1-D oscillation profile of a periodic slice at dyadic multiples of the spacing."""
    n = values.shape[0]
    h = length / n
    kmax = int(np.log2(n / 2)) if kmax is None else kmax
    scales = h * 2.0 ** np.arange(kmax + 1)
    osc = dense_profile_1d(values, h, scales)
    return OscillationProfile(scales, osc, np.full(scales.size, n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

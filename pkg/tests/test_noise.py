import numpy as np
import pytest
from scipy import stats

from slbohm import PhysicalParams
from slbohm.noise import (
    NoiseStream,
    VelocitySampler,
    draw_block,
    sample_born_offsets,
    sample_impulse,
    sample_initial_velocity,
)

N = 10**6


def test_silent_streams():
    for p in (PhysicalParams(gamma=0.0, kT=1.0), PhysicalParams(gamma=0.2, kT=0.0)):
        s = NoiseStream.for_params(p, 1, 0, 0.01)
        assert s.silent
        assert np.all(s.impulses(100) == 0)
        assert sample_impulse(s) == 0


def test_impulse_moments(brownian):
    s = NoiseStream.for_params(brownian, 2019, 0, 0.01)
    x = s.impulses(N)
    std = np.sqrt(2 * 0.2 * 0.5 * 0.01)
    assert abs(x.mean()) < 4 * std / 1e3
    assert x.var() == pytest.approx(2e-3, rel=0.01)


def test_impulse_ks(brownian):
    s = NoiseStream.for_params(brownian, 7, 3, 0.01)
    x = s.impulses(10**5)
    assert stats.kstest(x, "norm", args=(0, np.sqrt(2e-3))).pvalue > 0.01


def test_stream_determinism_and_independence(brownian):
    a = NoiseStream.for_params(brownian, 5, 0, 0.01).impulses(1000)
    b = NoiseStream.for_params(brownian, 5, 0, 0.01).impulses(1000)
    c = NoiseStream.for_params(brownian, 5, 1, 0.01).impulses(1000)
    assert np.array_equal(a, b)
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.1


def test_block_matches_single_streams(brownian):
    streams = [NoiseStream.for_params(brownian, 9, i, 0.01) for i in range(3)]
    block = draw_block(streams, 50)
    for i in range(3):
        single = NoiseStream.for_params(brownian, 9, i, 0.01).normals(50)
        assert np.array_equal(block[i], single)


def test_velocity_zero_temperature():
    s = VelocitySampler(0.0, 1.0, 3)
    assert np.all(s.sample(np.arange(100)) == 0)
    assert sample_initial_velocity(s, 4) == 0


@pytest.mark.parametrize("kTs", [1.0, 0.5])
def test_velocity_variance(kTs):
    v = VelocitySampler(kTs, 1.0, 11).sample(np.arange(N))
    assert np.mean(v**2) == pytest.approx(kTs, rel=0.01)


def test_layers_keyed_by_index():
    full = sample_born_offsets(4, np.arange(100), 1.0)
    part = sample_born_offsets(4, np.array([10, 50, 99]), 1.0)
    assert np.array_equal(full[[10, 50, 99]], part)
    v = VelocitySampler(1.0, 1.0, 4).sample(np.arange(100))
    assert not np.allclose(v, full)

import numpy as np
from scipy.stats import kstest

from src.weaksim.rng import RandomSource


def test_draws_are_pure_functions_of_seed_path_and_lane():
    a = RandomSource(42).split(7)
    b = RandomSource(42).split(7)
    assert a.uniform(0) == b.uniform(0)
    assert a.uniform(0) == a.uniform(0)
    assert a.uniform(0) != a.uniform(1)
    assert RandomSource(42).split(7).uniform(0) != RandomSource(43).split(7).uniform(0)
    assert RandomSource(42).split(7).uniform(0) != RandomSource(42).split(8).uniform(0)


def test_child_uniforms_match_split():
    master = RandomSource(2024)
    indices = np.array([0, 1, 5, 65_536, 10 ** 9])
    for lane in (0, 1, 3):
        expected = [master.split(int(i)).uniform(lane) for i in indices]
        np.testing.assert_array_equal(master.child_uniforms(indices, lane), expected)


def test_uniforms_match_single_lanes():
    source = RandomSource(5).split(3)
    np.testing.assert_array_equal(source.uniforms(4), [source.uniform(lane) for lane in range(4)])


def test_child_uniforms_are_uniform():
    draws = RandomSource(99).child_uniforms(np.arange(200_000), 0)
    assert draws.min() >= 0.0
    assert draws.max() < 1.0
    assert kstest(draws, "uniform").pvalue > 0.001


def test_lanes_are_uncorrelated():
    indices = np.arange(100_000)
    master = RandomSource(1)
    lane0 = master.child_uniforms(indices, 0)
    lane1 = master.child_uniforms(indices, 1)
    assert abs(np.corrcoef(lane0, lane1)[0, 1]) < 0.02

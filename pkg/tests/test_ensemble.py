import numpy as np
import pytest

from qtomo.ensemble import (
    DiracDelta,
    Discrete,
    Gaussian,
    Lorentzian,
    SampleSet,
    moment,
    profile,
    sample,
)


def test_dirac_gives_single_point():
    s = sample(DiracDelta(), n=21)
    assert s.deltas == (0.0,) and s.weights == (1.0,)
    assert sample(Lorentzian(0.1), n=1).deltas == (0.0,)


@pytest.mark.parametrize("dist", [Lorentzian(0.02), Gaussian(0.3)])
@pytest.mark.parametrize("n", [2, 11, 21, 40])
def test_grid_is_mirror_symmetric(dist, n):
    s = sample(dist, n)
    d, p = np.array(s.deltas), np.array(s.weights)
    assert np.array_equal(d, -d[::-1])
    assert np.array_equal(p, p[::-1])
    w = dist.width
    assert abs(moment(s, 1)) < 1e-15 * w
    assert abs(moment(s, 3)) < 1e-15 * w**3


def test_lorentzian_weight_ratio_at_half_width():
    s = sample(Lorentzian(0.01), n=21, trunc=5.0)
    # grid spacing is 0.5 * width, so index 12 sits at delta = width
    assert s.deltas[12] == pytest.approx(0.01)
    assert s.weights[12] / s.weights[10] == pytest.approx(0.5)


def test_grid_spans_truncation():
    s = sample(Gaussian(2.0), n=9, trunc=3.0)
    assert s.deltas[0] == pytest.approx(-6.0) and s.deltas[-1] == pytest.approx(6.0)


def test_moments():
    s = SampleSet((-1.0, 0.0, 2.0), (0.25, 0.25, 0.5))
    assert moment(s, 0) == pytest.approx(1.0)
    assert moment(s, 1) == pytest.approx(0.75)
    assert moment(s, 2) == pytest.approx(2.25)
    with pytest.raises(ValueError):
        moment(s, -1)


def test_second_moment_scales_with_width_squared():
    m_a = moment(sample(Lorentzian(0.01)), 2)
    m_b = moment(sample(Lorentzian(0.02)), 2)
    assert m_b / m_a == pytest.approx(4.0)


def test_discrete_is_sorted_and_normalized():
    s = sample(Discrete(((0.5, 2.0), (-0.5, 2.0))))
    assert s.deltas == (-0.5, 0.5) and s.weights == (0.5, 0.5)


def test_sample_set_validation():
    with pytest.raises(ValueError):
        SampleSet((0.0, 1.0), (0.5, 0.6))
    with pytest.raises(ValueError):
        SampleSet((1.0, 0.0), (0.5, 0.5))
    with pytest.raises(ValueError):
        SampleSet((0.0, 1.0), (1.5, -0.5))
    with pytest.raises(ValueError):
        SampleSet((), ())


def test_distribution_validation():
    for bad in (0.0, -1.0, float("inf")):
        with pytest.raises(ValueError):
            Lorentzian(bad)
    with pytest.raises(ValueError):
        sample(Gaussian(1.0), n=0)
    with pytest.raises(ValueError):
        sample(Gaussian(1.0), trunc=0.0)


def test_profile_lookup():
    assert isinstance(profile("lorentzian", 0), DiracDelta)
    assert profile("gaussian", 0.1) == Gaussian(0.1)
    with pytest.raises(ValueError):
        profile("voigt", 0.1)


def test_iteration_yields_pairs():
    s = sample(Lorentzian(1.0), n=3)
    assert [d for d, _ in s] == list(s.deltas)
    assert len(s) == 3

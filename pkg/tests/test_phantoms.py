import numpy as np
import pytest

from logic.grid import GridFunction
from logic.phantoms import (
    cartoon_sinusoid,
    correlation,
    count_jumps,
    count_plateau_levels,
    disk_indicator,
    disk_on_gradient,
    hat_signal,
    plateau_signal,
    ramp_signal,
    salt_and_pepper,
    signal_axis,
    support_length,
)


def test_signal_axis_spans_the_interval():
    x, h = signal_axis(256)
    assert x[0] == -1.0 and x[-1] == 1.0
    assert h == pytest.approx(2.0 / 255)


def test_one_dimensional_phantoms():
    plateau, ramp, hat = plateau_signal(), ramp_signal(), hat_signal()
    assert plateau.dims == ramp.dims == hat.dims == (256,)
    assert plateau.origin == -1.0
    assert set(np.unique(plateau.values)) == {0.0, 1.0}
    assert ramp.values.min() == 0.0 and ramp.values.max() == 1.0
    assert np.all(np.diff(ramp.values) >= 0)
    assert 0.99 < hat.values.max() <= 1.0
    assert plateau.integral() == pytest.approx(0.5, abs=2 * plateau.h)


def test_disk_indicator():
    disk = disk_indicator(32, radius=0.25)
    assert disk.values.sum() == pytest.approx(np.pi * 8 ** 2, rel=0.1)
    assert disk.values[16, 16] == 1.0 and disk.values[0, 0] == 0.0


def test_salt_and_pepper_is_seeded():
    clean = GridFunction(np.full((32, 32), 0.5))
    a = salt_and_pepper(clean, 0.1, seed=7)
    b = salt_and_pepper(clean, 0.1, seed=7)
    assert np.array_equal(a.values, b.values)
    hit = a.values != 0.5
    assert 0.05 < hit.mean() < 0.15
    assert set(np.unique(a.values[hit])) <= {0.0, 1.0}


def test_disk_on_gradient_is_nonnegative():
    phantom = disk_on_gradient(24)
    assert phantom.clean.values.min() >= 0.2
    assert phantom.noisy.values.min() >= 0.0
    assert phantom.noisy.dims == (24, 24)


def test_cartoon_sinusoid_parts_add_up():
    composite = cartoon_sinusoid(32)
    np.testing.assert_allclose(composite.image.values, composite.cartoon.values + composite.oscillation.values)
    assert np.all(composite.oscillation.values[:, :16] == 0)
    assert len(np.unique(composite.cartoon.values)) == 3


class TestStatistics:

    def test_plateau_levels(self):
        assert count_plateau_levels(np.array([0, 0, 0, 1, 1, 1.0])) == 2
        assert count_plateau_levels(np.full(10, 3.0)) == 1
        # a two-sample cluster is too small to count
        assert count_plateau_levels(np.array([0, 0, 0, 0.5, 0.5, 1, 1, 1.0])) == 2

    def test_jumps(self):
        assert count_jumps(np.array([0, 0, 1, 1, 0.0]), 0.5) == 2
        assert count_jumps(np.array([0, 0.6, 1.2, 1.2]), 0.5) == 1
        assert count_jumps(np.linspace(0, 1, 50), 0.05) == 0

    def test_support_length(self):
        u = GridFunction(np.array([0, 0, 1, 2, 0.0]), h=0.5)
        assert support_length(u) == pytest.approx(1.0)
        assert support_length(GridFunction(np.zeros(4))) == 0.0

    def test_correlation(self, rng):
        a = GridFunction(rng.standard_normal(40))
        assert correlation(a, a) == pytest.approx(1.0)
        assert correlation(a, a.with_values(-2 * a.values + 1)) == pytest.approx(-1.0)
        assert correlation(a, a.with_values(np.ones(40))) == 0.0

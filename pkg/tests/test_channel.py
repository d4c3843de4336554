import numpy as np
import pytest

from mciksc.channel import propagate, sample_channel, select_combine
from mciksc.codec import encode
from mciksc.config import SystemConfig


def test_perfect_csi_has_no_error(rng):
    ch = sample_channel(rng, SystemConfig(4, 1, 4, 3), 0.0)
    assert ch.hhat.shape == (3, 4)
    assert np.all(ch.error == 0)
    assert np.array_equal(ch.h, ch.hhat)


def test_rejects_bad_eps2(rng):
    with pytest.raises(ValueError):
        sample_channel(rng, SystemConfig(4, 1, 4), 1.0)


def test_channel_moments(rng):
    cfg = SystemConfig(4, 1, 4, 2)
    ch = sample_channel(rng, cfg, 0.2, batch=125_000)
    assert np.mean(np.abs(ch.h) ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.mean(np.abs(ch.hhat) ** 2) == pytest.approx(0.8, abs=0.01)
    assert np.mean(np.abs(ch.error) ** 2) == pytest.approx(0.2, abs=0.005)


def test_noiseless_propagation_is_exact(rng):
    cfg = SystemConfig(4, 1, 4, 2)
    _, x = encode([1, 0, 0, 1], cfg)
    ch = sample_channel(rng, cfg, 0.2)
    y = propagate(x, ch, rng, 0.0)
    assert np.array_equal(y, ch.h * x)
    assert np.all(y[:, x == 0] == 0)


def test_inactive_noise_variance(rng):
    cfg = SystemConfig(4, 1, 4, 1)
    x = np.zeros((250_000, 4), dtype=complex)
    ch = sample_channel(rng, cfg, 0.0, batch=250_000)
    y = propagate(x, ch, rng, 0.3)
    assert np.var(y) == pytest.approx(0.3, rel=0.01)


def test_negative_noise_rejected(rng):
    cfg = SystemConfig(2, 1, 2)
    ch = sample_channel(rng, cfg, 0.0)
    with pytest.raises(ValueError):
        propagate(np.zeros(2, dtype=complex), ch, rng, -1.0)


def test_single_branch_pass_through(rng):
    cfg = SystemConfig(4, 2, 4, 1)
    ch = sample_channel(rng, cfg, 0.1)
    y = propagate(encode([0] * 6, cfg)[1], ch, rng, 0.1)
    obs = select_combine(y, ch.hhat)
    assert np.array_equal(obs.y, y[0])
    assert np.array_equal(obs.hhat, ch.hhat[0])


def test_selects_strongest_estimate():
    hhat = np.array([[0.3], [0.9j], [-0.5]])
    y = np.array([[1.0], [2.0], [3.0]])
    obs = select_combine(y, hhat)
    assert obs.branch.tolist() == [1]
    assert obs.y.tolist() == [2.0]


def test_selection_tie_goes_to_lowest_branch():
    obs = select_combine(np.array([[1.0], [2.0]]), np.array([[0.5], [-0.5]]))
    assert obs.branch.tolist() == [0]


def test_selected_gain_distribution(rng):
    # max of two unit exponentials has CDF (1 - e^-x)^2
    cfg = SystemConfig(2, 1, 2, 2)
    ch = sample_channel(rng, cfg, 0.0, batch=500_000)
    gains = np.sort(select_combine(ch.hhat, ch.hhat).est_gain.ravel())
    ecdf = np.arange(1, gains.size + 1) / gains.size
    assert np.max(np.abs(ecdf - (1 - np.exp(-gains)) ** 2)) < 0.01

import math

import numpy as np
import pytest

from aousim.channel import distance, link_gain, rate, sample_fading, snr
from aousim.scenario import Position3


def test_distance_identity():
    p = Position3(1.0, 2.0, 3.0)
    assert distance(p, p) == 0.0


def test_distance_345():
    assert distance(Position3(0, 0, 0), Position3(3, 4, 0)) == pytest.approx(5.0)
    assert distance(Position3(1, 2, 3), Position3(4, 6, 3)) == pytest.approx(5.0)


def test_fading_pure_nlos():
    rng = np.random.Generator(np.random.Philox(1))
    s = sample_fading(0.0, rng)
    assert s.coeff == s.nlos_part
    assert abs(s.los_part) == pytest.approx(1.0)


def test_fading_pure_los_limit():
    rng = np.random.Generator(np.random.Philox(2))
    s = sample_fading(1e12, rng)
    assert abs(s.coeff) == pytest.approx(1.0, abs=1e-4)


def test_fading_mixture_identity():
    rng = np.random.Generator(np.random.Philox(3))
    omega = 7.5
    s = sample_fading(omega, rng)
    recombined = (math.sqrt(omega / (omega + 1)) * s.los_part
                  + math.sqrt(1 / (omega + 1)) * s.nlos_part)
    assert s.coeff == pytest.approx(recombined)


def test_fading_unit_mean_power():
    # E|coeff|^2 = omega/(omega+1) + E|nlos|^2/(omega+1) = 1; Monte-Carlo oracle.
    rng = np.random.Generator(np.random.Philox(4))
    n = 100_000
    omega = 10.0
    powers = np.array([sample_fading(omega, rng).power for _ in range(n)])
    assert powers.mean() == pytest.approx(1.0, abs=0.02)


def test_fading_rejects_negative_factor():
    rng = np.random.Generator(np.random.Philox(5))
    with pytest.raises(ValueError):
        sample_fading(-1.0, rng)


def test_snr_reference_distance():
    assert snr(1.0, 1.0, 1.0, 1.0, 2.0, 1.0) == pytest.approx(1.0)


def test_snr_inverse_square():
    near = snr(2.0, 1.0, 1e-3, 50.0, 2.0, 1e-10)
    far = snr(2.0, 1.0, 1e-3, 100.0, 2.0, 1e-10)
    assert near / far == pytest.approx(4.0)


def test_snr_direct_arithmetic():
    # 0.1 * 1e-3 * 100^-2 / 1e-10 = 1e-8 / 1e-10 = 100
    assert snr(0.1, 1.0, 1e-3, 100.0, 2.0, 1e-10) == pytest.approx(100.0)


def test_snr_zero_distance_rejected():
    with pytest.raises(ValueError):
        snr(1.0, 1.0, 1.0, 0.0, 2.0, 1.0)


def test_rate_trivials():
    assert rate(1.0, 0.0) == 0.0
    assert rate(1.0, 1.0) == pytest.approx(1.0)
    assert rate(2.0, 3.0) == pytest.approx(4.0)


def test_rate_monotone_in_snr_linear_in_bandwidth():
    rng = np.random.default_rng(11)
    snrs = np.sort(rng.uniform(0, 1e4, size=50))
    rates = [rate(1.0, s) for s in snrs]
    assert all(r2 >= r1 for r1, r2 in zip(rates, rates[1:]))
    for s in snrs[:10]:
        assert rate(7.0, s) == pytest.approx(7.0 * rate(1.0, s))


def test_link_gain_positive_and_matches_snr():
    g = link_gain(0.8, 1e-3, 120.0, 2.0)
    assert g.power_gain > 0
    assert snr(2.0, 0.8, 1e-3, 120.0, 2.0, 1e-9) == pytest.approx(
        2.0 * g.power_gain / 1e-9)

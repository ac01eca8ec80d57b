"""Air-to-ground link model: distance, Rician fading, SNR, achievable rate.

All functions are pure; fading draws take an explicit generator so parallel
callers can use disjoint streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FadingSample:
    """One small-scale fading realization.

    coeff combines a unit-modulus line-of-sight part with a complex standard
    normal scatter part, weighted by the Rician factor.
    """

    coeff: complex
    los_part: complex
    nlos_part: complex

    @property
    def power(self) -> float:
        return abs(self.coeff) ** 2


@dataclass(frozen=True)
class LinkGain:
    """Instantaneous channel power gain |coeff|^2 * ref_gain * d^(-alpha)."""

    power_gain: float


def distance(p, q) -> float:
    """Euclidean distance between two Position3 points."""
    return float(np.linalg.norm(p.array() - q.array()))


def sample_fading(rician_factor: float, rng: np.random.Generator) -> FadingSample:
    """Draw one Rician fading coefficient.

    The LoS part is fixed at 1+0j; the NLoS part is complex circular standard
    normal (unit total variance, i.e. real and imaginary parts ~ N(0, 1/2)).
    """
    if rician_factor < 0:
        raise ValueError(f"rician_factor must be >= 0, got {rician_factor}")
    re, im = rng.standard_normal(2) * math.sqrt(0.5)
    nlos = complex(re, im)
    los = complex(1.0, 0.0)
    w_los = math.sqrt(rician_factor / (rician_factor + 1.0))
    w_nlos = math.sqrt(1.0 / (rician_factor + 1.0))
    return FadingSample(coeff=w_los * los + w_nlos * nlos, los_part=los, nlos_part=nlos)


def link_gain(fading_power: float, ref_gain: float, d: float, alpha: float) -> LinkGain:
    if d <= 0:
        raise ValueError(f"distance must be > 0, got {d}")
    return LinkGain(power_gain=fading_power * ref_gain * d ** (-alpha))


def snr(tx_power: float, fading_power: float, ref_gain: float, d: float,
        alpha: float, noise_power: float) -> float:
    """Received SNR: tx_power * fading_power * ref_gain * d^(-alpha) / noise."""
    if d <= 0:
        raise ValueError(f"distance must be > 0, got {d}")
    if noise_power <= 0:
        raise ValueError(f"noise_power must be > 0, got {noise_power}")
    return tx_power * fading_power * ref_gain * d ** (-alpha) / noise_power


def rate(bandwidth: float, snr_value: float) -> float:
    """Shannon rate in bits/s with base-2 logarithm."""
    if snr_value < 0:
        raise ValueError(f"snr must be >= 0, got {snr_value}")
    return bandwidth * math.log2(1.0 + snr_value)

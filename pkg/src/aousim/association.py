"""Realizing associations from optimized probabilities.

Devices pick a UAV through a virtual multiset built from rounded
probabilities (I2U); each UAV forwards to the BS on a uniform-threshold draw
(U2B).  A hard 0.5-threshold policy covers the deterministic baseline.

Randomness comes from counter-based Philox streams keyed by
(seed, stream id), so identical ids reproduce bit-identical sequences on any
platform and parallel replications never share state.
"""
from __future__ import annotations

import numpy as np

from .aou import AssociationOutcome


class EmptyMultisetError(ValueError):
    """All rounded multiset counts were zero; caller treats the draw as none."""


class RandomStream:
    """Deterministic random stream family derived from one root seed.

    stream(*ids) derives an independent child generator from the integer id
    tuple (e.g. (replication, round, purpose)); equal ids give equal streams.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, *ids: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=tuple(int(i) for i in ids))
        return np.random.Generator(np.random.Philox(seq))


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def multiset_counts(probs: np.ndarray, resolution: int) -> tuple[np.ndarray, int]:
    """Rounded multiset bucket sizes: one bucket per UAV plus the null bucket."""
    counts = _round_half_up(np.asarray(probs, dtype=float) * resolution).astype(int)
    null_count = int(_round_half_up(np.array([(1.0 - float(np.sum(probs))) * resolution]))[0])
    return counts, max(null_count, 0)


def i2u_sample(probs: np.ndarray, resolution: int, rng: np.random.Generator,
               exact: bool = False) -> int:
    """Pick the UAV (index) a device uploads to this round, or -1 for none.

    Bucketed mode draws uniformly from the virtual multiset with
    round(p_u * resolution) copies of UAV u and round((1 - sum p) * resolution)
    copies of the null UAV.  Exact mode is an unbucketed categorical draw with
    P(u) = p_u and P(none) = 1 - sum p, for ablation of the rounding bias.
    """
    probs = np.asarray(probs, dtype=float)
    total_p = float(np.sum(probs))
    if total_p > 1.0 + 1e-9:
        raise ValueError(f"association probabilities sum to {total_p:.6f} > 1")
    if np.any(probs < -1e-12):
        raise ValueError("association probabilities must be >= 0")
    if exact:
        u = rng.uniform()
        cum = np.cumsum(probs)
        if u < cum[-1]:
            return int(np.searchsorted(cum, u, side="right"))
        return -1
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    counts, null_count = multiset_counts(probs, resolution)
    size = int(counts.sum()) + null_count
    if size == 0:
        raise EmptyMultisetError(
            f"all multiset counts round to zero at resolution {resolution}")
    pick = int(rng.integers(size))
    cum = np.cumsum(counts)
    if pick < cum[-1]:
        return int(np.searchsorted(cum, pick, side="right"))
    return -1


def u2b_sample(prob: float, rng: np.random.Generator) -> bool:
    """BS-selection draw: True iff a uniform(0,1) sample is strictly below prob."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {prob}")
    return bool(rng.uniform() < prob)


def deterministic_policy(a: np.ndarray, b: np.ndarray) -> AssociationOutcome:
    """Threshold policy: probabilities strictly above 0.5 become certain.

    The per-device simplex guarantees at most one entry above 0.5 per row;
    ties at exactly 0.5 round down (strict inequality).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    device_to_uav = np.full(a.shape[0], -1, dtype=int)
    for i in range(a.shape[0]):
        over = np.nonzero(a[i] > 0.5)[0]
        if over.size:
            device_to_uav[i] = int(over[0])
    return AssociationOutcome(device_to_uav=device_to_uav, uav_to_bs=b > 0.5)


def sample_outcome(a: np.ndarray, b: np.ndarray, resolution: int,
                   rng_devices: np.random.Generator, rng_uavs: np.random.Generator,
                   exact: bool = False) -> AssociationOutcome:
    """Draw a full round outcome: one I2U pick per device, one U2B per UAV."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    device_to_uav = np.empty(a.shape[0], dtype=int)
    for i in range(a.shape[0]):
        try:
            device_to_uav[i] = i2u_sample(a[i], resolution, rng_devices, exact=exact)
        except EmptyMultisetError:
            device_to_uav[i] = -1
    uav_to_bs = np.array([u2b_sample(float(bv), rng_uavs) for bv in b])
    return AssociationOutcome(device_to_uav=device_to_uav, uav_to_bs=uav_to_bs)

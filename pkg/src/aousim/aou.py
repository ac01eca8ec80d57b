"""Age-of-Updates bookkeeping.

Per (device, UAV) ages reset to zero when the device uploads and grow by one
per round otherwise.  Each UAV carries a pending age for the batch it
collected but has not yet forwarded; the base-station-level global AoU counts
that pending mass, plus one per pair, for every UAV the BS did not select.
The closed-form expectation of that quantity under independent Bernoulli
associations is `expected_aou`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AssociationOutcome:
    """Realized associations for one round.

    device_to_uav[i] is the chosen UAV index or -1 for none; uav_to_bs[u] is
    True when the BS selected UAV u.  A device never maps to two UAVs by
    construction of the vector form.
    """

    device_to_uav: np.ndarray   # (I,) int, -1 = unassociated
    uav_to_bs: np.ndarray       # (U,) bool

    def matrix(self, n_uavs: int) -> np.ndarray:
        """Binary I x U association matrix."""
        n_dev = self.device_to_uav.shape[0]
        m = np.zeros((n_dev, n_uavs))
        sel = self.device_to_uav >= 0
        m[np.nonzero(sel)[0], self.device_to_uav[sel]] = 1.0
        return m


@dataclass(frozen=True)
class AoUState:
    """Evolving freshness state: device ages, per-UAV pending ages, round."""

    device_age: np.ndarray   # (I, U)
    pending_age: np.ndarray  # (U,)
    round: int

    def __post_init__(self):
        # Ages are provably integers under event-based evolution.
        if not np.allclose(self.device_age, np.round(self.device_age)):
            raise ValueError("device ages must be integer-valued")
        if np.any(self.device_age < 0) or np.any(self.pending_age < 0):
            raise ValueError("ages must be non-negative")

    @staticmethod
    def initial(n_devices: int, n_uavs: int) -> "AoUState":
        return AoUState(device_age=np.zeros((n_devices, n_uavs)),
                        pending_age=np.ones(n_uavs), round=0)

    def advance(self, outcome: AssociationOutcome) -> "AoUState":
        """Apply one round of realized associations.

        The batch collected this round carries the current ages of the
        uploading devices; its pending age is that sum plus one.  Uploading
        devices reset, all others increment.
        """
        n_uavs = self.pending_age.shape[0]
        assoc = outcome.matrix(n_uavs)
        new_pending = (self.device_age * assoc).sum(axis=0) + 1.0
        new_age = (self.device_age + 1.0) * (1.0 - assoc)
        return AoUState(device_age=new_age, pending_age=new_pending,
                        round=self.round + 1)


def step_device_age(age: float, associated: bool) -> float:
    """Single-link age update: 0 on upload, age + 1 otherwise."""
    if age < 0:
        raise ValueError(f"age must be >= 0, got {age}")
    return 0.0 if associated else age + 1.0


def bs_pending_age(device_age_prev: np.ndarray, realized_prev: np.ndarray) -> float:
    """Pending age of the batch a UAV collected: sum of selected ages plus one."""
    if device_age_prev.shape != realized_prev.shape:
        raise ValueError("age vector and selection mask must have equal length")
    return float(np.sum(device_age_prev * realized_prev) + 1.0)


def global_aou(state: AoUState, outcome: AssociationOutcome) -> float:
    """Realized base-station AoU for one round.

    Sums, over every UAV not selected by the BS, the pending mass of the batch
    it holds plus one per device pair: sum_u sum_i (T_iu*A_iu + 1)(1 - B_u)
    = sum_u (S_u - 1 + I)(1 - B_u) with S_u the stored pending age.
    """
    n_devices = state.device_age.shape[0]
    miss = 1.0 - outcome.uav_to_bs.astype(float)
    return float(np.sum((state.pending_age - 1.0 + n_devices) * miss))


def expected_aou(ages_prev: np.ndarray, a_prev: np.ndarray, b: np.ndarray) -> float:
    """Closed-form expectation of the global AoU under independent draws.

    ages_prev and a_prev are the I x U ages and association probabilities of
    the previous round (a realized 0/1 matrix is a valid special case); b is
    the U-vector of BS-selection probabilities for the current round:

        sum_u sum_i ( T*a + (1 - b_u) - T*a*b_u )
    """
    if np.any(a_prev < 0) or np.any(a_prev > 1) or np.any(b < 0) or np.any(b > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    coeffs = ages_prev * a_prev                      # I x U
    n_devices = ages_prev.shape[0]
    return float(np.sum(coeffs) + n_devices * np.sum(1.0 - b)
                 - np.sum(coeffs * b[np.newaxis, :]))


def device_aou(ages_cur: np.ndarray, a_cur: np.ndarray) -> float:
    """Device-level freshness sum: sum_u sum_i (T_iu + 1)(1 - a_iu).

    Diagnostic companion to `global_aou`; with realized 0/1 associations it
    equals the total of the post-round device ages.
    """
    return float(np.sum((ages_cur + 1.0) * (1.0 - a_cur)))

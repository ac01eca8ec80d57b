"""Rotary-wing propulsion power and per-round energy accounting."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import RotorParams, UavSpec


class EnergyError(ValueError):
    """Raised when a commanded move cannot be completed within the slot."""


@dataclass(frozen=True)
class RoundEnergy:
    """Energy split for one UAV over one communication round (joules)."""

    fly: float
    hover: float
    comm: float
    total: float
    fly_time: float


def propulsion_power(speed: float, rotor: RotorParams) -> float:
    """Power draw at constant speed: blade-profile + induced + parasite terms.

    The induced term is sqrt(sqrt(1 + V^4/(4 v0^4)) - V^2/(2 v0^2)); the inner
    difference is evaluated as 1/(sqrt(1+x^2)+x) with x = V^2/(2 v0^2) to
    avoid cancellation at high speed.
    """
    if speed < 0:
        raise ValueError(f"speed must be >= 0, got {speed}")
    v0 = rotor.mean_rotor_velocity
    blade = rotor.blade_profile_power * (1.0 + 3.0 * speed**2 / rotor.tip_speed**2)
    x = speed**2 / (2.0 * v0**2)
    induced = rotor.induced_power * math.sqrt(1.0 / (math.sqrt(1.0 + x * x) + x))
    parasite = rotor.parasite_coeff * speed**3
    return blade + induced + parasite


def hover_power(rotor: RotorParams) -> float:
    """Zero-speed propulsion power (blade profile + induced)."""
    return rotor.blade_profile_power + rotor.induced_power


def round_energy(w_prev, w_cur, spec: UavSpec, slot_duration: float) -> RoundEnergy:
    """Energy to fly from w_prev to w_cur, then hover and transmit out the slot.

    Communication power is charged only over the hovering fraction of the
    slot.  Moves longer than speed * slot_duration are rejected.
    """
    dist = float(np.linalg.norm(w_prev.array() - w_cur.array()))
    fly_time = dist / spec.speed
    if fly_time > slot_duration * (1.0 + 1e-9):
        raise EnergyError(
            f"uav {spec.id}: move of {dist:.3f} m needs {fly_time:.3f} s, "
            f"exceeding the {slot_duration} s slot")
    fly_time = min(fly_time, slot_duration)
    rest = slot_duration - fly_time
    fly = propulsion_power(spec.speed, spec.rotor) * fly_time
    hover = hover_power(spec.rotor) * rest
    comm = spec.tx_power * rest
    return RoundEnergy(fly=fly, hover=hover, comm=comm,
                       total=fly + hover + comm, fly_time=fly_time)

"""Independent reference computations used by tests.

Everything here is deliberately coded from first principles (its own
formulas, no calls into the packages' constraint machinery) so it can serve
as an oracle for the production implementations.
"""
import math
from dataclasses import replace

import numpy as np

from aousim.energy import hover_power, propulsion_power
from aousim.scenario import (DeviceSpec, Position3, UavSpec, default_rotor,
                             make_default_scenario, validate)


def one_by_one_scenario(rng=None, **overrides):
    """A 1-device / 1-UAV scenario, optionally randomized."""
    base = make_default_scenario()
    if rng is None:
        dev_xy, uav_xyz = (40.0, 60.0), (55.0, 45.0, 35.0)
    else:
        dev_xy = tuple(rng.uniform(10, 90, size=2))
        uav_xyz = (*rng.uniform(15, 85, size=2), rng.uniform(20, 80))
    devices = (DeviceSpec(id=0, position=Position3(dev_xy[0], dev_xy[1], 0.0),
                          tx_power=0.1, bandwidth=1.0e6),)
    uavs = (UavSpec(id=0, initial_position=Position3(*uav_xyz), tx_power=0.5,
                    bandwidth=5.0e6, energy_budget=200.0, speed=15.0,
                    rotor=default_rotor()),)
    cfg = replace(base, devices=devices, uavs=uavs, horizon=1)
    if overrides:
        cfg = replace(cfg, **overrides)
    return validate(cfg)


def grid_search_1x1(cfg, ages_cur, pending_minus_one, w_prev,
                    w_step=1.0):
    """Exhaustive grid optimum of the 1x1 round program.

    Recodes the feasible set from scratch: base-2 rate thresholds against the
    tangent caps of 1/d^2 at w_prev, the travel and energy balls, and the box.
    The objective is decreasing in both probabilities, so the best grid value
    at each position uses the largest feasible (a, b) on the 1e-3 grid, which
    is 1.0 whenever the position is feasible at all.

    Returns (best objective, feasible position count) or (None, 0).
    """
    dev = cfg.devices[0]
    uav = cfg.uavs[0]
    q = dev.position.array()
    bs = cfg.bs_position.array()
    c_dev = dev.tx_power * cfg.ref_gain / cfg.noise_power
    c_uav = uav.tx_power * cfg.ref_gain / cfg.noise_power
    slack_cap = 1.0 / cfg.box.z[0] ** 2

    xs = np.arange(cfg.box.x[0], cfg.box.x[1] + 1e-9, w_step)
    ys = np.arange(cfg.box.y[0], cfg.box.y[1] + 1e-9, w_step)
    zs = np.arange(cfg.box.z[0], cfg.box.z[1] + 1e-9, w_step)
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    w = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)

    def tangent_cap(anchor):
        ybar = float(((w_prev - anchor) ** 2).sum())
        y = ((w - anchor) ** 2).sum(axis=1)
        return np.minimum((2.0 * ybar - y) / ybar**2, slack_cap)

    t1cap = tangent_cap(q)
    t2cap = tangent_cap(bs)
    move_sq = ((w - w_prev) ** 2).sum(axis=1)
    reach = uav.speed * cfg.slot_duration
    feasible = (t1cap > 0) & (t2cap > 0) & (move_sq <= reach**2)

    p_rest = hover_power(uav.rotor) + uav.tx_power
    slope = (propulsion_power(uav.speed, uav.rotor) - p_rest) / uav.speed
    hover_cost = p_rest * cfg.slot_duration
    if hover_cost > uav.energy_budget:
        return None, 0
    if slope > 0:
        r_e = (uav.energy_budget - hover_cost) / slope
        feasible &= move_sq <= r_e**2

    with np.errstate(divide="ignore", invalid="ignore"):
        a_req = cfg.rate_threshold_device / (dev.bandwidth
                                             * np.log2(1.0 + c_dev * t1cap))
        b_req = cfg.rate_threshold_uav / (uav.bandwidth
                                          * np.log2(1.0 + c_uav * t2cap))
    feasible &= (a_req <= 1.0) & (b_req <= 1.0)
    if not np.any(feasible):
        return None, 0

    # objective with I = U = 1; best grid a = b = 1.0 wherever feasible
    t_cur = float(ages_cur[0, 0])
    s_minus1 = float(pending_minus_one[0])
    const = s_minus1 + 1.0 + cfg.lambda_dev * (t_cur + 1.0)
    best = const - (1.0 + s_minus1) * 1.0 - cfg.lambda_dev * (t_cur + 1.0) * 1.0
    return best, int(feasible.sum())


def original_device_rate_holds(cfg, i, u, a, w_u):
    """The unreformulated QoS check: a * B * log2(1 + C/d^2) >= threshold."""
    dev = cfg.devices[i]
    c = dev.tx_power * cfg.ref_gain / cfg.noise_power
    d_sq = float(((w_u - dev.position.array()) ** 2).sum())
    return (a * dev.bandwidth * math.log2(1.0 + c / d_sq)
            >= cfg.rate_threshold_device - 1e-9)


def original_uav_rate_holds(cfg, u, b, w_u):
    uav = cfg.uavs[u]
    c = uav.tx_power * cfg.ref_gain / cfg.noise_power
    d_sq = float(((w_u - cfg.bs_position.array()) ** 2).sum())
    return (b * uav.bandwidth * math.log2(1.0 + c / d_sq)
            >= cfg.rate_threshold_uav - 1e-9)

import numpy as np
import pytest

from aousim import make_default_scenario
from aousim.program import assemble_round_program, make_round_context


@pytest.fixture(scope="session")
def default_cfg():
    return make_default_scenario()


@pytest.fixture(scope="session")
def round1_program(default_cfg):
    """The benchmark scenario's first-round program and its context."""
    cfg = default_cfg
    ndev, nuav = cfg.n_devices, cfg.n_uavs
    zeros = np.zeros((ndev, nuav))
    w0 = np.stack([u.initial_position.array() for u in cfg.uavs])
    ctx = make_round_context(cfg, zeros, zeros, zeros, w0)
    return ctx, assemble_round_program(ctx, cfg)


def tiny_scenario(**overrides):
    """Two devices, one UAV; quick to solve and to brute-force."""
    from aousim.scenario import DeviceSpec, Position3, UavSpec, default_rotor, validate
    from dataclasses import replace

    base = make_default_scenario()
    devices = (
        DeviceSpec(id=0, position=Position3(30.0, 50.0, 0.0), tx_power=0.1,
                   bandwidth=1.0e6),
        DeviceSpec(id=1, position=Position3(70.0, 50.0, 0.0), tx_power=0.1,
                   bandwidth=1.0e6),
    )
    uavs = (
        UavSpec(id=0, initial_position=Position3(50.0, 50.0, 40.0), tx_power=0.5,
                bandwidth=5.0e6, energy_budget=200.0, speed=15.0,
                rotor=default_rotor()),
    )
    cfg = replace(base, devices=devices, uavs=uavs, horizon=4)
    if overrides:
        cfg = replace(cfg, **overrides)
    return validate(cfg)


@pytest.fixture()
def tiny_cfg():
    return tiny_scenario()

"""Scenario configuration: domain types, JSON ingestion, validation.

Every static quantity of the simulated system lives here: device and UAV
hardware, channel constants, rate thresholds, the flight box, and the
simulation horizon.  Configs are frozen after validation and safe to share
between threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, replace

import numpy as np


class ConfigError(ValueError):
    """Raised when a config file fails to parse or violates an invariant."""


class GeometryError(ConfigError):
    """Raised when initial UAV placement violates separation or box bounds."""


@dataclass(frozen=True)
class Position3:
    """3D point in meters; z is height above ground."""

    x: float
    y: float
    z: float

    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def from_seq(seq) -> "Position3":
        if len(seq) != 3:
            raise ConfigError(f"position must have 3 coordinates, got {len(seq)}")
        return Position3(float(seq[0]), float(seq[1]), float(seq[2]))


@dataclass(frozen=True)
class DeviceSpec:
    """Ground IoT device: fixed position (z = 0), uplink power and bandwidth."""

    id: int
    position: Position3
    tx_power: float      # watts
    bandwidth: float     # hertz


@dataclass(frozen=True)
class RotorParams:
    """Rotary-wing power-model constants.

    blade_profile_power and induced_power are the zero-speed power terms;
    parasite_coeff is the lumped 0.5*d0*rho*s*A drag factor multiplying V^3.
    """

    blade_profile_power: float   # watts
    induced_power: float         # watts
    tip_speed: float             # m/s
    mean_rotor_velocity: float   # m/s
    parasite_coeff: float        # kg/m


@dataclass(frozen=True)
class UavSpec:
    """UAV platform: initial position, radio, per-round energy budget, speed."""

    id: int
    initial_position: Position3
    tx_power: float          # watts
    bandwidth: float         # hertz
    energy_budget: float     # joules, per communication round
    speed: float             # m/s, constant cruise speed
    rotor: RotorParams


@dataclass(frozen=True)
class Box:
    """Axis-aligned flight volume [x0,x1] x [y0,y1] x [z0,z1]."""

    x: tuple[float, float]
    y: tuple[float, float]
    z: tuple[float, float]

    def contains(self, p: Position3) -> bool:
        return (self.x[0] <= p.x <= self.x[1]
                and self.y[0] <= p.y <= self.y[1]
                and self.z[0] <= p.z <= self.z[1])

    def lows(self) -> np.ndarray:
        return np.array([self.x[0], self.y[0], self.z[0]])

    def highs(self) -> np.ndarray:
        return np.array([self.x[1], self.y[1], self.z[1]])


@dataclass(frozen=True)
class ScenarioConfig:
    devices: tuple[DeviceSpec, ...]
    uavs: tuple[UavSpec, ...]
    bs_position: Position3
    horizon: int                    # number of communication rounds
    slot_duration: float            # seconds per round
    rician_factor: float            # LoS/NLoS power ratio
    ref_gain: float                 # channel power gain at 1 m
    noise_power: float              # watts
    rate_threshold_device: float    # bits/s
    rate_threshold_uav: float       # bits/s
    min_separation: float           # meters between any two UAVs
    box: Box
    seed: int
    pathloss_exponent: float = 2.0
    i2u_resolution: int = 10
    fading_mode: str = "expected"   # "expected" or "sampled"
    lambda_dev: float = 1.0         # weight of the device-freshness objective term

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @property
    def n_uavs(self) -> int:
        return len(self.uavs)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _finite_pos(p: Position3, what: str) -> None:
    for c, v in zip("xyz", (p.x, p.y, p.z)):
        _require(math.isfinite(v), f"{what}.{c} must be finite, got {v}")


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check every invariant; raises ConfigError naming the offending field."""
    _require(cfg.n_devices >= 1, "devices: need at least one device")
    _require(cfg.n_uavs >= 1, "uavs: need at least one UAV")
    _require(cfg.horizon >= 1, f"horizon must be >= 1, got {cfg.horizon}")
    _require(cfg.slot_duration > 0, f"slot_duration must be > 0, got {cfg.slot_duration}")
    _require(cfg.rician_factor >= 0, f"rician_factor must be >= 0, got {cfg.rician_factor}")
    _require(cfg.ref_gain > 0, f"ref_gain must be > 0, got {cfg.ref_gain}")
    _require(cfg.noise_power > 0, f"noise_power must be > 0, got {cfg.noise_power}")
    _require(cfg.rate_threshold_device > 0,
             f"rate_threshold_device must be > 0, got {cfg.rate_threshold_device}")
    _require(cfg.rate_threshold_uav > 0,
             f"rate_threshold_uav must be > 0, got {cfg.rate_threshold_uav}")
    _require(cfg.min_separation > 0, f"min_separation must be > 0, got {cfg.min_separation}")
    _require(cfg.pathloss_exponent > 0,
             f"pathloss_exponent must be > 0, got {cfg.pathloss_exponent}")
    _require(cfg.i2u_resolution >= 1,
             f"i2u_resolution must be >= 1, got {cfg.i2u_resolution}")
    _require(cfg.fading_mode in ("expected", "sampled"),
             f"fading_mode must be 'expected' or 'sampled', got {cfg.fading_mode!r}")
    _require(cfg.lambda_dev >= 0, f"lambda_dev must be >= 0, got {cfg.lambda_dev}")

    for lo, hi, name in ((*cfg.box.x, "box.x"), (*cfg.box.y, "box.y"), (*cfg.box.z, "box.z")):
        _require(lo < hi, f"{name} must be a non-degenerate interval, got [{lo}, {hi}]")
    _require(cfg.box.z[0] > 0, f"box.z lower bound must be > 0, got {cfg.box.z[0]}")

    _finite_pos(cfg.bs_position, "bs_position")
    seen_dev = set()
    for d in cfg.devices:
        _require(d.id not in seen_dev, f"devices: duplicate id {d.id}")
        seen_dev.add(d.id)
        _finite_pos(d.position, f"devices[{d.id}].position")
        _require(d.position.z == 0.0, f"devices[{d.id}].position.z must be 0 (ground)")
        _require(d.tx_power > 0, f"devices[{d.id}].tx_power must be > 0")
        _require(d.bandwidth > 0, f"devices[{d.id}].bandwidth must be > 0")
    seen_uav = set()
    for u in cfg.uavs:
        _require(u.id not in seen_uav, f"uavs: duplicate id {u.id}")
        seen_uav.add(u.id)
        _finite_pos(u.initial_position, f"uavs[{u.id}].initial_position")
        _require(u.tx_power > 0, f"uavs[{u.id}].tx_power must be > 0")
        _require(u.bandwidth > 0, f"uavs[{u.id}].bandwidth must be > 0")
        _require(u.energy_budget > 0, f"uavs[{u.id}].energy_budget must be > 0")
        _require(u.speed > 0, f"uavs[{u.id}].speed must be > 0")
        r = u.rotor
        for fname in ("blade_profile_power", "induced_power", "tip_speed",
                      "mean_rotor_velocity", "parasite_coeff"):
            _require(getattr(r, fname) > 0, f"uavs[{u.id}].rotor.{fname} must be > 0")
    validate_geometry(cfg)
    return cfg


def validate_geometry(cfg: ScenarioConfig) -> None:
    """Initial UAV positions must be inside the box and pairwise separated.

    Round-1 collision constraints are linearized at the initial positions, so
    a violation here would make the very first program infeasible.
    """
    for u in cfg.uavs:
        if not cfg.box.contains(u.initial_position):
            raise GeometryError(
                f"uavs[{u.id}].initial_position {u.initial_position} outside box")
    for i, u in enumerate(cfg.uavs):
        for v in cfg.uavs[i + 1:]:
            d = float(np.linalg.norm(u.initial_position.array() - v.initial_position.array()))
            if d < cfg.min_separation:
                raise GeometryError(
                    f"uavs {u.id} and {v.id} start {d:.3f} m apart, "
                    f"below min_separation {cfg.min_separation}")


# ---------------------------------------------------------------------------
# JSON schema: keys are exactly the dataclass field names; positions are
# 3-element arrays [x, y, z] in meters; box is [[x0,x1],[y0,y1],[z0,z1]].
# ---------------------------------------------------------------------------

def _device_from_json(obj, idx: int) -> DeviceSpec:
    try:
        return DeviceSpec(
            id=int(obj["id"]),
            position=Position3.from_seq(obj["position"]),
            tx_power=float(obj["tx_power"]),
            bandwidth=float(obj["bandwidth"]),
        )
    except KeyError as e:
        raise ConfigError(f"devices[{idx}]: missing key {e.args[0]!r}") from None


def _rotor_from_json(obj) -> RotorParams:
    return RotorParams(
        blade_profile_power=float(obj["blade_profile_power"]),
        induced_power=float(obj["induced_power"]),
        tip_speed=float(obj["tip_speed"]),
        mean_rotor_velocity=float(obj["mean_rotor_velocity"]),
        parasite_coeff=float(obj["parasite_coeff"]),
    )


def _uav_from_json(obj, idx: int) -> UavSpec:
    try:
        return UavSpec(
            id=int(obj["id"]),
            initial_position=Position3.from_seq(obj["initial_position"]),
            tx_power=float(obj["tx_power"]),
            bandwidth=float(obj["bandwidth"]),
            energy_budget=float(obj["energy_budget"]),
            speed=float(obj["speed"]),
            rotor=_rotor_from_json(obj["rotor"]),
        )
    except KeyError as e:
        raise ConfigError(f"uavs[{idx}]: missing key {e.args[0]!r}") from None


def config_from_dict(doc: dict) -> ScenarioConfig:
    try:
        box = doc["box"]
        cfg = ScenarioConfig(
            devices=tuple(_device_from_json(d, i) for i, d in enumerate(doc["devices"])),
            uavs=tuple(_uav_from_json(u, i) for i, u in enumerate(doc["uavs"])),
            bs_position=Position3.from_seq(doc["bs_position"]),
            horizon=int(doc["horizon"]),
            slot_duration=float(doc["slot_duration"]),
            rician_factor=float(doc["rician_factor"]),
            ref_gain=float(doc["ref_gain"]),
            noise_power=float(doc["noise_power"]),
            rate_threshold_device=float(doc["rate_threshold_device"]),
            rate_threshold_uav=float(doc["rate_threshold_uav"]),
            min_separation=float(doc["min_separation"]),
            box=Box(x=(float(box[0][0]), float(box[0][1])),
                    y=(float(box[1][0]), float(box[1][1])),
                    z=(float(box[2][0]), float(box[2][1]))),
            seed=int(doc["seed"]),
            pathloss_exponent=float(doc.get("pathloss_exponent", 2.0)),
            i2u_resolution=int(doc.get("i2u_resolution", 10)),
            fading_mode=str(doc.get("fading_mode", "expected")),
            lambda_dev=float(doc.get("lambda_dev", 1.0)),
        )
    except KeyError as e:
        raise ConfigError(f"missing required key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed config value: {e}") from None
    return validate(cfg)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    doc = asdict(cfg)
    doc["bs_position"] = [cfg.bs_position.x, cfg.bs_position.y, cfg.bs_position.z]
    doc["devices"] = [
        {**asdict(d), "position": [d.position.x, d.position.y, d.position.z]}
        for d in cfg.devices
    ]
    doc["uavs"] = [
        {**asdict(u),
         "initial_position": [u.initial_position.x, u.initial_position.y,
                              u.initial_position.z]}
        for u in cfg.uavs
    ]
    doc["box"] = [list(cfg.box.x), list(cfg.box.y), list(cfg.box.z)]
    return doc


def load_config(path) -> ScenarioConfig:
    """Read, parse and validate a scenario JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: parse error at line {e.lineno}, col {e.colno}: {e.msg}") from None
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    return config_from_dict(doc)


def write_config(cfg: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Convenience builders.  The rotor numbers are the customary rotary-wing
# reference values; they are plain config inputs, not ground truth.
# ---------------------------------------------------------------------------

def default_rotor() -> RotorParams:
    return RotorParams(
        blade_profile_power=79.86,
        induced_power=88.63,
        tip_speed=120.0,
        mean_rotor_velocity=4.03,
        parasite_coeff=0.00924,
    )


def scatter_devices(n: int, box: Box, seed: int, tx_power: float = 0.1,
                    bandwidth: float = 1.0e6) -> tuple[DeviceSpec, ...]:
    """Seeded uniform scatter of ground devices over the box footprint."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    xs = rng.uniform(box.x[0], box.x[1], size=n)
    ys = rng.uniform(box.y[0], box.y[1], size=n)
    return tuple(
        DeviceSpec(id=i, position=Position3(float(xs[i]), float(ys[i]), 0.0),
                   tx_power=tx_power, bandwidth=bandwidth)
        for i in range(n)
    )


def make_default_scenario(**overrides) -> ScenarioConfig:
    """The benchmark scenario: 25 devices, 4 UAVs, 10 rounds, 100x100x100 m box.

    Devices sit on a regular 5x5 grid; UAVs start spread over the interior at
    50 m height.  Channel and radio defaults are documented engineering
    choices (see README), not authoritative values.
    """
    box = Box(x=(0.0, 100.0), y=(0.0, 100.0), z=(1.0, 100.0))
    devices = tuple(
        DeviceSpec(id=5 * r + c,
                   position=Position3(10.0 + 20.0 * c, 10.0 + 20.0 * r, 0.0),
                   tx_power=0.1, bandwidth=1.0e6)
        for r in range(5) for c in range(5)
    )
    rotor = default_rotor()
    uav_xy = [(20.0, 20.0), (20.0, 80.0), (80.0, 20.0), (80.0, 80.0)]
    uavs = tuple(
        UavSpec(id=u, initial_position=Position3(x, y, 50.0),
                tx_power=0.5, bandwidth=5.0e6, energy_budget=200.0,
                speed=15.0, rotor=rotor)
        for u, (x, y) in enumerate(uav_xy)
    )
    cfg = ScenarioConfig(
        devices=devices,
        uavs=uavs,
        bs_position=Position3(50.0, 50.0, 0.0),
        horizon=10,
        slot_duration=1.0,
        rician_factor=10.0,
        ref_gain=1.0e-6,
        noise_power=1.0e-14,
        rate_threshold_device=1.0e5,
        rate_threshold_uav=1.0e6,
        min_separation=15.0,
        box=box,
        seed=42,
    )
    if overrides:
        cfg = replace(cfg, **overrides)
    return validate(cfg)

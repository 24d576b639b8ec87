"""Core domain types and validated configuration.

Everything downstream (radio geometry, the demand-supply market, the
auction, the experiment harness) consumes the types defined here.  All
types are immutable value objects; randomness never enters this module,
so construction and validation are fully deterministic.

Unit conventions, used consistently across the package:

* time        seconds
* data size   bits
* rate        bits/second
* bandwidth   Hz
* power       watts (helpers convert from dBm / dBm-per-Hz)
* compute     cycles, cycles/second, resource units (server cores)
* money       abstract currency units
* distance    meters
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

__all__ = [
    "ConfigError",
    "Task",
    "UserEquipment",
    "EdgeServer",
    "SystemConfig",
    "validate_config",
    "config_to_dict",
    "dbm_to_watts",
    "dbm_per_hz_to_watts",
]


class ConfigError(ValueError):
    """A configuration document failed validation.

    Carries the offending field name so callers (and the CLI) can report
    exactly which key is wrong.
    """

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"config field '{field_name}': {message}")


def dbm_to_watts(level_dbm: float) -> float:
    """Convert a dBm power level to watts."""
    return 10.0 ** ((level_dbm - 30.0) / 10.0)


def dbm_per_hz_to_watts(density_dbm_per_hz: float, bandwidth_hz: float) -> float:
    """Total noise power in watts for a spectral density over a bandwidth.

    ``bandwidth_hz`` must be positive; the conversion is density (dBm/Hz)
    to watts/Hz, multiplied by the band width.
    """
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return dbm_to_watts(density_dbm_per_hz) * bandwidth_hz


@dataclass(frozen=True)
class Task:
    """One offloadable computation request.

    ``split`` is the offloaded fraction of the task (1 = fully remote).
    ``local_time`` optionally carries a pre-sampled full-task local
    processing time; when ``None`` the local time is derived from the
    owning device's processor speed.
    """

    id: int
    arrival_time: float     # seconds from scenario start
    size: float             # bits
    complexity: float       # cycles per bit
    deadline: float         # seconds, completion bound
    split: float = 1.0      # offloaded fraction in [0, 1]
    owner_ue: int = 0
    local_time: float | None = None

    def __post_init__(self):
        if self.arrival_time < 0:
            raise ValueError(f"task {self.id}: arrival_time must be >= 0")
        if self.size <= 0:
            raise ValueError(f"task {self.id}: size must be positive")
        if self.complexity <= 0:
            raise ValueError(f"task {self.id}: complexity must be positive")
        if self.deadline <= 0:
            raise ValueError(f"task {self.id}: deadline must be positive")
        if not 0.0 <= self.split <= 1.0:
            raise ValueError(f"task {self.id}: split must lie in [0, 1]")
        if self.local_time is not None and self.local_time <= 0:
            raise ValueError(f"task {self.id}: local_time must be positive")

    @property
    def cycles(self) -> float:
        """Total compute demand of the task in CPU cycles."""
        return self.complexity * self.size


@dataclass(frozen=True)
class UserEquipment:
    """A device that may buy edge compute for its tasks."""

    id: int
    position: tuple[float, float]
    budget: float = math.inf        # money available for payments
    local_speed: float = 1e9        # cycles/second of the on-board CPU
    offload_prob: float = 1.0       # participation probability q_n
    tx_power: float = dbm_to_watts(35.0)  # transmit power, watts
    participation: bool = True

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError(f"ue {self.id}: budget must be >= 0")
        if self.local_speed <= 0:
            raise ValueError(f"ue {self.id}: local_speed must be positive")
        if not 0.0 <= self.offload_prob <= 1.0:
            raise ValueError(f"ue {self.id}: offload_prob must lie in [0, 1]")
        if self.tx_power <= 0:
            raise ValueError(f"ue {self.id}: tx_power must be positive")


@dataclass(frozen=True)
class EdgeServer:
    """A server that sells compute units at its access point."""

    id: int
    position: tuple[float, float]
    capacity: int = 32              # total resource units (cores)
    available: int = 32             # units on offer this round
    speed_per_unit: float = 1e9     # cycles/second per allocated unit
    reserve_price: float = 0.5      # declared money per unit
    unit_cost: float = 0.25         # provisioning cost per unit
    coverage_radius: float = 500.0  # meters
    participation: bool = True

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"es {self.id}: capacity must be positive")
        if not 0 <= self.available <= self.capacity:
            raise ValueError(f"es {self.id}: available must lie in [0, capacity]")
        if self.speed_per_unit <= 0:
            raise ValueError(f"es {self.id}: speed_per_unit must be positive")
        if self.reserve_price < 0:
            raise ValueError(f"es {self.id}: reserve_price must be >= 0")
        if self.unit_cost < 0:
            raise ValueError(f"es {self.id}: unit_cost must be >= 0")
        if self.coverage_radius <= 0:
            raise ValueError(f"es {self.id}: coverage_radius must be positive")


# Default UE intensity reproduces a mean of 18 devices inside one circular
# coverage area of radius 500 m; the server intensity reproduces a mean of
# 6 servers on the default 1900 m x 1900 m region.
_DEFAULT_UE_INTENSITY = 18.0 / (math.pi * 500.0**2)
_DEFAULT_ES_INTENSITY = 6.0 / 1900.0**2

_MODES = {
    "execution_mode": ("concurrent", "sequential"),
    "auction_mode": ("exact", "greedy"),
    "seller_revenue": ("income", "reserve"),
    "local_time_mode": ("sampled", "derived"),
}

_INT_FIELDS = {
    "num_ue", "num_es", "num_tasks", "num_subchannels",
    "subchannel_min", "subchannel_max", "demand_cap", "es_capacity", "seed",
}


@dataclass(frozen=True)
class SystemConfig:
    """Validated, normalized simulation parameters.

    Weight fields are normalized so latency_weight + price_weight == 1.
    Instances are immutable; derived objects copy what they need.
    """

    # population and workload volume
    num_ue: int = 115               # cap on devices placed in the region
    num_es: int = 6                 # mean number of servers in the region
    num_tasks: int = 5000
    arrival_rate: float = 2.0       # tasks/second for generated workloads

    # geometry
    region_side: float = 1900.0
    ue_intensity: float = _DEFAULT_UE_INTENSITY   # devices per m^2
    es_intensity: float = _DEFAULT_ES_INTENSITY   # servers per m^2
    coverage_radius: float = 500.0

    # radio
    bandwidth: float = 10e6
    num_subchannels: int = 100
    mean_subchannel_request: float = 2.0
    subchannel_min: int = 1
    subchannel_max: int = 4
    noise_variance: float = dbm_per_hz_to_watts(-174.0, 10e6)
    pathloss_exponent: float = 3.5
    tx_power_dbm: float = 35.0

    # compute
    es_capacity: int = 32
    es_speed_per_unit: float = 1e9
    ue_local_speed: float = 1e9
    task_complexity: float = 1000.0   # cycles per bit
    task_size_min: float = 1e6        # bits
    task_size_max: float = 8e6
    deadline_min: float = 0.010
    deadline_max: float = 0.075
    local_time_min: float = 3.0       # sampled full-task local times
    local_time_max: float = 8.0
    local_time_mode: str = "sampled"

    # market and auction economics
    latency_weight: float = 0.5
    price_weight: float = 0.5
    incentive_factor: float = 0.0     # discount factor in [0, 1)
    risk_weight: float = 0.0          # variance penalty, 0 = risk neutral
    split_step: float = 0.05
    demand_cap: int = 4
    valuation_min: float = 30.0
    valuation_max: float = 500.0
    reserve_price_min: float = 0.1
    reserve_price_max: float = 1.0
    unit_cost_min: float = 0.05
    unit_cost_max: float = 0.5
    ue_budget: float = math.inf
    offload_prob: float = 1.0
    execution_mode: str = "concurrent"
    auction_mode: str = "greedy"
    seller_revenue: str = "income"

    seed: int = 0

    def __post_init__(self):
        for name in ("num_ue", "num_es", "num_tasks", "num_subchannels",
                     "es_capacity", "demand_cap"):
            if getattr(self, name) <= 0:
                raise ConfigError(name, "must be a positive integer")
        for name in ("region_side", "coverage_radius", "bandwidth",
                     "mean_subchannel_request", "noise_variance",
                     "es_speed_per_unit", "ue_local_speed", "task_complexity",
                     "task_size_min", "deadline_min", "local_time_min",
                     "arrival_rate", "pathloss_exponent"):
            if getattr(self, name) <= 0:
                raise ConfigError(name, "must be positive")
        for name in ("ue_intensity", "es_intensity", "risk_weight",
                     "valuation_min", "reserve_price_min", "unit_cost_min",
                     "ue_budget"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be >= 0")
        for lo, hi in (("task_size_min", "task_size_max"),
                       ("deadline_min", "deadline_max"),
                       ("local_time_min", "local_time_max"),
                       ("valuation_min", "valuation_max"),
                       ("reserve_price_min", "reserve_price_max"),
                       ("unit_cost_min", "unit_cost_max"),
                       ("subchannel_min", "subchannel_max")):
            if getattr(self, lo) > getattr(self, hi):
                raise ConfigError(hi, f"must be >= {lo}")
        if self.subchannel_min < 0:
            raise ConfigError("subchannel_min", "must be >= 0")
        if not 0.0 <= self.incentive_factor < 1.0:
            raise ConfigError("incentive_factor", "must lie in [0, 1)")
        if not 0.0 < self.split_step <= 1.0:
            raise ConfigError("split_step", "must lie in (0, 1]")
        if not 0.0 <= self.offload_prob <= 1.0:
            raise ConfigError("offload_prob", "must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        for name, choices in _MODES.items():
            if getattr(self, name) not in choices:
                raise ConfigError(name, f"must be one of {choices}")
        if self.latency_weight < 0 or self.price_weight < 0:
            raise ConfigError("latency_weight", "weights must be >= 0")
        total = self.latency_weight + self.price_weight
        if total <= 0:
            raise ConfigError("latency_weight", "weights must not both be zero")
        if total != 1.0:
            object.__setattr__(self, "latency_weight", self.latency_weight / total)
            object.__setattr__(self, "price_weight", self.price_weight / total)

    def replace(self, **changes) -> "SystemConfig":
        """Return a copy with the given fields changed (and re-validated)."""
        doc = config_to_dict(self)
        doc.update(changes)
        return validate_config(doc)


_CONFIG_FIELDS = {f.name for f in fields(SystemConfig)}


def config_to_dict(cfg: SystemConfig) -> dict:
    """Serialize a config to a flat key-value dict (round-trips exactly)."""
    return {f.name: getattr(cfg, f.name) for f in fields(SystemConfig)}


def validate_config(raw: dict) -> SystemConfig:
    """Build a SystemConfig from a flat key-value document.

    Strict: unknown keys and ``None`` values are rejected with the field
    named in the error, numeric fields must parse as numbers, and every
    range or mode violation raises :class:`ConfigError`.
    """
    if not isinstance(raw, dict):
        raise ConfigError("<document>", "expected a flat key-value mapping")
    unknown = sorted(set(raw) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    clean = {}
    for key, value in raw.items():
        if value is None:
            raise ConfigError(key, "missing value")
        if key in _MODES:
            if not isinstance(value, str):
                raise ConfigError(key, "must be a string")
            clean[key] = value
        elif key in _INT_FIELDS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(key, "must be an integer")
            if isinstance(value, float):
                if not value.is_integer():
                    raise ConfigError(key, "must be an integer")
                value = int(value)
            clean[key] = value
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float, str)):
                raise ConfigError(key, "must be a number")
            if isinstance(value, str):
                # accept "inf" for the unbounded-budget sentinel
                try:
                    value = float(value)
                except ValueError:
                    raise ConfigError(key, "must be a number") from None
            clean[key] = float(value)
    return SystemConfig(**clean)

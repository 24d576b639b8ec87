"""Domain types, unit conversions, and config validation."""
import math

import pytest

from edgemarket import (
    ConfigError,
    config_to_dict,
    dbm_per_hz_to_watts,
    dbm_to_watts,
    validate_config,
)
from edgemarket.model import EdgeServer, SystemConfig, Task, UserEquipment


# ---------------------------------------------------------------------------
# unit conversions


def test_dbm_to_watts_reference_points():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)
    assert dbm_to_watts(-30.0) == pytest.approx(1e-6)


def test_noise_density_conversion():
    assert dbm_per_hz_to_watts(-30.0, 1.0) == pytest.approx(1e-6)
    assert dbm_per_hz_to_watts(0.0, 1.0) == pytest.approx(1e-3)
    # the default thermal floor over 10 MHz
    assert dbm_per_hz_to_watts(-174.0, 10e6) == pytest.approx(
        3.981071705534986e-14, rel=1e-12)


def test_noise_scales_linearly_with_bandwidth():
    one = dbm_per_hz_to_watts(-100.0, 1e6)
    assert dbm_per_hz_to_watts(-100.0, 3e6) == pytest.approx(3.0 * one)


# ---------------------------------------------------------------------------
# Task / UserEquipment / EdgeServer invariants


def test_task_cycles_product():
    task = Task(id=0, arrival_time=0.0, size=2e6, complexity=500.0,
                deadline=1.0)
    assert task.cycles == pytest.approx(1e9)


@pytest.mark.parametrize("field,value", [
    ("size", 0.0),
    ("complexity", -1.0),
    ("deadline", 0.0),
    ("split", 1.2),
    ("arrival_time", -0.5),
    ("local_time", 0.0),
])
def test_task_rejects_bad_fields(field, value):
    base = dict(id=1, arrival_time=0.0, size=1e6, complexity=1000.0,
                deadline=0.05, split=1.0, local_time=4.0)
    base[field] = value
    with pytest.raises(ValueError):
        Task(**base)


def test_ue_rejects_bad_probability():
    with pytest.raises(ValueError):
        UserEquipment(id=0, position=(0.0, 0.0), offload_prob=1.5)


def test_es_available_bounded_by_capacity():
    with pytest.raises(ValueError):
        EdgeServer(id=0, position=(0.0, 0.0), capacity=4, available=5)
    es = EdgeServer(id=0, position=(0.0, 0.0), capacity=4, available=0)
    assert es.available == 0


# ---------------------------------------------------------------------------
# config validation


def test_defaults_are_valid():
    cfg = SystemConfig()
    assert cfg.num_ue == 115
    assert cfg.num_es == 6
    assert cfg.latency_weight + cfg.price_weight == pytest.approx(1.0)


def test_validate_config_round_trips():
    cfg = SystemConfig(num_ue=40, arrival_rate=3.5, auction_mode="exact")
    again = validate_config(config_to_dict(cfg))
    assert config_to_dict(again) == config_to_dict(cfg)


def test_weights_normalize_to_one():
    cfg = validate_config({"latency_weight": 2.0, "price_weight": 2.0})
    assert cfg.latency_weight == pytest.approx(0.5)
    assert cfg.price_weight == pytest.approx(0.5)


def test_incentive_factor_open_upper_bound():
    with pytest.raises(ConfigError, match="incentive_factor"):
        validate_config({"incentive_factor": 1.0})
    cfg = validate_config({"incentive_factor": 0.999})
    assert cfg.incentive_factor == pytest.approx(0.999)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        validate_config({"no_such_field": 1})


def test_none_value_rejected():
    with pytest.raises(ConfigError):
        validate_config({"num_ue": None})


def test_integer_fields_reject_fractions_and_strings():
    with pytest.raises(ConfigError):
        validate_config({"num_es": 2.5})
    with pytest.raises(ConfigError):
        validate_config({"num_es": "2"})
    cfg = validate_config({"num_es": 2.0})
    assert cfg.num_es == 2


def test_mode_fields_validated():
    with pytest.raises(ConfigError, match="auction_mode"):
        validate_config({"auction_mode": "fast"})
    with pytest.raises(ConfigError, match="execution_mode"):
        validate_config({"execution_mode": "parallel"})


def test_range_bounds_enforced():
    with pytest.raises(ConfigError):
        validate_config({"deadline_min": 0.2, "deadline_max": 0.1})
    with pytest.raises(ConfigError):
        validate_config({"num_tasks": 0})
    with pytest.raises(ConfigError):
        validate_config({"split_step": 0.0})
    with pytest.raises(ConfigError):
        validate_config({"seed": -1})


def test_zero_weights_rejected():
    with pytest.raises(ConfigError):
        validate_config({"latency_weight": 0.0, "price_weight": 0.0})


def test_replace_revalidates():
    cfg = SystemConfig()
    bumped = cfg.replace(num_ue=10)
    assert bumped.num_ue == 10
    assert cfg.num_ue == 115
    with pytest.raises(ConfigError):
        cfg.replace(num_ue=-1)


def test_infinite_budget_allowed():
    cfg = validate_config({"ue_budget": math.inf})
    assert math.isinf(cfg.ue_budget)

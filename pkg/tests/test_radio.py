"""Placement, channel model, rates, and latency composition."""
import math

import numpy as np
import pytest

from edgemarket import SystemConfig, dbm_to_watts
from edgemarket.model import EdgeServer, Task, UserEquipment
from edgemarket.radio import (
    draw_subchannels,
    expected_rate,
    latency_breakdown,
    place_entities,
    remote_processing_time,
    sinr,
    subchannel_pmf,
    subchannel_request_rate,
    transmission_rate,
    transmission_time,
)

from conftest import make_topology


# ---------------------------------------------------------------------------
# placement


def test_place_entities_deterministic():
    cfg = SystemConfig()
    a = place_entities(cfg, 7)
    b = place_entities(cfg, 7)
    np.testing.assert_array_equal(a.ue_positions, b.ue_positions)
    np.testing.assert_array_equal(a.es_positions, b.es_positions)
    np.testing.assert_array_equal(a.channel_gain, b.channel_gain)
    np.testing.assert_array_equal(a.subchannels, b.subchannels)
    assert a.coverage == b.coverage
    assert a.serving == b.serving


def test_place_entities_seed_changes_draw():
    cfg = SystemConfig()
    a = place_entities(cfg, 0)
    b = place_entities(cfg, 1)
    assert a.n_ue != b.n_ue or not np.array_equal(a.ue_positions, b.ue_positions)


def test_zero_intensity_places_no_devices():
    cfg = SystemConfig(ue_intensity=0.0)
    topo = place_entities(cfg, 0)
    assert topo.n_ue == 0
    assert topo.n_es >= 1


def test_device_count_capped():
    cfg = SystemConfig(num_ue=3, ue_intensity=1e-3)  # mean far above the cap
    for seed in range(5):
        assert place_entities(cfg, seed).n_ue == 3


def test_positions_inside_region():
    cfg = SystemConfig()
    topo = place_entities(cfg, 3)
    assert (topo.ue_positions >= 0.0).all()
    assert (topo.ue_positions <= cfg.region_side).all()
    assert (topo.es_positions >= 0.0).all()
    assert (topo.es_positions <= cfg.region_side).all()


def test_serving_is_nearest_covering_server():
    cfg = SystemConfig()
    topo = place_entities(cfg, 5)
    for i in range(topo.n_ue):
        dists = np.linalg.norm(topo.es_positions - topo.ue_positions[i], axis=1)
        covering = np.nonzero(dists <= cfg.coverage_radius)[0]
        if len(covering) == 0:
            assert topo.serving[i] == -1
        else:
            assert topo.serving[i] == covering[np.argmin(dists[covering])]
            assert i in topo.coverage[topo.serving[i]]


# ---------------------------------------------------------------------------
# sub-channels


def test_subchannel_pmf_reference_values():
    assert subchannel_pmf(0, 3.0) == pytest.approx(math.exp(-3.0))
    assert subchannel_pmf(2, 2.0) == pytest.approx(2.0 * math.exp(-2.0))
    assert subchannel_pmf(2, 1.0, epoch=2.0) == pytest.approx(
        2.0 * math.exp(-2.0))


def test_subchannel_pmf_normalizes():
    for rate in (0.5, 2.0, 11.11):
        total = sum(subchannel_pmf(n, rate) for n in range(200))
        assert abs(total - 1.0) < 1e-9


def test_subchannel_pmf_rejects_bad_arguments():
    with pytest.raises(ValueError):
        subchannel_pmf(-1, 2.0)
    with pytest.raises(ValueError):
        subchannel_pmf(0, -0.1)


def test_subchannel_request_rate_spreads_pool():
    cfg = SystemConfig(num_subchannels=100, mean_subchannel_request=2.0)
    assert subchannel_request_rate(cfg, 20) == pytest.approx(10.0)
    cfg_one = SystemConfig(num_subchannels=100, mean_subchannel_request=1.0)
    assert subchannel_request_rate(cfg_one, 100) == pytest.approx(1.0)
    with pytest.raises(ZeroDivisionError):
        subchannel_request_rate(cfg, 0)


def test_draw_subchannels_within_clamp():
    cfg = SystemConfig()
    topo = place_entities(cfg, 2)
    counts = draw_subchannels(topo, cfg, 11)
    assert (counts >= cfg.subchannel_min).all()
    assert (counts <= cfg.subchannel_max).all()
    np.testing.assert_array_equal(counts, draw_subchannels(topo, cfg, 11))


def test_draw_subchannels_degenerate_clamp():
    cfg = SystemConfig(subchannel_min=1, subchannel_max=1)
    topo = place_entities(cfg, 4)
    assert (draw_subchannels(topo, cfg, 0) == 1).all()


def test_draw_subchannels_trims_to_pool():
    # six devices on one server with a four-channel pool: the trim pass
    # walks everyone down to the floor of one channel each
    cfg = SystemConfig(num_subchannels=4, mean_subchannel_request=4.0)
    topo = make_topology(np.ones((6, 1)))
    counts = draw_subchannels(topo, cfg, 9)
    assert (counts == 1).all()


# ---------------------------------------------------------------------------
# SINR and rates


def test_sinr_no_interferers_is_snr():
    cfg = SystemConfig()
    topo = make_topology([[2.0]])
    power = dbm_to_watts(cfg.tx_power_dbm)
    assert sinr(0, 0, topo, cfg) == pytest.approx(
        power * 2.0 / cfg.noise_variance)


def test_sinr_symmetric_pair_tends_to_one():
    cfg = SystemConfig(noise_variance=1e-30)
    topo = make_topology([[0.5], [0.5]])
    assert sinr(0, 0, topo, cfg, transmitting={0, 1}) == pytest.approx(1.0)


def test_sinr_three_device_hand_value():
    cfg = SystemConfig()
    gains = [[4.0], [1.0], [0.5]]
    topo = make_topology(gains)
    power = dbm_to_watts(cfg.tx_power_dbm)
    expected = power * 4.0 / (power * 1.5 + cfg.noise_variance)
    assert sinr(0, 0, topo, cfg, transmitting={0, 1, 2}) == pytest.approx(expected)


def test_interference_monotonicity():
    cfg = SystemConfig()
    topo = make_topology([[1.0], [0.7], [0.3]])
    two = sinr(0, 0, topo, cfg, transmitting={0, 1})
    three = sinr(0, 0, topo, cfg, transmitting={0, 1, 2})
    assert three < two


def test_transmission_rate_shannon_point():
    # one of ten sub-channels over 10 MHz is a 1 MHz share; SINR 3 gives
    # log2(4) = 2 bits/s/Hz, so 2 Mbps
    cfg = SystemConfig(bandwidth=10e6, num_subchannels=10)
    power = dbm_to_watts(cfg.tx_power_dbm)
    gain = 3.0 * cfg.noise_variance / power
    topo = make_topology([[gain]])
    assert transmission_rate(0, 0, topo, cfg) == pytest.approx(2e6, rel=1e-9)


def test_transmission_rate_zero_at_zero_sinr():
    cfg = SystemConfig()
    topo = make_topology([[0.0]])
    assert transmission_rate(0, 0, topo, cfg) == 0.0


def test_default_regime_rate_band():
    # served devices land in the low-megabit band on the default geometry
    cfg = SystemConfig()
    rates = []
    for seed in range(3):
        topo = place_entities(cfg, seed)
        rates += [
            transmission_rate(i, topo.serving[i], topo, cfg)
            for i in range(topo.n_ue) if topo.serving[i] >= 0
        ]
    assert rates
    assert min(rates) > 1e6
    assert max(rates) < 2e7


def test_expected_rate_scales_with_offload_probability():
    cfg = SystemConfig()
    topo = make_topology([[1.0]])
    full = expected_rate(0, 0, topo, cfg, offload_prob=1.0)
    assert full == pytest.approx(transmission_rate(0, 0, topo, cfg))
    assert expected_rate(0, 0, topo, cfg, offload_prob=0.5) == pytest.approx(
        0.5 * full)
    assert expected_rate(0, 0, topo, cfg, offload_prob=0.0) == 0.0


# ---------------------------------------------------------------------------
# timing pieces


def test_transmission_time_round_trip_factor():
    assert transmission_time(0.5, 8e6, 4e6) == pytest.approx(2.0)
    assert transmission_time(1.0, 1e6, 1e6) == pytest.approx(2.0)
    assert transmission_time(0.0, 1e6, 0.0) == 0.0


def test_transmission_time_monotone():
    base = transmission_time(0.5, 1e6, 2e6)
    assert transmission_time(0.6, 1e6, 2e6) > base
    assert transmission_time(0.5, 2e6, 2e6) > base
    assert transmission_time(0.5, 1e6, 4e6) < base


def test_transmission_time_rejects_dead_link():
    with pytest.raises(ValueError):
        transmission_time(0.5, 1e6, 0.0)


def test_remote_processing_reference_point():
    task = Task(id=0, arrival_time=0.0, size=1e6, complexity=1000.0,
                deadline=5.0)
    es = EdgeServer(id=0, position=(0.0, 0.0), speed_per_unit=1e9)
    assert remote_processing_time(1.0, task, 1, es) == pytest.approx(1.0)
    assert remote_processing_time(1.0, task, 2, es) == pytest.approx(0.5)
    assert remote_processing_time(0.0, task, 0, es) == 0.0
    with pytest.raises(ValueError):
        remote_processing_time(0.5, task, 0, es)


def test_latency_breakdown_pure_strategies():
    cfg = SystemConfig()
    ue = UserEquipment(id=0, position=(0.0, 0.0), local_speed=1e9)
    es = EdgeServer(id=0, position=(0.0, 0.0), speed_per_unit=1e9)
    remote = Task(id=0, arrival_time=0.0, size=1e6, complexity=1000.0,
                  deadline=5.0, split=1.0)
    out = latency_breakdown(remote, ue, es, 1, cfg, rate=1e6)
    assert out.local_total == 0.0
    assert out.total == pytest.approx(out.offload_total)
    local = Task(id=1, arrival_time=0.0, size=1e6, complexity=1000.0,
                 deadline=5.0, split=0.0)
    out = latency_breakdown(local, ue, es, 0, cfg, rate=1e6)
    assert out.offload_total == 0.0
    assert out.total == pytest.approx(out.local_total)


def test_latency_breakdown_execution_modes():
    # tuned so the offloaded share takes 2 s and the local share 3 s
    ue = UserEquipment(id=0, position=(0.0, 0.0), local_speed=1e9)
    es = EdgeServer(id=0, position=(0.0, 0.0), speed_per_unit=1e9)
    task = Task(id=0, arrival_time=0.0, size=2e6, complexity=1000.0,
                deadline=10.0, split=0.5, local_time=6.0)
    # tx: 2 * 0.5 * 2e6 / 2e6 = 1 s; remote: 2e9 * 0.5 / 1e9 = 1 s
    concurrent = latency_breakdown(
        task, ue, es, 1, SystemConfig(execution_mode="concurrent"), rate=2e6)
    assert concurrent.offload_total == pytest.approx(2.0)
    assert concurrent.local_total == pytest.approx(3.0)
    assert concurrent.total == pytest.approx(3.0)
    sequential = latency_breakdown(
        task, ue, es, 1, SystemConfig(execution_mode="sequential"), rate=2e6)
    assert sequential.total == pytest.approx(5.0)


def test_latency_breakdown_concurrent_dominates_parts():
    cfg = SystemConfig()
    ue = UserEquipment(id=0, position=(0.0, 0.0))
    es = EdgeServer(id=0, position=(0.0, 0.0))
    task = Task(id=0, arrival_time=0.0, size=3e6, complexity=1000.0,
                deadline=9.0, split=0.7, local_time=4.0)
    out = latency_breakdown(task, ue, es, 2, cfg, rate=1.5e6)
    assert out.total >= out.offload_total
    assert out.total >= out.local_total

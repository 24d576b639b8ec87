"""Wireless geometry and latency model.

Devices and servers are dropped by independent Poisson point processes on
a square region.  Each server covers a disk; a covered device is served
by its nearest covering server and holds a Poisson-distributed number of
OFDMA sub-channels.  Uplink quality is distance pathloss with a static
unit-mean exponential fade drawn once per topology (no time variation),
and the up/down round trip is charged as twice the one-way transfer.

Sub-channels are orthogonal, so by default a transmission sees only
receiver noise.  Callers that model co-channel reuse pass the set of
simultaneously transmitting devices explicitly (the devices with a
nonzero offload split); interference then sums over that set.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .model import EdgeServer, SystemConfig, Task, UserEquipment, dbm_to_watts

__all__ = [
    "Topology",
    "LatencyBreakdown",
    "place_entities",
    "subchannel_request_rate",
    "subchannel_pmf",
    "draw_subchannels",
    "sinr",
    "transmission_rate",
    "expected_rate",
    "transmission_time",
    "remote_processing_time",
    "latency_breakdown",
    "export_topology",
    "export_channel_gains",
]

# Pathloss reference distance in meters; gains are clamped below it so a
# device sitting on top of a server does not get an infinite channel.
_REFERENCE_DISTANCE = 1.0


@dataclass(frozen=True, eq=False)
class Topology:
    """One placement draw: positions, channel gains, coverage, sub-channels.

    ``channel_gain[i, j]`` is the power gain from device i to server j,
    ``coverage[j]`` the tuple of device ids inside server j's disk, and
    ``serving[i]`` the nearest covering server of device i (-1 when the
    device is outside every disk).
    """

    ue_positions: np.ndarray        # (n_ue, 2) meters
    es_positions: np.ndarray        # (n_es, 2) meters
    channel_gain: np.ndarray        # (n_ue, n_es) linear power gain
    subchannels: np.ndarray         # (n_ue,) sub-channels held per device
    coverage: tuple                 # per server: tuple of covered device ids
    serving: tuple                  # per device: serving server id or -1

    @property
    def n_ue(self) -> int:
        return len(self.ue_positions)

    @property
    def n_es(self) -> int:
        return len(self.es_positions)


@dataclass(frozen=True)
class LatencyBreakdown:
    """Latency components of one task under a given split and allocation."""

    tx_time: float          # round-trip transfer of the offloaded share
    remote_proc: float      # processing time on the allocated units
    local_proc: float       # full-task local processing time
    offload_total: float    # tx_time + remote_proc
    local_total: float      # local share processing time
    total: float            # per execution mode: max (concurrent) or sum


def place_entities(cfg: SystemConfig, seed: int) -> Topology:
    """Draw one topology: PPP placement, fades, coverage, sub-channels.

    Device count is Poisson(ue_intensity * area) capped at ``num_ue``;
    server count is Poisson(es_intensity * area) floored at one server.
    Deterministic for a given (cfg, seed).
    """
    if cfg.region_side <= 0:
        raise ValueError("region has zero area")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    area = cfg.region_side**2
    n_ue = int(min(cfg.num_ue, rng.poisson(cfg.ue_intensity * area)))
    n_es = int(max(1, rng.poisson(cfg.es_intensity * area)))
    ue_pos = rng.uniform(0.0, cfg.region_side, size=(n_ue, 2))
    es_pos = rng.uniform(0.0, cfg.region_side, size=(n_es, 2))

    if n_ue:
        diff = ue_pos[:, None, :] - es_pos[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
    else:
        dist = np.zeros((0, n_es))
    fade = rng.exponential(1.0, size=dist.shape)
    gains = np.maximum(dist, _REFERENCE_DISTANCE) ** (-cfg.pathloss_exponent) * fade

    coverage = tuple(
        tuple(int(i) for i in np.nonzero(dist[:, j] <= cfg.coverage_radius)[0])
        for j in range(n_es)
    )
    serving = []
    for i in range(n_ue):
        covering = np.nonzero(dist[i] <= cfg.coverage_radius)[0]
        if len(covering) == 0:
            serving.append(-1)
        else:
            serving.append(int(covering[np.argmin(dist[i][covering])]))
    serving = tuple(serving)

    topo = Topology(
        ue_positions=ue_pos,
        es_positions=es_pos,
        channel_gain=gains,
        subchannels=np.zeros(n_ue, dtype=np.int64),
        coverage=coverage,
        serving=serving,
    )
    sub_seed = int(rng.integers(0, 2**63 - 1))
    return replace(topo, subchannels=draw_subchannels(topo, cfg, sub_seed))


def subchannel_request_rate(cfg: SystemConfig, n_ue_covered: int) -> float:
    """Mean of the per-device sub-channel request law for one server.

    The server spreads its sub-channel pool over the devices it covers:
    rate = (num_subchannels / covered devices) * mean_subchannel_request.
    An empty coverage set raises a division error so callers skip the
    server instead of silently working with an undefined rate.
    """
    if n_ue_covered == 0:
        raise ZeroDivisionError("sub-channel request rate undefined for empty coverage")
    return cfg.num_subchannels / n_ue_covered * cfg.mean_subchannel_request


def subchannel_pmf(n: int, rate: float, epoch: float = 1.0) -> float:
    """Poisson probability of requesting exactly n sub-channels in an epoch."""
    if n < 0:
        raise ValueError("sub-channel count must be >= 0")
    if rate < 0 or epoch <= 0:
        raise ValueError("rate must be >= 0 and epoch positive")
    mean = rate * epoch
    # multiply term by term instead of forming mean**n / n!, which
    # overflows long before the probability itself underflows
    prob = math.exp(-mean)
    for k in range(1, n + 1):
        prob *= mean / k
    return prob


def draw_subchannels(topology: Topology, cfg: SystemConfig, seed: int) -> np.ndarray:
    """Draw each device's sub-channel count, clamped to the configured range.

    Covered devices draw from their serving server's request law; devices
    outside every disk draw from the region-wide average so the per-device
    invariant (count within [subchannel_min, subchannel_max]) still holds.
    A final pass trims the largest draws wherever a server's covered
    devices would jointly exceed the sub-channel pool.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n_ue = topology.n_ue
    counts = np.zeros(n_ue, dtype=np.int64)
    fallback = cfg.num_subchannels / max(n_ue, 1) * cfg.mean_subchannel_request
    for i in range(n_ue):
        es = topology.serving[i]
        rate = fallback if es < 0 else subchannel_request_rate(cfg, len(topology.coverage[es]))
        draw = rng.poisson(rate)
        counts[i] = min(max(draw, cfg.subchannel_min), cfg.subchannel_max)
    for j in range(topology.n_es):
        members = [i for i in topology.coverage[j] if topology.serving[i] == j]
        while members and counts[members].sum() > cfg.num_subchannels:
            top = max(members, key=lambda i: (counts[i], i))
            if counts[top] <= max(cfg.subchannel_min, 1):
                break
            counts[top] -= 1
    return counts


def sinr(ue: int, es: int, topology: Topology, cfg: SystemConfig,
         transmitting=None) -> float:
    """Uplink SINR of a device at a server.

    ``transmitting`` is the set of device ids concurrently transmitting
    (those with a nonzero offload split); their power is summed as
    interference.  The default is no interferers: sub-channels are
    orthogonal, so only noise remains.
    """
    power = dbm_to_watts(cfg.tx_power_dbm)
    signal = power * float(topology.channel_gain[ue, es])
    interference = 0.0
    if transmitting is not None:
        for k in transmitting:
            if k != ue:
                interference += power * float(topology.channel_gain[k, es])
    return signal / (interference + cfg.noise_variance)


def transmission_rate(ue: int, es: int, topology: Topology, cfg: SystemConfig,
                      transmitting=None) -> float:
    """Shannon uplink rate over the device's sub-channels, bits/second."""
    band = topology.subchannels[ue] * cfg.bandwidth / cfg.num_subchannels
    return band * math.log2(1.0 + sinr(ue, es, topology, cfg, transmitting))


def expected_rate(ue: int, es: int, topology: Topology, cfg: SystemConfig,
                  offload_prob: float | None = None, transmitting=None) -> float:
    """Participation-weighted uplink rate.

    The only random element is whether the device transmits at all, so the
    expectation scales the Shannon term by the offload probability.
    """
    q = cfg.offload_prob if offload_prob is None else offload_prob
    if not 0.0 <= q <= 1.0:
        raise ValueError("offload probability must lie in [0, 1]")
    return q * transmission_rate(ue, es, topology, cfg, transmitting)


def transmission_time(split: float, size: float, rate: float) -> float:
    """Round-trip transfer time of the offloaded share of a task.

    The factor 2 charges the uplink of inputs and downlink of results at
    the same rate.  A zero split transfers nothing and costs nothing even
    with no usable link; a positive split over a zero-rate link is an
    error rather than an infinite latency.
    """
    if not 0.0 <= split <= 1.0:
        raise ValueError("split must lie in [0, 1]")
    if size <= 0:
        raise ValueError("size must be positive")
    if split == 0.0:
        return 0.0
    if rate <= 0:
        raise ValueError("positive split needs a positive rate")
    return 2.0 * split * size / rate


def remote_processing_time(split: float, task: Task, allocated_units: int,
                           es: EdgeServer) -> float:
    """Time to process the offloaded share on the allocated server units."""
    if not 0.0 <= split <= 1.0:
        raise ValueError("split must lie in [0, 1]")
    if split == 0.0:
        return 0.0
    if allocated_units <= 0:
        raise ValueError("positive split needs allocated units")
    return task.complexity * split * task.size / (allocated_units * es.speed_per_unit)


def _local_full_time(task: Task, ue: UserEquipment) -> float:
    """Full-task local processing time: sampled if present, else derived."""
    if task.local_time is not None:
        return task.local_time
    return task.cycles / ue.local_speed


def latency_breakdown(task: Task, ue: UserEquipment, es: EdgeServer,
                      allocated_units: int, cfg: SystemConfig,
                      rate: float) -> LatencyBreakdown:
    """All latency components of a task at its current split.

    ``rate`` is the uplink rate toward the chosen server (from
    :func:`transmission_rate`).  Concurrent execution overlaps the local
    and offloaded shares (total = max); sequential execution adds them.
    """
    tx = transmission_time(task.split, task.size, rate)
    remote = remote_processing_time(task.split, task, allocated_units, es)
    offload_total = tx + remote
    local_proc = _local_full_time(task, ue)
    local_total = (1.0 - task.split) * local_proc
    if cfg.execution_mode == "concurrent":
        total = max(offload_total, local_total)
    else:
        total = offload_total + local_total
    return LatencyBreakdown(
        tx_time=tx,
        remote_proc=remote,
        local_proc=local_proc,
        offload_total=offload_total,
        local_total=local_total,
        total=total,
    )


def export_topology(topology: Topology, path) -> None:
    """Write entity positions and sub-channel counts as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["entity_type", "id", "x_m", "y_m", "n_sc"])
        for j in range(topology.n_es):
            x, y = topology.es_positions[j]
            writer.writerow(["es", j, repr(float(x)), repr(float(y)), ""])
        for i in range(topology.n_ue):
            x, y = topology.ue_positions[i]
            writer.writerow(["ue", i, repr(float(x)), repr(float(y)),
                             int(topology.subchannels[i])])


def export_channel_gains(topology: Topology, path) -> None:
    """Write the device-to-server gain matrix as CSV (one row per device)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ue_id"] + [f"es_{j}" for j in range(topology.n_es)])
        for i in range(topology.n_ue):
            writer.writerow([i] + [repr(float(g)) for g in topology.channel_gain[i]])

"""Experiment harness: workloads, scenarios, and metrics emission.

A run places a topology, generates or loads a workload, queues tasks on
their owning devices, and clears the market in epochs: each epoch every
device with a pending task bids for its head task, the auction allocates
server units, and served tasks leave their queues.  Per-run metrics
(welfare, success rate, latency, auction-core runtime, market slack) are
collected into rows with one stable column set for every scenario, so a
single delimited file can redraw any registered figure.

Scenario-facing notes:

* social welfare is accounted as allocated declared value minus seller
  provisioning cost, which equals the payoff-sum definition for
  risk-neutral deterministic participants (payments are pure transfers);
* the success-rate scenarios fix the number of epochs so total service
  capacity stays constant while the request count sweeps;
* deadline ranges in the bundled scenarios are widened from the config
  defaults to spans the radio model can actually meet, keeping deadline
  feasibility a live constraint instead of a wall.
"""
from __future__ import annotations

import csv
import math
import time
from collections import deque
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .auction import (
    AuctionState,
    BestResponseGrid,
    BuyerBid,
    SellerAsk,
    determine_winners,
    incentive_payment,
    run_to_equilibrium,
    screen_participants,
)
from .market import demand_units
from .model import EdgeServer, SystemConfig, Task, UserEquipment, dbm_to_watts
from .radio import Topology, place_entities, transmission_rate

__all__ = [
    "Workload",
    "TraceRecord",
    "MetricsRow",
    "ServiceRecord",
    "generate_workload",
    "load_trace",
    "convert_raw_trace",
    "build_population",
    "simulate_run",
    "success_rate",
    "run_scenario",
    "scenario_names",
    "emit_csv",
    "read_metrics_csv",
]


@dataclass(frozen=True)
class TraceRecord:
    """One parsed row of the four-column workload trace."""

    job_id: int
    submit_time: float
    runtime: float
    num_procs: int


@dataclass(frozen=True)
class Workload:
    """A task stream plus where it came from."""

    tasks: tuple
    source: str = "synthetic"
    horizon: float | None = None


@dataclass(frozen=True)
class ServiceRecord:
    """How one task left the system."""

    task_id: int
    offloaded: bool
    latency: float
    deadline_met: bool


@dataclass
class MetricsRow:
    """One output row; the column order below is the file column order."""

    scenario: str
    seed: int
    num_tasks: int
    num_ues: int
    social_welfare: float
    success_rate: float
    mean_latency: float
    runtime_ms: float
    iterations_to_converge: int = 0
    oversupply: int = 0
    unmet_demand: int = 0
    method: str = "vcg"
    param_name: str = ""
    param_value: float = math.nan
    aux: float = math.nan


_METRICS_COLUMNS = [f.name for f in fields(MetricsRow)]


# ---------------------------------------------------------------------------
# workload generation and traces


def generate_workload(cfg: SystemConfig, seed: int, *, num_tasks: int | None = None,
                      horizon: float | None = None, n_ues: int = 1) -> Workload:
    """Draw a Poisson task stream.

    Inter-arrivals are exponential at the configured rate.  Without a
    horizon, exactly ``num_tasks`` tasks are drawn; with one, arrivals
    stop at the horizon and the count is still capped at ``num_tasks``.
    Sizes, deadlines, and owners are uniform; the sampled full-task local
    processing time is attached unless the config says to derive it from
    device speed.
    """
    cap = cfg.num_tasks if num_tasks is None else num_tasks
    if cap < 0:
        raise ValueError("num_tasks must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    tasks = []
    now = 0.0
    while len(tasks) < cap:
        now += rng.exponential(1.0 / cfg.arrival_rate)
        if horizon is not None and now > horizon:
            break
        local_time = None
        if cfg.local_time_mode == "sampled":
            local_time = float(rng.uniform(cfg.local_time_min, cfg.local_time_max))
        tasks.append(Task(
            id=len(tasks),
            arrival_time=now,
            size=float(rng.uniform(cfg.task_size_min, cfg.task_size_max)),
            complexity=cfg.task_complexity,
            deadline=float(rng.uniform(cfg.deadline_min, cfg.deadline_max)),
            split=1.0,
            owner_ue=int(rng.integers(n_ues)) if n_ues > 0 else 0,
            local_time=local_time,
        ))
    return Workload(tasks=tuple(tasks), source="synthetic", horizon=horizon)


_TRACE_HEADER = ["job_id", "submit_time", "runtime", "num_procs"]


def load_trace(path, cfg: SystemConfig, *, cycles_per_second: float = 1e6,
               max_tasks: int | None = None) -> Workload:
    """Load a four-column workload trace into tasks.

    A row's runtime at ``cycles_per_second`` gives the task's compute
    demand, hence its size at the configured complexity.  ``num_procs``
    (capped by the demand cap) sets the deadline so the task asks for
    exactly that many units.  Rows must be well formed; a non-positive
    runtime or processor count is a parse error naming the row.  Tasks
    keep submit order; at most ``max_tasks`` (default: the configured
    task count) are kept.
    """
    cap = cfg.num_tasks if max_tasks is None else max_tasks
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("trace is empty")
        if [h.strip() for h in header] != _TRACE_HEADER:
            raise ValueError(f"trace header must be {','.join(_TRACE_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise ValueError(f"trace row {line_no}: expected 4 columns")
            try:
                rec = TraceRecord(
                    job_id=int(row[0]), submit_time=float(row[1]),
                    runtime=float(row[2]), num_procs=int(row[3]))
            except ValueError:
                raise ValueError(
                    f"trace row {line_no}: malformed values {row!r}") from None
            if rec.submit_time < 0:
                raise ValueError(f"trace row {line_no}: negative submit_time")
            if rec.runtime <= 0:
                raise ValueError(f"trace row {line_no}: runtime must be positive")
            if rec.num_procs <= 0:
                raise ValueError(f"trace row {line_no}: num_procs must be positive")
            records.append(rec)
    if not records:
        raise ValueError("trace has no data rows")
    records.sort(key=lambda r: (r.submit_time, r.job_id))
    tasks = []
    for rec in records[:cap]:
        cycles = rec.runtime * cycles_per_second
        size = cycles / cfg.task_complexity
        units = min(rec.num_procs, cfg.demand_cap)
        # a deadline just under the units-1/2 remote time makes the task
        # request exactly `units` server units
        deadline = cycles / ((units - 0.5) * cfg.es_speed_per_unit)
        tasks.append(Task(
            id=len(tasks), arrival_time=rec.submit_time, size=size,
            complexity=cfg.task_complexity, deadline=deadline, split=1.0,
            owner_ue=0, local_time=None))
    return Workload(tasks=tuple(tasks), source=str(path), horizon=None)


def convert_raw_trace(in_path, out_path, *, max_rows: int | None = None) -> int:
    """Convert a whitespace workload archive dump to the four-column CSV.

    Recipe: comment lines (starting with ';' or '#') and blanks are
    skipped; of each remaining line, fields 1, 2, 4, and 5 are taken as
    job id, submit time, runtime, and processor count (the standard
    archive column order), and rows with non-positive runtime or
    processor count are dropped.  Returns the number of rows written.
    """
    written = 0
    with open(in_path) as src, open(out_path, "w", newline="") as dst:
        writer = csv.writer(dst)
        writer.writerow(_TRACE_HEADER)
        for line in src:
            line = line.strip()
            if not line or line.startswith((";", "#")):
                continue
            parts = line.split()
            if len(parts) < 5:
                continue
            try:
                job_id = int(parts[0])
                submit = float(parts[1])
                runtime = float(parts[3])
                procs = int(parts[4])
            except ValueError:
                continue
            if runtime <= 0 or procs <= 0 or submit < 0:
                continue
            writer.writerow([job_id, repr(float(submit)), repr(float(runtime)),
                             procs])
            written += 1
            if max_rows is not None and written >= max_rows:
                break
    return written


# ---------------------------------------------------------------------------
# population and one market run


def build_population(cfg: SystemConfig, seed: int):
    """Place a topology and instantiate the devices and servers on it."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    topo_seed = int(rng.integers(0, 2**63 - 1))
    topo = place_entities(cfg, topo_seed)
    ues = [
        UserEquipment(
            id=i, position=(float(topo.ue_positions[i][0]),
                            float(topo.ue_positions[i][1])),
            budget=cfg.ue_budget, local_speed=cfg.ue_local_speed,
            offload_prob=cfg.offload_prob,
            tx_power=dbm_to_watts(cfg.tx_power_dbm))
        for i in range(topo.n_ue)
    ]
    servers = []
    for j in range(topo.n_es):
        frac = float(rng.uniform())
        available = int(round(frac * cfg.es_capacity))
        servers.append(EdgeServer(
            id=j, position=(float(topo.es_positions[j][0]),
                            float(topo.es_positions[j][1])),
            capacity=cfg.es_capacity, available=available,
            speed_per_unit=cfg.es_speed_per_unit,
            reserve_price=float(rng.uniform(cfg.reserve_price_min,
                                            cfg.reserve_price_max)),
            unit_cost=float(rng.uniform(cfg.unit_cost_min, cfg.unit_cost_max)),
            coverage_radius=cfg.coverage_radius,
            participation=True))
    return topo, ues, servers


@dataclass
class RunSummary:
    """Aggregates one simulate_run produces."""

    num_tasks: int = 0
    num_ues: int = 0
    social_welfare: float = 0.0
    success: float = 0.0
    mean_latency: float = math.nan
    runtime_ms: float = 0.0
    oversupply: int = 0
    unmet_demand: int = 0
    served: list = field(default_factory=list)


def _offload_latency(task, units, rate, cfg):
    return 2.0 * task.size / rate + task.cycles / (units * cfg.es_speed_per_unit)


def _epoch_bids(heads, topo, ues, servers, valuations, cfg):
    """Bids plus screening latencies for the devices with a pending task."""
    bids, latencies = [], {}
    for ue_id, task in heads.items():
        units = demand_units(task, cfg)
        eligible = frozenset(
            s.id for s in servers
            if s.participation and ue_id in topo.coverage[s.id])
        serving = topo.serving[ue_id]
        participation = bool(eligible) and serving >= 0
        if participation:
            rate = transmission_rate(ue_id, serving, topo, cfg)
            if rate <= 0:
                participation = False
            else:
                latencies[ue_id] = _offload_latency(task, units, rate, cfg)
        bids.append(BuyerBid(
            ue_id=ue_id, demand=units, valuation=valuations[task.id],
            deadline=task.deadline, budget=ues[ue_id].budget, fraction=task.split,
            offload_prob=cfg.offload_prob, participation=participation,
            eligible_es=eligible))
    return bids, latencies


def _epoch_asks(servers):
    return [
        SellerAsk(es_id=s.id, available=s.available,
                  reserve_price=s.reserve_price, unit_cost=s.unit_cost,
                  participation=s.participation)
        for s in servers
    ]


def _lowprice_allocate(bids, asks):
    """Baseline: devices in id order take the cheapest server that fits
    and covers them, provided the bundle clears its reserve price."""
    capacity = {a.es_id: a.available for a in asks if a.participation}
    order = sorted((a for a in asks if a.participation),
                   key=lambda a: (a.reserve_price, a.es_id))
    allocation = {}
    for bid in sorted(bids, key=lambda b: b.ue_id):
        if not bid.participation or bid.demand <= 0:
            continue
        for ask in order:
            if bid.eligible_es is not None and ask.es_id not in bid.eligible_es:
                continue
            if capacity[ask.es_id] < bid.demand:
                continue
            if bid.valuation < ask.reserve_price:
                continue
            allocation[bid.ue_id] = (ask.es_id, bid.demand)
            capacity[ask.es_id] -= bid.demand
            break
    return allocation


def simulate_run(cfg: SystemConfig, seed: int, *, num_tasks: int | None = None,
                 epochs: int | None = None, method: str = "vcg",
                 compute_payments: bool = False,
                 count_local: bool = False) -> RunSummary:
    """Run the epoch pipeline once and aggregate its metrics.

    ``epochs`` defaults to enough rounds to offer every task once;
    fixing it caps total service capacity instead.  ``method`` selects
    the mechanism ("vcg") or the lowest-price baseline ("lowprice").
    Payments are skipped unless requested: welfare accounting does not
    need them, and the pivot re-runs dominate the auction-core runtime.
    """
    if method not in ("vcg", "lowprice"):
        raise ValueError(f"unknown method: {method}")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xE49)))
    topo, ues, servers = build_population(cfg, seed)
    workload = generate_workload(
        cfg, int(rng.integers(0, 2**63 - 1)),
        num_tasks=num_tasks, n_ues=max(topo.n_ue, 1))
    summary = RunSummary(num_tasks=len(workload.tasks), num_ues=topo.n_ue)
    if topo.n_ue == 0 or not workload.tasks:
        summary.success = 0.0
        return summary
    valuations = {
        t.id: float(v) for t, v in zip(
            workload.tasks,
            rng.uniform(cfg.valuation_min, cfg.valuation_max,
                        size=len(workload.tasks)))
    }
    queues = {ue.id: deque() for ue in ues}
    for task in workload.tasks:
        queues[task.owner_ue].append(task)
    if epochs is None:
        epochs = math.ceil(len(workload.tasks) / topo.n_ue)
    asks = _epoch_asks(servers)
    rate_cache: dict[tuple[int, int], float] = {}
    latencies_sum = 0.0
    core_seconds = 0.0
    tasks_by_id = {t.id: t for t in workload.tasks}

    for _ in range(epochs):
        heads = {ue_id: q[0] for ue_id, q in queues.items() if q}
        if not heads:
            break
        bids, latencies = _epoch_bids(heads, topo, ues, servers, valuations, cfg)
        start = time.perf_counter()
        screened_bids, screened_asks = screen_participants(bids, asks, latencies, cfg)
        if method == "vcg":
            outcome = determine_winners(screened_bids, screened_asks,
                                        cfg.auction_mode)
            if compute_payments:
                for ue_id in sorted(outcome.allocation):
                    outcome.payments[ue_id] = incentive_payment(
                        screened_bids, screened_asks, outcome, ue_id,
                        cfg.incentive_factor, cfg.auction_mode)
            allocation = outcome.allocation
            declared = outcome.declared_welfare
        else:
            allocation = _lowprice_allocate(screened_bids, screened_asks)
            declared = sum(
                valuations[heads[u].id] * units
                for u, (_, units) in allocation.items())
        core_seconds += time.perf_counter() - start

        sold: dict[int, int] = {}
        for ue_id, task in heads.items():
            if ue_id in allocation:
                es_id, units = allocation[ue_id]
                sold[es_id] = sold.get(es_id, 0) + units
                key = (ue_id, es_id)
                if key not in rate_cache:
                    rate_cache[key] = transmission_rate(ue_id, es_id, topo, cfg)
                latency = _offload_latency(task, units, rate_cache[key], cfg)
                summary.served.append(ServiceRecord(
                    task_id=task.id, offloaded=True, latency=latency,
                    deadline_met=latency <= task.deadline))
                latencies_sum += latency
            else:
                # no unit bought this epoch: the device runs the task
                # itself rather than blocking the queue behind it
                local = task.local_time if task.local_time is not None \
                    else task.cycles / cfg.ue_local_speed
                summary.served.append(ServiceRecord(
                    task_id=task.id, offloaded=False, latency=local,
                    deadline_met=local <= task.deadline))
            queues[ue_id].popleft()
        summary.social_welfare += declared - sum(
            s.unit_cost * sold.get(s.id, 0) for s in servers)
        summary.oversupply += sum(
            a.available - sold.get(a.es_id, 0)
            for a in screened_asks if a.participation)
        summary.unmet_demand += sum(
            b.demand for b in screened_bids
            if b.participation and b.ue_id not in allocation)
    summary.runtime_ms = core_seconds * 1e3
    summary.success = success_rate(summary.served, workload,
                                   count_local=count_local)
    offloaded = [r for r in summary.served if r.offloaded]
    if offloaded:
        summary.mean_latency = latencies_sum / len(offloaded)
    return summary


def success_rate(served, workload: Workload, count_local: bool = False) -> float:
    """Fraction of all requests served in time.

    Offloaded tasks count when their offload latency met the deadline;
    locally completed tasks count only when asked for.  An empty
    workload has rate 0 by convention.
    """
    total = len(workload.tasks)
    if total == 0:
        return 0.0
    good = sum(
        1 for r in served
        if r.deadline_met and (r.offloaded or count_local))
    return good / total


# ---------------------------------------------------------------------------
# scenarios


def _row(scenario, seed, summary, **overrides):
    row = MetricsRow(
        scenario=scenario, seed=seed, num_tasks=summary.num_tasks,
        num_ues=summary.num_ues, social_welfare=summary.social_welfare,
        success_rate=summary.success, mean_latency=summary.mean_latency,
        runtime_ms=summary.runtime_ms, oversupply=summary.oversupply,
        unmet_demand=summary.unmet_demand)
    for key, value in overrides.items():
        setattr(row, key, value)
    return row


# Scenario-level adjustments: a deadline span the radio model can
# actually satisfy (under the nominal config bounds no placement is
# feasible), and capacity tight enough that demand exceeds supply, so
# the allocation rule matters rather than everyone being served.
_SCENARIO_OVERRIDES = {
    "deadline_min": 1.0,
    "deadline_max": 6.0,
    "es_capacity": 8,
}


def _scenario_welfare_vs_tasks(cfg, seeds, task_counts=(1000, 2500, 5000, 7500, 10000)):
    cfg = cfg.replace(**_SCENARIO_OVERRIDES)
    rows = []
    for n in task_counts:
        for seed in seeds:
            for method in ("vcg", "lowprice"):
                summary = simulate_run(cfg, seed, num_tasks=n, method=method)
                rows.append(_row("welfare_vs_tasks", seed, summary,
                                 method=method, param_name="num_tasks",
                                 param_value=float(n)))
    return rows


def _scenario_welfare_vs_ues(cfg, seeds, ue_counts=(40, 80, 115, 160, 200)):
    base = cfg.replace(**_SCENARIO_OVERRIDES)
    area = base.region_side**2
    rows = []
    for k in ue_counts:
        local = base.replace(num_ue=k, ue_intensity=3.0 * k / area)
        for seed in seeds:
            for method in ("vcg", "lowprice"):
                summary = simulate_run(local, seed, num_tasks=cfg.num_tasks,
                                       method=method)
                rows.append(_row("welfare_vs_ues", seed, summary,
                                 method=method, param_name="num_ues",
                                 param_value=float(k)))
    return rows


def _truthfulness_instance(cfg, seed, n_others=5):
    """A small exact-mode instance with one probed bidder at true value 150."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF15)))
    bids = [BuyerBid(ue_id=0, demand=1, valuation=150.0)]
    for i in range(1, n_others + 1):
        bids.append(BuyerBid(
            ue_id=i, demand=int(rng.integers(1, 3)),
            valuation=float(rng.uniform(cfg.valuation_min, 300.0))))
    asks = [
        SellerAsk(es_id=0, available=int(rng.integers(2, 5)),
                  reserve_price=0.5, unit_cost=0.2),
        SellerAsk(es_id=1, available=int(rng.integers(2, 5)),
                  reserve_price=0.8, unit_cost=0.3),
    ]
    return AuctionState(bids=bids, asks=asks, mode="exact")


def _scenario_truthfulness(cfg, seeds, bid_range=(30.0, 300.0), step=10.0):
    from .auction.dynamics import _buyer_payoff_of, _with_valuation

    rows = []
    for seed in seeds:
        state = _truthfulness_instance(cfg, seed)
        declared = bid_range[0]
        while declared <= bid_range[1] + 1e-9:
            payoff = _buyer_payoff_of(
                _with_valuation(state.bids, 0, declared),
                state.asks, state, cfg, 0)
            summary = RunSummary(num_tasks=1, num_ues=len(state.bids))
            rows.append(_row("truthfulness", seed, summary,
                             param_name="declared_value",
                             param_value=declared, aux=payoff))
            declared += step
    return rows


def _scenario_rationality(cfg, seeds):
    from .auction.dynamics import _buyer_payoff_of, _with_valuation

    rows = []
    for seed in seeds:
        state = _truthfulness_instance(cfg, seed)
        true_value = state.true_values[0]
        for method, declared in (("truthful", true_value),
                                 ("overbid", true_value * 1.5),
                                 ("underbid", true_value * 0.5)):
            payoff = _buyer_payoff_of(
                _with_valuation(state.bids, 0, declared),
                state.asks, state, cfg, 0)
            summary = RunSummary(num_tasks=1, num_ues=len(state.bids))
            rows.append(_row("rationality", seed, summary, method=method,
                             param_name="declared_value",
                             param_value=declared, aux=payoff))
    return rows


def _scenario_success_vs_requests(cfg, seeds,
                                  request_counts=(2000, 3500, 5000, 6500, 8000),
                                  epochs=10):
    cfg = cfg.replace(**_SCENARIO_OVERRIDES)
    rows = []
    for n in request_counts:
        for seed in seeds:
            summary = simulate_run(cfg, seed, num_tasks=n, epochs=epochs)
            rows.append(_row("success_vs_requests", seed, summary,
                             param_name="num_requests", param_value=float(n)))
    return rows


def _synthetic_auction(cfg, seed, n_bidders):
    """A contention-heavy auction-core instance of a given size.

    Total capacity is about 60% of total demand, but no server is
    smaller than the demand cap, so every bid fits somewhere and the
    contest is over value rather than granularity.
    """
    rng = np.random.default_rng(np.random.SeedSequence((seed, n_bidders)))
    bids = [
        BuyerBid(ue_id=i, demand=int(rng.integers(1, cfg.demand_cap + 1)),
                 valuation=float(rng.uniform(cfg.valuation_min,
                                             cfg.valuation_max)))
        for i in range(n_bidders)
    ]
    total_demand = sum(b.demand for b in bids)
    target = max(cfg.demand_cap, int(0.6 * total_demand))
    n_servers = max(1, min(cfg.num_es, target // cfg.demand_cap))
    per_server = max(cfg.demand_cap, round(target / n_servers))
    asks = [
        SellerAsk(es_id=j, available=per_server,
                  reserve_price=float(rng.uniform(cfg.reserve_price_min,
                                                  cfg.reserve_price_max)),
                  unit_cost=float(rng.uniform(cfg.unit_cost_min,
                                              cfg.unit_cost_max)))
        for j in range(n_servers)
    ]
    return bids, asks


def time_auction_core(cfg, seed, n_bidders, mode="greedy") -> float:
    """Milliseconds for one full mechanism pass (allocation + payments)."""
    bids, asks = _synthetic_auction(cfg, seed, n_bidders)
    start = time.perf_counter()
    outcome = determine_winners(bids, asks, mode)
    for ue_id in sorted(outcome.allocation):
        incentive_payment(bids, asks, outcome, ue_id, cfg.incentive_factor, mode)
    return (time.perf_counter() - start) * 1e3


def _scenario_efficiency(cfg, seeds, ue_counts=(25, 50, 100, 200)):
    rows = []
    for k in ue_counts:
        for seed in seeds:
            ms = time_auction_core(cfg, seed, k)
            summary = RunSummary(num_tasks=0, num_ues=k, runtime_ms=ms)
            rows.append(_row("efficiency", seed, summary,
                             param_name="num_ues", param_value=float(k)))
    return rows


def build_equilibrium_state(cfg, seed, *, num_tasks: int | None = None,
                            start: str = "overbid"):
    """Market state of the first epoch, optionally with inflated opening
    declarations so the dynamics have ground to cover."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xE01)))
    topo, ues, servers = build_population(cfg, seed)
    workload = generate_workload(
        cfg, int(rng.integers(0, 2**63 - 1)),
        num_tasks=num_tasks, n_ues=max(topo.n_ue, 1))
    valuations = {
        t.id: float(v) for t, v in zip(
            workload.tasks,
            rng.uniform(cfg.valuation_min, cfg.valuation_max,
                        size=len(workload.tasks)))
    }
    queues: dict[int, deque] = {ue.id: deque() for ue in ues}
    for task in workload.tasks:
        queues[task.owner_ue].append(task)
    heads = {ue_id: q[0] for ue_id, q in queues.items() if q}
    bids, latencies = _epoch_bids(heads, topo, ues, servers, valuations, cfg)
    asks = _epoch_asks(servers)
    true_values = {b.ue_id: b.valuation for b in bids}
    if start == "overbid":
        bids = [replace(b, valuation=cfg.valuation_max) for b in bids]
    elif start != "truthful":
        raise ValueError(f"unknown start profile: {start}")
    return AuctionState(bids=bids, asks=asks, latencies=latencies,
                        true_values=true_values, mode=cfg.auction_mode)


def default_grid(cfg, points: int = 8) -> BestResponseGrid:
    return BestResponseGrid(
        valuations=tuple(float(v) for v in np.linspace(
            cfg.valuation_min, cfg.valuation_max, points)),
        prices=tuple(float(p) for p in np.linspace(
            cfg.reserve_price_min, cfg.reserve_price_max, 5)),
    )


def _scenario_convergence(cfg, seeds, *, metric: str,
                          task_counts=(5000,), scenario_name=""):
    cfg = cfg.replace(**_SCENARIO_OVERRIDES)
    grid = default_grid(cfg)
    rows = []
    for n in task_counts:
        for seed in seeds:
            state = build_equilibrium_state(cfg, seed, num_tasks=n)
            report = run_to_equilibrium(state, cfg, grid, epsilon=1e-6,
                                        max_sweeps=50)
            trace = report.cost_trace if metric == "cost" else report.welfare_trace
            for sweep, value in enumerate(trace, start=1):
                summary = RunSummary(
                    num_tasks=n, num_ues=len(state.bids),
                    social_welfare=report.welfare_trace[sweep - 1])
                rows.append(_row(
                    scenario_name, seed, summary,
                    iterations_to_converge=report.iterations,
                    param_name="iteration", param_value=float(sweep),
                    aux=value))
    return rows


def _scenario_convergence_cost(cfg, seeds):
    return _scenario_convergence(cfg, seeds, metric="cost",
                                 scenario_name="convergence_cost")


def _scenario_convergence_welfare(cfg, seeds, task_counts=(1000, 5000, 10000)):
    return _scenario_convergence(cfg, seeds, metric="welfare",
                                 task_counts=task_counts,
                                 scenario_name="convergence_welfare")


_SCENARIOS = {
    "welfare_vs_tasks": _scenario_welfare_vs_tasks,
    "welfare_vs_ues": _scenario_welfare_vs_ues,
    "truthfulness": _scenario_truthfulness,
    "rationality": _scenario_rationality,
    "success_vs_requests": _scenario_success_vs_requests,
    "efficiency": _scenario_efficiency,
    "convergence_cost": _scenario_convergence_cost,
    "convergence_welfare": _scenario_convergence_welfare,
}


def scenario_names():
    return sorted(_SCENARIOS)


def run_scenario(name: str, cfg: SystemConfig, seeds, **params):
    """Run a registered scenario over the given seeds."""
    if name not in _SCENARIOS:
        raise ValueError(
            f"unknown scenario '{name}'; available: {', '.join(scenario_names())}")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("no seeds given")
    return _SCENARIOS[name](cfg, seeds, **params)


# ---------------------------------------------------------------------------
# metrics files


def _format_cell(value):
    if isinstance(value, float):
        # plain-float repr: round-trippable and stable across runs
        return repr(float(value))
    return str(value)


def emit_csv(rows, path) -> None:
    """Write metrics rows with the stable column order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_METRICS_COLUMNS)
        for row in rows:
            writer.writerow([
                _format_cell(getattr(row, col)) for col in _METRICS_COLUMNS])


def read_metrics_csv(path):
    """Read rows written by emit_csv back into MetricsRow objects."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(MetricsRow(
                scenario=rec["scenario"], seed=int(rec["seed"]),
                num_tasks=int(rec["num_tasks"]), num_ues=int(rec["num_ues"]),
                social_welfare=float(rec["social_welfare"]),
                success_rate=float(rec["success_rate"]),
                mean_latency=float(rec["mean_latency"]),
                runtime_ms=float(rec["runtime_ms"]),
                iterations_to_converge=int(rec["iterations_to_converge"]),
                oversupply=int(rec["oversupply"]),
                unmet_demand=int(rec["unmet_demand"]),
                method=rec["method"], param_name=rec["param_name"],
                param_value=float(rec["param_value"]),
                aux=float(rec["aux"])))
    return rows

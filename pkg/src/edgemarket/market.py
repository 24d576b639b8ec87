"""Demand-supply matching between tasks and edge servers.

Each task either runs locally or offloads a split fraction to exactly one
server that reserves an integral number of compute units for it.  The
matcher minimizes the summed weighted cost of latency and money over a
discretized split grid, subject to deadline and capacity constraints:

* the local share is always the complement of the offloaded split,
* reserved units per server never exceed what the server offers,
* a matched task meets its deadline under the configured execution mode.

Tasks whose deadline no server can meet, or that no remaining capacity
can host, fall back to local execution; that is an outcome, not an error.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .model import EdgeServer, SystemConfig, Task, UserEquipment
from .radio import Topology, transmission_rate, _local_full_time

__all__ = [
    "Assignment",
    "Matching",
    "demand_units",
    "total_cost",
    "feasible_split_range",
    "match_demand_supply",
    "market_balance_report",
    "export_matching",
]


@dataclass(frozen=True)
class Assignment:
    """Where one task runs: a server with a split, or fully local."""

    task_id: int
    es_id: int | None           # None = local execution
    split: float                # offloaded fraction (0 when local)
    units: int                  # reserved compute units (0 when local)
    cost: float                 # weighted latency+money cost of the choice
    latency: float              # completion time under the execution mode
    deadline_met: bool


@dataclass
class Matching:
    """A complete matching of tasks to servers (or local fallback)."""

    assignments: dict = field(default_factory=dict)   # task_id -> Assignment
    objective: float = 0.0          # summed weighted cost over all tasks
    offload_objective: float = 0.0  # offload-only part of the objective
    forced_local: tuple = ()        # deadline-feasible tasks squeezed out by capacity

    def units_used(self) -> dict:
        """Reserved units per server id."""
        used: dict[int, int] = {}
        for a in self.assignments.values():
            if a.es_id is not None:
                used[a.es_id] = used.get(a.es_id, 0) + a.units
        return used


def demand_units(task: Task, cfg: SystemConfig) -> int:
    """Compute units a task asks for: the fewest that meet its deadline.

    ceil(cycles / (deadline * speed per unit)), clamped to [1, demand_cap]
    so a request is always expressible on the coarse unit grid.
    """
    need = math.ceil(task.cycles / (task.deadline * cfg.es_speed_per_unit))
    return min(max(need, 1), cfg.demand_cap)


def total_cost(split: float, units: int, unit_price: float,
               local_latency: float, offload_latency: float,
               cfg: SystemConfig) -> float:
    """Weighted cost of running a task at a given split.

    ``local_latency`` and ``offload_latency`` are the full-task times of
    the two pure strategies; the split linearly apportions between the
    weighted local latency and the weighted offload latency plus payment
    term (units at the server's unit price).
    """
    if not 0.0 <= split <= 1.0:
        raise ValueError("split must lie in [0, 1]")
    if local_latency < 0 or offload_latency < 0:
        raise ValueError("latencies must be >= 0")
    w_lat, w_money = cfg.latency_weight, cfg.price_weight
    local_part = (1.0 - split) * w_lat * local_latency
    offload_part = split * (w_lat * offload_latency + w_money * units * unit_price)
    return local_part + offload_part


def feasible_split_range(offload_latency: float, local_latency: float,
                         deadline: float, cfg: SystemConfig):
    """Maximal split interval meeting the deadline, or None when empty.

    Both latency arguments are full-task times; the offloaded and local
    shares scale linearly with the split and its complement.  Under
    concurrent execution both shares must individually finish in time;
    under sequential execution their sum must.
    """
    if deadline <= 0:
        raise ValueError("deadline must be positive")
    if offload_latency < 0 or local_latency < 0:
        raise ValueError("latencies must be >= 0")
    if cfg.execution_mode == "concurrent":
        lo = 0.0 if local_latency <= deadline else 1.0 - deadline / local_latency
        hi = 1.0 if offload_latency <= deadline else deadline / offload_latency
    else:
        # split * offload + (1 - split) * local <= deadline
        slope = offload_latency - local_latency
        if slope > 0:
            lo, hi = 0.0, (deadline - local_latency) / slope
        elif slope < 0:
            lo, hi = (local_latency - deadline) / slope * -1.0, 1.0
        else:
            lo, hi = 0.0, 1.0
        if local_latency > deadline and slope >= 0:
            return None
    lo, hi = max(0.0, lo), min(1.0, hi)
    if lo > hi:
        return None
    return lo, hi


@dataclass(frozen=True)
class _Option:
    """One candidate placement of a task (server id None = stay local)."""

    es_id: int | None
    split: float
    units: int
    cost: float
    latency: float
    deadline_met: bool


def _split_grid(lo: float, hi: float, step: float):
    """Grid points of the split lattice inside [lo, hi], plus hi itself."""
    points = []
    k = math.ceil(round(lo / step, 9))
    while k * step <= hi + 1e-12:
        points.append(min(k * step, 1.0))
        k += 1
    if not points or points[-1] < hi - 1e-12:
        points.append(hi)
    return [p for p in points if p > 0.0]


def _task_options(task: Task, servers, topology: Topology, cfg: SystemConfig,
                  ue: UserEquipment | None):
    """Enumerate placements of one task: local plus every feasible
    (server, grid split) pair, each with its weighted cost."""
    device = ue if ue is not None else UserEquipment(
        id=task.owner_ue, position=(0.0, 0.0),
        local_speed=cfg.ue_local_speed, offload_prob=cfg.offload_prob)
    local_full = task.local_time if task.local_time is not None else \
        task.cycles / device.local_speed
    local_cost = total_cost(0.0, 0, 0.0, local_full, 0.0, cfg)
    options = [_Option(None, 0.0, 0, local_cost, local_full,
                       local_full <= task.deadline)]
    units = demand_units(task, cfg)
    for es in servers:
        if not es.participation or es.available < units:
            continue
        if task.owner_ue not in topology.coverage[es.id]:
            continue
        rate = transmission_rate(task.owner_ue, es.id, topology, cfg)
        if rate <= 0:
            continue
        offload_full = 2.0 * task.size / rate + \
            task.cycles / (units * es.speed_per_unit)
        window = feasible_split_range(offload_full, local_full, task.deadline, cfg)
        if window is None:
            continue
        for split in _split_grid(window[0], window[1], cfg.split_step):
            cost = total_cost(split, units, es.reserve_price,
                              local_full, offload_full, cfg)
            if cfg.execution_mode == "concurrent":
                latency = max(split * offload_full, (1.0 - split) * local_full)
            else:
                latency = split * offload_full + (1.0 - split) * local_full
            options.append(_Option(es.id, split, units, cost, latency, True))
    return options


def _greedy_match(tasks, option_sets, capacity):
    """Cheapest-option packing in task order, then single-task improvement
    passes until no move lowers the objective."""
    choice = {}
    for task, options in zip(tasks, option_sets):
        best = None
        for opt in options:
            if opt.es_id is not None and capacity[opt.es_id] < opt.units:
                continue
            if best is None or opt.cost < best.cost - 1e-12:
                best = opt
        choice[task.id] = best
        if best.es_id is not None:
            capacity[best.es_id] -= best.units
    for _ in range(len(tasks)):
        improved = False
        for task, options in zip(tasks, option_sets):
            current = choice[task.id]
            if current.es_id is not None:
                capacity[current.es_id] += current.units
            best = current
            for opt in options:
                if opt.es_id is not None and capacity[opt.es_id] < opt.units:
                    continue
                if opt.cost < best.cost - 1e-12:
                    best = opt
            choice[task.id] = best
            if best.es_id is not None:
                capacity[best.es_id] -= best.units
            improved = improved or best is not current
        if not improved:
            break
    return choice


def _exact_match(tasks, option_sets, capacity):
    """Exhaustive search over the option lattice with cost-bound pruning."""
    order = sorted(range(len(tasks)), key=lambda k: tasks[k].id)
    floor = [min(o.cost for o in option_sets[k]) for k in order]
    tail = [0.0] * (len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        tail[pos] = tail[pos + 1] + floor[pos]
    best_cost = math.inf
    best_choice = None
    choice = {}

    def descend(pos, cost_so_far):
        nonlocal best_cost, best_choice
        if cost_so_far + tail[pos] >= best_cost:
            return
        if pos == len(order):
            best_cost = cost_so_far
            best_choice = dict(choice)
            return
        k = order[pos]
        for opt in option_sets[k]:
            if opt.es_id is not None:
                if capacity[opt.es_id] < opt.units:
                    continue
                capacity[opt.es_id] -= opt.units
            choice[tasks[k].id] = opt
            descend(pos + 1, cost_so_far + opt.cost)
            del choice[tasks[k].id]
            if opt.es_id is not None:
                capacity[opt.es_id] += opt.units
    descend(0, 0.0)
    return best_choice


def match_demand_supply(tasks, servers, topology: Topology, cfg: SystemConfig,
                        ues=None, mode: str | None = None) -> Matching:
    """Match tasks to servers minimizing the summed weighted cost.

    ``mode`` overrides ``cfg.auction_mode``: "exact" searches the whole
    discretized space (small instances only), "greedy" packs cheapest
    options in task order and then applies single-task improvement passes,
    so its objective never beats exact but is locally unimprovable.
    """
    mode = mode or cfg.auction_mode
    if mode not in ("exact", "greedy"):
        raise ValueError(f"unknown matching mode: {mode}")
    tasks = sorted(tasks, key=lambda t: (t.arrival_time, t.id))
    by_id = {ue.id: ue for ue in ues} if ues is not None else {}
    option_sets = [
        _task_options(t, servers, topology, cfg, by_id.get(t.owner_ue))
        for t in tasks
    ]
    capacity = {es.id: es.available if es.participation else 0 for es in servers}
    if mode == "exact":
        choice = _exact_match(tasks, option_sets, dict(capacity))
    else:
        choice = _greedy_match(tasks, option_sets, dict(capacity))

    matching = Matching()
    remaining = dict(capacity)
    for task, options in zip(tasks, option_sets):
        opt = choice[task.id]
        matching.assignments[task.id] = Assignment(
            task_id=task.id, es_id=opt.es_id, split=opt.split,
            units=opt.units, cost=opt.cost, latency=opt.latency,
            deadline_met=opt.latency <= task.deadline + 1e-12)
        matching.objective += opt.cost
        if opt.es_id is not None:
            # the cost net of the local-share term is the pure offload part
            local_option = next(o for o in options if o.es_id is None)
            matching.offload_objective += opt.cost - \
                (1.0 - opt.split) * local_option.cost
            remaining[opt.es_id] -= opt.units
    forced = []
    for task, options in zip(tasks, option_sets):
        opt = choice[task.id]
        if opt.es_id is not None:
            continue
        had_offload = any(o.es_id is not None for o in options)
        fits_now = any(o.es_id is not None and remaining[o.es_id] >= o.units
                       for o in options)
        if had_offload and not fits_now:
            forced.append(task.id)
    matching.forced_local = tuple(forced)
    return matching


def market_balance_report(matching: Matching, servers, tasks, cfg: SystemConfig) -> dict:
    """Slack on both market sides: spare units and squeezed-out demand."""
    used = matching.units_used()
    oversupply = sum(
        (es.available if es.participation else 0) - used.get(es.id, 0)
        for es in servers
    )
    by_id = {t.id: t for t in tasks}
    unmet = sum(demand_units(by_id[tid], cfg) for tid in matching.forced_local)
    return {"oversupply": int(oversupply), "unmet_demand": int(unmet)}


def export_matching(matching: Matching, path) -> None:
    """Write one CSV row per task assignment."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_id", "es_id", "split", "demand_units", "cost"])
        for tid in sorted(matching.assignments):
            a = matching.assignments[tid]
            writer.writerow([
                tid,
                "local" if a.es_id is None else a.es_id,
                repr(float(a.split)), a.units, repr(float(a.cost)),
            ])

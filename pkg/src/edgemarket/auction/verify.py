"""Property checks over finished auctions.

These verifiers re-run the mechanism under counterfactuals (misreports,
swapped bundles, alternative allocations) and report the first violation
found, so test suites and the command line can assert the mechanism's
incentive guarantees on concrete instances instead of trusting them.
"""
from __future__ import annotations

import csv

import numpy as np

from .dynamics import _buyer_payoff_of, _with_valuation
from .mechanism import _compute_payments, determine_winners, screen_participants
from .types import AuctionState

__all__ = [
    "brute_force_welfare",
    "verify_truthfulness",
    "verify_envy_free",
    "verify_sharing_incentive",
    "random_unit_allocations",
    "export_equilibrium_trace",
]


def brute_force_welfare(bids, asks) -> float:
    """Optimal declared welfare by exhaustive assignment enumeration.

    Every participating bid is tried at every eligible server with room
    (and left out), so the result is the true allocation optimum.  Meant
    as an independent reference on small instances; the search is
    exponential and will not finish on large ones.
    """
    active = sorted(
        (b for b in bids if b.participation and b.demand > 0),
        key=lambda b: b.ue_id)
    sellers = sorted(
        (a for a in asks if a.participation), key=lambda a: a.es_id)
    room = [a.available for a in sellers]

    def descend(i):
        if i == len(active):
            return 0.0
        bid = active[i]
        best = descend(i + 1)
        for idx, ask in enumerate(sellers):
            if room[idx] < bid.demand:
                continue
            if bid.eligible_es is not None and ask.es_id not in bid.eligible_es:
                continue
            room[idx] -= bid.demand
            value = bid.demand * bid.valuation + descend(i + 1)
            room[idx] += bid.demand
            if value > best:
                best = value
        return best

    return descend(0)


def verify_truthfulness(state: AuctionState, ue_id: int, misreports, cfg,
                        tol: float = 1e-9):
    """Check that no misreport on the grid beats truthful declaration.

    The probed buyer's truthful payoff is evaluated from the state as
    given; every candidate declaration is then swapped in (everyone else
    held fixed) and the payoff re-evaluated against the true value.
    Returns (True, None) when truth-telling is a best response within
    ``tol``, else (False, first improving misreport).
    """
    truthful = _buyer_payoff_of(state.bids, state.asks, state, cfg, ue_id)
    for declared in misreports:
        payoff = _buyer_payoff_of(
            _with_valuation(state.bids, ue_id, declared),
            state.asks, state, cfg, ue_id)
        if payoff > truthful + tol:
            return False, declared
    return True, None


def _bundle_value(bid, es_id, units):
    """What a buyer's bid says another bundle is worth to it.

    The bundle only has value if the buyer could actually use it: the
    server must be one the buyer can reach, and the bundle must cover
    the buyer's full unit demand, since fewer units cannot run the task
    at all.  Extra units beyond the demand add nothing.
    """
    if bid.eligible_es is not None and es_id not in bid.eligible_es:
        return 0.0
    if units < bid.demand:
        return 0.0
    return bid.valuation * bid.demand


def verify_envy_free(outcome, bids, use_own_payment: bool = False,
                     tol: float = 1e-9):
    """Check that no buyer prefers another buyer's position.

    Default reading: buyer i envies buyer k when taking k's bundle at
    k's payment would beat i's own bundle at i's own payment.  The
    ``use_own_payment`` variant holds i's payment fixed while swapping
    bundles.  Returns (True, []) or (False, violation list of
    (envious, envied) pairs).
    """
    participating = [b for b in bids if b.participation and b.demand > 0]
    violations = []
    for i in participating:
        es_i, units_i = outcome.allocation.get(i.ue_id, (None, 0))
        pay_i = outcome.payments.get(i.ue_id, 0.0)
        own = _bundle_value(i, es_i, units_i) - pay_i if es_i is not None \
            else -pay_i
        for k in participating:
            if k.ue_id == i.ue_id or k.ue_id not in outcome.allocation:
                continue
            es_k, units_k = outcome.allocation[k.ue_id]
            pay_k = pay_i if use_own_payment else \
                outcome.payments.get(k.ue_id, 0.0)
            swapped = _bundle_value(i, es_k, units_k) - pay_k
            if swapped > own + tol:
                violations.append((i.ue_id, k.ue_id))
    return not violations, violations


def verify_sharing_incentive(outcome, asks, alternatives, tol: float = 1e-9):
    """Check every seller weakly prefers the mechanism to any alternative.

    A seller's mechanism payoff is its realized income minus provisioning
    cost.  An alternative allocation (units per seller, within each
    seller's offer) would instead earn the seller its own reserve price
    per unit, at the same cost rate.  Returns (True, []) or (False,
    violation list of (es_id, reason) pairs).
    """
    sold = outcome.units_sold()
    violations = []
    for ask in asks:
        if not ask.participation:
            continue
        units = sold.get(ask.es_id, 0)
        income = outcome.incomes.get(ask.es_id, 0.0)
        payoff = income - ask.unit_cost * units
        if payoff < -tol:
            violations.append((ask.es_id, "negative payoff"))
            continue
        for alt in alternatives:
            alt_units = alt.get(ask.es_id, 0)
            if alt_units > ask.available:
                raise ValueError(
                    f"alternative oversubscribes es {ask.es_id}")
            alt_payoff = (ask.reserve_price - ask.unit_cost) * alt_units
            if alt_payoff > payoff + tol:
                violations.append((ask.es_id, "alternative preferred"))
                break
    return not violations, violations


def random_unit_allocations(bids, asks, count: int, seed: int):
    """Sample feasible alternative allocations (units sold per seller).

    Each sample assigns a random subset of the participating bids to
    random servers with capacity respected, and reports the per-server
    unit totals.  Includes the empty and the fully-packed extremes, then
    random draws up to ``count``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    live_bids = [b for b in bids if b.participation and b.demand > 0]
    live_asks = sorted(
        (a for a in asks if a.participation and a.available > 0),
        key=lambda a: a.es_id)
    samples = [{a.es_id: 0 for a in live_asks}]
    if live_asks:
        samples.append({a.es_id: a.available for a in live_asks})
    while len(samples) < count:
        capacity = {a.es_id: a.available for a in live_asks}
        chosen = {a.es_id: 0 for a in live_asks}
        for bid in live_bids:
            if not live_asks or rng.random() < 0.3:
                continue
            es = live_asks[int(rng.integers(len(live_asks)))]
            if capacity[es.es_id] >= bid.demand:
                capacity[es.es_id] -= bid.demand
                chosen[es.es_id] += bid.demand
        samples.append(chosen)
    return samples[:count]


def export_equilibrium_trace(report, path) -> None:
    """Write the per-sweep equilibrium trace as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total_cost", "welfare",
                         "max_deviation_gain"])
        rows = zip(report.cost_trace, report.welfare_trace, report.gain_trace)
        for i, (cost, welfare, gain) in enumerate(rows, start=1):
            writer.writerow([i, repr(float(cost)), repr(float(welfare)),
                             repr(float(gain))])

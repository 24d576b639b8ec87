"""Winner determination and pivot payments.

The mechanism sells integral compute units at multiple servers to devices
that each want one bundle from one server.  Allocation maximizes declared
welfare (the sum of winning ``demand * valuation``); each winner then pays
the externality it imposes on the others: the best welfare the others
could reach without it, minus what they reach beside it.  Payments are
therefore non-negative, never exceed the winner's declared value under
exact allocation, and do not depend on the winner's own declaration
beyond its effect on the allocation.

Two allocation modes share every downstream step:

* ``exact``   depth-first search over all bid-to-server assignments with
              an upper-bound prune; optimal, small instances only.
* ``greedy``  bids sorted by declared unit valuation (ties: tighter
              deadline, then lower id) packed first-fit; payments re-run
              this packing once per winner, giving the K^2 log K scaling
              of one sort-based packing per removed bidder.
"""
from __future__ import annotations

import csv

from .types import AuctionOutcome, BuyerBid, RoundResult, SellerAsk
from .payoffs import buyer_payoff, seller_payoff, social_welfare

__all__ = [
    "screen_participants",
    "determine_winners",
    "clarke_payment",
    "incentive_payment",
    "seller_income",
    "run_auction_round",
    "export_outcome",
    "export_seller_summary",
]

_PAY_TOL = 1e-9


def screen_participants(bids, asks, latencies, cfg):
    """Apply the pre-auction participation rules to both sides.

    A buyer is screened out when its task's offload latency exceeds its
    deadline, or when the cheapest participating seller's reserve price
    would already overrun its budget.  A seller is screened out when it
    has nothing to sell or its reserve price does not cover its unit
    cost.  Returns new (bids, asks) lists with participation flags set.
    """
    kept_asks = []
    for ask in asks:
        ok = ask.participation and ask.available > 0 and \
            ask.unit_cost <= ask.reserve_price + _PAY_TOL
        kept_asks.append(SellerAsk(
            es_id=ask.es_id, available=ask.available,
            reserve_price=ask.reserve_price, unit_cost=ask.unit_cost,
            participation=ok, participation_prob=ask.participation_prob))
    open_prices = [a.reserve_price for a in kept_asks if a.participation]
    floor_price = min(open_prices) if open_prices else None
    kept_bids = []
    for bid in bids:
        ok = bid.participation and bid.demand > 0
        latency = latencies.get(bid.ue_id)
        if ok and latency is not None and latency > bid.deadline:
            ok = False
        if ok and (floor_price is None or floor_price * bid.demand > bid.budget):
            ok = False
        kept_bids.append(BuyerBid(
            ue_id=bid.ue_id, demand=bid.demand, valuation=bid.valuation,
            deadline=bid.deadline, budget=bid.budget, fraction=bid.fraction,
            offload_prob=bid.offload_prob, participation=ok,
            eligible_es=bid.eligible_es))
    return kept_bids, kept_asks


def _active(bids, asks):
    active_bids = [b for b in bids if b.participation and b.demand > 0]
    active_asks = [a for a in asks if a.participation and a.available > 0]
    return active_bids, active_asks


def _sort_key(bid):
    # higher unit valuation first; ties broken toward the tighter
    # deadline, then the lower device id
    return (-bid.valuation, bid.deadline, bid.ue_id)


def _eligible(bid, ask):
    return bid.eligible_es is None or ask.es_id in bid.eligible_es


def _greedy_pack(bids, asks):
    """First-fit packing of valuation-sorted bids; returns an allocation."""
    capacity = {a.es_id: a.available for a in asks}
    order = sorted(asks, key=lambda a: a.es_id)
    allocation = {}
    for bid in sorted(bids, key=_sort_key):
        for ask in order:
            if _eligible(bid, ask) and capacity[ask.es_id] >= bid.demand:
                allocation[bid.ue_id] = (ask.es_id, bid.demand)
                capacity[ask.es_id] -= bid.demand
                break
    return allocation


def _exact_pack(bids, asks):
    """Welfare-optimal assignment by pruned depth-first search.

    Bids are considered in the greedy sort order and only strictly better
    welfare replaces the incumbent, so among welfare ties the greedy tie
    rule (tighter deadline, lower id first) decides.
    """
    order = sorted(bids, key=_sort_key)
    sorted_asks = sorted(asks, key=lambda a: a.es_id)
    eligible = [
        [a.es_id for a in sorted_asks if _eligible(bid, a)] for bid in order
    ]
    capacity = {a.es_id: a.available for a in sorted_asks}
    values = [b.demand * b.valuation for b in order]
    tail = [0.0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        tail[i] = tail[i + 1] + values[i]
    best_welfare = -1.0
    best_alloc = {}
    alloc = {}

    def descend(i, welfare):
        nonlocal best_welfare, best_alloc
        if welfare + tail[i] <= best_welfare:
            return
        if i == len(order):
            best_welfare = welfare
            best_alloc = dict(alloc)
            return
        bid = order[i]
        for es_id in eligible[i]:
            if capacity[es_id] >= bid.demand:
                capacity[es_id] -= bid.demand
                alloc[bid.ue_id] = (es_id, bid.demand)
                descend(i + 1, welfare + values[i])
                del alloc[bid.ue_id]
                capacity[es_id] += bid.demand
        # losing branch: the bid stays unserved
        descend(i + 1, welfare)

    descend(0, 0.0)
    return best_alloc


def determine_winners(bids, asks, mode: str = "exact") -> AuctionOutcome:
    """Allocate units to bids, maximizing declared welfare.

    Exact mode returns a welfare-optimal allocation; greedy mode returns
    the first-fit packing of the valuation-sorted bids.  Both are
    deterministic, never split a winner across servers, and never exceed
    any server's available units.
    """
    if mode not in ("exact", "greedy"):
        raise ValueError(f"unknown auction mode: {mode}")
    active_bids, active_asks = _active(bids, asks)
    if mode == "greedy":
        allocation = _greedy_pack(active_bids, active_asks)
    else:
        allocation = _exact_pack(active_bids, active_asks)
    by_id = {b.ue_id: b for b in active_bids}
    declared = sum(by_id[u].valuation * units for u, (_, units) in allocation.items())
    return AuctionOutcome(allocation=allocation, declared_welfare=declared)


def _discounted_value(bid, units, lam):
    """One allocated term of the pivot sums, with the incentive discount.

    The discount scales the term by (1 - lam * offloaded fraction); at
    lam = 0 the factor is exactly 1 and the term is the plain declared
    value, so the zero-discount payment reproduces the pivot payment
    bit for bit.
    """
    return (1.0 - lam * bid.fraction) * units * bid.valuation


def _others_value(allocation, bids_by_id, exclude, lam):
    total = 0.0
    for ue_id in sorted(allocation):
        if ue_id == exclude:
            continue
        _, units = allocation[ue_id]
        total += _discounted_value(bids_by_id[ue_id], units, lam)
    return total


def incentive_payment(bids, asks, outcome: AuctionOutcome, ue_id: int,
                      lam: float, mode: str = "exact") -> float:
    """Pivot payment with valuation terms discounted by offloaded fraction.

    Both pivot allocations (with and without the payer) are computed on
    the undiscounted declarations; only the summed value terms carry the
    (1 - lam * fraction) factor.  This keeps the payment equal to the
    plain pivot at lam = 0 and non-increasing in lam for a fixed
    instance and allocation pair.
    """
    if not 0.0 <= lam < 1.0:
        raise ValueError("discount factor must lie in [0, 1)")
    if ue_id not in outcome.allocation:
        raise ValueError(f"ue {ue_id} is not a winner")
    active_bids, active_asks = _active(bids, asks)
    bids_by_id = {b.ue_id: b for b in active_bids}
    without = determine_winners(
        [b for b in active_bids if b.ue_id != ue_id], active_asks, mode)
    alone = _others_value(without.allocation, bids_by_id, ue_id, lam)
    beside = _others_value(outcome.allocation, bids_by_id, ue_id, lam)
    return max(0.0, alone - beside)


def clarke_payment(bids, asks, outcome: AuctionOutcome, ue_id: int,
                   mode: str = "exact") -> float:
    """Undiscounted pivot payment: the winner's externality on the rest."""
    return incentive_payment(bids, asks, outcome, ue_id, 0.0, mode)


def seller_income(outcome: AuctionOutcome) -> dict:
    """Regroup winner payments by hosting server."""
    incomes: dict[int, float] = {}
    for ue_id, (es_id, _) in outcome.allocation.items():
        incomes[es_id] = incomes.get(es_id, 0.0) + outcome.payments.get(ue_id, 0.0)
    return incomes


def _compute_payments(bids, asks, outcome, lam, mode):
    return {
        ue_id: incentive_payment(bids, asks, outcome, ue_id, lam, mode)
        for ue_id in sorted(outcome.allocation)
    }


def run_auction_round(state, cfg) -> RoundResult:
    """One full auction round: allocation, payments, transfers, payoffs.

    Winners whose pivot payment overruns their budget are demoted (worst
    overrun first, ties toward the lower id) and the round is recomputed
    without them until every payment is within budget.  Social welfare is
    the sum of both sides' realized payoffs.
    """
    bids, asks = state.bids, state.asks
    lam = cfg.incentive_factor
    mode = state.mode
    demoted = []
    excluded: set[int] = set()
    while True:
        live = [b for b in bids if b.ue_id not in excluded]
        outcome = determine_winners(live, asks, mode)
        payments = _compute_payments(live, asks, outcome, lam, mode)
        by_id = {b.ue_id: b for b in live}
        over = [
            (payments[u] - by_id[u].budget, u)
            for u in payments if payments[u] > by_id[u].budget + _PAY_TOL
        ]
        if not over:
            break
        over.sort(key=lambda t: (-t[0], t[1]))
        excluded.add(over[0][1])
        demoted.append(over[0][1])
    outcome.payments = payments
    outcome.incomes = seller_income(outcome)

    buyer_payoffs = {}
    for bid in bids:
        latency = state.latencies.get(bid.ue_id, 0.0)
        true_value = state.true_values.get(bid.ue_id)
        buyer_payoffs[bid.ue_id] = buyer_payoff(
            bid, outcome, cfg, latency=latency, true_value=true_value)
    seller_payoffs = {}
    sold = outcome.units_sold()
    for ask in asks:
        units = sold.get(ask.es_id, 0)
        if cfg.seller_revenue == "reserve":
            revenue = ask.reserve_price * units
        else:
            revenue = outcome.incomes.get(ask.es_id, 0.0)
        seller_payoffs[ask.es_id] = seller_payoff(ask, units, revenue, cfg)
    outcome.social_welfare = social_welfare(
        buyer_payoffs.values(), seller_payoffs.values())
    return RoundResult(outcome=outcome, buyer_payoffs=buyer_payoffs,
                       seller_payoffs=seller_payoffs, demoted=tuple(demoted))


def export_outcome(result: RoundResult, path) -> None:
    """Write one CSV row per participating buyer."""
    outcome = result.outcome
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ue_id", "es_id", "demand_units", "valuation",
                         "payment", "payoff"])
        for ue_id in sorted(result.buyer_payoffs):
            if ue_id in outcome.allocation:
                es_id, units = outcome.allocation[ue_id]
                writer.writerow([ue_id, es_id, units, "",
                                 repr(float(outcome.payments.get(ue_id, 0.0))),
                                 repr(float(result.buyer_payoffs[ue_id]))])
            else:
                writer.writerow([ue_id, "", 0, "", repr(0.0),
                                 repr(float(result.buyer_payoffs[ue_id]))])


def export_seller_summary(result: RoundResult, asks, path) -> None:
    """Write one CSV row per seller: units, income, cost, payoff."""
    outcome = result.outcome
    sold = outcome.units_sold()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["es_id", "units_sold", "income", "cost", "payoff"])
        for ask in sorted(asks, key=lambda a: a.es_id):
            units = sold.get(ask.es_id, 0)
            writer.writerow([
                ask.es_id, units,
                repr(float(outcome.incomes.get(ask.es_id, 0.0))),
                repr(float(ask.unit_cost * units)),
                repr(float(result.seller_payoffs.get(ask.es_id, 0.0))),
            ])

"""Best-response dynamics over finite strategy grids.

Buyers adjust declared valuations and sellers adjust reserve prices, one
player at a time against the current profile, each picking the grid point
that maximizes its own realized payoff (evaluated against its true
value).  Ties resolve toward the smallest valuation or lowest price, so
the iteration is deterministic.  A sweep in which nobody can improve by
more than epsilon is an approximate equilibrium and stops the loop.

Payoff evaluation inside the search skips budget demotion: the dynamics
are meant for budget-slack instances, and the finalized round at the
fixed point applies the full budget rule.
"""
from __future__ import annotations

from dataclasses import replace

from .mechanism import (
    _active,
    _compute_payments,
    _others_value,
    determine_winners,
    incentive_payment,
    run_auction_round,
    screen_participants,
)
from .payoffs import buyer_payoff, seller_payoff
from .types import AuctionState, BestResponseGrid, EquilibriumReport

__all__ = [
    "best_response_buyer",
    "best_response_seller",
    "run_to_equilibrium",
]


def _with_valuation(bids, ue_id, valuation):
    return [replace(b, valuation=valuation) if b.ue_id == ue_id else b
            for b in bids]


def _with_price(asks, es_id, price):
    return [replace(a, reserve_price=price) if a.es_id == es_id else a
            for a in asks]


def _buyer_payoff_of(bids, asks, state, cfg, ue_id):
    """Realized payoff of one buyer under a candidate declaration profile."""
    screened_bids, screened_asks = screen_participants(
        bids, asks, state.latencies, cfg)
    outcome = determine_winners(screened_bids, screened_asks, state.mode)
    if ue_id in outcome.allocation:
        outcome.payments = {ue_id: incentive_payment(
            screened_bids, screened_asks, outcome, ue_id,
            cfg.incentive_factor, state.mode)}
    bid = next(b for b in screened_bids if b.ue_id == ue_id)
    return buyer_payoff(bid, outcome, cfg,
                        latency=state.latencies.get(ue_id, 0.0),
                        true_value=state.true_values.get(ue_id))


def _seller_payoff_of(bids, asks, state, cfg, es_id, cache=None):
    """Realized payoff of one seller under a candidate declaration profile.

    A reserve price only reaches the outcome through screening, so when
    two candidate prices screen the same participant sets the allocation
    and payments are identical.  ``cache`` (valid while the rest of the
    profile is fixed) memoizes that expensive part per screening
    signature.
    """
    screened_bids, screened_asks = screen_participants(
        bids, asks, state.latencies, cfg)
    ask = next(a for a in screened_asks if a.es_id == es_id)
    key = (tuple(b.ue_id for b in screened_bids if b.participation),
           tuple(a.es_id for a in screened_asks if a.participation))
    entry = cache.get(key) if cache is not None else None
    if entry is None:
        outcome = determine_winners(screened_bids, screened_asks, state.mode)
        units = outcome.units_sold().get(es_id, 0)
        income = None
        if cfg.seller_revenue == "income":
            outcome.payments = _compute_payments(
                screened_bids, screened_asks, outcome, cfg.incentive_factor,
                state.mode)
            income = sum(
                outcome.payments[u]
                for u, (host, _) in outcome.allocation.items() if host == es_id
            )
        entry = (units, income)
        if cache is not None:
            cache[key] = entry
    units, income = entry
    if cfg.seller_revenue == "reserve":
        revenue = ask.reserve_price * units
    else:
        revenue = income
    return seller_payoff(ask, units, revenue, cfg)


def best_response_buyer(state: AuctionState, ue_id: int,
                        grid: BestResponseGrid, cfg):
    """Grid valuation maximizing the buyer's payoff against the profile.

    Scans candidates in increasing order and keeps only strict
    improvements, so among payoff ties the smallest valuation wins.
    Returns (valuation, payoff at it, payoff at the current declaration).
    """
    current = next(b.valuation for b in state.bids if b.ue_id == ue_id)
    current_payoff = _buyer_payoff_of(state.bids, state.asks, state, cfg, ue_id)
    best_value, best_payoff = None, None
    for candidate in grid.valuations:
        if candidate == current:
            payoff = current_payoff
        else:
            payoff = _buyer_payoff_of(
                _with_valuation(state.bids, ue_id, candidate),
                state.asks, state, cfg, ue_id)
        if best_payoff is None or payoff > best_payoff:
            best_value, best_payoff = candidate, payoff
    return best_value, best_payoff, current_payoff


def best_response_seller(state: AuctionState, es_id: int,
                         grid: BestResponseGrid, cfg):
    """Grid price maximizing the seller's payoff against the profile.

    Ties resolve toward the lowest price.  Returns (price, payoff at it,
    payoff at the current declaration).
    """
    current = next(a.reserve_price for a in state.asks if a.es_id == es_id)
    cache: dict = {}
    current_payoff = _seller_payoff_of(state.bids, state.asks, state, cfg,
                                       es_id, cache)
    best_price, best_payoff = None, None
    for candidate in grid.prices:
        if candidate == current:
            payoff = current_payoff
        else:
            payoff = _seller_payoff_of(
                state.bids, _with_price(state.asks, es_id, candidate),
                state, cfg, es_id, cache)
        if best_payoff is None or payoff > best_payoff:
            best_price, best_payoff = candidate, payoff
    return best_price, best_payoff, current_payoff


def _total_buyer_cost(outcome, latencies, cfg):
    cost = 0.0
    for ue_id in outcome.allocation:
        cost += cfg.latency_weight * latencies.get(ue_id, 0.0) + \
            cfg.price_weight * outcome.payments.get(ue_id, 0.0)
    return cost


def _server_side_fulfilled(bids, asks, outcome):
    """All offered units sold, or nothing pending could still fit."""
    sold = outcome.units_sold()
    remaining = {
        a.es_id: a.available - sold.get(a.es_id, 0)
        for a in asks if a.participation
    }
    if all(r == 0 for r in remaining.values()):
        return True
    for bid in bids:
        if not bid.participation or bid.ue_id in outcome.allocation:
            continue
        for es_id, room in remaining.items():
            if room >= bid.demand and \
                    (bid.eligible_es is None or es_id in bid.eligible_es):
                return False
    return True


def run_to_equilibrium(state: AuctionState, cfg, grid: BestResponseGrid,
                       epsilon: float = 1e-6, max_sweeps: int = 200,
                       stable_sweeps: int = 1) -> EquilibriumReport:
    """Iterate sequential best responses until an epsilon fixed point.

    Each sweep updates every buyer's valuation and then every seller's
    price against the evolving profile, records the declaration vectors,
    total buyer cost, social welfare, and the sweep's best deviation
    gain.  The loop stops once the gain has stayed at most epsilon for
    ``stable_sweeps`` consecutive sweeps (or the sweep budget runs out).
    The fixed-point round is finalized with the full budget rule.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    if stable_sweeps < 1:
        raise ValueError("stable_sweeps must be >= 1")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    work = AuctionState(bids=list(state.bids), asks=list(state.asks),
                        latencies=dict(state.latencies),
                        true_values=dict(state.true_values), mode=state.mode)
    report = EquilibriumReport(epsilon=epsilon)
    calm = 0
    for sweep in range(1, max_sweeps + 1):
        max_gain = 0.0
        for bid in sorted(work.bids, key=lambda b: b.ue_id):
            value, payoff, current = best_response_buyer(
                work, bid.ue_id, grid, cfg)
            max_gain = max(max_gain, payoff - current)
            if payoff > current:
                work.bids = _with_valuation(work.bids, bid.ue_id, value)
        for ask in sorted(work.asks, key=lambda a: a.es_id):
            price, payoff, current = best_response_seller(
                work, ask.es_id, grid, cfg)
            max_gain = max(max_gain, payoff - current)
            if payoff > current:
                work.asks = _with_price(work.asks, ask.es_id, price)

        pre_screened = screen_participants(
            work.bids, work.asks, work.latencies, cfg)
        round_result = run_auction_round(
            AuctionState(bids=pre_screened[0], asks=pre_screened[1],
                         latencies=work.latencies,
                         true_values=work.true_values, mode=work.mode), cfg)
        report.iterations = sweep
        report.bid_trace.append(tuple(
            b.valuation for b in sorted(work.bids, key=lambda b: b.ue_id)))
        report.price_trace.append(tuple(
            a.reserve_price for a in sorted(work.asks, key=lambda a: a.es_id)))
        report.cost_trace.append(
            _total_buyer_cost(round_result.outcome, work.latencies, cfg))
        report.welfare_trace.append(round_result.outcome.social_welfare)
        report.gain_trace.append(max_gain)
        report.final = round_result
        calm = calm + 1 if max_gain <= epsilon else 0
        if calm >= stable_sweeps:
            report.converged = True
            break
    final_bids, final_asks = screen_participants(
        work.bids, work.asks, work.latencies, cfg)
    report.fulfillment = {
        "user_fulfilled": report.converged,
        "server_fulfilled": _server_side_fulfilled(
            final_bids, final_asks, report.final.outcome),
    }
    return report

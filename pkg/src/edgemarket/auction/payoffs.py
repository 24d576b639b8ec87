"""Realized payoffs of buyers and sellers, and their sum.

Both sides hold mean-variance preferences over the one stochastic
element, their own Bernoulli participation: the mean part is the familiar
quasi-linear surplus (value minus payment for buyers, revenue minus
provisioning cost for sellers) scaled by the participation probability,
and the variance of the participation-gated cost enters through a
configurable risk weight.  A zero risk weight (the default) makes both
sides risk neutral, and deterministic participation makes the variance
term vanish identically.
"""
from __future__ import annotations

__all__ = [
    "buyer_payoff",
    "seller_payoff",
    "social_welfare",
    "offload_threshold",
]


def buyer_payoff(bid, outcome, cfg, latency: float = 0.0,
                 true_value: float | None = None) -> float:
    """Mean-variance payoff of one buyer in a finished round.

    A winner's surplus is its units times its per-unit value (the true
    value when given, else the declared one) minus its payment.  The cost
    whose variance is penalized weighs the offload latency and the
    payment with the configured weights.  Losers and non-participants
    earn exactly zero.
    """
    if bid.ue_id not in outcome.allocation:
        return 0.0
    _, units = outcome.allocation[bid.ue_id]
    value = bid.valuation if true_value is None else true_value
    payment = outcome.payments.get(bid.ue_id, 0.0)
    q = bid.offload_prob
    surplus = units * value - payment
    cost = cfg.latency_weight * latency + cfg.price_weight * payment
    return q * surplus - cfg.risk_weight * q * (1.0 - q) * cost**2


def seller_payoff(ask, units_sold: int, revenue: float, cfg) -> float:
    """Mean-variance payoff of one seller in a finished round.

    ``revenue`` is the money the seller actually takes in for the units
    it sold (the regrouped winner payments, or reserve-priced units,
    depending on the configured revenue convention).
    """
    if units_sold < 0:
        raise ValueError("units_sold must be >= 0")
    if units_sold > ask.available:
        raise ValueError("units_sold exceeds what the seller offered")
    q = ask.participation_prob
    cost = ask.unit_cost * units_sold
    return q * (revenue - cost) - cfg.risk_weight * q * (1.0 - q) * cost**2


def social_welfare(buyer_payoffs, seller_payoffs) -> float:
    """Total realized welfare: both sides' payoffs summed.

    Payments and incomes are pure transfers, so with risk-neutral
    deterministic participants this equals the allocated value minus the
    sellers' provisioning cost, and adding any uniform offset to every
    payment and income simultaneously leaves it unchanged.
    """
    return sum(buyer_payoffs) + sum(seller_payoffs)


def offload_threshold(values, prices) -> int:
    """Binary offload decision: offload exactly when the total value of
    the service clears the total asked price."""
    return 1 if sum(values) >= sum(prices) else 0

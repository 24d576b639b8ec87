"""Sealed-bid compute auction: allocation, pivot payments, dynamics."""

from .types import (
    AuctionOutcome,
    AuctionState,
    BestResponseGrid,
    BuyerBid,
    EquilibriumReport,
    RoundResult,
    SellerAsk,
)
from .mechanism import (
    clarke_payment,
    determine_winners,
    export_outcome,
    export_seller_summary,
    incentive_payment,
    run_auction_round,
    screen_participants,
    seller_income,
)
from .payoffs import buyer_payoff, offload_threshold, seller_payoff, social_welfare
from .dynamics import best_response_buyer, best_response_seller, run_to_equilibrium
from .verify import (
    brute_force_welfare,
    export_equilibrium_trace,
    random_unit_allocations,
    verify_envy_free,
    verify_sharing_incentive,
    verify_truthfulness,
)

__all__ = [
    "AuctionOutcome",
    "AuctionState",
    "BestResponseGrid",
    "BuyerBid",
    "EquilibriumReport",
    "RoundResult",
    "SellerAsk",
    "best_response_buyer",
    "best_response_seller",
    "brute_force_welfare",
    "buyer_payoff",
    "clarke_payment",
    "determine_winners",
    "export_equilibrium_trace",
    "export_outcome",
    "export_seller_summary",
    "incentive_payment",
    "offload_threshold",
    "random_unit_allocations",
    "run_auction_round",
    "run_to_equilibrium",
    "screen_participants",
    "seller_income",
    "seller_payoff",
    "social_welfare",
    "verify_envy_free",
    "verify_sharing_incentive",
    "verify_truthfulness",
]

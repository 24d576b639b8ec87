"""Deterministic market simulator for latency-bound compute offloading.

Devices with deadline-constrained tasks buy processing units from edge
servers through a sealed-bid auction with pivot-style payments.  The
package splits into entities and config (:mod:`edgemarket.model`), the
wireless and latency model (:mod:`edgemarket.radio`), cost-minimizing
matching (:mod:`edgemarket.market`), the mechanism itself
(:mod:`edgemarket.auction`), and the experiment harness, figure, and
command-line layers (:mod:`edgemarket.harness`, :mod:`edgemarket.plots`,
:mod:`edgemarket.cli`).
"""

from .model import (
    ConfigError,
    EdgeServer,
    SystemConfig,
    Task,
    UserEquipment,
    config_to_dict,
    dbm_per_hz_to_watts,
    dbm_to_watts,
    validate_config,
)
from .radio import (
    LatencyBreakdown,
    Topology,
    latency_breakdown,
    place_entities,
    sinr,
    transmission_rate,
    transmission_time,
)
from .market import (
    Assignment,
    Matching,
    demand_units,
    feasible_split_range,
    market_balance_report,
    match_demand_supply,
    total_cost,
)
from .auction import (
    AuctionOutcome,
    AuctionState,
    BestResponseGrid,
    BuyerBid,
    EquilibriumReport,
    RoundResult,
    SellerAsk,
    brute_force_welfare,
    buyer_payoff,
    clarke_payment,
    determine_winners,
    incentive_payment,
    offload_threshold,
    run_auction_round,
    run_to_equilibrium,
    screen_participants,
    seller_payoff,
    social_welfare,
    verify_envy_free,
    verify_sharing_incentive,
    verify_truthfulness,
)
from .harness import (
    MetricsRow,
    Workload,
    emit_csv,
    generate_workload,
    load_trace,
    run_scenario,
    scenario_names,
    simulate_run,
    success_rate,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "AuctionOutcome",
    "AuctionState",
    "BestResponseGrid",
    "BuyerBid",
    "ConfigError",
    "EdgeServer",
    "EquilibriumReport",
    "LatencyBreakdown",
    "Matching",
    "MetricsRow",
    "RoundResult",
    "SellerAsk",
    "SystemConfig",
    "Task",
    "Topology",
    "UserEquipment",
    "Workload",
    "brute_force_welfare",
    "buyer_payoff",
    "clarke_payment",
    "config_to_dict",
    "dbm_per_hz_to_watts",
    "dbm_to_watts",
    "demand_units",
    "determine_winners",
    "emit_csv",
    "feasible_split_range",
    "generate_workload",
    "incentive_payment",
    "latency_breakdown",
    "load_trace",
    "market_balance_report",
    "match_demand_supply",
    "offload_threshold",
    "place_entities",
    "run_auction_round",
    "run_scenario",
    "run_to_equilibrium",
    "scenario_names",
    "screen_participants",
    "seller_payoff",
    "simulate_run",
    "sinr",
    "social_welfare",
    "success_rate",
    "total_cost",
    "transmission_rate",
    "transmission_time",
    "validate_config",
    "verify_envy_free",
    "verify_sharing_incentive",
    "verify_truthfulness",
    "__version__",
]

"""Value objects passed through the auction pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "BuyerBid",
    "SellerAsk",
    "AuctionOutcome",
    "RoundResult",
    "BestResponseGrid",
    "AuctionState",
    "EquilibriumReport",
]


@dataclass(frozen=True)
class BuyerBid:
    """A device's declared demand for compute units.

    ``valuation`` is money per unit; a winner's declared value is
    ``demand * valuation``.  ``fraction`` is the offloaded share of the
    underlying task, used by the incentive payment discount.
    ``eligible_es`` restricts which servers may host the bid (None = any).
    """

    ue_id: int
    demand: int
    valuation: float
    deadline: float = math.inf
    budget: float = math.inf
    fraction: float = 1.0
    offload_prob: float = 1.0
    participation: bool = True
    eligible_es: frozenset | None = None

    def __post_init__(self):
        if self.demand < 0:
            raise ValueError(f"bid {self.ue_id}: demand must be >= 0")
        if self.valuation < 0:
            raise ValueError(f"bid {self.ue_id}: valuation must be >= 0")
        if self.budget < 0:
            raise ValueError(f"bid {self.ue_id}: budget must be >= 0")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"bid {self.ue_id}: fraction must lie in [0, 1]")
        if not 0.0 <= self.offload_prob <= 1.0:
            raise ValueError(f"bid {self.ue_id}: offload_prob must lie in [0, 1]")


@dataclass(frozen=True)
class SellerAsk:
    """A server's declared supply: available units at a reserve price."""

    es_id: int
    available: int
    reserve_price: float
    unit_cost: float = 0.0
    participation: bool = True
    participation_prob: float = 1.0

    def __post_init__(self):
        if self.available < 0:
            raise ValueError(f"ask {self.es_id}: available must be >= 0")
        if self.reserve_price < 0:
            raise ValueError(f"ask {self.es_id}: reserve_price must be >= 0")
        if self.unit_cost < 0:
            raise ValueError(f"ask {self.es_id}: unit_cost must be >= 0")
        if not 0.0 <= self.participation_prob <= 1.0:
            raise ValueError(f"ask {self.es_id}: participation_prob must lie in [0, 1]")


@dataclass
class AuctionOutcome:
    """Allocation and transfers of one auction round.

    ``allocation`` maps each winning device to its (server, units) pair;
    each winner is hosted by exactly one server.  ``payments`` and
    ``incomes`` are filled once payments are computed; the two sides
    always total the same amount.
    """

    allocation: dict = field(default_factory=dict)   # ue_id -> (es_id, units)
    payments: dict = field(default_factory=dict)     # ue_id -> money
    incomes: dict = field(default_factory=dict)      # es_id -> money
    declared_welfare: float = 0.0                    # sum of winning d * v
    social_welfare: float = 0.0                      # sum of all payoffs

    @property
    def winners(self) -> set:
        return set(self.allocation)

    def units_sold(self) -> dict:
        sold: dict[int, int] = {}
        for es_id, units in self.allocation.values():
            sold[es_id] = sold.get(es_id, 0) + units
        return sold


@dataclass
class RoundResult:
    """Outcome of one full round plus both sides' realized payoffs."""

    outcome: AuctionOutcome
    buyer_payoffs: dict = field(default_factory=dict)    # ue_id -> money
    seller_payoffs: dict = field(default_factory=dict)   # es_id -> money
    demoted: tuple = ()   # winners dropped for exceeding their budget


@dataclass(frozen=True)
class BestResponseGrid:
    """Finite strategy grids searched by the best-response dynamics."""

    valuations: tuple
    prices: tuple

    def __post_init__(self):
        for name, grid in (("valuations", self.valuations), ("prices", self.prices)):
            if len(grid) == 0:
                raise ValueError(f"grid {name} must not be empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"grid {name} must be strictly increasing")
            if grid[0] < 0:
                raise ValueError(f"grid {name} must be non-negative")


@dataclass
class AuctionState:
    """Mutable per-round market state the dynamics iterate on.

    ``latencies`` maps a device to the offload latency of its task at its
    chosen server (used for screening and the risk term).  ``true_values``
    snapshots the valuations considered truthful; payoffs during
    best-response search are always evaluated against these.
    """

    bids: list
    asks: list
    latencies: dict = field(default_factory=dict)
    true_values: dict = field(default_factory=dict)
    mode: str = "exact"

    def __post_init__(self):
        if not self.true_values:
            self.true_values = {b.ue_id: b.valuation for b in self.bids}


@dataclass
class EquilibriumReport:
    """Trace of the best-response iteration toward a fixed point."""

    iterations: int = 0
    converged: bool = False
    epsilon: float = 0.0
    bid_trace: list = field(default_factory=list)      # valuation vector per sweep
    price_trace: list = field(default_factory=list)    # price vector per sweep
    cost_trace: list = field(default_factory=list)     # total buyer cost per sweep
    welfare_trace: list = field(default_factory=list)  # social welfare per sweep
    gain_trace: list = field(default_factory=list)     # best deviation gain per sweep
    fulfillment: dict = field(default_factory=dict)
    final: RoundResult | None = None

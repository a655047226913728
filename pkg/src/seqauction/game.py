"""The sequential first-price auction as an extensive-form game.

A node is the allocation of the items sold so far (history matters only
through it). The seller commits upfront to a :class:`SellerPolicy`; buyers
follow a :class:`StrategyProfile` mapping each node to a bid vector. The
highest bid wins, exact ties go through the policy's tie-break, and the winner
pays their own bid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .assignment import optimal_assignment
from .market import (UNSOLD, Allocation, Market, assign, bundles, empty_allocation,
                     format_money, marginal_value, optimal_welfare, unsold)


class ProfileIncomplete(LookupError):
    """The strategy profile has no bids at a node that play reached."""


class ZeroWelfare(ArithmeticError):
    """Outcome welfare is zero while the optimum is positive (infinite PoA)."""


TieBreak = Callable[[Allocation, int, frozenset], int]


@dataclass(frozen=True)
class SellerPolicy:
    """``next_item(node)`` picks the unsold item to sell;
    ``tie_break(node, item, top_bidders)`` picks the winner among exact ties."""

    next_item: Callable[[Allocation], int]
    tie_break: TieBreak
    name: str = ""


def lowest_index_tiebreak(node: Allocation, item: int, top: frozenset) -> int:
    return min(top)


def max_tiebreak_rule(mkt: Market) -> TieBreak:
    """Ties go to the bidder with the highest marginal value for the item at
    the node (the per-item value ``v_ij`` for additive buyers); remaining ties
    to the lowest index."""

    def tie_break(node: Allocation, item: int, top: frozenset) -> int:
        return max(sorted(top), key=lambda i: (marginal_value(mkt, i, item, node), -i))

    return tie_break


def priority_tiebreak(priority: dict, fallback: TieBreak = lowest_index_tiebreak) -> TieBreak:
    """Ties on ``item`` go to the first tied buyer in ``priority[item]``;
    items without an entry (or with no listed buyer tied) use ``fallback``."""

    def tie_break(node: Allocation, item: int, top: frozenset) -> int:
        for i in priority.get(item, ()):
            if i in top:
                return i
        return fallback(node, item, top)

    return tie_break


def fixed_order_policy(order: Sequence[int], tie_break: TieBreak = lowest_index_tiebreak,
                       name: str = "") -> SellerPolicy:
    """Always sell the first unsold item of ``order``, whatever the history."""
    order = tuple(order)

    def next_item(node: Allocation) -> int:
        for j in order:
            if node[j] is UNSOLD:
                return j
        raise ValueError("no item left to sell")

    return SellerPolicy(next_item, tie_break, name or f"order{list(order)}")


class StrategyProfile:
    """Bids at every node, given by ``bids_fn(node, item) -> sequence``.

    ``bids_fn`` may return ``None`` for nodes the profile does not cover.
    Results are memoized per node.
    """

    def __init__(self, bids_fn: Callable[[Allocation, int], Optional[Sequence[Fraction]]],
                 name: str = ""):
        self._fn = bids_fn
        self._cache: dict = {}
        self.name = name

    def bids(self, node: Allocation, item: int) -> tuple:
        key = (node, item)
        if key not in self._cache:
            b = self._fn(node, item)
            if b is None:
                raise ProfileIncomplete(f"no bids for item {item} at node {node}")
            b = tuple(Fraction(x) for x in b)
            if any(x < 0 for x in b):
                raise ValueError(f"negative bid at node {node}: {b}")
            self._cache[key] = b
        return self._cache[key]


class Decision(NamedTuple):
    item: int
    bids: tuple
    winner: int
    price: Fraction


def resolve(bids: Sequence[Fraction], tie_break: TieBreak, node: Allocation, item: int) -> tuple:
    """Winner and price of one first-price round."""
    top_bid = max(bids)
    top = frozenset(i for i, b in enumerate(bids) if b == top_bid)
    w = tie_break(node, item, top) if len(top) > 1 else next(iter(top))
    if w not in top:
        raise ValueError(f"tie-break picked {w}, not among top bidders {sorted(top)}")
    return w, top_bid


@dataclass
class Outcome:
    allocation: tuple
    prices: tuple
    utilities: tuple
    revenue: Fraction
    welfare: Fraction

    @classmethod
    def from_sale(cls, mkt: Market, allocation: Sequence, prices: Sequence) -> "Outcome":
        allocation = tuple(allocation)
        prices = tuple(Fraction(p) for p in prices)
        held = bundles(allocation, mkt.n)
        values = [mkt.value(i, held[i]) for i in range(mkt.n)]
        paid = [sum((prices[j] for j in held[i]), Fraction(0)) for i in range(mkt.n)]
        return cls(allocation, prices, tuple(v - p for v, p in zip(values, paid)),
                   sum((p for j, p in enumerate(prices) if allocation[j] is not UNSOLD),
                       Fraction(0)),
                   sum(values, Fraction(0)))

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation),
            "prices": [format_money(p) for p in self.prices],
            "utilities": [format_money(u) for u in self.utilities],
            "revenue": format_money(self.revenue),
            "welfare": format_money(self.welfare),
        }


class Evaluator:
    """Memoized on-path play of ``profile`` from any node.

    ``continuation(node)[i]`` is buyer ``i``'s utility from ``node`` onward:
    the value the remaining sales add to its bundle minus what it pays for
    them.
    """

    def __init__(self, mkt: Market, policy: SellerPolicy, profile: StrategyProfile):
        self.mkt = mkt
        self.policy = policy
        self.profile = profile
        self._decisions: dict = {}
        self._cont: dict = {}

    def decision(self, node: Allocation) -> Decision:
        d = self._decisions.get(node)
        if d is None:
            item = self.policy.next_item(node)
            if node[item] is not UNSOLD:
                raise ValueError(f"policy offered sold item {item} at node {node}")
            bids = self.profile.bids(node, item)
            if len(bids) != self.mkt.n:
                raise ValueError(f"expected {self.mkt.n} bids at node {node}, got {len(bids)}")
            w, p = resolve(bids, self.policy.tie_break, node, item)
            d = Decision(item, bids, w, p)
            self._decisions[node] = d
        return d

    def stage_payoff(self, node: Allocation, item: int, winner: int, price: Fraction) -> tuple:
        """Immediate utility change when ``winner`` takes ``item`` at ``price``."""
        gain = marginal_value(self.mkt, winner, item, node) - price
        return tuple(gain if i == winner else Fraction(0) for i in range(self.mkt.n))

    def continuation(self, node: Allocation) -> tuple:
        u = self._cont.get(node)
        if u is None:
            if not unsold(node):
                u = (Fraction(0),) * self.mkt.n
            else:
                d = self.decision(node)
                rest = self.continuation(assign(node, d.item, d.winner))
                now = self.stage_payoff(node, d.item, d.winner, d.price)
                u = tuple(a + b for a, b in zip(now, rest))
            self._cont[node] = u
        return u

    def path(self, node: Optional[Allocation] = None) -> list:
        """Decisions along the equilibrium path from ``node``."""
        node = empty_allocation(self.mkt.m) if node is None else node
        out = []
        while unsold(node):
            d = self.decision(node)
            out.append((node, d))
            node = assign(node, d.item, d.winner)
        return out

    def outcome(self, node: Optional[Allocation] = None) -> Outcome:
        node = empty_allocation(self.mkt.m) if node is None else node
        alloc = list(node)
        prices: list = [Fraction(0)] * self.mkt.m
        for _, d in self.path(node):
            alloc[d.item] = d.winner
            prices[d.item] = d.price
        return Outcome.from_sale(self.mkt, alloc, prices)


def play(mkt: Market, policy: SellerPolicy, profile: StrategyProfile,
         start: Optional[Allocation] = None) -> Outcome:
    """Run the auction from ``start`` (default: nothing sold) to the end.

    Prices of items sold before ``start`` are reported as 0.
    """
    return Evaluator(mkt, policy, profile).outcome(start)


def utility(outcome: Outcome, buyer: int) -> Fraction:
    return outcome.utilities[buyer]


def revenue(outcome: Outcome) -> Fraction:
    return outcome.revenue


def welfare(outcome: Outcome) -> Fraction:
    return outcome.welfare


def best_welfare(mkt: Market) -> Fraction:
    """Optimal social welfare: assignment for unit demand, per-item maximum
    for additive buyers, exhaustive enumeration otherwise."""
    if mkt.is_unit_demand():
        _, w = optimal_assignment([mkt.item_values(i) for i in range(mkt.n)])
        return w
    if mkt.is_additive():
        return sum((max(mkt.buyers[i].values[j] for i in range(mkt.n)) for j in range(mkt.m)),
                   Fraction(0))
    return optimal_welfare(mkt)[0]


def poa(mkt: Market, outcome: Outcome) -> Fraction:
    """Optimal welfare divided by the outcome's welfare."""
    opt = best_welfare(mkt)
    if outcome.welfare == 0:
        if opt == 0:
            return Fraction(1)
        raise ZeroWelfare("outcome welfare is 0 while the optimum is positive")
    return opt / outcome.welfare

"""Constructive equilibrium strategies.

Every constructor returns a :class:`StrategyTree`: a seller policy plus a bid
profile defined lazily at every node, so verification can walk any subtree.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .equilibrium import (EquilibriumReport, OCVerdict, folks_check, is_optimistic_conservative,
                          iter_nodes, verify_spe)
from .game import (Evaluator, Outcome, SellerPolicy, StrategyProfile, fixed_order_policy,
                   max_tiebreak_rule)
from .market import (UNSOLD, Allocation, Market, assign, empty_allocation, format_money,
                     marginal_value, money, poa_additive, low_revenue, residual_value, unsold)
from .walrasian import minimal_walrasian, support_order, supporters


@dataclass
class StrategyTree:
    """A seller policy and bid profile, with optional per-node annotations.

    ``annotate(node)`` returns extra JSON-ready data for :meth:`export`
    (for Unit-Wlrs-Eq: the node's Walrasian prices and support order).
    """

    market: Market
    policy: SellerPolicy
    profile: StrategyProfile
    provenance: str
    annotate: Optional[Callable[[Allocation], dict]] = None
    node_info: Optional[Callable[[Allocation], object]] = None
    _ev: Optional[Evaluator] = field(default=None, repr=False)

    @property
    def evaluator(self) -> Evaluator:
        if self._ev is None:
            self._ev = Evaluator(self.market, self.policy, self.profile)
        return self._ev

    def outcome(self, node: Optional[Allocation] = None) -> Outcome:
        return self.evaluator.outcome(node)

    def continuation(self, node: Allocation) -> tuple:
        return self.evaluator.continuation(node)

    def verify(self, delta=Fraction(1, 16), **kwargs) -> EquilibriumReport:
        return verify_spe(self.market, self.policy, self.profile, delta, **kwargs)

    def is_optimistic_conservative(self, mode: str = "auto") -> OCVerdict:
        return is_optimistic_conservative(self.market, self.policy, self.profile, mode,
                                          evaluator=self.evaluator)

    def export(self, max_nodes: int = 10_000) -> dict:
        """Per-node items, bids and winners for every deviation-reachable node."""
        nodes = []
        for node in iter_nodes(self.market, self.policy, max_nodes):
            d = self.evaluator.decision(node)
            row = {
                "allocation": list(node),
                "item": d.item,
                "bids": [format_money(b) for b in d.bids],
                "winner": d.winner,
                "price": format_money(d.price),
            }
            if self.annotate is not None:
                row.update(self.annotate(node))
            nodes.append(row)
        return {"provenance": self.provenance, "policy": self.policy.name, "nodes": nodes}


# ---------------------------------------------------------------------------
# Unit demand
# ---------------------------------------------------------------------------


class _NodeWE(NamedTuple):
    we: object
    supporters: dict
    order: tuple
    residual: tuple  # residual[i][j] for unsold j, else 0


def unit_wlrs_eq(mkt: Market) -> StrategyTree:
    """Sell each residual market in the support order of its minimal
    Walrasian equilibrium.

    At node ``S`` the item on sale is the head of the support order of the
    minimal Walrasian equilibrium on the unsold items (with residual values),
    and buyer ``i`` bids ``max(0, v'_ij - u_i)`` where ``u_i`` is its utility
    in that equilibrium. The winner and the supporter therefore both bid the
    price, and everybody else bids at most the price. Ties go to the
    equilibrium winner.
    """
    if not mkt.is_unit_demand():
        raise TypeError("unit_wlrs_eq needs unit-demand buyers")
    cache: dict = {}
    lock = threading.Lock()

    def info(node: Allocation) -> _NodeWE:
        got = cache.get(node)
        if got is None:
            we = minimal_walrasian(mkt, node)
            supp = supporters(we)
            res = tuple(tuple(residual_value(mkt, i, j, node) if node[j] is UNSOLD
                              else Fraction(0) for j in range(mkt.m)) for i in range(mkt.n))
            got = _NodeWE(we, supp, support_order(we, supp), res)
            with lock:
                got = cache.setdefault(node, got)
        return got

    def next_item(node: Allocation) -> int:
        return info(node).order[0]

    def tie_break(node: Allocation, item: int, top: frozenset) -> int:
        nw = info(node)
        w = nw.we.winner(item)
        if w in top:
            return w
        return max(sorted(top), key=lambda i: (nw.residual[i][item], -i))

    def bids(node: Allocation, item: int):
        nw = info(node)
        u = nw.we.utilities
        return [max(Fraction(0), nw.residual[i][item] - u[i]) for i in range(mkt.n)]

    def annotate(node: Allocation) -> dict:
        nw = info(node)
        return {
            "we_prices": {str(j): format_money(p) for j, p in nw.we.prices.items()},
            "we_winners": {str(j): w for j, w in nw.we.allocation.items()},
            "supporters": {str(j): s for j, s in nw.supporters.items()},
            "support_order": list(nw.order),
        }

    policy = SellerPolicy(next_item, tie_break, "support-order")
    return StrategyTree(mkt, policy, StrategyProfile(bids, "unit-wlrs-eq"), "unit-wlrs-eq",
                        annotate, info)


# ---------------------------------------------------------------------------
# Additive buyers
# ---------------------------------------------------------------------------


def _second_highest(col: Sequence[Fraction]) -> Fraction:
    top = sorted(col, reverse=True)
    return top[1] if len(top) > 1 else Fraction(0)


def additive_outcome(mkt: Market) -> tuple:
    """Item-by-item second-price outcome for additive buyers.

    Every buyer bids ``min(v_ij, second-highest value of j)``; ties go to the
    highest value. Returns ``(Outcome, StrategyTree)``.
    """
    if not mkt.is_additive():
        raise TypeError("additive_outcome needs additive buyers")
    cols = [[mkt.buyers[i].values[j] for i in range(mkt.n)] for j in range(mkt.m)]
    second = [_second_highest(c) for c in cols]

    def bids(node, item):
        return [min(v, second[item]) for v in cols[item]]

    policy = fixed_order_policy(range(mkt.m), max_tiebreak_rule(mkt), "identity/max-tie")
    tree = StrategyTree(mkt, policy, StrategyProfile(bids, "second-price"), "additive-outcome")
    winners = [max(range(mkt.n), key=lambda i: (c[i], -i)) for c in cols]
    return Outcome.from_sale(mkt, winners, second), tree


def _two_phase(mkt: Market, low: Fraction, high: Fraction, name: str) -> StrategyTree:
    """Buyer 0 is A, buyer 1 is B. While A holds nothing both bid ``low`` and
    ties go to B, except on the last item where they go to A. Once A holds an
    item both bid ``high`` and ties go to A."""
    last = mkt.m - 1

    def a_holds(node):
        return any(w == 0 for w in node)

    def bids(node, item):
        b = high if a_holds(node) else low
        return [b, b]

    def tie_break(node, item, top):
        if 0 in top and (a_holds(node) or item == last):
            return 0
        return 1 if 1 in top else min(top)

    policy = fixed_order_policy(range(mkt.m), tie_break, "identity/two-phase")
    return StrategyTree(mkt, policy, StrategyProfile(bids, name), name)


def bad_spe_additive(m: int) -> StrategyTree:
    """Low-welfare equilibrium on ``poa_additive(m)``: B takes all but the
    last item at price 1, and A the last at price 1."""
    mkt = poa_additive(m).market
    return _two_phase(mkt, Fraction(1), Fraction(m), "bad-spe-additive")


def low_revenue_spe(m: int, eps) -> StrategyTree:
    """Equilibrium on ``low_revenue(m, eps)`` selling every item at ``eps``."""
    eps = money(eps)
    mkt = low_revenue(m, eps).market
    return _two_phase(mkt, eps, Fraction(m), "low-revenue-spe")


# ---------------------------------------------------------------------------
# The characterization's constructive profile
# ---------------------------------------------------------------------------


def folks_strategy(mkt: Market, allocation: Sequence[int], prices: Sequence, order: Sequence[int]
                   ) -> StrategyTree:
    """Profile realising ``(allocation, prices)`` when sold in ``order``.

    On the path everyone bids the item's price and ties go to its designated
    winner. Once the path is left, everyone bids the largest marginal value
    for the item and ties go to the buyer holding it (then lowest index), so
    all buyers earn zero from there on.
    """
    allocation = tuple(allocation)
    prices = tuple(money(p) for p in prices)
    order = tuple(order)
    path = {}
    node = empty_allocation(mkt.m)
    for j in order:
        path[node] = j
        node = assign(node, j, allocation[j])
    max_tie = max_tiebreak_rule(mkt)

    def bids(node, item):
        if path.get(node) == item:
            return [prices[item]] * mkt.n
        top = max(marginal_value(mkt, i, item, node) for i in range(mkt.n))
        return [top] * mkt.n

    def tie_break(node, item, top):
        if path.get(node) == item and allocation[item] in top:
            return allocation[item]
        return max_tie(node, item, top)

    policy = fixed_order_policy(order, tie_break, f"order{list(order)}")
    return StrategyTree(mkt, policy, StrategyProfile(bids, "folks"), "folks")


def nonsingleton_spe(mkt: Market, winner: int = 0) -> StrategyTree:
    """Everything goes to ``winner`` at price 0, sold in index order.

    Requires every single item to be worthless to every buyer.
    """
    for i in range(mkt.n):
        for j in range(mkt.m):
            if mkt.value(i, [j]) != 0:
                raise ValueError(f"buyer {i} values item {j} alone at {mkt.value(i, [j])}")
    alloc = (winner,) * mkt.m
    return folks_strategy(mkt, alloc, [0] * mkt.m, range(mkt.m))


class GreedyPlan(NamedTuple):
    order: tuple
    allocation: tuple
    prices: tuple


def greedy_plan(mkt: Market) -> GreedyPlan:
    """Repeatedly hand out the (buyer, unsold item) pair of largest marginal
    value, priced at that marginal value. Ties: lowest buyer, then item."""
    node = empty_allocation(mkt.m)
    order, prices = [], [Fraction(0)] * mkt.m
    for _ in range(mkt.m):
        best = None
        for i in range(mkt.n):
            for j in unsold(node):
                v = marginal_value(mkt, i, j, node)
                if best is None or v > best[0]:
                    best = (v, i, j)
        v, i, j = best
        order.append(j)
        prices[j] = v
        node = assign(node, j, i)
    return GreedyPlan(tuple(order), node, tuple(prices))


def greedy_submodular(mkt: Market) -> tuple:
    """Greedy selling order and the full-surplus equilibrium along it.

    Returns ``(order, StrategyTree)``. Every buyer pays its marginal value,
    so all utilities are zero and revenue equals the greedy welfare.
    """
    plan = greedy_plan(mkt)
    tree = folks_strategy(mkt, plan.allocation, plan.prices, plan.order)
    tree.provenance = "greedy-submodular"
    return plan.order, tree


class OrderMattersPair(NamedTuple):
    bad_order: tuple
    bad_allocation: tuple
    bad_prices: tuple
    good_order: tuple


def order_matters_pair(m: int) -> OrderMattersPair:
    """For ``order_matters(m, eps)``: an index-order certificate with revenue
    1, and the reversed order, under which every equilibrium earns about m."""
    if m < 2:
        raise ValueError("order_matters needs m >= 2")
    alloc = tuple(j + 1 for j in range(m))
    prices = (Fraction(1),) + (Fraction(0),) * (m - 1)
    return OrderMattersPair(tuple(range(m)), alloc, prices, tuple(reversed(range(m))))


def order_matters_bad_spe(mkt: Market) -> StrategyTree:
    """The revenue-1 equilibrium of an ``order_matters`` market."""
    pair = order_matters_pair(mkt.m)
    folks_check(mkt, pair.bad_allocation, pair.bad_prices, pair.bad_order)
    return folks_strategy(mkt, pair.bad_allocation, pair.bad_prices, pair.bad_order)

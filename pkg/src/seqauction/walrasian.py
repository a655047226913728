"""Minimal Walrasian equilibria, supporters and support orders for
unit-demand markets.

A :class:`WalrasianEquilibrium` lives on a subset of the items (the unsold
ones at some game node) and carries the value matrix it was computed from,
so residual markets and the full market are handled the same way.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence

from .assignment import optimal_assignment
from .market import Allocation, Market, empty_allocation, residual_value, unsold


class PositivePriceUnsupported(ValueError):
    """An item has a positive price but no supporting buyer; the equilibrium
    was not minimal."""


class NoProgressError(ValueError):
    """Support-order construction stalled; the equilibrium was not minimal."""


@dataclass(frozen=True)
class WalrasianEquilibrium:
    """Prices and a matching over ``items``.

    ``values[i][k]``, ``winners[k]`` and ``price_list[k]`` are indexed by the
    position ``k`` of the item in ``items``. Unmatched items (``None``) carry
    price 0.
    """

    items: tuple
    values: tuple
    winners: tuple
    price_list: tuple

    @property
    def n(self) -> int:
        return len(self.values)

    def _pos(self, j: int) -> int:
        try:
            return self.items.index(j)
        except ValueError:
            raise KeyError(f"item {j} is not part of this equilibrium") from None

    def price(self, j: int) -> Fraction:
        return self.price_list[self._pos(j)]

    def winner(self, j: int) -> Optional[int]:
        return self.winners[self._pos(j)]

    def value(self, i: int, j: int) -> Fraction:
        return self.values[i][self._pos(j)]

    @property
    def prices(self) -> dict:
        return dict(zip(self.items, self.price_list))

    @property
    def allocation(self) -> dict:
        return dict(zip(self.items, self.winners))

    def item_of(self, i: int) -> Optional[int]:
        for j, w in zip(self.items, self.winners):
            if w == i:
                return j
        return None

    @property
    def utilities(self) -> tuple:
        u = [Fraction(0)] * self.n
        for k, w in enumerate(self.winners):
            if w is not None:
                u[w] = self.values[w][k] - self.price_list[k]
        return tuple(u)

    @property
    def revenue(self) -> Fraction:
        return sum(self.price_list, Fraction(0))

    @property
    def welfare(self) -> Fraction:
        return sum((self.values[w][k] for k, w in enumerate(self.winners) if w is not None),
                   Fraction(0))


def value_matrix(mkt: Market, S: Optional[Allocation] = None) -> tuple:
    """Residual unit-demand values of every buyer for the items unsold in ``S``.

    Returns ``(items, matrix)``.
    """
    if S is None:
        S = empty_allocation(mkt.m)
    items = unsold(S)
    matrix = tuple(tuple(residual_value(mkt, i, j, S) for j in items) for i in range(mkt.n))
    return items, matrix


def minimal_walrasian_matrix(items: Sequence[int], values: Sequence[Sequence[Fraction]]
                             ) -> WalrasianEquilibrium:
    """Minimal Walrasian prices as per-winner VCG payments.

    ``p_j = W(-w) - (W - v_wj)`` for the winner ``w`` of ``j``; one assignment
    solve for the full market plus one per matched buyer.
    """
    items = tuple(items)
    values = tuple(tuple(Fraction(x) for x in row) for row in values)
    n = len(values)
    winners, welfare = optimal_assignment(values)
    prices = []
    for k, w in enumerate(winners):
        if w is None:
            prices.append(Fraction(0))
            continue
        _, without = optimal_assignment(values, [i for i in range(n) if i != w])
        prices.append(without - (welfare - values[w][k]))
    return WalrasianEquilibrium(items, values, tuple(winners), tuple(prices))


def minimal_walrasian(mkt: Market, S: Optional[Allocation] = None) -> WalrasianEquilibrium:
    """Minimal Walrasian equilibrium of the (residual) market on the unsold items.

    Unit-demand buyers use residual values. For an all-additive market, items
    are independent and the minimal prices are the per-item second-highest
    values, each item going to the lowest-index highest bidder.
    """
    if S is None:
        S = empty_allocation(mkt.m)
    if mkt.is_additive():
        items = unsold(S)
        values = tuple(tuple(mkt.buyers[i].values[j] for j in items) for i in range(mkt.n))
        winners, prices = [], []
        for k in range(len(items)):
            col = [values[i][k] for i in range(mkt.n)]
            w = max(range(mkt.n), key=lambda i: (col[i], -i))
            winners.append(w)
            prices.append(max((col[i] for i in range(mkt.n) if i != w), default=Fraction(0)))
        return WalrasianEquilibrium(items, values, tuple(winners), tuple(prices))
    if not mkt.is_unit_demand():
        raise TypeError("minimal_walrasian supports unit-demand or all-additive markets")
    items, matrix = value_matrix(mkt, S)
    return minimal_walrasian_matrix(items, matrix)


class WalrasianVerdict(NamedTuple):
    ok: bool
    witness: Optional[tuple]  # (buyer, better item or None for "rather buy nothing")

    def __bool__(self) -> bool:
        return self.ok


def check_walrasian(values: Sequence[Sequence[Fraction]], winners: Sequence[Optional[int]],
                    prices: Sequence[Fraction], items: Optional[Sequence[int]] = None
                    ) -> WalrasianVerdict:
    """Best-response test for unit-demand buyers.

    A buyer holding column ``k`` needs ``v_ik - p_k >= v_ij - p_j`` for all
    ``j`` and ``v_ik - p_k >= 0``; a buyer holding nothing needs
    ``v_ij <= p_j``. Unmatched items must be free. Buyers holding several
    columns are valued at their best one.
    """
    items = tuple(range(len(prices))) if items is None else tuple(items)
    if any(p < 0 for p in prices):
        raise ValueError("prices must be non-negative")
    for k, w in enumerate(winners):
        if w is None and prices[k] != 0:
            return WalrasianVerdict(False, (None, items[k]))
    for i, row in enumerate(values):
        held = [k for k, w in enumerate(winners) if w == i]
        u = (max(row[k] for k in held) - sum(prices[k] for k in held)) if held else Fraction(0)
        if u < 0:
            return WalrasianVerdict(False, (i, None))
        for k in range(len(prices)):
            if row[k] - prices[k] > u:
                return WalrasianVerdict(False, (i, items[k]))
    return WalrasianVerdict(True, None)


def is_walrasian(mkt: Market, allocation, prices) -> WalrasianVerdict:
    """Check prices and an allocation against the unit-demand market ``mkt``.

    ``allocation`` and ``prices`` are per-item sequences (or dicts keyed by
    item). The witness names the first buyer found who would rather switch,
    together with the item they prefer.
    """
    if isinstance(allocation, dict):
        allocation = [allocation[j] for j in range(mkt.m)]
    if isinstance(prices, dict):
        prices = [prices[j] for j in range(mkt.m)]
    values = [mkt.item_values(i) for i in range(mkt.n)]
    return check_walrasian(values, list(allocation), [Fraction(p) for p in prices])


def supporters(we: WalrasianEquilibrium) -> dict:
    """Map every positively priced item to its supporting buyer.

    Buyer ``i`` supports ``j`` when it does not win ``j`` and is exactly
    indifferent between its own item and ``j`` (or, holding nothing, values
    ``j`` at exactly its price). Lowest index wins among several.
    """
    util = we.utilities
    held = {w: k for k, w in enumerate(we.winners) if w is not None}
    out = {}
    for k, j in enumerate(we.items):
        p = we.price_list[k]
        if p <= 0:
            continue
        for i in range(we.n):
            if i == we.winners[k]:
                continue
            if i in held:
                if we.values[i][k] - p == util[i]:
                    out[j] = i
                    break
            elif we.values[i][k] == p:
                out[j] = i
                break
        else:
            raise PositivePriceUnsupported(f"item {j} has price {p} and no supporter")
    return out


def support_order(we: WalrasianEquilibrium, supp: Optional[dict] = None) -> tuple:
    """Selling order in which every supporter wins later or never.

    Built back to front: free items last in ascending order, then repeatedly
    the lowest-index item whose winner is still outside the done set ``D``
    and whose supporter is inside it.
    """
    if supp is None:
        supp = supporters(we)
    zero = [j for j, p in zip(we.items, we.price_list) if p == 0]
    done_items = set(zero)
    D = {i for i in range(we.n) if we.item_of(i) is None}
    D |= {we.winner(j) for j in zero if we.winner(j) is not None}
    front = []
    while len(done_items) < len(we.items):
        for j in we.items:
            if j in done_items:
                continue
            w = we.winner(j)
            if w not in D and supp.get(j) in D:
                front.append(j)
                done_items.add(j)
                D.add(w)
                break
        else:
            raise NoProgressError("no remaining item has its supporter in the done set")
    return tuple(reversed(front)) + tuple(sorted(zero))


def is_support_order(we: WalrasianEquilibrium, supp: dict, order: Sequence[int]) -> bool:
    """Every supporter wins an item strictly later in ``order`` or none at all."""
    pos = {j: t for t, j in enumerate(order)}
    if sorted(order) != sorted(we.items):
        return False
    for j, s in supp.items():
        k = we.item_of(s)
        if k is not None and pos[k] <= pos[j]:
            return False
    return True


def is_complete(mkt: Market) -> bool:
    """Strict Hall condition ``|T| < |B(T)|`` for every non-empty item set.

    Requires unit-demand values that are 0 or at least 1; ``B(T)`` is the set
    of buyers valuing some item of ``T`` at 1 or more.
    """
    if mkt.m > 16:
        raise ValueError("completeness is checked exhaustively for m <= 16")
    rows = [mkt.item_values(i) for i in range(mkt.n)]
    for row in rows:
        if any(0 < x < 1 for x in row):
            raise ValueError("values must be 0 or at least 1")
    interest = [frozenset(j for j, x in enumerate(row) if x >= 1) for row in rows]
    for size in range(1, mkt.m + 1):
        for T in itertools.combinations(range(mkt.m), size):
            T = set(T)
            if sum(1 for s in interest if s & T) <= len(T):
                return False
    return True


def walrasian_by_enumeration(mkt: Market, price_grid: Iterable[Fraction]) -> list:
    """All (allocation, prices) pairs on ``price_grid`` that are Walrasian for
    arbitrary valuations, by brute force over bundles.

    Each buyer's bundle must maximise ``v_i(B) - p(B)`` over every bundle;
    unsold items must be free. Meant for tiny markets.
    """
    grid = sorted(set(Fraction(p) for p in price_grid))
    subsets = [frozenset(c) for r in range(mkt.m + 1)
               for c in itertools.combinations(range(mkt.m), r)]
    found = []
    for alloc in itertools.product([None] + list(range(mkt.n)), repeat=mkt.m):
        for prices in itertools.product(grid, repeat=mkt.m):
            if any(w is None and p != 0 for w, p in zip(alloc, prices)):
                continue
            ok = True
            for i in range(mkt.n):
                mine = frozenset(j for j, w in enumerate(alloc) if w == i)
                u = mkt.value(i, mine) - sum(prices[j] for j in mine)
                if any(mkt.value(i, B) - sum(prices[j] for j in B) > u for B in subsets):
                    ok = False
                    break
            if ok:
                found.append((tuple(alloc), tuple(prices)))
    return found

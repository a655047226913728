"""Equilibrium checks: the snatch-deviation characterization of pure SPE,
optimistic-conservative bid caps, and a one-shot-deviation SPE verifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional, Sequence

from .game import Evaluator, SellerPolicy, StrategyProfile, resolve
from .market import (UNSOLD, Allocation, Market, assign, empty_allocation, format_money,
                     marginal_value, money, unsold)

MAX_SEARCH_ITEMS = 8


class NegativeUtility(ValueError):
    """Some buyer ends with negative utility under the proposed (allocation, prices)."""


class TooLarge(ValueError):
    """Exhaustive permutation search refused; the verdict is undecided."""


# ---------------------------------------------------------------------------
# Characterization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FolksCertificate:
    allocation: tuple
    prices: tuple
    order: tuple
    utilities: tuple
    slacks: dict  # (buyer, position in order) -> slack

    @property
    def valid(self) -> bool:
        # a lone buyer faces no threat, so it never pays a positive price
        lone = len(self.utilities) == 1 and any(p > 0 for p in self.prices)
        return (not lone and all(s >= 0 for s in self.slacks.values())
                and all(u >= 0 for u in self.utilities))

    @property
    def revenue(self) -> Fraction:
        return sum(self.prices, Fraction(0))

    def violations(self) -> list:
        return sorted(k for k, s in self.slacks.items() if s < 0)

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation),
            "prices": [format_money(p) for p in self.prices],
            "order": list(self.order),
            "utilities": [format_money(u) for u in self.utilities],
            "valid": self.valid,
            "violations": [list(v) for v in self.violations()],
            "min_slack": format_money(min(self.slacks.values())),
        }


def _final_utilities(mkt: Market, allocation: Sequence[int], prices: Sequence[Fraction]) -> tuple:
    out = []
    for i in range(mkt.n):
        mine = [j for j, w in enumerate(allocation) if w == i]
        out.append(mkt.value(i, mine) - sum((prices[j] for j in mine), Fraction(0)))
    return tuple(out)


def _check_args(mkt: Market, allocation, prices) -> tuple:
    allocation = tuple(allocation)
    prices = tuple(money(p) for p in prices)
    if len(allocation) != mkt.m or len(prices) != mkt.m:
        raise ValueError("allocation and prices need one entry per item")
    if any(w is UNSOLD or not 0 <= w < mkt.n for w in allocation):
        raise ValueError("every item must be allocated to a buyer")
    if any(p < 0 for p in prices):
        raise ValueError("prices must be non-negative")
    return allocation, prices


def _slack(mkt: Market, i: int, held: frozenset, paid: Fraction, j: int, pj: Fraction,
           u: Fraction) -> Fraction:
    return u - (mkt.value(i, held | {j}) - pj - paid)


def folks_check(mkt: Market, allocation: Sequence[int], prices: Sequence, order: Sequence[int]
                ) -> FolksCertificate:
    """Slack of every "snatch item ``order[t]`` then drop out" deviation.

    For buyer ``i`` and position ``t`` the slack is
    ``u_i - (v_i(x + {order[t]}) - p(order[t]) - p(x))`` where ``x`` is what
    ``i`` won among ``order[:t]``. The pair is an SPE outcome under this
    selling order iff every slack and every final utility is non-negative.

    Raises:
        NegativeUtility: some buyer ends below zero, so no order can help.
    """
    allocation, prices = _check_args(mkt, allocation, prices)
    order = tuple(order)
    if sorted(order) != list(range(mkt.m)):
        raise ValueError("order must be a permutation of the items")
    util = _final_utilities(mkt, allocation, prices)
    bad = [i for i, u in enumerate(util) if u < 0]
    if bad:
        raise NegativeUtility(f"buyers {bad} have negative utility")
    slacks = {}
    for i in range(mkt.n):
        held: frozenset = frozenset()
        paid = Fraction(0)
        for t, j in enumerate(order):
            slacks[(i, t)] = _slack(mkt, i, held, paid, j, prices[j], util[i])
            if allocation[j] == i:
                held = held | {j}
                paid += prices[j]
    return FolksCertificate(allocation, prices, order, util, slacks)


def folks_search(mkt: Market, allocation: Sequence[int], prices: Sequence,
                 max_items: int = MAX_SEARCH_ITEMS) -> Optional[tuple]:
    """First selling order (lexicographically) passing :func:`folks_check`,
    or ``None`` when no order exists, in which case no pure SPE has this
    allocation and these prices.

    Depth-first over prefixes: a slack depends only on the items sold before.

    Raises:
        TooLarge: for more than ``max_items`` items.
    """
    if mkt.m > max_items:
        raise TooLarge(f"{mkt.m} items exceed the exhaustive limit of {max_items}")
    allocation, prices = _check_args(mkt, allocation, prices)
    util = _final_utilities(mkt, allocation, prices)
    if any(u < 0 for u in util) or (mkt.n == 1 and any(p > 0 for p in prices)):
        return None

    def ok(prefix: tuple, j: int) -> bool:
        for i in range(mkt.n):
            held = frozenset(k for k in prefix if allocation[k] == i)
            paid = sum((prices[k] for k in held), Fraction(0))
            if _slack(mkt, i, held, paid, j, prices[j], util[i]) < 0:
                return False
        return True

    def extend(prefix: tuple, rest: tuple) -> Optional[tuple]:
        if not rest:
            return prefix
        for j in rest:
            if ok(prefix, j):
                found = extend(prefix + (j,), tuple(k for k in rest if k != j))
                if found is not None:
                    return found
        return None

    return extend((), tuple(range(mkt.m)))


# ---------------------------------------------------------------------------
# Optimistic-conservative bidding
# ---------------------------------------------------------------------------


def oc_cap(mkt: Market, node: Allocation, item: int, buyer: int, on_path_utility: Fraction,
           won_payoff: Optional[Fraction] = None) -> Fraction:
    """Largest bid that cannot leave ``buyer`` worse off than the path if it wins.

    With ``won_payoff=None`` this is ``max(0, r - u)`` where ``r`` is the
    buyer's marginal (for unit demand: residual) value for ``item`` at
    ``node`` and ``u`` its on-path continuation utility from ``node``.
    Passing ``won_payoff`` (the buyer's whole continuation after winning
    ``item``, before paying for it) gives the exact never-worse-off cap
    ``max(0, won_payoff - u)`` instead.
    """
    gain = marginal_value(mkt, buyer, item, node) if won_payoff is None else won_payoff
    return max(Fraction(0), gain - on_path_utility)


def cap_mode_for(mkt: Market, mode: str = "auto") -> str:
    """``"residual"`` for all-unit-demand markets, ``"exact"`` otherwise."""
    if mode == "auto":
        return "residual" if mkt.is_unit_demand() else "exact"
    if mode not in ("residual", "exact"):
        raise ValueError(f"unknown cap mode {mode!r}")
    return mode


def iter_nodes(mkt: Market, policy: SellerPolicy, max_nodes: Optional[int] = None
               ) -> Iterator[Allocation]:
    """Every node reachable when any buyer may win any round (depth first)."""
    stack = [empty_allocation(mkt.m)]
    count = 0
    while stack:
        node = stack.pop()
        if not unsold(node):
            continue
        count += 1
        if max_nodes is not None and count > max_nodes:
            raise BudgetExceeded(f"more than {max_nodes} nodes")
        yield node
        item = policy.next_item(node)
        for w in reversed(range(mkt.n)):
            stack.append(assign(node, item, w))


class BudgetExceeded(RuntimeError):
    """A search would exceed its configured size bound."""


class OCViolation(NamedTuple):
    node: tuple
    buyer: int
    item: int
    bid: Fraction
    cap: Fraction


class OCVerdict(NamedTuple):
    ok: bool
    witness: Optional[OCViolation]

    def __bool__(self) -> bool:
        return self.ok


def is_optimistic_conservative(mkt: Market, policy: SellerPolicy, profile: StrategyProfile,
                               mode: str = "auto", max_nodes: Optional[int] = 200_000,
                               evaluator: Optional[Evaluator] = None) -> OCVerdict:
    """Every bid at every node is at most the bidder's OC cap.

    ``mode`` picks the cap: ``"residual"`` (marginal value minus on-path
    continuation utility), ``"exact"`` (continuation after winning minus
    on-path continuation), or ``"auto"``.
    """
    mode = cap_mode_for(mkt, mode)
    ev = evaluator or Evaluator(mkt, policy, profile)
    for node in iter_nodes(mkt, policy, max_nodes):
        d = ev.decision(node)
        u = ev.continuation(node)
        for i, b in enumerate(d.bids):
            if b == 0:
                continue
            won = None
            if mode == "exact":
                won = (marginal_value(mkt, i, d.item, node)
                       + ev.continuation(assign(node, d.item, i))[i])
            cap = oc_cap(mkt, node, d.item, i, u[i], won)
            if b > cap:
                return OCVerdict(False, OCViolation(node, i, d.item, b, cap))
    return OCVerdict(True, None)


# ---------------------------------------------------------------------------
# SPE verification
# ---------------------------------------------------------------------------


class Deviation(NamedTuple):
    node: tuple
    buyer: int
    item: int
    bid: Fraction
    gain: Fraction

    def to_dict(self) -> dict:
        return {"node": list(self.node), "buyer": self.buyer, "item": self.item,
                "bid": format_money(self.bid), "gain": format_money(self.gain)}


@dataclass
class EquilibriumReport:
    verdict: str  # "SPE", "not-SPE" or "undecided"
    delta: Fraction
    witness: Optional[Deviation] = None
    grid_marginal: bool = False
    nodes_checked: int = 0
    oc: Optional[OCVerdict] = None
    note: str = ""

    @property
    def is_spe(self) -> bool:
        return self.verdict == "SPE"

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "delta": format_money(self.delta),
            "nodes_checked": self.nodes_checked,
            "grid_marginal": self.grid_marginal,
            "witness": self.witness.to_dict() if self.witness else None,
        }
        if self.oc is not None:
            w = self.oc.witness
            out["optimistic_conservative"] = {
                "ok": self.oc.ok,
                "witness": None if w is None else {
                    "node": list(w.node), "buyer": w.buyer, "item": w.item,
                    "bid": format_money(w.bid), "cap": format_money(w.cap)},
            }
        if self.note:
            out["note"] = self.note
        return out


def _next_grid(x: Fraction, delta: Fraction) -> Fraction:
    """Smallest multiple of ``delta`` strictly above ``x``."""
    return (math.floor(x / delta) + 1) * delta


def deviation_bids(bids: Sequence[Fraction], buyer: int, delta: Fraction) -> list:
    """Bids that realise every distinct outcome of a unilateral deviation.

    Against fixed opposing bids the round's result only changes at the
    opposing bid levels, and once winning, lower is better. So the grid
    ``{0, delta, ...}`` plus the exact bids and their ``+-delta``
    neighbours is covered by ``0``, every bid level ``b``, ``b +- delta``
    and the first grid point above ``b``.
    """
    cand = {Fraction(0)}
    for b in bids:
        cand.update((b, b + delta, b - delta, _next_grid(b, delta)))
    cand.discard(bids[buyer])
    return sorted(c for c in cand if c >= 0)


def verify_spe(mkt: Market, policy: SellerPolicy, profile: StrategyProfile,
               delta: Fraction = Fraction(1, 16), max_nodes: Optional[int] = 200_000,
               check_oc: bool = False, oc_mode: str = "auto") -> EquilibriumReport:
    """One-shot deviation check at every node reachable by deviations.

    At each node each buyer tries every bid from :func:`deviation_bids`,
    after which everybody follows the profile. The verdict is ``"SPE"`` when
    no deviation gains anything; otherwise the largest gain is reported, and
    flagged ``grid_marginal`` if it is at most ``delta * m``.
    """
    delta = money(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    ev = Evaluator(mkt, policy, profile)
    worst: Optional[Deviation] = None
    checked = 0
    try:
        for node in iter_nodes(mkt, policy, max_nodes):
            checked += 1
            d = ev.decision(node)
            u = ev.continuation(node)
            for i in range(mkt.n):
                for x in deviation_bids(d.bids, i, delta):
                    dev = d.bids[:i] + (x,) + d.bids[i + 1:]
                    w, price = resolve(dev, policy.tie_break, node, d.item)
                    payoff = ev.continuation(assign(node, d.item, w))[i]
                    if w == i:
                        payoff += marginal_value(mkt, i, d.item, node) - price
                    gain = payoff - u[i]
                    if gain > 0 and (worst is None or gain > worst.gain):
                        worst = Deviation(node, i, d.item, x, gain)
    except BudgetExceeded as exc:
        return EquilibriumReport("undecided", delta, nodes_checked=checked, note=str(exc))
    report = EquilibriumReport("SPE" if worst is None else "not-SPE", delta, worst,
                               worst is not None and worst.gain <= delta * mkt.m, checked)
    if check_oc:
        report.oc = is_optimistic_conservative(mkt, policy, profile, oc_mode, max_nodes, ev)
    return report


def replay_deviation(mkt: Market, policy: SellerPolicy, profile: StrategyProfile,
                     witness: Deviation) -> tuple:
    """Play from the witness node with and without the deviation.

    Returns ``(on_path, deviated)`` utilities of the witness buyer from that
    node onward, each computed by a fresh play-out.
    """
    from .game import play

    node = witness.node

    def deviated_bids(nd, item):
        b = profile.bids(nd, item)
        if nd == node:
            b = b[:witness.buyer] + (witness.bid,) + b[witness.buyer + 1:]
        return b

    base = play(mkt, policy, profile, node)
    alt = play(mkt, policy, StrategyProfile(deviated_bids), node)
    i = witness.buyer
    before = mkt.value(i, [j for j, w in enumerate(node) if w == i])
    return base.utilities[i] - before, alt.utilities[i] - before

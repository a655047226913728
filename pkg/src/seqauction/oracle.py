"""Brute-force enumeration of pure subgame-perfect equilibria on a bid grid.

Set-valued backward induction: at every node all pure Nash equilibria of the
one-shot first-price bid game are found, with continuation payoffs drawn from
*any* equilibrium of each child subgame, and every resulting outcome is kept.
Everything runs on integers after scaling values and the grid step to a
common denominator.

Only a few bid profiles need testing per (winner, price). Bids strictly below
the highest losing bid never matter, so the losers either include a set ``T``
that ties the winner at price ``p`` (the tie going to the winner), or a set
``Q`` bidding one step below ``p`` (their tie with the winner would not go to
the winner, otherwise it would bid lower). Everyone else bids 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Optional, Sequence

from .equilibrium import BudgetExceeded, cap_mode_for
from .game import Outcome, SellerPolicy
from .market import Market, assign, empty_allocation, format_money, money, unsold

DEFAULT_BUDGET = 20_000_000
FILTERS = ("all", "oc")


@dataclass(frozen=True)
class OutcomeClass:
    """Outcomes sharing an allocation whose prices chain together in steps of
    at most ``delta`` per item."""

    allocation: tuple
    members: tuple

    @property
    def price_low(self) -> tuple:
        return tuple(min(o.prices[j] for o in self.members) for j in range(len(self.allocation)))

    @property
    def price_high(self) -> tuple:
        return tuple(max(o.prices[j] for o in self.members) for j in range(len(self.allocation)))

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation),
            "size": len(self.members),
            "price_low": [format_money(p) for p in self.price_low],
            "price_high": [format_money(p) for p in self.price_high],
        }


@dataclass(frozen=True)
class OracleResult:
    outcomes: tuple
    delta: Fraction
    filter: str
    cap_mode: str
    nodes: int
    grid_size: int

    @cached_property
    def classes(self) -> list:
        return outcome_classes(self.outcomes, self.delta)

    def to_dict(self) -> dict:
        return {
            "delta": format_money(self.delta),
            "filter": self.filter,
            "cap_mode": self.cap_mode,
            "nodes": self.nodes,
            "grid_size": self.grid_size,
            "outcomes": len(self.outcomes),
            "classes": [c.to_dict() for c in self.classes],
        }


def outcome_classes(outcomes: Sequence[Outcome], delta: Fraction) -> list:
    """Group by allocation, then single-linkage on the max per-item price gap."""
    delta = money(delta)
    groups: dict = {}
    for o in outcomes:
        groups.setdefault(o.allocation, []).append(o)
    classes = []
    for alloc in sorted(groups, key=lambda a: tuple(-1 if w is None else w for w in a)):
        members = sorted(groups[alloc], key=lambda o: o.prices)
        parent = list(range(len(members)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in _close_pairs(members, delta):
            parent[find(a)] = find(b)
        comps: dict = {}
        for k, o in enumerate(members):
            comps.setdefault(find(k), []).append(o)
        for comp in sorted(comps.values(), key=lambda c: c[0].prices):
            classes.append(OutcomeClass(alloc, tuple(comp)))
    return classes


def _close_pairs(members: Sequence[Outcome], delta: Fraction):
    """Index pairs whose prices differ by at most ``delta`` on every item."""
    steps = [tuple(p / delta for p in o.prices) for o in members]
    if all(x.denominator == 1 for s in steps for x in s):
        # grid prices: neighbours differ by at most one step per item
        where = {s: k for k, s in enumerate(steps)}
        m = len(steps[0]) if steps else 0
        for k, s in enumerate(steps):
            for off in itertools.product((-1, 0, 1), repeat=m):
                other = where.get(tuple(x + d for x, d in zip(s, off)))
                if other is not None and other > k:
                    yield k, other
        return
    for a, b in itertools.combinations(range(len(members)), 2):
        gap = max((abs(x - y) for x, y in zip(members[a].prices, members[b].prices)),
                  default=Fraction(0))
        if gap <= delta:
            yield a, b


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class _Solver:
    def __init__(self, mkt: Market, policy: SellerPolicy, delta: Fraction, oc: Optional[str],
                 budget: int):
        self.mkt = mkt
        self.policy = policy
        self.oc = oc
        n, m = mkt.n, mkt.m
        masks = range(1 << m)
        table = [[mkt.value(i, [j for j in range(m) if mask >> j & 1]) for mask in masks]
                 for i in range(n)]
        scale = delta.denominator
        for row in table:
            for x in row:
                scale = _lcm(scale, x.denominator)
        self.scale = scale
        self.vt = [[int(x * scale) for x in row] for row in table]
        self.d = int(delta * scale)
        top = max(row[-1] for row in self.vt)
        self.top = (-(-top // self.d) + 1) * self.d
        self.grid_size = self.top // self.d + 1
        self.budget = budget
        self.memo: dict = {}
        self._tb: dict = {}

    def tie(self, node, item, top: frozenset) -> int:
        if len(top) == 1:
            return next(iter(top))
        key = (node, top)
        w = self._tb.get(key)
        if w is None:
            w = self.policy.tie_break(node, item, top)
            if w not in top:
                raise ValueError(f"tie-break picked {w}, not among {sorted(top)}")
            self._tb[key] = w
        return w

    def solve(self, node) -> dict:
        """Map ``outcome key -> utility vector`` for the subgame at ``node``."""
        got = self.memo.get(node)
        if got is not None:
            return got
        n = self.mkt.n
        if not unsold(node):
            out = {(): (0,) * n}
            self.memo[node] = out
            return out
        if (len(self.memo) + 1) * self.grid_size > self.budget:
            raise BudgetExceeded(f"nodes x grid exceeds {self.budget}")
        j = self.policy.next_item(node)
        kids = [self.solve(assign(node, j, k)) for k in range(n)]
        vecs = [sorted(set(c.values())) for c in kids]
        lows = [[min(v[i] for v in vs) for i in range(n)] for vs in vecs]
        highs = [[max(v[i] for v in vs) for i in range(n)] for vs in vecs]
        held = [sum(1 << t for t, w in enumerate(node) if w == i) for i in range(n)]
        mv = [self.vt[i][held[i] | 1 << j] - self.vt[i][held[i]] for i in range(n)]
        d = self.d
        out: dict = {}
        for w in range(n):
            others = [i for i in range(n) if i != w]
            by_vec: dict = {}
            for key, vec in kids[w].items():
                by_vec.setdefault(vec, []).append(key)
            for o, keys in by_vec.items():
                # a loser must not gain by winning at p + d; the winner must
                # not gain by losing to the cheapest other subgame
                plo = max([mv[i] - d + lows[i][i] - o[i] for i in others] + [0])
                phi = mv[w] + o[w] - min((lows[k][w] for k in others), default=0)
                if self.oc and others:
                    # the price is at most one step above some loser's cap
                    extra = [highs[i][i] if self.oc == "exact" else 0 for i in range(n)]
                    phi = min(phi, d + max(max(0, mv[i] + extra[i] - o[i]) for i in others))
                plo = -(-plo // d) * d
                prices = range(max(plo, d), min(phi, self.top) + 1, d)
                for p in ([0] if plo == 0 else []) + list(prices):
                    U = list(o)
                    U[w] = mv[w] - p + o[w]
                    if self._feasible(node, j, w, p, others, U, mv, vecs):
                        entry = tuple(U)
                        for key in keys:
                            out[((j, w, p),) + key] = entry
        self.memo[node] = out
        return out

    def _structures(self, node, j, w, p, others):
        n = self.mkt.n
        if p == 0:
            if self.tie(node, j, frozenset(range(n))) == w:
                yield (0,) * n
            return
        subsets = [frozenset(c) for r in range(1, len(others) + 1)
                   for c in itertools.combinations(others, r)]
        for T in subsets:
            if self.tie(node, j, T | {w}) == w:
                yield tuple(p if (i == w or i in T) else 0 for i in range(n))
        q = p - self.d
        for Q in ([frozenset(others)] if q == 0 else subsets):
            if not Q or self.tie(node, j, Q | {w}) != w:
                yield tuple(p if i == w else (q if i in Q else 0) for i in range(n))

    def _feasible(self, node, j, w, p, others, U, mv, vecs) -> bool:
        for b in self._structures(node, j, w, p, others):
            if self.oc == "residual" and any(b[i] > max(0, mv[i] - U[i]) for i in range(len(b))):
                continue
            if self._stage_ok(node, j, w, p, b, U, mv, vecs):
                return True
        return False

    def _stage_ok(self, node, j, w, p, b, U, mv, vecs) -> bool:
        n = len(b)
        d = self.d
        ub: dict = {}
        lb: dict = {}
        for i in range(n):
            levels = {b[k] for k in range(n) if k != i}
            cand = {0} | levels | {x + d for x in levels}
            cand.discard(b[i])
            for x in cand:
                dev = b[:i] + (x,) + b[i + 1:]
                hi = max(dev)
                k = self.tie(node, j, frozenset(t for t in range(n) if dev[t] == hi))
                if k == w:
                    if i == w and hi < p:
                        return False
                    continue
                bound = U[i] - (mv[i] - hi if k == i else 0)
                cur = ub.setdefault(k, {})
                if bound < cur.get(i, bound + 1):
                    cur[i] = bound
        if self.oc == "exact":
            for i in range(n):
                if i != w and b[i] > 0:
                    lb[i] = b[i] - mv[i] + U[i]
        for k in set(ub) | set(lb):
            bounds = ub.get(k, {})
            low = lb.get(k)
            if not any(all(v[i] <= c for i, c in bounds.items()) and (low is None or v[k] >= low)
                       for v in vecs[k]):
                return False
        return True


def brute_force_spe(mkt: Market, policy: SellerPolicy, delta, filter: str = "all",
                    budget: int = DEFAULT_BUDGET, cap_mode: str = "auto") -> OracleResult:
    """All pure SPE outcomes of the game with bids restricted to multiples of
    ``delta``.

    With ``filter="oc"`` only equilibria whose bids respect the
    optimistic-conservative cap at every node are kept; deviations stay
    unrestricted. ``cap_mode`` is as in
    :func:`seqauction.equilibrium.is_optimistic_conservative`.

    Raises:
        BudgetExceeded: when solved nodes times grid points exceed ``budget``.
    """
    delta = money(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if filter not in FILTERS:
        raise ValueError(f"filter must be one of {FILTERS}")
    mode = cap_mode_for(mkt, cap_mode)
    solver = _Solver(mkt, policy, delta, mode if filter == "oc" else None, budget)
    root = solver.solve(empty_allocation(mkt.m))
    outcomes = []
    for key in sorted(root):
        alloc = [None] * mkt.m
        prices = [Fraction(0)] * mkt.m
        for item, w, p in key:
            alloc[item] = w
            prices[item] = Fraction(p, solver.scale)
        outcomes.append(Outcome.from_sale(mkt, alloc, prices))
    return OracleResult(tuple(outcomes), delta, filter, mode, len(solver.memo),
                        solver.grid_size)

"""Valuations, markets, allocations and the scenario generators.

All money is an exact :class:`fractions.Fraction`. Items and buyers are dense
integer indices; an allocation is a tuple with one entry per item holding the
winning buyer or ``UNSOLD``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

Money = Fraction
Allocation = tuple  # tuple[Optional[int], ...], one entry per item
UNSOLD = None

MAX_EXPLICIT_ITEMS = 16

Number = Union[int, str, Fraction]


def money(x: Number) -> Fraction:
    """Parse an int, a Fraction or a ``"num/den"`` string into exact money.

    Floats are refused: they would silently import binary rounding error.
    """
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact money value {x!r}")
    return Fraction(x)


def format_money(q: Fraction) -> str:
    """Canonical ``"num/den"`` form, e.g. ``Fraction(5) -> "5/1"``."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _as_items(S: Iterable[int], m: int) -> frozenset:
    items = frozenset(S)
    for j in items:
        if not 0 <= j < m:
            raise IndexError(f"item {j} out of range for {m} items")
    return items


# ---------------------------------------------------------------------------
# Valuations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Additive:
    """``v(S) = sum of per-item values``."""

    values: tuple
    kind: str = field(default="additive", init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(money(v) for v in self.values))
        if any(v < 0 for v in self.values):
            raise ValueError("additive values must be non-negative")

    @property
    def m(self) -> int:
        return len(self.values)

    def value(self, S: Iterable[int]) -> Fraction:
        return sum((self.values[j] for j in _as_items(S, self.m)), Fraction(0))


@dataclass(frozen=True)
class UnitDemand:
    """``v(S) = max of per-item values`` (0 on the empty set)."""

    values: tuple
    kind: str = field(default="unit-demand", init=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(money(v) for v in self.values))
        if any(v < 0 for v in self.values):
            raise ValueError("unit-demand values must be non-negative")

    @property
    def m(self) -> int:
        return len(self.values)

    def value(self, S: Iterable[int]) -> Fraction:
        return max((self.values[j] for j in _as_items(S, self.m)), default=Fraction(0))


@dataclass(frozen=True)
class Coverage:
    """Weighted coverage function: item ``j`` covers the ground elements
    ``sets[j]``; a bundle is worth the total weight of the elements it covers.

    Monotone and submodular by construction.
    """

    sets: tuple
    weights: tuple
    kind: str = field(default="coverage", init=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(money(w) for w in self.weights))
        object.__setattr__(self, "sets", tuple(frozenset(s) for s in self.sets))
        if any(w < 0 for w in self.weights):
            raise ValueError("coverage weights must be non-negative")
        for s in self.sets:
            for e in s:
                if not 0 <= e < len(self.weights):
                    raise ValueError(f"ground element {e} has no weight")

    @property
    def m(self) -> int:
        return len(self.sets)

    def value(self, S: Iterable[int]) -> Fraction:
        covered = set()
        for j in _as_items(S, self.m):
            covered |= self.sets[j]
        return sum((self.weights[e] for e in covered), Fraction(0))


@dataclass(frozen=True)
class Explicit:
    """Full set-function table indexed by item bitmask (bit ``j`` = item ``j``)."""

    table: tuple
    kind: str = field(default="explicit", init=False)

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(money(v) for v in self.table))
        size = len(self.table)
        m = size.bit_length() - 1
        if size < 2 or size != 1 << m:
            raise ValueError("explicit table length must be 2**m with m >= 1")
        if m > MAX_EXPLICIT_ITEMS:
            raise ValueError(f"explicit tables are capped at {MAX_EXPLICIT_ITEMS} items")
        if self.table[0] != 0:
            raise ValueError("v(empty set) must be 0")
        if any(v < 0 for v in self.table):
            raise ValueError("explicit values must be non-negative")

    @property
    def m(self) -> int:
        return len(self.table).bit_length() - 1

    def value(self, S: Iterable[int]) -> Fraction:
        mask = 0
        for j in _as_items(S, self.m):
            mask |= 1 << j
        return self.table[mask]

    @classmethod
    def from_function(cls, m: int, fn) -> "Explicit":
        """Tabulate ``fn(frozenset_of_items)`` over all ``2**m`` bundles."""
        return cls(tuple(fn(frozenset(j for j in range(m) if mask >> j & 1))
                         for mask in range(1 << m)))


Valuation = Union[Additive, UnitDemand, Coverage, Explicit]


def value(v: Valuation, S: Iterable[int]) -> Fraction:
    """Value of bundle ``S`` under valuation ``v``."""
    return v.value(S)


# ---------------------------------------------------------------------------
# Markets and allocations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Market:
    buyers: tuple
    m: int
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "buyers", tuple(self.buyers))
        if not self.buyers:
            raise ValueError("a market needs at least one buyer")
        if self.m < 1:
            raise ValueError("a market needs at least one item")
        for i, v in enumerate(self.buyers):
            if v.m != self.m:
                raise ValueError(f"buyer {i} is defined over {v.m} items, market has {self.m}")

    @property
    def n(self) -> int:
        return len(self.buyers)

    def value(self, i: int, S: Iterable[int]) -> Fraction:
        return self.buyers[i].value(S)

    def kinds(self) -> set:
        return {v.kind for v in self.buyers}

    def is_unit_demand(self) -> bool:
        return self.kinds() == {"unit-demand"}

    def is_additive(self) -> bool:
        return self.kinds() == {"additive"}

    def item_values(self, i: int) -> tuple:
        """Per-item values ``v_i({j})`` of buyer ``i``."""
        v = self.buyers[i]
        if v.kind in ("additive", "unit-demand"):
            return v.values
        return tuple(v.value((j,)) for j in range(self.m))


def empty_allocation(m: int) -> Allocation:
    return (UNSOLD,) * m


def assign(alloc: Allocation, item: int, buyer: Optional[int]) -> Allocation:
    return alloc[:item] + (buyer,) + alloc[item + 1:]


def bundle(alloc: Allocation, buyer: int) -> frozenset:
    """Items held by ``buyer`` under ``alloc``."""
    return frozenset(j for j, w in enumerate(alloc) if w == buyer)


def bundles(alloc: Allocation, n: int) -> tuple:
    out = [set() for _ in range(n)]
    for j, w in enumerate(alloc):
        if w is not UNSOLD:
            out[w].add(j)
    return tuple(frozenset(b) for b in out)


def unsold(alloc: Allocation) -> tuple:
    return tuple(j for j, w in enumerate(alloc) if w is UNSOLD)


def residual_value(mkt: Market, i: int, j: int, S: Allocation) -> Fraction:
    """Unit-demand residual value ``max(0, v_ij - best item i already holds)``."""
    v = mkt.buyers[i]
    if v.kind != "unit-demand":
        raise TypeError("residual values are defined for unit-demand buyers only")
    if S[j] is not UNSOLD:
        raise ValueError(f"item {j} is already sold")
    held = max((v.values[k] for k, w in enumerate(S) if w == i), default=Fraction(0))
    return max(Fraction(0), v.values[j] - held)


def marginal_value(mkt: Market, i: int, j: int, G: Allocation) -> Fraction:
    """``v_i(X_i(G) + j) - v_i(X_i(G))`` for any valuation kind."""
    if G[j] is not UNSOLD:
        raise ValueError(f"item {j} is already sold")
    held = bundle(G, i)
    return mkt.value(i, held | {j}) - mkt.value(i, held)


# ---------------------------------------------------------------------------
# Scenario families
# ---------------------------------------------------------------------------


class Scenario(NamedTuple):
    market: Market
    notes: dict


def poa_additive(m: int) -> Scenario:
    """Two additive buyers: A values every item at ``m``, B at 1."""
    if m < 2:
        raise ValueError("poa_additive needs m >= 2")
    mkt = Market((Additive([m] * m), Additive([1] * m)), m, f"poa_additive(m={m})")
    return Scenario(mkt, {
        "optimal_welfare": Fraction(m * m),
        "bad_spe_welfare": Fraction(2 * m - 1),
        "poa": Fraction(m * m, 2 * m - 1),
    })


def low_revenue(m: int, eps: Number) -> Scenario:
    """A values every item at ``m``; B values items ``0..m-2`` at 1 and the
    last item at ``eps``."""
    eps = money(eps)
    if m < 2:
        raise ValueError("low_revenue needs m >= 2")
    if eps <= 0:
        raise ValueError("eps must be positive")
    mkt = Market((Additive([m] * m), Additive([1] * (m - 1) + [eps])), m,
                 f"low_revenue(m={m}, eps={format_money(eps)})")
    return Scenario(mkt, {"spe_revenue": eps * m, "walrasian_revenue": m - 1 + eps})


def order_matters(m: int, eps: Optional[Number] = None) -> Scenario:
    """``m`` items, ``m+1`` unit-demand buyers on a path.

    Buyer 0 wants item 0 at 1; buyer ``i`` (``1 <= i < m``) wants items
    ``i-1`` and ``i`` at ``1 + i*eps``; buyer ``m`` wants item ``m-1`` at
    ``1 + m*eps``. ``eps`` defaults to ``1/m**3``.
    """
    if m < 2:
        raise ValueError("order_matters needs m >= 2")
    eps = Fraction(1, m ** 3) if eps is None else money(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    rows = []
    for i in range(m + 1):
        row = [Fraction(0)] * m
        for j in (i - 1, i):
            if 0 <= j < m:
                row[j] = 1 + i * eps
        rows.append(UnitDemand(row))
    mkt = Market(tuple(rows), m, f"order_matters(m={m}, eps={format_money(eps)})")
    return Scenario(mkt, {
        "walrasian_revenue": Fraction(m),
        "optimal_welfare": m + eps * m * (m + 1) / 2,
        "bad_order": tuple(range(m)),
        "good_order": tuple(reversed(range(m))),
    })


def demand_reduction() -> Scenario:
    """Buyer 0 (OR) is unit demand at 4 per item; buyer 1 (SUM) is additive at 5."""
    mkt = Market((UnitDemand([4, 4]), Additive([5, 5])), 2, "demand_reduction")
    return Scenario(mkt, {"walrasian_revenue": Fraction(8), "oc_outcome": ((0, 1), (1, 0))})


def nonsingleton(n: int, m: int, seed: Optional[int] = None) -> Scenario:
    """Buyers with zero value on every single item.

    Without a seed each buyer is single-minded on the pair
    ``{2i mod m, 2i+1 mod m}`` at value ``i+2``. With a seed each buyer wants
    one or two random bundles of size at least two (value of a bundle is the
    best desired bundle it contains).
    """
    if n < 1 or m < 2:
        raise ValueError("nonsingleton needs n >= 1 and m >= 2")
    if m > MAX_EXPLICIT_ITEMS:
        raise ValueError(f"nonsingleton markets are explicit, m <= {MAX_EXPLICIT_ITEMS}")
    rng = random.Random(seed)
    buyers = []
    for i in range(n):
        if seed is None:
            wants = [(frozenset({(2 * i) % m, (2 * i + 1) % m}), Fraction(i + 2))]
        else:
            wants = []
            for _ in range(rng.randint(1, 2)):
                size = rng.randint(2, m)
                wants.append((frozenset(rng.sample(range(m), size)),
                              Fraction(rng.randint(1, 40), 4)))
        buyers.append(Explicit.from_function(
            m, lambda S, wants=wants: max((w for T, w in wants if T <= S), default=Fraction(0))))
    return Scenario(Market(tuple(buyers), m, f"nonsingleton(n={n}, m={m}, seed={seed})"), {})


def is_generic(values: Sequence[Fraction]) -> bool:
    """True when all values, pairwise sums and pairwise differences are distinct."""
    vals = list(values)
    if len(set(vals)) != len(vals):
        return False
    sums = [a + b for a, b in itertools.combinations(vals, 2)]
    diffs = [abs(a - b) for a, b in itertools.combinations(vals, 2)]
    return len(set(sums)) == len(sums) and len(set(diffs)) == len(diffs)


def _generic_rows(n: int, m: int, rng: random.Random, high: Fraction, den: int) -> list:
    top = int(high * den)
    if top < 1:
        raise ValueError("value range is empty")
    for _ in range(10_000):
        rows = [[Fraction(rng.randint(1, top), den) for _ in range(m)] for _ in range(n)]
        if is_generic([v for row in rows for v in row]):
            return rows
    raise RuntimeError("could not draw a generic instance; widen the value range")


def random_unit_demand(n: int, m: int, seed: int, high: Number = 1000,
                       den: int = 1000) -> Scenario:
    """Generic unit-demand market, values drawn from ``{1/den, ..., high}``."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    rows = _generic_rows(n, m, random.Random(seed), money(high), den)
    mkt = Market(tuple(UnitDemand(r) for r in rows), m,
                 f"random_unit_demand(n={n}, m={m}, seed={seed})")
    return Scenario(mkt, {"seed": seed})


def random_additive(n: int, m: int, seed: int, high: Number = 1000,
                    den: int = 1000) -> Scenario:
    """Generic additive market, same value law as :func:`random_unit_demand`."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    rows = _generic_rows(n, m, random.Random(seed), money(high), den)
    mkt = Market(tuple(Additive(r) for r in rows), m,
                 f"random_additive(n={n}, m={m}, seed={seed})")
    return Scenario(mkt, {"seed": seed})


def random_coverage(n: int, m: int, seed: int, elements: int = 4,
                    weight_den: int = 4, max_weight: int = 4) -> Scenario:
    """Coverage buyers over private ground sets of ``elements`` elements.

    Weights are ``k/weight_den`` with ``k`` in ``1..max_weight``; every item
    covers a non-empty random subset of each buyer's ground set.
    """
    if n < 1 or m < 1 or elements < 1:
        raise ValueError("need n, m, elements >= 1")
    rng = random.Random(seed)
    buyers = []
    for _ in range(n):
        weights = [Fraction(rng.randint(1, max_weight), weight_den) for _ in range(elements)]
        sets = []
        for _ in range(m):
            s = {e for e in range(elements) if rng.random() < 0.5}
            if not s:
                s = {rng.randrange(elements)}
            sets.append(sorted(s))
        buyers.append(Coverage(sets, weights))
    return Scenario(Market(tuple(buyers), m, f"random_coverage(n={n}, m={m}, seed={seed})"),
                    {"seed": seed})


FAMILIES = {
    "poa_additive": poa_additive,
    "low_revenue": low_revenue,
    "order_matters": order_matters,
    "demand_reduction": demand_reduction,
    "nonsingleton": nonsingleton,
    "random_unit_demand": random_unit_demand,
    "random_additive": random_additive,
    "random_coverage": random_coverage,
}


def gen_scenario(family: str, **params) -> Scenario:
    """Build a named market family. Returns the market and a dict of the
    outcomes the construction is known to produce."""
    try:
        factory = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown scenario family {family!r}; "
                         f"choose from {sorted(FAMILIES)}") from None
    return factory(**params)


def optimal_welfare(mkt: Market, limit: int = 10 ** 7) -> tuple:
    """Exhaustive search over every way of handing out all items.

    Returns ``(welfare, allocation)``. Monotone valuations never lose by
    selling everything, so unsold items are not enumerated.
    """
    if mkt.n ** mkt.m > limit:
        raise ValueError(f"{mkt.n}**{mkt.m} allocations exceed the enumeration limit")
    best, best_alloc = None, None
    for alloc in itertools.product(range(mkt.n), repeat=mkt.m):
        w = sum((mkt.value(i, b) for i, b in enumerate(bundles(alloc, mkt.n))), Fraction(0))
        if best is None or w > best:
            best, best_alloc = w, tuple(alloc)
    return best, best_alloc

"""The reproducibility suite: eleven numbered criteria, each a function that
builds its instances, runs the relevant machinery against an independent
check, and returns a :class:`CriterionResult`.

Shared by ``seqauction reproduce`` and the acceptance tests.
"""

from __future__ import annotations

import csv
import io
import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .equilibrium import folks_check
from .game import (fixed_order_policy, max_tiebreak_rule, poa, priority_tiebreak)
from .market import (Market, UnitDemand, demand_reduction, format_money,
                     nonsingleton, optimal_welfare, order_matters, random_additive,
                     random_coverage, random_unit_demand)
from .oracle import brute_force_spe
from .strategies import (additive_outcome, bad_spe_additive, greedy_submodular, low_revenue_spe,
                         nonsingleton_spe, order_matters_pair, unit_wlrs_eq)
from .walrasian import (is_support_order, is_walrasian, minimal_walrasian,
                        support_order, supporters, walrasian_by_enumeration)

F = Fraction


@dataclass
class CriterionResult:
    number: int
    title: str
    modules: tuple
    passed: bool
    expected: str
    observed: str
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} | {self.observed}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "modules": list(self.modules),
            "passed": self.passed,
            "expected": self.expected,
            "observed": self.observed,
            "failures": self.failures[:20],
        }


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    modules: tuple
    run: Callable[[], tuple]  # -> (passed, expected, observed, failures)


def _fmt(q) -> str:
    return format_money(q)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def c1_poa_lower_bound(ms=range(2, 11), delta=F(1, 16), time_limit=5.0):
    failures = []
    start = time.perf_counter()
    for m in ms:
        tree = bad_spe_additive(m)
        out = tree.outcome()
        opt, _ = optimal_welfare(tree.market)
        ratio = poa(tree.market, out)
        if out.welfare != 2 * m - 1 or opt != m * m or ratio != F(m * m, 2 * m - 1):
            failures.append(f"m={m}: welfare {_fmt(out.welfare)}, optimum {_fmt(opt)}, "
                            f"PoA {_fmt(ratio)}")
        rep = tree.verify(delta)
        if not rep.is_spe:
            failures.append(f"m={m}: verify {rep.to_dict()}")
    took = time.perf_counter() - start
    if took >= time_limit:
        failures.append(f"runtime {took:.2f}s >= {time_limit}s")
    return (not failures, "welfare 2m-1, optimum m^2, PoA m^2/(2m-1), SPE at 1/16, < 5 s",
            f"m={ms.start}..{ms.stop - 1} checked", failures)


def c2_subadditive_bound(count=25, delta=F(1, 8), time_limit=120.0):
    failures = []
    start = time.perf_counter()
    worst = None
    total = 0
    for s in range(count):
        n, m = 1 + s % 3, 1 + (s // 3) % 3
        mkt = random_coverage(n, m, s).market
        res = brute_force_spe(mkt, fixed_order_policy(range(m), max_tiebreak_rule(mkt)), delta,
                              "all")
        top = max(mkt.value(i, [j]) for i in range(n) for j in range(m))
        total += len(res.outcomes)
        if not res.outcomes:
            failures.append(f"seed {s}: oracle found no equilibrium")
            continue
        low = min(o.welfare for o in res.outcomes)
        margin = low - (top / 2 - delta)
        worst = margin if worst is None else min(worst, margin)
        if margin < 0:
            failures.append(f"seed {s}: welfare {_fmt(low)} < M/2 - delta with M={_fmt(top)}")
    took = time.perf_counter() - start
    if took >= time_limit:
        failures.append(f"runtime {took:.2f}s >= {time_limit}s")
    return (not failures, "every grid SPE welfare >= M/2 - delta, < 2 min",
            f"{total} equilibria over {count} markets, min slack {_fmt(worst)}",
            failures)


def c3_low_revenue(ms=range(2, 9), eps=F(1, 100), delta=F(1, 16)):
    failures = []
    for m in ms:
        tree = low_revenue_spe(m, eps)
        out = tree.outcome()
        we = minimal_walrasian(tree.market)
        if out.revenue != eps * m:
            failures.append(f"m={m}: revenue {_fmt(out.revenue)}")
        if we.revenue != m - 1 + eps:
            failures.append(f"m={m}: Walrasian revenue {_fmt(we.revenue)}")
        rep = tree.verify(delta)
        if not rep.is_spe:
            failures.append(f"m={m}: verify {rep.to_dict()}")
    return (not failures, "revenue eps*m, Walrasian revenue m-1+eps, SPE",
            f"m={ms.start}..{ms.stop - 1}, eps={_fmt(eps)}", failures)


def _within(members, ref_prices, delta) -> Fraction:
    return max((abs(o.prices[j] - ref_prices[j]) for o in members for j in range(len(ref_prices))),
               default=F(0))


def c4_additive_uniqueness(count=25, delta=F(1, 8)):
    failures = []
    worst = F(0)
    for s in range(count):
        n, m = 1 + s % 3, 1 + (s // 3) % 3
        mkt = random_additive(n, m, s).market
        ref, _ = additive_outcome(mkt)
        res = brute_force_spe(mkt, fixed_order_policy(range(m), max_tiebreak_rule(mkt)), delta,
                              "oc")
        classes = res.classes
        if len(classes) != 1:
            failures.append(f"seed {s}: {len(classes)} outcome classes")
            continue
        err = _within(classes[0].members, ref.prices, delta)
        worst = max(worst, err)
        if classes[0].allocation != ref.allocation:
            failures.append(f"seed {s}: allocation {classes[0].allocation} != {ref.allocation}")
        if err > delta:
            failures.append(f"seed {s}: price error {_fmt(err)} > delta")
    return (not failures, "one OC class, exact allocation, prices within delta",
            f"{count} markets, max price error {_fmt(worst)}", failures)


def lattice_min_prices(values: Sequence[Sequence[Fraction]], grid: Sequence[Fraction]):
    """Coordinate-wise minimum over all grid price vectors that support some
    partial matching as a unit-demand Walrasian equilibrium. Brute force."""
    n, m = len(values), len(values[0])
    matchings = []
    for assign in itertools.product([None] + list(range(m)), repeat=n):
        taken = [j for j in assign if j is not None]
        if len(taken) == len(set(taken)):
            matchings.append(assign)
    best = None
    for prices in itertools.product(grid, repeat=m):
        for assign in matchings:
            if any(p != 0 and j not in assign for j, p in enumerate(prices)):
                continue
            ok = True
            for i, j in enumerate(assign):
                u = values[i][j] - prices[j] if j is not None else F(0)
                if u < 0 or any(values[i][k] - prices[k] > u for k in range(m)):
                    ok = False
                    break
            if ok:
                best = prices if best is None else tuple(min(a, b) for a, b in zip(best, prices))
                break
    return best


def c5_minimal_walrasian(count=100, lattice_count=30):
    failures = []
    for s in range(count):
        n, m = 1 + s % 6, 1 + (s // 6) % 6
        mkt = random_unit_demand(n, m, s).market
        we = minimal_walrasian(mkt)
        if not is_walrasian(mkt, we.winners, we.price_list):
            failures.append(f"seed {s}: not Walrasian")
            continue
        try:
            supp = supporters(we)
            order = support_order(we, supp)
        except ValueError as exc:
            failures.append(f"seed {s}: {type(exc).__name__}: {exc}")
            continue
        if not is_support_order(we, supp, order):
            failures.append(f"seed {s}: invalid support order {order}")
    rng = random.Random(2024)
    for s in range(lattice_count):
        n, m = rng.randint(1, 3), rng.randint(1, 3)
        rows = [[F(rng.randint(0, 8)) for _ in range(m)] for _ in range(n)]
        mkt = Market(tuple(UnitDemand(r) for r in rows), m)
        we = minimal_walrasian(mkt)
        lat = lattice_min_prices(rows, [F(k) for k in range(9)])
        if lat != we.price_list:
            failures.append(f"lattice {s} {rows}: {list(map(_fmt, we.price_list))} vs "
                            f"{None if lat is None else list(map(_fmt, lat))}")
    return (not failures, "Walrasian, supported, support order; lattice minimum matches",
            f"{count} generic markets, {lattice_count} lattice markets", failures)


def c6_unit_wlrs_eq_spe(count=100, delta=F(1, 16), time_limit=300.0):
    failures = []
    start = time.perf_counter()
    for s in range(count):
        n, m = 1 + s % 5, 1 + (s // 5) % 5
        mkt = random_unit_demand(n, m, s).market
        tree = unit_wlrs_eq(mkt)
        rep = tree.verify(delta)
        if not rep.is_spe:
            failures.append(f"seed {s}: {rep.to_dict()}")
        we = minimal_walrasian(mkt)
        out = tree.outcome()
        if out.prices != we.price_list:
            failures.append(f"seed {s}: path prices {list(map(_fmt, out.prices))} vs "
                            f"{list(map(_fmt, we.price_list))}")
        oc = tree.is_optimistic_conservative()
        if not oc:
            failures.append(f"seed {s}: OC violation {oc.witness}")
    took = time.perf_counter() - start
    if took >= time_limit:
        failures.append(f"runtime {took:.2f}s >= {time_limit}s")
    return (not failures, "SPE at 1/16, path prices = minimal Walrasian, OC, < 5 min",
            f"{count} markets", failures)


def c7_unit_uniqueness(count=25, delta=F(1, 8)):
    failures = []
    worst = F(0)
    for s in range(count):
        mkt = random_unit_demand(3, 3, s).market
        tree = unit_wlrs_eq(mkt)
        ref = tree.outcome()
        res = brute_force_spe(mkt, tree.policy, delta, "oc")
        classes = res.classes
        if len(classes) != 1:
            failures.append(f"seed {s}: {len(classes)} outcome classes")
            continue
        err = _within(classes[0].members, ref.prices, delta)
        worst = max(worst, err)
        if classes[0].allocation != ref.allocation:
            failures.append(f"seed {s}: allocation {classes[0].allocation} != {ref.allocation}")
        if err > delta:
            failures.append(f"seed {s}: price error {_fmt(err)} > delta {_fmt(delta)}")
    return (not failures, "one OC class, allocation equal, prices within delta",
            f"{count} markets, max price error {_fmt(worst)}", failures)


def c8_order_matters(folks_ms=range(2, 9), oracle_ms=range(2, 5), delta=F(1, 8)):
    failures = []
    low_seen = []
    for m in folks_ms:
        mkt = order_matters(m).market
        pair = order_matters_pair(m)
        cert = folks_check(mkt, pair.bad_allocation, pair.bad_prices, pair.bad_order)
        if not cert.valid or cert.revenue != 1:
            failures.append(f"m={m}: bad certificate valid={cert.valid} revenue "
                            f"{_fmt(cert.revenue)}")
        if minimal_walrasian(mkt).revenue != m:
            failures.append(f"m={m}: Walrasian revenue {_fmt(minimal_walrasian(mkt).revenue)}")
    for m in oracle_ms:
        mkt = order_matters(m).market
        pair = order_matters_pair(m)
        res = brute_force_spe(mkt, fixed_order_policy(pair.good_order, max_tiebreak_rule(mkt)),
                              delta, "all")
        low = min(o.revenue for o in res.outcomes)
        low_seen.append(f"m={m}: {_fmt(low)}")
        if low < m - m * delta:
            failures.append(f"m={m}: min revenue {_fmt(low)} < m - m*delta = "
                            f"{_fmt(m - m * delta)}")
        for o in res.outcomes:
            if any(o.prices[j] > o.prices[j + 1] + delta for j in range(m - 1)):
                failures.append(f"m={m}: prices {list(map(_fmt, o.prices))} not monotone")
                break
    return (not failures,
            "bad certificate valid with revenue 1; Walrasian revenue m; good-order grid SPE "
            "revenue >= m - m*delta with monotone prices",
            "min good-order revenue " + ", ".join(low_seen), failures)


def c9_demand_reduction(delta=F(1, 4)):
    failures = []
    mkt = demand_reduction().market
    # ties on the first item go to OR, later ties to the higher marginal value
    policy = fixed_order_policy((0, 1), priority_tiebreak({0: (0,)}, max_tiebreak_rule(mkt)))
    res = brute_force_spe(mkt, policy, delta, "oc")
    classes = res.classes
    if len(classes) != 1 or classes[0].allocation != (0, 1):
        failures.append(f"classes {[c.to_dict() for c in classes]}")
    else:
        for o in classes[0].members:
            if abs(o.prices[0] - 1) > delta or o.prices[1] != 0:
                failures.append(f"outcome prices {list(map(_fmt, o.prices))}")
    grid = [F(k, 4) for k in range(41)]
    found = walrasian_by_enumeration(mkt, grid)
    bench = min(found, key=lambda ap: (sum(ap[1]), ap)) if found else None
    if bench is None or sum(bench[1]) != 8 or bench[0] != (1, 1):
        failures.append(f"benchmark {bench}")
    observed = ("; ".join(f"alloc {c.allocation} OR price {_fmt(c.price_low[0])}.."
                          f"{_fmt(c.price_high[0])}, SUM price {_fmt(c.price_high[1])}"
                          for c in classes)
                + (f"; benchmark revenue {_fmt(sum(bench[1]))}" if bench else ""))
    return (not failures, "OR item 0 at 1 +- delta, SUM item 1 at 0; benchmark revenue 8",
            observed, failures)


def c10_greedy_submodular(count=50, delta=F(1, 16)):
    failures = []
    for s in range(count):
        n, m = 2 + s % 3, 1 + (s // 3) % 5
        mkt = random_coverage(n, m, s).market
        order, tree = greedy_submodular(mkt)
        out = tree.outcome()
        opt, _ = optimal_welfare(mkt)
        if 2 * out.revenue < opt:
            failures.append(f"seed {s}: revenue {_fmt(out.revenue)} < OPT/2, OPT {_fmt(opt)}")
        if any(u != 0 for u in out.utilities):
            failures.append(f"seed {s}: utilities {list(map(_fmt, out.utilities))}")
        rep = tree.verify(delta)
        if not rep.is_spe:
            failures.append(f"seed {s}: {rep.to_dict()}")
    return (not failures, "revenue >= OPT/2, zero utilities, SPE at 1/16",
            f"{count} coverage markets", failures)


def c11_nonsingleton(count=10, delta=F(1, 16)):
    failures = []
    for s in range(count):
        n, m = 2 + s % 3, 2 + (s // 3) % 3
        mkt = nonsingleton(n, m, s).market
        cert = folks_check(mkt, (0,) * m, [0] * m, range(m))
        if not cert.valid:
            failures.append(f"seed {s}: certificate rejected {cert.violations()}")
        if m <= 4:
            rep = nonsingleton_spe(mkt).verify(delta)
            if not rep.is_spe:
                failures.append(f"seed {s}: {rep.to_dict()}")
    return (not failures, "all-to-one-at-zero certificate valid; SPE for m <= 4",
            f"{count} markets", failures)


CRITERIA = (
    Criterion(1, "PoA lower bound for additive buyers", ("strategies", "game", "equilibrium"),
              c1_poa_lower_bound),
    Criterion(2, "welfare bound for subadditive buyers", ("equilibrium", "oracle"),
              c2_subadditive_bound),
    Criterion(3, "low-revenue equilibrium", ("strategies", "walrasian", "equilibrium"),
              c3_low_revenue),
    Criterion(4, "additive uniqueness", ("equilibrium", "oracle", "strategies"),
              c4_additive_uniqueness),
    Criterion(5, "minimal Walrasian correctness", ("walrasian",), c5_minimal_walrasian),
    Criterion(6, "Unit-Wlrs-Eq is an SPE", ("strategies", "equilibrium"), c6_unit_wlrs_eq_spe),
    Criterion(7, "unit-demand uniqueness", ("equilibrium", "oracle", "strategies"),
              c7_unit_uniqueness),
    Criterion(8, "selling order matters", ("strategies", "walrasian", "equilibrium", "oracle"),
              c8_order_matters),
    Criterion(9, "demand reduction", ("equilibrium", "oracle", "walrasian"),
              c9_demand_reduction),
    Criterion(10, "full-revenue equilibrium for submodular buyers", ("strategies", "equilibrium"),
              c10_greedy_submodular),
    Criterion(11, "non-singleton equilibrium", ("strategies", "equilibrium"), c11_nonsingleton),
)

MODULES = ("market", "walrasian", "game", "equilibrium", "oracle", "strategies")


def run_criterion(c: Criterion) -> CriterionResult:
    start = time.perf_counter()
    passed, expected, observed, failures = c.run()
    return CriterionResult(c.number, c.title, c.modules, passed, expected, observed, failures,
                           time.perf_counter() - start)


def select(only: Optional[str] = None, numbers: Optional[Sequence[int]] = None) -> list:
    if only is not None and only not in MODULES:
        raise ValueError(f"unknown module {only!r}; choose from {MODULES}")
    return [c for c in CRITERIA
            if (only is None or only in c.modules) and (numbers is None or c.number in numbers)]


def reproduce(only: Optional[str] = None, numbers: Optional[Sequence[int]] = None) -> list:
    return [run_criterion(c) for c in select(only, numbers)]


def to_csv(results: Sequence[CriterionResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["criterion", "title", "passed", "expected", "observed"])
    for r in results:
        w.writerow([r.number, r.title, "PASS" if r.passed else "FAIL", r.expected, r.observed])
    return buf.getvalue()

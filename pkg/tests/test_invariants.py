"""Cross-checks and structural invariants across modules."""

import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from seqauction.equilibrium import folks_check, is_optimistic_conservative, iter_nodes
from seqauction.game import (Outcome, StrategyProfile, fixed_order_policy, max_tiebreak_rule,
                             play)
from seqauction.market import (Additive, Coverage, Market, UnitDemand, assign, empty_allocation,
                               marginal_value, nonsingleton, optimal_welfare, order_matters,
                               poa_additive, random_coverage, random_unit_demand, residual_value)
from seqauction.strategies import (additive_outcome, folks_strategy, greedy_submodular,
                                   nonsingleton_spe, unit_wlrs_eq)
from seqauction.walrasian import (check_walrasian, is_complete, is_walrasian, minimal_walrasian,
                                  support_order, supporters)


def all_nodes(m, n):
    return itertools.product([None] + list(range(n)), repeat=m)


# market ------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_coverage_is_monotone_and_submodular(seed):
    mkt = random_coverage(1, 4, seed).market
    rng = random.Random(seed)
    chain = list(range(4))
    rng.shuffle(chain)
    for j in range(4):
        node = empty_allocation(4)
        last = None
        for k in chain:
            if k == j:
                continue
            if node[j] is None:
                gain = marginal_value(mkt, 0, j, node)
                assert gain >= 0
                assert last is None or gain <= last
                last = gain
            node = assign(node, k, 0)


def test_residual_equals_marginal_for_unit_demand():
    mkt = random_unit_demand(2, 3, 8).market
    for node in all_nodes(3, 2):
        for i in range(2):
            for j in range(3):
                if node[j] is None:
                    assert residual_value(mkt, i, j, node) == marginal_value(mkt, i, j, node)
    with pytest.raises(TypeError):
        residual_value(poa_additive(2).market, 0, 0, empty_allocation(2))


@pytest.mark.parametrize("m", [2, 3, 4])
def test_poa_market_optimum(m):
    assert optimal_welfare(poa_additive(m).market)[0] == m * m


def test_coverage_marginal_by_hand():
    mkt = Market((Coverage([[0, 1], [1, 2]], [1, 1, 1]),), 2)
    assert marginal_value(mkt, 0, 1, (0, None)) == 1


# walrasian ---------------------------------------------------------------


def test_assignment_example():
    from seqauction.assignment import optimal_assignment
    winners, w = optimal_assignment([[F(3), F(5)], [F(4), F(1)]])
    assert tuple(winners) == (1, 0) and w == 9


@pytest.mark.parametrize("m", [2, 3, 4])
def test_order_matters_walrasian_structure(m):
    mkt = order_matters(m).market
    we = minimal_walrasian(mkt)
    assert we.allocation == {j: j + 1 for j in range(m)}
    assert supporters(we) == {j: j for j in range(m)}
    assert support_order(we) == tuple(reversed(range(m)))
    assert is_complete(mkt)
    verdict = is_walrasian(mkt, we.allocation, [0] * m)
    assert not verdict and verdict.witness == (0, 0)


def test_completeness_small_cases():
    assert not is_complete(Market((UnitDemand([1]),), 1))
    assert is_complete(Market((UnitDemand([1]), UnitDemand([1])), 1))


def test_complete_markets_have_prices_at_least_one():
    rng = random.Random(5)
    seen = 0
    for _ in range(300):
        n, m = rng.randint(2, 4), rng.randint(1, 3)
        rows = [[rng.choice([0, 1]) for _ in range(m)] for _ in range(n)]
        mkt = Market(tuple(UnitDemand(r) for r in rows), m)
        if is_complete(mkt):
            seen += 1
            assert all(p >= 1 for p in minimal_walrasian(mkt).price_list)
    assert seen >= 20


def test_pairwise_minimum_of_walrasian_prices_is_walrasian():
    rng = random.Random(2)
    for _ in range(20):
        rows = [[F(rng.randint(0, 5)) for _ in range(2)] for _ in range(3)]
        mkt = Market(tuple(UnitDemand(r) for r in rows), 2)
        we = minimal_walrasian(mkt)
        alloc = list(we.winners)
        vecs = [p for p in itertools.product([F(k) for k in range(6)], repeat=2)
                if check_walrasian(rows, alloc, list(p))]
        for a, b in itertools.combinations(vecs, 2):
            assert check_walrasian(rows, alloc, [min(x, y) for x, y in zip(a, b)])


# game --------------------------------------------------------------------


def test_max_tiebreak_three_way():
    mkt = Market((Additive([4]), Additive([4]), Additive([2])), 1)
    assert max_tiebreak_rule(mkt)((None,), 0, frozenset({0, 1, 2})) == 0
    mkt = Market((Additive([3]), Additive([7])), 1)
    assert max_tiebreak_rule(mkt)((None,), 0, frozenset({0, 1})) == 1


def test_node_identification():
    # two different bid histories reach allocation (0, 1, _); what follows is the same
    mkt = Market((Additive([3, 2, 1]), Additive([1, 2, 3])), 3)
    pol = fixed_order_policy((0, 1, 2))

    def profile(first, second):
        def bids(node, item):
            return (first, second, [F(1), F(2)])[item]
        return StrategyProfile(bids)

    a = play(mkt, pol, profile([F(2), F(1)], [F(0), F(1)]))
    b = play(mkt, pol, profile([F(3), F(0)], [F(1), F(2)]))
    assert a.allocation == b.allocation == (0, 1, 1)
    assert a.prices[2] == b.prices[2] == 2
    assert a.prices[:2] != b.prices[:2]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_accounting_identity(seed):
    mkt = random_coverage(3, 3, seed).market
    rng = random.Random(seed)
    out = Outcome.from_sale(mkt, [rng.randrange(3) for _ in range(3)],
                            [F(rng.randint(0, 8), 4) for _ in range(3)])
    assert out.revenue + sum(out.utilities) == out.welfare


# equilibrium -------------------------------------------------------------


def test_optimal_allocation_at_zero_prices_is_snatched():
    mkt = Market((UnitDemand([3]), UnitDemand([2])), 1)
    assert not folks_check(mkt, (0,), (0,), (0,)).valid


def test_all_zero_profile_is_optimistic_conservative():
    mkt = random_coverage(2, 3, 1).market
    pol = fixed_order_policy((0, 1, 2))
    assert is_optimistic_conservative(mkt, pol, StrategyProfile(lambda n, j: [0, 0]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_folks_certificates_are_sound(seed):
    rng = random.Random(seed)
    n, m = rng.randint(2, 3), rng.randint(1, 3)
    mkt = random_coverage(n, m, seed).market
    alloc = tuple(rng.randrange(n) for _ in range(m))
    order = tuple(rng.sample(range(m), m))
    prices = []
    for j in range(m):
        prices.append(F(rng.randint(0, 4), 4))
    try:
        cert = folks_check(mkt, alloc, prices, order)
    except ValueError:
        return
    if not cert.valid:
        return
    tree = folks_strategy(mkt, alloc, prices, order)
    assert tree.outcome().allocation == alloc
    assert tree.verify(F(1, 16)).is_spe
    # once off the path every buyer's continuation is zero
    path = {node for node, _ in tree.evaluator.path()}
    for node in iter_nodes(mkt, tree.policy):
        if node not in path:
            assert all(u == 0 for u in tree.continuation(node))


# strategies --------------------------------------------------------------


@pytest.mark.parametrize("m", [2, 3, 4])
def test_unit_wlrs_eq_on_order_matters(m):
    tree = unit_wlrs_eq(order_matters(m).market)
    assert [d.item for _, d in tree.evaluator.path()] == list(reversed(range(m)))
    assert tree.outcome().revenue >= m


def test_unit_wlrs_eq_single_item_second_price():
    tree = unit_wlrs_eq(Market((UnitDemand([4]), UnitDemand([9]), UnitDemand([6])), 1))
    out = tree.outcome()
    assert out.allocation == (1,) and out.prices == (6,)


@pytest.mark.parametrize("seed", range(15))
def test_first_winner_prefers_its_item(seed):
    rng = random.Random(seed)
    mkt = random_unit_demand(rng.randint(2, 4), rng.randint(1, 4), seed).market
    tree = unit_wlrs_eq(mkt)
    root = empty_allocation(mkt.m)
    d = tree.evaluator.decision(root)
    w = d.winner
    on_path = tree.continuation(root)[w]
    for k in range(mkt.n):
        if k != w:
            assert on_path >= minimal_walrasian(mkt, assign(root, d.item, k)).utilities[w]


def test_additive_outcome_examples():
    out, _ = additive_outcome(poa_additive(4).market)
    assert out.allocation == (0,) * 4 and out.revenue == 4
    out, _ = additive_outcome(Market((Additive([3, 1]),), 2))
    assert out.prices == (0, 0)
    out, _ = additive_outcome(Market((Additive([7]), Additive([3]), Additive([5])), 1))
    assert out.allocation == (0,) and out.prices == (5,)


def test_greedy_single_buyer_sells_in_descending_value():
    mkt = Market((Coverage([[0], [1], [2]], [2, 5, 3]),), 3)
    order, tree = greedy_submodular(mkt)
    assert order == (1, 2, 0)
    out = tree.outcome()
    assert out.revenue == out.welfare == optimal_welfare(mkt)[0] == 10


def test_nonsingleton_disjoint_pairs():
    mkt = nonsingleton(2, 4).market
    tree = nonsingleton_spe(mkt)
    out = tree.outcome()
    assert out.allocation == (0, 0, 0, 0) and out.revenue == 0
    assert tree.verify(F(1, 16)).is_spe

from fractions import Fraction as F

import pytest

from seqauction.game import (Evaluator, Outcome, ProfileIncomplete, StrategyProfile, ZeroWelfare,
                             best_welfare, fixed_order_policy, lowest_index_tiebreak,
                             max_tiebreak_rule, play, poa, priority_tiebreak, resolve)
from seqauction.market import (Additive, Market, UnitDemand, assign, empty_allocation,
                               poa_additive, random_coverage)


def const(*bids):
    return StrategyProfile(lambda node, item: bids)


def test_resolve_highest_bid_pays_own_bid():
    assert resolve([F(3), F(5), F(1)], lowest_index_tiebreak, (None,), 0) == (1, 5)


def test_resolve_ties_use_the_rule():
    assert resolve([F(2), F(2)], lowest_index_tiebreak, (None,), 0) == (0, 2)
    assert resolve([F(2), F(2)], lambda n, j, top: 1, (None,), 0) == (1, 2)
    with pytest.raises(ValueError):
        resolve([F(2), F(2), F(1)], lambda n, j, top: 2, (None,), 0)


def test_max_tiebreak_prefers_largest_marginal_value():
    mkt = Market((UnitDemand([3, 1]), UnitDemand([5, 1])), 2)
    tb = max_tiebreak_rule(mkt)
    assert tb(empty_allocation(2), 0, frozenset({0, 1})) == 1
    # buyer 1 now holds item 0 worth 5, so item 1 adds nothing for it
    node = assign(empty_allocation(2), 0, 1)
    assert tb(node, 1, frozenset({0, 1})) == 0


def test_priority_tiebreak_falls_back():
    tb = priority_tiebreak({0: (2, 1)})
    assert tb((None,), 0, frozenset({1, 2})) == 2
    assert tb((None,), 0, frozenset({0, 1})) == 1
    assert tb((None,), 1, frozenset({1, 2})) == 1


def test_fixed_order_policy_skips_sold_items():
    pol = fixed_order_policy((2, 0, 1))
    assert pol.next_item((None, None, None)) == 2
    assert pol.next_item((None, None, 0)) == 0
    assert pol.next_item((1, None, 0)) == 1


def test_play_two_items_by_hand():
    mkt = Market((Additive([4, 1]), Additive([2, 3])), 2)
    out = play(mkt, fixed_order_policy((0, 1)), const(2, 1))
    assert out.allocation == (0, 0)
    assert out.prices == (2, 2)
    assert out.utilities == (1, 0)
    assert out.revenue == 4 and out.welfare == 5


def test_continuation_from_a_node():
    mkt = Market((Additive([4, 1]), Additive([2, 3])), 2)

    def bids(node, item):
        return [F(0), F(1)] if item == 1 else [F(2), F(1)]

    ev = Evaluator(mkt, fixed_order_policy((0, 1)), StrategyProfile(bids))
    assert ev.continuation(empty_allocation(2)) == (2, 2)
    assert ev.continuation((1, None)) == (0, 2)
    assert [d.item for _, d in ev.path()] == [0, 1]


def test_profile_errors():
    mkt = Market((Additive([1]), Additive([1])), 1)
    with pytest.raises(ProfileIncomplete):
        play(mkt, fixed_order_policy((0,)), StrategyProfile(lambda n, j: None))
    with pytest.raises(ValueError):
        play(mkt, fixed_order_policy((0,)), const(-1, 0))
    with pytest.raises(ValueError):
        play(mkt, fixed_order_policy((0,)), const(1))


def test_best_welfare_by_kind():
    assert best_welfare(poa_additive(3).market) == 9
    assert best_welfare(Market((UnitDemand([3, 2]), UnitDemand([3, 1])), 2)) == 5
    cov = random_coverage(2, 2, 4).market
    from seqauction.market import optimal_welfare
    assert best_welfare(cov) == optimal_welfare(cov)[0]


def test_poa_and_zero_welfare():
    mkt = poa_additive(2).market
    assert poa(mkt, Outcome.from_sale(mkt, (1, 0), (1, 1))) == F(4, 3)
    zero = Market((Additive([0]), Additive([1])), 1)
    with pytest.raises(ZeroWelfare):
        poa(zero, Outcome.from_sale(zero, (0,), (0,)))

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from seqauction.equilibrium import folks_check
from seqauction.game import best_welfare
from seqauction.market import (Market, UnitDemand, low_revenue, nonsingleton, order_matters,
                               poa_additive, random_additive, random_coverage,
                               random_unit_demand)
from seqauction.strategies import (additive_outcome, bad_spe_additive, folks_strategy,
                                   greedy_plan, greedy_submodular, low_revenue_spe,
                                   nonsingleton_spe, order_matters_bad_spe, order_matters_pair,
                                   unit_wlrs_eq)
from seqauction.walrasian import minimal_walrasian


def unit(*rows):
    return Market(tuple(UnitDemand(r) for r in rows), len(rows[0]))


def test_unit_wlrs_eq_three_buyers_by_hand():
    tree = unit_wlrs_eq(unit([4, 6], [3, 3], [0, 4]))
    out = tree.outcome()
    assert out.allocation == (1, 0)
    assert out.prices == (2, 4)
    rep = tree.verify(F(1, 16), check_oc=True)
    assert rep.is_spe and rep.oc.ok


@pytest.mark.parametrize("seed", range(8))
def test_unit_wlrs_eq_prices_match_minimal_walrasian(seed):
    mkt = random_unit_demand(3, 3, seed).market
    tree = unit_wlrs_eq(mkt)
    we = minimal_walrasian(mkt)
    out = tree.outcome()
    assert sorted(out.prices) == sorted(we.price_list)
    for j, w in we.allocation.items():
        assert out.prices[j] == we.price(j)
        if we.price(j) > 0:
            assert out.allocation[j] == w
    assert tree.verify(F(1, 16)).is_spe
    assert tree.is_optimistic_conservative()


def test_unit_wlrs_eq_rejects_other_kinds():
    with pytest.raises(TypeError):
        unit_wlrs_eq(poa_additive(2).market)


def test_unit_wlrs_eq_export_carries_annotations():
    tree = unit_wlrs_eq(unit([4, 6], [3, 3], [0, 4]))
    table = tree.export()
    root = table["nodes"][0]
    assert root["allocation"] == [None, None]
    assert root["support_order"] == [0, 1]
    assert root["we_prices"] == {"0": "2/1", "1": "4/1"}
    assert len(table["nodes"]) == 1 + 3


@pytest.mark.parametrize("m", [2, 3, 5])
def test_bad_additive_equilibrium(m):
    tree = bad_spe_additive(m)
    out = tree.outcome()
    assert out.welfare == 2 * m - 1
    assert best_welfare(tree.market) / out.welfare == F(m * m, 2 * m - 1)
    rep = tree.verify(F(1, 16), check_oc=True)
    assert rep.is_spe
    assert not rep.oc.ok


def test_low_revenue_equilibrium():
    eps = F(1, 100)
    tree = low_revenue_spe(4, eps)
    assert tree.market == low_revenue(4, eps).market
    assert tree.outcome().revenue == 4 * eps
    assert tree.verify(F(1, 16)).is_spe


@pytest.mark.parametrize("seed", range(4))
def test_additive_outcome(seed):
    mkt = random_additive(3, 2, seed).market
    out, tree = additive_outcome(mkt)
    assert tree.outcome() == out
    rep = tree.verify(F(1, 16), check_oc=True)
    assert rep.is_spe and rep.oc.ok


def test_folks_strategy_realises_certificate():
    mkt = poa_additive(2).market
    tree = folks_strategy(mkt, (1, 0), (1, 1), (0, 1))
    out = tree.outcome()
    assert out.allocation == (1, 0) and out.prices == (1, 1)
    assert tree.verify(F(1, 16)).is_spe


def test_folks_strategy_fails_without_certificate():
    mkt = unit([10], [5])
    tree = folks_strategy(mkt, (1,), (5,), (0,))
    assert tree.verify(F(1, 4)).verdict == "not-SPE"


@pytest.mark.parametrize("seed", range(6))
def test_greedy_submodular(seed):
    mkt = random_coverage(3, 3, seed).market
    plan = greedy_plan(mkt)
    order, tree = greedy_submodular(mkt)
    assert order == plan.order
    out = tree.outcome()
    assert out.revenue == out.welfare
    assert all(u == 0 for u in out.utilities)
    assert 2 * out.revenue >= best_welfare(mkt)
    assert folks_check(mkt, plan.allocation, plan.prices, plan.order).valid
    assert tree.verify(F(1, 16)).is_spe


def test_order_matters_pair_and_bad_equilibrium():
    mkt = order_matters(3).market
    pair = order_matters_pair(3)
    assert pair.good_order == (2, 1, 0)
    tree = order_matters_bad_spe(mkt)
    out = tree.outcome()
    assert out.revenue == 1 and out.allocation == pair.bad_allocation
    assert tree.verify(F(1, 16)).is_spe
    with pytest.raises(ValueError):
        order_matters_pair(1)


def test_nonsingleton():
    mkt = nonsingleton(2, 3, 1).market
    tree = nonsingleton_spe(mkt)
    out = tree.outcome()
    assert out.allocation == (0, 0, 0) and out.revenue == 0
    assert tree.verify(F(1, 16)).is_spe
    with pytest.raises(ValueError):
        nonsingleton_spe(unit([1, 0], [0, 0]))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 10 ** 6))
def test_unit_wlrs_eq_is_an_oc_equilibrium(n, m, seed):
    mkt = random_unit_demand(n, m, seed).market
    tree = unit_wlrs_eq(mkt)
    rep = tree.verify(F(1, 16), check_oc=True)
    assert rep.is_spe and rep.oc.ok
    assert tree.outcome().revenue == minimal_walrasian(mkt).revenue

import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from seqauction.equilibrium import (BudgetExceeded, NegativeUtility, TooLarge, cap_mode_for,
                                    deviation_bids, folks_check, folks_search, iter_nodes,
                                    oc_cap, replay_deviation, verify_spe)
from seqauction.game import (Evaluator, StrategyProfile, fixed_order_policy,
                             lowest_index_tiebreak, resolve)
from seqauction.market import (Additive, Market, UnitDemand, assign, empty_allocation,
                               marginal_value, order_matters, poa_additive, random_coverage)


def single(a, b):
    return Market((UnitDemand([a]), UnitDemand([b])), 1)


def test_folks_check_bad_additive_certificate():
    mkt = poa_additive(2).market
    cert = folks_check(mkt, (1, 0), (1, 1), (0, 1))
    assert cert.valid
    assert cert.utilities == (1, 0)
    assert min(cert.slacks.values()) == 0
    assert cert.revenue == 2


def test_folks_check_flags_profitable_snatch():
    cert = folks_check(single(10, 5), (1,), (5,), (0,))
    assert not cert.valid
    assert cert.violations() == [(0, 0)]


def test_negative_utility():
    with pytest.raises(NegativeUtility):
        folks_check(single(10, 5), (1,), (6,), (0,))
    assert folks_search(single(10, 5), (1,), (6,)) is None


def test_lone_buyer_never_pays():
    mkt = Market((UnitDemand([3]),), 1)
    assert not folks_check(mkt, (0,), (1,), (0,)).valid
    assert folks_check(mkt, (0,), (0,), (0,)).valid
    assert folks_search(mkt, (0,), (1,)) is None


def test_folks_search_finds_the_only_working_order():
    mkt = order_matters(3, F(1, 10)).market
    alloc, prices = (1, 2, 3), (1, 0, 0)
    assert folks_search(mkt, alloc, prices) == (0, 1, 2)
    assert not folks_check(mkt, alloc, prices, (2, 1, 0)).valid


def test_folks_search_matches_exhaustive_orders():
    rng = random.Random(3)
    for _ in range(30):
        mkt = random_coverage(2, 3, rng.randrange(10 ** 6)).market
        alloc = tuple(rng.randrange(2) for _ in range(3))
        prices = tuple(F(rng.randint(0, 4), 4) for _ in range(3))
        try:
            ok = [o for o in itertools.permutations(range(3))
                  if folks_check(mkt, alloc, prices, o).valid]
        except NegativeUtility:
            ok = []
        found = folks_search(mkt, alloc, prices)
        assert found == (ok[0] if ok else None)


def test_folks_search_size_limit():
    mkt = Market((Additive([1] * 9), Additive([1] * 9)), 9)
    with pytest.raises(TooLarge):
        folks_search(mkt, (0,) * 9, (0,) * 9)


def test_oc_cap_modes():
    mkt = single(10, 5)
    node = empty_allocation(1)
    assert oc_cap(mkt, node, 0, 1, F(0)) == 5
    assert oc_cap(mkt, node, 0, 0, F(12)) == 0
    assert oc_cap(mkt, node, 0, 0, F(1), won_payoff=F(10)) == 9
    assert cap_mode_for(mkt) == "residual"
    assert cap_mode_for(poa_additive(2).market) == "exact"
    with pytest.raises(ValueError):
        cap_mode_for(mkt, "nope")


def test_iter_nodes_counts_the_full_tree():
    mkt = Market((Additive([1, 1]), Additive([1, 1])), 2)
    nodes = list(iter_nodes(mkt, fixed_order_policy((0, 1))))
    assert len(nodes) == 1 + 2
    with pytest.raises(BudgetExceeded):
        list(iter_nodes(mkt, fixed_order_policy((0, 1)), 2))


def test_single_item_equilibrium_and_deviation():
    mkt = single(10, 5)
    pol = fixed_order_policy((0,), lowest_index_tiebreak)
    assert verify_spe(mkt, pol, StrategyProfile(lambda n, j: [5, 5])).is_spe
    rep = verify_spe(mkt, pol, StrategyProfile(lambda n, j: [3, 3]), delta=F(1, 4))
    assert rep.verdict == "not-SPE"
    w = rep.witness
    assert w.buyer == 1 and w.bid == F(13, 4) and w.gain == F(7, 4)
    on, dev = replay_deviation(mkt, pol, StrategyProfile(lambda n, j: [3, 3]), w)
    assert dev - on == w.gain


def test_overpaying_winner_deviates_down():
    mkt = single(10, 5)
    pol = fixed_order_policy((0,))
    rep = verify_spe(mkt, pol, StrategyProfile(lambda n, j: [7, 5]), delta=F(1, 2))
    assert rep.witness.buyer == 0 and rep.witness.bid == 5 and rep.witness.gain == 2
    assert not rep.grid_marginal


def test_grid_marginal_flag():
    mkt = single(10, 5)
    rep = verify_spe(mkt, fixed_order_policy((0,)), StrategyProfile(lambda n, j: [5, F(19, 4)]),
                     delta=F(1, 4))
    assert rep.verdict == "not-SPE" and rep.grid_marginal


def test_budget_gives_undecided():
    mkt = Market((Additive([1, 1, 1]), Additive([1, 1, 1])), 3)
    rep = verify_spe(mkt, fixed_order_policy((0, 1, 2)), StrategyProfile(lambda n, j: [0, 0]),
                     max_nodes=3)
    assert rep.verdict == "undecided" and not rep.is_spe


def test_deviation_bids_exclude_own_bid():
    c = deviation_bids((F(1), F(2)), 0, F(1, 2))
    assert F(1) not in c and F(0) in c and F(2) in c and F(5, 2) in c and F(3, 2) in c


def full_sweep_gain(mkt, pol, prof, delta):
    """Best one-shot gain with every grid bid up to the top value plus the exact bids."""
    ev = Evaluator(mkt, pol, prof)
    top = max(mkt.value(i, range(mkt.m)) for i in range(mkt.n)) + 2 * delta
    grid = [k * delta for k in range(int(top / delta) + 1)]
    best = F(0)
    for node in iter_nodes(mkt, pol):
        d = ev.decision(node)
        u = ev.continuation(node)
        cands = set(grid) | set(d.bids) | {b + delta for b in d.bids}
        for i in range(mkt.n):
            for x in cands:
                dev = d.bids[:i] + (x,) + d.bids[i + 1:]
                w, p = resolve(dev, pol.tie_break, node, d.item)
                pay = ev.continuation(assign(node, d.item, w))[i]
                if w == i:
                    pay += marginal_value(mkt, i, d.item, node) - p
                best = max(best, pay - u[i])
    return best


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_candidate_bids_match_full_sweep(seed):
    rng = random.Random(seed)
    n, m = rng.randint(2, 3), rng.randint(1, 2)
    mkt = Market(tuple(Additive([rng.randint(0, 4) for _ in range(m)]) for _ in range(n)), m)
    table = {}

    def bids(node, item):
        key = (node, item)
        if key not in table:
            table[key] = [F(rng.randint(0, 12), 4) for _ in range(n)]
        return table[key]

    pol = fixed_order_policy(range(m))
    prof = StrategyProfile(bids)
    delta = F(1, 4)
    rep = verify_spe(mkt, pol, prof, delta)
    assert (rep.witness.gain if rep.witness else F(0)) == full_sweep_gain(mkt, pol, prof, delta)

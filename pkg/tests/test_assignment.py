import itertools
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from seqauction.assignment import optimal_assignment


def brute(values, rows=None):
    n, m = len(values), len(values[0])
    rows = list(range(n)) if rows is None else list(rows)
    best = F(0)
    for k in range(min(len(rows), m) + 1):
        for buyers in itertools.permutations(rows, k):
            for items in itertools.combinations(range(m), k):
                best = max(best, sum((values[b][j] for b, j in zip(buyers, items)), F(0)))
    return best


def test_small_by_hand():
    winners, w = optimal_assignment([[F(3), F(1)], [F(2), F(2)]])
    assert w == 5
    assert tuple(winners) == (0, 1)


def test_more_items_than_buyers():
    winners, w = optimal_assignment([[F(1), F(5), F(2)]])
    assert w == 5
    assert list(winners) == [None, 0, None]


def test_excluded_rows():
    _, w = optimal_assignment([[F(9), F(1)], [F(2), F(2)]], rows=[1])
    assert w == 2


matrices = st.integers(1, 4).flatmap(lambda n: st.integers(1, 4).flatmap(
    lambda m: st.lists(st.lists(st.fractions(0, 10, max_denominator=4), min_size=m, max_size=m),
                       min_size=n, max_size=n)))


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_matches_brute_force(values):
    winners, w = optimal_assignment(values)
    assert w == brute(values)
    used = [b for b in winners if b is not None]
    assert len(used) == len(set(used))
    assert sum((values[b][j] for j, b in enumerate(winners) if b is not None), F(0)) == w

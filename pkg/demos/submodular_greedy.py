"""Coverage buyers: a greedy selling order extracts the full surplus.

Hand out items greedily by largest marginal value and charge each buyer that
marginal value. Along the greedy order nobody can profit from snatching an
item early, so the plan is an equilibrium outcome with zero buyer utility and
revenue at least half the optimum.
"""

from fractions import Fraction

from seqauction import best_welfare, folks_search, format_money, greedy_submodular, random_coverage
from seqauction.strategies import greedy_plan

mkt = random_coverage(3, 4, seed=2).market
plan = greedy_plan(mkt)
order, tree = greedy_submodular(mkt)
out = tree.outcome()
print(f"greedy order {order}, allocation {plan.allocation}, "
      f"prices {[format_money(p) for p in plan.prices]}")
print(f"revenue {format_money(out.revenue)} vs optimum {format_money(best_welfare(mkt))}")
print(f"utilities {[format_money(u) for u in out.utilities]}")
print(f"first order passing the snatch test: {folks_search(mkt, plan.allocation, plan.prices)}")
print(f"subgame perfect at delta 1/16: {tree.verify(Fraction(1, 16)).is_spe}")

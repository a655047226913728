"""Demand reduction with one unit-demand and one additive buyer.

OR wants one of two items at 4; SUM values each at 5. Walrasian prices must
be at least 4 per item (revenue 8), but in the sequential auction SUM lets OR
take the first item cheaply, after which OR is out and SUM gets the second
for free. Revenue collapses to about 1.
"""

from fractions import Fraction

from seqauction import (brute_force_spe, demand_reduction, fixed_order_policy, format_money,
                        max_tiebreak_rule, priority_tiebreak, walrasian_by_enumeration)

mkt = demand_reduction().market
pol = fixed_order_policy((0, 1), priority_tiebreak({0: (0,)}, max_tiebreak_rule(mkt)))
for delta in (Fraction(1, 4), Fraction(1, 8)):
    res = brute_force_spe(mkt, pol, delta, "oc")
    for c in res.classes:
        print(f"delta {delta}: allocation {c.allocation}, prices "
              f"{[format_money(p) for p in c.price_low]} .. "
              f"{[format_money(p) for p in c.price_high]}")

grid = [Fraction(k, 2) for k in range(11)]
best = min(sum(p) for _, p in walrasian_by_enumeration(mkt, grid))
print(f"cheapest Walrasian revenue on a 1/2 grid: {best}")

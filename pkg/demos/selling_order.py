"""The seller's choice of order can swing revenue from about 1 to about m.

Unit-demand buyers sit on a path: buyer i wants items i-1 and i. Selling left
to right admits an equilibrium in which the first item goes for 1 and every
later one for nothing. Selling right to left, every item fetches about 1. A
grid search shows the reversed order's worst equilibrium; the shortfall grows
with the grid step because rounding compounds over later rounds.
"""

from fractions import Fraction

from seqauction import (brute_force_spe, fixed_order_policy, folks_check, format_money,
                        max_tiebreak_rule, minimal_walrasian, order_matters, order_matters_pair)

for m in (2, 3, 4):
    mkt = order_matters(m).market
    pair = order_matters_pair(m)
    cert = folks_check(mkt, pair.bad_allocation, pair.bad_prices, pair.bad_order)
    delta = Fraction(1, 8)
    pol = fixed_order_policy(pair.good_order, max_tiebreak_rule(mkt))
    res = brute_force_spe(mkt, pol, delta, "all")
    low = min(o.revenue for o in res.outcomes)
    print(f"m={m}: left-to-right certificate valid={cert.valid} revenue {cert.revenue}; "
          f"Walrasian revenue {minimal_walrasian(mkt).revenue}; "
          f"right-to-left worst grid revenue {format_money(low)} "
          f"(m - m(m+1)/2 * delta = {format_money(m - Fraction(m * (m + 1), 2) * delta)})")

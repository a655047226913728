"""Unit-demand buyers: sequential auctions reproduce the minimal Walrasian prices.

Each item's minimal Walrasian price is held up by a "supporter", a losing
buyer who is indifferent between the item and what it gets. Sell the items so
that every supporter's own purchase comes later; then the supporter is still
around to bid the price. The equilibrium tree recomputes this at every node
on the residual market.
"""

from fractions import Fraction

from seqauction import (brute_force_spe, format_money, minimal_walrasian, random_unit_demand,
                        support_order, supporters, unit_wlrs_eq)

mkt = random_unit_demand(3, 3, seed=4).market
for i in range(mkt.n):
    print(f"buyer {i}: values {[format_money(v) for v in mkt.item_values(i)]}")

we = minimal_walrasian(mkt)
supp = supporters(we)
print("minimal Walrasian prices:", {j: format_money(p) for j, p in we.prices.items()})
print("winners:", we.allocation, "supporters:", supp)
print("support order:", support_order(we, supp))

tree = unit_wlrs_eq(mkt)
out = tree.outcome()
print("sequential auction path prices:", [format_money(p) for p in out.prices])
report = tree.verify(Fraction(1, 16), check_oc=True)
print(f"subgame perfect: {report.is_spe} over {report.nodes_checked} nodes; "
      f"optimistic-conservative: {report.oc.ok}")

for delta in (Fraction(1, 8), Fraction(1, 32)):
    res = brute_force_spe(mkt, tree.policy, delta, "oc")
    cls = res.classes
    err = max(abs(p - q) for o in cls[0].members for p, q in zip(o.prices, out.prices))
    print(f"grid oracle at delta {delta}: {len(res.outcomes)} equilibria in {len(cls)} class(es), "
          f"largest price gap {float(err):.4f} ({float(err / delta):.2f} steps)")

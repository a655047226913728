"""Two additive buyers and a bad equilibrium.

Buyer A values every item at m, buyer B at 1. Bidding truthfully item by item
would hand A everything. Yet there is a subgame-perfect equilibrium in which B
walks away with all but the last item, because A is "threatened": the moment A
wins anything, both buyers bid m on every remaining item and A earns nothing.
The welfare loss is about m/2. The threat relies on B bidding far above its
value, which is exactly what optimistic-conservative bidding forbids.
"""

from fractions import Fraction

from seqauction import additive_outcome, bad_spe_additive, best_welfare, format_money, poa

m = 5
tree = bad_spe_additive(m)
out = tree.outcome()
print(f"market: {tree.market.label}")
print("bad equilibrium path:")
for node, d in tree.evaluator.path():
    print(f"  item {d.item}: bids {[format_money(b) for b in d.bids]} -> buyer {d.winner}"
          f" pays {format_money(d.price)}")
print(f"welfare {out.welfare}, optimum {best_welfare(tree.market)}, "
      f"price of anarchy {format_money(poa(tree.market, out))}")

report = tree.verify(Fraction(1, 16), check_oc=True)
print(f"one-shot deviation check at delta 1/16: {report.verdict}")
w = report.oc.witness
print(f"optimistic-conservative? {report.oc.ok} (buyer {w.buyer} bids {format_money(w.bid)}"
      f" on item {w.item}, cap {format_money(w.cap)})")

good, good_tree = additive_outcome(tree.market)
rep = good_tree.verify(Fraction(1, 16), check_oc=True)
print(f"second-price style outcome: allocation {good.allocation}, welfare {good.welfare}, "
      f"{rep.verdict}, optimistic-conservative {rep.oc.ok}")

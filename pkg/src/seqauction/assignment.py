"""Exact maximum-weight assignment (Hungarian method on integers).

Rational weights are scaled to integers, and a lexicographic bonus is added
below the resolution of the true weights so that, among all welfare-optimal
matchings, the one whose winner vector ``(win(0), win(1), ...)`` is
lexicographically smallest is returned (unmatched items count as larger than
any buyer).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence


def _hungarian_min(cost: list) -> list:
    """Min-cost perfect matching on a square integer matrix.

    Returns ``row_of[col]``. Classical O(N^3) potentials formulation.
    """
    n = len(cost)
    INF = float("inf")
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    return [p[j] - 1 for j in range(1, n + 1)]


def optimal_assignment(values: Sequence[Sequence[Fraction]],
                       rows: Optional[Sequence[int]] = None) -> tuple:
    """Maximum-weight matching of buyers (rows) to items (columns).

    Args:
        values: ``values[i][k]`` is buyer ``i``'s value for column ``k``.
        rows: restrict to these buyers (used to drop one buyer for VCG).

    Returns:
        ``(winners, welfare)`` where ``winners[k]`` is the buyer matched to
        column ``k`` or ``None``.
    """
    rows = list(range(len(values))) if rows is None else list(rows)
    ncols = len(values[0]) if values else 0
    if ncols == 0:
        return (), Fraction(0)
    if not rows:
        return (None,) * ncols, Fraction(0)
    nrows = len(rows)
    scale = 1
    for i in rows:
        for x in values[i]:
            scale = scale * Fraction(x).denominator // math.gcd(scale, Fraction(x).denominator)
    # base-(nrows+1) digits: column k's digit is (nrows - position of its buyer),
    # so a larger bonus means a lexicographically smaller winner vector
    base = nrows + 1
    big = base ** ncols
    N = max(nrows, ncols)
    cost = [[0] * N for _ in range(N)]
    for r, i in enumerate(rows):
        for k in range(ncols):
            w = int(Fraction(values[i][k]) * scale)
            bonus = (nrows - r) * base ** (ncols - 1 - k)
            cost[r][k] = -(w * big + bonus)
    row_of = _hungarian_min(cost)
    winners = []
    welfare = Fraction(0)
    for k in range(ncols):
        r = row_of[k]
        if r < nrows:
            winners.append(rows[r])
            welfare += Fraction(values[rows[r]][k])
        else:
            winners.append(None)
    return tuple(winners), welfare

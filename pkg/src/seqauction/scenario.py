"""JSON ingestion and emission for markets and scenario specs.

Market format::

    {"items": 2, "label": "demo",
     "buyers": [{"kind": "unit-demand", "values": ["4/1", "4/1"]},
                {"kind": "additive", "values": [5, "5/1"]},
                {"kind": "coverage", "sets": [[0, 1], [1]], "weights": ["1/1", "1/2"]},
                {"kind": "explicit", "table": [0, 1, 1, 3]}]}

Money is an integer or a ``"num/den"`` string; floats are rejected. Explicit
tables are indexed by item bitmask. Emitted JSON always uses ``"num/den"``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .market import (FAMILIES, Additive, Coverage, Explicit, Market, UnitDemand, format_money,
                     gen_scenario)


class ScenarioError(ValueError):
    """A malformed market or scenario, with the offending field path."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


def parse_money(x: Any, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ScenarioError(where, f"expected an integer or 'num/den' string, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(where, f"not a rational number: {x!r}") from None


def _money_list(xs: Any, where: str) -> tuple:
    if not isinstance(xs, list):
        raise ScenarioError(where, "expected a list")
    return tuple(parse_money(x, f"{where}[{k}]") for k, x in enumerate(xs))


def _buyer_from_json(b: Any, m: int, where: str):
    if not isinstance(b, dict):
        raise ScenarioError(where, "expected an object")
    kind = b.get("kind")
    try:
        if kind == "additive":
            v = Additive(_money_list(b.get("values"), f"{where}.values"))
        elif kind == "unit-demand":
            v = UnitDemand(_money_list(b.get("values"), f"{where}.values"))
        elif kind == "coverage":
            sets = b.get("sets")
            if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
                raise ScenarioError(f"{where}.sets", "expected a list of element lists")
            v = Coverage(tuple(frozenset(s) for s in sets),
                         _money_list(b.get("weights"), f"{where}.weights"))
        elif kind == "explicit":
            v = Explicit(_money_list(b.get("table"), f"{where}.table"))
        else:
            raise ScenarioError(f"{where}.kind", f"unknown valuation kind {kind!r}")
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(where, str(exc)) from None
    if v.m != m:
        raise ScenarioError(where, f"defined over {v.m} items, market has {m}")
    return v


def market_from_json(data: Any, where: str = "market") -> Market:
    if not isinstance(data, dict):
        raise ScenarioError(where, "expected an object")
    m = data.get("items")
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ScenarioError(f"{where}.items", "expected a positive integer")
    buyers = data.get("buyers")
    if not isinstance(buyers, list) or not buyers:
        raise ScenarioError(f"{where}.buyers", "expected a non-empty list")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ScenarioError(f"{where}.label", "expected a string")
    return Market(tuple(_buyer_from_json(b, m, f"{where}.buyers[{i}]")
                        for i, b in enumerate(buyers)), m, label)


def buyer_to_json(v) -> dict:
    if v.kind in ("additive", "unit-demand"):
        return {"kind": v.kind, "values": [format_money(x) for x in v.values]}
    if v.kind == "coverage":
        return {"kind": "coverage", "sets": [sorted(s) for s in v.sets],
                "weights": [format_money(w) for w in v.weights]}
    return {"kind": "explicit", "table": [format_money(x) for x in v.table]}


def market_to_json(mkt: Market) -> dict:
    return {"items": mkt.m, "label": mkt.label, "buyers": [buyer_to_json(v) for v in mkt.buyers]}


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def market_from_spec(spec: dict, seed=None) -> tuple:
    """Market from either ``"market"`` (inline) or ``"family"`` + ``"params"``.

    Returns ``(market, notes)``. An explicit ``seed`` fills in a family's
    ``seed`` parameter when the spec leaves it out.
    """
    if "market" in spec and "family" in spec:
        raise ScenarioError("", "give either 'market' or 'family', not both")
    if "market" in spec:
        return market_from_json(spec["market"]), {}
    family = spec.get("family")
    if family is None:
        raise ScenarioError("", "missing 'market' or 'family'")
    if family not in FAMILIES:
        raise ScenarioError("family", f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    params = dict(spec.get("params", {}))
    if not isinstance(spec.get("params", {}), dict):
        raise ScenarioError("params", "expected an object")
    for key in ("eps",):
        if key in params:
            params[key] = parse_money(params[key], f"params.{key}")
    if seed is not None and "seed" not in params and family.startswith("random"):
        params["seed"] = seed
    try:
        sc = gen_scenario(family, **params)
    except TypeError as exc:
        raise ScenarioError("params", str(exc)) from None
    except (ValueError, RuntimeError) as exc:
        raise ScenarioError("params", str(exc)) from None
    return sc.market, sc.notes

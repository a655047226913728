"""Command line entry point.

``seqauction run SPEC.json`` runs the tasks of one scenario;
``seqauction reproduce`` runs the numbered acceptance criteria.

A scenario spec is a JSON object::

    {"id": "poa5",
     "family": "poa_additive", "params": {"m": 5},     # or "market": {...}
     "delta": "1/16", "budget": 2000000, "seed": 7,
     "tasks": [{"task": "build", "strategy": "bad-additive"},
               {"task": "verify"}, {"task": "poa"}]}

Tasks and their fields:

``minimal-we``
    minimal Walrasian prices, supporters and support order (unit demand).
``folks-check``
    ``allocation``, ``prices``, ``order``; verdict: certificate valid.
``folks-search``
    ``allocation``, ``prices``; verdict: some selling order works.
``build``
    ``strategy``: one of ``unit-wlrs-eq``, ``additive``, ``bad-additive``,
    ``low-revenue``, ``nonsingleton``, ``greedy-submodular``,
    ``order-matters-bad``, ``folks`` (the last takes ``allocation``,
    ``prices``, ``order``). Optional ``export: true`` adds the node table.
``verify``
    one-shot deviation check of the last built strategy; verdict: SPE (and
    optimistic-conservative when ``require_oc`` is true).
``oracle``
    grid SPE enumeration. ``filter`` (``all``/``oc``), ``policy``
    (``built`` to reuse the last strategy's seller, else a fixed order),
    ``order``, ``tie_break`` (``max``/``lowest``), ``priority``
    (``{"item": [buyers]}``), ``expect_classes``; verdict: equilibria exist
    and, if given, the class count matches.
``poa``
    optimum over the last built outcome.

Money fields are integers or ``"num/den"`` strings. ``--delta``,
``--budget`` and ``--seed`` override the scenario's own values. The exit
code is 0 only when every verdict is affirmative; 2 flags malformed input
and 3 a search that exceeded its budget.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from . import acceptance
from .equilibrium import BudgetExceeded, NegativeUtility, TooLarge, folks_check, folks_search
from .game import (best_welfare, fixed_order_policy, lowest_index_tiebreak, max_tiebreak_rule,
                   poa, priority_tiebreak, ZeroWelfare)
from .market import format_money, low_revenue, poa_additive
from .oracle import DEFAULT_BUDGET, brute_force_spe
from .scenario import (ScenarioError, dumps, market_from_spec, market_to_json, parse_money)
from .strategies import (additive_outcome, bad_spe_additive, folks_strategy, greedy_submodular,
                         low_revenue_spe, nonsingleton_spe, order_matters_bad_spe, unit_wlrs_eq)
from .walrasian import minimal_walrasian, support_order, supporters

DEFAULT_DELTA = Fraction(1, 16)


def _ints(xs: Any, where: str) -> tuple:
    if not isinstance(xs, list) or not all(isinstance(x, int) and not isinstance(x, bool)
                                           for x in xs):
        raise ScenarioError(where, "expected a list of integers")
    return tuple(xs)


def _moneys(xs: Any, where: str) -> tuple:
    if not isinstance(xs, list):
        raise ScenarioError(where, "expected a list")
    return tuple(parse_money(x, f"{where}[{k}]") for k, x in enumerate(xs))


def _build(mkt, task: dict, where: str):
    try:
        return _build_unchecked(mkt, task, where)
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}.strategy", str(exc)) from None


def _build_unchecked(mkt, task: dict, where: str):
    name = task.get("strategy")
    if name == "unit-wlrs-eq":
        return unit_wlrs_eq(mkt)
    if name == "additive":
        return additive_outcome(mkt)[1]
    if name == "bad-additive":
        if mkt.n != 2 or mkt.buyers != poa_additive(mkt.m).market.buyers:
            raise ScenarioError(f"{where}.strategy", "bad-additive needs the poa_additive market")
        return bad_spe_additive(mkt.m)
    if name == "low-revenue":
        eps = mkt.buyers[-1].values[-1] if mkt.n == 2 and mkt.is_additive() else None
        if eps is None or eps <= 0 or mkt.buyers != low_revenue(mkt.m, eps).market.buyers:
            raise ScenarioError(f"{where}.strategy", "low-revenue needs the low_revenue market")
        return low_revenue_spe(mkt.m, eps)
    if name == "nonsingleton":
        return nonsingleton_spe(mkt)
    if name == "greedy-submodular":
        return greedy_submodular(mkt)[1]
    if name == "order-matters-bad":
        return order_matters_bad_spe(mkt)
    if name == "folks":
        return folks_strategy(mkt, _ints(task.get("allocation"), f"{where}.allocation"),
                              _moneys(task.get("prices"), f"{where}.prices"),
                              _ints(task.get("order"), f"{where}.order"))
    raise ScenarioError(f"{where}.strategy", f"unknown strategy {name!r}")


def _oracle_policy(mkt, task: dict, tree, where: str):
    if task.get("policy") == "built":
        if tree is None:
            raise ScenarioError(where, "policy 'built' needs an earlier build task")
        return tree.policy
    order = _ints(task.get("order", list(range(mkt.m))), f"{where}.order")
    tb_name = task.get("tie_break", "max")
    if tb_name not in ("max", "lowest"):
        raise ScenarioError(f"{where}.tie_break", f"unknown tie-break {tb_name!r}")
    tb = max_tiebreak_rule(mkt) if tb_name == "max" else lowest_index_tiebreak
    prio = task.get("priority")
    if prio is not None:
        if not isinstance(prio, dict):
            raise ScenarioError(f"{where}.priority", "expected an object")
        tb = priority_tiebreak({int(k): _ints(v, f"{where}.priority.{k}")
                                for k, v in prio.items()}, tb)
    return fixed_order_policy(order, tb)


def run_spec(spec: dict, delta: Optional[Fraction] = None, budget: Optional[int] = None,
             seed: Optional[int] = None) -> tuple:
    """Run every task of ``spec``. Returns ``(report, timings)``."""
    if not isinstance(spec, dict):
        raise ScenarioError("", "a scenario spec must be a JSON object")
    seed = spec.get("seed") if seed is None else seed
    mkt, notes = market_from_spec(spec, seed)
    if delta is None:
        delta = parse_money(spec.get("delta", format_money(DEFAULT_DELTA)), "delta")
    if delta <= 0:
        raise ScenarioError("delta", "must be positive")
    if budget is None:
        budget = spec.get("budget", DEFAULT_BUDGET)
    tasks = spec.get("tasks", spec.get("task"))
    if isinstance(tasks, (str, dict)):
        tasks = [tasks]
    if not isinstance(tasks, list) or not tasks:
        raise ScenarioError("tasks", "expected a task name, a task object or a list of them")

    tree = None
    results, timings = [], []
    for k, task in enumerate(tasks):
        where = f"tasks[{k}]"
        if isinstance(task, str):
            task = {"task": task}
        if not isinstance(task, dict):
            raise ScenarioError(where, "expected a task name or object")
        name = task.get("task")
        start = time.perf_counter()
        res: dict = {"task": name}
        verdict = None
        if name == "minimal-we":
            we = minimal_walrasian(mkt)
            supp = supporters(we)
            res.update(prices=[format_money(p) for p in we.price_list],
                       allocation=list(we.winners),
                       utilities=[format_money(u) for u in we.utilities],
                       revenue=format_money(we.revenue), welfare=format_money(we.welfare),
                       supporters={str(j): s for j, s in sorted(supp.items())},
                       support_order=list(support_order(we, supp)))
        elif name in ("folks-check", "folks-search"):
            alloc = _ints(task.get("allocation"), f"{where}.allocation")
            prices = _moneys(task.get("prices"), f"{where}.prices")
            try:
                if name == "folks-check":
                    cert = folks_check(mkt, alloc, prices,
                                       _ints(task.get("order"), f"{where}.order"))
                    res["certificate"] = cert.to_dict()
                    res["revenue"] = format_money(cert.revenue)
                    verdict = cert.valid
                else:
                    found = folks_search(mkt, alloc, prices)
                    res["order"] = None if found is None else list(found)
                    verdict = found is not None
            except NegativeUtility as exc:
                res["error"] = str(exc)
                verdict = False
            except TooLarge as exc:
                res["undecided"] = str(exc)
                verdict = False
            except ValueError as exc:
                raise ScenarioError(where, str(exc)) from None
        elif name == "build":
            tree = _build(mkt, task, where)
            out = tree.outcome()
            res.update(strategy=task.get("strategy"), outcome=out.to_dict())
            if task.get("export"):
                res["tree"] = tree.export()
        elif name in ("verify", "poa"):
            if tree is None:
                raise ScenarioError(where, f"'{name}' needs an earlier build task")
            if name == "verify":
                rep = tree.verify(delta, max_nodes=budget, check_oc=True)
                res["report"] = rep.to_dict()
                verdict = rep.is_spe and (not task.get("require_oc") or rep.oc.ok)
            else:
                out = tree.outcome()
                res.update(welfare=format_money(out.welfare),
                           optimum=format_money(best_welfare(mkt)))
                try:
                    res["poa"] = format_money(poa(mkt, out))
                except ZeroWelfare:
                    res["poa"] = "inf"
        elif name == "oracle":
            filt = task.get("filter", "all")
            if filt not in ("all", "oc"):
                raise ScenarioError(f"{where}.filter", f"unknown filter {filt!r}")
            policy = _oracle_policy(mkt, task, tree, where)
            result = brute_force_spe(mkt, policy, delta, filt, budget)
            res["result"] = result.to_dict()
            verdict = bool(result.outcomes)
            expect = task.get("expect_classes")
            if expect is not None:
                verdict = verdict and len(result.classes) == expect
        else:
            raise ScenarioError(f"{where}.task", f"unknown task {name!r}")
        res["verdict"] = verdict
        results.append(res)
        timings.append({"task": name, "seconds": round(time.perf_counter() - start, 6)})

    echo = {k: v for k, v in spec.items()}
    echo.update(delta=format_money(delta), budget=budget)
    if seed is not None:
        echo["seed"] = seed
    report = {
        "id": spec.get("id", ""),
        "scenario": echo,
        "market": market_to_json(mkt),
        "notes": {k: (format_money(v) if isinstance(v, Fraction) else v)
                  for k, v in notes.items()},
        "results": results,
        "ok": all(r["verdict"] is not False for r in results),
    }
    return report, timings


def _summary_csv(report: dict) -> str:
    lines = ["task,verdict"]
    for r in report["results"]:
        v = "" if r["verdict"] is None else ("PASS" if r["verdict"] else "FAIL")
        lines.append(f"{r['task']},{v}")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    path = Path(args.spec)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"{path}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    try:
        delta = parse_money(args.delta, "--delta") if args.delta is not None else None
        report, timings = run_spec(spec, delta, args.budget, args.seed)
    except ScenarioError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"{path}: budget exceeded: {exc}", file=sys.stderr)
        return 3
    text = dumps(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = report["id"] or path.stem
        (out / f"{stem}.json").write_text(text)
        (out / f"{stem}.csv").write_text(_summary_csv(report))
        (out / f"{stem}.timing.json").write_text(dumps(timings))
        for r in report["results"]:
            v = "-" if r["verdict"] is None else ("PASS" if r["verdict"] else "FAIL")
            print(f"{v:4s} {r['task']}")
    else:
        sys.stdout.write(text)
    return 0 if report["ok"] else 1


def cmd_reproduce(args) -> int:
    try:
        selected = acceptance.select(args.only)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    results = []
    for c in selected:
        r = acceptance.run_criterion(c)
        print(r.line(), flush=True)
        for f in r.failures[:5]:
            print(f"    expected {r.expected}; observed {f}", flush=True)
        results.append(r)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "acceptance.json").write_text(dumps({
        "criteria": [r.to_dict() for r in results],
        "passed": sum(r.passed for r in results),
        "total": len(results),
    }))
    (out / "acceptance.csv").write_text(acceptance.to_csv(results))
    (out / "acceptance.timing.json").write_text(dumps(
        [{"criterion": r.number, "seconds": round(r.seconds, 3)} for r in results]))
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed; "
          f"reports in {out}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqauction",
                                description="Sequential first-price auction experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the tasks of one scenario spec")
    r.add_argument("spec", help="scenario JSON file")
    r.add_argument("--out", help="directory for JSON, CSV and timing output")
    r.add_argument("--delta", help="grid step, e.g. 1/16")
    r.add_argument("--budget", type=int, help="node budget for searches")
    r.add_argument("--seed", type=int, help="seed for random market families")
    r.set_defaults(func=cmd_run)
    rp = sub.add_parser("reproduce", help="run the acceptance criteria")
    rp.add_argument("--only", help="restrict to criteria touching this module")
    rp.add_argument("--out", default="seqauction-report", help="output directory")
    rp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 feasible at the requested order (or command succeeded),
1 a witness failed verification, 2 input error, 3 resource budget exceeded,
10 incompatible, 11 inconclusive at tolerance.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

import numpy as np

from . import engine
from .errors import BudgetExceeded, InputError
from .formats import (dump_json, parse_distribution, parse_events, parse_graph, parse_polynomial,
                      parse_witness, read_text, witness_document)
from .inflate import build_inflation, default_budget, diagonal_constraints, event_constraints
from .lpcore import FEAS_TOL, export_lp
from .model import CausalStructure, CorrelationScenario, Distribution, EventTable
from .preprocess import condition_on, exogenize, districts, unpack

log = logging.getLogger("inflation_hierarchy")

EXIT_OK = 0
EXIT_WITNESS_FAILED = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_INCOMPATIBLE = 10
EXIT_INCONCLUSIVE = 11

STATUS_EXIT = {engine.FEASIBLE: EXIT_OK, engine.INCOMPATIBLE: EXIT_INCOMPATIBLE,
               engine.INCONCLUSIVE: EXIT_INCONCLUSIVE}
EXOGENOUS_FACTORIZATION_TOL = 1e-9


# ---------------------------------------------------------------- helpers

def _as_scenario(structure: CausalStructure) -> CorrelationScenario | None:
    if structure.exogenous or not structure.is_correlation_scenario():
        return None
    return CorrelationScenario.from_structure(structure)


def _reorder(p: Distribution, variables, given=()) -> Distribution:
    """Transpose ``p`` to the given variable order (names must agree as sets)."""
    want = [n for n, _ in given] + [n for n, _ in variables]
    have = [n for n, _ in p.given] + [n for n, _ in p.variables]
    if sorted(want) != sorted(have) or len(p.given) != len(given):
        raise InputError(f"distribution over {have} does not match the graph's {want}")
    card = dict(p.given + p.variables)
    for n, c in tuple(given) + tuple(variables):
        if card[n] != c:
            raise InputError(f"variable {n!r} has cardinality {card[n]} in the table, {c} in the graph")
    tab = np.transpose(p.table, [have.index(n) for n in want])
    return Distribution(variables, tab, given)


def _conditional_input(p: Distribution, structure: CausalStructure) -> Distribution:
    exo = [(x, structure.card(x)) for x in structure.exogenous]
    endo = [(a, structure.card(a)) for a in structure.endogenous]
    if not p.given and exo:
        cond, independent = condition_on(p, [x for x, _ in exo], EXOGENOUS_FACTORIZATION_TOL)
        if not independent:
            raise InputError("joint table over exogenous variables does not factorize; "
                             "supply P(observed | exogenous) with a 'given' block")
        log.warning("joint table includes exogenous variables %s; they factorize, "
                    "conditioning on them", [x for x, _ in exo])
        p = cond
    return _reorder(p, endo, exo)


def scenario_document(sc: CorrelationScenario) -> dict:
    return {"latents": list(sc.latents),
            "observed": [{"name": a, "card": d, "parents": [sc.latents[j] for j in ps]}
                         for a, d, ps in zip(sc.observed, sc.cards, sc.parent_sets)]}


def scenario_from_document(doc: dict) -> CorrelationScenario:
    try:
        return CorrelationScenario.from_parents(
            [(o["name"], int(o["card"]), list(o["parents"])) for o in doc["observed"]])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed scenario document: {exc!r}") from None


def _emit(doc, out_path: str | None) -> None:
    text = dump_json(doc)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verdict_entry(sc, verdict, args, members) -> dict:
    entry = {"members": list(members), "status": verdict.status,
             "scenario": scenario_document(sc), "distance_bound": verdict.distance_bound,
             "value_at_input": None, "witness": None}
    if verdict.witness is not None:
        entry["value_at_input"] = verdict.witness.value_at_input
        entry["witness"] = witness_document(verdict.witness)
        report = engine.verify_witness(verdict.witness, sc, samples=args.samples, seed=args.seed)
        entry["soundness_check"] = {"samples": report.samples, "seed": report.seed,
                                    "min_value": report.min_value, "passed": report.passed}
    return entry


# ---------------------------------------------------------------- commands

def cmd_check(args) -> int:
    t0 = time.perf_counter()
    structure = parse_graph(read_text(args.graph), args.graph)
    sc = _as_scenario(structure)
    if args.events:
        data = parse_events(read_text(args.data), args.data)
        if sc is None:
            raise InputError("event tables are supported for correlation-scenario graphs only; "
                             "general graphs take P(observed | exogenous)")
        if data.variables != sc.variables:
            raise InputError(f"events declared over {data.variables}, graph has {sc.variables}")
    else:
        data = parse_distribution(read_text(args.data), args.data)
    entries = []
    if sc is not None:
        if not args.events:
            data = _reorder(data, sc.variables)
        verdict = engine.check_compatibility(sc, data, args.order, budget=args.budget,
                                             tol=args.tolerance, with_distance=args.distance)
        entries.append(_verdict_entry(sc, verdict, args, sc.observed))
        status = verdict.status
    else:
        p = _conditional_input(data, structure)
        result = engine.check_structure(structure, p, args.order, budget=args.budget,
                                        tol=args.tolerance)
        for d in result.districts:
            entries.append(_verdict_entry(d.scenario, d.verdict, args, d.district.endogenous))
        status = result.status
    first = next((e for e in entries if e["witness"] is not None), entries[0])
    doc = {"status": status, "order": args.order, "seed": args.seed,
           "tolerance": args.tolerance,
           "value_at_input": first["value_at_input"], "distance_bound": first["distance_bound"],
           "witness": first["witness"], "districts": entries,
           "timing_seconds": time.perf_counter() - t0}
    _emit(doc, args.out)
    return STATUS_EXIT[status]


def cmd_optimize(args) -> int:
    t0 = time.perf_counter()
    structure = parse_graph(read_text(args.graph), args.graph)
    sc = _as_scenario(structure)
    if sc is None:
        raise InputError("optimize needs a correlation-scenario graph")
    f = parse_polynomial(read_text(args.polynomial), args.polynomial)
    if tuple(n for n, _ in f.variables) != sc.observed:
        raise InputError(f"polynomial declared over {f.variables}, graph has {sc.variables}")
    res = engine.optimize(sc, f, args.order, budget=args.budget, tol=args.tolerance)
    # sampled compatible models give an upper bound on the true minimum
    rng = np.random.default_rng(args.seed)
    sampled = min((f(engine.sample_compatible(sc, rng)) for _ in range(args.samples)),
                  default=None)
    if sampled is not None and res.lower_bound > sampled + args.tolerance:
        log.error("lower bound %.12g exceeds a sampled value %.12g", res.lower_bound, sampled)
    doc = {"lower_bound": res.lower_bound, "order": res.order, "degree": res.degree,
           "argmin_marginal": [float(x) for x in res.argmin_marginal.reshape(-1)],
           "sampled_upper_bound": sampled, "seed": args.seed,
           "timing_seconds": time.perf_counter() - t0}
    _emit(doc, args.out)
    return EXIT_OK


def cmd_unpack(args) -> int:
    structure = parse_graph(read_text(args.graph), args.graph)
    out = []
    for dist in districts(exogenize(structure)):
        unpacked, emap = unpack(dist)
        out.append({
            "members": list(dist.endogenous),
            "conditioning": list(dist.exogenous),
            "scenario": scenario_document(unpacked.scenario),
            "event_map": [{"event": emap.event_name(spec),
                           "given": dict(zip((x for x, _ in emap.exogenous), spec.given)),
                           "outcome": dict(zip((a for a, _ in emap.endogenous), spec.outcome)),
                           "pinned": {emap.unpacked_names[k]: v for k, v in spec.pinned}}
                          for spec in emap.entries],
        })
    _emit({"districts": out}, args.out)
    return EXIT_OK


def cmd_compile_lp(args) -> int:
    structure = parse_graph(read_text(args.graph), args.graph)
    sc = _as_scenario(structure)
    if sc is not None:
        problem = build_inflation(sc, args.order)
        if args.events:
            data = parse_events(read_text(args.data), args.data)
            cons = event_constraints(problem, data, budget=args.budget)
        else:
            data = _reorder(parse_distribution(read_text(args.data), args.data), sc.variables)
            cons = diagonal_constraints(problem, data, budget=args.budget)
    else:
        prepared = engine.prepare_structure(
            structure, _conditional_input(parse_distribution(read_text(args.data), args.data),
                                          structure))
        if len(prepared) != 1:
            raise InputError(f"graph has {len(prepared)} districts; compile-lp handles one")
        _, dsc, data = prepared[0]
        problem = build_inflation(dsc, args.order)
        if isinstance(data, EventTable):
            cons = event_constraints(problem, data, budget=args.budget)
        else:
            cons = diagonal_constraints(problem, data, budget=args.budget)
    text = export_lp(cons.feasibility_lp())
    if args.out:
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify_witness(args) -> int:
    try:
        doc = json.loads(read_text(args.verdict))
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.verdict}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    entries = doc.get("districts") if isinstance(doc, dict) else None
    if not entries:
        raise InputError(f"{args.verdict}: not a verdict document")
    reports = []
    ok = True
    for e in entries:
        if e.get("witness") is None:
            continue
        w = parse_witness(e["witness"])
        sc = scenario_from_document(e["scenario"])
        rep = engine.verify_witness(w, sc, samples=args.samples, seed=args.seed,
                                    latent_card=args.latent_card)
        ok = ok and rep.passed
        reports.append({"members": e.get("members"), "min_value": rep.min_value,
                        "samples": rep.samples, "passed": rep.passed,
                        "value_at_input": w.value_at_input})
    _emit({"seed": args.seed, "witnesses": reports, "passed": ok}, args.out)
    return EXIT_OK if ok else EXIT_WITNESS_FAILED


# ---------------------------------------------------------------- parser

def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inflation-hierarchy",
        description="Causal compatibility, optimization and LP export via the inflation hierarchy.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, order=True):
        if order:
            p.add_argument("--order", type=_positive_int, default=2,
                           help="inflation order n (default 2)")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled diagnostics")
        p.add_argument("--tolerance", type=float, default=FEAS_TOL,
                       help="LP feasibility tolerance (default 1e-7)")
        p.add_argument("--budget", type=_positive_int, default=None,
                       help=f"raw assignment budget (default {default_budget()}, "
                            "or $INFLATION_BUDGET)")
        p.add_argument("--out", default=None, help="write the output document here")
        p.add_argument("--samples", type=int, default=20,
                       help="compatible samples for runtime cross-checks")

    p = sub.add_parser("check", help="test a distribution or event table for compatibility")
    p.add_argument("graph")
    p.add_argument("data", help="distribution document, or events document with --events")
    p.add_argument("--events", action="store_true", help="DATA is an events document")
    p.add_argument("--distance", action="store_true",
                   help="also report a Euclidean distance lower bound")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("optimize", help="lower-bound a polynomial over compatible distributions")
    p.add_argument("graph")
    p.add_argument("polynomial")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("unpack", help="show the unpacked correlation scenario and event map")
    p.add_argument("graph")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_unpack)

    p = sub.add_parser("compile-lp", help="export the feasibility LP")
    p.add_argument("graph")
    p.add_argument("data")
    p.add_argument("--events", action="store_true", help="DATA is an events document")
    common(p)
    p.set_defaults(func=cmd_compile_lp)

    p = sub.add_parser("verify-witness", help="re-check witnesses of a verdict document")
    p.add_argument("verdict")
    p.add_argument("--latent-card", type=_positive_int, default=4)
    common(p, order=False)
    p.set_defaults(func=cmd_verify_witness, samples=100)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BudgetExceeded, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

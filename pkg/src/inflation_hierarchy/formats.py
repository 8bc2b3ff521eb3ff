"""YAML input documents and JSON output documents.

Input documents (graph, distribution, events, polynomial) are YAML so they can
be written by hand; every parse failure becomes an :class:`InputError` that
names the offending line and column. Output documents are JSON.

Graph::

    nodes:
      - {name: A, kind: observed, card: 2}
      - {name: a, kind: latent}
    edges:
      - [a, A]

Distribution (``table`` is flat, row-major over ``given`` then ``variables``)::

    variables: [[A, 2], [B, 2]]
    given: [[X, 2]]          # optional
    table: [0.5, 0, 0, 0.5, ...]

Events::

    variables: [[A, 2], [B, 2]]
    events:
      - {name: same, probability: 0.5, outcomes: [[0, 0], [1, 1]]}

Polynomial (either dense ``coefficients`` or sparse ``terms``)::

    variables: [[A, 2]]
    degree: 2
    terms:
      - {coefficient: -1, monomial: [[0], [1]]}
"""

from __future__ import annotations

import json

import numpy as np
import yaml

from .errors import InputError
from .lpcore import Witness
from .model import (CausalStructure, Distribution, Event, EventTable, Node, Polynomial,
                    validate)


class _Marked:
    mark = None


class MarkedDict(dict, _Marked):
    pass


class MarkedList(list, _Marked):
    pass


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    out = MarkedDict(loader.construct_mapping(node, deep=True))
    out.mark = node.start_mark
    return out


def _construct_sequence(loader, node):
    out = MarkedList(loader.construct_sequence(node, deep=True))
    out.mark = node.start_mark
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)
_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG, _construct_sequence)


def _where(obj, source: str) -> str:
    mark = getattr(obj, "mark", None)
    if mark is None:
        return source
    return f"{source}:{mark.line + 1}:{mark.column + 1}"


def _fail(obj, source: str, msg: str):
    raise InputError(f"{_where(obj, source)}: {msg}")


def load_yaml(text: str, source: str = "<input>"):
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        pos = f":{mark.line + 1}:{mark.column + 1}" if mark is not None else ""
        raise InputError(f"{source}{pos}: YAML syntax error: {exc.problem or exc}") from None
    except yaml.YAMLError as exc:
        raise InputError(f"{source}: YAML error: {exc}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{source}:1:1: expected a mapping at top level")
    return doc


def read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: cannot read file ({exc.strerror})") from None


def _require(doc, key: str, source: str, kind=None):
    if key not in doc:
        _fail(doc, source, f"missing required key {key!r}")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        _fail(val if hasattr(val, "mark") else doc, source,
              f"{key!r} must be a {'list' if kind is list else 'mapping'}")
    return val


def _int(val, where, source: str, what: str) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        _fail(where, source, f"{what} must be an integer, got {val!r}")
    return val


def _number(val, where, source: str, what: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(where, source, f"{what} must be a number, got {val!r}")
    return float(val)


# ---------------------------------------------------------------- graph

def parse_graph(text: str, source: str = "<graph>") -> CausalStructure:
    doc = load_yaml(text, source)
    nodes = []
    for nd in _require(doc, "nodes", source, list):
        if isinstance(nd, dict):
            name = _require(nd, "name", source)
            kind = _require(nd, "kind", source)
            card = nd.get("card")
        elif isinstance(nd, list) and len(nd) in (2, 3):
            name, kind, card = (list(nd) + [None])[:3]
        else:
            _fail(nd if hasattr(nd, "mark") else doc["nodes"], source,
                  "node must be a mapping {name, kind, card} or a list [name, kind, card]")
        if card is not None:
            card = _int(card, nd, source, "card")
        nodes.append(Node(str(name), str(kind), card))
    edges = []
    for e in doc.get("edges") or []:
        if not (isinstance(e, list) and len(e) == 2) and not (isinstance(e, dict) and {"from", "to"} <= set(e)):
            _fail(e if hasattr(e, "mark") else doc["edges"], source,
                  "edge must be [from, to] or {from, to}")
        a, b = (e["from"], e["to"]) if isinstance(e, dict) else e
        edges.append((str(a), str(b)))
    structure = CausalStructure(tuple(nodes), tuple(edges))
    report = validate(structure)
    if not report.ok:
        _fail(doc, source, "invalid graph: " + "; ".join(report.violations))
    return structure


def emit_graph(structure: CausalStructure) -> str:
    doc = {"nodes": [{"name": n.name, "kind": n.kind, **({"card": n.card} if n.card else {})}
                     for n in structure.nodes],
           "edges": [[a, b] for a, b in structure.edges]}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------- tables

def _parse_vars(items, doc, source: str, key: str):
    out = []
    for it in items:
        if isinstance(it, dict):
            name, card = _require(it, "name", source), _require(it, "card", source)
        elif isinstance(it, list) and len(it) == 2:
            name, card = it
        else:
            _fail(it if hasattr(it, "mark") else doc, source,
                  f"entries of {key!r} must be [name, card] or {{name, card}}")
        out.append((str(name), _int(card, it, source, "card")))
    return tuple(out)


def _flat_numbers(vals, source: str, what: str) -> np.ndarray:
    out = []
    for v in vals:
        out.append(_number(v, vals, source, f"entry of {what!r}"))
    return np.array(out, dtype=float)


def parse_distribution(text: str, source: str = "<distribution>") -> Distribution:
    doc = load_yaml(text, source)
    variables = _parse_vars(_require(doc, "variables", source, list), doc, source, "variables")
    given = _parse_vars(doc.get("given") or [], doc, source, "given")
    table = _flat_numbers(_require(doc, "table", source, list), source, "table")
    try:
        return Distribution(variables, table, given)
    except InputError as exc:
        _fail(doc["table"], source, str(exc))


def emit_distribution(p: Distribution) -> str:
    doc = {"variables": [[n, c] for n, c in p.variables]}
    if p.given:
        doc["given"] = [[n, c] for n, c in p.given]
    doc["table"] = [float(x) for x in np.asarray(p.table).reshape(-1)]
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def parse_events(text: str, source: str = "<events>") -> EventTable:
    doc = load_yaml(text, source)
    variables = _parse_vars(_require(doc, "variables", source, list), doc, source, "variables")
    events = []
    for ev in _require(doc, "events", source, list):
        if not isinstance(ev, dict):
            _fail(doc["events"], source, "event must be a mapping {name, probability, outcomes}")
        outs = _require(ev, "outcomes", source, list)
        for o in outs:
            if not isinstance(o, list):
                _fail(outs, source, "each outcome must be a list of values")
        events.append(Event(str(_require(ev, "name", source)),
                            frozenset(tuple(_int(v, o, source, "outcome value") for v in o)
                                      for o in outs),
                            _number(_require(ev, "probability", source), ev, source, "probability")))
    try:
        return EventTable(variables, tuple(events))
    except InputError as exc:
        _fail(doc["events"], source, str(exc))


def emit_events(table: EventTable) -> str:
    doc = {"variables": [[n, c] for n, c in table.variables],
           "events": [{"name": e.name, "probability": float(e.probability),
                       "outcomes": [list(o) for o in sorted(e.outcomes)]} for e in table.events]}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def parse_polynomial(text: str, source: str = "<polynomial>") -> Polynomial:
    doc = load_yaml(text, source)
    variables = _parse_vars(_require(doc, "variables", source, list), doc, source, "variables")
    degree = _int(_require(doc, "degree", source), doc, source, "degree")
    try:
        if "coefficients" in doc:
            coeffs = _flat_numbers(_require(doc, "coefficients", source, list), source, "coefficients")
            return Polynomial(variables, degree, coeffs).symmetrized()
        terms = []
        for t in _require(doc, "terms", source, list):
            if not isinstance(t, dict):
                _fail(doc["terms"], source, "term must be a mapping {coefficient, monomial}")
            mono = t.get("monomial") or []
            terms.append((_number(_require(t, "coefficient", source), t, source, "coefficient"),
                          [tuple(o) for o in mono]))
        return Polynomial.from_terms(variables, degree, terms)
    except InputError as exc:
        if str(exc).startswith(source):
            raise
        _fail(doc, source, str(exc))


def emit_polynomial(f: Polynomial) -> str:
    doc = {"variables": [[n, c] for n, c in f.variables], "degree": f.degree,
           "coefficients": [float(x) for x in f.coefficients.reshape(-1)]}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------- outputs

def witness_document(w: Witness) -> dict:
    """Sparse witness: nonzero coefficients with decoded labels."""
    nz = np.flatnonzero(w.coefficients)
    doc = {
        "degree": w.degree,
        "basis": w.basis,
        "outcome_cards": list(w.outcome_cards),
        "offset": float(w.offset),
        "certified_floor": float(w.certified_floor),
        "certified_max": float(w.certified_max),
        "value_at_input": float(w.value_at_input),
        "size": int(len(w.coefficients)),
        "coefficients": [{"index": int(i), "label": _label_json(w.label(int(i))),
                          "value": float(w.coefficients[i])} for i in nz],
    }
    if w.basis == "events":
        doc["events"] = [{"name": name, "outcomes": np.flatnonzero(row).tolist()}
                         for name, row in zip(w.event_names, w.event_indicator)]
    return doc


def _label_json(label):
    return [list(x) if isinstance(x, tuple) else x for x in label]


def parse_witness(doc: dict) -> Witness:
    try:
        cards = tuple(int(c) for c in doc["outcome_cards"])
        coeffs = np.zeros(int(doc["size"]))
        for entry in doc["coefficients"]:
            coeffs[int(entry["index"])] = float(entry["value"])
        names, indicator = (), None
        if doc["basis"] == "events":
            D = int(np.prod(cards))
            names = tuple(e["name"] for e in doc["events"])
            indicator = np.zeros((len(names), D))
            for r, e in enumerate(doc["events"]):
                indicator[r, e["outcomes"]] = 1.0
        return Witness(coeffs, int(doc["degree"]), str(doc["basis"]), cards,
                       float(doc["value_at_input"]), float(doc["certified_floor"]),
                       float(doc["certified_max"]), float(doc.get("offset", 0.0)), names,
                       indicator)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed witness document: {exc!r}") from None


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"

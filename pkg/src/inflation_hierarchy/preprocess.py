"""Graph rewrites reducing general causal structures to correlation scenarios.

Pipeline order is fixed: exogenize, split into districts, then unpack each
district. Unpacking turns every endogenous observed variable into one
counterfactual variable per joint value of its observable parents; the
original (conditional) distribution is then a table of measurable events over
the unpacked scenario.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import (EXOGENOUS, LATENT, OBSERVED, CausalStructure, CorrelationScenario,
                    Distribution, Event, EventTable, Node, validate)


def _require_valid(structure: CausalStructure) -> None:
    report = validate(structure)
    if not report.ok:
        raise InputError("invalid structure: " + "; ".join(report.violations))


def exogenize(structure: CausalStructure) -> CausalStructure:
    """Make every latent a root by wiring its parents straight to its children.

    Latents are processed in declaration order until a fixed point; the
    observed subgraph only ever gains edges.
    """
    _require_valid(structure)
    edges = list(structure.edges)
    while True:
        current = structure.with_edges(edges)
        endo_latent = [u for u in current.latents if current.parents(u)]
        if not endo_latent:
            return current
        u = endo_latent[0]
        pas, chs = current.parents(u), current.children(u)
        edges = [(a, b) for a, b in edges if b != u]
        for p in pas:
            for c in chs:
                if (p, c) not in edges:
                    edges.append((p, c))


def correlation_skeleton(structure: CausalStructure) -> CausalStructure:
    """Drop every edge leaving an observable (endogenous or exogenous) node."""
    return structure.with_edges((a, b) for a, b in structure.edges
                                if structure.node(a).kind == LATENT)


def _components(structure: CausalStructure) -> list[list[str]]:
    skel = correlation_skeleton(structure)
    names = [nd.name for nd in structure.nodes if nd.kind != EXOGENOUS]
    adj = {v: set() for v in names}
    for a, b in skel.edges:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    seen: set[str] = set()
    comps = []
    for v in names:
        if v in seen:
            continue
        comp, frontier = {v}, [v]
        while frontier:
            w = frontier.pop()
            for z in adj[w] - comp:
                comp.add(z)
                frontier.append(z)
        seen |= comp
        if any(structure.node(z).kind == OBSERVED for z in comp):
            comps.append([nd.name for nd in structure.nodes if nd.name in comp])
    return comps


def districts(structure: CausalStructure) -> list[CausalStructure]:
    """Split an exogenized structure into its districts.

    Each district keeps its latents and endogenous observed nodes with the
    induced edges. Observable parents lying outside the district (exogenous
    nodes, or observed nodes of other districts) are attached as exogenous
    conditioning nodes with their edges into the district.
    """
    _require_valid(structure)
    if any(structure.parents(u) for u in structure.latents):
        raise InputError("districts() expects an exogenized structure; call exogenize first")
    out = []
    for comp in _components(structure):
        members = set(comp)
        cond = {a for a, b in structure.edges
                if b in members and a not in members and structure.is_observable(a)}
        nodes = []
        for nd in structure.nodes:
            if nd.name in members:
                nodes.append(nd)
            elif nd.name in cond:
                nodes.append(Node(nd.name, EXOGENOUS, nd.card))
        edges = [(a, b) for a, b in structure.edges if b in members and (a in members or a in cond)]
        out.append(CausalStructure(tuple(nodes), tuple(edges)))
    return out


@dataclass(frozen=True)
class UnpackedScenario:
    """Correlation scenario over counterfactual variables.

    ``origin_map[k]`` is ``(original variable, ((parent, value), ...))`` for the
    k-th observed variable of ``scenario``.
    """

    scenario: CorrelationScenario
    origin_map: tuple[tuple[str, tuple[tuple[str, int], ...]], ...]


@dataclass(frozen=True)
class EventSpec:
    given: tuple[int, ...]
    outcome: tuple[int, ...]
    pinned: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class EventMap:
    """For every ``(exogenous values, endogenous values)`` of the original
    structure, the unpacked coordinates it pins and to which values.

    Entries are ordered row-major over ``exogenous + endogenous``, matching the
    layout of a conditional :class:`Distribution`.
    """

    endogenous: tuple[tuple[str, int], ...]
    exogenous: tuple[tuple[str, int], ...]
    unpacked_names: tuple[str, ...]
    unpacked_cards: tuple[int, ...]
    entries: tuple[EventSpec, ...]

    def outcome_set(self, spec: EventSpec) -> frozenset:
        pinned = dict(spec.pinned)
        ranges = [(pinned[k],) if k in pinned else range(d)
                  for k, d in enumerate(self.unpacked_cards)]
        return frozenset(itertools.product(*ranges))

    def event_name(self, spec: EventSpec) -> str:
        out = ",".join(f"{n}={v}" for (n, _), v in zip(self.endogenous, spec.outcome))
        if not self.exogenous:
            return out
        cond = ",".join(f"{n}={v}" for (n, _), v in zip(self.exogenous, spec.given))
        return f"{out}|{cond}"


def _cf_name(var: str, assignment) -> str:
    if not assignment:
        return var
    return var + "^{" + ",".join(f"{p}={v}" for p, v in assignment) + "}"


def unpack(structure: CausalStructure) -> tuple[UnpackedScenario, EventMap]:
    """Unpack a single-district exogenized structure into a correlation scenario."""
    _require_valid(structure)
    if any(structure.parents(u) for u in structure.latents):
        raise InputError("unpack() expects an exogenized structure; call exogenize first")
    if len(_components(structure)) > 1:
        raise InputError("structure has several districts; call districts() and unpack each")

    latents = [u for u in structure.latents if structure.children(u)]
    names, cards, parent_sets, origin = [], [], [], []
    cf_index: dict[tuple[str, tuple], int] = {}
    for a in structure.endogenous:
        obs_pa = [p for p in structure.parents(a) if structure.is_observable(p)]
        lat_pa = [p for p in structure.parents(a) if not structure.is_observable(p)]
        if not lat_pa:
            priv = f"U[{a}]"
            latents.append(priv)
            lat_pa = [priv]
        for values in itertools.product(*(range(structure.card(p)) for p in obs_pa)):
            assignment = tuple(zip(obs_pa, values))
            cf_index[(a, assignment)] = len(names)
            names.append(_cf_name(a, assignment))
            cards.append(structure.card(a))
            parent_sets.append(tuple(latents.index(u) for u in lat_pa))
            origin.append((a, assignment))
    scenario = CorrelationScenario(tuple(latents), tuple(names), tuple(cards), tuple(parent_sets))

    endo = tuple((a, structure.card(a)) for a in structure.endogenous)
    exo = tuple((x, structure.card(x)) for x in structure.exogenous)
    entries = []
    for given in itertools.product(*(range(c) for _, c in exo)):
        for outcome in itertools.product(*(range(c) for _, c in endo)):
            values = dict(zip((x for x, _ in exo), given))
            values.update(zip((a for a, _ in endo), outcome))
            pinned = []
            for a, val in zip((a for a, _ in endo), outcome):
                obs_pa = [p for p in structure.parents(a) if structure.is_observable(p)]
                key = (a, tuple((p, values[p]) for p in obs_pa))
                pinned.append((cf_index[key], val))
            entries.append(EventSpec(tuple(given), tuple(outcome), tuple(sorted(pinned))))
    emap = EventMap(endo, exo, tuple(names), tuple(cards), tuple(entries))
    return UnpackedScenario(scenario, tuple(origin)), emap


def map_distribution(p: Distribution, emap: EventMap) -> EventTable:
    """Pair each unpacked event with the original probability P(a | x)."""
    if p.variables != emap.endogenous or p.given != emap.exogenous:
        raise InputError(f"distribution signature {p.variables} | {p.given} does not match "
                         f"{emap.endogenous} | {emap.exogenous}")
    events = [Event(emap.event_name(spec), emap.outcome_set(spec),
                    float(p.table[spec.given + spec.outcome]))
              for spec in emap.entries]
    return EventTable(tuple(zip(emap.unpacked_names, emap.unpacked_cards)), tuple(events))


def condition_on(p: Distribution, names, tol: float = 1e-9) -> tuple[Distribution, bool]:
    """Turn a joint table into one conditional on ``names``.

    Returns the conditional distribution and whether the conditioning
    variables are mutually independent within ``tol``. Conditioning values of
    zero probability get a uniform conditional.
    """
    if p.is_conditional:
        raise InputError("condition_on() expects a joint table")
    names = list(names)
    missing = [n for n in names if n not in p.names]
    if missing:
        raise InputError(f"unknown conditioning variables {missing}")
    rest = [n for n in p.names if n not in names]
    order = [p.names.index(n) for n in names + rest]
    tab = np.transpose(p.table, order)
    k = len(names)
    marg = tab.sum(axis=tuple(range(k, tab.ndim)))
    indep = True
    if k > 1:
        prod = np.ones(())
        for i in range(k):
            m_i = marg.sum(axis=tuple(j for j in range(k) if j != i))
            prod = np.multiply.outer(prod, m_i)
        indep = bool(np.max(np.abs(prod - marg)) <= tol)
    rest_shape = tab.shape[k:]
    flat = tab.reshape(marg.size, -1)
    m = marg.reshape(-1)
    cond = np.empty_like(flat)
    for i in range(marg.size):
        cond[i] = flat[i] / m[i] if m[i] > 0 else 1.0 / flat.shape[1]
    card = dict(p.variables)
    return (Distribution(tuple((n, card[n]) for n in rest), cond.reshape(marg.shape + rest_shape),
                         tuple((n, card[n]) for n in names)), indep)


def district_kernel(p: Distribution, structure: CausalStructure, district: CausalStructure,
                    tol: float = 1e-7) -> Distribution:
    """Identified kernel of ``district`` from an observed conditional distribution.

    Uses the product of topological-order conditionals over the district's
    endogenous nodes. The result must depend only on the district's
    conditioning nodes; otherwise the distribution does not factorize over
    districts and an :class:`InputError` is raised.
    """
    endo = structure.endogenous
    exo = structure.exogenous
    if p.names != endo or tuple(n for n, _ in p.given) != exo:
        raise InputError("distribution signature does not match the structure")
    if len(_components(structure)) == 1:
        return p
    order = [v for v in structure.topological_order() if v in endo]
    members = [v for v in endo if v in district.endogenous]
    cond = list(district.exogenous)
    axes = list(exo) + list(endo)
    full = np.asarray(p.table)
    kernel = np.ones(full.shape)
    for v in members:
        pred = order[:order.index(v)]
        keep = set(exo) | set(pred) | {v}
        drop = tuple(i for i, n in enumerate(axes) if n not in keep)
        joint = full.sum(axis=drop, keepdims=True)
        base = joint.sum(axis=axes.index(v), keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(base > 0, joint / np.where(base > 0, base, 1), 1.0 / structure.card(v))
        kernel = kernel * ratio
    # weights over the nuisance coordinates (everything outside members + cond)
    nuisance = [i for i, n in enumerate(axes) if n not in members and n not in cond]
    wsum = full.sum(axis=tuple(i for i, n in enumerate(axes) if n in members), keepdims=True)
    tot = wsum.sum(axis=tuple(nuisance), keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(tot > 0, wsum / np.where(tot > 0, tot, 1), 0.0)
    avg = (kernel * w).sum(axis=tuple(nuisance), keepdims=True)
    # conditioning values never observed: fall back to the unweighted mean
    avg = np.where(tot > 0, avg, kernel.mean(axis=tuple(nuisance), keepdims=True))
    support = np.broadcast_to(wsum > 0, kernel.shape)
    if np.any(np.abs(kernel - avg)[support] > tol):
        raise InputError(f"distribution does not factorize over districts: kernel of "
                         f"{members} depends on variables outside its parents")
    avg = avg.squeeze(axis=tuple(nuisance))
    remaining = [n for n in axes if n in members or n in cond]
    target = cond + members
    avg = np.transpose(avg, [remaining.index(n) for n in target])
    card = {n: c for n, c in p.given + p.variables}
    return Distribution(tuple((n, card[n]) for n in members), avg,
                        tuple((n, card[n]) for n in cond))

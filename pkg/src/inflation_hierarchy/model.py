"""Core data types: causal structures, correlation scenarios, probability tables,
measurable events and polynomials in the probabilities.

Dense tables are always row-major over the declared variable order, with any
conditioning variables as the leading axes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

LATENT = "latent"
OBSERVED = "observed"
EXOGENOUS = "exogenous"
KINDS = (LATENT, OBSERVED, EXOGENOUS)

NORMALIZATION_TOL = 1e-9


def _frozen(array) -> np.ndarray:
    arr = np.array(array, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Node:
    name: str
    kind: str
    card: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class CausalStructure:
    """A DAG over latent, observed and exogenous-observed nodes.

    Construction never raises; call :func:`validate` for a violation report.
    Latent nodes carry no cardinality, the inflation LPs never need one.
    """

    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...] = ()

    @classmethod
    def build(cls, nodes: Iterable, edges: Iterable = ()) -> "CausalStructure":
        """Shorthand constructor taking ``(name, kind[, card])`` tuples."""
        built = []
        for nd in nodes:
            built.append(nd if isinstance(nd, Node) else Node(*nd))
        return cls(tuple(built), tuple((str(a), str(b)) for a, b in edges))

    @cached_property
    def _by_name(self) -> dict[str, Node]:
        return {nd.name: nd for nd in self.nodes}

    def node(self, name: str) -> Node:
        return self._by_name[name]

    def names(self, *kinds: str) -> tuple[str, ...]:
        return tuple(nd.name for nd in self.nodes if not kinds or nd.kind in kinds)

    @property
    def latents(self) -> tuple[str, ...]:
        return self.names(LATENT)

    @property
    def endogenous(self) -> tuple[str, ...]:
        return self.names(OBSERVED)

    @property
    def exogenous(self) -> tuple[str, ...]:
        return self.names(EXOGENOUS)

    @property
    def observable(self) -> tuple[str, ...]:
        return self.names(OBSERVED, EXOGENOUS)

    def is_observable(self, name: str) -> bool:
        return self._by_name[name].kind != LATENT

    def parents(self, name: str) -> tuple[str, ...]:
        # declaration order, not edge order
        pas = {a for a, b in self.edges if b == name}
        return tuple(nd.name for nd in self.nodes if nd.name in pas)

    def children(self, name: str) -> tuple[str, ...]:
        chs = {b for a, b in self.edges if a == name}
        return tuple(nd.name for nd in self.nodes if nd.name in chs)

    def card(self, name: str) -> int:
        return self._by_name[name].card

    def with_edges(self, edges: Iterable[tuple[str, str]]) -> "CausalStructure":
        seen = []
        for e in edges:
            if e not in seen:
                seen.append(e)
        return CausalStructure(self.nodes, tuple(seen))

    def subgraph(self, names: Iterable[str]) -> "CausalStructure":
        keep = set(names)
        nodes = tuple(nd for nd in self.nodes if nd.name in keep)
        edges = tuple((a, b) for a, b in self.edges if a in keep and b in keep)
        return CausalStructure(nodes, edges)

    def topological_order(self) -> tuple[str, ...]:
        """Kahn's algorithm, ties broken by declaration order."""
        indeg = {nd.name: 0 for nd in self.nodes}
        for _, b in self.edges:
            indeg[b] += 1
        order = []
        ready = [nd.name for nd in self.nodes if indeg[nd.name] == 0]
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in self.children(v):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort(key=[nd.name for nd in self.nodes].index)
        if len(order) != len(self.nodes):
            raise InputError("structure contains a directed cycle")
        return tuple(order)

    def is_correlation_scenario(self) -> bool:
        """Two layers only: latent roots feeding observed leaves, no exogenous nodes."""
        if self.exogenous:
            return False
        for a, b in self.edges:
            if self.node(a).kind != LATENT or self.node(b).kind != OBSERVED:
                return False
        return True


def _find_cycle(names: Sequence[str], edges: Sequence[tuple[str, str]]) -> list[str] | None:
    adj = {v: [] for v in names}
    for a, b in edges:
        if a in adj and b in adj:
            adj[a].append(b)
    color = dict.fromkeys(names, 0)
    stack_path: list[str] = []

    def visit(v):
        color[v] = 1
        stack_path.append(v)
        for w in adj[v]:
            if color[w] == 1:
                return stack_path[stack_path.index(w):] + [w]
            if color[w] == 0:
                found = visit(w)
                if found:
                    return found
        stack_path.pop()
        color[v] = 2
        return None

    for v in names:
        if color[v] == 0:
            found = visit(v)
            if found:
                return found
    return None


def validate(structure: CausalStructure) -> ValidationReport:
    """List every invariant violation of ``structure``; empty iff well formed."""
    problems = []
    seen = set()
    for nd in structure.nodes:
        if nd.name in seen:
            problems.append(f"duplicate node name {nd.name!r}")
        seen.add(nd.name)
        if nd.kind not in KINDS:
            problems.append(f"node {nd.name!r} has unknown kind {nd.kind!r}")
        elif nd.kind == LATENT:
            if nd.card is not None:
                problems.append(f"latent node {nd.name!r} must not declare a cardinality")
        elif not isinstance(nd.card, (int, np.integer)) or isinstance(nd.card, bool) or nd.card < 1:
            problems.append(f"observed node {nd.name!r} needs a positive integer cardinality")
    kinds = {nd.name: nd.kind for nd in structure.nodes}
    for a, b in structure.edges:
        for end in (a, b):
            if end not in kinds:
                problems.append(f"edge ({a!r}, {b!r}) names unknown node {end!r}")
        if a == b:
            problems.append(f"self-loop on {a!r}")
        if kinds.get(b) == EXOGENOUS:
            problems.append(f"exogenous node {b!r} has parent {a!r}")
    if len(set(structure.edges)) != len(structure.edges):
        problems.append("duplicate edges")
    cycle = _find_cycle([nd.name for nd in structure.nodes],
                        [(a, b) for a, b in structure.edges if a != b])
    if cycle:
        problems.append("directed cycle " + " -> ".join(cycle))
    return ValidationReport(tuple(problems))


@dataclass(frozen=True)
class CorrelationScenario:
    """Independent latent roots ``latents`` feeding observed leaves.

    ``parent_sets[x]`` holds the (sorted, 0-based) indices of the latents that
    observed variable ``x`` depends on.
    """

    latents: tuple[str, ...]
    observed: tuple[str, ...]
    cards: tuple[int, ...]
    parent_sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "latents", tuple(self.latents))
        object.__setattr__(self, "observed", tuple(self.observed))
        object.__setattr__(self, "cards", tuple(int(c) for c in self.cards))
        object.__setattr__(self, "parent_sets",
                           tuple(tuple(sorted(int(j) for j in ps)) for ps in self.parent_sets))
        m = len(self.observed)
        if len(self.cards) != m or len(self.parent_sets) != m:
            raise InputError("observed, cards and parent_sets must have equal length")
        if any(c < 1 for c in self.cards):
            raise InputError("cardinalities must be positive")
        used = set()
        for name, ps in zip(self.observed, self.parent_sets):
            if not ps:
                raise InputError(f"observed variable {name!r} has no latent parent")
            if any(j < 0 or j >= len(self.latents) for j in ps):
                raise InputError(f"parent set of {name!r} references an unknown latent")
            used.update(ps)
        orphans = [self.latents[j] for j in range(len(self.latents)) if j not in used]
        if orphans:
            raise InputError(f"latent(s) {orphans} have no observed child")

    @classmethod
    def from_parents(cls, observed: Sequence[tuple[str, int, Sequence[str]]]) -> "CorrelationScenario":
        """Build from ``(name, card, latent parent names)`` triples; latents ordered by first use."""
        latents: list[str] = []
        for _, _, pas in observed:
            for u in pas:
                if u not in latents:
                    latents.append(u)
        return cls(tuple(latents), tuple(o[0] for o in observed), tuple(o[1] for o in observed),
                   tuple(tuple(latents.index(u) for u in o[2]) for o in observed))

    @classmethod
    def from_structure(cls, structure: CausalStructure) -> "CorrelationScenario":
        """Read a two-layer structure as a scenario.

        Observed nodes with no latent parent get a private latent named
        ``U[<name>]``; latents with no children are dropped.
        """
        if not validate(structure).ok:
            raise InputError("; ".join(validate(structure).violations))
        if not structure.is_correlation_scenario():
            raise InputError("structure is not a correlation scenario "
                             "(needs latent roots feeding observed leaves only)")
        latents = [u for u in structure.latents if structure.children(u)]
        triples = []
        for a in structure.endogenous:
            pas = list(structure.parents(a))
            if not pas:
                priv = f"U[{a}]"
                latents.append(priv)
                pas = [priv]
            triples.append((a, structure.card(a), pas))
        return cls(tuple(latents), tuple(t[0] for t in triples), tuple(t[1] for t in triples),
                   tuple(tuple(latents.index(u) for u in t[2]) for t in triples))

    def to_structure(self) -> CausalStructure:
        nodes = [Node(u, LATENT) for u in self.latents]
        nodes += [Node(a, OBSERVED, d) for a, d in zip(self.observed, self.cards)]
        edges = [(self.latents[j], a) for a, ps in zip(self.observed, self.parent_sets) for j in ps]
        return CausalStructure(tuple(nodes), tuple(edges))

    @property
    def n_latents(self) -> int:
        return len(self.latents)

    @property
    def n_observed(self) -> int:
        return len(self.observed)

    @property
    def outcome_count(self) -> int:
        return int(np.prod(self.cards, dtype=np.int64))

    @property
    def variables(self) -> tuple[tuple[str, int], ...]:
        return tuple(zip(self.observed, self.cards))

    def outcomes(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(d) for d in self.cards)))

    def is_connected(self) -> bool:
        """Weak connectivity of the bipartite latent/observed graph (reported, not enforced)."""
        if not self.observed:
            return True
        reach = {0}
        frontier = [0]
        while frontier:
            x = frontier.pop()
            for y, ps in enumerate(self.parent_sets):
                if y not in reach and set(ps) & set(self.parent_sets[x]):
                    reach.add(y)
                    frontier.append(y)
        return len(reach) == self.n_observed


def _normalize_vars(variables) -> tuple[tuple[str, int], ...]:
    return tuple((str(n), int(c)) for n, c in variables)


@dataclass(frozen=True, eq=False)
class Distribution:
    """A dense (conditional) probability table.

    ``table`` has shape ``given cards + variable cards``; every slice at a
    fixed conditioning tuple is a normalized distribution.
    """

    variables: tuple[tuple[str, int], ...]
    table: np.ndarray
    given: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        variables = _normalize_vars(self.variables)
        given = _normalize_vars(self.given)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "given", given)
        shape = tuple(c for _, c in given) + tuple(c for _, c in variables)
        table = np.asarray(self.table, dtype=float)
        if table.size != int(np.prod(shape, dtype=np.int64)):
            raise InputError(f"table has {table.size} entries, expected {int(np.prod(shape))}")
        table = table.reshape(shape)
        if not np.all(np.isfinite(table)):
            raise InputError("table contains non-finite entries")
        if np.any(table < 0):
            raise InputError("table contains negative entries")
        sums = table.reshape(int(np.prod(shape[:len(given)], dtype=np.int64)), -1).sum(axis=1)
        bad = np.abs(sums - 1.0) > NORMALIZATION_TOL
        if np.any(bad):
            raise InputError(f"table is not normalized within {NORMALIZATION_TOL:g} "
                             f"(sums {sums[bad][:4].tolist()})")
        names = [n for n, _ in given + variables]
        if len(set(names)) != len(names):
            raise InputError("duplicate variable names in distribution")
        object.__setattr__(self, "table", _frozen(table))

    @property
    def is_conditional(self) -> bool:
        return bool(self.given)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.variables)

    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def marginal(self, names: Sequence[str]) -> "Distribution":
        if self.is_conditional:
            raise InputError("marginal() expects an unconditional distribution")
        axes = tuple(i for i, n in enumerate(self.names) if n not in names)
        keep = [n for n in self.names if n in names]
        tab = self.table.sum(axis=axes) if axes else self.table
        order = [keep.index(n) for n in names]
        return Distribution(tuple((n, dict(self.variables)[n]) for n in names),
                            np.transpose(tab, order))

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return (self.variables == other.variables and self.given == other.given
                and np.array_equal(self.table, other.table))

    __hash__ = None

    def __repr__(self):
        cond = f" | {self.given}" if self.given else ""
        return f"Distribution({self.variables}{cond})"


def lift(p: Distribution, g: int) -> Distribution:
    """Degree-``g`` lifting: the joint table of ``g`` independent copies of ``p``."""
    if p.is_conditional:
        raise InputError("lift() needs an unconditional distribution")
    if g < 1:
        raise InputError("lifting degree must be >= 1")
    if g == 1:
        return p
    tab = p.table
    out = tab
    for _ in range(g - 1):
        out = np.multiply.outer(out, tab)
    variables = tuple((f"{n}^{i + 1}", c) for i in range(g) for n, c in p.variables)
    return Distribution(variables, out)


@dataclass(frozen=True)
class Event:
    name: str
    outcomes: frozenset
    probability: float


@dataclass(frozen=True, eq=False)
class EventTable:
    """Probabilities of named measurable events over a joint outcome space."""

    variables: tuple[tuple[str, int], ...]
    events: tuple[Event, ...]

    def __post_init__(self):
        variables = _normalize_vars(self.variables)
        object.__setattr__(self, "variables", variables)
        cards = tuple(c for _, c in variables)
        evs = []
        for ev in self.events:
            outs = frozenset(tuple(int(v) for v in o) for o in ev.outcomes)
            if not outs:
                raise InputError(f"event {ev.name!r} has an empty outcome set")
            for o in outs:
                if len(o) != len(cards) or any(not 0 <= v < c for v, c in zip(o, cards)):
                    raise InputError(f"event {ev.name!r} has outcome {o} outside the outcome space")
            prob = float(ev.probability)
            if not (-NORMALIZATION_TOL <= prob <= 1 + NORMALIZATION_TOL):
                raise InputError(f"event {ev.name!r} probability {prob} outside [0, 1]")
            evs.append(Event(str(ev.name), outs, min(max(prob, 0.0), 1.0)))
        names = [e.name for e in evs]
        if len(set(names)) != len(names):
            raise InputError("duplicate event names")
        object.__setattr__(self, "events", tuple(evs))

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.events)

    def probabilities(self) -> np.ndarray:
        return np.array([e.probability for e in self.events])

    def indicator(self) -> np.ndarray:
        """``(n_events, outcome_count)`` 0/1 matrix in row-major outcome order."""
        cards = self.cards
        mat = np.zeros((len(self.events), int(np.prod(cards, dtype=np.int64))))
        for r, ev in enumerate(self.events):
            idx = [np.ravel_multi_index(o, cards) for o in ev.outcomes]
            mat[r, idx] = 1.0
        return mat

    def evaluate(self, p: Distribution) -> np.ndarray:
        """Probabilities that ``p`` assigns to each event."""
        if p.cards != self.cards:
            raise InputError("distribution does not match the event outcome space")
        return self.indicator() @ p.flat()

    def __eq__(self, other):
        if not isinstance(other, EventTable):
            return NotImplemented
        return self.variables == other.variables and self.events == other.events

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Polynomial:
    """A homogeneous degree-``degree`` polynomial F with F(P) = coefficients . P^(x)g."""

    variables: tuple[tuple[str, int], ...]
    degree: int
    coefficients: np.ndarray

    def __post_init__(self):
        variables = _normalize_vars(self.variables)
        object.__setattr__(self, "variables", variables)
        if self.degree < 1:
            raise InputError("polynomial degree must be >= 1")
        count = int(np.prod([c for _, c in variables], dtype=np.int64))
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.size != count ** self.degree:
            raise InputError(f"expected {count ** self.degree} coefficients, got {coeffs.size}")
        if not np.all(np.isfinite(coeffs)):
            raise InputError("non-finite polynomial coefficient")
        object.__setattr__(self, "coefficients", _frozen(coeffs.reshape((count,) * self.degree)))

    @property
    def outcome_count(self) -> int:
        return self.coefficients.shape[0]

    @classmethod
    def from_terms(cls, variables, degree: int,
                   terms: Iterable[tuple[float, Sequence[Sequence[int]]]]) -> "Polynomial":
        """Build from ``(coefficient, [outcome tuple, ...])`` monomials.

        Monomials with fewer than ``degree`` factors (including constants) are
        homogenized by multiplying with the total probability, which is 1.
        """
        variables = _normalize_vars(variables)
        cards = tuple(c for _, c in variables)
        count = int(np.prod(cards, dtype=np.int64))
        coeffs = np.zeros((count,) * degree)
        for coef, outs in terms:
            outs = list(outs)
            if len(outs) > degree:
                raise InputError(f"monomial of degree {len(outs)} exceeds declared degree {degree}")
            idx = []
            for o in outs:
                o = tuple(int(v) for v in o)
                if len(o) != len(cards) or any(not 0 <= v < c for v, c in zip(o, cards)):
                    raise InputError(f"monomial outcome {o} outside the outcome space")
                idx.append(int(np.ravel_multi_index(o, cards)))
            free = degree - len(idx)
            # spread the monomial uniformly over the free (summed) slots
            sl = tuple(idx) + (slice(None),) * free
            coeffs[sl] += float(coef)
        return cls(variables, degree, coeffs).symmetrized()

    def symmetrized(self) -> "Polynomial":
        """Canonical form: average over permutations of the ``degree`` copies."""
        perms = list(itertools.permutations(range(self.degree)))
        acc = sum(np.transpose(self.coefficients, p) for p in perms) / len(perms)
        return Polynomial(self.variables, self.degree, acc)

    def __call__(self, p: Distribution) -> float:
        if p.cards != tuple(c for _, c in self.variables):
            raise InputError("distribution does not match polynomial variables")
        return float(self.coefficients.reshape(-1) @ lift(p, self.degree).flat())

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self.variables == other.variables and self.degree == other.degree
                and np.array_equal(self.coefficients, other.coefficients))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LatentModel:
    """An explicit classical model: independent latents with finite alphabets and
    deterministic responses.

    ``responses[x]`` is an integer array indexed by the values of the latents
    in ``scenario.parent_sets[x]`` (in that order).
    """

    scenario: CorrelationScenario
    latent_weights: tuple[np.ndarray, ...]
    responses: tuple[np.ndarray, ...]

    @classmethod
    def random(cls, scenario: CorrelationScenario, rng: np.random.Generator,
               latent_card: int = 4) -> "LatentModel":
        """Dirichlet-uniform latent weights and uniformly random response tables."""
        weights = tuple(rng.dirichlet(np.ones(latent_card)) for _ in scenario.latents)
        responses = tuple(rng.integers(0, d, size=(latent_card,) * len(ps))
                          for d, ps in zip(scenario.cards, scenario.parent_sets))
        return cls(scenario, weights, responses)

    def distribution(self) -> Distribution:
        """Observed distribution, by enumerating every joint latent value."""
        sc = self.scenario
        sizes = [len(w) for w in self.latent_weights]
        out = np.zeros(sc.cards)
        for lat in itertools.product(*(range(s) for s in sizes)):
            weight = np.prod([w[v] for w, v in zip(self.latent_weights, lat)])
            if weight == 0:
                continue
            outcome = tuple(int(r[tuple(lat[j] for j in ps)])
                            for r, ps in zip(self.responses, sc.parent_sets))
            out[outcome] += weight
        return Distribution(sc.variables, out / out.sum())


def uniform(variables) -> Distribution:
    variables = _normalize_vars(variables)
    shape = tuple(c for _, c in variables)
    return Distribution(variables, np.full(shape, 1.0 / np.prod(shape)))


def point_mass(variables, outcome: Sequence[int]) -> Distribution:
    variables = _normalize_vars(variables)
    tab = np.zeros(tuple(c for _, c in variables))
    tab[tuple(outcome)] = 1.0
    return Distribution(variables, tab)


def ghz_noisy(v: float) -> Distribution:
    """v * GHZ + (1 - v) * uniform noise on three bits."""
    tab = np.full((2, 2, 2), (1 - v) / 8)
    tab[0, 0, 0] += v / 2
    tab[1, 1, 1] += v / 2
    return Distribution((("A", 2), ("B", 2), ("C", 2)), tab)


__all__ = [
    "LATENT", "OBSERVED", "EXOGENOUS", "Node", "ValidationReport", "CausalStructure",
    "validate", "CorrelationScenario", "Distribution", "lift", "Event", "EventTable",
    "Polynomial", "LatentModel", "uniform", "point_mass", "ghz_noisy",
]

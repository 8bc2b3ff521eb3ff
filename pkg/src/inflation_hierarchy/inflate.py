"""n-th order inflation of a correlation scenario.

The inflation has ``n`` copies of every latent; observed variable ``A_x``
becomes the family ``A_x^i`` indexed by tuples ``i`` in ``{0..n-1}^|L_x|``.
The symmetry group is a product of one symmetric group per latent, each
relabelling that latent's copy index wherever it appears.

LP variables are orbit masses: the total probability of one orbit of joint
inflation assignments. A point mass on an orbit, spread uniformly over its
members, is exactly a symmetrized deterministic assignment, so the orbit
simplex is the symmetric polytope.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy import sparse

from .errors import BudgetExceeded, InputError
from .model import CorrelationScenario, Distribution, EventTable, lift

DEFAULT_BUDGET = 2 ** 28
_CHUNK = 1 << 16


def default_budget() -> int:
    env = os.environ.get("INFLATION_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


@dataclass(frozen=True)
class InflationProblem:
    scenario: CorrelationScenario
    order: int

    def __post_init__(self):
        if self.order < 1:
            raise InputError("inflation order must be >= 1")

    @cached_property
    def variables(self) -> tuple[tuple[int, tuple[int, ...]], ...]:
        """``(x, copy index tuple)`` per inflation variable, by x then lexicographic tuple."""
        n = self.order
        return tuple((x, idx)
                     for x, ps in enumerate(self.scenario.parent_sets)
                     for idx in itertools.product(range(n), repeat=len(ps)))

    @cached_property
    def position(self) -> dict[tuple[int, tuple[int, ...]], int]:
        return {v: k for k, v in enumerate(self.variables)}

    @cached_property
    def cards(self) -> np.ndarray:
        return np.array([self.scenario.cards[x] for x, _ in self.variables], dtype=np.int64)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def group_order(self) -> int:
        return math.factorial(self.order) ** self.scenario.n_latents

    @cached_property
    def raw_count(self) -> int:
        return math.prod(int(c) for c in self.cards)

    def variable_name(self, k: int) -> str:
        x, idx = self.variables[k]
        name = self.scenario.observed[x]
        return name + "^" + "".join(str(i + 1) for i in idx)

    def diagonal(self, i: int) -> list[int]:
        """Positions of the diagonal variables ``A_x^{i..i}`` for every x."""
        return [self.position[(x, (i,) * len(ps))]
                for x, ps in enumerate(self.scenario.parent_sets)]

    def act(self, perms) -> np.ndarray:
        """Variable permutation induced by one relabelling per latent.

        Entry ``k`` is the position of ``A_x^{pi(i)}`` where variable ``k`` is
        ``A_x^i``.
        """
        out = np.empty(self.n_variables, dtype=np.int64)
        for k, (x, idx) in enumerate(self.variables):
            ps = self.scenario.parent_sets[x]
            out[k] = self.position[(x, tuple(perms[j][i] for j, i in zip(ps, idx)))]
        return out

    @cached_property
    def group(self) -> np.ndarray:
        """All ``(n!)^L`` elements as rows of variable permutations."""
        each = list(itertools.permutations(range(self.order)))
        rows = [self.act(combo)
                for combo in itertools.product(each, repeat=self.scenario.n_latents)]
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.n_variables)

    @cached_property
    def generators(self) -> np.ndarray:
        """Adjacent transpositions of each latent's copy index."""
        ident = tuple(range(self.order))
        gens = []
        for j in range(self.scenario.n_latents):
            for t in range(self.order - 1):
                swap = list(ident)
                swap[t], swap[t + 1] = swap[t + 1], swap[t]
                perms = [ident] * self.scenario.n_latents
                perms[j] = tuple(swap)
                gens.append(self.act(perms))
        return np.array(gens, dtype=np.int64).reshape(len(gens), self.n_variables)

    @cached_property
    def place_values(self) -> np.ndarray:
        """Row-major weights turning an assignment into its raw index."""
        w = np.ones(self.n_variables, dtype=np.int64)
        for k in range(self.n_variables - 2, -1, -1):
            w[k] = w[k + 1] * self.cards[k + 1]
        return w

    def digits(self, raw: np.ndarray) -> np.ndarray:
        return (raw[:, None] // self.place_values[None, :]) % self.cards[None, :]


def build_inflation(scenario: CorrelationScenario, n: int) -> InflationProblem:
    return InflationProblem(scenario, int(n))


def burnside_count(problem: InflationProblem) -> int:
    """Number of orbits via Burnside's lemma, from cycle structure alone."""
    total = 0
    for perm in problem.group:
        seen = np.zeros(problem.n_variables, dtype=bool)
        fixed = 1
        for start in range(problem.n_variables):
            if seen[start]:
                continue
            k = start
            while not seen[k]:
                seen[k] = True
                k = perm[k]
            fixed *= int(problem.cards[start])
        total += fixed
    count = Fraction(total, len(problem.group))
    assert count.denominator == 1
    return int(count)


@dataclass(frozen=True, eq=False)
class OrbitIndex:
    """Orbits of raw inflation assignments under the symmetry group.

    ``representatives`` are raw indices of each orbit's lexicographically
    least member, ascending; ``raw_to_orbit`` maps every raw index to its
    orbit position.
    """

    problem: InflationProblem
    representatives: np.ndarray
    sizes: np.ndarray
    raw_to_orbit: np.ndarray

    def __len__(self) -> int:
        return len(self.representatives)

    def representative_assignment(self, k: int) -> np.ndarray:
        return self.problem.digits(np.array([self.representatives[k]]))[0]

    def expand(self, masses: np.ndarray) -> np.ndarray:
        """Full inflation distribution spreading each orbit mass uniformly."""
        masses = np.asarray(masses, dtype=float)
        full = (masses / self.sizes)[self.raw_to_orbit]
        return full.reshape(tuple(int(c) for c in self.problem.cards))


def orbits(problem: InflationProblem, budget: int | None = None) -> OrbitIndex:
    budget = default_budget() if budget is None else budget
    raw = problem.raw_count
    if raw > budget:
        raise BudgetExceeded(f"order-{problem.order} inflation enumeration", raw, budget)
    group = problem.group
    w = problem.place_values
    canonical = np.empty(raw, dtype=np.int64)
    for start in range(0, raw, _CHUNK):
        idx = np.arange(start, min(raw, start + _CHUNK), dtype=np.int64)
        dig = problem.digits(idx)
        best = idx.copy()
        for perm in group:
            np.minimum(best, dig[:, perm] @ w, out=best)
        canonical[start:start + len(idx)] = best
    reps, inverse, counts = np.unique(canonical, return_inverse=True, return_counts=True)
    return OrbitIndex(problem, reps, counts.astype(np.int64), inverse.astype(np.int64).reshape(-1))


def diagonal_matrix(orbit_index: OrbitIndex, g: int) -> sparse.csr_array:
    """``(D^g, n_orbits)`` map from orbit masses to the degree-``g`` diagonal marginal.

    Entry ``(row, o)`` is the number of members of orbit ``o`` whose first
    ``g`` diagonal blocks read ``row``, divided by the orbit size.
    """
    problem = orbit_index.problem
    if not 1 <= g <= problem.order:
        raise InputError(f"diagonal degree {g} must lie in 1..{problem.order}")
    sc = problem.scenario
    D = sc.outcome_count
    joint_w = np.ones(sc.n_observed, dtype=np.int64)
    for x in range(sc.n_observed - 2, -1, -1):
        joint_w[x] = joint_w[x + 1] * sc.cards[x + 1]
    raw = problem.raw_count
    K = len(orbit_index)
    acc = sparse.csr_array((D ** g, K))
    for start in range(0, raw, _CHUNK):
        idx = np.arange(start, min(raw, start + _CHUNK), dtype=np.int64)
        dig = problem.digits(idx)
        row = np.zeros(len(idx), dtype=np.int64)
        for i in range(g):
            row = row * D + dig[:, problem.diagonal(i)] @ joint_w
        acc = acc + sparse.coo_array((np.ones(len(idx)), (row, orbit_index.raw_to_orbit[idx])),
                                     shape=(D ** g, K)).tocsr()
    return (acc @ sparse.diags_array(1.0 / orbit_index.sizes)).tocsr()


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Equalities over orbit masses; the last row is normalization.

    ``basis`` is ``"outcomes"`` when product rows are indexed by lifted
    outcome tuples, ``"events"`` when indexed by tuples of measurable events.
    """

    orbit_index: OrbitIndex
    matrix: sparse.csr_array
    rhs: np.ndarray
    degree: int
    basis: str
    outcome_cards: tuple[int, ...]
    event_names: tuple[str, ...] = ()
    event_indicator: np.ndarray | None = None

    @property
    def n_product_rows(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def product_matrix(self) -> sparse.csr_array:
        return self.matrix[:-1]

    @property
    def product_rhs(self) -> np.ndarray:
        return self.rhs[:-1]

    def label(self, r: int):
        """Decoded row label: a tuple of outcome tuples or of event names."""
        if r == self.n_product_rows:
            return "normalization"
        base = len(self.event_names) if self.basis == "events" else int(np.prod(self.outcome_cards))
        parts = np.unravel_index(r, (base,) * self.degree)
        if self.basis == "events":
            return tuple(self.event_names[int(k)] for k in parts)
        return tuple(tuple(int(v) for v in np.unravel_index(int(k), self.outcome_cards))
                     for k in parts)

    def feasibility_lp(self):
        from .lpcore import LinearProgram
        return LinearProgram(np.zeros(self.matrix.shape[1]), self.matrix, self.rhs)


def _with_normalization(rows: sparse.csr_array, rhs: np.ndarray):
    K = rows.shape[1]
    mat = sparse.vstack([rows, sparse.csr_array(np.ones((1, K)))]).tocsr()
    return mat, np.concatenate([rhs, [1.0]])


def _check_signature(problem: InflationProblem, variables) -> None:
    if tuple(variables) != problem.scenario.variables:
        raise InputError(f"data over {tuple(variables)} does not match scenario "
                         f"{problem.scenario.variables}")


def diagonal_constraints(problem: InflationProblem, p: Distribution, g: int | None = None,
                         orbit_index: OrbitIndex | None = None,
                         budget: int | None = None) -> ConstraintSet:
    """Degree-``g`` diagonal marginal equals the degree-``g`` lifting of ``p``."""
    g = problem.order if g is None else g
    if g > problem.order:
        raise InputError(f"degree {g} exceeds inflation order {problem.order}")
    if p.is_conditional:
        raise InputError("inflation constraints need an unconditional distribution")
    _check_signature(problem, p.variables)
    oi = orbit_index if orbit_index is not None else orbits(problem, budget)
    rows = diagonal_matrix(oi, g)
    mat, rhs = _with_normalization(rows, lift(p, g).flat())
    return ConstraintSet(oi, mat, rhs, g, "outcomes", problem.scenario.cards)


def event_constraints(problem: InflationProblem, events: EventTable,
                      orbit_index: OrbitIndex | None = None,
                      budget: int | None = None) -> ConstraintSet:
    """For every n-tuple of events, the diagonal mass on their product equals the
    product of their probabilities."""
    _check_signature(problem, events.variables)
    oi = orbit_index if orbit_index is not None else orbits(problem, budget)
    n = problem.order
    diag = diagonal_matrix(oi, n)
    ind = sparse.csr_array(events.indicator())
    kron = ind
    probs = events.probabilities()
    rhs = probs
    for _ in range(n - 1):
        kron = sparse.kron(kron, ind, format="csr")
        rhs = np.multiply.outer(rhs, probs)
    mat, rhs = _with_normalization((kron @ diag).tocsr(), np.asarray(rhs).reshape(-1))
    return ConstraintSet(oi, mat, rhs, n, "events", problem.scenario.cards,
                         events.names, events.indicator())

"""Finite de Finetti-type oracle for symmetric inflation distributions.

Symmetrizing a deterministic assignment of the inflation variables yields a
distribution whose degree-1 diagonal marginal is realized by an explicit
classical model (uniform copy indices as latents), and whose degree-g
diagonal marginal is close to the g-fold lifting of the degree-1 marginal.
Everything here works on deterministic points combinatorially, without
materializing the symmetrized inflation distribution.

Total variation here is the unhalved L1 distance, sum |q - r|, so two
disjoint point masses are at distance 2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded, InputError
from .inflate import InflationProblem, OrbitIndex, default_budget
from .model import Distribution, LatentModel


@dataclass(frozen=True, eq=False)
class DeterministicAssignment:
    """One fixed outcome per inflation variable, in ``problem.variables`` order."""

    problem: InflationProblem
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64).reshape(-1)
        if len(vals) != self.problem.n_variables:
            raise InputError("one value per inflation variable required")
        if np.any(vals < 0) or np.any(vals >= self.problem.cards):
            raise InputError("assignment value outside its cardinality")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def random(cls, problem: InflationProblem, rng: np.random.Generator) -> "DeterministicAssignment":
        return cls(problem, rng.integers(0, problem.cards))

    @classmethod
    def constant(cls, problem: InflationProblem, value: int = 0) -> "DeterministicAssignment":
        return cls(problem, np.full(problem.n_variables, value))

    def response_tables(self) -> tuple[np.ndarray, ...]:
        """Per observed variable, its values indexed by copy-index tuple."""
        pb = self.problem
        n = pb.order
        tables = []
        for x, ps in enumerate(pb.scenario.parent_sets):
            tab = np.empty((n,) * len(ps), dtype=np.int64)
            for idx in itertools.product(range(n), repeat=len(ps)):
                tab[idx] = self.values[pb.position[(x, idx)]]
            tables.append(tab)
        return tuple(tables)

    def point_mass(self) -> np.ndarray:
        q = np.zeros(tuple(int(c) for c in self.problem.cards))
        q[tuple(self.values)] = 1.0
        return q


def symmetrize(q: np.ndarray, problem: InflationProblem, budget: int | None = None) -> np.ndarray:
    """Average of ``q`` over the full relabelling group of ``problem``."""
    budget = default_budget() if budget is None else budget
    if problem.raw_count > budget:
        raise BudgetExceeded("symmetrization", problem.raw_count, budget)
    shape = tuple(int(c) for c in problem.cards)
    q = np.asarray(q, dtype=float).reshape(shape)
    acc = np.zeros(shape)
    for perm in problem.group:
        acc += np.transpose(q, perm)
    return acc / len(problem.group)


@dataclass(frozen=True, eq=False)
class ClosedFormMarginals:
    degree_g: np.ndarray
    degree_1: np.ndarray
    model: LatentModel

    @property
    def degree(self) -> int:
        return self.degree_g.ndim


def _block_outcomes(tables, parent_sets, cards, index_cols) -> np.ndarray:
    """Joint outcome index per row, given each latent's copy index per row."""
    out = np.zeros(len(index_cols[0]), dtype=np.int64)
    for tab, ps, d in zip(tables, parent_sets, cards):
        out = out * d + tab[tuple(index_cols[j] for j in ps)]
    return out


def diagonal_marginal_closed_form(d: DeterministicAssignment, g: int) -> ClosedFormMarginals:
    """Degree-g and degree-1 diagonal marginals of the symmetrized point ``d``.

    The degree-g marginal averages over copy-index choices in which every
    latent uses ``g`` distinct indices, one per diagonal block; the degree-1
    marginal averages over all index tuples and comes with the explicit model
    that realizes it.
    """
    pb = d.problem
    sc = pb.scenario
    n, L, D = pb.order, sc.n_latents, sc.outcome_count
    if not 1 <= g <= n:
        raise InputError(f"degree {g} must lie in 1..{n}")
    tables = d.response_tables()

    grids = np.indices((n,) * L).reshape(L, -1)
    first = _block_outcomes(tables, sc.parent_sets, sc.cards, list(grids))
    p1 = np.bincount(first, minlength=D) / n ** L

    distinct = np.array(list(itertools.permutations(range(n), g)), dtype=np.int64)
    M = len(distinct)
    counts = np.zeros(D ** g)
    # loop over the first latent's tuple, vectorize over the others
    rest = np.indices((M,) * (L - 1)).reshape(L - 1, -1) if L > 1 else np.zeros((0, 1), dtype=np.int64)
    for m0 in range(M):
        choice = [np.full(rest.shape[1], m0)] + list(rest)
        lifted = np.zeros(rest.shape[1], dtype=np.int64)
        for i in range(g):
            cols = [distinct[choice[j], i] for j in range(L)]
            lifted = lifted * D + _block_outcomes(tables, sc.parent_sets, sc.cards, cols)
        counts += np.bincount(lifted, minlength=D ** g)
    pg = counts / M ** L

    model = LatentModel(sc, tuple(np.full(n, 1.0 / n) for _ in range(L)), tables)
    return ClosedFormMarginals(pg.reshape((D,) * g), p1, model)


def convergence_bound(L: int, n: int, g: int) -> float:
    """2 (1 - n^L (n-1)^L ... (n-g+1)^L / n^(gL)), evaluated exactly."""
    if not 1 <= g <= n:
        raise InputError(f"degree {g} must lie in 1..{n}")
    falling = math.prod(n - k for k in range(g))
    return float(2 * (1 - Fraction(falling ** L, n ** (g * L))))


def tv_distance(q1, q2) -> float:
    """Unhalved L1 distance sum |q1 - q2|."""
    a = np.asarray(q1, dtype=float)
    b = np.asarray(q2, dtype=float)
    if a.size != b.size:
        raise InputError(f"outcome spaces differ: {a.shape} vs {b.shape}")
    return float(np.abs(a.reshape(-1) - b.reshape(-1)).sum())


@dataclass(frozen=True, eq=False)
class ConvexDecomposition:
    """Weights ``p_mu`` and compatible components ``P_mu`` with their models."""

    weights: np.ndarray
    components: tuple[Distribution, ...]
    models: tuple[LatentModel, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
            raise InputError("decomposition weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", w)

    def mixture_of_liftings(self, g: int) -> np.ndarray:
        acc = 0.0
        for w, comp in zip(self.weights, self.components):
            term = comp.flat()
            for _ in range(g - 1):
                term = np.multiply.outer(term, comp.flat())
            acc = acc + w * np.asarray(term).reshape(-1)
        return acc


def decomposition_from_orbits(orbit_index: OrbitIndex, masses: np.ndarray,
                              cutoff: float = 1e-12) -> ConvexDecomposition:
    """Decompose a symmetric solution given as orbit masses.

    Every orbit mass is a weight on the symmetrization of the orbit's
    representative; the component is that point's degree-1 diagonal marginal.
    """
    masses = np.clip(np.asarray(masses, dtype=float), 0, None)
    keep = np.flatnonzero(masses > cutoff)
    weights = masses[keep] / masses[keep].sum()
    comps, models = [], []
    for k in keep:
        d = DeterministicAssignment(orbit_index.problem, orbit_index.representative_assignment(k))
        cf = diagonal_marginal_closed_form(d, 1)
        models.append(cf.model)
        comps.append(Distribution(orbit_index.problem.scenario.variables,
                                  cf.degree_1.reshape(orbit_index.problem.scenario.cards)))
    return ConvexDecomposition(weights, tuple(comps), tuple(models))

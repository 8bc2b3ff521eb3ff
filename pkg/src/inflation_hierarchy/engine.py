"""Compatibility checking, causal optimization and distance bounds via inflation.

A verdict of ``feasible-at-order-n`` only says the data admits an n-th order
inflation; it is never a compatibility claim.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import InputError
from .inflate import (ConstraintSet, InflationProblem, OrbitIndex, build_inflation,
                      diagonal_constraints, diagonal_matrix, event_constraints, orbits)
from .lpcore import (FEAS_TOL, INFEASIBLE, OPTIMAL, LinearProgram, Witness, extract_witness,
                     solve)
from .model import (CausalStructure, CorrelationScenario, Distribution, EventTable, LatentModel,
                    Polynomial, validate)
from .preprocess import districts, district_kernel, exogenize, map_distribution, unpack

log = logging.getLogger(__name__)

FEASIBLE = "feasible-at-order-n"
INCOMPATIBLE = "incompatible"
INCONCLUSIVE = "inconclusive-at-tolerance"

SOUNDNESS_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class CompatibilityVerdict:
    order: int
    status: str
    witness: Witness | None = None
    distance_bound: float | None = None
    solution: np.ndarray | None = None
    orbit_index: OrbitIndex | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """``lower_bound`` is f_n, a certified lower bound on the true optimum over
    compatible distributions, which stays uncomputed."""

    order: int
    degree: int
    lower_bound: float
    argmin_marginal: np.ndarray
    solution: np.ndarray
    dual: np.ndarray


def _constraints(problem: InflationProblem, data, oi: OrbitIndex) -> ConstraintSet:
    if isinstance(data, EventTable):
        return event_constraints(problem, data, orbit_index=oi)
    if isinstance(data, Distribution):
        return diagonal_constraints(problem, data, orbit_index=oi)
    raise InputError(f"expected a Distribution or EventTable, got {type(data).__name__}")


def check_compatibility(scenario: CorrelationScenario, data, n: int = 2, *,
                        budget: int | None = None, tol: float = FEAS_TOL,
                        with_distance: bool = False,
                        orbit_index: OrbitIndex | None = None) -> CompatibilityVerdict:
    """Solve the order-``n`` inflation feasibility LP for ``data``."""
    problem = build_inflation(scenario, n)
    oi = orbit_index if orbit_index is not None else orbits(problem, budget)
    cons = _constraints(problem, data, oi)
    out = solve(cons.feasibility_lp(), tol=tol)
    dist = distance_lower_bound(scenario, data, n, orbit_index=oi) if with_distance and n >= 2 else None
    if out.status == OPTIMAL:
        return CompatibilityVerdict(n, FEASIBLE, distance_bound=dist, solution=out.primal,
                                    orbit_index=oi)
    if out.farkas is None or not np.any(out.farkas):
        log.warning("solver returned %s without a certificate", out.status)
        return CompatibilityVerdict(n, INCONCLUSIVE, distance_bound=dist, orbit_index=oi)
    witness = extract_witness(out.farkas, cons, data)
    if out.status == INFEASIBLE and witness.value_at_input < witness.certified_floor - tol:
        return CompatibilityVerdict(n, INCOMPATIBLE, witness, dist, orbit_index=oi)
    return CompatibilityVerdict(n, INCONCLUSIVE, witness, dist, orbit_index=oi)


@dataclass(frozen=True, eq=False)
class DistrictVerdict:
    district: CausalStructure
    scenario: CorrelationScenario
    data: object
    verdict: CompatibilityVerdict


@dataclass(frozen=True, eq=False)
class StructureVerdict:
    order: int
    status: str
    districts: tuple[DistrictVerdict, ...]


def _combine(statuses) -> str:
    statuses = list(statuses)
    if INCOMPATIBLE in statuses:
        return INCOMPATIBLE
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return FEASIBLE


def prepare_structure(structure: CausalStructure, p: Distribution):
    """Exogenize, split and unpack; yields ``(district, scenario, data)`` per district.

    Districts that already are correlation scenarios keep their plain
    distribution; all others carry the event table of their unpacking.
    """
    report = validate(structure)
    if not report.ok:
        raise InputError("invalid structure: " + "; ".join(report.violations))
    ex = exogenize(structure)
    out = []
    for dist in districts(ex):
        kernel = district_kernel(p, ex, dist)
        if dist.is_correlation_scenario():
            sc = CorrelationScenario.from_structure(dist)
            out.append((dist, sc, Distribution(sc.variables, kernel.table)))
        else:
            unpacked, emap = unpack(dist)
            out.append((dist, unpacked.scenario, map_distribution(kernel, emap)))
    return out


def check_structure(structure: CausalStructure, p: Distribution, n: int = 2, *,
                    budget: int | None = None, tol: float = FEAS_TOL) -> StructureVerdict:
    """Full pipeline for a general causal structure; one verdict per district."""
    results = []
    for dist, sc, data in prepare_structure(structure, p):
        verdict = check_compatibility(sc, data, n, budget=budget, tol=tol)
        results.append(DistrictVerdict(dist, sc, data, verdict))
    return StructureVerdict(n, _combine(r.verdict.status for r in results), tuple(results))


def optimize(scenario: CorrelationScenario, f: Polynomial, n: int, *,
             budget: int | None = None, orbit_index: OrbitIndex | None = None,
             tol: float = FEAS_TOL) -> OptimizationResult:
    """Minimize F over degree-g diagonal marginals of symmetric order-n inflations."""
    if f.degree > n:
        raise InputError(f"polynomial degree {f.degree} exceeds order {n}")
    if tuple(c for _, c in f.variables) != scenario.cards:
        raise InputError("polynomial variables do not match the scenario")
    problem = build_inflation(scenario, n)
    oi = orbit_index if orbit_index is not None else orbits(problem, budget)
    diag = diagonal_matrix(oi, f.degree)
    costs = diag.T @ f.coefficients.reshape(-1)
    lp = LinearProgram(costs, sparse.csr_array(np.ones((1, len(oi)))), np.ones(1))
    out = solve(lp, tol=tol)
    if out.status != OPTIMAL:
        raise RuntimeError(f"optimization LP ended with status {out.status}")
    # dual certificate: costs - A^T y >= 0 and b.y equal to the optimum
    reduced = costs - lp.A.T @ out.dual
    if np.min(reduced) < -tol or abs(float(lp.b @ out.dual) - out.objective) > tol:
        raise RuntimeError("optimization LP dual certificate failed verification")
    marginal = (diag @ out.primal).reshape((scenario.outcome_count,) * f.degree)
    return OptimizationResult(n, f.degree, out.objective, marginal, out.primal, out.dual)


def distance_polynomial(scenario: CorrelationScenario, data) -> Polynomial:
    """Degree-2 polynomial N(R) = sum (R(.) - P(.))^2 over outcomes or events.

    Homogenized with sum R = 1, so N(R) = Nbar . R^(x)2 on normalized R.
    """
    D = scenario.outcome_count
    if isinstance(data, EventTable):
        if data.variables != scenario.variables:
            raise InputError("event table does not match the scenario")
        ind = data.indicator()
        probs = data.probabilities()
    elif isinstance(data, Distribution):
        if data.variables != scenario.variables or data.is_conditional:
            raise InputError("distribution does not match the scenario")
        ind = np.eye(D)
        probs = data.flat()
    else:
        raise InputError(f"expected a Distribution or EventTable, got {type(data).__name__}")
    pe = probs @ ind  # sum_e P(e) 1[a in e]
    coeffs = ind.T @ ind - pe[:, None] - pe[None, :] + float(probs @ probs)
    return Polynomial(scenario.variables, 2, coeffs)


def distance_lower_bound(scenario: CorrelationScenario, data, n: int, *,
                         budget: int | None = None,
                         orbit_index: OrbitIndex | None = None) -> float:
    """Certified lower bound on the Euclidean distance from ``data`` to the
    compatible set (over outcome or event probabilities)."""
    if n < 2:
        raise InputError("distance bound needs order n >= 2")
    res = optimize(scenario, distance_polynomial(scenario, data), n, budget=budget,
                   orbit_index=orbit_index)
    return float(np.sqrt(max(res.lower_bound, 0.0)))


def sample_compatible(scenario: CorrelationScenario, rng: np.random.Generator,
                      latent_card: int = 4) -> Distribution:
    """Distribution of a random classical model (Dirichlet-uniform latent weights,
    uniformly random deterministic responses)."""
    return LatentModel.random(scenario, rng, latent_card).distribution()


@dataclass(frozen=True)
class WitnessReport:
    samples: int
    seed: int
    min_value: float
    values: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.min_value >= -SOUNDNESS_TOL


def verify_witness(w: Witness, scenario: CorrelationScenario, samples: int = 100,
                   seed: int = 0, latent_card: int = 4) -> WitnessReport:
    """Evaluate ``w`` on random compatible distributions; they must all score >= -1e-6."""
    if tuple(w.outcome_cards) != scenario.cards:
        raise InputError("witness does not belong to this scenario")
    rng = np.random.default_rng(seed)
    values = tuple(w.evaluate(sample_compatible(scenario, rng, latent_card))
                   for _ in range(samples))
    return WitnessReport(samples, seed, min(values) if values else float("inf"), values)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inflation_hierarchy import catalog
from inflation_hierarchy.errors import BudgetExceeded, InputError
from inflation_hierarchy.inflate import (build_inflation, burnside_count, diagonal_constraints,
                                         diagonal_matrix, event_constraints, orbits)
from inflation_hierarchy.model import CorrelationScenario, Event, EventTable, ghz_noisy, lift

from oracles import orbit_count_union_find

# (scenario, n) -> (inflation variables, |G|, orbits), counted by hand / Burnside
FROZEN_COUNTS = {
    ("triangle", 2): (12, 8, 640),
    ("three-on-line", 2): (8, 4, 84),
    ("single-variable", 2): (2, 2, 3),
    ("single-variable", 4): (4, 24, 5),
}

SCENARIOS = {"triangle": catalog.triangle, "three-on-line": catalog.three_on_line,
             "single-variable": catalog.single_variable}


@pytest.mark.parametrize("key", sorted(FROZEN_COUNTS))
def test_orbit_counts_are_frozen(key):
    name, n = key
    problem = build_inflation(SCENARIOS[name](), n)
    nv, g, k = FROZEN_COUNTS[key]
    assert problem.n_variables == nv
    assert problem.group_order == g == len(problem.group)
    oi = orbits(problem)
    assert len(oi) == k == burnside_count(problem)
    assert oi.sizes.sum() == problem.raw_count


@pytest.mark.parametrize("name", ["triangle", "three-on-line"])
def test_orbit_count_matches_union_find(name):
    sc = SCENARIOS[name]()
    assert len(orbits(build_inflation(sc, 2))) == orbit_count_union_find(sc, 2)


def test_variable_names_and_diagonal(triangle):
    problem = build_inflation(triangle, 2)
    assert [problem.variable_name(k) for k in range(4)] == ["A^11", "A^12", "A^21", "A^22"]
    assert [problem.variable_name(k) for k in problem.diagonal(1)] == ["A^22", "B^22", "C^22"]


def test_representatives_are_lexicographic_minima(triangle_orbits):
    problem = triangle_orbits.problem
    for k in range(0, len(triangle_orbits), 37):
        rep = triangle_orbits.representative_assignment(k)
        images = [tuple(rep[np.argsort(perm)]) for perm in problem.group]
        assert tuple(rep) == min(images)


@given(st.integers(0, 4095))
@settings(max_examples=40)
def test_orbit_membership_is_group_invariant(raw):
    problem = build_inflation(catalog.triangle(), 2)
    oi = orbits(problem)
    digits = problem.digits(np.array([raw]))[0]
    for perm in problem.generators:
        image = int(digits[np.argsort(perm)] @ problem.place_values)
        assert oi.raw_to_orbit[image] == oi.raw_to_orbit[raw]


def test_budget_is_enforced(triangle):
    with pytest.raises(BudgetExceeded) as info:
        orbits(build_inflation(triangle, 2), budget=1000)
    assert info.value.raw_count == 4096


def test_diagonal_matrix_columns_are_stochastic(triangle_orbits):
    for g in (1, 2):
        mat = diagonal_matrix(triangle_orbits, g)
        assert mat.shape == (8 ** g, 640)
        np.testing.assert_allclose(mat.sum(axis=0), 1.0)
    with pytest.raises(InputError):
        diagonal_matrix(triangle_orbits, 3)


def test_diagonal_matrix_agrees_with_expanded_distribution(triangle_orbits, rng):
    masses = rng.dirichlet(np.ones(len(triangle_orbits)))
    q = triangle_orbits.expand(masses)
    # A^11 B^11 C^11 (positions 0, 4, 8) and A^22 B^22 C^22 (3, 7, 11)
    marg = q.sum(axis=tuple(k for k in range(12) if k not in (0, 4, 8, 3, 7, 11)))
    marg = np.transpose(marg, [0, 2, 4, 1, 3, 5]).reshape(-1)
    np.testing.assert_allclose(diagonal_matrix(triangle_orbits, 2) @ masses, marg, atol=1e-12)


def test_constraint_shape_and_rhs(triangle, triangle_orbits):
    problem = triangle_orbits.problem
    p = ghz_noisy(0.3)
    cons = diagonal_constraints(problem, p, orbit_index=triangle_orbits)
    assert cons.matrix.shape == (65, 640)
    np.testing.assert_allclose(cons.rhs[:-1], lift(p, 2).flat())
    assert cons.rhs[-1] == 1.0
    assert cons.label(9) == ((0, 0, 1), (0, 0, 1))
    assert cons.label(64) == "normalization"


def test_constraints_reject_mismatched_data(triangle_orbits):
    from inflation_hierarchy.model import uniform
    with pytest.raises(InputError):
        diagonal_constraints(triangle_orbits.problem, uniform((("A", 2), ("B", 2))))


def test_event_constraints_with_singletons_match_diagonal(triangle, triangle_orbits):
    p = ghz_noisy(0.7)
    events = EventTable(triangle.variables, tuple(
        Event(str(o), frozenset({o}), float(p.table[o])) for o in triangle.outcomes()))
    ev = event_constraints(triangle_orbits.problem, events, orbit_index=triangle_orbits)
    dg = diagonal_constraints(triangle_orbits.problem, p, orbit_index=triangle_orbits)
    assert (ev.matrix != dg.matrix).nnz == 0
    np.testing.assert_allclose(ev.rhs, dg.rhs)
    assert ev.label(1) == ("(0, 0, 0)", "(0, 0, 1)")


def test_event_constraints_on_three_on_line(three_on_line):
    # only the marginal events e(a), e(c) of the outer parties
    def ev(name, x, v, prob):
        outs = frozenset(o for o in three_on_line.outcomes() if o[x] == v)
        return Event(name, outs, prob)
    table = EventTable(three_on_line.variables, (ev("A=0", 0, 0, 0.5), ev("A=1", 0, 1, 0.5),
                                                 ev("C=0", 2, 0, 0.5), ev("C=1", 2, 1, 0.5)))
    cons = event_constraints(build_inflation(three_on_line, 2), table)
    assert cons.matrix.shape == (17, 84)
    assert cons.basis == "events"

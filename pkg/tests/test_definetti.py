import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inflation_hierarchy import catalog
from inflation_hierarchy.definetti import (DeterministicAssignment, convergence_bound,
                                           decomposition_from_orbits, diagonal_marginal_closed_form,
                                           symmetrize, tv_distance)
from inflation_hierarchy.errors import InputError
from inflation_hierarchy.inflate import build_inflation, diagonal_matrix, orbits
from inflation_hierarchy.model import Distribution, lift

import oracles

SCENARIOS = {"triangle": catalog.triangle, "three-on-line": catalog.three_on_line}


@pytest.mark.parametrize("L, n, g, expected", [
    (3, 2, 2, 1.75), (3, 4, 2, 1.15625), (2, 2, 2, 1.5), (1, 5, 1, 0.0), (2, 3, 3, 2 * (1 - 36 / 729))])
def test_convergence_bound_values(L, n, g, expected):
    assert convergence_bound(L, n, g) == pytest.approx(expected, abs=1e-12)


def test_convergence_bound_domain():
    with pytest.raises(InputError):
        convergence_bound(2, 2, 3)


def test_tv_distance_is_unhalved():
    assert tv_distance([1, 0], [0, 1]) == 2.0
    with pytest.raises(InputError):
        tv_distance([1, 0], [1, 0, 0])


@pytest.mark.parametrize("name", sorted(SCENARIOS))
@pytest.mark.parametrize("n, g", [(2, 2), (3, 2), (3, 3)])
def test_closed_form_matches_group_average(name, n, g):
    sc = SCENARIOS[name]()
    problem = build_inflation(sc, n)
    rng = np.random.default_rng(n * 10 + g)
    for _ in range(3):
        d = DeterministicAssignment.random(problem, rng)
        cf = diagonal_marginal_closed_form(d, g)
        pg, p1 = oracles.symmetrized_diagonal_marginals(d.values, sc, n, g)
        np.testing.assert_allclose(cf.degree_g.reshape(-1), pg, atol=1e-12)
        np.testing.assert_allclose(cf.degree_1, p1, atol=1e-12)


def test_symmetrize_full_enumeration(triangle, triangle_orbits, rng):
    problem = triangle_orbits.problem
    d = DeterministicAssignment.random(problem, rng)
    q = symmetrize(d.point_mass(), problem)
    assert q.sum() == pytest.approx(1.0)
    # the symmetrization of a point is uniform on its orbit
    orbit = triangle_orbits.raw_to_orbit[int(d.values @ problem.place_values)]
    masses = np.zeros(len(triangle_orbits))
    masses[orbit] = 1.0
    np.testing.assert_allclose(q, triangle_orbits.expand(masses), atol=1e-12)
    cf = diagonal_marginal_closed_form(d, 2)
    np.testing.assert_allclose(diagonal_matrix(triangle_orbits, 2) @ masses,
                               cf.degree_g.reshape(-1), atol=1e-12)


@given(st.sampled_from(sorted(SCENARIOS)), st.integers(2, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_tv_bound_property(name, n, seed):
    sc = SCENARIOS[name]()
    d = DeterministicAssignment.random(build_inflation(sc, n), np.random.default_rng(seed))
    cf = diagonal_marginal_closed_form(d, 2)
    p1 = Distribution(sc.variables, cf.degree_1.reshape(sc.cards))
    assert tv_distance(cf.degree_g, lift(p1, 2).flat()) <= convergence_bound(sc.n_latents, n, 2) + 1e-12
    np.testing.assert_allclose(cf.model.distribution().flat(), cf.degree_1, atol=1e-12)


def test_constant_assignment_has_zero_gap(triangle):
    d = DeterministicAssignment.constant(build_inflation(triangle, 3), 1)
    cf = diagonal_marginal_closed_form(d, 2)
    p1 = Distribution(triangle.variables, cf.degree_1.reshape(2, 2, 2))
    assert tv_distance(cf.degree_g, lift(p1, 2).flat()) == 0.0


def test_assignment_validation(triangle):
    problem = build_inflation(triangle, 2)
    with pytest.raises(InputError):
        DeterministicAssignment(problem, np.zeros(5))
    with pytest.raises(InputError):
        DeterministicAssignment(problem, np.full(12, 2))


def test_decomposition_reproduces_degree_one_marginal(triangle, triangle_orbits, rng):
    masses = rng.dirichlet(np.ones(len(triangle_orbits)) * 0.05)
    dec = decomposition_from_orbits(triangle_orbits, masses)
    q1 = diagonal_matrix(triangle_orbits, 1) @ masses
    np.testing.assert_allclose(dec.mixture_of_liftings(1), q1, atol=1e-9)
    # degree-2 gap stays within the bound
    q2 = diagonal_matrix(triangle_orbits, 2) @ masses
    assert tv_distance(q2, dec.mixture_of_liftings(2)) <= convergence_bound(3, 2, 2) + 1e-9
    for comp, model in zip(dec.components, dec.models):
        np.testing.assert_allclose(model.distribution().flat(), comp.flat(), atol=1e-12)

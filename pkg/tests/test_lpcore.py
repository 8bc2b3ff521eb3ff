import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import sparse

from inflation_hierarchy.errors import InputError
from inflation_hierarchy.inflate import build_inflation, diagonal_constraints
from inflation_hierarchy.lpcore import (INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram,
                                        export_lp, export_mps, extract_witness, parse_lp, solve,
                                        verify_farkas, verify_primal)
from inflation_hierarchy.model import ghz_noisy, lift


def lp(c, A, b):
    return LinearProgram(np.array(c, float), sparse.csr_array(np.array(A, float)), np.array(b, float))


def test_feasible_segment():
    prob = lp([0, 0], [[1, 1]], [1])
    out = solve(prob)
    assert out.status == OPTIMAL
    assert verify_primal(prob, out.primal)


def test_infeasible_has_certificate():
    prob = lp([0, 0], [[1, 1]], [-1])
    out = solve(prob)
    assert out.status == INFEASIBLE
    assert verify_farkas(prob, out.farkas)
    assert out.farkas[0] == pytest.approx(-1.0)


def test_optimal_value_and_dual():
    prob = lp([-1, 0], [[1, 1]], [1])
    out = solve(prob)
    assert out.status == OPTIMAL
    assert out.objective == pytest.approx(-1.0)
    np.testing.assert_allclose(out.primal, [1, 0], atol=1e-9)
    assert out.dual[0] == pytest.approx(-1.0)


def test_unbounded_and_degenerate_shapes():
    assert solve(lp([-1, 0], [[1, -1]], [0])).status == UNBOUNDED
    assert solve(lp([], np.zeros((0, 0)), [])).status == OPTIMAL
    assert solve(lp([], np.zeros((1, 0)), [1])).status == INFEASIBLE
    assert solve(lp([1, 2], np.zeros((0, 2)), [])).status == OPTIMAL


def test_malformed_lp_rejected():
    with pytest.raises(InputError):
        lp([0, 0], [[1, 1, 1]], [1])
    with pytest.raises(InputError):
        lp([np.nan], [[1]], [1])


@given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=40)
def test_certificates_always_verify(m, n, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-2, 3, size=(m, n)).astype(float)
    b = rng.integers(-2, 3, size=m).astype(float)
    prob = lp(rng.normal(size=n), A, b)
    out = solve(prob)
    if out.status == OPTIMAL:
        assert verify_primal(prob, out.primal)
    elif out.status == INFEASIBLE:
        assert verify_farkas(prob, out.farkas)


def test_export_small_example_is_exact():
    text = export_lp(lp([-1, 0], [[1, 1]], [1]))
    assert text == "INFLP minimize vars=2 rows=1\nobj 0:-1.0\neq 1.0 0:1.0 1:1.0\n"
    assert export_lp(lp([], np.zeros((0, 0)), [])) == "INFLP minimize vars=0 rows=0\n"


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_export_round_trip(m, n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.6)
    prob = lp(rng.normal(size=n) / 3, A, rng.normal(size=m))
    text = export_lp(prob)
    back = parse_lp(text)
    np.testing.assert_array_equal(back.c, prob.c)
    np.testing.assert_array_equal(back.b, prob.b)
    np.testing.assert_array_equal(back.A.toarray(), prob.A.toarray())
    assert export_lp(back) == text


def test_export_triangle_is_deterministic(triangle, triangle_orbits, tmp_path):
    cons = diagonal_constraints(triangle_orbits.problem, ghz_noisy(0.3), orbit_index=triangle_orbits)
    first = export_lp(cons.feasibility_lp(), tmp_path / "a.lp")
    second = export_lp(cons.feasibility_lp())
    assert first == second == (tmp_path / "a.lp").read_text()
    assert first.splitlines()[0] == "INFLP minimize vars=640 rows=65"
    assert len(first.splitlines()) == 67
    assert export_mps(cons.feasibility_lp()).startswith("NAME")


@pytest.mark.parametrize("v", [0.5, 1.0])
def test_witness_normalization(triangle_orbits, v):
    p = ghz_noisy(v)
    cons = diagonal_constraints(triangle_orbits.problem, p, orbit_index=triangle_orbits)
    out = solve(cons.feasibility_lp())
    assert out.status == INFEASIBLE
    w = extract_witness(out.farkas, cons, p)
    assert w.certified_floor == pytest.approx(0.0, abs=1e-9)
    assert w.certified_max == pytest.approx(1.0, abs=1e-9)
    assert w.value_at_input < 0
    assert w.value_at_input == pytest.approx(float(w.coefficients @ lift(p, 2).flat()))
    # every orbit column of the diagonal map scores inside [0, 1]
    cols = cons.product_matrix.T @ w.coefficients
    assert cols.min() >= -1e-9 and cols.max() <= 1 + 1e-9

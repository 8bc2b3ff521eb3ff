"""Standard causal structures used throughout tests, scripts and examples."""

from __future__ import annotations

import numpy as np

from .model import (EXOGENOUS, LATENT, OBSERVED, CausalStructure, CorrelationScenario,
                    Distribution)


def triangle(card: int = 2) -> CorrelationScenario:
    return CorrelationScenario.from_parents([
        ("A", card, ["a", "b"]), ("B", card, ["b", "c"]), ("C", card, ["c", "a"])])


def three_on_line(card: int = 2) -> CorrelationScenario:
    """A - U1 - B - U2 - C: the star scenario with B in the middle."""
    return CorrelationScenario.from_parents([
        ("A", card, ["U1"]), ("B", card, ["U1", "U2"]), ("C", card, ["U2"])])


def single_variable(card: int = 2) -> CorrelationScenario:
    return CorrelationScenario.from_parents([("A", card, ["U"])])


def two_triangles(card: int = 2) -> CorrelationScenario:
    return CorrelationScenario.from_parents([
        ("A", card, ["a", "b"]), ("B", card, ["b", "c"]), ("C", card, ["c", "a"]),
        ("D", card, ["d", "e"]), ("E", card, ["e", "f"]), ("F", card, ["f", "d"])])


def instrumental() -> CausalStructure:
    """X -> A -> B with a latent common cause U of A and B."""
    return CausalStructure.build(
        [("X", EXOGENOUS, 2), ("A", OBSERVED, 2), ("B", OBSERVED, 2), ("U", LATENT)],
        [("X", "A"), ("A", "B"), ("U", "A"), ("U", "B")])


def bell() -> CausalStructure:
    """Settings X, Y; outcomes A, B; one shared latent."""
    return CausalStructure.build(
        [("X", EXOGENOUS, 2), ("Y", EXOGENOUS, 2), ("A", OBSERVED, 2), ("B", OBSERVED, 2),
         ("L", LATENT)],
        [("X", "A"), ("Y", "B"), ("L", "A"), ("L", "B")])


def g1() -> CausalStructure:
    """Three observed binaries with two latents, unpacking to seven variables.

    X is exogenous; A has parent X, B is a root observed node and C has
    parents A and B; U1 is shared by A and B, U2 by B and C.
    """
    return CausalStructure.build(
        [("X", EXOGENOUS, 2), ("A", OBSERVED, 2), ("B", OBSERVED, 2), ("C", OBSERVED, 2),
         ("U1", LATENT), ("U2", LATENT)],
        [("X", "A"), ("A", "C"), ("B", "C"), ("U1", "A"), ("U1", "B"),
         ("U2", "B"), ("U2", "C")])


def instrumental_violation() -> Distribution:
    """P(A,B|X): X=0 gives (0,0); X=1 gives (0,1) or (1,1) with 1/2 each.

    P(00|0) + P(01|1) = 1.5, above the classical maximum of 1.
    """
    t = np.zeros((2, 2, 2))
    t[0, 0, 0] = 1.0
    t[1, 0, 1] = t[1, 1, 1] = 0.5
    return Distribution((("A", 2), ("B", 2)), t, given=(("X", 2),))


STRUCTURES = {
    "triangle": lambda: triangle().to_structure(),
    "three-on-line": lambda: three_on_line().to_structure(),
    "single-variable": lambda: single_variable().to_structure(),
    "two-triangles": lambda: two_triangles().to_structure(),
    "instrumental": instrumental,
    "bell": bell,
    "g1": g1,
}

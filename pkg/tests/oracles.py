"""Independent reference computations used by the test suite.

Nothing here goes through the orbit machinery or the constraint builders of
the package; the brute-force LPs call scipy directly on dense matrices.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from inflation_hierarchy.model import CorrelationScenario, Distribution, LatentModel


def _feasible(A_eq, b_eq) -> bool:
    res = linprog(np.zeros(A_eq.shape[1]), A_eq=A_eq, b_eq=b_eq, bounds=(0, None),
                  method="highs")
    return res.status == 0


# ---------------------------------------------------------------- compatibility

def three_on_line_feasible(p: np.ndarray) -> bool:
    """Deterministic-strategy LP for A - U1 - B - U2 - C (binary).

    Take U1 = A and U2 = C; B mixes over its 16 response functions
    f: (a, c) -> b, with the mixture allowed to depend on (a, c) through the
    latents' extra randomness. Variables x[a, c, f] must satisfy
    sum_f x[a,c,f] = P(a) P(c) and sum_{f(a,c)=b} x[a,c,f] = P(a,b,c).
    """
    p = np.asarray(p, dtype=float).reshape(2, 2, 2)
    pa = p.sum(axis=(1, 2))
    pc = p.sum(axis=(0, 1))
    funcs = list(itertools.product(range(2), repeat=4))
    nv = 4 * len(funcs)
    rows, rhs = [], []
    for a, c in itertools.product(range(2), repeat=2):
        for b in range(2):
            r = np.zeros(nv)
            for k, f in enumerate(funcs):
                if f[2 * a + c] == b:
                    r[(2 * a + c) * len(funcs) + k] = 1
            rows.append(r)
            rhs.append(p[a, b, c])
        r = np.zeros(nv)
        r[(2 * a + c) * len(funcs):(2 * a + c + 1) * len(funcs)] = 1
        rows.append(r)
        rhs.append(pa[a] * pc[c])
    return _feasible(np.array(rows), np.array(rhs))


def instrumental_feasible(p_ab_given_x: np.ndarray) -> bool:
    """Mixture over the 16 deterministic assignments of (A^{X=0}, A^{X=1}, B^{A=0}, B^{A=1})."""
    p = np.asarray(p_ab_given_x, dtype=float).reshape(2, 2, 2)
    strategies = list(itertools.product(range(2), repeat=4))
    A = np.zeros((8, 16))
    for k, (a0, a1, b0, b1) in enumerate(strategies):
        for x in range(2):
            a = (a0, a1)[x]
            b = (b0, b1)[a]
            A[4 * x + 2 * a + b, k] = 1
    return _feasible(A, p.reshape(-1))


def bell_local(p_ab_given_xy: np.ndarray) -> bool:
    """Local polytope membership, binary inputs and outputs, table P[x, y, a, b]."""
    p = np.asarray(p_ab_given_xy, dtype=float).reshape(2, 2, 2, 2)
    strategies = list(itertools.product(range(2), repeat=4))
    A = np.zeros((16, 16))
    for k, (a0, a1, b0, b1) in enumerate(strategies):
        for x, y in itertools.product(range(2), repeat=2):
            A[8 * x + 4 * y + 2 * (a0, a1)[x] + (b0, b1)[y], k] = 1
    return _feasible(A, p.reshape(-1))


# ---------------------------------------------------------------- unreduced inflation

def _inflation_layout(sc: CorrelationScenario, n: int):
    """Inflation variables as (x, copy tuple), plus generator permutations."""
    variables = [(x, idx) for x, ps in enumerate(sc.parent_sets)
                 for idx in itertools.product(range(n), repeat=len(ps))]
    pos = {v: k for k, v in enumerate(variables)}
    gens = []
    for j in range(sc.n_latents):
        for t in range(n - 1):
            def swap(i, t=t):
                return t + 1 if i == t else (t if i == t + 1 else i)
            perm = []
            for x, idx in variables:
                new = tuple(swap(i) if jj == j else i
                            for i, jj in zip(idx, sc.parent_sets[x]))
                perm.append(pos[(x, new)])
            gens.append(perm)
    return variables, pos, gens


def unreduced_feasible(sc: CorrelationScenario, p: np.ndarray, n: int = 2) -> bool:
    """Order-n inflation LP over all raw assignments with explicit symmetry rows."""
    variables, pos, gens = _inflation_layout(sc, n)
    cards = [sc.cards[x] for x, _ in variables]
    assignments = np.array(list(itertools.product(*(range(c) for c in cards))))
    R = len(assignments)
    strides = np.cumprod([1] + cards[::-1])[:-1][::-1]
    raw = assignments @ strides
    rows, rhs = [], []
    # diagonal marginal of the n diagonal blocks equals P^(x)n
    D = sc.outcome_count
    joint_strides = np.cumprod([1] + list(sc.cards)[::-1])[:-1][::-1]
    key = np.zeros(R, dtype=np.int64)
    for i in range(n):
        block = [pos[(x, (i,) * len(ps))] for x, ps in enumerate(sc.parent_sets)]
        key = key * D + assignments[:, block] @ joint_strides
    target = np.asarray(p, dtype=float).reshape(-1)
    lifted = target
    for _ in range(n - 1):
        lifted = np.outer(lifted, target).reshape(-1)
    M = np.zeros((D ** n, R))
    M[key, np.arange(R)] = 1
    rows.append(M)
    rhs.append(lifted)
    for perm in gens:
        image = assignments[:, np.argsort(perm)] @ strides
        S = np.zeros((R, R))
        S[np.arange(R), raw] += 1
        S[np.arange(R), image] -= 1
        rows.append(S)
        rhs.append(np.zeros(R))
    rows.append(np.ones((1, R)))
    rhs.append(np.ones(1))
    return _feasible(np.vstack(rows), np.concatenate(rhs))


def orbit_count_union_find(sc: CorrelationScenario, n: int) -> int:
    """Orbit count by union-find over generator images (no group enumeration)."""
    variables, _, gens = _inflation_layout(sc, n)
    cards = [sc.cards[x] for x, _ in variables]
    assignments = np.array(list(itertools.product(*(range(c) for c in cards))))
    strides = np.cumprod([1] + cards[::-1])[:-1][::-1]
    R = len(assignments)
    parent = np.arange(R)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for perm in gens:
        image = assignments[:, np.argsort(perm)] @ strides
        for i, j in enumerate(image):
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[ri] = rj
    return len({find(i) for i in range(R)})


# ---------------------------------------------------------------- graphs

def latent_projection_edges(nodes, edges):
    """Edges X -> Y of the exogenized graph: Y is not latent and some directed path
    X -> ... -> Y has only latent intermediate nodes. Returned as a set of pairs.
    """
    kind = {n: k for n, k, *_ in nodes}
    children = {n: [b for a, b in edges if a == n] for n in kind}
    out = set()
    for x in kind:
        stack = list(children[x])
        seen = set()
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            if kind[y] == "latent":
                stack.extend(children[y])
            else:
                out.add((x, y))
    return out


# ---------------------------------------------------------------- de Finetti

def symmetrized_diagonal_marginals(values: np.ndarray, sc: CorrelationScenario, n: int, g: int):
    """Degree-g and degree-1 diagonal marginals of the symmetrization of one point,
    by averaging over every element of (S_n)^L explicitly."""
    variables = [(x, idx) for x, ps in enumerate(sc.parent_sets)
                 for idx in itertools.product(range(n), repeat=len(ps))]
    val = {v: int(values[k]) for k, v in enumerate(variables)}
    D = sc.outcome_count
    pg = np.zeros(D ** g)
    p1 = np.zeros(D)
    perms = list(itertools.permutations(range(n)))
    combos = list(itertools.product(perms, repeat=sc.n_latents))
    for combo in combos:
        def outcome(i):
            # value of A_x^{i..i} in the relabelled point: the original copy is
            # the preimage of i under each latent's permutation
            o = 0
            for x, ps in enumerate(sc.parent_sets):
                idx = tuple(combo[j].index(i) for j in ps)
                o = o * sc.cards[x] + val[(x, idx)]
            return o
        key = 0
        for i in range(g):
            key = key * D + outcome(i)
        pg[key] += 1
        p1[outcome(0)] += 1
    return pg / len(combos), p1 / len(combos)


def falling_bound(L: int, n: int, g: int) -> float:
    return 2 * (1 - (math.perm(n, g) ** L) / n ** (g * L))


# ---------------------------------------------------------------- distance

def local_search_distance(sc: CorrelationScenario, target: np.ndarray, rng: np.random.Generator,
                          restarts: int = 8, steps: int = 300, latent_card: int = 4) -> float:
    """Upper bound on the Euclidean distance from ``target`` to the compatible set,
    by hill climbing over explicit latent models."""
    target = np.asarray(target, dtype=float).reshape(-1)
    best = np.inf
    for _ in range(restarts):
        model = LatentModel.random(sc, rng, latent_card)
        weights = [np.array(w) for w in model.latent_weights]
        resp = [np.array(r) for r in model.responses]

        def dist(weights, resp):
            m = LatentModel(sc, tuple(weights), tuple(resp))
            return float(np.linalg.norm(m.distribution().flat() - target))

        cur = dist(weights, resp)
        for _ in range(steps):
            w2 = [w.copy() for w in weights]
            r2 = [r.copy() for r in resp]
            if rng.random() < 0.5:
                j = rng.integers(len(w2))
                w2[j] = np.abs(w2[j] + rng.normal(0, 0.05, len(w2[j]))) + 1e-12
                w2[j] /= w2[j].sum()
            else:
                x = rng.integers(len(r2))
                flat = r2[x].reshape(-1)
                flat[rng.integers(flat.size)] = rng.integers(sc.cards[x])
                r2[x] = flat.reshape(r2[x].shape)
            d = dist(w2, r2)
            if d <= cur:
                cur, weights, resp = d, w2, r2
        best = min(best, cur)
    return best


def random_table(rng: np.random.Generator, shape) -> np.ndarray:
    t = rng.dirichlet(np.ones(int(np.prod(shape))))
    return t.reshape(shape)


def as_distribution(sc: CorrelationScenario, table) -> Distribution:
    return Distribution(sc.variables, np.asarray(table).reshape(sc.cards))

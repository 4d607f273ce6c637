"""Shared fixtures and the independent oracles used across the suite.

The oracles here deliberately avoid the library's own machinery: ranks come
from sympy's exact GF(p) matrices, quorum enumeration from a plain sweep
over all subsets, and insertion semantics from the set-level definition.
"""

from __future__ import annotations

import random
from itertools import combinations

import pytest

from gbqs.constructions import two_layer_one_common
from gbqs.field_linalg import PRIME
from gbqs.formula import (
    And,
    Formula,
    Literal,
    Or,
    Threshold,
    enumerate_minimal_quorums,
    evaluate,
    parties,
)
from gbqs.msp import build_msp

# --- independent oracles -------------------------------------------------


def gf_rank(rows: list[list[int]]) -> int:
    """Rank over GF(p) via sympy's exact domain matrices."""
    from sympy.polys.domains import GF
    from sympy.polys.matrices import DomainMatrix

    K = GF(PRIME)
    if not rows or not rows[0]:
        return 0
    dm = DomainMatrix([[K(x) for x in row] for row in rows], (len(rows), len(rows[0])), K)
    return dm.rank()


def brute_minimal_quorums(f: Formula) -> set[frozenset[str]]:
    """Sweep every subset of the universe and keep the minimal satisfying ones."""
    universe = sorted(parties(f))
    n = len(universe)
    assert n <= 16, "oracle is exponential; keep universes small"
    satisfying = []
    for mask in range(1 << n):
        subset = frozenset(universe[i] for i in range(n) if mask >> i & 1)
        if evaluate(f, subset):
            satisfying.append(subset)
    return {
        s
        for s in satisfying
        if all(not evaluate(f, s - {p}) for p in s)
    }


def insertion_authorized(
    a1: set[frozenset[str]],
    a2: set[frozenset[str]],
    pz: str,
    candidate: frozenset[str],
    p1: frozenset[str],
    p2: frozenset[str],
) -> bool:
    """Set-level insertion semantics: candidate is authorized in A1(pz -> A2)."""

    def in_up(family: set[frozenset[str]], s: frozenset[str]) -> bool:
        return any(m <= s for m in family)

    base = candidate & p1
    if in_up(a1, base):
        return True
    return in_up(a1, base | {pz}) and in_up(a2, candidate & p2)


def random_formula(rng: random.Random, pool: list[str], depth: int = 0) -> Formula:
    """A random monotone formula; literals may repeat across subtrees."""
    if depth >= 3 or rng.random() < 0.3:
        return Literal(rng.choice(pool))
    arity = rng.randint(2, 4)
    children = tuple(random_formula(rng, pool, depth + 1) for _ in range(arity))
    kind = rng.random()
    if kind < 0.25:
        return And(children)
    if kind < 0.5:
        return Or(children)
    return Threshold(rng.randint(1, arity), children)


def random_subset(rng: random.Random, universe: list[str]) -> frozenset[str]:
    return frozenset(p for p in universe if rng.random() < 0.5)


def all_subsets(universe: list[str]):
    n = len(universe)
    for mask in range(1 << n):
        yield frozenset(universe[i] for i in range(n) if mask >> i & 1)


# --- shared expensive artifacts -------------------------------------------


@pytest.fixture(scope="session")
def two_layer_k4():
    return two_layer_one_common(4)


@pytest.fixture(scope="session")
def two_layer_k4_msp(two_layer_k4):
    return build_msp(two_layer_k4)


@pytest.fixture(scope="session")
def two_layer_k4_quorums(two_layer_k4):
    return enumerate_minimal_quorums(two_layer_k4)

import random

import pytest

from conftest import gf_rank
from gbqs.field_linalg import (
    PRIME,
    Matrix,
    add,
    div,
    field_arith,
    inv,
    lup_factor,
    mul,
    row_echelon,
    sub,
)


def test_additive_identity():
    rng = random.Random(1)
    for _ in range(50):
        x = rng.randrange(PRIME)
        assert add(0, x) == x


def test_inverse_law():
    rng = random.Random(2)
    for _ in range(50):
        x = rng.randrange(1, PRIME)
        assert mul(x, inv(x)) == 1


def test_inverse_of_two_is_half_of_p_plus_one():
    half = (PRIME + 1) // 2
    assert inv(2) == half
    assert mul(2, half) == 1


def test_division_by_zero_rejected():
    with pytest.raises(ZeroDivisionError):
        inv(0)
    with pytest.raises(ZeroDivisionError):
        div(5, 0)


def test_field_arith_dispatch():
    assert field_arith(3, 4, "add") == 7
    assert field_arith(3, 4, "sub") == PRIME - 1
    assert field_arith(3, 4, "mul") == 12
    assert field_arith(12, 4, "div") == 3
    assert field_arith(2, 0, "inv") == (PRIME + 1) // 2
    with pytest.raises(ValueError):
        field_arith(1, 2, "xor")


def test_field_axioms_random_triples():
    rng = random.Random(3)
    for _ in range(1000):
        a, b, c = (rng.randrange(PRIME) for _ in range(3))
        assert add(add(a, b), c) == add(a, add(b, c))
        assert mul(mul(a, b), c) == mul(a, mul(b, c))
        assert mul(a, add(b, c)) == add(mul(a, b), mul(a, c))
        assert add(a, sub(0, a)) == 0
        if a:
            assert mul(a, inv(a)) == 1


def test_echelon_identity_block_already_solved():
    aug = Matrix([[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0]])
    res = row_echelon(aug)
    assert res.consistent
    assert res.free_cols == ()
    assert res.solution() == [1, 0, 0]


def test_echelon_zero_row_nonzero_constant_is_inconsistent():
    res = row_echelon(Matrix([[0, 1]]))
    assert not res.consistent
    assert res.solution() is None


def test_echelon_recovers_known_solution():
    rng = random.Random(4)
    for _ in range(25):
        n = 3
        while True:
            a = [[rng.randrange(PRIME) for _ in range(n)] for _ in range(n)]
            if gf_rank(a) == n:
                break
        x_true = [rng.randrange(PRIME) for _ in range(n)]
        b = [sum(a[i][j] * x_true[j] for j in range(n)) % PRIME for i in range(n)]
        res = row_echelon(Matrix([row + [rhs] for row, rhs in zip(a, b)]))
        assert res.consistent
        assert res.solution() == x_true


def test_echelon_verdict_matches_independent_rank():
    rng = random.Random(5)
    for _ in range(200):
        rows = rng.randint(1, 8)
        cols = rng.randint(1, 8)
        # small residues make rank deficiencies common
        a = [[rng.randrange(4) for _ in range(cols)] for _ in range(rows)]
        b = [rng.randrange(4) for _ in range(rows)]
        res = row_echelon(Matrix([row + [rhs] for row, rhs in zip(a, b)]))
        expect = gf_rank(a) == gf_rank([row + [rhs] for row, rhs in zip(a, b)])
        assert res.consistent == expect


def test_echelon_free_columns_are_the_nonpivots():
    # second column is a multiple of the first
    res = row_echelon(Matrix([[1, 2, 5, 1], [2, 4, 1, 0]]))
    assert res.consistent
    assert res.pivot_cols == (0, 2)
    assert res.free_cols == (1,)


def test_lup_identity():
    factors = lup_factor(Matrix.identity(3), [1, 0, 0])
    assert factors.perm == (0, 1, 2)
    assert factors.L == Matrix.identity(3)
    assert factors.U == Matrix.identity(3)
    assert factors.y == (1, 0, 0)


def test_lup_reproduces_permuted_matrix():
    rng = random.Random(6)
    for _ in range(100):
        d = rng.randint(1, 6)
        m = rng.randint(1, 6)
        mt = Matrix([[rng.randrange(5) for _ in range(m)] for _ in range(d)])
        e = [1] + [0] * (d - 1)
        factors = lup_factor(mt, e)
        permuted = Matrix([mt.data[factors.perm[i]] for i in range(d)])
        assert factors.L.matmul(factors.U) == permuted
        # L y = P e must hold as well
        ly = [
            sum(factors.L.data[i][j] * factors.y[j] for j in range(d)) % PRIME
            for i in range(d)
        ]
        assert ly == [e[factors.perm[i]] for i in range(d)]


def test_lup_vandermonde_two_of_three():
    mt = Matrix([[1, 1, 1], [1, 2, 3]])
    factors = lup_factor(mt, [1, 0])
    permuted = Matrix([mt.data[factors.perm[i]] for i in range(2)])
    assert factors.L.matmul(factors.U) == permuted

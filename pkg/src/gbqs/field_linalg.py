"""Arithmetic over the prime field Z_p and the exact matrix routines built on it.

The modulus is fixed for the whole package: p = 2**31 - 1, a Mersenne prime
large enough that Vandermonde evaluation points 1..n stay distinct and
nonzero for any realistic party count.

Everything here is pure and deterministic.  Matrices are row-major lists of
ints already reduced mod PRIME, and pivot selection always scans top-down,
so repeated runs produce identical eliminations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

PRIME = 2**31 - 1


class UnfactorableError(Exception):
    """LUP factorization could not be completed; fall back to plain elimination."""


def normalize(a: int) -> int:
    return a % PRIME


def add(a: int, b: int) -> int:
    return (a + b) % PRIME


def sub(a: int, b: int) -> int:
    return (a - b) % PRIME


def mul(a: int, b: int) -> int:
    return (a * b) % PRIME


def inv(a: int) -> int:
    if a % PRIME == 0:
        raise ZeroDivisionError("no inverse of 0 in GF(p)")
    return pow(a, -1, PRIME)


def div(a: int, b: int) -> int:
    return mul(a, inv(b))


_OPS = {"add": add, "sub": sub, "mul": mul, "div": div}


def field_arith(a: int, b: int, op: str) -> int:
    """Dispatch-style entry point: op is one of add, sub, mul, inv, div.

    For ``inv`` the first operand is inverted and ``b`` is ignored.
    """
    if op == "inv":
        return inv(a)
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown field operation {op!r}") from None
    return fn(a, b)


class Matrix:
    """A dense matrix over GF(p), stored as a list of row lists."""

    __slots__ = ("data",)

    def __init__(self, rows: Sequence[Sequence[int]]):
        data = [[x % PRIME for x in row] for row in rows]
        if data:
            width = len(data[0])
            if any(len(row) != width for row in data):
                raise ValueError("ragged matrix rows")
        self.data = data

    @property
    def rows(self) -> int:
        return len(self.data)

    @property
    def cols(self) -> int:
        return len(self.data[0]) if self.data else 0

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def transpose(self) -> "Matrix":
        return Matrix([list(col) for col in zip(*self.data)]) if self.data else Matrix([])

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        ot = list(zip(*other.data))
        out = [
            [sum(a * b for a, b in zip(row, col)) % PRIME for col in ot]
            for row in self.data
        ]
        return Matrix(out)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matrix) and self.data == other.data

    def __repr__(self) -> str:
        return f"Matrix({self.data!r})"


@dataclass(frozen=True)
class EchelonResult:
    """Row echelon form of an augmented matrix plus the solvability verdict."""

    echelon: Matrix
    consistent: bool
    free_cols: tuple[int, ...]
    pivot_cols: tuple[int, ...]
    ncoef: int

    def solution(self) -> list[int] | None:
        """A particular solution with all free variables set to zero."""
        if not self.consistent:
            return None
        x = [0] * self.ncoef
        rows = self.echelon.data
        for r in range(len(self.pivot_cols) - 1, -1, -1):
            c = self.pivot_cols[r]
            row = rows[r]
            acc = row[self.ncoef]
            for j in range(c + 1, self.ncoef):
                if row[j]:
                    acc -= row[j] * x[j]
            x[c] = acc % PRIME  # pivot entries are normalized to 1
        return x


def row_echelon(aug: Matrix, ncoef: int | None = None) -> EchelonResult:
    """Bring an augmented matrix to row echelon form over GF(p).

    The matrix is interpreted as ``ncoef`` coefficient columns followed by
    constant columns (by default a single trailing one).  The system is
    inconsistent exactly when a row has an all-zero coefficient part next to
    a nonzero constant.  Pivot rows are scaled so every pivot equals 1.
    """
    rows = [row[:] for row in aug.data]
    nrows = len(rows)
    width = len(rows[0]) if rows else 0
    if ncoef is None:
        ncoef = max(width - 1, 0)
    pivots: list[int] = []
    pr = 0
    for c in range(ncoef):
        if pr >= nrows:
            break
        sel = next((r for r in range(pr, nrows) if rows[r][c]), None)
        if sel is None:
            continue
        if sel != pr:
            rows[pr], rows[sel] = rows[sel], rows[pr]
        piv = rows[pr]
        pinv = inv(piv[c])
        if pinv != 1:
            piv[c:] = [(x * pinv) % PRIME for x in piv[c:]]
        for r in range(pr + 1, nrows):
            f = rows[r][c]
            if f:
                rr = rows[r]
                rr[c:] = [(x - f * y) % PRIME for x, y in zip(rr[c:], piv[c:])]
        pivots.append(c)
        pr += 1
    consistent = True
    for row in rows:
        if any(row[:ncoef]):
            continue
        if any(row[ncoef:]):
            consistent = False
            break
    pivot_set = set(pivots)
    free = tuple(c for c in range(ncoef) if c not in pivot_set)
    return EchelonResult(Matrix(rows), consistent, free, tuple(pivots), ncoef)


@dataclass(frozen=True)
class LupFactors:
    """P*Mt = L*U over GF(p), plus y solving L*y = P*e."""

    perm: tuple[int, ...]
    L: Matrix
    U: Matrix
    y: tuple[int, ...]


def lup_factor(mt: Matrix, e: Sequence[int]) -> LupFactors:
    """Factor P*Mt = L*U with partial row pivoting and solve L*y = P*e.

    Columns whose remaining entries are all zero are skipped, which leaves U
    upper trapezoidal (echelon-shaped) and makes the factorization total.
    A defensive re-multiplication guards the invariant; a mismatch raises
    UnfactorableError so callers can fall back to plain elimination.
    """
    d = mt.rows
    m = mt.cols
    if len(e) != d:
        raise ValueError("length of e must match row count of Mt")
    U = [row[:] for row in mt.data]
    L = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    perm = list(range(d))
    pr = 0
    for c in range(m):
        if pr >= d:
            break
        sel = next((r for r in range(pr, d) if U[r][c]), None)
        if sel is None:
            continue
        if sel != pr:
            U[pr], U[sel] = U[sel], U[pr]
            perm[pr], perm[sel] = perm[sel], perm[pr]
            L[pr][:pr], L[sel][:pr] = L[sel][:pr], L[pr][:pr]
        pinv = inv(U[pr][c])
        for r in range(pr + 1, d):
            f = U[r][c]
            if f:
                fac = (f * pinv) % PRIME
                L[r][pr] = fac
                ur = U[r]
                ur[c:] = [(x - fac * y) % PRIME for x, y in zip(ur[c:], U[pr][c:])]
        pr += 1
    pe = [e[perm[i]] % PRIME for i in range(d)]
    y: list[int] = []
    for i in range(d):
        acc = pe[i]
        li = L[i]
        for j in range(i):
            if li[j]:
                acc -= li[j] * y[j]
        y.append(acc % PRIME)
    lmat = Matrix(L)
    umat = Matrix(U)
    permuted = Matrix([mt.data[perm[i]] for i in range(d)])
    if lmat.matmul(umat) != permuted:
        raise UnfactorableError("partial row pivoting failed to reproduce P*Mt")
    return LupFactors(tuple(perm), lmat, umat, tuple(y))

"""Monotone span programs over GF(p): construction from formulas and
acceptance checking.

An MSP is a matrix M with party-labeled rows and the fixed target vector
e1 = (1, 0, ..., 0).  A party set A is accepted when the rows owned by A
span e1, i.e. the system M_A^T x = e1 is solvable; the solution x is the
recombination vector over A's rows.  Construction starts from Vandermonde
matrices for plain thresholds and composes nested operators by insertion:
the single row of a fresh virtual party is replaced by the sub-program's
row block.

Checking is plain Gaussian elimination on the augmented system, or the
prepared LUP route that eliminates only the column selection of U.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from gbqs import field_linalg as fl
from gbqs.field_linalg import PRIME, Matrix, UnfactorableError
from gbqs.formula import Formula, Literal, Threshold, desugar


class _Virtual:
    """Placeholder owner for a nested operator during construction."""

    __slots__ = ("tag",)

    def __init__(self, tag: int):
        self.tag = tag

    def __repr__(self) -> str:
        return f"<virtual {self.tag}>"


class Msp:
    """Labeled matrix over GF(p) with target vector e1."""

    __slots__ = ("matrix", "labels")

    def __init__(self, matrix: Sequence[Sequence[int]], labels: Sequence[Hashable]):
        rows = [[x % PRIME for x in row] for row in matrix]
        if len(rows) != len(labels):
            raise ValueError("one label per row required")
        if not rows:
            raise ValueError("MSP needs at least one row")
        width = len(rows[0])
        if width == 0 or any(len(r) != width for r in rows):
            raise ValueError("rows must be non-empty and rectangular")
        self.matrix = rows
        self.labels = list(labels)

    @property
    def m(self) -> int:
        return len(self.matrix)

    @property
    def d(self) -> int:
        return len(self.matrix[0])

    @property
    def universe(self) -> tuple[str, ...]:
        if any(not isinstance(lab, str) for lab in self.labels):
            raise ValueError("MSP still carries virtual owners")
        return tuple(sorted(set(self.labels)))

    def rows_of(self, party: Hashable) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == party]

    def e1(self) -> list[int]:
        return [1] + [0] * (self.d - 1)

    def dump(self) -> str:
        """Plain-text dump: "m d p", m rows of residues, m label lines."""
        lines = [f"{self.m} {self.d} {PRIME}"]
        lines.extend(" ".join(str(x) for x in row) for row in self.matrix)
        lines.extend(str(lab) for lab in self.labels)
        return "\n".join(lines) + "\n"

    @staticmethod
    def load(text: str) -> "Msp":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        try:
            m, d, p = (int(x) for x in lines[0].split())
        except (ValueError, IndexError):
            raise ValueError("malformed MSP dump header") from None
        if p != PRIME:
            raise ValueError(f"dump uses modulus {p}, this build is fixed to {PRIME}")
        if len(lines) != 1 + 2 * m:
            raise ValueError("malformed MSP dump: wrong line count")
        rows = []
        for ln in lines[1 : 1 + m]:
            row = [int(x) for x in ln.split()]
            if len(row) != d:
                raise ValueError("malformed MSP dump: wrong row width")
            rows.append(row)
        labels = lines[1 + m :]
        return Msp(rows, labels)

    def __repr__(self) -> str:
        return f"Msp(m={self.m}, d={self.d}, parties={len(set(self.labels))})"


@dataclass(frozen=True)
class AcceptanceWitness:
    accepted: bool
    row_indices: tuple[int, ...]
    lam: tuple[int, ...] | None
    redundant: frozenset[str]

    def verify(self, msp: Msp) -> bool:
        """Re-multiply the recombination vector: lam * M_A must equal e1."""
        if not self.accepted or self.lam is None:
            return False
        d = msp.d
        acc = [0] * d
        for coeff, idx in zip(self.lam, self.row_indices):
            if coeff:
                row = msp.matrix[idx]
                for j in range(d):
                    acc[j] = (acc[j] + coeff * row[j]) % PRIME
        return acc == msp.e1()


def vandermonde_msp(n: int, t: int, members: Sequence[Hashable]) -> Msp:
    """The t-of-n threshold MSP: row i evaluates x_i = i+1 at powers 0..t-1."""
    if len(members) != n:
        raise ValueError("need exactly n owners")
    if not 1 <= t <= n:
        raise ValueError(f"threshold {t} out of range for {n} rows")
    if n >= PRIME:
        raise ValueError("too many rows for distinct nonzero evaluation points")
    rows = [[pow(i + 1, j, PRIME) for j in range(t)] for i in range(n)]
    return Msp(rows, members)


def insert(m1: Msp, z: int, m2: Msp) -> Msp:
    """Replace row z of m1 by the row block of m2.

    Row z (which its owner must own exclusively) is repeated once per row of
    m2, scaled by that row's first column, with m2's remaining columns
    appended; all other rows are zero-padded on the right.
    """
    if not 0 <= z < m1.m:
        raise ValueError("row index out of range")
    owner = m1.labels[z]
    if m1.labels.count(owner) != 1:
        raise ValueError(f"owner of row {z} must own exactly that row")
    d2 = m2.d
    pad = [0] * (d2 - 1)
    rz = m1.matrix[z]
    rows: list[list[int]] = []
    labels: list[Hashable] = []
    for i in range(z):
        rows.append(m1.matrix[i] + pad)
        labels.append(m1.labels[i])
    for w in range(m2.m):
        sub = m2.matrix[w]
        c = sub[0]
        rows.append([x * c % PRIME for x in rz] + sub[1:])
        labels.append(m2.labels[w])
    for i in range(z + 1, m1.m):
        rows.append(m1.matrix[i] + pad)
        labels.append(m1.labels[i])
    return Msp(rows, labels)


def build_msp(f: Formula) -> Msp:
    """Construct an MSP accepting exactly the sets that satisfy the formula.

    and/or nodes are desugared to thresholds first.  Each nested operator
    gets a fresh virtual party owning a single Vandermonde row, and the
    recursively built sub-program is inserted at that row.
    """
    g = desugar(f)
    counter = 0

    def fresh() -> _Virtual:
        nonlocal counter
        counter += 1
        return _Virtual(counter)

    def rec(node: Formula) -> Msp:
        if isinstance(node, Literal):
            return Msp([[1]], [node.party])
        assert isinstance(node, Threshold)
        owners: list[Hashable] = []
        nested: list[tuple[_Virtual, Formula]] = []
        for child in node.children:
            if isinstance(child, Literal):
                owners.append(child.party)
            else:
                v = fresh()
                owners.append(v)
                nested.append((v, child))
        msp = vandermonde_msp(len(node.children), node.k, owners)
        for v, child in nested:
            sub = rec(child)
            rows = msp.rows_of(v)
            msp = insert(msp, rows[0], sub)
        return msp

    out = rec(g)
    if any(isinstance(lab, _Virtual) for lab in out.labels):
        raise AssertionError("virtual owner escaped construction")
    return out


def predicted_dims(f: Formula) -> tuple[int, int]:
    """Expected (rows, cols) of build_msp(f): sums of operator arities and
    thresholds, minus the operator count, plus one."""
    g = desugar(f)
    if isinstance(g, Literal):
        return (1, 1)
    ops: list[Threshold] = []
    stack: list[Formula] = [g]
    while stack:
        node = stack.pop()
        if isinstance(node, Threshold):
            ops.append(node)
            stack.extend(node.children)
    c = len(ops)
    m = sum(len(op.children) for op in ops) - c + 1
    d = sum(op.k for op in ops) - c + 1
    return (m, d)


def _selected_columns(msp: Msp, members: Iterable[str]) -> list[int]:
    aset = members if isinstance(members, (set, frozenset)) else frozenset(members)
    unknown = aset - set(msp.labels)
    if unknown:
        raise ValueError(f"parties not in this MSP: {sorted(unknown)}")
    return [i for i, lab in enumerate(msp.labels) if lab in aset]


def _witness(
    msp: Msp,
    rows_idx: list[int],
    result: fl.EchelonResult,
) -> AcceptanceWitness:
    if not result.consistent:
        return AcceptanceWitness(False, tuple(rows_idx), None, frozenset())
    lam = result.solution()
    assert lam is not None
    free = set(result.free_cols)
    owners: dict[str, list[int]] = {}
    for pos, idx in enumerate(rows_idx):
        owners.setdefault(msp.labels[idx], []).append(pos)
    redundant = frozenset(
        p for p, positions in owners.items() if all(pos in free for pos in positions)
    )
    return AcceptanceWitness(True, tuple(rows_idx), tuple(lam), redundant)


def accepts(msp: Msp, members: Iterable[str]) -> AcceptanceWitness:
    """Check acceptance of a party set by eliminating M_A^T | e1.

    The set is accepted iff the augmented system is consistent; redundant
    parties are those all of whose rows map to free variables.
    """
    rows_idx = _selected_columns(msp, members)
    d = msp.d
    mat = msp.matrix
    aug = [[mat[i][r] for i in rows_idx] + [1 if r == 0 else 0] for r in range(d)]
    result = fl.row_echelon(Matrix(aug), ncoef=len(rows_idx))
    return _witness(msp, rows_idx, result)


class LupChecker:
    """Prepared quorum checker: factor P*M^T = L*U once, then each check
    only eliminates the columns of U owned by the queried set.

    Raises UnfactorableError at construction when the factorization is
    unavailable; callers fall back to plain ``accepts``.
    """

    __slots__ = ("msp", "factors")

    def __init__(self, msp: Msp):
        mt = Matrix([list(col) for col in zip(*msp.matrix)])
        self.msp = msp
        self.factors = fl.lup_factor(mt, msp.e1())

    def accepts(self, members: Iterable[str]) -> AcceptanceWitness:
        rows_idx = _selected_columns(self.msp, members)
        u = self.factors.U.data
        y = self.factors.y
        d = self.msp.d
        aug = [[u[r][i] for i in rows_idx] + [y[r]] for r in range(d)]
        result = fl.row_echelon(Matrix(aug), ncoef=len(rows_idx))
        return _witness(self.msp, rows_idx, result)


def accepts_lup(checker: LupChecker, members: Iterable[str]) -> AcceptanceWitness:
    """Functional form of the prepared-LUP check."""
    return checker.accepts(members)


__all__ = [
    "Msp",
    "AcceptanceWitness",
    "vandermonde_msp",
    "insert",
    "build_msp",
    "predicted_dims",
    "accepts",
    "LupChecker",
    "accepts_lup",
    "UnfactorableError",
]

"""Monotone Boolean formulas over party identifiers and the quorum-system
verifications built on them.

A formula is a tree of ``and`` / ``or`` / ``threshold`` operators whose
leaves name parties; ``and`` and ``or`` are sugar for m-of-m and 1-of-m
thresholds.  A set of parties satisfies the formula exactly when it is a
quorum (or a superset of one) of the encoded Byzantine quorum system.

Minimal-quorum enumeration composes the minimal families bottom-up: every
minimal set of a k-of-m node is the union of minimal sets of exactly k
children, and by monotonicity a satisfying set is minimal iff removing any
single party breaks it.  Verification of the definitional properties
(Q3, consistency, availability) works on integer bitmasks internally.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Mapping, Union

Party = str


@dataclass(frozen=True)
class Literal:
    party: Party


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("and-node needs at least one child")


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("or-node needs at least one child")


@dataclass(frozen=True)
class Threshold:
    k: int
    children: tuple["Formula", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("threshold needs at least one child")
        if not 1 <= self.k <= len(self.children):
            raise ValueError(
                f"threshold {self.k} out of range for {len(self.children)} children"
            )


Formula = Union[Literal, And, Or, Threshold]


def evaluate(f: Formula, subset: Iterable[Party]) -> bool:
    """True iff ``subset`` satisfies the formula (is a quorum or superset)."""
    members = subset if isinstance(subset, (set, frozenset)) else frozenset(subset)

    def rec(node: Formula) -> bool:
        if isinstance(node, Literal):
            return node.party in members
        if isinstance(node, And):
            return all(rec(c) for c in node.children)
        if isinstance(node, Or):
            return any(rec(c) for c in node.children)
        count = 0
        for c in node.children:
            if rec(c):
                count += 1
                if count >= node.k:
                    return True
        return False

    return rec(f)


def parties(f: Formula) -> frozenset[Party]:
    """All party identifiers named by the formula's literals."""
    out: set[Party] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            out.add(node.party)
        else:
            stack.extend(node.children)
    return frozenset(out)


def desugar(f: Formula) -> Formula:
    """Rewrite and/or nodes to m-of-m / 1-of-m thresholds."""
    if isinstance(f, Literal):
        return f
    children = tuple(desugar(c) for c in f.children)
    if isinstance(f, And):
        return Threshold(len(children), children)
    if isinstance(f, Or):
        return Threshold(1, children)
    return Threshold(f.k, children)


def formula_size(f: Formula) -> int:
    """Number of nodes in the tree."""
    if isinstance(f, Literal):
        return 1
    return 1 + sum(formula_size(c) for c in f.children)


@dataclass(frozen=True)
class QuorumSystem:
    universe: tuple[Party, ...]
    quorums: tuple[frozenset[Party], ...]

    def validate(self) -> None:
        if not self.quorums:
            raise ValueError("quorum system must be non-empty")
        uni = set(self.universe)
        for q in self.quorums:
            if not q:
                raise ValueError("quorums must be non-empty")
            if not q <= uni:
                raise ValueError("quorum names parties outside the universe")
        for a, b in combinations(self.quorums, 2):
            if a <= b or b <= a:
                raise ValueError("quorums must form an antichain")


@dataclass(frozen=True)
class FailProneSystem:
    universe: tuple[Party, ...]
    sets: tuple[frozenset[Party], ...]

    def validate(self) -> None:
        uni = set(self.universe)
        for f in self.sets:
            if not f <= uni:
                raise ValueError("fail-prone set names parties outside the universe")
        for a, b in combinations(self.sets, 2):
            if a <= b or b <= a:
                raise ValueError("fail-prone sets must form an antichain")


def _sorted_sets(sets: Iterable[frozenset[Party]]) -> tuple[frozenset[Party], ...]:
    return tuple(sorted(sets, key=lambda s: (len(s), tuple(sorted(s)))))


def _masks(universe: tuple[Party, ...]) -> Mapping[Party, int]:
    return {p: 1 << i for i, p in enumerate(universe)}


def _mask_of(s: Iterable[Party], bits: Mapping[Party, int]) -> int:
    m = 0
    for p in s:
        m |= bits[p]
    return m


def _unmask(m: int, universe: tuple[Party, ...]) -> frozenset[Party]:
    return frozenset(p for i, p in enumerate(universe) if m >> i & 1)


def enumerate_minimal_quorums(f: Formula, max_universe: int = 24) -> QuorumSystem:
    """All minimal satisfying sets of the formula, as an antichain.

    Refuses universes larger than ``max_universe``: the candidate space can
    grow combinatorially and callers should opt in explicitly.
    """
    universe = tuple(sorted(parties(f)))
    if len(universe) > max_universe:
        raise ValueError(
            f"universe of {len(universe)} parties exceeds the bound {max_universe}"
        )
    bits = _masks(universe)
    g = desugar(f)

    def eval_mask(node: Formula, m: int) -> bool:
        if isinstance(node, Literal):
            return bool(m & bits[node.party])
        count = 0
        for c in node.children:
            if eval_mask(c, m):
                count += 1
                if count >= node.k:
                    return True
        return False

    def families(node: Formula) -> list[int]:
        if isinstance(node, Literal):
            return [bits[node.party]]
        fams = [families(c) for c in node.children]
        out: set[int] = set()
        for combo in combinations(range(len(fams)), node.k):
            for pick in product(*(fams[i] for i in combo)):
                u = 0
                for m in pick:
                    u |= m
                if u in out:
                    continue
                rest = u
                minimal = True
                while rest:
                    bit = rest & -rest
                    rest ^= bit
                    if eval_mask(node, u ^ bit):
                        minimal = False
                        break
                if minimal:
                    out.add(u)
        return list(out)

    quorums = _sorted_sets(_unmask(m, universe) for m in families(g))
    return QuorumSystem(universe, quorums)


def threshold_fail_prone(members: Iterable[Party], f: int) -> FailProneSystem:
    """The fail-prone system 'any f of the given parties'."""
    universe = tuple(sorted(members))
    if not 0 <= f <= len(universe):
        raise ValueError("f out of range")
    sets = tuple(frozenset(c) for c in combinations(universe, f))
    return FailProneSystem(universe, sets)


def fail_prone_from_quorums(qs: QuorumSystem) -> FailProneSystem:
    """Canonical fail-prone counterpart: complements of the quorums."""
    uni = frozenset(qs.universe)
    return FailProneSystem(qs.universe, _sorted_sets(uni - q for q in qs.quorums))


def _covered(target: int, fail_masks_desc: list[tuple[int, int]]) -> bool:
    """True iff some fail-prone mask is a superset of target.

    ``fail_masks_desc`` holds (popcount, mask) sorted by descending size, so
    the scan can stop as soon as the sets become too small to contain target.
    """
    need = target.bit_count()
    for size, fm in fail_masks_desc:
        if size < need:
            return False
        if target & ~fm == 0:
            return True
    return False


def _fail_masks_desc(fps: FailProneSystem, bits: Mapping[Party, int]) -> list[tuple[int, int]]:
    masks = []
    for s in fps.sets:
        m = _mask_of(s, bits)
        masks.append((m.bit_count(), m))
    masks.sort(key=lambda t: -t[0])
    return masks


def q3_holds(fps: FailProneSystem) -> bool:
    """True iff no three fail-prone sets (with repetition) cover the universe."""
    universe = tuple(sorted(fps.universe))
    bits = _masks(universe)
    full = (1 << len(universe)) - 1
    fmasks = [_mask_of(s, bits) for s in fps.sets]
    desc = _fail_masks_desc(fps, bits)
    for i, a in enumerate(fmasks):
        for b in fmasks[i:]:
            rest = full & ~(a | b)
            if rest == 0 or _covered(rest, desc):
                return False
    return True


@dataclass(frozen=True)
class BqsReport:
    ok: bool
    consistency_ok: bool
    availability_ok: bool
    pairs_checked: int
    sampled: bool
    violation: str | None = None

    def __str__(self) -> str:
        if self.ok:
            mode = "sampled" if self.sampled else "exhaustive"
            return f"ok ({self.pairs_checked} pairs, {mode})"
        return f"violation: {self.violation}"


def verify_bqs(
    qs: QuorumSystem,
    fps: FailProneSystem,
    max_pairs: int | None = None,
    seed: int = 0,
) -> BqsReport:
    """Check Consistency and Availability of a quorum system against a
    fail-prone system.

    Consistency is checked over all quorum pairs, or over ``max_pairs``
    seeded random pairs when the pair count exceeds that bound.
    Availability is always checked for every fail-prone set.
    """
    if tuple(sorted(qs.universe)) != tuple(sorted(fps.universe)):
        raise ValueError("quorum system and fail-prone system disagree on the universe")
    universe = tuple(sorted(qs.universe))
    bits = _masks(universe)
    full = (1 << len(universe)) - 1
    qmasks = [_mask_of(q, bits) for q in qs.quorums]
    desc = _fail_masks_desc(fps, bits)
    fmasks = [_mask_of(s, bits) for s in fps.sets]

    nq = len(qmasks)
    total_pairs = nq * (nq + 1) // 2
    sampled = max_pairs is not None and total_pairs > max_pairs
    consistency_ok = True
    availability_ok = True
    violation = None
    pairs_checked = 0

    def check_pair(i: int, j: int) -> bool:
        inter = qmasks[i] & qmasks[j]
        return not _covered(inter, desc)

    if sampled:
        rng = random.Random(seed)
        for _ in range(max_pairs):
            i = rng.randrange(nq)
            j = rng.randrange(nq)
            pairs_checked += 1
            if not check_pair(i, j):
                consistency_ok = False
                violation = (
                    f"consistency: intersection of {sorted(qs.quorums[i])} and "
                    f"{sorted(qs.quorums[j])} lies inside a fail-prone set"
                )
                break
    else:
        done = False
        for i in range(nq):
            for j in range(i, nq):
                pairs_checked += 1
                if not check_pair(i, j):
                    consistency_ok = False
                    violation = (
                        f"consistency: intersection of {sorted(qs.quorums[i])} and "
                        f"{sorted(qs.quorums[j])} lies inside a fail-prone set"
                    )
                    done = True
                    break
            if done:
                break

    if consistency_ok:
        qmask_index = set(qmasks)
        for fm in fmasks:
            # canonical systems contain the exact complement of every fail set
            if (full & ~fm) in qmask_index:
                continue
            if not any(qm & fm == 0 for qm in qmasks):
                availability_ok = False
                violation = (
                    f"availability: no quorum avoids fail-prone set "
                    f"{sorted(_unmask(fm, universe))}"
                )
                break

    ok = consistency_ok and availability_ok
    return BqsReport(ok, consistency_ok, availability_ok, pairs_checked, sampled, violation)


def canonical_bqs(fps: FailProneSystem) -> QuorumSystem:
    """The bijective-complement quorum system of a Q3 fail-prone system."""
    if not q3_holds(fps):
        raise ValueError("fail-prone system violates the Q3 condition; no BQS exists")
    uni = frozenset(fps.universe)
    return QuorumSystem(tuple(sorted(fps.universe)), _sorted_sets(uni - f for f in fps.sets))

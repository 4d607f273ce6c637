"""Generators for the named quorum-system families.

* two-layer-one-common (2L1C): k trusted first-layer parties A0..A{k-1}
  over 3k second-layer parties B0..B{3k-1}; a quorum is a strict 2/3
  majority of the A's, each bringing 2-of-4 B's from its stride-3 window
  (windows wrap mod 3k and overlap at the endpoints).
* attribute-based systems: parties hold attributes, the trust assumption
  is a formula over attributes with per-attribute multiplicities, and the
  span program substitutes an L_i x l_i Vandermonde block per attribute.
* M-Grid: k x k grid, quorums are s full rows plus s full columns with
  s = ceil(sqrt(b/2 + 1)), tolerating b Byzantine parties.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from gbqs.formula import And, Formula, Literal, Or, Threshold, parties
from gbqs.msp import Msp, build_msp, insert, vandermonde_msp


def two_layer_parties(k: int) -> tuple[str, ...]:
    return tuple(f"A{i}" for i in range(k)) + tuple(f"B{i}" for i in range(3 * k))


def two_layer_one_common(k: int) -> Formula:
    """The 2L1C formula for a given k.

    Window l covers B_{3l}..B_{3l+3} with indices mod 3k; for small k the
    wrap can repeat a party inside one window, in which case duplicates are
    dropped and the window arity shrinks (the 2-of threshold is kept).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n2 = 3 * k
    conjuncts = []
    for ell in range(k):
        window: list[str] = []
        for j in range(4):
            name = f"B{(3 * ell + j) % n2}"
            if name not in window:
                window.append(name)
        inner = Threshold(min(2, len(window)), tuple(Literal(b) for b in window))
        conjuncts.append(And((Literal(f"A{ell}"), inner)))
    outer_k = (2 * k + 1 + 2) // 3  # ceil((2k+1)/3)
    return Threshold(outer_k, tuple(conjuncts))


def two_layer_quorum_forms(k: int) -> set[frozenset[str]]:
    """The distinct quorum sets of the constructive reading of 2L1C.

    Each set is an exact 2/3-majority choice of first-layer parties together
    with one 2-of-window pick per chosen party.  Unlike the minimal basis,
    this family is generally not an antichain: overlapping windows let one
    selection contain another.  At k = 4 there are 792 such sets, while the
    minimal basis has only 216.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n2 = 3 * k
    windows = []
    for ell in range(k):
        seen: list[str] = []
        for j in range(4):
            name = f"B{(3 * ell + j) % n2}"
            if name not in seen:
                seen.append(name)
        windows.append(seen)
    outer_k = (2 * k + 1 + 2) // 3
    forms: set[frozenset[str]] = set()
    for chosen in combinations(range(k), outer_k):
        picks = [list(combinations(windows[ell], 2)) for ell in chosen]

        def rec(i: int, acc: frozenset[str]) -> None:
            if i == len(chosen):
                forms.add(acc)
                return
            for pick in picks[i]:
                rec(i + 1, acc | frozenset(pick))

        rec(0, frozenset(f"A{ell}" for ell in chosen))
    return forms


@dataclass(frozen=True)
class AttributeSystem:
    """Attributes, the parties holding them, and required multiplicities.

    ``holders[a]`` lists the parties related to attribute ``a`` (so L_a is
    its length); ``multiplicities[a]`` is how many holders a quorum must
    contribute (l_a <= L_a).
    """

    holders: Mapping[str, tuple[str, ...]]
    multiplicities: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(
            self, "holders", {a: tuple(ps) for a, ps in dict(self.holders).items()}
        )
        object.__setattr__(self, "multiplicities", dict(self.multiplicities))
        for attr, held in self.holders.items():
            if len(set(held)) != len(held) or not held:
                raise ValueError(f"attribute {attr!r} needs a non-empty set of holders")
            ell = self.multiplicities.get(attr, 1)
            if not 1 <= ell <= len(held):
                raise ValueError(
                    f"multiplicity {ell} of attribute {attr!r} exceeds its {len(held)} holders"
                )

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(self.holders)

    @property
    def all_parties(self) -> tuple[str, ...]:
        out: list[str] = []
        seen = set()
        for held in self.holders.values():
            for p in held:
                if p not in seen:
                    seen.add(p)
                    out.append(p)
        return tuple(out)

    def multiplicity(self, attr: str) -> int:
        return self.multiplicities.get(attr, 1)


def _check_attribute_literals(system: AttributeSystem, f_attr: Formula) -> None:
    unknown = parties(f_attr) - set(system.attributes)
    if unknown:
        raise ValueError(f"formula names unknown attributes: {sorted(unknown)}")


def attribute_formula(system: AttributeSystem, f_attr: Formula) -> Formula:
    """Party-level formula: each attribute literal becomes an l-of-L
    threshold over the attribute's holders."""
    _check_attribute_literals(system, f_attr)

    def sub(node: Formula) -> Formula:
        if isinstance(node, Literal):
            held = system.holders[node.party]
            return Threshold(
                system.multiplicity(node.party), tuple(Literal(p) for p in held)
            )
        if isinstance(node, And):
            return And(tuple(sub(c) for c in node.children))
        if isinstance(node, Or):
            return Or(tuple(sub(c) for c in node.children))
        return Threshold(node.k, tuple(sub(c) for c in node.children))

    return sub(f_attr)


def attribute_msp(system: AttributeSystem, f_attr: Formula) -> Msp:
    """Span program for an attribute-level formula.

    Builds the MSP over attributes first, then replaces every row owned by
    an attribute with the L x l Vandermonde block labeled by its holders,
    leaving a program defined on the parties alone.
    """
    _check_attribute_literals(system, f_attr)
    msp = build_msp(f_attr)
    order: list[str] = []
    seen: set[str] = set()
    stack: list[Formula] = [f_attr]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            if node.party not in seen:
                seen.add(node.party)
                order.append(node.party)
        else:
            stack.extend(reversed(node.children))
    for attr in order:
        held = system.holders[attr]
        ell = system.multiplicity(attr)
        while True:
            rows = msp.rows_of(attr)
            if not rows:
                break
            block = vandermonde_msp(len(held), ell, held)
            msp = insert(msp, rows[0], block)
    return msp


@dataclass(frozen=True)
class GridLayout:
    """n = k*k parties arranged in a square, tolerating b Byzantine ones."""

    k: int
    b: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("grid side must be at least 1")
        if not 0 <= self.b <= self.k - 1:
            raise ValueError(f"b must satisfy 0 <= b <= sqrt(n) - 1 = {self.k - 1}")

    @property
    def side(self) -> int:
        return self.k

    def party(self, i: int, j: int) -> str:
        return f"s{i}_{j}"

    @property
    def all_parties(self) -> tuple[str, ...]:
        return tuple(self.party(i, j) for i in range(self.k) for j in range(self.k))

    @property
    def lines_needed(self) -> int:
        """Smallest integer s with s*s >= b/2 + 1."""
        s = 1
        while 2 * s * s < self.b + 2:
            s += 1
        return s


def mgrid(layout: GridLayout) -> tuple[Formula, Msp]:
    """Formula and span program of the dissemination-style M-Grid.

    The trust assumption is attribute-based: one attribute per grid row and
    per grid column, each held by its k parties with multiplicity k, and a
    quorum needs s full rows and s full columns.
    """
    k = layout.k
    s = layout.lines_needed
    holders: dict[str, tuple[str, ...]] = {}
    for i in range(k):
        holders[f"R{i}"] = tuple(layout.party(i, j) for j in range(k))
    for j in range(k):
        holders[f"C{j}"] = tuple(layout.party(i, j) for i in range(k))
    system = AttributeSystem(holders, {a: k for a in holders})
    f_attr = And(
        (
            Threshold(s, tuple(Literal(f"R{i}") for i in range(k))),
            Threshold(s, tuple(Literal(f"C{j}") for j in range(k))),
        )
    )
    return attribute_formula(system, f_attr), attribute_msp(system, f_attr)


def os_location_system() -> tuple[AttributeSystem, Formula]:
    """The 16-party example: four locations crossed with four operating
    systems, each party holding one attribute of each family, quorums need
    three parties for at least three values of each family."""
    locations = [f"loc{i}" for i in range(1, 5)]
    systems = [f"os{j}" for j in range(1, 5)]
    holders: dict[str, tuple[str, ...]] = {a: () for a in locations + systems}
    for i in range(1, 5):
        for j in range(1, 5):
            p = f"p{i}{j}"
            holders[f"loc{i}"] += (p,)
            holders[f"os{j}"] += (p,)
    system = AttributeSystem(holders, {a: 3 for a in holders})
    f_attr = And(
        (
            Threshold(3, tuple(Literal(a) for a in locations)),
            Threshold(3, tuple(Literal(a) for a in systems)),
        )
    )
    return system, f_attr

"""The JSON quorum-specification format.

A specification node is either a party identifier (a JSON string) or one
of the operator objects::

    {"threshold": k, "of": [child, ...]}
    {"and": [child, ...]}
    {"or":  [child, ...]}

A document is either a bare node or a wrapper object::

    {"v": 1, "parties": ["p1", ...], "quorums": <node>}

The wrapper's party list, when present, declares the universe: every
literal must be drawn from it.  ``emit_spec`` always produces the wrapper
form with two-space indentation and a trailing newline; that rendering is
the byte-exact contract used by golden-file tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from gbqs.formula import And, Formula, Literal, Or, Threshold, parties

FORMAT_VERSION = 1


class SpecError(ValueError):
    """Malformed quorum specification; carries the JSON path of the fault."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{message} (at {path})")
        self.path = path


@dataclass(frozen=True)
class SpecDocument:
    version: int
    declared_parties: tuple[str, ...] | None
    formula: Formula

    @property
    def universe(self) -> tuple[str, ...]:
        if self.declared_parties is not None:
            return self.declared_parties
        return tuple(sorted(parties(self.formula)))


def _node_from_obj(obj: Any, declared: set[str] | None, path: str) -> Formula:
    if isinstance(obj, str):
        if declared is not None and obj not in declared:
            raise SpecError(f"party {obj!r} is not declared in the universe", path)
        return Literal(obj)
    if not isinstance(obj, dict):
        raise SpecError(f"expected a party string or an operator object, got {type(obj).__name__}", path)
    keys = set(obj)
    if keys == {"threshold", "of"}:
        k = obj["threshold"]
        if not isinstance(k, int) or isinstance(k, bool):
            raise SpecError("threshold value must be an integer", f"{path}.threshold")
        children = obj["of"]
        if not isinstance(children, list) or not children:
            raise SpecError("'of' must be a non-empty list", f"{path}.of")
        if not 1 <= k <= len(children):
            raise SpecError(
                f"threshold {k} out of range for {len(children)} children",
                f"{path}.threshold",
            )
        return Threshold(
            k,
            tuple(
                _node_from_obj(c, declared, f"{path}.of[{i}]")
                for i, c in enumerate(children)
            ),
        )
    if keys == {"and"} or keys == {"or"}:
        op = "and" if "and" in keys else "or"
        children = obj[op]
        if not isinstance(children, list) or not children:
            raise SpecError(f"'{op}' must be a non-empty list", f"{path}.{op}")
        parsed = tuple(
            _node_from_obj(c, declared, f"{path}.{op}[{i}]")
            for i, c in enumerate(children)
        )
        return And(parsed) if op == "and" else Or(parsed)
    raise SpecError(f"unknown operator keys {sorted(keys)}", path)


def parse_spec_document(text: str | bytes) -> SpecDocument:
    """Parse a full specification document, wrapper or bare node."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc.msg}", f"$:{exc.lineno}:{exc.colno}") from None
    declared: tuple[str, ...] | None = None
    version = FORMAT_VERSION
    root = obj
    root_path = "$"
    if isinstance(obj, dict) and "quorums" in obj:
        extra = set(obj) - {"v", "parties", "quorums"}
        if extra:
            raise SpecError(f"unknown document keys {sorted(extra)}", "$")
        if "v" in obj:
            version = obj["v"]
            if version != FORMAT_VERSION:
                raise SpecError(f"unsupported format version {version!r}", "$.v")
        if "parties" in obj:
            plist = obj["parties"]
            if (
                not isinstance(plist, list)
                or not plist
                or any(not isinstance(p, str) for p in plist)
            ):
                raise SpecError("'parties' must be a non-empty list of strings", "$.parties")
            if len(set(plist)) != len(plist):
                raise SpecError("duplicate party in universe", "$.parties")
            declared = tuple(plist)
        root = obj["quorums"]
        root_path = "$.quorums"
    formula = _node_from_obj(root, set(declared) if declared is not None else None, root_path)
    return SpecDocument(version, declared, formula)


def parse_spec(text: str | bytes) -> Formula:
    """Parse a specification and return just the formula."""
    return parse_spec_document(text).formula


def parse_node(obj: Any, declared: set[str] | None = None, path: str = "$") -> Formula:
    """Parse one already-decoded specification node (for embedding the
    quorum grammar inside other documents)."""
    return _node_from_obj(obj, declared, path)


def _node_to_obj(f: Formula) -> Any:
    if isinstance(f, Literal):
        return f.party
    if isinstance(f, And):
        return {"and": [_node_to_obj(c) for c in f.children]}
    if isinstance(f, Or):
        return {"or": [_node_to_obj(c) for c in f.children]}
    return {"threshold": f.k, "of": [_node_to_obj(c) for c in f.children]}


def emit_spec(f: Formula, declared_parties: tuple[str, ...] | None = None) -> bytes:
    """Canonical serialization of a formula.

    Children keep their original order; and/or stay explicit operator keys.
    The universe defaults to the sorted set of literals.
    """
    doc = {
        "v": FORMAT_VERSION,
        "parties": list(declared_parties) if declared_parties is not None else sorted(parties(f)),
        "quorums": _node_to_obj(f),
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")

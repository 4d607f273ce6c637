"""HotStuff replica state machines parameterized by a quorum checker.

Two deterministic, network-agnostic variants:

* ``BasicReplica`` runs the four-phase protocol: per view the leader gathers
  new-view messages from a quorum, proposes, and drives prepare /
  pre-commit / commit / decide, each phase certified by a quorum of signed
  votes.
* ``ChainedReplica`` runs the pipelined protocol: one generic phase per
  proposal, votes routed to the next leader, and the three-chain rule
  (grandchild certified with direct parent links) committing a node.

Machines consume one input at a time (message, timeout, beat) and return an
``Out`` value with the messages, relative timers, trace notes, and decisions
the input produced.  All timing, delivery, and randomness live in the
simulation harness; identical (state, input) always yields identical output.

Quorum formation is delegated to a checker object so the same machines run
against counting, formula, or span-program trust assumptions.  Certificates
are concatenations of per-replica vote signatures; the default signer is a
keyed MAC, swappable behind the same interface.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

from gbqs.formula import Formula, evaluate
from gbqs.msp import LupChecker, Msp, UnfactorableError, accepts

NEW_VIEW = "new-view"
PREPARE = "prepare"
PRE_COMMIT = "pre-commit"
COMMIT = "commit"
DECIDE = "decide"
GENERIC = "generic"
GENERIC_VOTE = "generic-vote"

GENESIS_ID = "genesis"
_PHASES = (PREPARE, PRE_COMMIT, COMMIT)
_TIMEOUT_DOUBLINGS_CAP = 6


@dataclass(frozen=True)
class QuorumCert:
    type: str
    view: int
    node: str
    sig: tuple[tuple[int, str], ...]


GENESIS_QC = QuorumCert("genesis", 0, GENESIS_ID, ())


@dataclass(frozen=True)
class BlockNode:
    id: str
    parent: str
    cmd: str
    height: int
    justify: QuorumCert | None = None


GENESIS = BlockNode(GENESIS_ID, "", "", 0, GENESIS_QC)


@dataclass(frozen=True)
class Message:
    type: str
    view: int
    node: BlockNode | None
    justify: QuorumCert | None
    sender: int
    sig: str | None = None

    @property
    def is_vote(self) -> bool:
        return self.sig is not None


def make_node(
    parent: BlockNode, cmd: str, height: int, justify: QuorumCert | None = None
) -> BlockNode:
    raw = f"{parent.id}|{cmd}|{height}"
    if justify is not None:
        raw += f"|{justify.type}:{justify.view}:{justify.node}"
    node_id = hashlib.sha256(raw.encode()).hexdigest()[:16]
    return BlockNode(node_id, parent.id, cmd, height, justify)


def leader_of(view: int, n: int) -> int:
    if n < 1:
        raise ValueError("need at least one replica")
    return view % n


def vote_payload(kind: str, number: int, node_id: str) -> bytes:
    return f"{kind}|{number}|{node_id}".encode()


class SignerRegistry:
    """Deterministic keyed-MAC test signer; one key per replica index."""

    def __init__(self, seed: int, n: int):
        self.n = n
        self._keys = [
            hashlib.sha256(f"key|{seed}|{i}".encode()).digest() for i in range(n)
        ]

    def sign(self, index: int, payload: bytes) -> str:
        return hmac.new(self._keys[index], payload, "sha256").hexdigest()[:32]

    def verify(self, index: int, payload: bytes, sig: str) -> bool:
        if not 0 <= index < self.n:
            return False
        return hmac.compare_digest(self.sign(index, payload), sig)


class FaultKeys:
    """Signing capability restricted to the colluding replica set."""

    def __init__(self, registry: SignerRegistry, allowed: Iterable[int]):
        self._registry = registry
        self.allowed = frozenset(allowed)

    def sign(self, index: int, payload: bytes) -> str:
        if index not in self.allowed:
            raise PermissionError(f"no key for replica {index}")
        return self._registry.sign(index, payload)


class QuorumChecker(Protocol):
    def is_quorum(self, indices: Iterable[int]) -> bool: ...


class CountingQuorum:
    """Threshold rule: any n - f distinct replicas form a quorum."""

    def __init__(self, n: int, f: int):
        if not 0 <= f < n:
            raise ValueError("need 0 <= f < n")
        self.n = n
        self.f = f

    def is_quorum(self, indices: Iterable[int]) -> bool:
        return len(set(indices)) >= self.n - self.f


class FormulaQuorum:
    """Quorum rule evaluated on a monotone formula over the party names."""

    def __init__(self, formula: Formula, parties: Sequence[str]):
        self.formula = formula
        self.parties = tuple(parties)
        self._memo: dict[frozenset[int], bool] = {}

    def is_quorum(self, indices: Iterable[int]) -> bool:
        key = frozenset(indices)
        hit = self._memo.get(key)
        if hit is None:
            hit = evaluate(self.formula, {self.parties[i] for i in key})
            self._memo[key] = hit
        return hit


class MspQuorum:
    """Quorum rule decided by span-program acceptance.

    Prefers the prepared LUP route and falls back to plain elimination when
    the factorization is unavailable.
    """

    def __init__(self, msp: Msp, parties: Sequence[str], use_lup: bool = True):
        self.msp = msp
        self.parties = tuple(parties)
        self._memo: dict[frozenset[int], bool] = {}
        self._lup: LupChecker | None = None
        if use_lup:
            try:
                self._lup = LupChecker(msp)
            except UnfactorableError:
                self._lup = None

    def is_quorum(self, indices: Iterable[int]) -> bool:
        key = frozenset(indices)
        hit = self._memo.get(key)
        if hit is None:
            members = {self.parties[i] for i in key}
            if self._lup is not None:
                hit = self._lup.accepts(members).accepted
            else:
                hit = accepts(self.msp, members).accepted
            self._memo[key] = hit
        return hit


def qc_verify(qc: QuorumCert, checker: QuorumChecker, registry: SignerRegistry) -> bool:
    """A certificate is valid when every signature verifies over
    (type, view, node) and the distinct signers form a quorum."""
    if qc == GENESIS_QC:
        return True
    payload = vote_payload(qc.type, qc.view, qc.node)
    indices = set()
    for index, sig in qc.sig:
        if index in indices:
            continue
        if not registry.verify(index, payload, sig):
            return False
        indices.add(index)
    return checker.is_quorum(indices)


@dataclass
class Out:
    """Everything one step produced."""

    messages: list[tuple[int | None, Message]] = field(default_factory=list)
    timers: list[tuple[int, int]] = field(default_factory=list)
    trace: list[tuple[str, int, str, str]] = field(default_factory=list)
    decided: list[tuple[int, str]] = field(default_factory=list)

    def send(self, dest: int, msg: Message) -> None:
        self.messages.append((dest, msg))

    def broadcast(self, msg: Message) -> None:
        self.messages.append((None, msg))

    def timer(self, view: int, delay: int) -> None:
        self.timers.append((view, delay))

    def note(self, kind: str, view: int, node: str = "", detail: str = "") -> None:
        self.trace.append((kind, view, node, detail))

    def decide(self, view: int, node_id: str) -> None:
        self.decided.append((view, node_id))

    def merge(self, other: "Out") -> None:
        self.messages.extend(other.messages)
        self.timers.extend(other.timers)
        self.trace.extend(other.trace)
        self.decided.extend(other.decided)


class BasicReplica:
    """Four-phase HotStuff state machine for one replica."""

    def __init__(
        self,
        index: int,
        n: int,
        checker: QuorumChecker,
        registry: SignerRegistry,
        timeout_base: int = 200,
    ):
        self.index = index
        self.n = n
        self.checker = checker
        self.registry = registry
        self.timeout_base = timeout_base
        self.cur_view = 1
        self.prepare_qc = GENESIS_QC
        self.locked_qc = GENESIS_QC
        self.nodes: dict[str, BlockNode] = {GENESIS_ID: GENESIS}
        self.new_views: dict[int, QuorumCert] = {}
        self.votes: dict[str, dict[int, str]] = {p: {} for p in _PHASES}
        self.formed: set[str] = set()
        self.voted: set[str] = set()
        self.cur_proposal: BlockNode | None = None
        self.timeout_streak = 0
        self.decided_log: list[tuple[int, str]] = []
        # leader messages due in a view we have not reached yet
        self.pending: dict[int, list[Message]] = {}

    # -- helpers ---------------------------------------------------------

    def _timeout(self) -> int:
        return self.timeout_base << min(self.timeout_streak, _TIMEOUT_DOUBLINGS_CAP)

    def _extends(self, node: BlockNode, ancestor_id: str) -> bool:
        # the direct-parent link is checkable even when the ancestor object
        # itself was never received
        if node.id == ancestor_id or node.parent == ancestor_id:
            return True
        cur: BlockNode | None = self.nodes.get(node.parent)
        while cur is not None:
            if cur.id == ancestor_id:
                return True
            cur = self.nodes.get(cur.parent)
        return False

    def _reset_view_state(self) -> None:
        self.new_views = {}
        self.votes = {p: {} for p in _PHASES}
        self.formed = set()
        self.voted = set()
        self.cur_proposal = None

    def _enter_view(self, view: int, reason: str, out: Out) -> None:
        self.cur_view = view
        self._reset_view_state()
        out.note("view", view, "", reason)
        out.timer(view, self._timeout())
        self.pending = {v: m for v, m in self.pending.items() if v >= view}
        for msg in self.pending.pop(view, []):
            self._dispatch(msg, out)

    def _advance_view(self, reason: str, out: Out) -> None:
        old = self.cur_view
        out.send(
            leader_of(old + 1, self.n),
            Message(NEW_VIEW, old, None, self.prepare_qc, self.index),
        )
        self._enter_view(old + 1, reason, out)

    def _vote(self, kind: str, node_id: str, out: Out) -> None:
        sig = self.registry.sign(
            self.index, vote_payload(kind, self.cur_view, node_id)
        )
        node = self.nodes.get(node_id)
        out.send(
            leader_of(self.cur_view, self.n),
            Message(kind, self.cur_view, node, None, self.index, sig),
        )
        self.voted.add(kind)
        out.note("vote", self.cur_view, node_id, kind)

    def _qc_ok(self, qc: QuorumCert | None) -> bool:
        return qc is not None and qc_verify(qc, self.checker, self.registry)

    def _catch_up(self, msg: Message, out: Out) -> None:
        qc = msg.justify
        if qc is None or qc.view <= self.cur_view or msg.is_vote:
            return
        if qc.view > self.cur_view and self._qc_ok(qc):
            self._enter_view(qc.view, "catch-up", out)

    # -- interface -------------------------------------------------------

    def start(self) -> Out:
        out = Out()
        out.note("view", 1, "", "start")
        out.timer(1, self._timeout())
        out.send(
            leader_of(1, self.n),
            Message(NEW_VIEW, 0, None, self.prepare_qc, self.index),
        )
        return out

    def on_timeout(self, view: int) -> Out:
        out = Out()
        if view != self.cur_view:
            return out
        out.note("timeout", view)
        self.timeout_streak += 1
        self._advance_view("timeout", out)
        return out

    def on_beat(self) -> Out:
        return Out()

    def on_message(self, msg: Message) -> Out:
        out = Out()
        if msg.node is not None:
            self.nodes.setdefault(msg.node.id, msg.node)
        self._catch_up(msg, out)
        self._dispatch(msg, out)
        return out

    def _dispatch(self, msg: Message, out: Out) -> None:
        if msg.is_vote:
            self._on_vote(msg, out)
            return
        # new-view messages for view w are consumed by the leader of w + 1
        due = msg.view + 1 if msg.type == NEW_VIEW else msg.view
        if due > self.cur_view:
            if due <= self.cur_view + 64:
                self.pending.setdefault(due, []).append(msg)
            return
        if msg.type == NEW_VIEW:
            self._on_new_view(msg, out)
        elif msg.type == PREPARE:
            self._on_prepare(msg, out)
        elif msg.type in (PRE_COMMIT, COMMIT, DECIDE):
            self._on_phase(msg, out)

    # -- leader side ------------------------------------------------------

    def _on_new_view(self, msg: Message, out: Out) -> None:
        if msg.view != self.cur_view - 1 or self.index != leader_of(self.cur_view, self.n):
            return
        if self.cur_proposal is not None:
            return
        if not self._qc_ok(msg.justify):
            out.note("reject", self.cur_view, "", "bad-qc-new-view")
            return
        self.new_views[msg.sender] = msg.justify
        if not self.checker.is_quorum(self.new_views.keys()):
            return
        high_qc = max(self.new_views.values(), key=lambda qc: qc.view)
        parent = self.nodes.get(high_qc.node)
        if parent is None:
            return
        cmd = f"tx@{self.cur_view}:{self.index}"
        proposal = make_node(parent, cmd, parent.height + 1)
        self.nodes[proposal.id] = proposal
        self.cur_proposal = proposal
        out.note("propose", self.cur_view, proposal.id)
        out.broadcast(Message(PREPARE, self.cur_view, proposal, high_qc, self.index))

    def _on_vote(self, msg: Message, out: Out) -> None:
        if (
            msg.view != self.cur_view
            or self.index != leader_of(self.cur_view, self.n)
            or msg.type not in _PHASES
            or msg.node is None
            or self.cur_proposal is None
            or msg.node.id != self.cur_proposal.id
        ):
            return
        payload = vote_payload(msg.type, msg.view, msg.node.id)
        if not self.registry.verify(msg.sender, payload, msg.sig):
            out.note("reject", self.cur_view, msg.node.id, "bad-sig")
            return
        bucket = self.votes[msg.type]
        bucket[msg.sender] = msg.sig
        if msg.type in self.formed or not self.checker.is_quorum(bucket.keys()):
            return
        self.formed.add(msg.type)
        qc = QuorumCert(
            msg.type, self.cur_view, msg.node.id, tuple(sorted(bucket.items()))
        )
        out.note("qc", self.cur_view, msg.node.id, msg.type)
        if msg.type == PREPARE:
            self.prepare_qc = qc
            out.broadcast(Message(PRE_COMMIT, self.cur_view, None, qc, self.index))
        elif msg.type == PRE_COMMIT:
            out.broadcast(Message(COMMIT, self.cur_view, None, qc, self.index))
        else:
            out.broadcast(Message(DECIDE, self.cur_view, None, qc, self.index))

    # -- replica side -----------------------------------------------------

    def _on_prepare(self, msg: Message, out: Out) -> None:
        if (
            msg.view != self.cur_view
            or msg.sender != leader_of(self.cur_view, self.n)
            or msg.node is None
            or msg.justify is None
            or PREPARE in self.voted
        ):
            return
        if not self._qc_ok(msg.justify):
            out.note("reject", self.cur_view, msg.node.id, "bad-qc-prepare")
            return
        node = msg.node
        locked = self.nodes.get(self.locked_qc.node)
        safe = self._extends(node, msg.justify.node) and (
            (locked is not None and self._extends(node, locked.id))
            or msg.justify.view > self.locked_qc.view
        )
        if safe:
            self._vote(PREPARE, node.id, out)

    def _on_phase(self, msg: Message, out: Out) -> None:
        expected_justify = {PRE_COMMIT: PREPARE, COMMIT: PRE_COMMIT, DECIDE: COMMIT}
        if (
            msg.view != self.cur_view
            or msg.sender != leader_of(self.cur_view, self.n)
            or msg.justify is None
        ):
            return
        qc = msg.justify
        if qc.type != expected_justify[msg.type] or qc.view != msg.view:
            out.note("reject", self.cur_view, qc.node, "mismatched-qc")
            return
        if not self._qc_ok(qc):
            out.note("reject", self.cur_view, qc.node, f"bad-qc-{msg.type}")
            return
        if msg.type == PRE_COMMIT:
            self.prepare_qc = qc
            if PRE_COMMIT not in self.voted:
                self._vote(PRE_COMMIT, qc.node, out)
        elif msg.type == COMMIT:
            self.locked_qc = qc
            if COMMIT not in self.voted:
                self._vote(COMMIT, qc.node, out)
        else:
            self.decided_log.append((self.cur_view, qc.node))
            out.decide(self.cur_view, qc.node)
            out.note("decide", self.cur_view, qc.node)
            self.timeout_streak = 0
            self._advance_view("decide", out)


class ChainedReplica:
    """Pipelined HotStuff state machine for one replica.

    Views track proposal heights; a vote for height h goes to the leader of
    view h + 1, who certifies the block and extends the chain on its next
    beat.  Proposal heights are max(leaf + 1, current view) so a height lost
    to a failed view can never wedge the height-monotone vote rule.
    """

    def __init__(
        self,
        index: int,
        n: int,
        checker: QuorumChecker,
        registry: SignerRegistry,
        timeout_base: int = 200,
    ):
        self.index = index
        self.n = n
        self.checker = checker
        self.registry = registry
        self.timeout_base = timeout_base
        self.cur_view = 1
        self.vheight = 0
        self.nodes: dict[str, BlockNode] = {GENESIS_ID: GENESIS}
        self.b_lock = GENESIS
        self.b_exec = GENESIS
        self.b_leaf = GENESIS
        self.qc_high = GENESIS_QC
        self.votes: dict[str, dict[int, str]] = {}
        self.formed: set[str] = set()
        self.last_proposed = 0
        self.timeout_streak = 0
        self.decided_log: list[tuple[int, str]] = []

    # -- helpers ---------------------------------------------------------

    def _timeout(self) -> int:
        return self.timeout_base << min(self.timeout_streak, _TIMEOUT_DOUBLINGS_CAP)

    def _extends(self, node: BlockNode, ancestor_id: str) -> bool:
        # the direct-parent link is checkable even when the ancestor object
        # itself was never received
        if node.id == ancestor_id or node.parent == ancestor_id:
            return True
        cur: BlockNode | None = self.nodes.get(node.parent)
        while cur is not None:
            if cur.id == ancestor_id:
                return True
            cur = self.nodes.get(cur.parent)
        return False

    def _enter_view(self, view: int, reason: str, out: Out) -> None:
        if view <= self.cur_view:
            return
        self.cur_view = view
        out.note("view", view, "", reason)
        out.timer(view, self._timeout())

    def _qc_ok(self, qc: QuorumCert | None) -> bool:
        return qc is not None and qc_verify(qc, self.checker, self.registry)

    def _update_qc_high(self, qc: QuorumCert, out: Out) -> None:
        node = self.nodes.get(qc.node)
        if node is None:
            return
        high_node = self.nodes.get(self.qc_high.node, GENESIS)
        if node.height > high_node.height:
            self.qc_high = qc
            self.b_leaf = node
            self._enter_view(node.height + 1, "qc", out)

    def _update(self, bstar: BlockNode, out: Out) -> None:
        qc = bstar.justify
        if qc is None or not self._qc_ok(qc):
            return
        b2 = self.nodes.get(qc.node)
        if b2 is None:
            return
        self._update_qc_high(qc, out)
        b1 = self.nodes.get(b2.justify.node) if b2.justify else None
        if b1 is None:
            return
        if b1.height > self.b_lock.height:
            self.b_lock = b1
        b0 = self.nodes.get(b1.justify.node) if b1.justify else None
        if b0 is None:
            return
        if b2.parent == b1.id and b1.parent == b0.id:
            self._on_commit(b0, out)
            self.b_exec = b0
            self.timeout_streak = 0

    def _on_commit(self, node: BlockNode, out: Out) -> None:
        if self.b_exec.height < node.height:
            parent = self.nodes.get(node.parent)
            if parent is not None:
                self._on_commit(parent, out)
            self.decided_log.append((node.height, node.id))
            out.decide(node.height, node.id)
            out.note("decide", node.height, node.id)

    # -- interface ---------------------------------------------------------

    def start(self) -> Out:
        out = Out()
        out.note("view", 1, "", "start")
        out.timer(1, self._timeout())
        return out

    def on_timeout(self, view: int) -> Out:
        out = Out()
        if view != self.cur_view:
            return out
        out.note("timeout", view)
        self.timeout_streak += 1
        new_view = self.cur_view + 1
        out.send(
            leader_of(new_view, self.n),
            Message(NEW_VIEW, new_view, None, self.qc_high, self.index),
        )
        self._enter_view(new_view, "timeout", out)
        return out

    def on_beat(self) -> Out:
        out = Out()
        if self.index != leader_of(self.cur_view, self.n):
            return out
        height = max(self.b_leaf.height + 1, self.cur_view)
        if height <= self.last_proposed:
            return out
        parent = self.b_leaf
        cmd = f"tx@{height}:{self.index}"
        proposal = make_node(parent, cmd, height, self.qc_high)
        self.nodes[proposal.id] = proposal
        self.last_proposed = height
        self.b_leaf = proposal
        out.note("propose", height, proposal.id)
        out.broadcast(Message(GENERIC, height, proposal, None, self.index))
        return out

    def on_message(self, msg: Message) -> Out:
        out = Out()
        if msg.node is not None:
            self.nodes.setdefault(msg.node.id, msg.node)
        if msg.type == GENERIC and msg.node is not None:
            self._on_proposal(msg.node, out)
        elif msg.type == GENERIC_VOTE and msg.is_vote and msg.node is not None:
            self._on_vote(msg, out)
        elif msg.type == NEW_VIEW and msg.justify is not None:
            if self._qc_ok(msg.justify):
                self._update_qc_high(msg.justify, out)
        return out

    def _on_proposal(self, b_new: BlockNode, out: Out) -> None:
        justify = b_new.justify
        if justify is None or not self._qc_ok(justify):
            out.note("reject", self.cur_view, b_new.id, "bad-qc-proposal")
            return
        # generic certificates carry the certified node's height as their
        # view, so the liveness disjunct needs no ancestor objects
        if b_new.height > self.vheight and (
            self._extends(b_new, self.b_lock.id)
            or justify.view > self.b_lock.height
        ):
            self.vheight = b_new.height
            sig = self.registry.sign(
                self.index, vote_payload(GENERIC, b_new.height, b_new.id)
            )
            out.send(
                leader_of(b_new.height + 1, self.n),
                Message(GENERIC_VOTE, b_new.height, b_new, None, self.index, sig),
            )
            out.note("vote", b_new.height, b_new.id, GENERIC)
            self._enter_view(b_new.height + 1, "vote", out)
        self._update(b_new, out)

    def _on_vote(self, msg: Message, out: Out) -> None:
        node = msg.node
        payload = vote_payload(GENERIC, node.height, node.id)
        if not self.registry.verify(msg.sender, payload, msg.sig):
            out.note("reject", self.cur_view, node.id, "bad-sig")
            return
        bucket = self.votes.setdefault(node.id, {})
        bucket[msg.sender] = msg.sig
        if node.id in self.formed or not self.checker.is_quorum(bucket.keys()):
            return
        self.formed.add(node.id)
        qc = QuorumCert(GENERIC, node.height, node.id, tuple(sorted(bucket.items())))
        out.note("qc", node.height, node.id, GENERIC)
        self._update_qc_high(qc, out)

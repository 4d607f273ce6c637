"""Seeded discrete-event simulation of HotStuff replicas under partial
synchrony, with Byzantine fault injection and post-hoc trace checking.

The network model: correct-to-correct messages are never lost; before the
global stabilization time their delay is drawn uniformly from [1,
pre_delay_max] but delivery never slips past GST + delta, and from GST on
delays are uniform in [1, delta].  Events are ordered by (time, sender,
sequence number), so a run is a pure function of (config, seed).

Fault behaviors: crash (silent from a scheduled time), mute-leader (drops
every broadcast, i.e. all leader output), equivocate (a split-brain leader
proposing conflicting nodes to disjoint halves, co-signing with all
colluders), vote-stuff (duplicate plus forged-signer votes), and invalid-qc
(periodic certificates that fail verification).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Any

from gbqs import hotstuff as hs
from gbqs.config import SpecError, parse_node
from gbqs.formula import Formula, parties as formula_parties
from gbqs.hotstuff import (
    COMMIT,
    DECIDE,
    GENERIC,
    GENESIS,
    GENESIS_ID,
    NEW_VIEW,
    PRE_COMMIT,
    PREPARE,
    BasicReplica,
    ChainedReplica,
    CountingQuorum,
    FaultKeys,
    FormulaQuorum,
    Message,
    MspQuorum,
    Out,
    QuorumCert,
    SignerRegistry,
    leader_of,
    make_node,
    vote_payload,
)
from gbqs.msp import build_msp

BEHAVIORS = ("crash", "mute-leader", "equivocate", "vote-stuff", "invalid-qc")


@dataclass(frozen=True)
class FaultSpec:
    replica: int
    behavior: str
    at: int | None = None

    def __post_init__(self):
        if self.behavior not in BEHAVIORS:
            raise ValueError(f"unknown fault behavior {self.behavior!r}")


@dataclass(frozen=True)
class SimConfig:
    protocol: str = "basic"
    encoding: str = "counting"
    n: int = 4
    f: int = 1
    formula: Formula | None = None
    party_names: tuple[str, ...] | None = None
    seed: int = 0
    gst: int = 150
    delta: int = 10
    pre_delay_max: int = 100
    horizon: int = 1600
    timeout_base: int = 200
    t_f: int = 80
    beat_interval: int = 30
    faults: tuple[FaultSpec, ...] = ()

    def __post_init__(self):
        if self.protocol not in ("basic", "chained"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.encoding not in ("counting", "mbf", "msp", "msp-lup"):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.encoding != "counting" and self.formula is None:
            raise ValueError("formula encodings need a quorum formula")

    @property
    def parties(self) -> tuple[str, ...]:
        if self.party_names is not None:
            return self.party_names
        if self.formula is not None:
            return tuple(sorted(formula_parties(self.formula)))
        return tuple(f"p{i}" for i in range(self.n))

    @property
    def replicas(self) -> int:
        return len(self.parties) if self.encoding != "counting" else self.n

    @property
    def faulty(self) -> frozenset[int]:
        return frozenset(fs.replica for fs in self.faults)


def build_checker(cfg: SimConfig) -> hs.QuorumChecker:
    if cfg.encoding == "counting":
        return CountingQuorum(cfg.n, cfg.f)
    if cfg.encoding == "mbf":
        return FormulaQuorum(cfg.formula, cfg.parties)
    return MspQuorum(
        build_msp(cfg.formula), cfg.parties, use_lup=cfg.encoding == "msp-lup"
    )


@dataclass(frozen=True)
class TraceEvent:
    time: int
    replica: int
    kind: str
    view: int
    node: str
    detail: str

    def to_line(self) -> str:
        return f"{self.time}\t{self.replica}\t{self.kind}\t{self.view}\t{self.node}\t{self.detail}"


@dataclass
class SimTrace:
    events: list[TraceEvent]
    decided: dict[int, list[tuple[int, str]]]
    nodes: dict[str, tuple[str, int]]
    correct: frozenset[int]
    n: int
    truncated: bool
    metrics: dict[str, int]

    def serialize(self) -> str:
        return "\n".join(ev.to_line() for ev in self.events) + "\n"


# --- fault drivers ----------------------------------------------------------


class _HonestSlot:
    def __init__(self, machine):
        self.machine = machine

    def start(self, now: int) -> Out:
        return self.machine.start()

    def on_message(self, msg: Message, now: int) -> Out:
        return self.machine.on_message(msg)

    def on_timeout(self, view: int, now: int) -> Out:
        return self.machine.on_timeout(view)

    def on_beat(self, now: int) -> Out:
        return self.machine.on_beat()


class _CrashSlot:
    """Delegates until the scheduled crash time, then stays silent."""

    def __init__(self, inner, crash_at: int):
        self.inner = inner
        self.crash_at = crash_at
        self.noted = False

    def _dead(self, now: int) -> bool:
        return now >= self.crash_at

    def _note(self, out: Out) -> Out:
        if not self.noted:
            self.noted = True
            out.note("crash", 0)
        return out

    def start(self, now: int) -> Out:
        return self._note(Out()) if self._dead(now) else self.inner.start(now)

    def on_message(self, msg: Message, now: int) -> Out:
        return self._note(Out()) if self._dead(now) else self.inner.on_message(msg, now)

    def on_timeout(self, view: int, now: int) -> Out:
        return self._note(Out()) if self._dead(now) else self.inner.on_timeout(view, now)

    def on_beat(self, now: int) -> Out:
        return self._note(Out()) if self._dead(now) else self.inner.on_beat(now)


class _MuteLeaderSlot:
    """Suppresses every broadcast: the replica can vote but never lead."""

    def __init__(self, inner):
        self.inner = inner

    def _filter(self, out: Out) -> Out:
        out.messages = [(d, m) for d, m in out.messages if d is not None]
        return out

    def start(self, now: int) -> Out:
        return self._filter(self.inner.start(now))

    def on_message(self, msg: Message, now: int) -> Out:
        return self._filter(self.inner.on_message(msg, now))

    def on_timeout(self, view: int, now: int) -> Out:
        return self._filter(self.inner.on_timeout(view, now))

    def on_beat(self, now: int) -> Out:
        return self._filter(self.inner.on_beat(now))


class _VoteStuffSlot:
    """Re-sends every vote and adds votes forged under other replicas' names."""

    def __init__(self, inner, victims: tuple[int, ...]):
        self.inner = inner
        self.victims = victims

    def _stuff(self, out: Out) -> Out:
        extra = []
        for dest, msg in out.messages:
            if msg.is_vote and dest is not None:
                extra.append((dest, msg))
                for victim in self.victims:
                    forged = replace(msg, sender=victim, sig="0" * 32)
                    extra.append((dest, forged))
        out.messages.extend(extra)
        return out

    def start(self, now: int) -> Out:
        return self._stuff(self.inner.start(now))

    def on_message(self, msg: Message, now: int) -> Out:
        return self._stuff(self.inner.on_message(msg, now))

    def on_timeout(self, view: int, now: int) -> Out:
        return self._stuff(self.inner.on_timeout(view, now))

    def on_beat(self, now: int) -> Out:
        return self._stuff(self.inner.on_beat(now))


class _InvalidQcSlot:
    """Behaves correctly but broadcasts a bogus certificate on every beat."""

    def __init__(self, inner, machine, index: int, protocol: str):
        self.inner = inner
        self.machine = machine
        self.index = index
        self.protocol = protocol

    def start(self, now: int) -> Out:
        return self.inner.start(now)

    def on_message(self, msg: Message, now: int) -> Out:
        return self.inner.on_message(msg, now)

    def on_timeout(self, view: int, now: int) -> Out:
        return self.inner.on_timeout(view, now)

    def on_beat(self, now: int) -> Out:
        out = self.inner.on_beat(now)
        view = self.machine.cur_view
        bogus_sigs = tuple((i, "0" * 32) for i in range(self.machine.n))
        if self.protocol == "basic":
            qc = QuorumCert(PREPARE, view, "forged-node", bogus_sigs)
            out.broadcast(Message(PRE_COMMIT, view, None, qc, self.index))
        else:
            qc = QuorumCert(GENERIC, view, GENESIS_ID, bogus_sigs)
            node = make_node(GENESIS, f"forged@{view}", view, qc)
            out.broadcast(Message(GENERIC, view, node, None, self.index))
        return out


class _BasicEquivocator:
    """Split-brain leader for the four-phase protocol.

    In every view it leads, it proposes one node to the first half of the
    correct replicas and a conflicting one to the second half, then answers
    each side's votes with certificates co-signed by all colluders.
    """

    def __init__(self, index, n, checker, registry, keys, colluders, correct):
        self.index = index
        self.n = n
        self.checker = checker
        self.registry = registry
        self.keys = keys
        self.colluders = tuple(sorted(colluders))
        ordered = sorted(correct)
        half = (len(ordered) + 1) // 2
        self.sides = (tuple(ordered[:half]), tuple(ordered[half:]))
        self.launched: set[int] = set()
        self.node_side: dict[str, tuple[int, ...]] = {}
        self.buckets: dict[tuple[str, str], dict[int, str]] = {}
        self.formed: set[tuple[str, str]] = set()

    def start(self, now: int) -> Out:
        out = Out()
        out.send(
            leader_of(1, self.n),
            Message(NEW_VIEW, 0, None, hs.GENESIS_QC, self.index),
        )
        return out

    def on_timeout(self, view: int, now: int) -> Out:
        return Out()

    def on_beat(self, now: int) -> Out:
        return Out()

    def on_message(self, msg: Message, now: int) -> Out:
        out = Out()
        if msg.type == NEW_VIEW and msg.justify is not None:
            self._maybe_launch(msg, out)
        elif msg.is_vote and msg.node is not None and msg.type in (PREPARE, PRE_COMMIT, COMMIT):
            self._on_vote(msg, out)
        return out

    def _maybe_launch(self, msg: Message, out: Out) -> None:
        view = msg.view + 1
        if leader_of(view, self.n) != self.index or view in self.launched:
            return
        self.launched.add(view)
        parent = GENESIS
        justify = msg.justify
        for tag, side in zip(("x", "y"), self.sides):
            node = make_node(parent, f"evil@{view}:{tag}", parent.height + 1)
            self.node_side[node.id] = side
            out.note("propose", view, node.id, f"equivocate-{tag}")
            for dest in side:
                out.send(dest, Message(PREPARE, view, node, justify, self.index))

    def _on_vote(self, msg: Message, out: Out) -> None:
        node = msg.node
        side = self.node_side.get(node.id)
        if side is None:
            return
        payload = vote_payload(msg.type, msg.view, node.id)
        if not self.registry.verify(msg.sender, payload, msg.sig):
            return
        key = (msg.type, node.id)
        bucket = self.buckets.setdefault(key, {})
        bucket[msg.sender] = msg.sig
        signers = dict(bucket)
        for c in self.colluders:
            signers[c] = self.keys.sign(c, payload)
        if key in self.formed or not self.checker.is_quorum(signers.keys()):
            return
        self.formed.add(key)
        qc = QuorumCert(msg.type, msg.view, node.id, tuple(sorted(signers.items())))
        next_type = {PREPARE: PRE_COMMIT, PRE_COMMIT: COMMIT, COMMIT: DECIDE}[msg.type]
        for dest in side:
            out.send(dest, Message(next_type, msg.view, None, qc, self.index))


class _ChainedEquivocator:
    """Split-brain proposer for the pipelined protocol: two conflicting
    leaves per led height, with generic votes for both cast by every
    colluder toward the next leader."""

    def __init__(self, index, n, machine: ChainedReplica, keys, colluders, correct):
        self.index = index
        self.n = n
        self.machine = machine
        self.keys = keys
        self.colluders = tuple(sorted(colluders))
        ordered = sorted(correct)
        half = (len(ordered) + 1) // 2
        self.sides = (tuple(ordered[:half]), tuple(ordered[half:]))

    def start(self, now: int) -> Out:
        return self.machine.start()

    def on_message(self, msg: Message, now: int) -> Out:
        return self.machine.on_message(msg)

    def on_timeout(self, view: int, now: int) -> Out:
        return self.machine.on_timeout(view)

    def on_beat(self, now: int) -> Out:
        m = self.machine
        out = Out()
        if self.index != leader_of(m.cur_view, self.n):
            return out
        height = max(m.b_leaf.height + 1, m.cur_view)
        if height <= m.last_proposed:
            return out
        m.last_proposed = height
        parent = m.b_leaf
        collector = leader_of(height + 1, self.n)
        for tag, side in zip(("x", "y"), self.sides):
            node = make_node(parent, f"evil@{height}:{tag}", height, m.qc_high)
            m.nodes[node.id] = node
            out.note("propose", height, node.id, f"equivocate-{tag}")
            for dest in side:
                out.send(dest, Message(GENERIC, height, node, None, self.index))
            payload = vote_payload(GENERIC, height, node.id)
            for c in self.colluders:
                out.send(
                    collector,
                    Message(hs.GENERIC_VOTE, height, node, None, c, self.keys.sign(c, payload)),
                )
        return out


def _build_slots(cfg: SimConfig, checker, registry):
    n = cfg.replicas
    faults_by_replica = {fs.replica: fs for fs in cfg.faults}
    for fs in cfg.faults:
        if not 0 <= fs.replica < n:
            raise ValueError(f"fault names replica {fs.replica}, but n = {n}")
    correct = frozenset(range(n)) - cfg.faulty
    equivocators = sorted(
        fs.replica for fs in cfg.faults if fs.behavior == "equivocate"
    )
    keys = FaultKeys(registry, cfg.faulty)

    def machine(i):
        cls = BasicReplica if cfg.protocol == "basic" else ChainedReplica
        return cls(i, n, checker, registry, cfg.timeout_base)

    slots = []
    for i in range(n):
        fs = faults_by_replica.get(i)
        if fs is None:
            slots.append(_HonestSlot(machine(i)))
        elif fs.behavior == "crash":
            slots.append(_CrashSlot(_HonestSlot(machine(i)), fs.at or 0))
        elif fs.behavior == "mute-leader":
            slots.append(_MuteLeaderSlot(_HonestSlot(machine(i))))
        elif fs.behavior == "vote-stuff":
            victims = tuple(sorted(correct))[:2]
            slots.append(_VoteStuffSlot(_HonestSlot(machine(i)), victims))
        elif fs.behavior == "invalid-qc":
            m = machine(i)
            slots.append(_InvalidQcSlot(_HonestSlot(m), m, i, cfg.protocol))
        elif fs.behavior == "equivocate":
            if i == equivocators[0]:
                if cfg.protocol == "basic":
                    slots.append(
                        _BasicEquivocator(
                            i, n, checker, registry, keys, equivocators, correct
                        )
                    )
                else:
                    slots.append(
                        _ChainedEquivocator(
                            i, n, machine(i), keys, equivocators, correct
                        )
                    )
            else:
                # co-conspirators stay silent; their keys sign via the leader
                slots.append(_CrashSlot(_HonestSlot(machine(i)), 0))
    return slots, correct


def run_simulation(cfg: SimConfig) -> SimTrace:
    """One deterministic run: returns the full trace for the checkers."""
    import heapq

    n = cfg.replicas
    rng = random.Random(cfg.seed)
    registry = SignerRegistry(cfg.seed, n)
    checker = build_checker(cfg)
    slots, correct = _build_slots(cfg, checker, registry)

    heap: list[tuple[int, int, int, str, Any]] = []
    seq = 0
    events: list[TraceEvent] = []
    decided: dict[int, list[tuple[int, str]]] = {i: [] for i in range(n)}
    nodes: dict[str, tuple[str, int]] = {GENESIS_ID: ("", 0)}
    metrics = {"messages": 0, "decisions": 0, "max_view": 0, "events": 0}

    def push(time: int, sender: int, kind: str, payload: Any) -> None:
        nonlocal seq
        seq += 1
        heapq.heappush(heap, (time, sender, seq, kind, payload))

    def delay(now: int, sender: int, dest: int) -> int:
        if sender == dest:
            return 1
        if now >= cfg.gst:
            return rng.randint(1, cfg.delta)
        raw = now + rng.randint(1, cfg.pre_delay_max)
        bound = cfg.gst + rng.randint(1, cfg.delta)
        return min(raw, bound) - now

    def register_node(node) -> None:
        if node is not None and node.id not in nodes:
            nodes[node.id] = (node.parent, node.height)

    def absorb(i: int, out: Out, now: int) -> None:
        for dest, msg in out.messages:
            register_node(msg.node)
            targets = range(n) if dest is None else (dest,)
            for t in targets:
                metrics["messages"] += 1
                push(now + delay(now, i, t), i, "msg", (t, msg))
        for view, dly in out.timers:
            push(now + dly, i, "timer", (i, view))
        for kind, view, node_id, detail in out.trace:
            events.append(TraceEvent(now, i, kind, view, node_id, detail))
            if kind == "view":
                metrics["max_view"] = max(metrics["max_view"], view)
        for view, node_id in out.decided:
            decided[i].append((view, node_id))
            if i in correct:
                metrics["decisions"] += 1

    for i in range(n):
        absorb(i, slots[i].start(0), 0)
    t = cfg.beat_interval
    while t <= cfg.horizon:
        for i in range(n):
            push(t, i, "beat", i)
        t += cfg.beat_interval

    truncated = False
    while heap:
        time, sender, _, kind, payload = heapq.heappop(heap)
        if time > cfg.horizon:
            truncated = True
            break
        metrics["events"] += 1
        if kind == "msg":
            dest, msg = payload
            absorb(dest, slots[dest].on_message(msg, time), time)
        elif kind == "timer":
            replica, view = payload
            absorb(replica, slots[replica].on_timeout(view, time), time)
        else:
            replica = payload
            absorb(replica, slots[replica].on_beat(time), time)

    return SimTrace(events, decided, nodes, correct, n, truncated, metrics)


# --- trace checkers ---------------------------------------------------------


@dataclass(frozen=True)
class SafetyReport:
    ok: bool
    detail: str | None = None

    def __str__(self) -> str:
        return "safety ok" if self.ok else f"SAFETY VIOLATION: {self.detail}"


def _extends_id(a: str, b: str, nodes: dict[str, tuple[str, int]]) -> bool:
    cur = a
    while True:
        if cur == b:
            return True
        ent = nodes.get(cur)
        if ent is None or cur == GENESIS_ID:
            return False
        cur = ent[0]


def check_safety(trace: SimTrace) -> SafetyReport:
    """No two nodes decided by correct replicas may conflict."""
    decided_by: dict[str, int] = {}
    for r in sorted(trace.correct):
        for _, node_id in trace.decided.get(r, []):
            decided_by.setdefault(node_id, r)
    ids = sorted(decided_by)
    for a, b in combinations(ids, 2):
        if not _extends_id(a, b, trace.nodes) and not _extends_id(b, a, trace.nodes):
            return SafetyReport(
                False,
                f"conflicting decides: node {a} (replica {decided_by[a]}) vs "
                f"node {b} (replica {decided_by[b]})",
            )
    return SafetyReport(True)


@dataclass(frozen=True)
class LivenessReport:
    ok: bool
    premise_met: bool
    windows_checked: int
    stalls: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.premise_met:
            return (
                "liveness premise never met (no post-GST window with a correct "
                "leader was held); nothing to check"
            )
        if self.ok:
            return f"liveness ok ({self.windows_checked} qualifying windows)"
        return "LIVENESS STALL: " + "; ".join(self.stalls)


def check_liveness(trace: SimTrace, cfg: SimConfig) -> LivenessReport:
    """Every post-GST view with a correct leader that all correct replicas
    hold for t_f must record a decision.

    The chained variant needs a full pipeline, so a window only qualifies
    when the two preceding views also had correct leaders and were entered
    by progress (votes or certificates), and the decided node may be any
    node (the three-chain commits an ancestor)."""
    n = trace.n
    correct = sorted(trace.correct)
    entries: dict[tuple[int, int], tuple[int, str]] = {}
    per_replica: dict[int, list[tuple[int, int]]] = {r: [] for r in range(n)}
    for ev in trace.events:
        if ev.kind == "view" and (ev.replica, ev.view) not in entries:
            entries[(ev.replica, ev.view)] = (ev.time, ev.detail)
            per_replica[ev.replica].append((ev.time, ev.view))
    exits: dict[tuple[int, int], int] = {}
    horizon_end = cfg.horizon + 1
    for r, lst in per_replica.items():
        for (t0, v), nxt in zip(lst, lst[1:] + [(horizon_end, -1)]):
            exits[(r, v)] = nxt[0]
    decides = [
        ev for ev in trace.events if ev.kind == "decide" and ev.replica in trace.correct
    ]
    views = sorted({v for (_, v) in entries})
    stalls: list[str] = []
    windows = 0
    for v in views:
        if leader_of(v, n) not in trace.correct:
            continue
        ent = [entries.get((r, v)) for r in correct]
        if any(e is None for e in ent):
            continue
        if min(exits[(r, v)] for r in correct) < cfg.gst:
            continue  # the view ended before stabilization
        if cfg.protocol == "chained":
            if v < 4:
                continue
            prev_ok = all(
                leader_of(w, n) in trace.correct for w in (v - 2, v - 1)
            )
            progress = all(
                entries.get((r, w)) is not None
                and entries[(r, w)][1] in ("vote", "qc")
                for r in correct
                for w in (v - 1, v)
            )
            if not prev_ok or not progress:
                continue
        w0 = max(max(e[0] for e in ent), cfg.gst)
        deadline = w0 + cfg.t_f
        if deadline > cfg.horizon:
            continue
        if cfg.protocol == "basic":
            got = any(d.view == v for d in decides)
        else:
            start = min(e[0] for e in ent)
            got = any(start <= d.time <= deadline for d in decides)
        if got:
            windows += 1
            continue
        held = all(exits[(r, v)] >= deadline for r in correct)
        if held:
            windows += 1
            stalls.append(
                f"view {v}: correct leader {leader_of(v, n)}, held "
                f"[{w0}, {deadline}], no decision"
            )
    return LivenessReport(not stalls, windows > 0, windows, tuple(stalls))


# --- experiment configs -----------------------------------------------------


def load_experiment(text: str | bytes) -> SimConfig:
    """Parse the JSON experiment format: the quorum-spec conventions plus a
    "simulation" section."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc.msg}", f"$:{exc.lineno}:{exc.colno}") from None
    if not isinstance(doc, dict):
        raise SpecError("experiment config must be an object", "$")
    known = {"v", "protocol", "encoding", "counting", "parties", "quorums", "simulation"}
    extra = set(doc) - known
    if extra:
        raise SpecError(f"unknown keys {sorted(extra)}", "$")
    protocol = doc.get("protocol", "basic")
    encoding = doc.get("encoding", "counting")
    n, f = 4, 1
    formula = None
    party_names = None
    if encoding == "counting":
        counting = doc.get("counting", {})
        if not isinstance(counting, dict):
            raise SpecError("'counting' must be an object", "$.counting")
        n = counting.get("n", 4)
        f = counting.get("f", 1)
        if not (isinstance(n, int) and isinstance(f, int) and 0 <= f < n):
            raise SpecError("counting needs integers 0 <= f < n", "$.counting")
    else:
        if "quorums" not in doc:
            raise SpecError(f"encoding {encoding!r} needs a 'quorums' tree", "$")
        declared = None
        if "parties" in doc:
            plist = doc["parties"]
            if not isinstance(plist, list) or any(not isinstance(p, str) for p in plist):
                raise SpecError("'parties' must be a list of strings", "$.parties")
            declared = set(plist)
            party_names = tuple(plist)
        formula = parse_node(doc["quorums"], declared, "$.quorums")
    sim = doc.get("simulation", {})
    if not isinstance(sim, dict):
        raise SpecError("'simulation' must be an object", "$.simulation")
    sim_known = {
        "seed", "gst", "delta", "pre_delay_max", "horizon",
        "timeout", "t_f", "beat_interval", "faults",
    }
    extra = set(sim) - sim_known
    if extra:
        raise SpecError(f"unknown simulation keys {sorted(extra)}", "$.simulation")
    faults = []
    for idx, item in enumerate(sim.get("faults", [])):
        path = f"$.simulation.faults[{idx}]"
        if not isinstance(item, dict) or "replica" not in item or "behavior" not in item:
            raise SpecError("fault needs 'replica' and 'behavior'", path)
        unknown = set(item) - {"replica", "behavior", "at"}
        if unknown:
            raise SpecError(f"unknown fault keys {sorted(unknown)}", path)
        try:
            faults.append(
                FaultSpec(item["replica"], item["behavior"], item.get("at"))
            )
        except ValueError as exc:
            raise SpecError(str(exc), path) from None
    try:
        return SimConfig(
            protocol=protocol,
            encoding=encoding,
            n=n,
            f=f,
            formula=formula,
            party_names=party_names,
            seed=sim.get("seed", 0),
            gst=sim.get("gst", 150),
            delta=sim.get("delta", 10),
            pre_delay_max=sim.get("pre_delay_max", 100),
            horizon=sim.get("horizon", 1600),
            timeout_base=sim.get("timeout", 200),
            t_f=sim.get("t_f", 80),
            beat_interval=sim.get("beat_interval", 30),
            faults=tuple(faults),
        )
    except ValueError as exc:
        raise SpecError(str(exc), "$") from None

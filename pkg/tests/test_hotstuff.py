import pytest

from gbqs.formula import Literal, Threshold
from gbqs.hotstuff import (
    COMMIT,
    DECIDE,
    GENERIC,
    GENERIC_VOTE,
    GENESIS,
    GENESIS_QC,
    NEW_VIEW,
    PRE_COMMIT,
    PREPARE,
    BasicReplica,
    ChainedReplica,
    CountingQuorum,
    FormulaQuorum,
    Message,
    MspQuorum,
    QuorumCert,
    SignerRegistry,
    leader_of,
    make_node,
    qc_verify,
    vote_payload,
)
from gbqs.msp import build_msp


def theta(k, names):
    return Threshold(k, tuple(Literal(p) for p in names))


def make_qc(registry, kind, view, node_id, signers):
    payload = vote_payload(kind, view, node_id)
    return QuorumCert(
        kind, view, node_id, tuple((i, registry.sign(i, payload)) for i in sorted(signers))
    )


def test_leader_rotation():
    assert leader_of(1, 4) == 1
    assert leader_of(5, 4) == 1
    assert leader_of(4, 4) == 0
    seen = {leader_of(v, 7) for v in range(10, 17)}
    assert seen == set(range(7))


def test_qc_verify_threshold():
    registry = SignerRegistry(0, 4)
    checker = CountingQuorum(4, 1)
    qc = make_qc(registry, PREPARE, 3, "abc", [0, 1, 2])
    assert qc_verify(qc, checker, registry)
    bad = QuorumCert(qc.type, qc.view, qc.node, (qc.sig[0], qc.sig[1], (2, "0" * 32)))
    assert not qc_verify(bad, checker, registry)
    small = QuorumCert(qc.type, qc.view, qc.node, qc.sig[:2])
    assert not qc_verify(small, checker, registry)


def test_qc_verify_counts_each_signer_once():
    registry = SignerRegistry(0, 4)
    checker = CountingQuorum(4, 1)
    payload = vote_payload(PREPARE, 1, "abc")
    sig0 = registry.sign(0, payload)
    sig1 = registry.sign(1, payload)
    stuffed = QuorumCert(PREPARE, 1, "abc", ((0, sig0), (0, sig0), (0, sig0), (1, sig1)))
    assert not qc_verify(stuffed, checker, registry)


def test_qc_verify_generalized_quorum_vs_equal_sized_non_quorum(
    two_layer_k4, two_layer_k4_quorums, two_layer_k4_msp
):
    parties = two_layer_k4_quorums.universe
    registry = SignerRegistry(0, len(parties))
    quorum = min(two_layer_k4_quorums.quorums, key=sorted)
    indices = [parties.index(p) for p in quorum]
    # same cardinality, but only two first-layer parties
    non_quorum_parties = ["A0", "A1"] + [f"B{i}" for i in range(len(quorum) - 2)]
    non_indices = [parties.index(p) for p in non_quorum_parties]
    assert len(non_indices) == len(indices)
    for checker in (
        FormulaQuorum(two_layer_k4, parties),
        MspQuorum(two_layer_k4_msp, parties),
    ):
        good = make_qc(registry, PREPARE, 1, "n1", indices)
        bad = make_qc(registry, PREPARE, 1, "n1", non_indices)
        assert qc_verify(good, checker, registry)
        assert not qc_verify(bad, checker, registry)


def test_genesis_certificate_is_valid():
    registry = SignerRegistry(0, 4)
    assert qc_verify(GENESIS_QC, CountingQuorum(4, 1), registry)


def _leader_with_proposal():
    registry = SignerRegistry(0, 4)
    checker = CountingQuorum(4, 1)
    leader = BasicReplica(1, 4, checker, registry)
    leader.start()
    outs = []
    for sender in range(4):
        msg = Message(NEW_VIEW, 0, None, GENESIS_QC, sender)
        outs.append(leader.on_message(msg))
    proposal = leader.cur_proposal
    assert proposal is not None
    return registry, checker, leader, proposal


def test_leader_proposes_after_new_view_quorum():
    registry, checker, leader, proposal = _leader_with_proposal()
    assert proposal.parent == GENESIS.id


def test_leader_needs_vote_quorum_for_qc():
    registry, checker, leader, proposal = _leader_with_proposal()
    broadcasts = []
    for sender in (0, 2):
        payload = vote_payload(PREPARE, 1, proposal.id)
        vote = Message(PREPARE, 1, proposal, None, sender, registry.sign(sender, payload))
        out = leader.on_message(vote)
        broadcasts.extend(m for d, m in out.messages if d is None)
    assert broadcasts == []  # two of four votes do not form a quorum
    payload = vote_payload(PREPARE, 1, proposal.id)
    out = leader.on_message(
        Message(PREPARE, 1, proposal, None, 3, registry.sign(3, payload))
    )
    types = [m.type for d, m in out.messages if d is None]
    assert types == [PRE_COMMIT]


def test_leader_ignores_forged_votes():
    registry, checker, leader, proposal = _leader_with_proposal()
    for sender in (0, 2, 3):
        vote = Message(PREPARE, 1, proposal, None, sender, "0" * 32)
        out = leader.on_message(vote)
        assert not out.messages
        assert any(tr[0] == "reject" for tr in out.trace)


def test_locked_replica_refuses_conflicting_stale_proposal():
    registry = SignerRegistry(0, 4)
    checker = CountingQuorum(4, 1)
    replica = BasicReplica(0, 4, checker, registry)
    replica.start()
    locked_node = make_node(GENESIS, "w", 1)
    replica.nodes[locked_node.id] = locked_node
    replica.locked_qc = make_qc(registry, PRE_COMMIT, 1, locked_node.id, [0, 1, 2])
    replica.cur_view = 5
    conflicting = make_node(GENESIS, "b", 1)
    justify = make_qc(registry, PREPARE, 1, conflicting.id, [0, 1, 2])
    prepare = Message(PREPARE, 5, conflicting, justify, leader_of(5, 4))
    out = replica.on_message(prepare)
    assert not any(m.is_vote for _, m in out.messages)
    # same proposal but justified by a newer certificate is voted for
    fresh_justify = make_qc(registry, PREPARE, 4, conflicting.id, [0, 1, 2])
    prepare2 = Message(PREPARE, 5, conflicting, fresh_justify, leader_of(5, 4))
    out2 = replica.on_message(prepare2)
    assert any(m.is_vote for _, m in out2.messages)


def test_replica_votes_once_per_phase_per_view():
    registry = SignerRegistry(0, 4)
    replica = BasicReplica(0, 4, CountingQuorum(4, 1), registry)
    replica.start()
    node = make_node(GENESIS, "x", 1)
    prepare = Message(PREPARE, 1, node, GENESIS_QC, leader_of(1, 4))
    assert any(m.is_vote for _, m in replica.on_message(prepare).messages)
    assert not any(m.is_vote for _, m in replica.on_message(prepare).messages)


def test_invalid_qc_rejected_without_state_change():
    registry = SignerRegistry(0, 4)
    replica = BasicReplica(0, 4, CountingQuorum(4, 1), registry)
    replica.start()
    before = (replica.prepare_qc, replica.locked_qc, replica.cur_view)
    bogus = QuorumCert(PREPARE, 1, "junk", ((0, "0" * 32), (1, "0" * 32), (2, "0" * 32)))
    out = replica.on_message(Message(PRE_COMMIT, 1, None, bogus, leader_of(1, 4)))
    assert any(tr[0] == "reject" for tr in out.trace)
    assert (replica.prepare_qc, replica.locked_qc, replica.cur_view) == before


def test_basic_decide_and_view_advance():
    registry = SignerRegistry(0, 4)
    replica = BasicReplica(0, 4, CountingQuorum(4, 1), registry)
    replica.start()
    node = make_node(GENESIS, "x", 1)
    replica.nodes[node.id] = node
    qc = make_qc(registry, COMMIT, 1, node.id, [1, 2, 3])
    out = replica.on_message(Message(DECIDE, 1, None, qc, leader_of(1, 4)))
    assert out.decided == [(1, node.id)]
    assert replica.cur_view == 2
    new_views = [m for _, m in out.messages if m.type == NEW_VIEW]
    assert len(new_views) == 1 and new_views[0].view == 1


def _chain(registry, length):
    nodes = [GENESIS]
    qcs = [GENESIS_QC]
    for h in range(1, length + 1):
        node = make_node(nodes[-1], f"cmd{h}", h, qcs[-1])
        nodes.append(node)
        qcs.append(make_qc(registry, GENERIC, h, node.id, [0, 1, 2]))
    return nodes, qcs


def test_chained_three_chain_commits_first_node():
    registry = SignerRegistry(0, 4)
    replica = ChainedReplica(3, 4, CountingQuorum(4, 1), registry)
    replica.start()
    nodes, qcs = _chain(registry, 4)
    decided = []
    for h in (1, 2, 3):
        out = replica.on_message(Message(GENERIC, h, nodes[h], None, leader_of(h, 4)))
        decided.extend(out.decided)
    assert decided == []
    out = replica.on_message(Message(GENERIC, 4, nodes[4], None, leader_of(4, 4)))
    assert out.decided == [(1, nodes[1].id)]
    assert replica.b_lock.id == nodes[2].id
    assert replica.b_exec.id == nodes[1].id


def test_chained_commit_executes_skipped_ancestors_once():
    registry = SignerRegistry(0, 4)
    replica = ChainedReplica(3, 4, CountingQuorum(4, 1), registry)
    replica.start()
    nodes, qcs = _chain(registry, 6)
    for h in (1, 2, 3, 4, 5, 6):
        out = replica.on_message(Message(GENERIC, h, nodes[h], None, leader_of(h, 4)))
    executed = [nid for _, nid in replica.decided_log]
    assert executed == [nodes[1].id, nodes[2].id, nodes[3].id]
    assert len(set(executed)) == len(executed)


def test_chained_update_qc_high_ignores_lower_certificate():
    registry = SignerRegistry(0, 4)
    replica = ChainedReplica(0, 4, CountingQuorum(4, 1), registry)
    replica.start()
    nodes, qcs = _chain(registry, 3)
    for h in (1, 2, 3):
        replica.on_message(Message(GENERIC, h, nodes[h], None, leader_of(h, 4)))
    high_before = replica.qc_high
    assert high_before.node == nodes[2].id  # carried by node 3's justify
    replica.on_message(Message(NEW_VIEW, 2, None, qcs[1], 2))
    assert replica.qc_high == high_before


def test_chained_vote_goes_to_next_leader():
    registry = SignerRegistry(0, 4)
    replica = ChainedReplica(0, 4, CountingQuorum(4, 1), registry)
    replica.start()
    nodes, _ = _chain(registry, 1)
    out = replica.on_message(Message(GENERIC, 1, nodes[1], None, leader_of(1, 4)))
    votes = [(d, m) for d, m in out.messages if m.type == GENERIC_VOTE]
    assert len(votes) == 1
    dest, vote = votes[0]
    assert dest == leader_of(2, 4)
    assert vote.node.id == nodes[1].id


def test_chained_height_rule_blocks_stale_proposal():
    registry = SignerRegistry(0, 4)
    replica = ChainedReplica(0, 4, CountingQuorum(4, 1), registry)
    replica.start()
    nodes, _ = _chain(registry, 2)
    replica.on_message(Message(GENERIC, 2, nodes[2], None, leader_of(2, 4)))
    out = replica.on_message(Message(GENERIC, 1, nodes[1], None, leader_of(1, 4)))
    assert not any(m.type == GENERIC_VOTE for _, m in out.messages)


def test_step_determinism():
    def run():
        registry = SignerRegistry(0, 4)
        replica = BasicReplica(0, 4, CountingQuorum(4, 1), registry)
        outs = [replica.start()]
        node = make_node(GENESIS, "x", 1)
        outs.append(replica.on_message(Message(PREPARE, 1, node, GENESIS_QC, 1)))
        outs.append(replica.on_timeout(1))
        return [(o.messages, o.timers, o.trace, o.decided) for o in outs]

    assert run() == run()

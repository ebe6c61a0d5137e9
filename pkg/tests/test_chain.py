import pytest
from hypothesis import given, strategies as st

from alerting.chain import (
    BoundedDelay, ChainState, Lockstep, NotIncluded, Transaction, TxKind, check_hash_chain,
    merkle_path, merkle_root, merkle_verify, verify_header_chain,
)


def tx(sender=1, payload=b"x"):
    return Transaction(sender, TxKind.ALERT, payload)


def test_advance_produces_one_block_per_step():
    c = ChainState(Lockstep(2))
    c.advance(3)
    assert [h.height for h in c.headers] == [0, 1, 2, 3]


def test_lockstep_inclusion_after_delta_write():
    c = ChainState(Lockstep(2))
    c.advance(5)
    t = c.submit(tx())
    c.advance(2)
    height, _ = c.location(t)
    assert c.headers[height].produced_at == 7


def test_lockstep_submit_at_zero():
    c = ChainState(Lockstep(2))
    t = c.submit(tx())
    c.advance(3)
    assert c.location(t)[0] == 2


def test_bounded_delay_is_seeded_and_in_range():
    def run():
        c = ChainState(BoundedDelay(4, seed=11))
        sent = []
        for i in range(20):
            sent.append(c.submit(tx(i, bytes([i]))))
            c.advance(1)
        c.advance(5)
        return [(c.location(t)[0], c.headers[c.location(t)[0]].produced_at - t.submitted_at) for t in sent]

    a, b = run(), run()
    assert a == b
    assert all(1 <= d <= 4 for _, d in a)


def test_same_step_ordered_by_sender():
    c = ChainState(Lockstep(1))
    t3 = c.submit(tx(3))
    t1 = c.submit(tx(1))
    c.advance(1)
    assert [t.sender for t in c.blocks[1]] == [1, 3]
    assert c.location(t1)[1] == 0 and c.location(t3)[1] == 1


def test_inclusion_proof_verifies_and_detects_tampering():
    c = ChainState(Lockstep(1))
    ts = [c.submit(tx(i, bytes([i]))) for i in range(5)]
    c.advance(1)
    for t in ts:
        proof = c.prove_inclusion(t)
        header = c.headers[proof.height]
        assert proof.verify(header, t)
        bad = list(proof.authentication_path)
        bad[0] = bytes([bad[0][0] ^ 1]) + bad[0][1:]
        assert not type(proof)(proof.height, proof.tx_index, tuple(bad)).verify(header, t)


def test_pending_tx_not_included():
    c = ChainState(Lockstep(2))
    t = c.submit(tx())
    with pytest.raises(NotIncluded):
        c.prove_inclusion(t)


def test_header_chain_genuine_fork_and_empty():
    a = ChainState(BoundedDelay(2, seed=1), chain_id=b"a")
    b = ChainState(BoundedDelay(2, seed=2), chain_id=b"b")
    a.advance(6)
    b.advance(6)
    assert verify_header_chain(a.headers[2], a.headers_after(2))
    assert not verify_header_chain(a.headers[2], b.headers_after(2))
    assert verify_header_chain(a.headers[2], [])
    assert check_hash_chain(a)


def test_transaction_roundtrip():
    t = Transaction(9, TxKind.REVEAL, b"payload", 42)
    assert Transaction.decode(t.encode()) == t


@given(st.lists(st.binary(max_size=16), min_size=1, max_size=17), st.data())
def test_merkle_paths_verify(leaves, data):
    i = data.draw(st.integers(0, len(leaves) - 1))
    root = merkle_root(leaves)
    assert merkle_verify(root, leaves[i], i, merkle_path(leaves, i))
    assert not merkle_verify(root, leaves[i] + b"!", i, merkle_path(leaves, i))


@given(st.integers(1, 6), st.integers(0, 2**16), st.lists(st.integers(0, 3), max_size=12))
def test_chain_is_deterministic_and_linked(dw, seed, gaps):
    def build():
        c = ChainState(BoundedDelay(dw, seed))
        for i, g in enumerate(gaps):
            c.submit(tx(i % 4, bytes([i])))
            c.advance(g)
        c.advance(dw + 1)
        return c

    a, b = build(), build()
    assert a.state_digest() == b.state_digest()
    assert check_hash_chain(a)
    assert not a.pending

import pytest
from hypothesis import given, strategies as st

from alerting.chain import BoundedDelay, ChainState, Lockstep, Transaction, TxKind, digest
from alerting.core import Action
from alerting.tee import (
    Attestation, BadHeaderChain, HmacSigner, InsufficientDepth, NO_ALERT_MARKER, NonceSealed, NotIncluded,
    TeeState, UnknownHandle, build_pop, commitment_handle, decode_message, encode_message, verify_attestation,
)


def setup(n_commit=3):
    chain = ChainState(Lockstep(1))
    dev = TeeState(1, chain.tip, b"seed", chain.consensus_key)
    gamma = dev.seal(encode_message(Action.NO_ALERT), n_commit)
    chain.advance(1)
    tx = chain.submit(Transaction(1, TxKind.COMMIT, gamma))
    chain.advance_blocks(4)
    assert chain.location(tx)[0] == 2
    return chain, dev, gamma, tx


def test_message_encoding():
    m = encode_message(Action.NO_ALERT)
    assert len(m) == 33 and decode_message(m) == (Action.NO_ALERT, NO_ALERT_MARKER)
    h = digest(b"proof")
    assert decode_message(encode_message(Action.ALERT, h)) == (Action.ALERT, h)
    with pytest.raises(ValueError):
        encode_message(Action.ALERT, b"short")


def test_seal_fresh_nonces_and_map_growth():
    dev = TeeState(1, ChainState(Lockstep(1)).tip, b"s")
    m = encode_message(Action.ALERT, digest(b"p"))
    g1 = dev.seal(m, 3)
    assert len(dev.handles) == 1
    g2 = dev.seal(m, 3)
    assert g1 != g2 and len(dev.handles) == 2


def test_boundary_exactly_met_opens_and_binds():
    chain, dev, gamma, tx = setup()
    m, r, att = dev.unseal_after(gamma, build_pop(chain, 0, tx, 5))
    assert commitment_handle(m, r, 3) == gamma
    assert verify_attestation(dev.verification_key, att)


def test_one_block_short_is_refused():
    chain, dev, gamma, tx = setup()
    with pytest.raises(InsufficientDepth):
        dev.unseal_after(gamma, build_pop(chain, 0, tx, 4))


def test_forked_headers_rejected():
    chain, dev, gamma, tx = setup()
    fork = ChainState(Lockstep(1), consensus_key=b"attacker")
    fork.advance(1)
    ftx = fork.submit(Transaction(1, TxKind.COMMIT, gamma))
    fork.advance_blocks(8)
    with pytest.raises(BadHeaderChain):
        dev.unseal_after(gamma, build_pop(fork, 0, ftx))


def test_other_chain_rejected():
    _, dev, gamma, _ = setup()
    other = ChainState(Lockstep(1), chain_id=b"other")
    other.advance(1)
    otx = other.submit(Transaction(1, TxKind.COMMIT, gamma))
    other.advance_blocks(8)
    with pytest.raises(BadHeaderChain):
        dev.unseal_after(gamma, build_pop(other, 0, otx))


def test_unknown_handle_and_wrong_tx():
    chain, dev, gamma, tx = setup()
    with pytest.raises(UnknownHandle):
        dev.unseal_after(b"\x00" * 32, build_pop(chain, 0, tx))
    pop = build_pop(chain, 0, tx)
    wrong = Transaction(1, TxKind.COMMIT, b"\x01" * 32, tx.submitted_at)
    with pytest.raises(NotIncluded):
        dev.unseal_after(gamma, type(pop)(pop.headers, pop.inclusion, pop.inclusion_height_index, wrong))


def test_peek_only_on_leaky_devices():
    chain, dev, gamma, _ = setup()
    with pytest.raises(NonceSealed):
        dev.peek_nonce(gamma)
    leaky = TeeState(2, chain.headers[0], b"s", leaky=True)
    g = leaky.seal(encode_message(Action.ALERT, digest(b"x")), 3)
    m, r = leaky.peek_nonce(g)
    assert commitment_handle(m, r, 3) == g


def test_attestation_checks():
    chain, dev, gamma, tx = setup()
    _, _, att = dev.unseal_after(gamma, build_pop(chain, 0, tx))
    assert Attestation.decode(att.encode()) == att
    flipped = Attestation(att.gamma, att.n_commit, bytes([att.message[0] ^ 1]) + att.message[1:],
                          att.nonce, att.signature)
    assert not verify_attestation(dev.verification_key, flipped)
    assert not verify_attestation(HmacSigner(b"unregistered").verification_key, att)


def test_checkpoint_advances_and_blocks_replay():
    chain, dev, gamma, tx = setup()
    dev.unseal_after(gamma, build_pop(chain, 0, tx, 5))
    assert dev.checkpoint.height == 5
    with pytest.raises(BadHeaderChain):
        dev.unseal_after(gamma, build_pop(chain, 0, tx, 5))


@given(st.integers(0, 6), st.integers(1, 5), st.integers(0, 2**16))
def test_never_opens_before_depth(n_commit, dw, seed):
    chain = ChainState(BoundedDelay(dw, seed))
    dev = TeeState(1, chain.tip, b"h", chain.consensus_key)
    gamma = dev.seal(encode_message(Action.NO_ALERT), n_commit)
    tx = chain.submit(Transaction(1, TxKind.COMMIT, gamma))
    chain.advance(dw + n_commit + 2)
    inc = chain.location(tx)[0]
    for upto in range(inc, chain.height + 1):
        pop = build_pop(chain, 0, tx, upto)
        if upto - inc < n_commit:
            with pytest.raises(InsufficientDepth):
                dev.unseal_after(gamma, pop)
        else:
            dev.unseal_after(gamma, pop)
            break

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from alerting import adversary as adv
from alerting.agents import NodePolicy
from alerting.chain import Lockstep, ChainState
from alerting.core import Action, BribeVector, make_params
from alerting.protocols import (
    RoundConfig, SlotSchedule, TraceLog, WrongTimingModel, bounded_chain, check_alert, conservation_holds,
    decode_reveal, encode_reveal, make_alert_proof, run_burned_penalty, run_lockstep, run_naive_commit_reveal,
    run_sequential, run_tee_round, split_evenly,
)
from alerting.protocols.catalog import protocol_info

A, N = Action.ALERT, Action.NO_ALERT


def scripted(*acts):
    return {i + 1: NodePolicy.scripted(a) for i, a in enumerate(acts)}


def P(n, lam, c=0, **kw):
    return make_params({"n": n, "penalty_lambda": lam, "operator_cost_c": c, **kw})


# --------------------------------------------------------------- helpers

def test_split_evenly_remainder_to_lowest():
    assert split_evenly(10, [3, 1, 2]) == {1: 4, 2: 3, 3: 3}
    assert split_evenly(5, []) == {}


def test_alert_proofs():
    assert check_alert(make_alert_proof(b"ev", 3), b"ev")
    assert not check_alert(make_alert_proof(b"other", 3), b"ev")


def test_reveal_roundtrip():
    payload = encode_reveal(A, b"proof", b"\x01" * 32, b"att")
    action, h, nonce, att, proof = decode_reveal(payload)
    assert (action, nonce, att, proof) == (A, b"\x01" * 32, b"att", b"proof")
    with pytest.raises(ValueError):
        decode_reveal(payload[:-1])


def test_catalog():
    assert protocol_info("sequential").latency_class == "Theta(n)"
    with pytest.raises(KeyError):
        protocol_info("nope")


# ---------------------------------------------------------- burned penalty

def test_burned_two_alerters():
    p = P(3, 1, 6)
    o = run_burned_penalty(RoundConfig(p), scripted(A, A, N), BribeVector())
    assert o.node_payoffs == {1: 3, 2: 3, 3: -1}
    assert o.burned == 10**6 and conservation_holds(o, burn=True)


def test_burned_no_alerters_and_zero_c():
    p = P(3, 1)
    o = run_burned_penalty(RoundConfig(p), scripted(N, N, N), BribeVector.from_list([2, 2, 2], 9))
    assert not o.alert_raised and not o.slashed and o.adversary_payoff == 3
    o = run_burned_penalty(RoundConfig(p), scripted(A, N, N), BribeVector())
    assert o.node_payoffs == {1: 0, 2: -1, 3: -1}


# ---------------------------------------------------------------- lockstep

def test_lockstep_one_alerter():
    o = run_lockstep(RoundConfig(P(4, 10)), scripted(A, N, N, N), BribeVector())
    assert o.node_payoffs == {1: 30, 2: -10, 3: -10, 4: -10}
    assert o.tx_count == 1 and conservation_holds(o)


def test_lockstep_all_alert():
    o = run_lockstep(RoundConfig(P(4, 10, 2)), scripted(A, A, A, A), BribeVector())
    assert set(o.node_payoffs.values()) == {Fraction(1, 2)}


def test_lockstep_late_alert_is_missed():
    o = run_lockstep(RoundConfig(P(3, 1)), scripted(A, A, N), BribeVector(), late_nodes={2})
    assert o.alerter_set_F == {1}
    assert o.node_payoffs[2] == -1


def test_lockstep_needs_lockstep_chain():
    p = P(3, 1)
    with pytest.raises(WrongTimingModel):
        run_lockstep(RoundConfig(p), {}, BribeVector(), chain=bounded_chain(p))


def test_lockstep_traces_hide_choice_until_inclusion():
    p = P(3, 1)

    def obs(acts):
        from alerting.protocols import lockstep_chain, observable_trace
        chain, trace = lockstep_chain(p), TraceLog()
        run_lockstep(RoundConfig(p, start_step=1), scripted(*acts), BribeVector(), chain=chain, trace=trace)
        return observable_trace(chain, trace, 1 + p.delta_write - 1), observable_trace(chain, trace, chain.clock)

    a, b = obs((A, N, N)), obs((N, N, N))
    assert a[0] == b[0] and a[1] != b[1]


# --------------------------------------------------------------------- TEE

def test_tee_all_no_alert():
    o = run_tee_round(RoundConfig(P(4, 10)), scripted(N, N, N, N), BribeVector())
    assert not o.alert_raised and not o.slashed and o.tx_count == 8


def test_tee_withheld_reveal_raises_alert():
    o = run_tee_round(RoundConfig(P(4, 10)), scripted(N, N, N, N), BribeVector(), withhold={3})
    assert o.alert_raised and not o.alerter_set_F and conservation_holds(o)


def test_tee_one_valid_alert():
    o = run_tee_round(RoundConfig(P(4, 10)), scripted(N, A, N, N), BribeVector())
    assert o.alerter_set_F == {2}
    assert o.node_payoffs == {1: -10, 2: 30, 3: -10, 4: -10}


def test_tee_needs_bounded_chain():
    with pytest.raises(WrongTimingModel):
        run_tee_round(RoundConfig(P(3, 1)), {}, BribeVector(), chain=ChainState(Lockstep(2)))


def test_tee_reveal_timing_and_trace():
    p = P(3, 1)
    trace = TraceLog()
    chain = bounded_chain(p, 5)
    run_tee_round(RoundConfig(p, seed=5), {}, BribeVector(), chain=chain, trace=trace)
    start = trace.named("round_start")[0].detail
    h0 = int(start.split()[0].split("=")[1])
    reveals = [e for e in trace.named("reveal_included")]
    assert len(reveals) == 3
    assert all(h0 + p.n_commit <= int(e.detail.split("height=")[1]) < h0 + p.n_commit + p.n_reveal for e in reveals)


# ---------------------------------------------------------- early reveal

def rational(n):
    return {i: NodePolicy.bribed() for i in range(1, n + 1)}


def test_naive_script_cost():
    p = P(4, 1)
    o = run_naive_commit_reveal(RoundConfig(p), rational(4), BribeVector({}, 100),
                                collusion_script=adv.early_reveal_script(p, 0))
    assert not o.alert_raised
    assert o.adversary_spend == Fraction(25, 3)
    assert o.adversary_payoff == 100 - Fraction(25, 3)
    assert conservation_holds(o)


def test_tee_script_fails():
    p = P(4, 1)
    trace = TraceLog()
    o = run_tee_round(RoundConfig(p), rational(4), BribeVector({}, 100),
                      collusion_script=adv.early_reveal_script(p, 0), trace=trace)
    assert o.alert_raised
    assert [e.detail for e in trace.named("early_open_failed")] == ["InsufficientDepth"]
    assert trace.named("deal_void")


def test_empty_script_matches_honest_tee_path():
    p = P(3, 1)
    from alerting.protocols import EarlyRevealScript
    a = run_tee_round(RoundConfig(p), {}, BribeVector(), collusion_script=EarlyRevealScript((), lambda k: 0))
    b = run_tee_round(RoundConfig(p), {}, BribeVector())
    assert (a.alerter_set_F, a.node_payoffs, a.tx_count) == (b.alerter_set_F, b.node_payoffs, b.tx_count)


# --------------------------------------------------------------- sequential

def test_sequential_slot_three():
    p = P(3, 1)
    o = run_sequential(RoundConfig(p), scripted(N, N, A), BribeVector(), SlotSchedule.identity(3))
    assert o.alert_slot == 3 and o.node_payoffs == {1: -1, 2: -1, 3: 2}


def test_sequential_slot_one():
    p = P(3, 1)
    o = run_sequential(RoundConfig(p), {}, BribeVector(), SlotSchedule((2, 1, 3)))
    assert o.alert_slot == 1 and o.first_alerter == 2 and not o.slashed


def test_sequential_no_alert():
    p = P(3, 1)
    b = BribeVector.from_list([1, 2, 3], 10)
    o = run_sequential(RoundConfig(p), scripted(N, N, N), b, SlotSchedule.identity(3))
    assert not o.alert_raised and o.node_payoffs == {1: 1, 2: 2, 3: 3} and o.adversary_payoff == 4


def test_sequential_rejects_out_of_slot_alert():
    p = P(3, 1)
    o = run_sequential(RoundConfig(p), scripted(N, N, N), BribeVector(), SlotSchedule.identity(3),
                       rogue_alerts=[(1, 3)])
    assert not o.alert_raised


# ----------------------------------------------------------- conservation

@settings(max_examples=40)
@given(st.integers(2, 5), st.integers(1, 5), st.integers(0, 5), st.integers(0, 10**6), st.data())
def test_conservation_all_protocols(n, lam, c, seed, data):
    p = P(n, lam, c)
    pols = {i: data.draw(st.sampled_from([NodePolicy.honest(), NodePolicy.bribed(seed),
                                          NodePolicy.scripted(N), NodePolicy.mixed(Fraction(1, 2), seed)]))
            for i in range(1, n + 1)}
    b = BribeVector.from_list(data.draw(st.lists(st.integers(0, 3 * n * lam), min_size=n, max_size=n)), 50)
    cfg = RoundConfig(p, seed=seed)
    assert conservation_holds(run_lockstep(cfg, pols, b))
    assert conservation_holds(run_burned_penalty(cfg, pols, b), burn=True)
    assert conservation_holds(run_tee_round(cfg, pols, b))
    assert conservation_holds(run_sequential(cfg, pols, b, SlotSchedule.for_round(n, seed)))


@settings(max_examples=25)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_rounds_are_reproducible(n, seed):
    p = P(n, 1)
    pols = {i: NodePolicy.mixed(Fraction(1, 2), seed) for i in range(1, n + 1)}
    cfg = RoundConfig(p, seed=seed)
    t1, t2 = TraceLog(), TraceLog()
    o1 = run_tee_round(cfg, pols, BribeVector(), trace=t1)
    o2 = run_tee_round(cfg, pols, BribeVector(), trace=t2)
    assert o1 == o2 and t1.lines() == t2.lines()

from fractions import Fraction

from hypothesis import given, strategies as st

from alerting.agents import AgentState, NodePolicy, agent_for, decide_burned, decide_sequential, decide_simultaneous
from alerting.core import Action, BribeVector, TokenAmount, make_params


def rational(beta, seed="0"):
    return AgentState(1, NodePolicy.bribed(), seed, TokenAmount.of(beta))


def test_simultaneous_dominant_regions():
    p = make_params({"n": 4, "penalty_lambda": 10})
    assert decide_simultaneous(rational(0), p) is Action.ALERT
    assert decide_simultaneous(rational(p.lam * 3 + p.eps), p) is Action.NO_ALERT
    assert decide_simultaneous(rational(100), p, alert_needed=False) is Action.NO_ALERT


def test_interior_mixing_frequency():
    p = make_params({"n": 3, "penalty_lambda": 1})
    draws = 100_000
    silent = sum(decide_simultaneous(rational("1.5", f"s:{i}"), p) is Action.NO_ALERT for i in range(draws))
    assert abs(silent / draws - 0.5) <= 0.005


def test_sequential_tie_rule():
    p = make_params({"n": 3, "penalty_lambda": 1})
    assert decide_sequential(rational(0), 1, p) is Action.ALERT
    assert decide_sequential(rational(2), 3, p) is Action.ALERT
    assert decide_sequential(rational("2.01"), 3, p) is Action.NO_ALERT


def test_burned_penalty_rule():
    p = make_params({"n": 3, "penalty_lambda": 1, "c": 2})
    assert decide_burned(rational(3), p) is Action.NO_ALERT
    assert decide_burned(rational("2.999999"), p) is Action.ALERT


def test_honest_and_scripted():
    p = make_params({"n": 3, "penalty_lambda": 1})
    honest = AgentState(1, NodePolicy.honest(), "0", TokenAmount.of(100))
    assert decide_simultaneous(honest, p) is Action.ALERT
    scripted = NodePolicy.scripted(Action.NO_ALERT, Action.ALERT)
    acts = [decide_simultaneous(AgentState(1, scripted, "0", round_index=r), p) for r in range(3)]
    assert acts == [Action.NO_ALERT, Action.ALERT, Action.NO_ALERT]


@given(st.integers(0, 10**6), st.integers(0, 100), st.integers(1, 5))
def test_decisions_are_seed_deterministic(salt, r, node):
    p = make_params({"n": 5, "penalty_lambda": 1})
    pols = {node: NodePolicy.mixed(Fraction(1, 2), 3)}
    b = BribeVector()
    a1 = decide_simultaneous(agent_for(node, pols, b, r, salt), p)
    a2 = decide_simultaneous(agent_for(node, pols, b, r, salt), p)
    assert a1 is a2


def test_agent_sees_only_own_bribe():
    b = BribeVector.from_list([1, 2, 3])
    assert agent_for(2, {}, b).observed_bribe == TokenAmount.of(2)

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from alerting import adversary as adv
from alerting import game
from alerting.core import TokenAmount, make_params
from alerting.sequencing import SlotSchedule

K = adv.StrategyKind


def test_threshold_bribe_vector():
    p = make_params({"n": 4, "penalty_lambda": 10, "epsilon": "0.01"})
    v = adv.emit_bribes(adv.AdversaryStrategy(K.THRESHOLD), p)
    assert v.as_list(4) == [Fraction(3001, 100)] * 4 and v.total().tokens == Fraction(12004, 100)


def test_sequential_greedy_vector():
    p = make_params({"n": 3, "penalty_lambda": 1, "epsilon": "0.01"})
    v = adv.emit_bribes(adv.AdversaryStrategy(K.SEQUENTIAL_GREEDY), p, SlotSchedule.identity(3))
    assert v.as_list(3) == [Fraction(1, 100), Fraction(101, 100), Fraction(201, 100)]
    with pytest.raises(adv.MissingSchedule):
        adv.emit_bribes(adv.AdversaryStrategy(K.SEQUENTIAL_GREEDY), p)


def test_no_bribe_and_budget_cap():
    p = make_params({"n": 3, "penalty_lambda": 1})
    assert not adv.emit_bribes(adv.AdversaryStrategy(), p).offers
    capped = adv.AdversaryStrategy(K.THRESHOLD, budget_cap=TokenAmount.of(5))
    assert not adv.emit_bribes(capped, p).offers


@given(st.integers(2, 8), st.integers(0, 100), st.integers(0, 1000))
def test_budget_cap_never_exceeded(n, beta, cap):
    p = make_params({"n": n, "penalty_lambda": 1})
    s = adv.AdversaryStrategy(K.UNIFORM, beta=TokenAmount.of(beta), budget_cap=TokenAmount.of(cap))
    assert adv.emit_bribes(s, p).total().tokens <= cap


def test_rational_decision_simultaneous():
    p = make_params({"n": 4, "penalty_lambda": 10})
    attack = adv.rational_decision(adv.AdversaryStrategy(K.THRESHOLD, TokenAmount.of(121)), p, "lockstep")
    assert isinstance(attack, adv.Attack)
    abstain = adv.rational_decision(adv.AdversaryStrategy(K.THRESHOLD, TokenAmount.of(120)), p, "lockstep")
    assert isinstance(abstain, adv.Abstain)


def test_rational_decision_sequential():
    p = make_params({"n": 4, "penalty_lambda": 10})
    d = adv.rational_decision(adv.AdversaryStrategy(K.SEQUENTIAL_GREEDY, TokenAmount.of(61)), p, "sequential")
    assert isinstance(d, adv.Attack)
    d = adv.rational_decision(adv.AdversaryStrategy(K.SEQUENTIAL_GREEDY, TokenAmount.of(60)), p, "sequential")
    assert isinstance(d, adv.Abstain)


def test_uniform_interior_at_bound_is_unprofitable():
    p = make_params({"n": 3, "penalty_lambda": 1})
    s = adv.AdversaryStrategy(K.UNIFORM, TokenAmount.of(6), beta=TokenAmount.of("1.5"))
    util, heuristic = adv.expected_attack_utility(adv.emit_bribes(s, p), p, "tee")
    assert util == Fraction(-3, 2) and not heuristic


def test_early_reveal_offers_sum_to_cost():
    p = make_params({"n": 4, "penalty_lambda": 1})
    offers = [adv.early_reveal_offer(k, p, 0) for k in range(4)]
    assert offers == [1, Fraction(4, 3), 2, 4]
    assert sum(offers) == game.early_reveal_attack_cost(p, 0)

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from alerting.core import (
    MICRO, Action, BribeVector, InvalidParams, TokenAmount, format_tokens, make_params, params_to_raw,
)

BASE = {"n": 4, "penalty_lambda": 10, "operator_cost_c": 0, "n_commit": 3, "n_reveal": 5,
        "delta_write": 2, "delta_block": 1, "delta_slot": 3}


def test_valid_params():
    p = make_params(BASE)
    assert (p.n, p.lam, p.c, p.n_commit, p.n_reveal) == (4, 10, 0, 3, 5)


def test_n_below_two_rejected():
    with pytest.raises(InvalidParams) as err:
        make_params({**BASE, "n": 1})
    assert any("n >= 2" in v for v in err.value.violations)


def test_commit_window_must_precede_reveal():
    with pytest.raises(InvalidParams) as err:
        make_params({**BASE, "n_commit": 5, "n_reveal": 5})
    assert any("n_commit < n_reveal" in v for v in err.value.violations)


def test_all_violations_reported():
    with pytest.raises(InvalidParams) as err:
        make_params({"n": 0, "penalty_lambda": 0, "delta_slot": 1, "bogus": 3})
    assert len(err.value.violations) >= 4


def test_slot_longer_than_write_delay():
    with pytest.raises(InvalidParams):
        make_params({**BASE, "delta_slot": 2})


def test_commit_depth_covers_write_delay():
    with pytest.raises(InvalidParams):
        make_params({**BASE, "delta_write": 4, "n_commit": 3, "n_reveal": 5, "delta_slot": 5})


def test_aliases_and_replace_roundtrip():
    p = make_params({"n": 3, "lambda": "1.5", "c": "0.25"})
    assert p.lam == Fraction(3, 2) and p.c == Fraction(1, 4)
    assert make_params(params_to_raw(p)) == p
    assert p.replace(n=5).n == 5


def test_token_amounts_are_exact_micros():
    assert TokenAmount.of("0.000001").micros == 1
    with pytest.raises(ValueError):
        TokenAmount.of(Fraction(1, 3))
    with pytest.raises(TypeError):
        TokenAmount.of(0.5)
    with pytest.raises(ValueError):
        TokenAmount(-1)


def test_format_tokens():
    assert format_tokens(Fraction(25, 3)) == "25/3"
    assert format_tokens(Fraction(3, 2)) == "1.5"
    assert format_tokens(Fraction(7)) == "7"


def test_action_bytes_roundtrip():
    for a in Action:
        assert Action.from_byte(a.byte) is a
    with pytest.raises(ValueError):
        Action.from_byte(7)


def test_bribe_vector_drops_zero_offers():
    v = BribeVector.from_list([0, 2, "0.5"], 10)
    assert v.offers.keys() == {2, 3}
    assert v.total().tokens == Fraction(5, 2)
    assert v.as_list(3) == [0, 2, Fraction(1, 2)]
    with pytest.raises(ValueError):
        v.check_size(2)


@given(st.integers(0, 10**12), st.integers(0, 10**12))
def test_token_arithmetic_matches_integers(a, b):
    x, y = TokenAmount(a), TokenAmount(b)
    assert (x + y).micros == a + b
    assert (x + y).tokens == Fraction(a + b, MICRO)

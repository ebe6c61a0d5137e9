"""Shared vocabulary: money, parameters, actions, bribes and outcomes.

Money is held as integer micro-tokens. Analysis code works in exact
``Fraction`` values denominated in whole tokens; settlement code works in
integer micro-tokens and converts at the edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Union

MICRO = 10**6

NodeId = int
PayoffAmount = Fraction  # signed, in tokens

MoneyLike = Union["TokenAmount", int, str, Fraction, Decimal]


class InvalidParams(ValueError):
    """Raised by :func:`make_params` with one diagnostic per violated rule."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True, order=True)
class TokenAmount:
    """Nonnegative token balance stored as integer micro-tokens."""

    micros: int

    def __post_init__(self):
        if not isinstance(self.micros, int) or isinstance(self.micros, bool):
            raise TypeError(f"micros must be int, got {type(self.micros).__name__}")
        if self.micros < 0:
            raise ValueError(f"token amount cannot be negative: {self.micros} micros")

    @classmethod
    def of(cls, value: MoneyLike) -> "TokenAmount":
        """Build from a token-denominated value; must be a whole number of micros."""
        if isinstance(value, TokenAmount):
            return value
        frac = Fraction(value) if not isinstance(value, float) else None
        if frac is None:
            raise TypeError("floats are not accepted as money; use str or Fraction")
        scaled = frac * MICRO
        if scaled.denominator != 1:
            raise ValueError(f"{value} is not a whole number of micro-tokens")
        return cls(int(scaled))

    @classmethod
    def zero(cls) -> "TokenAmount":
        return cls(0)

    @property
    def tokens(self) -> Fraction:
        return Fraction(self.micros, MICRO)

    def __add__(self, other: "TokenAmount") -> "TokenAmount":
        return TokenAmount(self.micros + _micros(other))

    def __sub__(self, other: "TokenAmount") -> "TokenAmount":
        return TokenAmount(self.micros - _micros(other))

    def __mul__(self, k: int) -> "TokenAmount":
        if not isinstance(k, int):
            return NotImplemented
        return TokenAmount(self.micros * k)

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return self.micros != 0

    def __str__(self) -> str:
        return format_tokens(self.tokens)


def _micros(x) -> int:
    if isinstance(x, TokenAmount):
        return x.micros
    raise TypeError(f"expected TokenAmount, got {type(x).__name__}")


def as_tokens(value: MoneyLike) -> Fraction:
    """Exact token value of any money-like input."""
    if isinstance(value, TokenAmount):
        return value.tokens
    if isinstance(value, float):
        raise TypeError("floats are not accepted as money; use str or Fraction")
    return Fraction(value)


def to_micros(value: Fraction) -> int:
    scaled = Fraction(value) * MICRO
    if scaled.denominator != 1:
        raise ValueError(f"{value} is not a whole number of micro-tokens")
    return int(scaled)


def format_tokens(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    if (value * MICRO).denominator == 1:
        return str(Decimal(value.numerator) / Decimal(value.denominator))
    return f"{value.numerator}/{value.denominator}"


class Action(Enum):
    ALERT = "Alert"
    NO_ALERT = "NoAlert"

    @property
    def byte(self) -> int:
        return 1 if self is Action.ALERT else 0

    @classmethod
    def from_byte(cls, b: int) -> "Action":
        if b == 1:
            return cls.ALERT
        if b == 0:
            return cls.NO_ALERT
        raise ValueError(f"bad action byte {b}")


@dataclass(frozen=True)
class ProtocolParams:
    n: int
    penalty_lambda: TokenAmount
    operator_cost_c: TokenAmount
    delta_write: int
    delta_block: int
    n_commit: int
    n_reveal: int
    delta_slot: int
    epsilon: TokenAmount = TokenAmount(1)

    # exact token-valued views used throughout the analysis code
    @property
    def lam(self) -> Fraction:
        return self.penalty_lambda.tokens

    @property
    def c(self) -> Fraction:
        return self.operator_cost_c.tokens

    @property
    def eps(self) -> Fraction:
        return self.epsilon.tokens

    @property
    def min_blocks(self) -> int:
        return math.ceil(self.delta_write / self.delta_block)

    def replace(self, **changes) -> "ProtocolParams":
        raw = params_to_raw(self)
        raw.update(changes)
        return make_params(raw)


_DEFAULTS = {
    "c": 0,
    "delta_write": 2,
    "delta_block": 1,
    "n_commit": 3,
    "n_reveal": 5,
    "delta_slot": 3,
    "epsilon": Fraction(1, MICRO),
}

_ALIASES = {
    "lambda": "penalty_lambda",
    "lam": "penalty_lambda",
    "penalty": "penalty_lambda",
    "c": "operator_cost_c",
    "operator_cost": "operator_cost_c",
    "eps": "epsilon",
}


def make_params(raw: Mapping[str, object]) -> ProtocolParams:
    """Validate a raw parameter record.

    Money fields are token-denominated (int, str, Fraction, Decimal or
    TokenAmount). Missing timing fields take small defaults that satisfy every
    rule. Every violated rule is reported, not just the first.
    """
    rec: Dict[str, object] = {}
    for key, value in {**_DEFAULTS, **dict(raw)}.items():
        rec[_ALIASES.get(key, key)] = value

    errors: List[str] = []
    known = {
        "n", "penalty_lambda", "operator_cost_c", "delta_write", "delta_block",
        "n_commit", "n_reveal", "delta_slot", "epsilon",
    }
    for key in rec:
        if key not in known:
            errors.append(f"{key}: unknown parameter")
    if "n" not in rec:
        errors.append("n: missing")
    if "penalty_lambda" not in rec:
        errors.append("penalty_lambda: missing")

    def money(name: str) -> Optional[TokenAmount]:
        if name not in rec:
            return None
        try:
            return TokenAmount.of(rec[name])  # type: ignore[arg-type]
        except (TypeError, ValueError) as exc:
            errors.append(f"{name}: {exc}")
            return None

    def integer(name: str) -> Optional[int]:
        if name not in rec:
            return None
        v = rec[name]
        if isinstance(v, bool) or not isinstance(v, int):
            errors.append(f"{name}: must be an integer, got {v!r}")
            return None
        return v

    n = integer("n")
    lam = money("penalty_lambda")
    c = money("operator_cost_c")
    eps = money("epsilon")
    dw = integer("delta_write")
    db = integer("delta_block")
    nc = integer("n_commit")
    nr = integer("n_reveal")
    ds = integer("delta_slot")

    if n is not None and n < 2:
        errors.append(f"n: n >= 2 violated (got {n})")
    if lam is not None and lam.micros <= 0:
        errors.append("penalty_lambda: lambda > 0 violated")
    if eps is not None and eps.micros <= 0:
        errors.append("epsilon: epsilon > 0 violated")
    if dw is not None and dw <= 0:
        errors.append(f"delta_write: delta_write > 0 violated (got {dw})")
    if db is not None and db <= 0:
        errors.append(f"delta_block: delta_block > 0 violated (got {db})")
    if nc is not None and nr is not None and not nc < nr:
        errors.append(f"n_commit: n_commit < n_reveal violated ({nc} >= {nr})")
    if dw is not None and db is not None and dw > 0 and db > 0:
        need = math.ceil(dw / db)
        if nc is not None and nc < need:
            errors.append(f"n_commit: n_commit >= ceil(delta_write/delta_block) = {need} violated (got {nc})")
        if nr is not None and nr < need:
            errors.append(f"n_reveal: n_reveal >= ceil(delta_write/delta_block) = {need} violated (got {nr})")
    if ds is not None and dw is not None and not ds > dw:
        errors.append(f"delta_slot: delta_slot > delta_write violated ({ds} <= {dw})")

    if errors:
        raise InvalidParams(errors)
    return ProtocolParams(
        n=n, penalty_lambda=lam, operator_cost_c=c, delta_write=dw, delta_block=db,
        n_commit=nc, n_reveal=nr, delta_slot=ds, epsilon=eps,
    )


def params_to_raw(p: ProtocolParams) -> Dict[str, object]:
    return {
        "n": p.n,
        "penalty_lambda": p.penalty_lambda,
        "operator_cost_c": p.operator_cost_c,
        "delta_write": p.delta_write,
        "delta_block": p.delta_block,
        "n_commit": p.n_commit,
        "n_reveal": p.n_reveal,
        "delta_slot": p.delta_slot,
        "epsilon": p.epsilon,
    }


@dataclass(frozen=True)
class BribeVector:
    """Private per-node offers for choosing NoAlert, plus the adversary's gain G."""

    offers: Mapping[NodeId, TokenAmount] = field(default_factory=dict)
    gain_G: TokenAmount = TokenAmount(0)

    def __post_init__(self):
        clean = {}
        for node, amount in dict(self.offers).items():
            amount = TokenAmount.of(amount)
            if amount.micros:
                clean[int(node)] = amount
        object.__setattr__(self, "offers", clean)
        object.__setattr__(self, "gain_G", TokenAmount.of(self.gain_G))

    @classmethod
    def from_list(cls, amounts: Iterable[MoneyLike], gain_G: MoneyLike = 0,
                  first_id: int = 1) -> "BribeVector":
        return cls({first_id + i: TokenAmount.of(a) for i, a in enumerate(amounts)},
                   TokenAmount.of(gain_G))

    def bribe(self, node: NodeId) -> TokenAmount:
        return self.offers.get(node, TokenAmount(0))

    def beta(self, node: NodeId) -> Fraction:
        return self.bribe(node).tokens

    @property
    def G(self) -> Fraction:
        return self.gain_G.tokens

    def total(self) -> TokenAmount:
        return TokenAmount(sum(a.micros for a in self.offers.values()))

    def total_over(self, nodes: Iterable[NodeId]) -> Fraction:
        return sum((self.beta(i) for i in nodes), Fraction(0))

    def check_size(self, n: int) -> None:
        bad = [i for i in self.offers if not 1 <= i <= n]
        if bad:
            raise ValueError(f"bribes addressed to unknown nodes {sorted(bad)} (n={n})")

    def as_list(self, n: int) -> List[Fraction]:
        return [self.beta(i) for i in range(1, n + 1)]


@dataclass
class Outcome:
    """Result of one settled round.

    ``node_payoffs`` and ``adversary_payoff`` are exact token values and
    include bribes. ``rewards`` and ``slashed`` record the contract transfers
    in integer micro-tokens, ``burned`` the micro-tokens removed from the
    system.
    """

    alerter_set_F: FrozenSet[NodeId]
    node_payoffs: Dict[NodeId, PayoffAmount]
    adversary_payoff: PayoffAmount
    alert_raised: bool = False
    first_alerter: Optional[NodeId] = None
    alert_slot: Optional[int] = None
    rewards: Dict[NodeId, int] = field(default_factory=dict)
    slashed: Dict[NodeId, int] = field(default_factory=dict)
    burned: int = 0
    bribes_paid: Dict[NodeId, int] = field(default_factory=dict)
    tx_count: int = 0
    operator_paid: int = 0
    # off-contract payments for early openings; exact, since offers need not be whole micros
    side_payments: Dict[NodeId, Fraction] = field(default_factory=dict)

    @property
    def suppressed(self) -> bool:
        return not self.alert_raised

    @property
    def total_rewards(self) -> int:
        return sum(self.rewards.values())

    @property
    def total_slashed(self) -> int:
        return sum(self.slashed.values())

    @property
    def total_bribes(self) -> int:
        return sum(self.bribes_paid.values())

    @property
    def adversary_spend(self) -> Fraction:
        """Everything the adversary paid out, in tokens."""
        return Fraction(self.total_bribes, MICRO) + sum(self.side_payments.values(), Fraction(0))

"""Bribing strategies and the adversary's attack/abstain decision."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from . import game
from .core import BribeVector, MoneyLike, ProtocolParams, TokenAmount, as_tokens
from .protocols.commit_reveal import EarlyRevealScript
from .sequencing import SlotSchedule


class MissingSchedule(ValueError):
    pass


class StrategyKind(Enum):
    NO_BRIBE = "none"
    UNIFORM = "uniform"
    THRESHOLD = "threshold"
    SEQUENTIAL_GREEDY = "sequential_greedy"
    EARLY_REVEAL_GREEDY = "early_reveal_greedy"
    CUSTOM = "custom"


@dataclass(frozen=True)
class AdversaryStrategy:
    kind: StrategyKind = StrategyKind.NO_BRIBE
    gain_G: TokenAmount = TokenAmount(0)
    conditional: bool = False
    beta: Optional[TokenAmount] = None  # UNIFORM
    vector: Tuple[TokenAmount, ...] = ()  # CUSTOM, node order
    budget_cap: Optional[TokenAmount] = None

    def __post_init__(self):
        object.__setattr__(self, "gain_G", TokenAmount.of(self.gain_G))
        if self.beta is not None:
            object.__setattr__(self, "beta", TokenAmount.of(self.beta))
        object.__setattr__(self, "vector", tuple(TokenAmount.of(x) for x in self.vector))
        if self.budget_cap is not None:
            object.__setattr__(self, "budget_cap", TokenAmount.of(self.budget_cap))
        if self.kind is StrategyKind.UNIFORM and self.beta is None:
            raise ValueError("uniform strategy needs beta")


def early_reveal_offer(proven: int, params: ProtocolParams, epsilon: Optional[MoneyLike] = None) -> Fraction:
    """Offer to the next node after ``proven`` nodes have shown a NoAlert opening."""
    eps = params.eps if epsilon is None else as_tokens(epsilon)
    remaining = params.n - proven
    return (params.lam * proven + params.c) / remaining + params.lam + eps


def emit_bribes(strategy: AdversaryStrategy, params: ProtocolParams,
                schedule: Optional[SlotSchedule] = None) -> BribeVector:
    """The strategy's bribe vector. A vector above the budget cap is not affordable,
    so the adversary emits nothing."""
    n, G = params.n, strategy.gain_G
    k = strategy.kind
    if k is StrategyKind.NO_BRIBE:
        offers = {}
    elif k is StrategyKind.UNIFORM:
        offers = {i: strategy.beta for i in range(1, n + 1)}
    elif k is StrategyKind.THRESHOLD:
        beta = TokenAmount.of(game.no_alert_threshold(params) + params.eps)
        offers = {i: beta for i in range(1, n + 1)}
    elif k is StrategyKind.SEQUENTIAL_GREEDY:
        if schedule is None:
            raise MissingSchedule("sequential greedy bribes depend on the slot schedule")
        offers = dict(game.sequential_greedy_vector(params, schedule).offers)
    elif k is StrategyKind.EARLY_REVEAL_GREEDY:
        offers = {}  # paid per opening through the early-reveal script, not as standing offers
    else:
        if len(strategy.vector) > n:
            raise ValueError(f"custom vector has {len(strategy.vector)} entries for n={n}")
        offers = {i + 1: b for i, b in enumerate(strategy.vector)}
    vec = BribeVector(offers, G)
    if strategy.budget_cap is not None and vec.total().micros > strategy.budget_cap.micros:
        return BribeVector({}, G)
    return vec


def early_reveal_script(params: ProtocolParams, epsilon: Optional[MoneyLike] = None,
                        order: Optional[Sequence[int]] = None) -> EarlyRevealScript:
    order = tuple(order) if order is not None else tuple(range(1, params.n + 1))
    return EarlyRevealScript(order, lambda k: early_reveal_offer(k, params, epsilon))


# ---------------------------------------------------------------- decisions

@dataclass(frozen=True)
class Attack:
    bribes: BribeVector
    expected_utility: Fraction
    heuristic: bool = False


@dataclass(frozen=True)
class Abstain:
    expected_utility: Fraction
    heuristic: bool = False


Decision = Union[Attack, Abstain]

SIMULTANEOUS = ("lockstep", "tee")


def expected_attack_utility(bribes: BribeVector, params: ProtocolParams, protocol: str,
                            conditional: bool = False,
                            schedule: Optional[SlotSchedule] = None) -> Tuple[Fraction, bool]:
    """(expected adversary utility under rational nodes, heuristic flag)."""
    nodes = range(1, params.n + 1)
    if protocol in SIMULTANEOUS:
        if conditional:
            # only silence is paid for, and with conditional bribes alerting dominates below lambda(n-1)
            silent = all(bribes.beta(i) >= game.no_alert_threshold(params) for i in nodes)
            return ((bribes.G - bribes.total().tokens) if silent else Fraction(0)), False
        rep = game.equilibrium_report(bribes, params)
        return rep.adversary_expected_utility, rep.heuristic
    if protocol == "sequential":
        out = game.sequential_spne(bribes, schedule or SlotSchedule.identity(params.n), params)
        return out.adversary_payoff, False
    if protocol == "burned":
        silent = [i for i in nodes if bribes.beta(i) >= params.c + params.lam]
        if len(silent) == params.n:
            return bribes.G - bribes.total().tokens, False
        if conditional:
            return Fraction(0), False
        return -bribes.total_over(silent), False
    if protocol == "naive":
        # the early-reveal script buys every node one at a time
        cost = sum((early_reveal_offer(k, params) for k in range(params.n)), Fraction(0))
        return bribes.G - cost, False
    raise ValueError(f"unknown protocol {protocol!r}")


def rational_decision(strategy: AdversaryStrategy, params: ProtocolParams, protocol: str,
                      schedule: Optional[SlotSchedule] = None) -> Decision:
    if protocol == "sequential" and schedule is None:
        schedule = SlotSchedule.identity(params.n)
    bribes = emit_bribes(strategy, params, schedule)
    if not bribes.offers and protocol != "naive":
        return Abstain(Fraction(0))
    util, heuristic = expected_attack_utility(bribes, params, protocol, strategy.conditional, schedule)
    if util > 0:
        return Attack(bribes, util, heuristic)
    return Abstain(util, heuristic)

"""Closed-form game analysis for the alerting games.

Everything here is a pure function returning exact ``Fraction`` token values.
The only numeric step is the symmetric mixed-equilibrium solver, which
bisects in exact dyadic rationals and reports its bracket width so callers
can do interval checks.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Collection, Dict, List, Mapping, Optional, Union

from .core import (
    Action, BribeVector, MoneyLike, NodeId, Outcome, ProtocolParams, TokenAmount,
    as_tokens, format_tokens, to_micros,
)
from .sequencing import SlotSchedule


class EmptyAlerterSetWithAlertAction(ValueError):
    pass


class OutsideInteriorRange(ValueError):
    pass


class SlotOutOfRange(ValueError):
    pass


class DominanceClass(Enum):
    ALERT_DOMINANT = "AlertDominant"
    NO_ALERT_DOMINANT = "NoAlertDominant"
    INTERIOR = "Interior"


FSet = Union[Collection[NodeId], int]


def _size(F: FSet) -> int:
    return F if isinstance(F, int) else len(F)


# ------------------------------------------------------------------ payoffs

def sim_node_payoff(action: Action, bribe: MoneyLike, F: FSet, params: ProtocolParams) -> Fraction:
    """Node utility in the simultaneous game (bribe paid unconditionally).

    ``F`` is the alerter set (or its size); an alerting caller is in it.
    """
    k = _size(F)
    beta = as_tokens(bribe)
    if action is Action.ALERT:
        if k == 0:
            raise EmptyAlerterSetWithAlertAction("an alerting node must be in F")
        return (params.lam * (params.n - k) + params.c) / k
    return beta - params.lam if k else beta


def sim_adversary_payoff(bribes: BribeVector, F: Collection[NodeId], params: ProtocolParams) -> Fraction:
    if not F:
        return bribes.G - bribes.total().tokens
    return -sum((bribes.beta(i) for i in range(1, params.n + 1) if i not in F), Fraction(0))


def conditional_node_payoff(action: Action, bribe: MoneyLike, F: FSet, params: ProtocolParams) -> Fraction:
    """Like :func:`sim_node_payoff` but the bribe is only paid if no one alerts."""
    k = _size(F)
    if action is Action.ALERT:
        return sim_node_payoff(action, bribe, F, params)
    return -params.lam if k else as_tokens(bribe)


def conditional_adversary_payoff(bribes: BribeVector, F: Collection[NodeId], params: ProtocolParams) -> Fraction:
    if not F:
        return bribes.G - bribes.total().tokens
    return Fraction(0)


def burned_node_payoff(action: Action, bribe: MoneyLike, F: FSet, params: ProtocolParams) -> Fraction:
    """Burned-penalty variant: alerters split c, slashed stake is destroyed."""
    k = _size(F)
    beta = as_tokens(bribe)
    if action is Action.ALERT:
        if k == 0:
            raise EmptyAlerterSetWithAlertAction("an alerting node must be in F")
        return params.c / k
    return beta - params.lam if k else beta


# --------------------------------------------------------------- dominance

def alert_threshold(params: ProtocolParams) -> Fraction:
    """At or below this bribe, Alert weakly dominates."""
    return params.lam + params.c / params.n


def no_alert_threshold(params: ProtocolParams) -> Fraction:
    """At or above this bribe, NoAlert weakly dominates."""
    return params.lam * (params.n - 1) + params.c


def classify_dominance(beta: MoneyLike, params: ProtocolParams) -> DominanceClass:
    b = as_tokens(beta)
    if b <= alert_threshold(params):
        return DominanceClass.ALERT_DOMINANT
    if b >= no_alert_threshold(params):
        return DominanceClass.NO_ALERT_DOMINANT
    return DominanceClass.INTERIOR


def is_interior(beta: MoneyLike, params: ProtocolParams) -> bool:
    return classify_dominance(beta, params) is DominanceClass.INTERIOR


def no_symmetric_pure_ne(beta: MoneyLike, params: ProtocolParams) -> bool:
    """True iff both symmetric pure profiles admit a strictly profitable deviation."""
    n = params.n
    everyone = n
    stay = sim_node_payoff(Action.ALERT, beta, everyone, params)
    leave = sim_node_payoff(Action.NO_ALERT, beta, everyone - 1, params)
    all_alert_breaks = leave > stay
    stay = sim_node_payoff(Action.NO_ALERT, beta, 0, params)
    leave = sim_node_payoff(Action.ALERT, beta, 1, params)
    all_silent_breaks = leave > stay
    return all_alert_breaks and all_silent_breaks


# ------------------------------------------------------- mixed equilibrium

def inverse_alerters_expectation(q: Fraction, n: int) -> Fraction:
    """E[1/(1+Y)] for Y ~ Binomial(n-1, 1-q), via (1 - q^n) / (n(1 - q))."""
    q = Fraction(q)
    return sum((q**k for k in range(n)), Fraction(0)) / n


def expected_alert_payoff(q: Fraction, params: ProtocolParams) -> Fraction:
    """Alerting node's expected payoff when every other node stays silent w.p. q."""
    e = inverse_alerters_expectation(q, params.n)
    return (params.lam * params.n + params.c) * e - params.lam


def expected_silent_payoff(q: Fraction, beta: MoneyLike, params: ProtocolParams) -> Fraction:
    return as_tokens(beta) - params.lam + params.lam * Fraction(q) ** (params.n - 1)


def indifference_residual(q: Fraction, beta: MoneyLike, params: ProtocolParams) -> Fraction:
    """U_Alert(q) - U_NoAlert(q); increasing in q on [0, 1]."""
    return expected_alert_payoff(q, params) - expected_silent_payoff(q, beta, params)


RESIDUAL_TOL = Fraction(1, 10**12)
WIDTH_TOL = Fraction(1, 10**15)
MAX_ITER = 200


@dataclass(frozen=True)
class SolverResult:
    q: Fraction
    half_width: Fraction
    residual: Fraction
    iterations: int


@functools.lru_cache(maxsize=4096)
def _solve(beta: Fraction, params: ProtocolParams) -> SolverResult:
    lo, hi = WIDTH_TOL, 1 - WIDTH_TOL
    if indifference_residual(lo, beta, params) >= 0:
        return SolverResult(lo, WIDTH_TOL, indifference_residual(lo, beta, params), 0)
    if indifference_residual(hi, beta, params) <= 0:
        return SolverResult(hi, WIDTH_TOL, indifference_residual(hi, beta, params), 0)
    mid = (lo + hi) / 2
    r = indifference_residual(mid, beta, params)
    it = 1
    while it < MAX_ITER:
        if r == 0 or (abs(r) < RESIDUAL_TOL and hi - lo < WIDTH_TOL):
            break
        if r < 0:
            lo = mid
        else:
            hi = mid
        mid = (lo + hi) / 2
        r = indifference_residual(mid, beta, params)
        it += 1
    half = Fraction(0) if r == 0 else (hi - lo) / 2
    return SolverResult(mid, half, r, it)


def solve_symmetric(beta_uniform: MoneyLike, params: ProtocolParams) -> SolverResult:
    beta = as_tokens(beta_uniform)
    if not is_interior(beta, params):
        raise OutsideInteriorRange(
            f"beta={format_tokens(beta)} outside ({format_tokens(alert_threshold(params))}, "
            f"{format_tokens(no_alert_threshold(params))})")
    return _solve(beta, params)


def symmetric_mixed_q(beta_uniform: MoneyLike, params: ProtocolParams) -> Fraction:
    """Probability of NoAlert in the symmetric interior equilibrium."""
    return solve_symmetric(beta_uniform, params).q


@dataclass(frozen=True)
class MixedProfile:
    """Per-node NoAlert probabilities; ``tolerance`` bounds |q_i - true q_i|."""

    q: Mapping[NodeId, Fraction]
    tolerance: Fraction = Fraction(0)

    def __post_init__(self):
        clean = {int(k): Fraction(v) for k, v in dict(self.q).items()}
        for k, v in clean.items():
            if not 0 <= v <= 1:
                raise ValueError(f"q[{k}]={v} outside [0, 1]")
        object.__setattr__(self, "q", clean)

    @classmethod
    def symmetric(cls, n: int, q: Fraction, tolerance: Fraction = Fraction(0)) -> "MixedProfile":
        return cls({i: Fraction(q) for i in range(1, n + 1)}, Fraction(tolerance))

    @property
    def Q(self) -> Fraction:
        return math.prod(self.q.values(), start=Fraction(1))

    def p(self, node: NodeId) -> Fraction:
        return 1 - self.q[node]


@dataclass(frozen=True)
class BoundCheck:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def bribe_bound_coefficient(params: ProtocolParams) -> Fraction:
    """lambda n (n-1) + n c."""
    n = params.n
    return params.lam * n * (n - 1) + n * params.c


def expected_bribe_bound_check(bribes: BribeVector, profile: MixedProfile,
                               params: ProtocolParams) -> BoundCheck:
    """sum beta_i q_i >= (lambda n(n-1) + nc) Q, with interval slack when q is approximate."""
    coef = bribe_bound_coefficient(params)
    lhs = sum((bribes.beta(i) * q for i, q in profile.q.items()), Fraction(0))
    rhs = coef * profile.Q
    if profile.tolerance == 0:
        return BoundCheck(lhs, rhs, lhs >= rhs)
    d = profile.tolerance
    lhs_lo = sum((bribes.beta(i) * max(Fraction(0), q - d) for i, q in profile.q.items()), Fraction(0))
    rhs_hi = coef * math.prod((min(Fraction(1), q + d) for q in profile.q.values()), start=Fraction(1))
    return BoundCheck(lhs, rhs, lhs_lo >= rhs_hi)


def adversary_expected_utility(bribes: BribeVector, profile: MixedProfile) -> Fraction:
    spend = sum((bribes.beta(i) * q for i, q in profile.q.items()), Fraction(0))
    return bribes.G * profile.Q - spend


# ------------------------------------------------------------ resistances

def max_bribery_resistance(params: ProtocolParams) -> Fraction:
    return params.lam * params.n**2 + params.c * params.n


def burned_penalty_resistance(params: ProtocolParams) -> Fraction:
    return params.n * (params.c + params.lam)


def simultaneous_suppression_threshold(params: ProtocolParams) -> Fraction:
    return params.lam * params.n * (params.n - 1)


def sequential_suppression_threshold(params: ProtocolParams) -> Fraction:
    return params.lam * params.n * (params.n - 1) / 2


def sequential_delay_cost(m: int, params: ProtocolParams) -> Fraction:
    """Bribe total needed to keep slots 1..m silent (as a supremum of non-strict thresholds)."""
    if not 1 <= m <= params.n:
        raise SlotOutOfRange(f"m={m} outside 1..{params.n}")
    return params.lam * m * (m - 1) / 2


def early_reveal_attack_cost(params: ProtocolParams, epsilon: Optional[MoneyLike] = None) -> Fraction:
    n, lam = params.n, params.lam
    eps = params.eps if epsilon is None else as_tokens(epsilon)
    return sum((lam * (i - 1) / (n - i + 1) + lam + eps for i in range(1, n + 1)), Fraction(0))


# ---------------------------------------------------------- sequential game

def sequential_alerts(slot: int, beta: MoneyLike, params: ProtocolParams) -> bool:
    """Slot rule: alert iff the reward lambda(s-1) is at least the bribe."""
    return params.lam * (slot - 1) >= as_tokens(beta)


def sequential_outcome(first_slot: Optional[int], bribes: BribeVector, schedule: SlotSchedule,
                       params: ProtocolParams) -> Outcome:
    """Settle a sequential round in which the first alert comes at ``first_slot`` (None: nobody)."""
    lam = params.lam
    payoffs: Dict[NodeId, Fraction] = {}
    rewards: Dict[NodeId, int] = {}
    slashed: Dict[NodeId, int] = {}
    paid: Dict[NodeId, int] = {}
    adversary = Fraction(0)
    for s in range(1, schedule.n + 1):
        node = schedule.node_at(s)
        beta = bribes.beta(node)
        if first_slot is None:
            payoffs[node] = beta
        elif s < first_slot:
            payoffs[node] = beta - lam
            slashed[node] = params.penalty_lambda.micros
        elif s == first_slot:
            payoffs[node] = lam * (s - 1)
            rewards[node] = params.penalty_lambda.micros * (s - 1)
        else:
            payoffs[node] = Fraction(0)
        if first_slot is None or s < first_slot:
            if beta:
                paid[node] = to_micros(beta)
            adversary -= beta
    if first_slot is None:
        adversary += bribes.G
    alerter = None if first_slot is None else schedule.node_at(first_slot)
    return Outcome(
        alerter_set_F=frozenset() if alerter is None else frozenset({alerter}),
        node_payoffs=payoffs,
        adversary_payoff=adversary,
        alert_raised=alerter is not None,
        first_alerter=alerter,
        alert_slot=first_slot,
        rewards=rewards,
        slashed=slashed,
        bribes_paid=paid,
        tx_count=0 if alerter is None else 1,
    )


def sequential_spne(bribes: BribeVector, schedule: SlotSchedule, params: ProtocolParams) -> Outcome:
    """Backward induction over slots n..1.

    ``first[s]`` is the slot of the first alert in the subgame starting at s.
    A node compares its reward against its own bribe only: it sees nothing
    of the offers made to later slots.
    """
    if schedule.n != params.n:
        raise ValueError(f"schedule covers {schedule.n} slots, params.n={params.n}")
    first: List[Optional[int]] = [None] * (params.n + 2)
    for s in range(params.n, 0, -1):
        node = schedule.node_at(s)
        first[s] = s if sequential_alerts(s, bribes.beta(node), params) else first[s + 1]
    return sequential_outcome(first[1], bribes, schedule, params)


def sequential_greedy_vector(params: ProtocolParams, schedule: Optional[SlotSchedule] = None,
                             gain_G: MoneyLike = 0, slots: Optional[int] = None) -> BribeVector:
    """beta = lambda(s-1) + eps for slots 1..slots (all slots by default)."""
    schedule = schedule or SlotSchedule.identity(params.n)
    m = params.n if slots is None else slots
    offers = {schedule.node_at(s): TokenAmount.of(params.lam * (s - 1) + params.eps)
              for s in range(1, m + 1)}
    return BribeVector(offers, TokenAmount.of(gain_G))


def sequential_adversary_optimal(G: MoneyLike, params: ProtocolParams,
                                 schedule: Optional[SlotSchedule] = None) -> BribeVector:
    """Bribe every slot just past its threshold when that is cheaper than G; else bribe nobody."""
    gain = as_tokens(G)
    cost = sequential_suppression_threshold(params) + params.n * params.eps
    if cost < gain:
        return sequential_greedy_vector(params, schedule, gain)
    return BribeVector({}, TokenAmount.of(gain))


# ----------------------------------------------------------------- reports

@dataclass
class EquilibriumReport:
    regime: Dict[NodeId, DominanceClass]
    symmetric_q: Optional[Fraction]
    expected_total_bribe: Fraction
    adversary_expected_utility: Fraction
    success_probability_Q: Fraction
    heuristic: bool = False
    q: Dict[NodeId, Fraction] = field(default_factory=dict)

    def to_record(self) -> str:
        counts = {c: 0 for c in DominanceClass}
        for c in self.regime.values():
            counts[c] += 1
        lines = [
            f"alert_dominant={counts[DominanceClass.ALERT_DOMINANT]}",
            f"no_alert_dominant={counts[DominanceClass.NO_ALERT_DOMINANT]}",
            f"interior={counts[DominanceClass.INTERIOR]}",
            f"symmetric_q={'' if self.symmetric_q is None else float(self.symmetric_q)!r}",
            f"expected_total_bribe={float(self.expected_total_bribe)!r}",
            f"adversary_expected_utility={float(self.adversary_expected_utility)!r}",
            f"success_probability_Q={float(self.success_probability_Q)!r}",
            f"regime_label={'heuristic' if self.heuristic else 'exact'}",
        ]
        return "\n".join(lines)

    CSV_HEADER = ("symmetric_q,expected_total_bribe,adversary_expected_utility,"
                  "success_probability_Q,regime_label")

    def to_csv_row(self) -> str:
        sq = "" if self.symmetric_q is None else repr(float(self.symmetric_q))
        return ",".join([
            sq, repr(float(self.expected_total_bribe)), repr(float(self.adversary_expected_utility)),
            repr(float(self.success_probability_Q)), "heuristic" if self.heuristic else "exact",
        ])


def node_silence_probability(beta: MoneyLike, params: ProtocolParams) -> Fraction:
    cls = classify_dominance(beta, params)
    if cls is DominanceClass.ALERT_DOMINANT:
        return Fraction(0)
    if cls is DominanceClass.NO_ALERT_DOMINANT:
        return Fraction(1)
    return symmetric_mixed_q(beta, params)


def equilibrium_report(bribes: BribeVector, params: ProtocolParams) -> EquilibriumReport:
    """Expected play under rational nodes.

    Dominant-regime nodes are deterministic. Interior nodes play the symmetric
    solver's q for their own bribe, which is an equilibrium only when every
    node gets the same interior bribe; otherwise the report is flagged.
    """
    nodes = range(1, params.n + 1)
    regime = {i: classify_dominance(bribes.beta(i), params) for i in nodes}
    q = {i: node_silence_probability(bribes.beta(i), params) for i in nodes}
    interior = [i for i in nodes if regime[i] is DominanceClass.INTERIOR]
    uniform = len({bribes.beta(i) for i in nodes}) == 1
    symmetric_q = q[1] if interior and uniform else None
    heuristic = bool(interior) and not uniform
    profile = MixedProfile(q)
    spend = sum((bribes.beta(i) * q[i] for i in nodes), Fraction(0))
    return EquilibriumReport(
        regime=regime,
        symmetric_q=symmetric_q,
        expected_total_bribe=spend,
        adversary_expected_utility=adversary_expected_utility(bribes, profile),
        success_probability_Q=profile.Q,
        heuristic=heuristic,
        q=q,
    )

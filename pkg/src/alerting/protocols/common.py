"""Pieces shared by the protocol engines: round config, traces, alert proofs
and the integer settlement arithmetic."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional

from ..agents import NodePolicy
from ..chain import ChainState, digest
from ..core import MICRO, BribeVector, NodeId, Outcome, ProtocolParams

DEFAULT_EVIDENCE = b"observed-fault"


class WrongTimingModel(ValueError):
    pass


@dataclass(frozen=True)
class RoundConfig:
    params: ProtocolParams
    alert_needed: bool = True
    start_step: int = 0
    round_index: int = 0
    evidence: bytes = DEFAULT_EVIDENCE
    seed: int = 0

    def reveal_barrier(self, start_height: int) -> int:
        return start_height + self.params.n_commit


Policies = Mapping[NodeId, NodePolicy]


# ------------------------------------------------------------------ traces

@dataclass(frozen=True)
class TraceEvent:
    step: int
    actor: str
    event: str
    detail: str = ""
    # public events are visible to every party (on-chain or broadcast);
    # private ones stay between a node and its own device or the network
    public: bool = True

    def line(self) -> str:
        return f"{self.step},{self.actor},{self.event},{self.detail}"


@dataclass
class TraceLog:
    events: List[TraceEvent] = field(default_factory=list)

    def add(self, step: int, actor: str, event: str, detail: str = "", public: bool = True) -> None:
        self.events.append(TraceEvent(step, actor, event, detail, public))

    def lines(self, public_only: bool = False) -> List[str]:
        return [e.line() for e in self.events if e.public or not public_only]

    def named(self, event: str) -> List[TraceEvent]:
        return [e for e in self.events if e.event == event]


def observable_trace(chain: ChainState, trace: TraceLog, upto_step: int) -> bytes:
    """Everything a third party can see up to ``upto_step``, as bytes."""
    lines = chain.trace_lines(upto_step)
    lines += [e.line() for e in trace.events if e.public and e.step <= upto_step]
    return "\n".join(lines).encode()


# ------------------------------------------------------------- alert proofs

def make_alert_proof(evidence: bytes, node: NodeId) -> bytes:
    return digest(evidence) + struct.pack(">I", node)


def check_alert(proof: bytes, evidence: bytes) -> bool:
    """Default validity predicate: the proof commits to the round's evidence."""
    return proof.startswith(digest(evidence))


# -------------------------------------------------------------- settlement

def split_evenly(amount: int, recipients: Iterable[NodeId]) -> Dict[NodeId, int]:
    """floor(amount/k) each; the remainder goes to the lowest id."""
    ids = sorted(recipients)
    if not ids:
        return {}
    share, rest = divmod(amount, len(ids))
    out = {i: share for i in ids}
    out[ids[0]] += rest
    return out


def settle_round(params: ProtocolParams, bribes: BribeVector, alerters: Iterable[NodeId],
                 alert_raised: bool, burn: bool = False, conditional: bool = False,
                 side_payments: Optional[Mapping[NodeId, Fraction]] = None, tx_count: int = 0) -> Outcome:
    """Settle a simultaneous round.

    Non-alerters lose lambda when anyone alerted. Alerters share the slashed
    stake plus the operator's c, or only c when ``burn`` is set (the slashed
    stake is then destroyed). Bribes go to every non-alerter, or, for
    conditional bribes, only when no alert was raised. ``side_payments``
    are extra adversary transfers that do not depend on the outcome.
    """
    n = params.n
    F = frozenset(alerters)
    nodes = range(1, n + 1)
    lam = params.penalty_lambda.micros
    c = params.operator_cost_c.micros
    rewards: Dict[NodeId, int] = {}
    slashed: Dict[NodeId, int] = {}
    burned = 0
    operator = 0
    if F:
        slashed = {i: lam for i in nodes if i not in F}
        pool = c if burn else lam * len(slashed) + c
        burned = lam * len(slashed) if burn else 0
        rewards = split_evenly(pool, F)
        operator = c
    side = {i: Fraction(v) for i, v in (side_payments or {}).items() if v}
    paid: Dict[NodeId, int] = {}
    for i in nodes:
        beta = bribes.bribe(i).micros
        if beta and i not in F and not (conditional and alert_raised):
            paid[i] = beta
    payoffs = {
        i: Fraction(rewards.get(i, 0) - slashed.get(i, 0) + paid.get(i, 0), MICRO) + side.get(i, 0)
        for i in nodes
    }
    spent = Fraction(sum(paid.values()), MICRO) + sum(side.values(), Fraction(0))
    adversary = (Fraction(0) if alert_raised else bribes.G) - spent
    return Outcome(
        alerter_set_F=F,
        node_payoffs=payoffs,
        adversary_payoff=adversary,
        alert_raised=alert_raised,
        rewards=rewards,
        slashed=slashed,
        burned=burned,
        bribes_paid=paid,
        tx_count=tx_count,
        operator_paid=operator,
        side_payments=side,
    )


def conservation_holds(outcome: Outcome, burn: bool = False) -> bool:
    """Every micro-token paid out was either slashed or funded by the operator."""
    if not outcome.alerter_set_F:
        return outcome.total_rewards == 0 and outcome.total_slashed == 0 and outcome.burned == 0
    if burn:
        return outcome.total_rewards == outcome.operator_paid and outcome.burned == outcome.total_slashed
    return outcome.total_rewards == outcome.total_slashed + outcome.operator_paid and outcome.burned == 0

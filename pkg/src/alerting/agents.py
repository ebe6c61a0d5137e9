"""Node behaviours.

A node sees only its own bribe. Rational nodes follow the dominance regions,
mix at the symmetric-equilibrium probability in the interior, and use the
slot threshold rule in the sequential protocol.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Tuple

from .core import Action, BribeVector, NodeId, ProtocolParams, TokenAmount
from . import game


class PolicyKind(Enum):
    HONEST = "honest"
    BRIBED = "bribed"  # rational: follows the game-analysis rules
    MIXED = "mixed"
    SCRIPTED = "scripted"


@dataclass(frozen=True)
class NodePolicy:
    kind: PolicyKind = PolicyKind.HONEST
    q: Fraction = Fraction(0)
    seed: int = 0
    actions: Tuple[Action, ...] = ()

    @classmethod
    def honest(cls) -> "NodePolicy":
        return cls(PolicyKind.HONEST)

    @classmethod
    def bribed(cls, seed: int = 0) -> "NodePolicy":
        return cls(PolicyKind.BRIBED, seed=seed)

    @classmethod
    def mixed(cls, q, seed: int = 0) -> "NodePolicy":
        return cls(PolicyKind.MIXED, q=Fraction(q), seed=seed)

    @classmethod
    def scripted(cls, *actions: Action) -> "NodePolicy":
        if not actions:
            raise ValueError("scripted policy needs at least one action")
        return cls(PolicyKind.SCRIPTED, actions=tuple(actions))


HONEST = NodePolicy.honest()


@dataclass
class AgentState:
    node_id: NodeId
    policy: NodePolicy = HONEST
    rng_seed: str = "0"
    observed_bribe: TokenAmount = field(default_factory=TokenAmount.zero)
    round_index: int = 0

    def draw(self) -> float:
        # fresh generator per draw: the action is a function of the seed alone
        return random.Random(self.rng_seed).random()


def agent_for(node: NodeId, policies: Mapping[NodeId, NodePolicy], bribes: BribeVector,
              round_index: int = 0, salt: int = 0) -> AgentState:
    policy = policies.get(node, HONEST)
    seed = f"{policy.seed}:{salt}:{round_index}:{node}"
    return AgentState(node, policy, seed, bribes.bribe(node), round_index)


def _sample_silent(agent: AgentState, q: Fraction) -> bool:
    if q <= 0:
        return False
    if q >= 1:
        return True
    return agent.draw() < float(q)


def decide_simultaneous(agent: AgentState, params: ProtocolParams, alert_needed: bool = True) -> Action:
    if not alert_needed:
        return Action.NO_ALERT
    pol = agent.policy
    if pol.kind is PolicyKind.HONEST:
        return Action.ALERT
    if pol.kind is PolicyKind.SCRIPTED:
        return pol.actions[agent.round_index % len(pol.actions)]
    if pol.kind is PolicyKind.MIXED:
        return Action.NO_ALERT if _sample_silent(agent, pol.q) else Action.ALERT
    q = game.node_silence_probability(agent.observed_bribe, params)
    return Action.NO_ALERT if _sample_silent(agent, q) else Action.ALERT


def decide_burned(agent: AgentState, params: ProtocolParams, alert_needed: bool = True) -> Action:
    """Burned-penalty rule: a rational node stays silent iff beta >= c + lambda."""
    if agent.policy.kind is not PolicyKind.BRIBED or not alert_needed:
        return decide_simultaneous(agent, params, alert_needed)
    silent = agent.observed_bribe.tokens >= params.c + params.lam
    return Action.NO_ALERT if silent else Action.ALERT


def decide_sequential(agent: AgentState, slot: int, params: ProtocolParams, alert_needed: bool = True) -> Action:
    if agent.policy.kind is not PolicyKind.BRIBED or not alert_needed:
        return decide_simultaneous(agent, params, alert_needed)
    if game.sequential_alerts(slot, agent.observed_bribe, params):
        return Action.ALERT
    return Action.NO_ALERT

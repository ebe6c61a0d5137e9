"""One-step alerting protocols on a lockstep chain.

Every alert sent during the single alerting step lands in the same block
``B``, so nobody can react to anybody else's choice. The contract reads ``B``
alone.
"""

from __future__ import annotations

from typing import Callable, Collection, Dict, Optional

from ..agents import AgentState, agent_for, decide_burned, decide_simultaneous
from ..chain import ChainState, Lockstep, Transaction, TxKind
from ..core import Action, BribeVector, NodeId, Outcome, ProtocolParams
from .common import (
    Policies, RoundConfig, TraceLog, WrongTimingModel, check_alert, make_alert_proof, settle_round,
)

Decider = Callable[[AgentState, ProtocolParams, bool], Action]


def lockstep_chain(params: ProtocolParams, chain_id: bytes = b"main") -> ChainState:
    return ChainState(Lockstep(params.delta_write), 1, chain_id)


def _run_one_step(config: RoundConfig, policies: Policies, bribes: BribeVector, decider: Decider,
                  burn: bool, chain: Optional[ChainState], trace: Optional[TraceLog],
                  late_nodes: Collection[NodeId], conditional: bool, actor: str) -> Outcome:
    params = config.params
    bribes.check_size(params.n)
    chain = chain if chain is not None else lockstep_chain(params)
    if not isinstance(chain.timing, Lockstep):
        raise WrongTimingModel(f"{actor} needs a lockstep chain")
    trace = trace if trace is not None else TraceLog()
    chain.advance_to(config.start_step)
    t0 = chain.clock
    block_b = chain.height + params.delta_write
    trace.add(t0, "contract", "round_start", f"alert_block={block_b}")

    actions: Dict[NodeId, Action] = {}
    for i in range(1, params.n + 1):
        agent = agent_for(i, policies, bribes, config.round_index, config.seed)
        actions[i] = decider(agent, params, config.alert_needed)

    sent = 0
    alerting = [i for i in sorted(actions) if actions[i] is Action.ALERT]
    for late in (False, True):
        for i in alerting:
            if (i in late_nodes) != late:
                continue
            tx = chain.submit(Transaction(i, TxKind.ALERT, make_alert_proof(config.evidence, i)))
            sent += 1
            # submissions are only seen once they are on chain
            trace.add(chain.clock, f"node{i}", "alert_submitted", "", public=False)
        chain.advance(1)
    chain.advance_to(t0 + params.delta_write + 1)

    F = set()
    for tx in chain.blocks[block_b]:
        if tx.kind is TxKind.ALERT and 1 <= tx.sender <= params.n and check_alert(tx.payload, config.evidence):
            F.add(tx.sender)
    for tx in chain.blocks[block_b]:
        trace.add(chain.headers[block_b].produced_at, "contract", "alert_accepted" if tx.sender in F else "alert_rejected",
                  f"node={tx.sender}")
    outcome = settle_round(params, bribes, F, bool(F), burn=burn, conditional=conditional, tx_count=sent)
    trace.add(chain.clock, "contract", "settled", f"F={sorted(F)} alert={outcome.alert_raised}")
    return outcome


def run_lockstep(config: RoundConfig, policies: Policies, bribes: BribeVector,
                 chain: Optional[ChainState] = None, trace: Optional[TraceLog] = None,
                 late_nodes: Collection[NodeId] = (), conditional: bool = False) -> Outcome:
    """Non-alerters lose lambda; alerters split lambda(n-|F|) + c."""
    return _run_one_step(config, policies, bribes, decide_simultaneous, False, chain, trace,
                         late_nodes, conditional, "lockstep")


def run_burned_penalty(config: RoundConfig, policies: Policies, bribes: BribeVector,
                       chain: Optional[ChainState] = None, trace: Optional[TraceLog] = None,
                       late_nodes: Collection[NodeId] = (), conditional: bool = False) -> Outcome:
    """Alerters split c; the slashed stake is burned."""
    return _run_one_step(config, policies, bribes, decide_burned, True, chain, trace,
                         late_nodes, conditional, "burned-penalty")

"""Slot-by-slot alerting.

Time after the round start ``t0`` is cut into slots of ``delta_slot`` steps;
slot ``s`` covers steps ``(t0 + (s-1)*delta_slot, t0 + s*delta_slot]``. Only
the scheduled node may alert in its slot and the first valid alert ends the
round. Because ``delta_slot > delta_write``, an alert sent at the start of a
slot is on chain before the next slot opens.
"""

from __future__ import annotations

import math
import struct
from typing import Collection, Dict, List, Optional, Tuple

from ..agents import agent_for, decide_sequential
from ..chain import BoundedDelay, ChainState, Transaction, TxKind
from ..core import Action, BribeVector, NodeId, Outcome
from ..game import sequential_outcome
from ..sequencing import SlotSchedule
from .common import Policies, RoundConfig, TraceLog, check_alert, make_alert_proof


class AlertOutOfSlot(ValueError):
    """The alert's sender is not the node scheduled for the slot it was sent in."""


def encode_slot_alert(slot: int, proof: bytes) -> bytes:
    return struct.pack(">I", slot) + proof


def decode_slot_alert(payload: bytes) -> Tuple[int, bytes]:
    if len(payload) < 4:
        raise ValueError("truncated alert")
    return struct.unpack(">I", payload[:4])[0], payload[4:]


def slot_at(step: int, t0: int, delta_slot: int) -> int:
    return math.ceil((step - t0) / delta_slot)


class SequentialContract:
    def __init__(self, schedule: SlotSchedule, t0: int, delta_slot: int, evidence: bytes):
        self.schedule = schedule
        self.t0 = t0
        self.delta_slot = delta_slot
        self.evidence = evidence
        self.first: Optional[Tuple[int, NodeId]] = None
        self.rejections: List[Tuple[NodeId, str]] = []

    def check(self, tx: Transaction) -> int:
        """Slot of a valid alert; raises AlertOutOfSlot / ValueError otherwise."""
        # the slot comes from the submission step carried in the tx
        s = slot_at(tx.submitted_at, self.t0, self.delta_slot)
        if not 1 <= s <= self.schedule.n or self.schedule.node_at(s) != tx.sender:
            raise AlertOutOfSlot(f"node {tx.sender} is not scheduled for slot {s}")
        claimed, proof = decode_slot_alert(tx.payload)
        if claimed != s:
            raise AlertOutOfSlot(f"claimed slot {claimed}, sent in slot {s}")
        if not check_alert(proof, self.evidence):
            raise ValueError("invalid alert proof")
        return s

    def on_block(self, txs: List[Transaction]) -> None:
        for tx in txs:
            if tx.kind is not TxKind.ALERT or self.first is not None:
                continue
            try:
                s = self.check(tx)
            except ValueError as exc:
                self.rejections.append((tx.sender, f"{type(exc).__name__}: {exc}"))
                continue
            self.first = (s, tx.sender)


def run_sequential(config: RoundConfig, policies: Policies, bribes: BribeVector, schedule: SlotSchedule,
                   chain: Optional[ChainState] = None, trace: Optional[TraceLog] = None,
                   rogue_alerts: Collection[Tuple[int, NodeId]] = ()) -> Outcome:
    """``rogue_alerts`` are (step offset from t0, sender) alerts injected regardless of slot."""
    params = config.params
    if schedule.n != params.n:
        raise ValueError(f"schedule covers {schedule.n} slots, params.n={params.n}")
    if params.delta_slot <= params.delta_write:
        raise ValueError("delta_slot must exceed delta_write")
    bribes.check_size(params.n)
    chain = chain if chain is not None else ChainState(
        BoundedDelay(params.delta_write, config.seed), params.delta_block)
    trace = trace if trace is not None else TraceLog()
    chain.advance_to(config.start_step)
    t0 = chain.clock
    start_height = chain.height
    contract = SequentialContract(schedule, t0, params.delta_slot, config.evidence)
    trace.add(t0, "contract", "round_start", f"schedule={'-'.join(map(str, schedule.perm))}")
    rogue: Dict[int, List[NodeId]] = {}
    for off, sender in rogue_alerts:
        rogue.setdefault(off, []).append(sender)

    sent = 0
    horizon = t0 + params.n * params.delta_slot + params.delta_write
    processed = start_height
    while chain.clock < horizon and contract.first is None:
        chain.advance(1)
        for h in range(processed + 1, chain.height + 1):
            contract.on_block(chain.blocks[h])
        processed = chain.height
        if contract.first is not None:
            break
        step = chain.clock
        for sender in rogue.get(step - t0, []):
            s = slot_at(step, t0, params.delta_slot)
            chain.submit(Transaction(sender, TxKind.ALERT, encode_slot_alert(s, make_alert_proof(config.evidence, sender))))
            trace.add(step, f"node{sender}", "alert_submitted", f"slot={s}")
        if (step - t0 - 1) % params.delta_slot == 0 and step <= t0 + params.n * params.delta_slot:
            s = slot_at(step, t0, params.delta_slot)
            node = schedule.node_at(s)
            agent = agent_for(node, policies, bribes, config.round_index, config.seed)
            if decide_sequential(agent, s, params, config.alert_needed) is Action.ALERT:
                chain.submit(Transaction(node, TxKind.ALERT, encode_slot_alert(s, make_alert_proof(config.evidence, node))))
                sent += 1
                trace.add(step, f"node{node}", "alert_submitted", f"slot={s}")
    for sender, why in contract.rejections:
        trace.add(chain.clock, "contract", "rejected", f"node={sender} reason={why}")
    first_slot = contract.first[0] if contract.first else None
    outcome = sequential_outcome(first_slot, bribes, schedule, params)
    outcome.tx_count = sent
    trace.add(chain.clock, "contract", "settled", f"slot={first_slot}")
    return outcome

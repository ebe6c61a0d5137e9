"""Two-phase commit/reveal alerting over a bounded-delay chain.

The standard engine commits through each node's trusted device, so an
opening only exists once the commitment is buried under ``n_commit``
blocks. The naive engine uses plain hash commitments that a node can open
whenever it likes, which is what the early-reveal collusion script exploits.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Collection, Dict, List, Mapping, Optional, Tuple

from ..agents import AgentState, PolicyKind, agent_for, decide_simultaneous
from ..chain import BoundedDelay, ChainState, Transaction, TxKind, digest
from ..core import Action, BribeVector, NodeId, Outcome, ProtocolParams
from ..tee import (
    Attestation, TeeError, TeeState, build_pop, commitment_handle, encode_message, verify_attestation,
)
from .common import (
    Policies, RoundConfig, TraceLog, WrongTimingModel, check_alert, make_alert_proof, settle_round,
)


class Scheme(Enum):
    TEE = "tee"
    NAIVE = "naive"


def bounded_chain(params: ProtocolParams, seed: int = 0, chain_id: bytes = b"main",
                  sampler=None) -> ChainState:
    return ChainState(BoundedDelay(params.delta_write, seed, sampler), params.delta_block, chain_id)


# ------------------------------------------------------------- wire format

def encode_reveal(action: Action, proof: bytes, nonce: bytes, attestation: bytes = b"") -> bytes:
    """action | H(proof) | nonce | len | attestation | len | proof."""
    return (bytes([action.byte]) + digest(proof) + nonce
            + struct.pack(">I", len(attestation)) + attestation
            + struct.pack(">I", len(proof)) + proof)


def decode_reveal(payload: bytes) -> Tuple[Action, bytes, bytes, bytes, bytes]:
    if len(payload) < 1 + 32 + 32 + 4:
        raise ValueError("truncated reveal")
    action = Action.from_byte(payload[0])
    h, nonce = payload[1:33], payload[33:65]
    (alen,) = struct.unpack(">I", payload[65:69])
    att = payload[69:69 + alen]
    rest = payload[69 + alen:]
    if len(att) != alen or len(rest) < 4:
        raise ValueError("truncated reveal")
    (plen,) = struct.unpack(">I", rest[:4])
    proof = rest[4:]
    if len(proof) != plen:
        raise ValueError("truncated reveal")
    return action, h, nonce, att, proof


def naive_handle(m: bytes, r: bytes) -> bytes:
    return digest(b"naive-commit", m, r)


# ---------------------------------------------------------------- contract

class CommitRevealContract:
    """On-chain side: windows, commitment matching and settlement."""

    def __init__(self, params: ProtocolParams, start_height: int, evidence: bytes, scheme: Scheme,
                 registry: Optional[Mapping[NodeId, bytes]] = None):
        self.params = params
        self.h0 = start_height
        self.h_star = start_height + params.n_commit
        self.h_end = self.h_star + params.n_reveal
        self.evidence = evidence
        self.scheme = scheme
        self.registry = dict(registry or {})
        self.commits: Dict[NodeId, Tuple[bytes, int]] = {}
        self.reveals: Dict[NodeId, Action] = {}
        self.rejections: List[Tuple[int, NodeId, str]] = []

    def _reject(self, height: int, node: NodeId, why: str) -> None:
        self.rejections.append((height, node, why))

    def on_block(self, height: int, txs: List[Transaction]) -> None:
        for tx in txs:
            if tx.kind is TxKind.COMMIT:
                self.on_commit(height, tx)
            elif tx.kind is TxKind.REVEAL:
                self.on_reveal(height, tx)

    def on_commit(self, height: int, tx: Transaction) -> None:
        i = tx.sender
        if not 1 <= i <= self.params.n:
            return self._reject(height, i, "unknown node")
        if not self.h0 <= height < self.h_star:
            return self._reject(height, i, "commit outside window")
        if i in self.commits:
            return self._reject(height, i, "duplicate commit")
        if len(tx.payload) != 32:
            return self._reject(height, i, "malformed commit")
        self.commits[i] = (tx.payload, height)

    def on_reveal(self, height: int, tx: Transaction) -> None:
        i = tx.sender
        if i not in self.commits:
            return self._reject(height, i, "no commitment")
        if not self.h_star <= height < self.h_end:
            return self._reject(height, i, "reveal outside window")
        if i in self.reveals:
            return self._reject(height, i, "duplicate reveal")
        try:
            action, h, nonce, att_raw, proof = decode_reveal(tx.payload)
        except ValueError:
            return self._reject(height, i, "malformed reveal")
        gamma, _ = self.commits[i]
        m = bytes([action.byte]) + h
        if self.scheme is Scheme.TEE:
            try:
                att = Attestation.decode(att_raw)
            except ValueError:
                return self._reject(height, i, "malformed attestation")
            vk = self.registry.get(i)
            if vk is None or not verify_attestation(vk, att):
                return self._reject(height, i, "attestation invalid")
            if (att.gamma, att.n_commit, att.message, att.nonce) != (gamma, self.params.n_commit, m, nonce):
                return self._reject(height, i, "attestation not binding")
            if commitment_handle(m, nonce, self.params.n_commit) != gamma:
                return self._reject(height, i, "opening does not match commitment")
        elif naive_handle(m, nonce) != gamma:
            return self._reject(height, i, "opening does not match commitment")
        if digest(proof) != h:
            return self._reject(height, i, "proof hash mismatch")
        if action is Action.ALERT and not check_alert(proof, self.evidence):
            return self._reject(height, i, "invalid alert proof")
        self.reveals[i] = action

    def settle(self, bribes: BribeVector, conditional: bool = False,
               side_payments: Optional[Mapping[NodeId, Fraction]] = None, tx_count: int = 0) -> Outcome:
        F = {i for i, a in self.reveals.items() if a is Action.ALERT}
        n1 = {i for i, a in self.reveals.items() if a is Action.NO_ALERT}
        n0 = set(range(1, self.params.n + 1)) - F
        raised = bool(F) or bool(n0 - n1)
        return settle_round(self.params, bribes, F, raised, conditional=conditional,
                            side_payments=side_payments, tx_count=tx_count)


# ---------------------------------------------------------- collusion script

@dataclass
class EarlyRevealScript:
    """Offer bribes one node at a time, each conditional on an early opening
    that proves NoAlert, and stop at the first refusal or failed proof."""

    order: Tuple[NodeId, ...]
    offer: Callable[[int], Fraction]  # k proven silent nodes -> next offer (tokens)


def accepts_early_offer(agent: AgentState, offer: Fraction, proven: int, params: ProtocolParams) -> bool:
    """A rational node takes the deal iff, even if slashed later, it beats alerting
    alongside everyone who has not yet been bought."""
    if agent.policy.kind is not PolicyKind.BRIBED:
        return False
    remaining = params.n - proven
    return offer - params.lam >= (params.lam * proven + params.c) / remaining


# ------------------------------------------------------------------ engine

@dataclass
class _Node:
    node: NodeId
    action: Optional[Action] = None
    proof: bytes = b""
    message: bytes = b""
    nonce: bytes = b""
    gamma: bytes = b""
    commit_tx: Optional[Transaction] = None
    revealed: bool = False


def run_commit_reveal(config: RoundConfig, policies: Policies, bribes: BribeVector, scheme: Scheme,
                      chain: Optional[ChainState] = None, trace: Optional[TraceLog] = None,
                      devices: Optional[Dict[NodeId, TeeState]] = None,
                      withhold: Collection[NodeId] = (), no_commit: Collection[NodeId] = (),
                      conditional: bool = False,
                      collusion_script: Optional[EarlyRevealScript] = None) -> Outcome:
    params = config.params
    n = params.n
    bribes.check_size(n)
    chain = chain if chain is not None else bounded_chain(params, config.seed)
    if not isinstance(chain.timing, BoundedDelay):
        raise WrongTimingModel("commit-reveal rounds run on a bounded-delay chain")
    trace = trace if trace is not None else TraceLog()
    chain.advance_to(config.start_step)
    t0 = chain.clock
    h0 = chain.height + 1

    if scheme is Scheme.TEE:
        if devices is None:
            devices = {}
        for i in range(1, n + 1):
            if i not in devices:
                devices[i] = TeeState(i, chain.tip, f"{config.seed}:{i}".encode(), chain.consensus_key)
            else:
                # anchor the device at the current tip before committing
                devices[i].advance_checkpoint(chain.headers_after(devices[i].checkpoint.height, chain.height))
    registry = {i: d.verification_key for i, d in (devices or {}).items()}
    contract = CommitRevealContract(params, h0, config.evidence, scheme, registry)
    trace.add(t0, "contract", "round_start", f"H0={h0} H*={contract.h_star} end={contract.h_end}")

    rng = random.Random(f"naive-nonce:{config.seed}:{config.round_index}")
    nodes = {i: _Node(i) for i in range(1, n + 1)}
    tx_count = 0
    side: Dict[NodeId, Fraction] = {}

    def commit(st: _Node, action: Action) -> None:
        nonlocal tx_count
        st.action = action
        st.proof = make_alert_proof(config.evidence, st.node) if action is Action.ALERT else b""
        st.message = encode_message(action, digest(st.proof))
        if st.node in no_commit:
            return
        if scheme is Scheme.TEE:
            st.gamma = devices[st.node].seal(st.message, params.n_commit)
        else:
            st.nonce = rng.randbytes(32)
            st.gamma = naive_handle(st.message, st.nonce)
        st.commit_tx = chain.submit(Transaction(st.node, TxKind.COMMIT, st.gamma))
        tx_count += 1
        trace.add(chain.clock, f"node{st.node}", "commit_submitted", st.gamma.hex()[:16], public=False)

    def decide(i: NodeId, bribe_source: BribeVector) -> Action:
        agent = agent_for(i, policies, bribe_source, config.round_index, config.seed)
        return decide_simultaneous(agent, params, config.alert_needed)

    def try_open_early(st: _Node) -> Optional[Tuple[bytes, bytes]]:
        if scheme is Scheme.NAIVE:
            return st.message, st.nonce
        try:
            pop = build_pop(chain, devices[st.node].checkpoint.height, st.commit_tx)
            m, r, _ = devices[st.node].unseal_after(st.gamma, pop)
            return m, r
        except (TeeError, LookupError) as exc:
            trace.add(chain.clock, f"node{st.node}", "early_open_failed", type(exc).__name__, public=False)
            return None

    # -- script phase: targets wait for their offer before committing
    waiting: List[NodeId] = []
    script_state = None
    if collusion_script is not None:
        waiting = list(collusion_script.order)
        script_state = {"proven": 0, "pending": None}
    for i in range(1, n + 1):
        if i not in waiting:
            commit(nodes[i], decide(i, bribes))

    def script_step() -> bool:
        """Advance the script; returns True once it has finished."""
        st = script_state
        while True:
            if st["pending"] is not None:
                target = nodes[st["pending"]]
                if scheme is Scheme.TEE and not chain.is_included(target.commit_tx):
                    return False  # the device can only be asked once the commit is on chain
                opening = try_open_early(target)
                st["pending"] = None
                if opening is None or naive_or_tee_mismatch(target, opening):
                    side.pop(target.node, None)
                    trace.add(chain.clock, "adversary", "deal_void", f"node={target.node}", public=False)
                    return True
                st["proven"] += 1
                trace.add(chain.clock, "adversary", "bribe_paid", f"node={target.node}", public=False)
            if not waiting:
                return True
            target = nodes[waiting[0]]
            offer = collusion_script.offer(st["proven"])
            agent = agent_for(target.node, policies, bribes, config.round_index, config.seed)
            if not accepts_early_offer(agent, offer, st["proven"], params):
                trace.add(chain.clock, "adversary", "offer_declined", f"node={target.node}", public=False)
                return True
            waiting.pop(0)
            side[target.node] = Fraction(offer)
            commit(target, Action.NO_ALERT)
            st["pending"] = target.node

    def naive_or_tee_mismatch(st: _Node, opening: Tuple[bytes, bytes]) -> bool:
        m, r = opening
        if m[0] != Action.NO_ALERT.byte:
            return True
        if scheme is Scheme.NAIVE:
            return naive_handle(m, r) != st.gamma
        return commitment_handle(m, r, params.n_commit) != st.gamma

    script_done = script_state is None
    last_height = contract.h_end - 1
    while True:
        if not script_done:
            script_done = script_step()
            if script_done:
                # leftover targets get no deal and decide on their standing offers
                for i in waiting:
                    commit(nodes[i], decide(i, bribes))
                waiting.clear()
        for st in nodes.values():
            if st.revealed or st.commit_tx is None or st.node in withhold or not script_done and st.node in waiting:
                continue
            loc = chain.location(st.commit_tx)
            if loc is None or chain.height - loc[0] < params.n_commit:
                continue
            att = b""
            if scheme is Scheme.TEE:
                pop = build_pop(chain, devices[st.node].checkpoint.height, st.commit_tx)
                try:
                    m, r, attestation = devices[st.node].unseal_after(st.gamma, pop)
                except TeeError as exc:
                    trace.add(chain.clock, f"node{st.node}", "unseal_failed", type(exc).__name__, public=False)
                    st.revealed = True
                    continue
                att = attestation.encode()
                st.nonce = r
            chain.submit(Transaction(st.node, TxKind.REVEAL, encode_reveal(st.action, st.proof, st.nonce, att)))
            tx_count += 1
            st.revealed = True
        if chain.height >= last_height:
            break
        chain.advance(1)

    for height in range(h0, last_height + 1):
        header = chain.headers[height]
        for tx in chain.blocks[height]:
            trace.add(header.produced_at, "chain", f"{tx.kind.name.lower()}_included", f"node={tx.sender} height={height}")
        contract.on_block(height, chain.blocks[height])
    for height, node, why in contract.rejections:
        trace.add(chain.headers[height].produced_at, "contract", "rejected", f"node={node} reason={why}")
    outcome = contract.settle(bribes, conditional, side, tx_count)
    trace.add(chain.clock, "contract", "settled", f"F={sorted(outcome.alerter_set_F)} alert={outcome.alert_raised}")
    return outcome


def run_tee_round(config: RoundConfig, policies: Policies, bribes: BribeVector, **kwargs) -> Outcome:
    return run_commit_reveal(config, policies, bribes, Scheme.TEE, **kwargs)


def run_naive_commit_reveal(config: RoundConfig, policies: Policies, bribes: BribeVector,
                            collusion_script: Optional[EarlyRevealScript] = None, **kwargs) -> Outcome:
    return run_commit_reveal(config, policies, bribes, Scheme.NAIVE,
                             collusion_script=collusion_script, **kwargs)

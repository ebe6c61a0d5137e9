from .catalog import PROTOCOLS, ProtocolInfo, protocol_info
from .common import (
    DEFAULT_EVIDENCE, RoundConfig, TraceEvent, TraceLog, WrongTimingModel, check_alert,
    conservation_holds, make_alert_proof, observable_trace, settle_round, split_evenly,
)
from .commit_reveal import (
    CommitRevealContract, EarlyRevealScript, Scheme, accepts_early_offer, bounded_chain,
    decode_reveal, encode_reveal, run_commit_reveal, run_naive_commit_reveal, run_tee_round,
)
from .sequential import (
    AlertOutOfSlot, SequentialContract, decode_slot_alert, encode_slot_alert, run_sequential, slot_at,
)
from .simultaneous import lockstep_chain, run_burned_penalty, run_lockstep
from ..sequencing import SlotSchedule, VrfProof, next_permutation, vrf_public_key, vrf_schedule, vrf_verify

__all__ = [
    "PROTOCOLS",
    "ProtocolInfo",
    "protocol_info",
    "DEFAULT_EVIDENCE",
    "RoundConfig",
    "TraceEvent",
    "TraceLog",
    "WrongTimingModel",
    "check_alert",
    "conservation_holds",
    "make_alert_proof",
    "observable_trace",
    "settle_round",
    "split_evenly",
    "CommitRevealContract",
    "EarlyRevealScript",
    "Scheme",
    "accepts_early_offer",
    "bounded_chain",
    "decode_reveal",
    "encode_reveal",
    "run_commit_reveal",
    "run_naive_commit_reveal",
    "run_tee_round",
    "AlertOutOfSlot",
    "SequentialContract",
    "decode_slot_alert",
    "encode_slot_alert",
    "run_sequential",
    "slot_at",
    "lockstep_chain",
    "run_burned_penalty",
    "run_lockstep",
    "SlotSchedule",
    "VrfProof",
    "next_permutation",
    "vrf_public_key",
    "vrf_schedule",
    "vrf_verify",
]

"""Static protocol descriptors: bribe cost, transaction counts, latency class."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict

from .. import game
from ..core import ProtocolParams


@dataclass(frozen=True)
class ProtocolInfo:
    protocol_id: str
    bribe_cost: Callable[[ProtocolParams], Fraction]
    tx_alert: Callable[[int], int]  # worst case
    tx_noalert: Callable[[int], int]
    latency_class: str


PROTOCOLS: Dict[str, ProtocolInfo] = {
    "lockstep": ProtocolInfo("lockstep", game.simultaneous_suppression_threshold,
                             lambda n: n, lambda n: 0, "Theta(1)"),
    "tee": ProtocolInfo("tee", game.simultaneous_suppression_threshold,
                        lambda n: 2 * n, lambda n: 2 * n, "Theta(1)"),
    "sequential": ProtocolInfo("sequential", game.sequential_suppression_threshold,
                               lambda n: 1, lambda n: 0, "Theta(n)"),
    "burned": ProtocolInfo("burned", game.burned_penalty_resistance,
                           lambda n: n, lambda n: 0, "Theta(1)"),
}


def protocol_info(protocol_id: str) -> ProtocolInfo:
    try:
        return PROTOCOLS[protocol_id]
    except KeyError:
        raise KeyError(f"unknown protocol {protocol_id!r}; choose from {sorted(PROTOCOLS)}") from None

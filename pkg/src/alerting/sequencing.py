"""Slot schedules for the sequential protocol.

Deterministic sequencing walks permutations in lexicographic order. Random
sequencing uses a hash-chain VRF mock: the contract registers the chain head
``H^R(sk)``; round ``r`` reveals ``H^(R-r)(sk)``, which anyone can hash forward
to the registered head, and that value seeds a Fisher-Yates shuffle.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Dict, Tuple

from .chain import digest

DEFAULT_VRF_ROUNDS = 4096


@dataclass(frozen=True)
class SlotSchedule:
    """``perm[s - 1]`` is the node assigned to slot ``s`` (slots are 1-based)."""

    perm: Tuple[int, ...]
    round_index: int = 0

    def __post_init__(self):
        perm = tuple(int(x) for x in self.perm)
        if sorted(perm) != list(range(1, len(perm) + 1)):
            raise ValueError(f"not a permutation of 1..{len(perm)}: {perm}")
        object.__setattr__(self, "perm", perm)

    @classmethod
    def identity(cls, n: int) -> "SlotSchedule":
        return cls(tuple(range(1, n + 1)), 0)

    @classmethod
    def for_round(cls, n: int, round_index: int) -> "SlotSchedule":
        """The ``round_index``-th lexicographic successor of the identity (wrapping)."""
        k = round_index % math.factorial(n)
        pool = list(range(1, n + 1))
        perm = []
        for i in range(n, 0, -1):
            f = math.factorial(i - 1)
            idx, k = divmod(k, f)
            perm.append(pool.pop(idx))
        return cls(tuple(perm), round_index)

    @property
    def n(self) -> int:
        return len(self.perm)

    def node_at(self, slot: int) -> int:
        if not 1 <= slot <= self.n:
            raise IndexError(f"slot {slot} outside 1..{self.n}")
        return self.perm[slot - 1]

    def slot_of(self, node: int) -> int:
        return self.inverse()[node]

    def inverse(self) -> Dict[int, int]:
        return {node: s for s, node in enumerate(self.perm, start=1)}


def next_permutation(pi: SlotSchedule) -> SlotSchedule:
    """Lexicographic successor; the last permutation wraps to the identity."""
    a = list(pi.perm)
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return SlotSchedule(tuple(sorted(a)), pi.round_index + 1)
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = reversed(a[i + 1:])
    return SlotSchedule(tuple(a), pi.round_index + 1)


# ------------------------------------------------------------------ VRF mock

@dataclass(frozen=True)
class VrfProof:
    round_key: bytes
    transcript: Tuple[int, ...]


def _hash_forward(x: bytes, times: int) -> bytes:
    for _ in range(times):
        x = digest(b"vrf-chain", x)
    return x


def vrf_public_key(sk: bytes, max_rounds: int = DEFAULT_VRF_ROUNDS) -> bytes:
    """Commitment registered with the contract."""
    return _hash_forward(sk, max_rounds)


def _round_key(sk: bytes, round_index: int, max_rounds: int) -> bytes:
    if not 0 <= round_index < max_rounds:
        raise ValueError(f"round {round_index} outside the committed range [0, {max_rounds})")
    return _hash_forward(sk, max_rounds - round_index - 1)


class _Stream:
    def __init__(self, key: bytes):
        self.key = key
        self.counter = 0

    def below(self, bound: int) -> int:
        # rejection sampling keeps the draw exactly uniform
        limit = (2**64 // bound) * bound
        while True:
            block = digest(b"vrf-stream", self.key, struct.pack(">Q", self.counter))
            self.counter += 1
            x = int.from_bytes(block[:8], "big")
            if x < limit:
                return x % bound


def _shuffle(key: bytes, n: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    stream = _Stream(key)
    a = list(range(1, n + 1))
    draws = []
    for i in range(n - 1, 0, -1):
        j = stream.below(i + 1)
        draws.append(j)
        a[i], a[j] = a[j], a[i]
    return tuple(a), tuple(draws)


def vrf_schedule(sk: bytes, round_index: int, n: int,
                 max_rounds: int = DEFAULT_VRF_ROUNDS) -> Tuple[SlotSchedule, VrfProof]:
    key = _round_key(sk, round_index, max_rounds)
    perm, draws = _shuffle(key, n)
    return SlotSchedule(perm, round_index), VrfProof(key, draws)


def vrf_verify(public_key: bytes, round_index: int, schedule: SlotSchedule, proof: VrfProof,
               max_rounds: int = DEFAULT_VRF_ROUNDS) -> bool:
    if not 0 <= round_index < max_rounds or schedule.round_index != round_index:
        return False
    if _hash_forward(proof.round_key, round_index + 1) != public_key:
        return False
    perm, draws = _shuffle(proof.round_key, schedule.n)
    return perm == schedule.perm and draws == proof.transcript

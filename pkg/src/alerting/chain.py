"""Deterministic simulated blockchain.

One block every ``delta_block`` steps (empty blocks included), hash-linked
headers, binary Merkle transaction roots and inclusion proofs. Transactions
land after exactly ``delta_write`` steps (lockstep) or after a seeded delay in
``[1, delta_write]`` (bounded delay).
"""

from __future__ import annotations

import hashlib
import hmac
import random
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

DIGEST_SIZE = 32
ZERO_DIGEST = b"\x00" * DIGEST_SIZE


def digest(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


class NotIncluded(LookupError):
    """The transaction (or commitment) is not in any produced block."""


class TxKind(Enum):
    STAKE = 0
    COMMIT = 1
    REVEAL = 2
    ALERT = 3


@dataclass(frozen=True)
class Transaction:
    sender: int
    kind: TxKind
    payload: bytes
    submitted_at: int = 0

    def encode(self) -> bytes:
        return struct.pack(">IBqI", self.sender, self.kind.value, self.submitted_at,
                           len(self.payload)) + self.payload

    @classmethod
    def decode(cls, raw: bytes) -> "Transaction":
        sender, kind, at, size = struct.unpack_from(">IBqI", raw)
        payload = raw[struct.calcsize(">IBqI"):]
        if len(payload) != size:
            raise ValueError("truncated transaction")
        return cls(sender, TxKind(kind), payload, at)

    @property
    def txid(self) -> bytes:
        return digest(self.encode())


# ---------------------------------------------------------------- Merkle tree

def _leaf(data: bytes) -> bytes:
    return digest(b"\x00", data)


def _node(left: bytes, right: bytes) -> bytes:
    return digest(b"\x01", left, right)


EMPTY_ROOT = digest(b"empty")


def merkle_root(leaves: Sequence[bytes]) -> bytes:
    """Binary Merkle root; odd levels duplicate their last element."""
    if not leaves:
        return EMPTY_ROOT
    level = [_leaf(x) for x in leaves]
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def merkle_path(leaves: Sequence[bytes], index: int) -> List[bytes]:
    if not 0 <= index < len(leaves):
        raise IndexError(index)
    level = [_leaf(x) for x in leaves]
    path = []
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        path.append(level[index ^ 1])
        level = [_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        index //= 2
    return path


def merkle_verify(root: bytes, data: bytes, index: int, path: Sequence[bytes]) -> bool:
    if index < 0:
        return False
    acc = _leaf(data)
    for sibling in path:
        acc = _node(sibling, acc) if index & 1 else _node(acc, sibling)
        index >>= 1
    return index == 0 and acc == root


# ------------------------------------------------------------------- headers

@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_hash: bytes
    tx_root: bytes
    produced_at: int
    # MAC by the chain's consensus key; stands in for the work/finality that
    # makes forking the honest chain infeasible. Not part of the digest.
    finality_tag: bytes = b""

    def encode(self) -> bytes:
        return struct.pack(">Q", self.height) + self.prev_hash + self.tx_root + struct.pack(">q", self.produced_at)

    @property
    def digest(self) -> bytes:
        return digest(self.encode())

    @property
    def hex(self) -> str:
        return self.digest.hex()


def verify_header_chain(checkpoint: BlockHeader, headers: Sequence[BlockHeader]) -> bool:
    """True iff ``headers`` extend ``checkpoint`` link by link.

    An empty list is a valid (length-zero) extension.
    """
    prev = checkpoint
    for h in headers:
        if h.prev_hash != prev.digest or h.height != prev.height + 1:
            return False
        prev = h
    return True


@dataclass(frozen=True)
class InclusionProof:
    height: int
    tx_index: int
    authentication_path: Tuple[bytes, ...]

    def verify(self, header: BlockHeader, tx: Transaction) -> bool:
        return header.height == self.height and merkle_verify(
            header.tx_root, tx.encode(), self.tx_index, self.authentication_path)


# ------------------------------------------------------------- timing models

@dataclass(frozen=True)
class Lockstep:
    delta_write: int


DelaySampler = Callable[[Transaction], int]


@dataclass(frozen=True)
class BoundedDelay:
    delta_write: int
    seed: int = 0
    # overrides the seeded uniform draw, e.g. to inject adversarial schedules
    sampler: Optional[DelaySampler] = None


TimingModel = object  # Lockstep | BoundedDelay


@dataclass
class _Pending:
    tx: Transaction
    due_step: int
    seq: int


class ChainState:
    """Single-owner simulated ledger.

    The genesis block's transaction root commits to ``chain_id`` so distinct
    chains have distinct genesis digests.
    """

    def __init__(self, timing: TimingModel, delta_block: int = 1, chain_id: bytes = b"main",
                 consensus_key: Optional[bytes] = None):
        if delta_block <= 0:
            raise ValueError("delta_block must be positive")
        if isinstance(timing, Lockstep) and delta_block != 1:
            raise ValueError("lockstep timing needs a block every step (delta_block=1)")
        self.timing = timing
        self.delta_block = delta_block
        self.chain_id = chain_id
        self.consensus_key = consensus_key if consensus_key is not None else digest(b"consensus", chain_id)
        self.clock = 0
        self.headers: List[BlockHeader] = []
        self.blocks: Dict[int, List[Transaction]] = {}
        self.pending: List[_Pending] = []
        self._seq = 0
        self._location: Dict[bytes, Tuple[int, int]] = {}
        self._rng = random.Random(timing.seed) if isinstance(timing, BoundedDelay) else None
        genesis = BlockHeader(0, ZERO_DIGEST, digest(b"genesis", chain_id), 0)
        self._append(genesis, [])

    # -- production
    def _append(self, header: BlockHeader, txs: List[Transaction]) -> None:
        tag = hmac.new(self.consensus_key, header.digest, hashlib.sha256).digest()
        header = BlockHeader(header.height, header.prev_hash, header.tx_root, header.produced_at, tag)
        self.headers.append(header)
        self.blocks[header.height] = txs
        for i, tx in enumerate(txs):
            self._location.setdefault(tx.txid, (header.height, i))

    @property
    def height(self) -> int:
        return len(self.headers) - 1

    @property
    def tip(self) -> BlockHeader:
        return self.headers[-1]

    def advance(self, steps: int = 1) -> "ChainState":
        if steps < 0:
            raise ValueError("steps must be >= 0")
        for _ in range(steps):
            self.clock += 1
            if self.clock % self.delta_block == 0:
                self._produce()
        return self

    def advance_to(self, step: int) -> "ChainState":
        return self.advance(max(0, step - self.clock))

    def advance_blocks(self, count: int) -> "ChainState":
        target = self.height + count
        while self.height < target:
            self.advance(1)
        return self

    def _produce(self) -> None:
        due = [p for p in self.pending if p.due_step <= self.clock]
        self.pending = [p for p in self.pending if p.due_step > self.clock]
        due.sort(key=lambda p: (p.tx.submitted_at, p.tx.sender, p.seq))
        txs = [p.tx for p in due]
        header = BlockHeader(self.height + 1, self.tip.digest,
                             merkle_root([t.encode() for t in txs]), self.clock)
        self._append(header, txs)

    # -- submission
    def submit(self, tx: Transaction) -> Transaction:
        """Queue ``tx`` stamped with the current step; returns the stamped tx."""
        tx = Transaction(tx.sender, tx.kind, tx.payload, self.clock)
        delay = self._delay(tx)
        self.pending.append(_Pending(tx, self.clock + delay, self._seq))
        self._seq += 1
        return tx

    def _delay(self, tx: Transaction) -> int:
        t = self.timing
        if isinstance(t, Lockstep):
            return t.delta_write
        if t.sampler is not None:
            d = int(t.sampler(tx))
        else:
            d = self._rng.randint(1, t.delta_write)
        if not 1 <= d <= t.delta_write:
            raise ValueError(f"delay {d} outside [1, {t.delta_write}]")
        return d

    # -- queries
    def location(self, tx: Transaction) -> Optional[Tuple[int, int]]:
        return self._location.get(tx.txid)

    def is_included(self, tx: Transaction) -> bool:
        return tx.txid in self._location

    def prove_inclusion(self, tx: Transaction) -> InclusionProof:
        loc = self.location(tx)
        if loc is None:
            raise NotIncluded(tx.txid.hex())
        height, index = loc
        leaves = [t.encode() for t in self.blocks[height]]
        return InclusionProof(height, index, tuple(merkle_path(leaves, index)))

    def headers_after(self, height: int, upto: Optional[int] = None) -> List[BlockHeader]:
        end = self.height if upto is None else upto
        return self.headers[height + 1:end + 1]

    def iter_blocks(self) -> Iterator[Tuple[BlockHeader, List[Transaction]]]:
        for h in self.headers:
            yield h, self.blocks[h.height]

    def trace_lines(self, upto_step: Optional[int] = None) -> List[str]:
        """``height,produced_at,tx_count,header_digest_hex`` per block."""
        out = []
        for h, txs in self.iter_blocks():
            if upto_step is not None and h.produced_at > upto_step:
                break
            out.append(f"{h.height},{h.produced_at},{len(txs)},{h.hex}")
        return out

    def state_digest(self) -> bytes:
        parts = [h.digest for h in self.headers]
        parts += [p.tx.encode() + struct.pack(">q", p.due_step) for p in self.pending]
        return digest(*parts)


def check_hash_chain(chain: ChainState) -> bool:
    if chain.headers[0].prev_hash != ZERO_DIGEST:
        return False
    return verify_header_chain(chain.headers[0], chain.headers[1:])

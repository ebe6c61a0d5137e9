"""Software stand-in for the trusted program that seals timed commitments.

A node seals its action message ``m`` and gets back a handle
``gamma = H(m || r || n_commit)``. The program releases ``(m, r)`` only when
shown a proof of publication: a header chain extending its checkpoint in
which the commit transaction carrying ``gamma`` is buried under at least
``n_commit`` blocks. Block depth is the only clock it knows.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Protocol, Sequence, Tuple

from .chain import NotIncluded as _ChainNotIncluded
from .chain import BlockHeader, InclusionProof, Transaction, TxKind, digest, verify_header_chain
from .core import Action

MESSAGE_SIZE = 33
NONCE_SIZE = 32
NO_ALERT_MARKER = digest(b"")


class TeeError(Exception):
    pass


class UnknownHandle(TeeError, KeyError):
    pass


class BadHeaderChain(TeeError):
    pass


class NotIncluded(TeeError, _ChainNotIncluded):
    pass


class InsufficientDepth(TeeError):
    pass


class NonceSealed(TeeError):
    """A standard device refuses to expose a nonce early."""


def encode_message(action: Action, proof_hash: Optional[bytes] = None) -> bytes:
    h = NO_ALERT_MARKER if proof_hash is None else proof_hash
    if len(h) != 32:
        raise ValueError("proof hash must be 32 bytes")
    return bytes([action.byte]) + h


def decode_message(m: bytes) -> Tuple[Action, bytes]:
    if len(m) != MESSAGE_SIZE:
        raise ValueError(f"message must be {MESSAGE_SIZE} bytes")
    return Action.from_byte(m[0]), m[1:]


def has_depth(blocks_after: int, required: int) -> bool:
    return blocks_after >= required


def commitment_handle(m: bytes, r: bytes, n_commit: int) -> bytes:
    return digest(m, r, struct.pack(">I", n_commit))


# ------------------------------------------------------------------ signing

class Signer(Protocol):
    def sign(self, message: bytes) -> bytes: ...

    @property
    def verification_key(self) -> bytes: ...


@dataclass(frozen=True)
class HmacSigner:
    """Default device signer: a MAC whose key is shared with the contract's registry."""

    key: bytes

    def sign(self, message: bytes) -> bytes:
        return hmac.new(self.key, message, hashlib.sha256).digest()

    @property
    def verification_key(self) -> bytes:
        return self.key


def hmac_verify(verification_key: bytes, message: bytes, signature: bytes) -> bool:
    return hmac.compare_digest(hmac.new(verification_key, message, hashlib.sha256).digest(), signature)


Verifier = Callable[[bytes, bytes, bytes], bool]


@dataclass(frozen=True)
class Attestation:
    gamma: bytes
    n_commit: int
    message: bytes
    nonce: bytes
    signature: bytes

    @property
    def payload(self) -> bytes:
        return self.gamma + struct.pack(">I", self.n_commit) + self.message + self.nonce

    def encode(self) -> bytes:
        return self.payload + self.signature

    @classmethod
    def decode(cls, raw: bytes) -> "Attestation":
        head = 32 + 4 + MESSAGE_SIZE + NONCE_SIZE
        if len(raw) < head:
            raise ValueError("truncated attestation")
        gamma = raw[:32]
        (nc,) = struct.unpack(">I", raw[32:36])
        m = raw[36:36 + MESSAGE_SIZE]
        r = raw[36 + MESSAGE_SIZE:head]
        return cls(gamma, nc, m, r, raw[head:])


def verify_attestation(verification_key: bytes, attestation: Attestation,
                       verifier: Verifier = hmac_verify) -> bool:
    if not verifier(verification_key, attestation.payload, attestation.signature):
        return False
    return commitment_handle(attestation.message, attestation.nonce, attestation.n_commit) == attestation.gamma


# --------------------------------------------------------------- the device

@dataclass(frozen=True)
class SealedRecord:
    message_m: bytes
    nonce_r: bytes
    n_commit: int

    @property
    def handle_gamma(self) -> bytes:
        return commitment_handle(self.message_m, self.nonce_r, self.n_commit)


@dataclass(frozen=True)
class PoPProof:
    """``headers`` start right after the device checkpoint; ``inclusion_height_index``
    is the 1-based position of the inclusion block within them."""

    headers: Tuple[BlockHeader, ...]
    inclusion: InclusionProof
    inclusion_height_index: int
    commit_tx: Transaction


class _HmacDrbg:
    """HMAC-DRBG (SHA-256) without reseeding; deterministic per seed."""

    def __init__(self, seed: bytes):
        self.k = b"\x00" * 32
        self.v = b"\x01" * 32
        self._update(seed)

    def _mac(self, key: bytes, data: bytes) -> bytes:
        return hmac.new(key, data, hashlib.sha256).digest()

    def _update(self, data: bytes = b"") -> None:
        self.k = self._mac(self.k, self.v + b"\x00" + data)
        self.v = self._mac(self.k, self.v)
        if data:
            self.k = self._mac(self.k, self.v + b"\x01" + data)
            self.v = self._mac(self.k, self.v)

    def generate(self, size: int) -> bytes:
        out = b""
        while len(out) < size:
            self.v = self._mac(self.k, self.v)
            out += self.v
        self._update()
        return out[:size]


class TeeState:
    def __init__(self, device_id: int, checkpoint: BlockHeader, seed: bytes,
                 consensus_key: Optional[bytes] = None, signer: Optional[Signer] = None,
                 leaky: bool = False):
        self.device_id = device_id
        self._checkpoint = checkpoint
        self._rng = _HmacDrbg(b"tee-nonce" + struct.pack(">I", device_id) + seed)
        self._consensus_key = consensus_key
        self.signer: Signer = signer or HmacSigner(digest(b"device-key", struct.pack(">I", device_id), seed))
        self.leaky = leaky
        self._sealed: Dict[bytes, SealedRecord] = {}

    @property
    def checkpoint(self) -> BlockHeader:
        return self._checkpoint

    @property
    def verification_key(self) -> bytes:
        return self.signer.verification_key

    @property
    def handles(self) -> Tuple[bytes, ...]:
        return tuple(self._sealed)

    def seal(self, m: bytes, n_commit: int) -> bytes:
        if n_commit < 0:
            raise ValueError("n_commit must be >= 0")
        rec = SealedRecord(bytes(m), self._rng.generate(NONCE_SIZE), n_commit)
        self._sealed[rec.handle_gamma] = rec
        return rec.handle_gamma

    def _check_headers(self, headers: Sequence[BlockHeader]) -> None:
        if not verify_header_chain(self._checkpoint, headers):
            raise BadHeaderChain("headers do not extend the checkpoint")
        if self._consensus_key is not None:
            for h in headers:
                tag = hmac.new(self._consensus_key, h.digest, hashlib.sha256).digest()
                if not hmac.compare_digest(tag, h.finality_tag):
                    raise BadHeaderChain(f"header {h.height} is not on the designated chain")

    def advance_checkpoint(self, headers: Sequence[BlockHeader]) -> BlockHeader:
        """Move the checkpoint forward along a verified header chain."""
        self._check_headers(headers)
        if headers:
            self._checkpoint = headers[-1]
        return self._checkpoint

    def unseal_after(self, gamma: bytes, pop: PoPProof) -> Tuple[bytes, bytes, Attestation]:
        rec = self._sealed.get(gamma)
        if rec is None:
            raise UnknownHandle(gamma.hex())
        headers = tuple(pop.headers)
        self._check_headers(headers)
        idx = pop.inclusion_height_index
        if not 1 <= idx <= len(headers):
            raise NotIncluded("inclusion block not among the supplied headers")
        tx = pop.commit_tx
        if tx.kind is not TxKind.COMMIT or tx.payload != gamma:
            raise NotIncluded("transaction does not commit to this handle")
        if not pop.inclusion.verify(headers[idx - 1], tx):
            raise NotIncluded("inclusion proof does not verify")
        after = len(headers) - idx
        if not has_depth(after, rec.n_commit):
            raise InsufficientDepth(f"{after} blocks after inclusion, need {rec.n_commit}")
        self._checkpoint = headers[-1]
        att = Attestation(gamma, rec.n_commit, rec.message_m, rec.nonce_r, b"")
        att = Attestation(gamma, rec.n_commit, rec.message_m, rec.nonce_r, self.signer.sign(att.payload))
        return rec.message_m, rec.nonce_r, att

    def peek_nonce(self, gamma: bytes) -> Tuple[bytes, bytes]:
        """Leaky devices only: hand out (m, r) immediately."""
        if not self.leaky:
            raise NonceSealed("standard devices never expose a nonce before publication")
        rec = self._sealed.get(gamma)
        if rec is None:
            raise UnknownHandle(gamma.hex())
        return rec.message_m, rec.nonce_r


def build_pop(chain, checkpoint_height: int, commit_tx: Transaction, upto: Optional[int] = None) -> PoPProof:
    """Assemble a PoP from the honest chain (raises chain.NotIncluded if absent)."""
    inclusion = chain.prove_inclusion(commit_tx)
    headers = tuple(chain.headers_after(checkpoint_height, upto))
    return PoPProof(headers, inclusion, inclusion.height - checkpoint_height, commit_tx)

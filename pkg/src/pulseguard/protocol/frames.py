"""Bit-exact frame codec (see docs/protocol.md).

Layout, all multi-byte integers little-endian::

    magic      2  = B1 CE
    version    1  = 01
    msg_type   1  (01 PairRequest, 02 PairConfirm, 03 ReadingBatch, 04 Ack, 05 TimeSync)
    device_id  8
    sequence   4  (u32, strictly increasing per direction)
    nonce     12  = 4-byte direction salt || 8-byte sequence counter
    payload_len 2 (u16, plaintext length)
    ciphertext  payload_len
    auth_tag   16

The 30 header bytes are the AEAD associated data; cipher is
ChaCha20-Poly1305. Decoding is safe on arbitrary byte strings.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np
from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from pulseguard.errors import (
    AuthFailure,
    BadMagic,
    FrameTooLarge,
    ProtocolError,
    ReplayRejected,
    Truncated,
    UnsupportedVersion,
)
from pulseguard.protocol.session import Session
from pulseguard.vitals.params import SensorTransfer

FRAME_MAGIC = b"\xb1\xce"
PROTOCOL_VERSION = 1
_HEADER = struct.Struct("<2sBB8sI12sH")
HEADER_LEN = _HEADER.size  # 30
TAG_LEN = 16
FRAME_OVERHEAD = HEADER_LEN + TAG_LEN  # 46
MAX_PAYLOAD = 0xFFFF


class MsgType(enum.IntEnum):
    PAIR_REQUEST = 0x01
    PAIR_CONFIRM = 0x02
    READING_BATCH = 0x03
    ACK = 0x04
    TIME_SYNC = 0x05


@dataclass(frozen=True)
class PairRequest:
    """Pairing advertisement; carries the key-derivation salt."""

    device_salt: bytes  # 16 bytes

    msg_type = MsgType.PAIR_REQUEST

    def encode_payload(self) -> bytes:
        if len(self.device_salt) != 16:
            raise ProtocolError("device_salt must be 16 bytes")
        return self.device_salt

    @classmethod
    def decode_payload(cls, payload: bytes) -> "PairRequest":
        if len(payload) != 16:
            raise ProtocolError("PairRequest payload must be 16 bytes")
        return cls(device_salt=payload)


@dataclass(frozen=True)
class PairConfirm:
    """Mutual key proof; the device's reply also carries sensor transfer."""

    token: bytes  # 16 bytes
    transfer: SensorTransfer | None = None

    msg_type = MsgType.PAIR_CONFIRM

    def encode_payload(self) -> bytes:
        if len(self.token) != 16:
            raise ProtocolError("token must be 16 bytes")
        if self.transfer is None:
            return self.token
        return self.token + struct.pack(
            "<dd", self.transfer.offset_counts, self.transfer.counts_per_mmhg
        )

    @classmethod
    def decode_payload(cls, payload: bytes) -> "PairConfirm":
        if len(payload) == 16:
            return cls(token=payload)
        if len(payload) == 32:
            offset, scale = struct.unpack("<dd", payload[16:])
            return cls(token=payload[:16], transfer=SensorTransfer(offset, scale))
        raise ProtocolError("PairConfirm payload must be 16 or 32 bytes")


@dataclass(frozen=True)
class ReadingBatch:
    """One measurement window of raw samples plus device status."""

    start_time_ms: int
    sample_rate_hz: int
    samples: np.ndarray  # uint16
    battery_pct: int
    resting: bool

    msg_type = MsgType.READING_BATCH
    _FIXED = struct.Struct("<QHH")

    def encode_payload(self) -> bytes:
        samples = np.ascontiguousarray(self.samples, dtype="<u2")
        head = self._FIXED.pack(self.start_time_ms, self.sample_rate_hz, len(samples))
        flags = 0x01 if self.resting else 0x00
        return head + samples.tobytes() + struct.pack("<BB", self.battery_pct, flags)

    @classmethod
    def decode_payload(cls, payload: bytes) -> "ReadingBatch":
        if len(payload) < cls._FIXED.size + 2:
            raise ProtocolError("ReadingBatch payload too short")
        start_ms, rate, n = cls._FIXED.unpack_from(payload, 0)
        expected = cls._FIXED.size + 2 * n + 2
        if len(payload) != expected:
            raise ProtocolError(
                f"ReadingBatch length {len(payload)} != expected {expected}"
            )
        samples = np.frombuffer(payload, dtype="<u2", count=n, offset=cls._FIXED.size)
        battery, flags = struct.unpack_from("<BB", payload, cls._FIXED.size + 2 * n)
        return cls(
            start_time_ms=start_ms,
            sample_rate_hz=rate,
            samples=samples.copy(),
            battery_pct=battery,
            resting=bool(flags & 0x01),
        )

    def __eq__(self, other):
        return (
            isinstance(other, ReadingBatch)
            and self.start_time_ms == other.start_time_ms
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.samples, other.samples)
            and self.battery_pct == other.battery_pct
            and self.resting == other.resting
        )


@dataclass(frozen=True)
class Ack:
    acked_sequence: int

    msg_type = MsgType.ACK

    def encode_payload(self) -> bytes:
        return struct.pack("<I", self.acked_sequence)

    @classmethod
    def decode_payload(cls, payload: bytes) -> "Ack":
        if len(payload) != 4:
            raise ProtocolError("Ack payload must be 4 bytes")
        return cls(acked_sequence=struct.unpack("<I", payload)[0])


@dataclass(frozen=True)
class TimeSync:
    now_ms: int

    msg_type = MsgType.TIME_SYNC

    def encode_payload(self) -> bytes:
        return struct.pack("<Q", self.now_ms)

    @classmethod
    def decode_payload(cls, payload: bytes) -> "TimeSync":
        if len(payload) != 8:
            raise ProtocolError("TimeSync payload must be 8 bytes")
        return cls(now_ms=struct.unpack("<Q", payload)[0])


Message = PairRequest | PairConfirm | ReadingBatch | Ack | TimeSync

_DECODERS = {
    MsgType.PAIR_REQUEST: PairRequest,
    MsgType.PAIR_CONFIRM: PairConfirm,
    MsgType.READING_BATCH: ReadingBatch,
    MsgType.ACK: Ack,
    MsgType.TIME_SYNC: TimeSync,
}


def encode_frame(msg: Message, session: Session) -> bytes:
    """Encrypt and frame a message, incrementing the session send counter."""
    payload = msg.encode_payload()
    if len(payload) > MAX_PAYLOAD:
        raise FrameTooLarge(f"payload {len(payload)} exceeds {MAX_PAYLOAD} bytes")
    seq = session.send_sequence + 1
    nonce = session.send_salt + struct.pack("<Q", seq)
    header = _HEADER.pack(
        FRAME_MAGIC,
        PROTOCOL_VERSION,
        int(msg.msg_type),
        session.device_id,
        seq,
        nonce,
        len(payload),
    )
    ct_tag = ChaCha20Poly1305(session.key).encrypt(nonce, payload, header)
    session.send_sequence = seq
    return header + ct_tag


def peek_device_id(data: bytes) -> bytes:
    """Read the (unauthenticated) device id for session lookup."""
    if len(data) < HEADER_LEN:
        raise Truncated(f"{len(data)} bytes is below the {FRAME_OVERHEAD}-byte minimum")
    return data[4:12]


def decode_frame(data: bytes, session: Session) -> Message:
    """Authenticate, decrypt and replay-check a frame.

    Accepts arbitrary byte strings; on success updates the session's
    receive counter.
    """
    if len(data) < FRAME_OVERHEAD:
        raise Truncated(f"{len(data)} bytes is below the {FRAME_OVERHEAD}-byte minimum")
    magic, version, msg_type, device_id, seq, nonce, payload_len = _HEADER.unpack_from(data, 0)
    if magic != FRAME_MAGIC:
        raise BadMagic(f"bad magic {magic.hex()}")
    if version != PROTOCOL_VERSION:
        raise UnsupportedVersion(f"version {version}")
    expected_len = FRAME_OVERHEAD + payload_len
    if len(data) != expected_len:
        raise Truncated(f"frame is {len(data)} bytes, header declares {expected_len}")
    header = data[:HEADER_LEN]
    if device_id != session.device_id:
        raise AuthFailure("device id does not match session")
    # Nonce structure is fixed; a peer deviating from it risks nonce reuse.
    if nonce != session.recv_salt + struct.pack("<Q", seq):
        raise AuthFailure("nonce does not match direction salt and sequence")
    try:
        payload = ChaCha20Poly1305(session.key).decrypt(nonce, data[HEADER_LEN:], header)
    except InvalidTag as exc:
        raise AuthFailure("authentication tag mismatch") from exc
    if seq <= session.recv_sequence:
        raise ReplayRejected(f"sequence {seq} <= last accepted {session.recv_sequence}")
    try:
        decoder = _DECODERS[MsgType(msg_type)]
    except ValueError as exc:
        raise ProtocolError(f"unknown message type 0x{msg_type:02x}") from exc
    msg = decoder.decode_payload(payload)
    session.recv_sequence = seq
    return msg

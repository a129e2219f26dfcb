"""Authenticated, encrypted, framed codec for the bracelet-gateway link."""

from pulseguard.protocol.keys import derive_key
from pulseguard.protocol.session import Session, advert_session_pair, session_pair
from pulseguard.protocol.frames import (
    FRAME_MAGIC,
    FRAME_OVERHEAD,
    HEADER_LEN,
    PROTOCOL_VERSION,
    Ack,
    MsgType,
    PairConfirm,
    PairRequest,
    ReadingBatch,
    TimeSync,
    decode_frame,
    encode_frame,
    peek_device_id,
)
from pulseguard.protocol.pairing import DevicePairing, GatewayPairing, PAIR_TIMEOUT_MS

__all__ = [
    "derive_key",
    "Session",
    "advert_session_pair",
    "session_pair",
    "FRAME_MAGIC",
    "FRAME_OVERHEAD",
    "HEADER_LEN",
    "PROTOCOL_VERSION",
    "Ack",
    "MsgType",
    "PairConfirm",
    "PairRequest",
    "ReadingBatch",
    "TimeSync",
    "decode_frame",
    "encode_frame",
    "peek_device_id",
    "DevicePairing",
    "GatewayPairing",
    "PAIR_TIMEOUT_MS",
]

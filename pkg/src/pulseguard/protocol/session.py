"""Per-link session state: key, direction nonce salts, sequence counters."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from pulseguard.vitals.params import SensorTransfer


def _direction_salt(direction: bytes, device_id: bytes, device_salt: bytes) -> bytes:
    return hashlib.sha256(b"pg-nonce:" + direction + device_id + device_salt).digest()[:4]


@dataclass
class Session:
    """One endpoint's view of an established link.

    ``send_sequence`` is the last sequence this side encoded;
    ``recv_sequence`` the last it accepted. Both are monotone. Nonces are
    direction-salted so the two ends never reuse a (key, nonce) pair. A
    Session must be confined to one worker or externally serialised.
    """

    device_id: bytes
    key: bytes
    send_salt: bytes
    recv_salt: bytes
    transfer: SensorTransfer = field(default_factory=SensorTransfer)
    send_sequence: int = 0
    recv_sequence: int = 0

    def __post_init__(self):
        assert len(self.device_id) == 8 and len(self.key) == 32
        assert len(self.send_salt) == 4 and len(self.recv_salt) == 4


def session_pair(
    device_id: bytes,
    key: bytes,
    device_salt: bytes,
    transfer: SensorTransfer = SensorTransfer(),
) -> tuple[Session, Session]:
    """(device-side, gateway-side) sessions for one paired link."""
    d2g = _direction_salt(b"d2g", device_id, device_salt)
    g2d = _direction_salt(b"g2d", device_id, device_salt)
    device = Session(device_id=device_id, key=key, send_salt=d2g, recv_salt=g2d, transfer=transfer)
    gateway = Session(device_id=device_id, key=key, send_salt=g2d, recv_salt=d2g, transfer=transfer)
    return device, gateway


def advert_session_pair(device_id: bytes) -> tuple[Session, Session]:
    """Discovery-only sessions for pairing advertisements.

    The advertisement key is derived from the public device id, so it gives
    integrity framing only, no secrecy; pairing security rests on the
    code-derived key proven by the PairConfirm round-trip.
    """
    key = hashlib.sha256(b"pg-advert:" + device_id).digest()
    return session_pair(device_id, key, device_salt=b"\x00" * 16)

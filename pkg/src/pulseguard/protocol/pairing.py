"""Pairing handshake state machines.

The bracelet displays a 6-digit code and advertises PairRequest frames
carrying its key-derivation salt. The user types the code into the gateway,
which derives the shared key and answers with a PairConfirm challenge; the
device proves key possession by echoing a hash of the challenge (plus its
sensor transfer). Either side times out after 30 s without progress.
"""

from __future__ import annotations

import hashlib
import os

from pulseguard.errors import AuthFailure, PairTimeout, ProtocolError
from pulseguard.protocol.frames import PairConfirm, PairRequest, decode_frame, encode_frame
from pulseguard.protocol.keys import derive_key
from pulseguard.protocol.session import Session, advert_session_pair, session_pair
from pulseguard.vitals.params import SensorTransfer

PAIR_TIMEOUT_MS = 30_000


def _confirm_echo(challenge: bytes) -> bytes:
    return hashlib.sha256(b"pg-confirm:" + challenge).digest()[:16]


class DevicePairing:
    """Bracelet side: shows the code, advertises, answers the challenge."""

    def __init__(
        self,
        device_id: bytes,
        device_salt: bytes,
        code: str,
        transfer: SensorTransfer,
        now_ms: int,
    ):
        self.device_id = device_id
        self.device_salt = device_salt
        self.transfer = transfer
        self.key = derive_key(code, device_salt)
        self.started_ms = now_ms
        self._advert_tx, self._advert_rx = advert_session_pair(device_id)
        self.session: Session | None = None

    def advertisement(self) -> bytes:
        return encode_frame(PairRequest(device_salt=self.device_salt), self._advert_tx)

    def check_timeout(self, now_ms: int) -> None:
        if self.session is None and now_ms - self.started_ms > PAIR_TIMEOUT_MS:
            raise PairTimeout("no pairing confirmation within 30 s")

    def on_frame(self, data: bytes, now_ms: int) -> bytes:
        """Handle the gateway's PairConfirm; returns the reply frame.

        Raises AuthFailure when the gateway derived a different key (code
        mismatch); raises PairTimeout past the deadline.
        """
        self.check_timeout(now_ms)
        device_session, _ = session_pair(self.device_id, self.key, self.device_salt, self.transfer)
        msg = decode_frame(data, device_session)  # AuthFailure on wrong code
        if not isinstance(msg, PairConfirm):
            raise ProtocolError(f"expected PairConfirm, got {type(msg).__name__}")
        reply = PairConfirm(token=_confirm_echo(msg.token), transfer=self.transfer)
        out = encode_frame(reply, device_session)
        self.session = device_session
        return out


class GatewayPairing:
    """Gateway side: user enters the code; challenges the device."""

    def __init__(self, code_entered: str, now_ms: int, challenge: bytes | None = None):
        self.code = code_entered
        self.started_ms = now_ms
        self.challenge = challenge if challenge is not None else os.urandom(16)
        self.session: Session | None = None
        self._pending: Session | None = None

    def check_timeout(self, now_ms: int) -> None:
        if self.session is None and now_ms - self.started_ms > PAIR_TIMEOUT_MS:
            raise PairTimeout("pairing did not complete within 30 s")

    def on_advertisement(self, data: bytes, now_ms: int) -> bytes:
        """Decode a PairRequest and send the key-proof challenge."""
        self.check_timeout(now_ms)
        if len(data) < 12:
            raise ProtocolError("advertisement too short")
        device_id = data[4:12]
        _, advert_rx = advert_session_pair(device_id)
        msg = decode_frame(data, advert_rx)
        if not isinstance(msg, PairRequest):
            raise ProtocolError(f"expected PairRequest, got {type(msg).__name__}")
        key = derive_key(self.code, msg.device_salt)
        _, gateway_session = session_pair(device_id, key, msg.device_salt)
        self._pending = gateway_session
        return encode_frame(PairConfirm(token=self.challenge), gateway_session)

    def on_frame(self, data: bytes, now_ms: int) -> Session:
        """Verify the device's echo; returns the established session."""
        self.check_timeout(now_ms)
        if self._pending is None:
            raise ProtocolError("no pairing in progress")
        msg = decode_frame(data, self._pending)
        if not isinstance(msg, PairConfirm):
            raise ProtocolError(f"expected PairConfirm, got {type(msg).__name__}")
        if msg.token != _confirm_echo(self.challenge):
            raise AuthFailure("challenge echo mismatch")
        if msg.transfer is not None:
            self._pending.transfer = msg.transfer
        self.session = self._pending
        return self.session

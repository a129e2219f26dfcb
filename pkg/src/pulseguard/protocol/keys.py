"""Pairing-code key derivation.

PBKDF2-HMAC-SHA256 over the 6-digit code shown on the bracelet screen,
salted with the device's 16-byte pairing salt. 100000 iterations, 32-byte
output. Parameters are fixed; both link ends must agree byte-for-byte.
"""

from __future__ import annotations

import hashlib
import re

from pulseguard.errors import DomainError

PBKDF2_ITERATIONS = 100_000
KEY_LEN = 32
_CODE_RE = re.compile(r"^[0-9]{6}$")


def derive_key(pairing_code: str, device_salt: bytes) -> bytes:
    if not _CODE_RE.match(pairing_code):
        raise DomainError("pairing code must be exactly 6 decimal digits")
    if len(device_salt) != 16:
        raise DomainError("device salt must be 16 bytes")
    return hashlib.pbkdf2_hmac(
        "sha256", pairing_code.encode("ascii"), device_salt, PBKDF2_ITERATIONS, KEY_LEN
    )

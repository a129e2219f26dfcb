"""Independent oracles used by the test suite.

Each is implemented from first principles, separately from the production
code paths it checks: an exhaustive local-extrema scan, a from-scratch
RFC 8439 ChaCha20-Poly1305, and a brute-force all-pairs alert scan.
"""

from __future__ import annotations

import struct

import numpy as np


# -- exhaustive local extrema -------------------------------------------------

def exhaustive_extrema(x: np.ndarray) -> tuple[list[tuple[int, float]], list[tuple[int, float]]]:
    """Scan every plateau; report (leftmost index, value) of strict extrema.

    A plateau is a maximal run of equal samples; it is a maximum when both
    outer neighbours are strictly smaller (boundaries count as satisfied),
    symmetrically for minima.
    """
    n = len(x)
    maxima, minima = [], []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[j + 1] == x[i]:
            j += 1
        left = x[i - 1] if i > 0 else None
        right = x[j + 1] if j + 1 < n else None
        if (left is None or left < x[i]) and (right is None or right < x[i]):
            maxima.append((i, float(x[i])))
        if (left is None or left > x[i]) and (right is None or right > x[i]):
            minima.append((i, float(x[i])))
        i = j + 1
    return maxima, minima


# -- RFC 8439 ChaCha20-Poly1305, from scratch ----------------------------------

_MASK32 = 0xFFFFFFFF


def _rotl32(v: int, n: int) -> int:
    return ((v << n) & _MASK32) | (v >> (32 - n))


def _quarter(s: list[int], a: int, b: int, c: int, d: int) -> None:
    s[a] = (s[a] + s[b]) & _MASK32; s[d] = _rotl32(s[d] ^ s[a], 16)
    s[c] = (s[c] + s[d]) & _MASK32; s[b] = _rotl32(s[b] ^ s[c], 12)
    s[a] = (s[a] + s[b]) & _MASK32; s[d] = _rotl32(s[d] ^ s[a], 8)
    s[c] = (s[c] + s[d]) & _MASK32; s[b] = _rotl32(s[b] ^ s[c], 7)


def chacha20_block(key: bytes, counter: int, nonce: bytes) -> bytes:
    state = (
        list(struct.unpack("<4I", b"expand 32-byte k"))
        + list(struct.unpack("<8I", key))
        + [counter & _MASK32]
        + list(struct.unpack("<3I", nonce))
    )
    work = state.copy()
    for _ in range(10):
        _quarter(work, 0, 4, 8, 12)
        _quarter(work, 1, 5, 9, 13)
        _quarter(work, 2, 6, 10, 14)
        _quarter(work, 3, 7, 11, 15)
        _quarter(work, 0, 5, 10, 15)
        _quarter(work, 1, 6, 11, 12)
        _quarter(work, 2, 7, 8, 13)
        _quarter(work, 3, 4, 9, 14)
    return struct.pack("<16I", *((w + s) & _MASK32 for w, s in zip(work, state)))


def chacha20_xor(key: bytes, counter: int, nonce: bytes, data: bytes) -> bytes:
    out = bytearray()
    for block_index in range((len(data) + 63) // 64):
        keystream = chacha20_block(key, counter + block_index, nonce)
        chunk = data[block_index * 64 : block_index * 64 + 64]
        out.extend(b ^ k for b, k in zip(chunk, keystream))
    return bytes(out)


def poly1305_mac(msg: bytes, key: bytes) -> bytes:
    r = int.from_bytes(key[:16], "little") & 0x0FFFFFFC0FFFFFFC0FFFFFFC0FFFFFFF
    s = int.from_bytes(key[16:32], "little")
    p = (1 << 130) - 5
    acc = 0
    for i in range(0, len(msg), 16):
        block = msg[i : i + 16] + b"\x01"
        acc = ((acc + int.from_bytes(block, "little")) * r) % p
    return ((acc + s) & ((1 << 128) - 1)).to_bytes(16, "little")


def _pad16(data: bytes) -> bytes:
    return b"\x00" * (-len(data) % 16)


def aead_chacha20poly1305_encrypt(
    key: bytes, nonce: bytes, plaintext: bytes, aad: bytes
) -> tuple[bytes, bytes]:
    otk = chacha20_block(key, 0, nonce)[:32]
    ciphertext = chacha20_xor(key, 1, nonce, plaintext)
    mac_data = (
        aad + _pad16(aad)
        + ciphertext + _pad16(ciphertext)
        + struct.pack("<QQ", len(aad), len(ciphertext))
    )
    return ciphertext, poly1305_mac(mac_data, otk)


# -- brute-force alert pair scan -----------------------------------------------

def brute_force_alert_pair(history, rule, now_ms):
    """All-pairs search for the lexicographically earliest qualifying pair."""
    window_start = now_ms - rule.evidence_window_ms
    elevated = [
        r
        for r in history
        if r.timestamp_ms >= window_start
        and (r.sbp_mmhg > rule.sbp_threshold_mmhg or r.dbp_mmhg > rule.dbp_threshold_mmhg)
    ]
    candidates = []
    for a in elevated:
        for b in elevated:
            if b.timestamp_ms - a.timestamp_ms >= rule.min_gap_ms:
                candidates.append((a, b))
    if not candidates:
        return None
    return min(candidates, key=lambda ab: (ab[0].timestamp_ms, ab[1].timestamp_ms))

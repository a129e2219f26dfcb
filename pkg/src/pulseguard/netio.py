"""Length-prefixed frame transport over stream sockets.

Each wire unit is a 4-byte little-endian length followed by that many
bytes. The frame codec itself is transport-agnostic; this is the local
stand-in for the radio link.
"""

from __future__ import annotations

import socket
import struct

_LEN = struct.Struct("<I")
MAX_WIRE_FRAME = 1 << 20


def send_frame(sock: socket.socket, data: bytes) -> None:
    sock.sendall(_LEN.pack(len(data)) + data)


class FrameReader:
    """Accumulates stream bytes and yields complete frames."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[bytes]:
        self._buf.extend(data)
        frames = []
        while True:
            if len(self._buf) < _LEN.size:
                return frames
            (length,) = _LEN.unpack_from(self._buf, 0)
            if length > MAX_WIRE_FRAME:
                raise ValueError(f"wire frame of {length} bytes exceeds limit")
            if len(self._buf) < _LEN.size + length:
                return frames
            frames.append(bytes(self._buf[_LEN.size : _LEN.size + length]))
            del self._buf[: _LEN.size + length]


def recv_frame_blocking(sock: socket.socket, reader: FrameReader, timeout_s: float) -> bytes | None:
    """Wait for one frame; None on timeout or orderly shutdown."""
    sock.settimeout(timeout_s)
    try:
        while True:
            chunk = sock.recv(65536)
            if not chunk:
                return None
            frames = reader.feed(chunk)
            if frames:
                # keep extra frames buffered in the reader for later feeds
                if len(frames) > 1:
                    rest = b"".join(_LEN.pack(len(f)) + f for f in frames[1:])
                    reader._buf[:0] = rest
                return frames[0]
    except socket.timeout:
        return None
    finally:
        sock.settimeout(None)

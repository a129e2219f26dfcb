"""Gateway process wiring: pairing listener, ingest workers, uploader."""

from __future__ import annotations

import json
import logging
import os
import socket
import threading
import time
from pathlib import Path

from pulseguard.errors import ProtocolError
from pulseguard.gateway.ingest import GatewayIngest
from pulseguard.gateway.store import LocalStore
from pulseguard.gateway.uploader import ConnectivityState, Uploader
from pulseguard.netio import FrameReader, send_frame
from pulseguard.protocol.frames import MsgType
from pulseguard.protocol.pairing import GatewayPairing

logger = logging.getLogger(__name__)


class GatewayService:
    def __init__(
        self,
        listen_addr: tuple[str, int],
        server_url: str,
        patient_id: str,
        token: str,
        store_path: str,
        pairing_code: str,
        t0_ms: int,
        time_scale: float = 1.0,
        offline_intervals_h: list[tuple[float, float]] = (),
        stats_path: str | None = None,
        flush_wall_s: float = 0.5,
    ):
        self.listen_addr = listen_addr
        self.patient_id = patient_id
        self.pairing_code = pairing_code
        self.t0_ms = t0_ms
        self.time_scale = time_scale
        self.stats_path = stats_path
        self.flush_wall_s = flush_wall_s
        self.store = LocalStore(store_path)
        self.ingest = GatewayIngest(patient_id=patient_id, store=self.store)
        self.uploader = Uploader(server_url, token)
        self.connectivity = ConnectivityState(
            offline_intervals_ms=[
                (t0_ms + int(a * 3_600_000), t0_ms + int(b * 3_600_000))
                for a, b in offline_intervals_h
            ]
        )
        self._wall_start = time.monotonic()
        self._stop = threading.Event()
        self._stats_lock = threading.Lock()
        self._listener: socket.socket | None = None
        self._threads: list[threading.Thread] = []
        self.bound_port: int | None = None

    def logical_now_ms(self) -> int:
        return self.t0_ms + int((time.monotonic() - self._wall_start) * 1000 * self.time_scale)

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        self._listener = socket.create_server(self.listen_addr)
        self.bound_port = self._listener.getsockname()[1]
        self._listener.settimeout(0.25)
        accept = threading.Thread(target=self._accept_loop, name="gw-accept", daemon=True)
        upload = threading.Thread(target=self._upload_loop, name="gw-upload", daemon=True)
        self._threads = [accept, upload]
        for t in self._threads:
            t.start()

    def stop(self, final_flush_wall_s: float = 5.0) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=5.0)
        if self._listener:
            self._listener.close()
        deadline = time.monotonic() + final_flush_wall_s
        while self.store.counts()["pending"] and time.monotonic() < deadline:
            report = self.uploader.flush(self.store, self.connectivity, self.logical_now_ms())
            if report.failed or not self.connectivity.scripted_online(self.logical_now_ms()):
                time.sleep(0.2)
        self.write_stats()
        self.uploader.close()
        self.store.compact()
        self.store.close()

    # -- workers ------------------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            worker = threading.Thread(
                target=self._serve_device, args=(conn,), name="gw-device", daemon=True
            )
            worker.start()
            self._threads.append(worker)

    def _serve_device(self, conn: socket.socket) -> None:
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        reader = FrameReader()
        # pairing is a human real-time interaction; its timeout is wall-clock
        pairing = GatewayPairing(self.pairing_code, now_ms=int(time.monotonic() * 1000))
        paired = False
        conn.settimeout(0.25)
        try:
            while not self._stop.is_set():
                try:
                    chunk = conn.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    return
                if not chunk:
                    return
                for data in reader.feed(chunk):
                    # the radio link must survive anything a single frame does
                    try:
                        if not paired:
                            paired = self._pairing_step(conn, pairing, data)
                            continue
                        result = self.ingest.ingest_frame(data)
                        if result.ack is not None:
                            send_frame(conn, result.ack)
                        self.write_stats()
                    except Exception:
                        logger.exception("frame handling failed; link kept open")
        finally:
            conn.close()

    def _pairing_step(self, conn: socket.socket, pairing: GatewayPairing, data: bytes) -> bool:
        now = int(time.monotonic() * 1000)
        try:
            if len(data) > 3 and data[3] == MsgType.PAIR_REQUEST:
                send_frame(conn, pairing.on_advertisement(data, now))
                return False
            session = pairing.on_frame(data, now)
        except ProtocolError as exc:
            logger.warning("pairing failed: %s", exc)
            return False
        self.ingest.sessions[session.device_id] = session
        logger.info("paired device %s", session.device_id.hex())
        return True

    def _upload_loop(self) -> None:
        while not self._stop.is_set():
            self.uploader.flush(self.store, self.connectivity, self.logical_now_ms())
            self.write_stats()
            self._stop.wait(self.flush_wall_s)

    # -- stats ------------------------------------------------------------------------

    def stats(self) -> dict:
        counts = self.store.counts()
        return {
            "patient_id": self.patient_id,
            "counters": dict(self.ingest.counters),
            "store": counts,
        }

    def write_stats(self) -> None:
        if not self.stats_path:
            return
        # serialised and with a per-thread temp name: the ingest and upload
        # workers both publish stats, and a shared temp file would race
        with self._stats_lock:
            tmp = Path(f"{self.stats_path}.{threading.get_ident()}.tmp")
            tmp.write_text(json.dumps(self.stats(), indent=2), encoding="utf-8")
            os.replace(tmp, self.stats_path)

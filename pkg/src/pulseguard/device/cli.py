"""device-sim: run one simulated bracelet against a gateway."""

from __future__ import annotations

import argparse
import json
import select
import socket
import sys
import time

import numpy as np

from pulseguard.device.sim import DeviceConfig, DeviceState, on_ack, step
from pulseguard.errors import DeviceDead, ProtocolError
from pulseguard.netio import FrameReader, recv_frame_blocking, send_frame
from pulseguard.protocol.frames import Ack, decode_frame
from pulseguard.protocol.pairing import DevicePairing
from pulseguard.vitals.params import SensorTransfer
from pulseguard.vitals.profile_files import load_profile


def pairing_code_for_seed(seed: int) -> str:
    return f"{seed % 1_000_000:06d}"


def run_device(args) -> dict:
    profile = load_profile(args.scenario)
    config = DeviceConfig(
        profile=profile,
        measurement_interval_min=args.interval_min,
        resting_window=tuple(args.resting_window.split("-")),
        time_scale=args.time_scale,
        seed=args.seed,
        noise_sigma_counts=args.noise_sigma,
        transfer=SensorTransfer(args.transfer_offset, args.transfer_scale),
        artifact_every_n=args.artifact_every_n,
    )
    t0_ms = args.start_at_ms if args.start_at_ms is not None else profile.trajectory.start_ms
    t_end_ms = t0_ms + int(args.duration_h * 3_600_000)
    code = args.pairing_code or pairing_code_for_seed(args.seed)
    loss_rng = np.random.default_rng(args.seed ^ 0x10552)

    host, port = args.gateway.rsplit(":", 1)
    sock = socket.create_connection((host, int(port)), timeout=30.0)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    reader = FrameReader()

    # pairing: advertise, answer the gateway's challenge
    pairing = DevicePairing(config.device_id, _salt_for_seed(args.seed), code,
                            config.transfer, now_ms=t0_ms)
    send_frame(sock, pairing.advertisement())
    challenge = recv_frame_blocking(sock, reader, timeout_s=30.0)
    if challenge is None:
        raise TimeoutError("no pairing challenge from gateway")
    send_frame(sock, pairing.on_frame(challenge, t0_ms))
    session = pairing.session

    state = DeviceState(config=config, session=session, next_measurement_at_ms=t0_ms)
    wall_start = time.monotonic()
    sock.setblocking(False)

    def logical_now() -> int:
        return t0_ms + int((time.monotonic() - wall_start) * 1000 * config.time_scale)

    data_frames_sent = 0
    data_frames_dropped = 0
    draining = False
    drain_wall_deadline = None
    dead = False

    while True:
        now = logical_now()
        # enter drain only once every grid measurement before t_end has fired,
        # so a stalled process still emits the full deterministic schedule
        if not draining and now >= t_end_ms and state.next_measurement_at_ms >= t_end_ms:
            draining = True
            state.next_measurement_at_ms = 1 << 62  # stop measuring, keep retransmitting
            drain_wall_deadline = time.monotonic() + args.drain_wall_s
        if draining and (not state.outbox or time.monotonic() > drain_wall_deadline):
            break
        try:
            frames = step(state, min(now, t_end_ms) if not draining else now)
        except DeviceDead:
            dead = True
            break
        for frame in frames:
            if loss_rng.random() < args.frame_loss:
                data_frames_dropped += 1
                continue
            try:
                send_frame(sock, frame)
                data_frames_sent += 1
            except (BrokenPipeError, ConnectionResetError):
                break
        # drain acks
        ready, _, _ = select.select([sock], [], [], 0.0)
        if ready:
            try:
                chunk = sock.recv(65536)
            except BlockingIOError:
                chunk = b""
            if chunk:
                for data in reader.feed(chunk):
                    try:
                        msg = decode_frame(data, session)
                    except ProtocolError:
                        continue
                    if isinstance(msg, Ack):
                        on_ack(state, msg.acked_sequence)
        time.sleep(args.tick_wall_s)

    sock.close()
    return {
        "patient_id": profile.patient_id,
        "device_id": config.device_id.hex(),
        "readings_emitted": state.emitted_count,
        "artifacts_injected": state.artifact_count,
        "data_frames_sent": data_frames_sent,
        "data_frames_dropped": data_frames_dropped,
        "unacked_at_exit": len(state.outbox),
        "battery_pct": round(state.battery_pct, 3),
        "device_dead": dead,
    }


def _salt_for_seed(seed: int) -> bytes:
    import hashlib

    return hashlib.sha256(f"pg-salt:{seed}".encode()).digest()[:16]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="device-sim")
    parser.add_argument("--scenario", required=True, help="patient profile YAML")
    parser.add_argument("--gateway", required=True, help="gateway host:port")
    parser.add_argument("--interval-min", type=int, default=15)
    parser.add_argument("--resting-window", default="22:00-06:00")
    parser.add_argument("--time-scale", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--duration-h", type=float, default=24.0)
    parser.add_argument("--start-at-ms", type=int, default=None)
    parser.add_argument("--noise-sigma", type=float, default=200.0)
    parser.add_argument("--transfer-offset", type=float, default=0.0)
    parser.add_argument("--transfer-scale", type=float, default=100.0)
    parser.add_argument("--pairing-code", default=None)
    parser.add_argument("--frame-loss", type=float, default=0.0)
    parser.add_argument("--artifact-every-n", type=int, default=None)
    parser.add_argument("--tick-wall-s", type=float, default=0.02)
    parser.add_argument("--drain-wall-s", type=float, default=10.0)
    parser.add_argument("--report", help="write a run report JSON here")
    args = parser.parse_args(argv)

    report = run_device(args)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
    print(json.dumps(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Bracelet actor: measure on schedule, transmit stop-and-wait, drain battery.

Time is injected (`now_ms` is logical unix milliseconds); nothing here reads
a clock, so behaviour is a pure function of (state, inputs, seed). The
sender keeps a single frame in flight: the strictly-monotone sequence rule
on the receiving side would otherwise turn an out-of-order retransmission
into data loss. Retransmits reuse the original frame bytes, so gateway
replay rejection doubles as exactly-once acceptance.
"""

from __future__ import annotations

import enum
import hashlib
from collections import deque
from dataclasses import dataclass, field

from pulseguard.errors import DeviceDead, DomainError
from pulseguard.protocol.frames import ReadingBatch, encode_frame
from pulseguard.protocol.session import Session
from pulseguard.vitals.params import PatientProfile, SensorTransfer
from pulseguard.vitals.waveform import (
    ArtifactKind,
    PulseWaveform,
    inject_artifact,
    synth_waveform,
)

RETRANSMIT_AFTER_MS = 30_000
OUTBOX_LIMIT = 256

MEASURE_DRAIN_PCT = 0.05
TRANSMIT_DRAIN_PCT = 0.01
IDLE_DRAIN_PCT_PER_MIN = 0.001


class BatteryAction(enum.Enum):
    MEASURE = "measure"
    TRANSMIT = "transmit"
    IDLE_MINUTE = "idle_minute"


_DRAIN = {
    BatteryAction.MEASURE: MEASURE_DRAIN_PCT,
    BatteryAction.TRANSMIT: TRANSMIT_DRAIN_PCT,
    BatteryAction.IDLE_MINUTE: IDLE_DRAIN_PCT_PER_MIN,
}


@dataclass
class DeviceConfig:
    profile: PatientProfile
    measurement_interval_min: int = 15
    resting_window: tuple[str, str] = ("22:00", "06:00")
    time_scale: float = 1.0
    seed: int = 0
    noise_sigma_counts: float = 200.0
    transfer: SensorTransfer = field(default_factory=SensorTransfer)
    sample_rate_hz: int = 125
    window_s: float = 10.0
    device_id: bytes | None = None
    artifact_every_n: int | None = None  # every Nth measurement is corrupted

    def __post_init__(self):
        if not (1 <= self.measurement_interval_min <= 240):
            raise DomainError(
                f"measurement interval {self.measurement_interval_min} outside [1, 240]"
            )
        for t in self.resting_window:
            _parse_clock(t)
        if self.time_scale < 1.0:
            raise DomainError("time_scale must be >= 1")
        if self.device_id is None:
            self.device_id = self.profile.default_device_id()


@dataclass
class OutboxEntry:
    sequence: int
    frame: bytes
    reading_timestamp_ms: int
    last_sent_ms: int | None = None
    send_count: int = 0


@dataclass
class DeviceState:
    config: DeviceConfig
    session: Session
    next_measurement_at_ms: int
    battery_pct: float = 100.0
    outbox: deque[OutboxEntry] = field(default_factory=deque)
    reading_index: int = 0
    emitted_count: int = 0
    artifact_count: int = 0
    _last_idle_tick_ms: int | None = None


def _parse_clock(text: str) -> int:
    h, m = text.split(":")
    h, m = int(h), int(m)
    if not (0 <= h < 24 and 0 <= m < 60):
        raise DomainError(f"bad clock time {text!r}")
    return h * 60 + m


def in_resting_window(now_ms: int, window: tuple[str, str]) -> bool:
    """Clock-time membership; the window may wrap midnight."""
    start, end = _parse_clock(window[0]), _parse_clock(window[1])
    minute_of_day = (now_ms // 60_000) % 1440
    if start <= end:
        return start <= minute_of_day < end
    return minute_of_day >= start or minute_of_day < end


def schedule_next(config: DeviceConfig, now_ms: int) -> int:
    """Next measurement in logical time; interval changes are not retroactive."""
    return now_ms + config.measurement_interval_min * 60_000


def battery_drain(state: DeviceState, action: BatteryAction) -> None:
    state.battery_pct = max(0.0, state.battery_pct - _DRAIN[action])


def _reading_seed(config: DeviceConfig, index: int) -> int:
    basis = f"{config.seed}:{config.device_id.hex()}:{index}".encode()
    return int.from_bytes(hashlib.sha256(basis).digest()[:8], "little") & 0x7FFF_FFFF


def _measure(state: DeviceState, now_ms: int) -> PulseWaveform | None:
    config = state.config
    trajectory = config.profile.trajectory
    if len(trajectory.knots) > 1 and not (
        trajectory.start_ms <= now_ms <= trajectory.end_ms
    ):
        return None  # past the scripted trajectory; stop measuring
    seed = _reading_seed(config, state.reading_index)
    waveform = synth_waveform(
        config.profile,
        now_ms,
        duration_s=config.window_s,
        noise_sigma_counts=config.noise_sigma_counts,
        seed=seed,
        transfer=config.transfer,
        sample_rate_hz=config.sample_rate_hz,
        device_id=config.device_id,
    )
    if config.artifact_every_n and (state.reading_index + 1) % config.artifact_every_n == 0:
        kinds = list(ArtifactKind)
        kind = kinds[state.artifact_count % len(kinds)]
        waveform = inject_artifact(waveform, kind, seed=seed ^ 0x5A5A)
        state.artifact_count += 1
    return waveform


def step(state: DeviceState, now_ms: int) -> list[bytes]:
    """Advance the actor to ``now_ms``; returns frames to put on the wire.

    Measures when due, encodes the batch into the outbox, transmits the
    head-of-line frame (first send or 30 s retransmit) and applies idle
    drain. Raises DeviceDead at 0% battery.
    """
    if state.battery_pct <= 0.0:
        raise DeviceDead("battery exhausted")

    if state._last_idle_tick_ms is None:
        state._last_idle_tick_ms = now_ms
    idle_minutes = (now_ms - state._last_idle_tick_ms) // 60_000
    for _ in range(int(idle_minutes)):
        battery_drain(state, BatteryAction.IDLE_MINUTE)
    state._last_idle_tick_ms += int(idle_minutes) * 60_000
    if state.battery_pct <= 0.0:
        raise DeviceDead("battery exhausted")

    if now_ms >= state.next_measurement_at_ms:
        # measure at the scheduled grid time, not the (jittery) step time,
        # so reading timestamps replay identically
        due_ms = state.next_measurement_at_ms
        waveform = _measure(state, due_ms)
        state.next_measurement_at_ms = schedule_next(state.config, due_ms)
        if waveform is not None:
            state.reading_index += 1
            battery_drain(state, BatteryAction.MEASURE)
            batch = ReadingBatch(
                start_time_ms=waveform.start_time_ms,
                sample_rate_hz=waveform.sample_rate_hz,
                samples=waveform.samples,
                battery_pct=int(round(state.battery_pct)),
                resting=in_resting_window(due_ms, state.config.resting_window),
            )
            frame = encode_frame(batch, state.session)
            if len(state.outbox) >= OUTBOX_LIMIT:
                state.outbox.popleft()  # drop oldest; newest data wins
            state.outbox.append(
                OutboxEntry(
                    sequence=state.session.send_sequence,
                    frame=frame,
                    reading_timestamp_ms=waveform.start_time_ms,
                )
            )
            state.emitted_count += 1

    to_send: list[bytes] = []
    if state.outbox:
        head = state.outbox[0]
        due = head.last_sent_ms is None or now_ms - head.last_sent_ms >= RETRANSMIT_AFTER_MS
        if due and state.battery_pct > 0.0:
            head.last_sent_ms = now_ms
            head.send_count += 1
            battery_drain(state, BatteryAction.TRANSMIT)
            to_send.append(head.frame)
    return to_send


def on_ack(state: DeviceState, acked_sequence: int) -> bool:
    """Drop the head-of-line frame when its sequence is acknowledged."""
    if state.outbox and state.outbox[0].sequence == acked_sequence:
        state.outbox.popleft()
        if state.outbox:
            state.outbox[0].last_sent_ms = None  # send next immediately
        return True
    return False

"""Frame ingest: decode, run the signal pipeline, persist, acknowledge.

Ack policy: a frame that decodes gets an Ack even when its waveform is
discarded by validation (the device must not retransmit garbage); crypto
failures and replays get no Ack at all.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

from pulseguard.alerts.rules import AlertRule, EvidencePair, evaluate
from pulseguard.errors import (
    AuthFailure,
    DomainError,
    ProtocolError,
    RejectedWaveform,
    ReplayRejected,
    Truncated,
)
from pulseguard.gateway.store import LocalStore
from pulseguard.pipeline.config import DEFAULT_CONFIG, PipelineConfig
from pulseguard.pipeline.reading import BpReading, estimate_reading
from pulseguard.protocol.frames import Ack, ReadingBatch, decode_frame, encode_frame, peek_device_id
from pulseguard.protocol.session import Session
from pulseguard.vitals.params import HR_MAX_BPM, HR_MIN_BPM, SBP_MAX_MMHG, DBP_MIN_MMHG
from pulseguard.vitals.waveform import PulseWaveform

logger = logging.getLogger(__name__)


class IngestOutcome(enum.Enum):
    STORED = "stored"
    DISCARDED = "discarded"       # decoded fine, waveform rejected
    UNKNOWN_DEVICE = "unknown_device"
    AUTH_FAILURE = "auth_failure"
    REPLAY = "replay"
    MALFORMED = "malformed"
    IGNORED = "ignored"           # authenticated non-data message


@dataclass
class IngestResult:
    outcome: IngestOutcome
    ack: bytes | None = None
    reading: BpReading | None = None


@dataclass
class GatewayIngest:
    patient_id: str
    store: LocalStore
    sessions: dict[bytes, Session] = field(default_factory=dict)
    pipeline_config: PipelineConfig = DEFAULT_CONFIG
    alert_rule: AlertRule = field(default_factory=AlertRule)
    counters: dict = field(
        default_factory=lambda: {
            "stored": 0,
            "discarded": 0,
            "replays_rejected": 0,
            "auth_failures": 0,
            "unknown_device": 0,
            "malformed": 0,
            "local_notifications": 0,
        }
    )
    _notified_pairs: set = field(default_factory=set)

    def ingest_frame(self, data: bytes) -> IngestResult:
        try:
            device_id = peek_device_id(data)
        except Truncated:
            self.counters["malformed"] += 1
            return IngestResult(IngestOutcome.MALFORMED)
        session = self.sessions.get(device_id)
        if session is None:
            self.counters["unknown_device"] += 1
            return IngestResult(IngestOutcome.UNKNOWN_DEVICE)
        try:
            msg = decode_frame(data, session)
        except ReplayRejected:
            self.counters["replays_rejected"] += 1
            return IngestResult(IngestOutcome.REPLAY)
        except (AuthFailure, Truncated) as exc:
            self.counters["auth_failures"] += 1
            logger.warning("frame from %s failed: %s", device_id.hex(), exc)
            return IngestResult(IngestOutcome.AUTH_FAILURE)
        except ProtocolError:
            self.counters["malformed"] += 1
            return IngestResult(IngestOutcome.MALFORMED)

        if not isinstance(msg, ReadingBatch):
            return IngestResult(IngestOutcome.IGNORED)

        ack = encode_frame(Ack(acked_sequence=session.recv_sequence), session)
        try:
            waveform = PulseWaveform(
                device_id=device_id,
                start_time_ms=msg.start_time_ms,
                sample_rate_hz=msg.sample_rate_hz,
                samples=msg.samples,
            )
            reading = estimate_reading(
                waveform,
                session.transfer,
                resting_flag=msg.resting,
                patient_id=self.patient_id,
                config=self.pipeline_config,
            )
            _check_physical_bounds(reading)
        except (RejectedWaveform, DomainError) as exc:
            self.counters["discarded"] += 1
            logger.info("discarded waveform from %s: %s", device_id.hex(), exc)
            return IngestResult(IngestOutcome.DISCARDED, ack=ack)

        self.store.append_pending(reading)
        self.counters["stored"] += 1
        self._local_alert_check()
        return IngestResult(IngestOutcome.STORED, ack=ack, reading=reading)

    def _local_alert_check(self) -> None:
        """Advisory notification using the same predicate as the server."""
        history = sorted(
            (BpReading.from_dict(d) for d in self.store.all_readings()),
            key=lambda r: r.timestamp_ms,
        )
        pair = self.local_alert_check(history)
        if pair is not None:
            key = (pair.first.idempotency_key, pair.second.idempotency_key)
            if key not in self._notified_pairs:
                self._notified_pairs.add(key)
                self.counters["local_notifications"] += 1
                logger.warning(
                    "local hypertension notification for %s: evidence %s / %s",
                    self.patient_id, key[0], key[1],
                )

    def local_alert_check(self, history: list[BpReading]) -> EvidencePair | None:
        """At most one notification per evidence pair; server stays authoritative."""
        open_pairs = [
            EvidencePair(
                first=_reading_from_key(history, k1), second=_reading_from_key(history, k2)
            )
            for (k1, k2) in self._notified_pairs
            if _reading_from_key(history, k1) and _reading_from_key(history, k2)
        ]
        return evaluate(history, self.alert_rule, open_evidence=open_pairs)


def _reading_from_key(history: list[BpReading], key: str) -> BpReading | None:
    for r in history:
        if r.idempotency_key == key:
            return r
    return None


def _check_physical_bounds(reading: BpReading) -> None:
    if not (DBP_MIN_MMHG <= reading.dbp_mmhg < reading.sbp_mmhg <= SBP_MAX_MMHG):
        raise DomainError("estimated pressures outside physical bounds")
    if not (HR_MIN_BPM <= reading.hr_bpm <= HR_MAX_BPM):
        raise DomainError("estimated heart rate outside physical bounds")

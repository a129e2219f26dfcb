"""Alert rule: two elevated readings at least six hours apart.

A reading is elevated when SBP exceeds 140 mmHg or DBP exceeds 90 mmHg,
strictly ("over"); the boundary values themselves are not elevated.
Intermediate normal readings between the two elevated measurements do not
reset the pair. The same predicate drives both the server alert engine and
the gateway's advisory notifications.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass

from pulseguard.errors import UnclassifiableCondition
from pulseguard.pipeline.reading import BpReading

MS_PER_HOUR = 3_600_000
MS_PER_DAY = 24 * MS_PER_HOUR


@dataclass(frozen=True)
class AlertRule:
    sbp_threshold_mmhg: float = 140.0
    dbp_threshold_mmhg: float = 90.0
    min_gap_hours: float = 6.0
    evidence_window_days: float = 7.0

    def __post_init__(self):
        assert self.sbp_threshold_mmhg > 0 and self.dbp_threshold_mmhg > 0
        assert self.min_gap_hours > 0

    @property
    def min_gap_ms(self) -> int:
        return int(self.min_gap_hours * MS_PER_HOUR)

    @property
    def evidence_window_ms(self) -> int:
        return int(self.evidence_window_days * MS_PER_DAY)


class Condition(enum.Enum):
    CHRONIC = "ChronicHypertension"
    GESTATIONAL = "GestationalHypertension"
    PREECLAMPSIA_SUSPECTED = "PreeclampsiaSuspected"


@dataclass(frozen=True)
class EvidencePair:
    """The two readings that establish persistent hypertension."""

    first: BpReading
    second: BpReading

    def __post_init__(self):
        assert self.first.timestamp_ms <= self.second.timestamp_ms


@dataclass
class Alert:
    alert_id: str
    patient_id: str
    raised_at_ms: int
    evidence: EvidencePair
    condition: Condition
    acknowledged_by: str | None = None

    @staticmethod
    def make_id(patient_id: str, evidence: EvidencePair) -> str:
        basis = (
            f"{patient_id}|{evidence.first.idempotency_key}|{evidence.second.idempotency_key}"
        )
        return hashlib.sha256(basis.encode()).hexdigest()[:16]


def is_elevated(reading: BpReading, rule: AlertRule = AlertRule()) -> bool:
    return (
        reading.sbp_mmhg > rule.sbp_threshold_mmhg
        or reading.dbp_mmhg > rule.dbp_threshold_mmhg
    )


def evaluate(
    history: list[BpReading],
    rule: AlertRule = AlertRule(),
    now_ms: int | None = None,
    open_evidence: list[EvidencePair] = (),
) -> EvidencePair | None:
    """Earliest qualifying evidence pair within the window, if any.

    ``history`` must be sorted by timestamp. ``open_evidence`` holds the
    evidence of unacknowledged alerts: while any of it still overlaps the
    evidence window, no new alert is proposed (deduplication).
    """
    if now_ms is None:
        now_ms = history[-1].timestamp_ms if history else 0
    window_start = now_ms - rule.evidence_window_ms

    for pair in open_evidence:
        if pair.second.timestamp_ms >= window_start:
            return None

    elevated = [
        r for r in history if r.timestamp_ms >= window_start and is_elevated(r, rule)
    ]
    for i, first in enumerate(elevated):
        for second in elevated[i + 1 :]:
            if second.timestamp_ms - first.timestamp_ms >= rule.min_gap_ms:
                return EvidencePair(first=first, second=second)
    return None


def classify_condition(
    first_elevated_week: float | None, proteinuria: bool
) -> Condition:
    """Condition taxonomy keyed on the week hypertension first showed."""
    if first_elevated_week is None:
        raise UnclassifiableCondition("gestational age unknown")
    if first_elevated_week < 20.0:
        return Condition.CHRONIC
    if proteinuria:
        return Condition.PREECLAMPSIA_SUSPECTED
    return Condition.GESTATIONAL

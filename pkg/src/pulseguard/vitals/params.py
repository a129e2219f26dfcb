"""Vital-sign parameter types and patient ground-truth trajectories."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from pulseguard.errors import DomainError

# Physiological bounds enforced on every VitalParams instance.
SBP_MAX_MMHG = 260.0
DBP_MIN_MMHG = 40.0
HR_MIN_BPM = 30.0
HR_MAX_BPM = 220.0

RACES = ("white", "black", "asian", "hispanic", "other")


@dataclass(frozen=True)
class VitalParams:
    """Instantaneous blood pressure and heart rate."""

    sbp_mmhg: float
    dbp_mmhg: float
    hr_bpm: float

    def __post_init__(self):
        if not (DBP_MIN_MMHG <= self.dbp_mmhg < self.sbp_mmhg <= SBP_MAX_MMHG):
            raise DomainError(
                f"require {DBP_MIN_MMHG} <= dbp < sbp <= {SBP_MAX_MMHG}, "
                f"got sbp={self.sbp_mmhg} dbp={self.dbp_mmhg}"
            )
        if not (HR_MIN_BPM <= self.hr_bpm <= HR_MAX_BPM):
            raise DomainError(f"hr_bpm {self.hr_bpm} outside [{HR_MIN_BPM}, {HR_MAX_BPM}]")

    @property
    def pulse_pressure(self) -> float:
        return self.sbp_mmhg - self.dbp_mmhg


@dataclass(frozen=True)
class SensorTransfer:
    """Affine map between arterial pressure (mmHg) and raw sensor counts.

    Stands in for the proprietary impedance-to-pressure transfer; carried in
    pairing metadata so downstream processing needs no user calibration.
    """

    offset_counts: float = 0.0
    counts_per_mmhg: float = 100.0

    def __post_init__(self):
        if self.counts_per_mmhg <= 0:
            raise DomainError(f"counts_per_mmhg must be > 0, got {self.counts_per_mmhg}")

    def to_counts(self, mmhg):
        return self.offset_counts + mmhg * self.counts_per_mmhg

    def to_mmhg(self, counts):
        return (counts - self.offset_counts) / self.counts_per_mmhg


class Trajectory:
    """Piecewise-linear timeline of VitalParams, keyed by unix milliseconds.

    A single-knot trajectory is constant for all time; otherwise evaluation
    outside [first_ms, last_ms] is a domain error. Interpolated values are
    re-validated, so every point on the timeline satisfies the VitalParams
    invariants.
    """

    def __init__(self, knots: list[tuple[int, VitalParams]]):
        if not knots:
            raise DomainError("trajectory needs at least one knot")
        times = [t for t, _ in knots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("trajectory knot times must be strictly increasing")
        self.knots = list(knots)

    @property
    def start_ms(self) -> int:
        return self.knots[0][0]

    @property
    def end_ms(self) -> int:
        return self.knots[-1][0]

    def at(self, t_ms: int) -> VitalParams:
        if len(self.knots) == 1:
            return self.knots[0][1]
        if not (self.start_ms <= t_ms <= self.end_ms):
            raise DomainError(
                f"time {t_ms} outside trajectory [{self.start_ms}, {self.end_ms}]"
            )
        for (t0, p0), (t1, p1) in zip(self.knots, self.knots[1:]):
            if t_ms <= t1:
                w = (t_ms - t0) / (t1 - t0)
                return VitalParams(
                    sbp_mmhg=p0.sbp_mmhg + w * (p1.sbp_mmhg - p0.sbp_mmhg),
                    dbp_mmhg=p0.dbp_mmhg + w * (p1.dbp_mmhg - p0.dbp_mmhg),
                    hr_bpm=p0.hr_bpm + w * (p1.hr_bpm - p0.hr_bpm),
                )
        raise AssertionError("unreachable")


@dataclass
class PatientProfile:
    """Simulated ground-truth trajectory plus clinical covariates."""

    patient_id: str
    age_years: float
    weight_kg: float
    height_cm: float
    race: str
    smoker: bool
    cholesterol_mg_dl: float
    gestational_age_weeks: float
    proteinuria: bool
    trajectory: Trajectory
    enrolled_at_ms: int | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.race not in RACES:
            raise DomainError(f"unknown race {self.race!r}, expected one of {RACES}")
        if not (0.0 <= self.gestational_age_weeks <= 45.0):
            raise DomainError(
                f"gestational_age_weeks {self.gestational_age_weeks} outside [0, 45]"
            )
        if self.enrolled_at_ms is None:
            self.enrolled_at_ms = self.trajectory.start_ms

    def default_device_id(self) -> bytes:
        """Stable 8-byte device identifier derived from the patient id."""
        return hashlib.sha256(self.patient_id.encode("utf-8")).digest()[:8]

    def gestational_week_at(self, t_ms: int) -> float:
        """Gestational age (weeks) at an absolute time, anchored at enrollment."""
        return self.gestational_age_weeks + (t_ms - self.enrolled_at_ms) / (7 * 86400 * 1000)

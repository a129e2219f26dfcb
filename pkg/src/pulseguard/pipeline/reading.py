"""Systolic/diastolic/heart-rate estimation from a validated waveform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pulseguard.errors import DomainError, RejectedWaveform
from pulseguard.pipeline.beats import detect_beats, moving_average
from pulseguard.pipeline.config import DEFAULT_CONFIG, PipelineConfig
from pulseguard.pipeline.validate import validate
from pulseguard.vitals.params import SensorTransfer
from pulseguard.vitals.waveform import PulseWaveform


@dataclass
class BpReading:
    """Derived blood-pressure reading; the platform's unit of storage."""

    patient_id: str
    device_id: bytes
    timestamp_ms: int
    sbp_mmhg: float
    dbp_mmhg: float
    hr_bpm: float
    resting: bool
    quality: float

    def __post_init__(self):
        if not self.dbp_mmhg < self.sbp_mmhg:
            raise DomainError(f"dbp {self.dbp_mmhg} must be below sbp {self.sbp_mmhg}")
        if self.timestamp_ms <= 0:
            raise DomainError("timestamp must be positive")
        if not (0.0 <= self.quality <= 1.0):
            raise DomainError(f"quality {self.quality} outside [0, 1]")

    @property
    def idempotency_key(self) -> str:
        return f"{self.device_id.hex()}:{self.timestamp_ms}"

    def to_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "device_id": self.device_id.hex(),
            "timestamp_ms": self.timestamp_ms,
            "sbp_mmhg": round(self.sbp_mmhg, 3),
            "dbp_mmhg": round(self.dbp_mmhg, 3),
            "hr_bpm": round(self.hr_bpm, 3),
            "resting": self.resting,
            "quality": round(self.quality, 4),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BpReading":
        return cls(
            patient_id=doc["patient_id"],
            device_id=bytes.fromhex(doc["device_id"]),
            timestamp_ms=int(doc["timestamp_ms"]),
            sbp_mmhg=float(doc["sbp_mmhg"]),
            dbp_mmhg=float(doc["dbp_mmhg"]),
            hr_bpm=float(doc["hr_bpm"]),
            resting=bool(doc["resting"]),
            quality=float(doc["quality"]),
        )


def raw_to_mmhg(counts: float, transfer: SensorTransfer) -> float:
    """Inverse sensor transfer: counts to mmHg."""
    return transfer.to_mmhg(counts)


def _anchor(light: np.ndarray, center: int, radius: int, sign: int) -> int:
    """Re-locate an extremum on the lightly smoothed signal near ``center``."""
    lo, hi = max(0, center - radius), min(len(light), center + radius + 1)
    seg = light[lo:hi]
    return lo + int(np.argmax(seg) if sign > 0 else np.argmin(seg))


def _fit_peak(x: np.ndarray, center: int, half: int) -> float:
    """Quadratic fit on raw samples; clamped-vertex value estimates the peak."""
    lo, hi = max(0, center - half), min(len(x), center + half + 1)
    y = x[lo:hi]
    t = np.arange(lo, hi, dtype=np.float64) - center
    if len(y) < 5:
        return float(x[center])
    c2, c1, c0 = np.polyfit(t, y, 2)
    if c2 >= -1e-12:
        return float(c0)
    t_star = float(np.clip(-c1 / (2 * c2), t[0], t[-1]))
    return float(c0 + c1 * t_star + c2 * t_star * t_star)


def _mean_trough(x: np.ndarray, center: int, half: int) -> float:
    lo, hi = max(0, center - half), min(len(x), center + half + 1)
    return float(np.mean(x[lo:hi]))


def estimate_reading(
    waveform: PulseWaveform,
    transfer: SensorTransfer,
    resting_flag: bool = False,
    patient_id: str = "",
    config: PipelineConfig = DEFAULT_CONFIG,
) -> BpReading:
    """Estimate SBP/DBP/HR from a waveform.

    SBP/DBP are the inverse-transferred medians of per-beat maxima/minima
    (medians for outlier robustness); heart rate comes from the median
    inter-maxima interval. Raises RejectedWaveform when validation fails.
    """
    verdict = validate(waveform, config)
    if not verdict.accepted:
        raise RejectedWaveform(verdict.reject_code)

    x = waveform.samples.astype(np.float64)
    rate = waveform.sample_rate_hz
    beats = detect_beats(x, rate, config)
    peaks = beats.complete_peaks()
    troughs = beats.complete_troughs()
    if len(peaks) < 2 or not troughs:  # pragma: no cover - validate() gates this
        from pulseguard.pipeline.validate import RejectCode

        raise RejectedWaveform(RejectCode.TOO_FEW_BEATS)

    period = float(np.median(np.diff(np.asarray(peaks, dtype=np.float64))))
    radius = max(2, int(round(config.anchor_search_rel * period)))
    peak_half = max(2, int(round(config.peak_fit_halfwidth_rel * period)))
    trough_half = max(2, int(round(config.trough_mean_halfwidth_rel * period)))

    light = moving_average(x, int(round(config.light_window_s * rate)))
    peak_vals = np.array(
        [_fit_peak(x, _anchor(light, i, radius, +1), peak_half) for i in peaks]
    )
    trough_vals = np.array(
        [_mean_trough(x, _anchor(light, i, radius, -1), trough_half) for i in troughs]
    )

    sbp_counts = float(np.median(peak_vals))
    dbp_counts = float(np.median(trough_vals))
    hr_bpm = 60.0 * rate / period

    spread = sbp_counts - dbp_counts
    if spread <= 0:
        quality = 0.0
    else:
        quality = float(np.clip(1.0 - np.std(peak_vals) / spread, 0.0, 1.0))

    return BpReading(
        patient_id=patient_id,
        device_id=waveform.device_id,
        timestamp_ms=waveform.start_time_ms,
        sbp_mmhg=raw_to_mmhg(sbp_counts, transfer),
        dbp_mmhg=raw_to_mmhg(dbp_counts, transfer),
        hr_bpm=hr_bpm,
        resting=resting_flag,
        quality=quality,
    )

"""Corrupt-sequence rejection rules."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from pulseguard.errors import NoExtremaError
from pulseguard.pipeline.beats import detect_beats, rhythm_cv
from pulseguard.pipeline.config import DEFAULT_CONFIG, PipelineConfig
from pulseguard.vitals.waveform import U16_MAX, PulseWaveform


class RejectCode(enum.Enum):
    FLATLINE = "Flatline"
    CLIPPED = "Clipped"
    TOO_FEW_BEATS = "TooFewBeats"
    ERRATIC_RHYTHM = "ErraticRhythm"


@dataclass(frozen=True)
class ValidationVerdict:
    accepted: bool
    reject_code: RejectCode | None = None

    def __post_init__(self):
        assert self.accepted == (self.reject_code is None)


def _has_flat_window(x: np.ndarray, rate: int, config: PipelineConfig) -> bool:
    w = max(2, int(round(config.flatline_window_s * rate)))
    stride = max(1, int(round(config.flatline_stride_s * rate)))
    if w >= len(x):
        return bool(np.var(x) < config.flatline_var_threshold)
    starts = list(range(0, len(x) - w + 1, stride))
    if starts[-1] != len(x) - w:
        starts.append(len(x) - w)
    for s in starts:
        if np.var(x[s : s + w]) < config.flatline_var_threshold:
            return True
    return False


def validate(waveform: PulseWaveform, config: PipelineConfig = DEFAULT_CONFIG) -> ValidationVerdict:
    """Accept or reject a waveform; rejection is a verdict, not an error.

    Rules, in order: flat segment (sensor lifted off), samples pinned at a
    rail, too few beats, erratic beat-to-beat rhythm.
    """
    x = waveform.samples.astype(np.float64)

    if _has_flat_window(x, waveform.sample_rate_hz, config):
        return ValidationVerdict(False, RejectCode.FLATLINE)

    rail_fraction = float(np.mean((waveform.samples == 0) | (waveform.samples == U16_MAX)))
    if rail_fraction > config.rail_fraction_max:
        return ValidationVerdict(False, RejectCode.CLIPPED)

    try:
        beats = detect_beats(x, waveform.sample_rate_hz, config)
    except NoExtremaError:
        return ValidationVerdict(False, RejectCode.FLATLINE)
    complete = beats.complete_peaks()
    if len(complete) < config.min_beats:
        return ValidationVerdict(False, RejectCode.TOO_FEW_BEATS)

    if rhythm_cv(complete) > config.rhythm_cv_max:
        return ValidationVerdict(False, RejectCode.ERRATIC_RHYTHM)

    return ValidationVerdict(True, None)

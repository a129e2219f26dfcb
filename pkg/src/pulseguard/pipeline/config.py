"""Centralised signal-pipeline thresholds.

All rejection rules and estimator window sizes live here so the gateway can
load overrides from its config file.
"""

from __future__ import annotations

from dataclasses import dataclass

from pulseguard.vitals.waveform import U16_MAX


@dataclass(frozen=True)
class PipelineConfig:
    # validation rules
    flatline_var_threshold: float = (0.001 * U16_MAX) ** 2  # counts^2, on 2 s windows
    flatline_window_s: float = 2.0
    flatline_stride_s: float = 0.5
    rail_fraction_max: float = 0.05
    min_beats: int = 3
    rhythm_cv_max: float = 0.4

    # beat detection
    smooth_window_s: float = 0.16
    restart_stride_divisor: int = 10      # restart stride = sample_rate // divisor
    prominence_rel: float = 0.30          # of smoothed P95-P5 range

    # per-beat refinement on the raw signal: a lightly smoothed copy
    # re-anchors each extremum, then a quadratic fit reads the amplitude
    light_window_s: float = 0.04
    anchor_search_rel: float = 0.10       # of the beat period
    peak_fit_halfwidth_rel: float = 0.09  # of the beat period
    trough_mean_halfwidth_rel: float = 0.06

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown pipeline config keys: {sorted(unknown)}")
        return cls(**doc)


DEFAULT_CONFIG = PipelineConfig()

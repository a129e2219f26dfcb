"""Raw waveform to validated blood-pressure reading."""

from pulseguard.pipeline.config import PipelineConfig
from pulseguard.pipeline.extrema import Extrema, hill_climb_extrema, hill_climb_samples
from pulseguard.pipeline.reading import BpReading, estimate_reading, raw_to_mmhg
from pulseguard.pipeline.validate import RejectCode, ValidationVerdict, validate

__all__ = [
    "PipelineConfig",
    "Extrema",
    "hill_climb_extrema",
    "hill_climb_samples",
    "BpReading",
    "estimate_reading",
    "raw_to_mmhg",
    "RejectCode",
    "ValidationVerdict",
    "validate",
]

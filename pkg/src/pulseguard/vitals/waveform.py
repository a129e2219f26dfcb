"""Synthetic radial-artery pulse waveforms and corruption artifacts."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from pulseguard.errors import DomainError
from pulseguard.vitals.params import PatientProfile, SensorTransfer, VitalParams

U16_MAX = 65535
DEFAULT_SAMPLE_RATE_HZ = 125
DEFAULT_WINDOW_S = 10.0
MIN_WINDOW_S = 5.0

# Beat morphology: systolic peak plus a dicrotic bump at 40% amplitude,
# each an asymmetric Gaussian in beat phase (period normalised to 1).
# The template is periodic (wrapped phase distance) and rescaled so its
# range is exactly [0, 1]; dbp/sbp then map to template 0/1.
_SYS_CENTER, _SYS_SL, _SYS_SR = 0.22, 0.055, 0.10
_DIC_CENTER, _DIC_SL, _DIC_SR, _DIC_AMP = 0.50, 0.08, 0.12, 0.40


def _asym_gauss(phase: np.ndarray, center: float, s_left: float, s_right: float) -> np.ndarray:
    d = (phase - center + 0.5) % 1.0 - 0.5  # wrapped signed distance
    sigma = np.where(d < 0, s_left, s_right)
    return np.exp(-0.5 * (d / sigma) ** 2)


def _raw_template(phase: np.ndarray) -> np.ndarray:
    return _asym_gauss(phase, _SYS_CENTER, _SYS_SL, _SYS_SR) + _DIC_AMP * _asym_gauss(
        phase, _DIC_CENTER, _DIC_SL, _DIC_SR
    )


def _refine_extremum(lo: float, hi: float, sign: float) -> float:
    """Ternary-search the template extremum inside [lo, hi]."""
    for _ in range(200):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if sign * _raw_template(np.array([m1]))[0] < sign * _raw_template(np.array([m2]))[0]:
            lo = m1
        else:
            hi = m2
    return (lo + hi) / 2


@lru_cache(maxsize=1)
def _template_range() -> tuple[float, float]:
    grid = np.linspace(0.0, 1.0, 8192, endpoint=False)
    vals = _raw_template(grid)
    i_max, i_min = int(np.argmax(vals)), int(np.argmin(vals))
    step = 1.0 / len(grid)
    p_max = _refine_extremum(grid[i_max] - step, grid[i_max] + step, 1.0)
    p_min = _refine_extremum(grid[i_min] - step, grid[i_min] + step, -1.0)
    v_max = float(_raw_template(np.array([p_max]))[0])
    v_min = float(_raw_template(np.array([p_min]))[0])
    return v_min, v_max


def beat_template(phase: np.ndarray) -> np.ndarray:
    """Normalised beat morphology: range exactly [0, 1] over a period."""
    v_min, v_max = _template_range()
    return (_raw_template(phase) - v_min) / (v_max - v_min)


def synth_beat(
    params: VitalParams,
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ,
    n_samples: int | None = None,
    phase: float = 0.0,
) -> np.ndarray:
    """Sample the periodic beat morphology, in mmHg.

    Per-period maximum is sbp and minimum is dbp, exact up to one sample of
    discretisation. Deterministic for fixed inputs.
    """
    if sample_rate_hz < 50:
        raise DomainError(f"sample_rate_hz {sample_rate_hz} below minimum 50")
    period_samples = sample_rate_hz * 60.0 / params.hr_bpm
    if n_samples is None:
        n_samples = int(round(period_samples))
    if n_samples < period_samples - 0.5:
        raise DomainError(
            f"n_samples {n_samples} shorter than one beat period ({period_samples:.1f} samples)"
        )
    t = np.arange(n_samples) / sample_rate_hz
    phases = (phase + t * params.hr_bpm / 60.0) % 1.0
    return params.dbp_mmhg + params.pulse_pressure * beat_template(phases)


def synth_waveform(
    profile: PatientProfile,
    at_time_ms: int,
    duration_s: float = DEFAULT_WINDOW_S,
    noise_sigma_counts: float = 0.0,
    seed: int = 0,
    transfer: SensorTransfer = SensorTransfer(),
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE_HZ,
    device_id: bytes | None = None,
) -> "PulseWaveform":
    """Render one measurement window as raw sensor counts.

    Evaluates the ground-truth trajectory at ``at_time_ms``, maps the mmHg
    beat samples through the sensor transfer and adds zero-mean Gaussian
    noise. Identical (inputs, seed) produce identical sample bytes.
    """
    if duration_s < MIN_WINDOW_S:
        raise DomainError(f"duration_s {duration_s} below minimum {MIN_WINDOW_S}")
    params = profile.trajectory.at(at_time_ms)
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate_hz))
    start_phase = rng.uniform(0.0, 1.0)
    mmhg = synth_beat(params, sample_rate_hz, n, start_phase)
    counts = transfer.to_counts(mmhg)
    if noise_sigma_counts > 0:
        counts = counts + rng.normal(0.0, noise_sigma_counts, n)
    samples = np.clip(np.rint(counts), 0, U16_MAX).astype(np.uint16)
    return PulseWaveform(
        device_id=device_id if device_id is not None else profile.default_device_id(),
        start_time_ms=at_time_ms,
        sample_rate_hz=sample_rate_hz,
        samples=samples,
    )


@dataclass
class PulseWaveform:
    """Timestamped raw sensor counts; the bracelet's unit of transmission."""

    device_id: bytes
    start_time_ms: int
    sample_rate_hz: int
    samples: np.ndarray  # uint16

    def __post_init__(self):
        if len(self.device_id) != 8:
            raise DomainError("device_id must be exactly 8 bytes")
        if self.sample_rate_hz < 50:
            raise DomainError(f"sample_rate_hz {self.sample_rate_hz} below minimum 50")
        self.samples = np.asarray(self.samples)
        if self.samples.dtype != np.uint16:
            if np.any((self.samples < 0) | (self.samples > U16_MAX)):
                raise DomainError("samples outside unsigned 16-bit range")
            self.samples = self.samples.astype(np.uint16)
        if len(self.samples) < self.sample_rate_hz * MIN_WINDOW_S:
            raise DomainError(
                f"waveform shorter than the {MIN_WINDOW_S:.0f} s minimum window"
            )

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


class ArtifactKind(enum.Enum):
    FLATLINE = "flatline"
    CLIPPING = "clipping"
    MOTION_BURST = "motion_burst"
    DROPOUT = "dropout"


# Corruption strengths; each comfortably exceeds the pipeline rejection rules.
_FLATLINE_FRACTION = 0.6     # constant segment, >= 50% of window
_CLIPPING_FRACTION = 0.12    # samples pinned to a rail, >= 10%
_BURST_FRACTION = 0.375      # noise x20 segment, >= 30% of window
_BURST_SIGMA_FLOOR = 0.01 * U16_MAX  # reference noise floor: motion transients are violent
_DROPOUT_FRACTION = 0.25     # samples forced to 0, >= 20%


def _noise_sigma_estimate(samples: np.ndarray) -> float:
    # Robust noise scale from first differences (MAD-based).
    d = np.diff(samples.astype(np.float64))
    return float(np.median(np.abs(d - np.median(d))) / 0.6745 / np.sqrt(2.0))


def inject_artifact(waveform: PulseWaveform, kind: ArtifactKind, seed: int = 0) -> PulseWaveform:
    """Return a corrupted copy of the waveform (incorrect-placement model)."""
    rng = np.random.default_rng(seed)
    x = waveform.samples.astype(np.float64).copy()
    n = len(x)
    if kind is ArtifactKind.FLATLINE:
        seg = int(np.ceil(_FLATLINE_FRACTION * n))
        start = int(rng.integers(0, n - seg + 1))
        x[start : start + seg] = x[start]
    elif kind is ArtifactKind.CLIPPING:
        k = int(np.ceil(_CLIPPING_FRACTION * n))
        idx = rng.choice(n, size=k, replace=False)
        rails = rng.integers(0, 2, size=k)
        x[idx] = np.where(rails == 0, 0.0, float(U16_MAX))
    elif kind is ArtifactKind.MOTION_BURST:
        seg = int(np.ceil(_BURST_FRACTION * n))
        start = int(rng.integers(0, n - seg + 1))
        sigma = 20.0 * max(_noise_sigma_estimate(waveform.samples), _BURST_SIGMA_FLOOR)
        x[start : start + seg] += rng.normal(0.0, sigma, seg)
    elif kind is ArtifactKind.DROPOUT:
        k = int(np.ceil(_DROPOUT_FRACTION * n))
        idx = rng.choice(n, size=k, replace=False)
        x[idx] = 0.0
    else:
        raise DomainError(f"unknown artifact kind {kind!r}")
    samples = np.clip(np.rint(x), 0, U16_MAX).astype(np.uint16)
    return PulseWaveform(
        device_id=waveform.device_id,
        start_time_ms=waveform.start_time_ms,
        sample_rate_hz=waveform.sample_rate_hz,
        samples=samples,
    )

"""Hill-climbing local extrema detection.

From every restart index the climb moves to the strictly better neighbour
until no neighbour improves; plateaus are traversed as a unit, tie-breaking
rightward, and the leftmost plateau index is reported. With restart stride 1
the result equals an exhaustive local-extrema scan on any signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pulseguard.errors import DomainError, NoExtremaError
from pulseguard.vitals.waveform import PulseWaveform


@dataclass
class Extrema:
    maxima: list[tuple[int, float]]
    minima: list[tuple[int, float]]


def _plateau_extent(x: np.ndarray, i: int) -> tuple[int, int]:
    v = x[i]
    lo, hi = i, i
    while lo > 0 and x[lo - 1] == v:
        lo -= 1
    while hi < len(x) - 1 and x[hi + 1] == v:
        hi += 1
    return lo, hi


def _climb(x: np.ndarray, start: int, sign: float) -> int:
    """Climb (sign=+1) or descend (sign=-1) to a local extremum plateau.

    Returns the leftmost index of the plateau reached.
    """
    i = start
    while True:
        lo, hi = _plateau_extent(x, i)
        v = x[i]
        left = x[lo - 1] if lo > 0 else None
        right = x[hi + 1] if hi < len(x) - 1 else None
        left_better = left is not None and sign * (left - v) > 0
        right_better = right is not None and sign * (right - v) > 0
        if right_better and (not left_better or sign * (right - left) >= 0):
            i = hi + 1
        elif left_better:
            i = lo - 1
        else:
            return lo


def hill_climb_samples(x: np.ndarray, restart_stride: int = 1) -> Extrema:
    """Hill-climb extrema of a 1-D sample array."""
    n = len(x)
    if n < 2:
        raise DomainError("need at least two samples")
    if restart_stride < 1:
        raise DomainError(f"restart_stride must be >= 1, got {restart_stride}")
    if np.all(x == x[0]):
        raise NoExtremaError("constant signal has no extrema")
    max_idx: set[int] = set()
    min_idx: set[int] = set()
    for start in range(0, n, restart_stride):
        max_idx.add(_climb(x, start, +1.0))
        min_idx.add(_climb(x, start, -1.0))
    maxima = [(i, float(x[i])) for i in sorted(max_idx)]
    minima = [(i, float(x[i])) for i in sorted(min_idx)]
    return Extrema(maxima=maxima, minima=minima)


def hill_climb_extrema(waveform: PulseWaveform, restart_stride: int = 1) -> Extrema:
    """Hill-climb extrema of a waveform's raw counts."""
    if not (1 <= restart_stride <= waveform.sample_rate_hz // 4):
        raise DomainError(
            f"restart_stride must be in [1, {waveform.sample_rate_hz // 4}]"
        )
    return hill_climb_samples(waveform.samples.astype(np.float64), restart_stride)

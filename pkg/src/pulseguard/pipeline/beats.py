"""Shared beat detection: smoothing, hill-climb extrema, prominence pruning.

Detection runs on a smoothed copy of the signal; amplitude refinement (in
reading.py) goes back to the raw samples. Pruning removes low-prominence
extrema pairs (dicrotic bumps, noise wiggles) so the surviving maxima are
one per cardiac beat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pulseguard.errors import NoExtremaError
from pulseguard.pipeline.config import DEFAULT_CONFIG, PipelineConfig
from pulseguard.pipeline.extrema import hill_climb_samples


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Centred moving average with edge padding."""
    w = max(3, int(window) | 1)  # odd, at least 3
    half = w // 2
    xp = np.pad(x.astype(np.float64), half, mode="edge")
    csum = np.cumsum(np.concatenate(([0.0], xp)))
    return (csum[w:] - csum[:-w]) / w


def smooth(x: np.ndarray, sample_rate_hz: int, config: PipelineConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Detection-grade smoothing; window from config."""
    return moving_average(x, int(round(config.smooth_window_s * sample_rate_hz)))


@dataclass
class BeatSet:
    """Alternating pruned extrema of the smoothed signal."""

    smoothed: np.ndarray
    peak_indices: list[int]      # one per detected beat
    trough_indices: list[int]    # minima between/around the peaks
    n_samples: int

    def complete_peaks(self) -> list[int]:
        """Peaks usable for per-beat statistics (not at the window edge)."""
        return [i for i in self.peak_indices if 0 < i < self.n_samples - 1]

    def complete_troughs(self) -> list[int]:
        """Troughs strictly between two detected peaks (full beats only)."""
        if len(self.peak_indices) < 2:
            return []
        first, last = self.peak_indices[0], self.peak_indices[-1]
        return [i for i in self.trough_indices if first < i < last]


def _alternating(maxima: list[tuple[int, float]], minima: list[tuple[int, float]]):
    """Merge extrema into a strictly alternating max/min event list.

    With a restart stride above 1 the climb can miss small extrema, leaving
    two maxima (or minima) in a row; collapse such runs to the single best
    one so prominence pruning sees a consistent alternation.
    """
    events = [(i, v, +1) for i, v in maxima] + [(i, v, -1) for i, v in minima]
    events.sort(key=lambda e: e[0])
    collapsed: list[tuple[int, float, int]] = []
    for ev in events:
        if collapsed and collapsed[-1][2] == ev[2]:
            keep_new = (ev[1] > collapsed[-1][1]) if ev[2] == +1 else (ev[1] < collapsed[-1][1])
            if keep_new:
                collapsed[-1] = ev
        else:
            collapsed.append(ev)
    return collapsed


def _prune(events: list[tuple[int, float, int]], threshold: float):
    """Iteratively drop the weakest max (and its higher flanking min).

    Prominence of a max = min gap to its neighbouring minima in the
    alternating sequence; boundary maxima use the single available side.
    """
    events = list(events)
    while True:
        worst_pos, worst_prom = None, None
        for pos, (idx, val, kind) in enumerate(events):
            if kind != +1:
                continue
            gaps = []
            if pos > 0:
                gaps.append(val - events[pos - 1][1])
            if pos < len(events) - 1:
                gaps.append(val - events[pos + 1][1])
            prom = min(gaps) if gaps else 0.0
            if worst_prom is None or prom < worst_prom:
                worst_pos, worst_prom = pos, prom
        if worst_pos is None or worst_prom >= threshold:
            return events
        if len([e for e in events if e[2] == +1]) == 1:
            # keep at least the dominant max; callers decide if one beat is enough
            return events
        lo, hi = worst_pos - 1, worst_pos + 1
        drop = {worst_pos}
        if 0 <= lo and hi < len(events):
            # merge the two flanking minima, keeping the lower
            drop.add(lo if events[lo][1] > events[hi][1] else hi)
        events = [e for pos, e in enumerate(events) if pos not in drop]


def detect_beats(
    x: np.ndarray, sample_rate_hz: int, config: PipelineConfig = DEFAULT_CONFIG
) -> BeatSet:
    """Locate beats on the smoothed signal.

    Raises NoExtremaError for constant signals (callers reject those as
    flatline before getting here).
    """
    xs = smooth(x, sample_rate_hz, config)
    stride = max(1, sample_rate_hz // config.restart_stride_divisor)
    ext = hill_climb_samples(xs, stride)
    events = _alternating(ext.maxima, ext.minima)
    p5, p95 = np.percentile(xs, [5, 95])
    threshold = config.prominence_rel * (p95 - p5)
    if threshold <= 0:
        raise NoExtremaError("signal has no amplitude")
    events = _prune(events, threshold)
    peaks = [i for i, _, k in events if k == +1]
    troughs = [i for i, _, k in events if k == -1]
    return BeatSet(smoothed=xs, peak_indices=peaks, trough_indices=troughs, n_samples=len(x))


def rhythm_cv(peak_indices: list[int]) -> float:
    """Coefficient of variation of beat-to-beat intervals."""
    if len(peak_indices) < 3:
        return 0.0
    intervals = np.diff(np.asarray(peak_indices, dtype=np.float64))
    mean = intervals.mean()
    if mean <= 0:
        return float("inf")
    return float(intervals.std() / mean)

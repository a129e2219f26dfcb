import numpy as np
import pytest
from conftest import NOISE_2PCT, T0, accuracy_corpus, make_profile
from oracles import exhaustive_extrema

from pulseguard.errors import DomainError, NoExtremaError, RejectedWaveform
from pulseguard.pipeline.extrema import hill_climb_extrema, hill_climb_samples
from pulseguard.pipeline.reading import BpReading, estimate_reading, raw_to_mmhg
from pulseguard.pipeline.validate import RejectCode, validate
from pulseguard.vitals.params import SensorTransfer
from pulseguard.vitals.waveform import (
    ArtifactKind,
    PulseWaveform,
    U16_MAX,
    inject_artifact,
    synth_waveform,
)


def random_signal(rng) -> np.ndarray:
    n = int(rng.integers(2, 200))
    kind = rng.integers(0, 3)
    if kind == 0:
        return rng.normal(0.0, 1.0, n)
    if kind == 1:
        return rng.integers(0, 6, n).astype(float)  # heavy plateaus
    return rng.integers(0, 65536, n).astype(float)


class TestHillClimb:
    def test_hand_case(self):
        x = np.array([0, 1, 3, 2, 0, 2, 5, 1], dtype=float)
        ext = hill_climb_samples(x, 1)
        assert ext.maxima == [(2, 3.0), (6, 5.0)]
        assert ext.minima == [(0, 0.0), (4, 0.0), (7, 1.0)]

    def test_monotone_ramp(self):
        ext = hill_climb_samples(np.arange(50, dtype=float), 1)
        assert ext.maxima == [(49, 49.0)]
        assert ext.minima == [(0, 0.0)]

    def test_constant_signal_raises(self):
        with pytest.raises(NoExtremaError):
            hill_climb_samples(np.full(100, 7.0), 1)

    def test_oracle_equivalence_500_signals(self):
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 500:
            x = random_signal(rng)
            if np.all(x == x[0]):
                continue
            ext = hill_climb_samples(x, 1)
            maxima, minima = exhaustive_extrema(x)
            assert ext.maxima == maxima
            assert ext.minima == minima
            checked += 1

    def test_stride_bounds_on_waveform(self):
        w = synth_waveform(make_profile(), T0, 10.0, 0.0, seed=1)
        with pytest.raises(DomainError):
            hill_climb_extrema(w, 0)
        with pytest.raises(DomainError):
            hill_climb_extrema(w, w.sample_rate_hz // 4 + 1)
        ext = hill_climb_extrema(w, 1)
        assert len(ext.maxima) > 10  # beats plus dicrotic bumps

    def test_wider_stride_subset_of_full(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = rng.normal(0, 1, 200)
            full = hill_climb_samples(x, 1)
            coarse = hill_climb_samples(x, 7)
            assert set(coarse.maxima) <= set(full.maxima)
            assert set(coarse.minima) <= set(full.minima)


class TestValidate:
    def test_clean_waveform_accepted(self):
        w = synth_waveform(make_profile(120, 80, 70), T0, 10.0, 0.0, seed=2)
        verdict = validate(w)
        assert verdict.accepted and verdict.reject_code is None

    def test_flatline_code(self):
        w = synth_waveform(make_profile(), T0, 10.0, 0.0, seed=2)
        flat = PulseWaveform(w.device_id, w.start_time_ms, w.sample_rate_hz,
                             np.full(len(w.samples), 9000, dtype=np.uint16))
        assert validate(flat).reject_code is RejectCode.FLATLINE

    def test_partial_flatline_code(self):
        w = synth_waveform(make_profile(), T0, 10.0, 200.0, seed=3)
        assert validate(inject_artifact(w, ArtifactKind.FLATLINE, 5)).reject_code is RejectCode.FLATLINE

    def test_clipping_code(self):
        w = synth_waveform(make_profile(), T0, 10.0, 200.0, seed=3)
        assert validate(inject_artifact(w, ArtifactKind.CLIPPING, 5)).reject_code is RejectCode.CLIPPED

    def test_too_few_beats(self):
        # 10 s with only two slow "beats"; noisy enough to clear the flatline rule
        t = np.arange(1250) / 125.0
        x = np.full(1250, 9000.0)
        for center in (2.0, 7.5):
            x += 2500 * np.exp(-0.5 * ((t - center) / 0.4) ** 2)
        x += np.random.default_rng(4).normal(0, 120, 1250)
        w = PulseWaveform(b"\x01" * 8, T0, 125, np.clip(x, 0, U16_MAX).astype(np.uint16))
        assert validate(w).reject_code is RejectCode.TOO_FEW_BEATS

    def test_erratic_rhythm(self):
        rng = np.random.default_rng(6)
        t = np.arange(1250) / 125.0
        x = np.full(1250, 9000.0)
        centers = [0.4, 0.9, 2.0, 2.8, 3.1, 4.4, 5.9, 6.6, 8.2, 9.4]  # wildly irregular
        for center in centers:
            x += 3000 * np.exp(-0.5 * ((t - center) / 0.06) ** 2)
        x += rng.normal(0, 120, 1250)
        w = PulseWaveform(b"\x01" * 8, T0, 125, np.clip(x, 0, U16_MAX).astype(np.uint16))
        assert validate(w).reject_code is RejectCode.ERRATIC_RHYTHM

    def test_clipping_rejection_monotone(self):
        w = synth_waveform(make_profile(), T0, 10.0, 200.0, seed=7)
        n = len(w.samples)
        rng = np.random.default_rng(8)
        order = rng.permutation(n)
        rejected_at = None
        for fraction in np.linspace(0.0, 0.3, 16):
            x = w.samples.copy()
            k = int(fraction * n)
            x[order[:k]] = 65535
            verdict = validate(PulseWaveform(w.device_id, T0, 125, x))
            if rejected_at is None and not verdict.accepted:
                rejected_at = fraction
            if rejected_at is not None and fraction >= rejected_at:
                assert not verdict.accepted
        assert rejected_at is not None and rejected_at <= 0.06


class TestEstimateReading:
    def test_noise_free_accuracy(self, transfer):
        w = synth_waveform(make_profile(120, 80, 70), T0, 10.0, 0.0, seed=11)
        r = estimate_reading(w, transfer)
        assert 118.0 <= r.sbp_mmhg <= 122.0
        assert 78.0 <= r.dbp_mmhg <= 82.0
        assert 68.6 <= r.hr_bpm <= 71.4
        assert r.quality > 0.9

    def test_rejected_waveform_raises(self, transfer):
        w = synth_waveform(make_profile(), T0, 10.0, 0.0, seed=11)
        flat = inject_artifact(w, ArtifactKind.FLATLINE, 1)
        with pytest.raises(RejectedWaveform):
            estimate_reading(flat, transfer)

    def test_noisy_accuracy_sample(self, transfer):
        hits = 0
        corpus = accuracy_corpus(40, NOISE_2PCT, seed=999)
        for params, w in corpus:
            r = estimate_reading(w, transfer)
            if abs(r.sbp_mmhg - params.sbp_mmhg) <= 5 and abs(r.dbp_mmhg - params.dbp_mmhg) <= 5:
                hits += 1
        assert hits >= 38

    def test_affine_transfer_equivariance(self):
        # doubling the counts with the matching transfer must not move the
        # recovered pressures (the whole estimator commutes with affine maps)
        base = SensorTransfer(0.0, 100.0)
        doubled = SensorTransfer(0.0, 200.0)
        w = synth_waveform(make_profile(141, 88, 77), T0, 10.0, NOISE_2PCT / 2, seed=21, transfer=base)
        w2 = PulseWaveform(w.device_id, w.start_time_ms, w.sample_rate_hz,
                           (w.samples.astype(np.uint32) * 2).astype(np.uint16))
        r1 = estimate_reading(w, base)
        r2 = estimate_reading(w2, doubled)
        assert abs(r1.sbp_mmhg - r2.sbp_mmhg) < 1e-6
        assert abs(r1.dbp_mmhg - r2.dbp_mmhg) < 1e-6
        assert abs(r1.hr_bpm - r2.hr_bpm) < 1e-9

    def test_dbp_below_sbp_always(self, transfer):
        for params, w in accuracy_corpus(50, NOISE_2PCT, seed=123):
            r = estimate_reading(w, transfer)
            assert r.dbp_mmhg < r.sbp_mmhg

    def test_reading_serialization_round_trip(self):
        r = BpReading("P1", b"\x01" * 8, T0, 121.5, 79.25, 71.0, True, 0.95)
        assert BpReading.from_dict(r.to_dict()) == BpReading.from_dict(r.to_dict())
        assert r.idempotency_key == "0101010101010101:" + str(T0)


class TestRawToMmhg:
    def test_arithmetic(self):
        assert raw_to_mmhg(12000, SensorTransfer(0, 100)) == pytest.approx(120.0)
        assert raw_to_mmhg(250.0, SensorTransfer(250.0, 80.0)) == 0.0

    def test_round_trip(self):
        rng = np.random.default_rng(9)
        transfer = SensorTransfer(rng.uniform(-100, 100), rng.uniform(10, 500))
        for mmhg in rng.uniform(0, 300, 1000):
            assert abs(transfer.to_mmhg(transfer.to_counts(mmhg)) - mmhg) < 1e-9

    def test_invalid_scale(self):
        with pytest.raises(DomainError):
            SensorTransfer(0.0, 0.0)
        with pytest.raises(DomainError):
            SensorTransfer(0.0, -5.0)

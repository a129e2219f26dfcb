import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from pulseguard.vitals.params import PatientProfile, SensorTransfer, Trajectory, VitalParams
from pulseguard.vitals.waveform import synth_waveform, U16_MAX

T0 = 1_767_225_600_000  # 2026-01-01 00:00:00 UTC


def make_profile(
    sbp=120.0,
    dbp=80.0,
    hr=72.0,
    patient_id="P-test",
    gestational_age_weeks=24.0,
    **kwargs,
) -> PatientProfile:
    defaults = dict(
        age_years=29.0,
        weight_kg=70.0,
        height_cm=165.0,
        race="white",
        smoker=False,
        cholesterol_mg_dl=180.0,
        proteinuria=False,
        enrolled_at_ms=T0,
    )
    defaults.update(kwargs)
    return PatientProfile(
        patient_id=patient_id,
        gestational_age_weeks=gestational_age_weeks,
        trajectory=Trajectory([(T0, VitalParams(sbp, dbp, hr))]),
        **defaults,
    )


def accuracy_corpus(n: int, noise_sigma: float, seed: int):
    """Seeded (true params, waveform) pairs spanning the physiological range."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(n):
        sbp = rng.uniform(95.0, 180.0)
        dbp = rng.uniform(55.0, min(110.0, sbp - 30.0))
        hr = rng.uniform(50.0, 110.0)
        profile = make_profile(sbp, dbp, hr, patient_id=f"C{k}")
        waveform = synth_waveform(
            profile, T0 + k * 60_000, 10.0, noise_sigma, seed=int(rng.integers(0, 2**31))
        )
        out.append((VitalParams(sbp, dbp, hr), waveform))
    return out


@pytest.fixture
def transfer() -> SensorTransfer:
    return SensorTransfer()


NOISE_2PCT = 0.02 * U16_MAX

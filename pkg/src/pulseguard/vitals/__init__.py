"""Ground-truth vital trajectories and synthetic pulse waveforms.

This package is both the simulated sensor front-end and the oracle that
accuracy tests measure the signal pipeline against.
"""

from pulseguard.vitals.params import (
    RACES,
    PatientProfile,
    SensorTransfer,
    Trajectory,
    VitalParams,
)
from pulseguard.vitals.waveform import (
    U16_MAX,
    ArtifactKind,
    PulseWaveform,
    inject_artifact,
    synth_beat,
    synth_waveform,
)
from pulseguard.vitals.cohort import (
    COHORT_CSV_HEADER,
    TRUE_COHORT_WEIGHTS,
    CohortRow,
    cohort_to_csv,
    cohort_from_csv,
    gen_training_cohort,
)
from pulseguard.vitals.profile_files import load_profile, profile_from_dict

__all__ = [
    "RACES",
    "PatientProfile",
    "SensorTransfer",
    "Trajectory",
    "VitalParams",
    "U16_MAX",
    "ArtifactKind",
    "PulseWaveform",
    "inject_artifact",
    "synth_beat",
    "synth_waveform",
    "COHORT_CSV_HEADER",
    "TRUE_COHORT_WEIGHTS",
    "CohortRow",
    "cohort_to_csv",
    "cohort_from_csv",
    "gen_training_cohort",
    "load_profile",
    "profile_from_dict",
]

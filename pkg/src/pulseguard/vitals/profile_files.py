"""Human-readable patient scenario files (YAML).

A profile file carries the clinical covariates plus a trajectory of
time-stamped vital knots. Knot times are either absolute unix milliseconds
(``at_ms``) or hours relative to ``enrolled_at_ms`` (``at_hours``).

Example::

    patient_id: P001
    age_years: 29
    weight_kg: 71
    height_cm: 167
    race: white
    smoker: false
    cholesterol_mg_dl: 180
    gestational_age_weeks: 24
    proteinuria: false
    enrolled_at_ms: 1767225600000
    trajectory:
      - {at_hours: 0,  sbp: 118, dbp: 76, hr: 72}
      - {at_hours: 24, sbp: 120, dbp: 78, hr: 74}
"""

from __future__ import annotations

from pathlib import Path

import yaml

from pulseguard.errors import DomainError
from pulseguard.vitals.params import PatientProfile, Trajectory, VitalParams


def _knot_time_ms(knot: dict, anchor_ms: int) -> int:
    if "at_ms" in knot:
        return int(knot["at_ms"])
    if "at_hours" in knot:
        return anchor_ms + int(round(float(knot["at_hours"]) * 3600 * 1000))
    raise DomainError(f"trajectory knot needs at_ms or at_hours: {knot}")


def profile_from_dict(doc: dict) -> PatientProfile:
    try:
        knots_doc = doc["trajectory"]
        if not knots_doc:
            raise DomainError("trajectory must have at least one knot")
        anchor = int(doc.get("enrolled_at_ms", 0))
        knots = [
            (
                _knot_time_ms(k, anchor),
                VitalParams(float(k["sbp"]), float(k["dbp"]), float(k["hr"])),
            )
            for k in knots_doc
        ]
        return PatientProfile(
            patient_id=str(doc["patient_id"]),
            age_years=float(doc["age_years"]),
            weight_kg=float(doc["weight_kg"]),
            height_cm=float(doc["height_cm"]),
            race=str(doc["race"]),
            smoker=bool(doc["smoker"]),
            cholesterol_mg_dl=float(doc["cholesterol_mg_dl"]),
            gestational_age_weeks=float(doc["gestational_age_weeks"]),
            proteinuria=bool(doc["proteinuria"]),
            trajectory=Trajectory(knots),
            enrolled_at_ms=int(doc["enrolled_at_ms"]) if "enrolled_at_ms" in doc else None,
        )
    except KeyError as exc:
        raise DomainError(f"profile document missing field {exc}") from exc


def load_profile(path: str | Path) -> PatientProfile:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise DomainError(f"profile file {path} is not a mapping")
    return profile_from_dict(doc)

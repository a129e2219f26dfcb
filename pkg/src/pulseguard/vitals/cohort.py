"""Synthetic training cohort with a known latent risk model.

The label generator's true weights are documented constants so the risk
model's learned coefficients can be checked against them (sign recovery).
Covariates follow plausible antenatal ranges; the cohort is an explicit
synthetic stand-in, not a reproduction of any survey dataset.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields

import numpy as np

from pulseguard.errors import DomainError
from pulseguard.vitals.params import RACES

COHORT_CSV_HEADER = (
    "patient_id,age,weight_kg,height_cm,race,smoker,cholesterol,"
    "mean_sbp,mean_dbp,resting_mean_sbp,label"
)

# Population location/scale constants used to standardise covariates before
# applying the latent weights. Fixed by documentation, not estimated.
COHORT_NORMS = {
    "age": (30.0, 6.5),
    "weight_kg": (78.0, 14.0),
    "height_cm": (165.0, 7.0),
    "cholesterol": (195.0, 35.0),
    "mean_sbp": (118.0, 12.0),
    "mean_dbp": (76.0, 9.0),
    "resting_mean_sbp": (114.0, 12.0),
}

# Latent logistic weights on standardised covariates (smoker enters as 0/1).
# Positive on age, weight, smoking, cholesterol and mean SBP by design;
# these are the recovery oracle for the trained risk model.
TRUE_COHORT_WEIGHTS = {
    "age": 0.8,
    "weight_kg": 0.6,
    "height_cm": 0.0,
    "smoker": 0.9,
    "cholesterol": 0.7,
    "mean_sbp": 1.6,
    "mean_dbp": 0.5,
    "resting_mean_sbp": 0.8,
    "intercept": -1.9,
}


@dataclass
class CohortRow:
    patient_id: str
    age: float
    weight_kg: float
    height_cm: float
    race: str
    smoker: int
    cholesterol: float
    mean_sbp: float
    mean_dbp: float
    resting_mean_sbp: float
    label: int


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def gen_training_cohort(n: int, seed: int, true_weights: dict | None = None) -> list[CohortRow]:
    """Draw ``n`` synthetic patients with labels from the latent model.

    Deterministic per seed. ``true_weights`` overrides the documented
    constants (used by tests; all-zero weights give 0.5 prevalence).
    """
    if n < 1:
        raise DomainError(f"cohort size must be >= 1, got {n}")
    w = dict(TRUE_COHORT_WEIGHTS if true_weights is None else true_weights)
    rng = np.random.default_rng(seed)

    age = rng.uniform(18.0, 45.0, n)
    weight = np.clip(rng.normal(78.0, 14.0, n), 45.0, 140.0)
    height = np.clip(rng.normal(165.0, 7.0, n), 145.0, 190.0)
    race = rng.choice(RACES, size=n, p=[0.45, 0.20, 0.15, 0.15, 0.05])
    smoker = (rng.random(n) < 0.18).astype(int)
    chol = np.clip(rng.normal(195.0, 35.0, n), 110.0, 320.0)
    mean_sbp = np.clip(rng.normal(118.0, 12.0, n), 90.0, 185.0)
    mean_dbp = np.clip(0.62 * mean_sbp + rng.normal(3.0, 6.0, n), 55.0, 115.0)
    resting_sbp = np.clip(mean_sbp - np.abs(rng.normal(4.0, 3.0, n)), 85.0, None)

    def z(name, values):
        mu, sd = COHORT_NORMS[name]
        return (values - mu) / sd

    score = (
        w["age"] * z("age", age)
        + w["weight_kg"] * z("weight_kg", weight)
        + w["height_cm"] * z("height_cm", height)
        + w["smoker"] * smoker
        + w["cholesterol"] * z("cholesterol", chol)
        + w["mean_sbp"] * z("mean_sbp", mean_sbp)
        + w["mean_dbp"] * z("mean_dbp", mean_dbp)
        + w["resting_mean_sbp"] * z("resting_mean_sbp", resting_sbp)
        + w["intercept"]
    )
    label = (rng.random(n) < _sigmoid(score)).astype(int)

    return [
        CohortRow(
            patient_id=f"S{seed:04d}-{i:06d}",
            age=round(float(age[i]), 2),
            weight_kg=round(float(weight[i]), 2),
            height_cm=round(float(height[i]), 2),
            race=str(race[i]),
            smoker=int(smoker[i]),
            cholesterol=round(float(chol[i]), 2),
            mean_sbp=round(float(mean_sbp[i]), 2),
            mean_dbp=round(float(mean_dbp[i]), 2),
            resting_mean_sbp=round(float(resting_sbp[i]), 2),
            label=int(label[i]),
        )
        for i in range(n)
    ]


def cohort_to_csv(rows: list[CohortRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COHORT_CSV_HEADER.split(","))
    for r in rows:
        writer.writerow([getattr(r, f.name) for f in fields(CohortRow)])
    return buf.getvalue()


def cohort_from_csv(text: str) -> list[CohortRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != COHORT_CSV_HEADER.split(","):
        raise DomainError(f"unexpected cohort header: {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(
            CohortRow(
                patient_id=rec["patient_id"],
                age=float(rec["age"]),
                weight_kg=float(rec["weight_kg"]),
                height_cm=float(rec["height_cm"]),
                race=rec["race"],
                smoker=int(rec["smoker"]),
                cholesterol=float(rec["cholesterol"]),
                mean_sbp=float(rec["mean_sbp"]),
                mean_dbp=float(rec["mean_dbp"]),
                resting_mean_sbp=float(rec["resting_mean_sbp"]),
                label=int(rec["label"]),
            )
        )
    return rows

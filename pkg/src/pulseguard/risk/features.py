"""Feature encoding for the risk model.

Column layout (schema v1): eight numeric features, race one-hot with the
first category dropped, smoker flag, then one missing-indicator per numeric
feature; the bias column is appended at the end by the model. Missing
numerics are mean-imputed at prediction time with the indicator set.
Numeric columns are z-scored with stored training statistics; one-hot,
smoker and indicator columns stay raw.
"""

from __future__ import annotations

import math

import numpy as np

from pulseguard.errors import SchemaError
from pulseguard.vitals.params import RACES

FEATURE_SCHEMA_VERSION = 1

NUMERIC_FEATURES = (
    "age",
    "weight_kg",
    "height_cm",
    "cholesterol",
    "mean_sbp",
    "mean_dbp",
    "resting_mean_sbp",
)
_RACE_BASELINE = RACES[0]
_RACE_COLUMNS = tuple(f"race_{r}" for r in RACES[1:])


def feature_names() -> list[str]:
    return (
        list(NUMERIC_FEATURES)
        + list(_RACE_COLUMNS)
        + ["smoker"]
        + [f"{f}_missing" for f in NUMERIC_FEATURES]
    )


def n_features() -> int:
    return len(feature_names())


def _is_missing(value) -> bool:
    if value is None:
        return True
    return isinstance(value, float) and math.isnan(value)


def encode_record(record: dict) -> tuple[np.ndarray, np.ndarray]:
    """Encode one record to (values, missing-mask) over the numeric block.

    Returns the full raw feature row with NaN where a numeric is missing
    (imputation happens against training means) and a 0/1 indicator row.
    Unknown race categories raise SchemaError.
    """
    race = record.get("race")
    if race not in RACES:
        raise SchemaError(f"unknown race category {race!r}")

    numerics = np.empty(len(NUMERIC_FEATURES))
    missing = np.zeros(len(NUMERIC_FEATURES))
    for j, name in enumerate(NUMERIC_FEATURES):
        value = record.get(name)
        if _is_missing(value):
            numerics[j] = np.nan
            missing[j] = 1.0
        else:
            numerics[j] = float(value)

    onehot = np.array([1.0 if race == r else 0.0 for r in RACES[1:]])
    smoker = np.array([1.0 if record.get("smoker") else 0.0])
    row = np.concatenate([numerics, onehot, smoker, missing])
    return row, missing


def encode_matrix(records: list[dict]) -> np.ndarray:
    return np.vstack([encode_record(r)[0] for r in records])


def normalize(rows: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    """Impute-then-z-score the numeric block; other columns pass through."""
    out = rows.copy()
    k = len(NUMERIC_FEATURES)
    block = out[:, :k]
    nan_mask = np.isnan(block)
    block[nan_mask] = np.broadcast_to(means[:k], block.shape)[nan_mask]
    out[:, :k] = (block - means[:k]) / stds[:k]
    return out


def fit_norms(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means/stds for the numeric block (NaN-aware); stds floor at 1."""
    k = len(NUMERIC_FEATURES)
    means = np.zeros(rows.shape[1])
    stds = np.ones(rows.shape[1])
    means[:k] = np.nanmean(rows[:, :k], axis=0)
    col_std = np.nanstd(rows[:, :k], axis=0)
    stds[:k] = np.where(col_std > 1e-12, col_std, 1.0)
    return means, stds

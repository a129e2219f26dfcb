"""Regularised logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from pulseguard.errors import DegenerateCohort, SchemaError
from pulseguard.risk.features import (
    FEATURE_SCHEMA_VERSION,
    encode_matrix,
    encode_record,
    feature_names,
    fit_norms,
    normalize,
)
from pulseguard.vitals.cohort import CohortRow


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 0.5
    epochs: int = 600
    l2_lambda: float = 1e-3   # bias excluded from the penalty
    holdout_fraction: float = 0.2


@dataclass
class RiskModel:
    schema_version: int
    feature_names: list[str]
    weights: np.ndarray       # featurised columns + trailing bias
    means: np.ndarray
    stds: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.weights) != len(self.feature_names) + 1:
            raise SchemaError(
                f"weight dimension {len(self.weights)} != features+bias "
                f"{len(self.feature_names) + 1}"
            )
        assert np.all(self.stds > 0)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _with_bias(x: np.ndarray) -> np.ndarray:
    return np.hstack([x, np.ones((x.shape[0], 1))])


def loss_gradient(
    weights: np.ndarray, x: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy + (lambda/2)||w||^2 (bias free) and its gradient.

    ``x`` already carries the bias column.
    """
    if len(x) == 0:
        raise ValueError("empty batch")
    z = x @ weights
    p = _sigmoid(z)
    eps = 1e-12
    ce = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    reg_w = weights.copy()
    reg_w[-1] = 0.0  # bias unregularised
    loss = ce + 0.5 * l2_lambda * float(reg_w @ reg_w)
    grad = x.T @ (p - y) / len(y) + l2_lambda * reg_w
    return float(loss), grad


def auc_score(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Rank-based AUC (Mann-Whitney), ties averaged."""
    y_true = np.asarray(y_true)
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    n_pos = int(y_true.sum())
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateCohort("AUC undefined with a single class")
    return float((ranks[y_true == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _rows_to_records(rows: list[CohortRow]) -> list[dict]:
    return [
        {
            "age": r.age,
            "weight_kg": r.weight_kg,
            "height_cm": r.height_cm,
            "race": r.race,
            "smoker": r.smoker,
            "cholesterol": r.cholesterol,
            "mean_sbp": r.mean_sbp,
            "mean_dbp": r.mean_dbp,
            "resting_mean_sbp": r.resting_mean_sbp,
        }
        for r in rows
    ]


def train(
    cohort: list[CohortRow],
    hyper: Hyperparams = Hyperparams(),
    seed: int = 0,
) -> RiskModel:
    """Fit the model; deterministic per (cohort, hyper, seed).

    Weights start at zero; the held-out split (for the reported AUC) is
    drawn from the seed.
    """
    labels = np.array([r.label for r in cohort], dtype=np.float64)
    if len(set(labels.tolist())) < 2:
        raise DegenerateCohort("training cohort has a single class")

    raw = encode_matrix(_rows_to_records(cohort))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(raw))
    n_holdout = int(round(hyper.holdout_fraction * len(raw)))
    holdout_idx, train_idx = perm[:n_holdout], perm[n_holdout:]
    if len(set(labels[train_idx].tolist())) < 2:
        raise DegenerateCohort("training split has a single class")

    means, stds = fit_norms(raw[train_idx])
    x_train = _with_bias(normalize(raw[train_idx], means, stds))
    y_train = labels[train_idx]

    weights = np.zeros(x_train.shape[1])
    loss = float("nan")
    for _ in range(hyper.epochs):
        loss, grad = loss_gradient(weights, x_train, y_train, hyper.l2_lambda)
        weights -= hyper.learning_rate * grad

    metadata = {
        "seed": seed,
        "epochs": hyper.epochs,
        "learning_rate": hyper.learning_rate,
        "l2_lambda": hyper.l2_lambda,
        "n_train": int(len(train_idx)),
        "n_holdout": int(len(holdout_idx)),
        "final_loss": loss,
    }
    model = RiskModel(
        schema_version=FEATURE_SCHEMA_VERSION,
        feature_names=feature_names(),
        weights=weights,
        means=means,
        stds=stds,
        metadata=metadata,
    )
    if len(holdout_idx):
        x_hold = _with_bias(normalize(raw[holdout_idx], means, stds))
        metadata["holdout_auc"] = auc_score(labels[holdout_idx], x_hold @ weights)
    return model


def predict(model: RiskModel, features: np.ndarray) -> float | np.ndarray:
    """Sigmoid of the dot product; features are pre-normalised, no bias."""
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[1] != len(model.feature_names):
        raise SchemaError(
            f"feature dimension {x.shape[1]} != schema {len(model.feature_names)}"
        )
    p = _sigmoid(_with_bias(x) @ model.weights)
    return float(p[0]) if p.shape[0] == 1 and np.ndim(features) == 1 else p


def predict_record(model: RiskModel, record: dict) -> float:
    """Encode, impute and normalise a raw record, then score it."""
    row, _ = encode_record(record)
    x = normalize(row[None, :], model.means, model.stds)
    return predict(model, x[0])


def save_model(model: RiskModel, path: str | Path) -> None:
    doc = {
        "schema_version": model.schema_version,
        "feature_names": model.feature_names,
        "weights": [float(w) for w in model.weights],
        "means": [float(m) for m in model.means],
        "stds": [float(s) for s in model.stds],
        "metadata": model.metadata,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> RiskModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != FEATURE_SCHEMA_VERSION:
        raise SchemaError(f"unsupported model schema {doc.get('schema_version')}")
    return RiskModel(
        schema_version=doc["schema_version"],
        feature_names=list(doc["feature_names"]),
        weights=np.array(doc["weights"], dtype=np.float64),
        means=np.array(doc["means"], dtype=np.float64),
        stds=np.array(doc["stds"], dtype=np.float64),
        metadata=dict(doc.get("metadata", {})),
    )

"""Logistic-regression risk profiling over clinical and BP summary features."""

from pulseguard.risk.features import (
    FEATURE_SCHEMA_VERSION,
    NUMERIC_FEATURES,
    encode_record,
    feature_names,
)
from pulseguard.risk.model import (
    Hyperparams,
    RiskModel,
    auc_score,
    load_model,
    loss_gradient,
    predict,
    predict_record,
    save_model,
    train,
)

__all__ = [
    "FEATURE_SCHEMA_VERSION",
    "NUMERIC_FEATURES",
    "encode_record",
    "feature_names",
    "Hyperparams",
    "RiskModel",
    "auc_score",
    "load_model",
    "loss_gradient",
    "predict",
    "predict_record",
    "save_model",
    "train",
]

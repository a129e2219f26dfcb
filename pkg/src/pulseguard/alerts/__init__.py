"""Persistent-hypertension detection and condition classification."""

from pulseguard.alerts.rules import (
    Alert,
    AlertRule,
    Condition,
    EvidencePair,
    classify_condition,
    evaluate,
    is_elevated,
)

__all__ = [
    "Alert",
    "AlertRule",
    "Condition",
    "EvidencePair",
    "classify_condition",
    "evaluate",
    "is_elevated",
]

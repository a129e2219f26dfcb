"""Role-based access control: deny by default.

The matrix below is the complete authorisation surface. An action missing
from a role's row is denied, and every allowed action is additionally
patient-scoped: patients see exactly themselves, family members the
patients who registered them, clinicians their assigned patients. Admins
manage users and nothing clinical.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field

ROLES = ("patient", "family", "clinician", "admin")

ACTIONS = (
    "read_readings",
    "write_readings",
    "read_alerts",
    "ack_alert",
    "edit_schedule",
    "enter_clinical_data",
    "manage_users",
    "run_risk_score",
)

ROLE_ACTIONS: dict[str, frozenset[str]] = {
    "patient": frozenset(
        {"read_readings", "write_readings", "read_alerts", "edit_schedule", "run_risk_score"}
    ),
    "family": frozenset({"read_readings", "read_alerts"}),
    "clinician": frozenset(
        {"read_readings", "read_alerts", "ack_alert", "enter_clinical_data", "run_risk_score"}
    ),
    "admin": frozenset({"manage_users"}),
}

# Actions that are not scoped to a single patient record.
UNSCOPED_ACTIONS = frozenset({"manage_users"})


@dataclass
class Principal:
    user_id: str
    role: str
    linked_patients: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        assert self.role in ROLES
        if self.role == "patient":
            assert len(self.linked_patients) == 1, "patient links exactly its own id"


def authorize(principal: Principal, action: str, patient_id: str | None = None) -> bool:
    """Matrix lookup AND patient-linkage check; deny is the default."""
    if action not in ACTIONS:
        return False
    if action not in ROLE_ACTIONS.get(principal.role, frozenset()):
        return False
    if action in UNSCOPED_ACTIONS:
        return True
    if patient_id is None:
        return False
    return patient_id in principal.linked_patients


def new_token() -> str:
    return secrets.token_hex(32)


def token_hash(token: str) -> str:
    return hashlib.sha256(token.encode("ascii")).hexdigest()

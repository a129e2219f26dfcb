"""Server application service: persistence, alerting, statistics, risk."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from pulseguard.alerts.rules import Alert, AlertRule, classify_condition, evaluate
from pulseguard.errors import UnclassifiableCondition
from pulseguard.pipeline.reading import BpReading
from pulseguard.risk.model import RiskModel, load_model, predict_record
from pulseguard.server.auth import Principal, new_token, token_hash
from pulseguard.server.storage import KVStore

MS_PER_WEEK = 7 * 24 * 3_600_000

CLINICAL_FIELDS = (
    "age_years",
    "weight_kg",
    "height_cm",
    "race",
    "smoker",
    "cholesterol_mg_dl",
    "gestational_age_weeks",
    "proteinuria",
    "enrolled_at_ms",
)

_CLINICAL_RANGES = {
    "age_years": (10.0, 70.0),
    "weight_kg": (30.0, 250.0),
    "height_cm": (120.0, 220.0),
    "cholesterol_mg_dl": (50.0, 500.0),
    "gestational_age_weeks": (0.0, 45.0),
}


class ValidationFailure(Exception):
    """422-class error: malformed input, nothing stored."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class ConflictError(Exception):
    """409-class error: the operation was already performed."""


class NotFoundError(Exception):
    pass


@dataclass
class ServerConfig:
    store_path: str = ":memory:"
    listen_host: str = "127.0.0.1"
    listen_port: int = 8800
    alert_rule: AlertRule = field(default_factory=AlertRule)
    risk_model_path: str | None = None
    bootstrap_token: str | None = None
    stats_window_days: float = 7.0


class ServerCore:
    """All server behaviour behind the REST layer; usable in-process too."""

    def __init__(self, config: ServerConfig):
        self.config = config
        self.store = KVStore(config.store_path)
        self.rule = config.alert_rule
        self._patient_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._delivery_cond = threading.Condition()
        self._risk_model: RiskModel | None = None
        if config.risk_model_path and Path(config.risk_model_path).exists():
            self._risk_model = load_model(config.risk_model_path)
        self._ensure_bootstrap_admin()

    # -- users & auth --------------------------------------------------------

    def _ensure_bootstrap_admin(self) -> None:
        if self.store.scan("users"):
            return
        token = self.config.bootstrap_token or new_token()
        with self.store.transaction():
            self.store.put(
                "users", "admin", {"user_id": "admin", "role": "admin", "linked_patients": []}
            )
            self.store.put("tokens", token_hash(token), "admin")
        self.bootstrap_admin_token = token

    def principal_for_token(self, token: str) -> Principal | None:
        user_id = self.store.get("tokens", token_hash(token))
        if user_id is None:
            return None
        doc = self.store.get("users", user_id)
        if doc is None:
            return None
        return Principal(
            user_id=doc["user_id"],
            role=doc["role"],
            linked_patients=tuple(doc.get("linked_patients", [])),
        )

    def create_user(
        self, user_id: str, role: str, linked_patients: list[str] | None = None
    ) -> str:
        """Create (or replace) a user and mint a fresh bearer token."""
        if role not in ("patient", "family", "clinician", "admin"):
            raise ValidationFailure([f"unknown role {role!r}"])
        linked = list(linked_patients or [])
        if role == "patient" and len(linked) != 1:
            raise ValidationFailure(["a patient user links exactly one patient id"])
        token = new_token()
        with self.store.transaction():
            self.store.put(
                "users",
                user_id,
                {"user_id": user_id, "role": role, "linked_patients": linked},
            )
            self.store.put("tokens", token_hash(token), user_id)
        return token

    def assigned_clinicians(self, patient_id: str) -> list[str]:
        return [
            uid
            for uid, doc in self.store.scan("users")
            if doc["role"] == "clinician" and patient_id in doc.get("linked_patients", [])
        ]

    # -- patients & clinical data ---------------------------------------------

    def create_patient(self, patient_id: str, clinical: dict | None = None) -> dict:
        problems = _validate_clinical(clinical or {}, partial=True)
        if problems:
            raise ValidationFailure(problems)
        record = {
            "patient_id": patient_id,
            "clinical_version": 0,
            "schedule": {"interval_min": 15, "resting_window": ["22:00", "06:00"]},
            "last_risk": None,
        }
        with self.store.transaction():
            self.store.put("patients", patient_id, record)
        if clinical:
            self.enter_clinical_data(patient_id, clinical, entered_by="admin")
        return self.get_patient(patient_id)

    def get_patient(self, patient_id: str) -> dict:
        doc = self.store.get("patients", patient_id)
        if doc is None:
            raise NotFoundError(f"patient {patient_id}")
        return doc

    def current_clinical(self, patient_id: str) -> dict | None:
        patient = self.get_patient(patient_id)
        version = patient["clinical_version"]
        if version == 0:
            return None
        doc = self.store.get("profiles", f"{patient_id}/{version:06d}")
        return doc["fields"] if doc else None

    def clinical_history(self, patient_id: str) -> list[dict]:
        self.get_patient(patient_id)
        return [doc for _, doc in self.store.scan("profiles", prefix=f"{patient_id}/")]

    def enter_clinical_data(
        self, patient_id: str, fields: dict, entered_by: str
    ) -> dict:
        """Versioned clinical update; re-classifies open alerts, re-scores risk."""
        problems = _validate_clinical(fields, partial=True)
        unknown = set(fields) - set(CLINICAL_FIELDS)
        if unknown:
            problems.append(f"unknown clinical fields: {sorted(unknown)}")
        if problems:
            raise ValidationFailure(problems)
        with self._patient_lock(patient_id):
            patient = self.get_patient(patient_id)
            merged = dict(self.current_clinical(patient_id) or {})
            merged.update(fields)
            version = patient["clinical_version"] + 1
            patient["clinical_version"] = version
            with self.store.transaction():
                self.store.put(
                    "profiles",
                    f"{patient_id}/{version:06d}",
                    {
                        "version": version,
                        "entered_by": entered_by,
                        "entered_at_ms": int(time.time() * 1000),
                        "fields": merged,
                    },
                )
                self.store.put("patients", patient_id, patient)
            self._reclassify_open_alerts(patient_id, merged)
        if self._risk_model is not None:
            self.risk_score(patient_id)
        return {"patient_id": patient_id, "version": version, "fields": merged}

    def _reclassify_open_alerts(self, patient_id: str, clinical: dict) -> None:
        for key, doc in self.store.scan("alerts", prefix=f"{patient_id}/"):
            if doc.get("acknowledged_by"):
                continue
            condition = self._classify(clinical, doc["evidence"][0]["timestamp_ms"])
            if condition != doc.get("condition"):
                doc["condition"] = condition
                with self.store.transaction():
                    self.store.put("alerts", key, doc)

    def _classify(self, clinical: dict | None, first_evidence_ms: int) -> str | None:
        if not clinical or clinical.get("gestational_age_weeks") is None:
            return None
        enrolled = clinical.get("enrolled_at_ms")
        week = clinical["gestational_age_weeks"] + (
            0.0 if enrolled is None else (first_evidence_ms - enrolled) / MS_PER_WEEK
        )
        try:
            return classify_condition(week, bool(clinical.get("proteinuria"))).value
        except UnclassifiableCondition:
            return None

    # -- schedule --------------------------------------------------------------

    def get_schedule(self, patient_id: str) -> dict:
        return self.get_patient(patient_id)["schedule"]

    def put_schedule(self, patient_id: str, schedule: dict) -> dict:
        problems = []
        interval = schedule.get("interval_min")
        if not isinstance(interval, int) or not (1 <= interval <= 240):
            problems.append("interval_min must be an integer in [1, 240]")
        window = schedule.get("resting_window")
        if (
            not isinstance(window, (list, tuple))
            or len(window) != 2
            or not all(_valid_clock(t) for t in window)
        ):
            problems.append("resting_window must be two HH:MM clock times")
        if problems:
            raise ValidationFailure(problems)
        with self._patient_lock(patient_id):
            patient = self.get_patient(patient_id)
            patient["schedule"] = {
                "interval_min": interval,
                "resting_window": list(window),
            }
            with self.store.transaction():
                self.store.put("patients", patient_id, patient)
        return patient["schedule"]

    # -- readings ---------------------------------------------------------------

    def store_readings(self, readings: list[dict]) -> list[dict]:
        """Validate, deduplicate and persist a batch atomically.

        Returns one {id, duplicate} entry per input. Alert evaluation runs
        per affected patient after the batch commits.
        """
        problems = []
        parsed: list[BpReading] = []
        for i, doc in enumerate(readings):
            try:
                parsed.append(BpReading.from_dict(doc))
            except Exception as exc:
                problems.append(f"reading[{i}]: {exc}")
                continue
            r = parsed[-1]
            if not (40.0 <= r.dbp_mmhg < r.sbp_mmhg <= 260.0):
                problems.append(f"reading[{i}]: pressures outside physical bounds")
            if not (30.0 <= r.hr_bpm <= 220.0):
                problems.append(f"reading[{i}]: heart rate outside physical bounds")
            if self.store.get("patients", r.patient_id) is None:
                problems.append(f"reading[{i}]: unknown patient {r.patient_id!r}")
        if problems:
            raise ValidationFailure(problems)

        results = []
        by_patient: dict[str, list[BpReading]] = {}
        for r in parsed:
            by_patient.setdefault(r.patient_id, []).append(r)

        for patient_id, batch in by_patient.items():
            with self._patient_lock(patient_id):
                with self.store.transaction():
                    for r in batch:
                        key = r.idempotency_key
                        existing = self.store.get("reading_keys", key)
                        if existing is not None:
                            results.append({"id": key, "duplicate": True})
                            continue
                        reading_key = f"{patient_id}/{r.timestamp_ms:020d}/{r.device_id.hex()}"
                        doc = r.to_dict()
                        doc["id"] = key
                        doc["received_at_ms"] = int(time.time() * 1000)
                        self.store.put("readings", reading_key, doc)
                        self.store.put(
                            "reading_keys", key, {"reading_id": key, "patient_id": patient_id}
                        )
                        results.append({"id": key, "duplicate": False})
                self._evaluate_alerts(patient_id)
        return results

    def list_readings(
        self, patient_id: str, from_ms: int | None = None, to_ms: int | None = None
    ) -> list[dict]:
        self.get_patient(patient_id)
        rows = [doc for _, doc in self.store.scan("readings", prefix=f"{patient_id}/")]
        if from_ms is not None:
            rows = [r for r in rows if r["timestamp_ms"] >= from_ms]
        if to_ms is not None:
            rows = [r for r in rows if r["timestamp_ms"] <= to_ms]
        return rows

    def query_statistics(
        self, patient_id: str, from_ms: int | None = None, to_ms: int | None = None
    ) -> dict:
        rows = self.list_readings(patient_id, from_ms, to_ms)

        def bucket(subset: list[dict]) -> dict:
            if not subset:
                return {"count": 0, "sbp": None, "dbp": None, "hr": None}
            out = {"count": len(subset)}
            for field_name in ("sbp", "dbp", "hr"):
                values = [r[f"{field_name}_mmhg" if field_name != "hr" else "hr_bpm"] for r in subset]
                out[field_name] = {
                    "mean": sum(values) / len(values),
                    "min": min(values),
                    "max": max(values),
                }
            return out

        resting = [r for r in rows if r["resting"]]
        active = [r for r in rows if not r["resting"]]
        elevated = sum(
            1 for r in rows if _doc_elevated(r, self.rule)
        )
        return {
            "patient_id": patient_id,
            "overall": bucket(rows),
            "resting": bucket(resting),
            "active": bucket(active),
            "elevated_count": elevated,
        }

    # -- alerts -------------------------------------------------------------------

    def _evaluate_alerts(self, patient_id: str) -> None:
        """Run the pair rule over the stored history; must hold the patient lock.

        The outcome is a function of the stored reading set, not of arrival
        order: while an alert is open, an evaluation that finds an earlier
        qualifying pair upgrades the open alert's evidence in place, so
        out-of-order uploads converge to the sequential result.
        """
        history_docs = self.list_readings(patient_id)
        history = [BpReading.from_dict(d) for d in history_docs]
        history.sort(key=lambda r: r.timestamp_ms)
        now_ms = history[-1].timestamp_ms if history else 0

        pair = evaluate(history, self.rule, now_ms, open_evidence=[])
        if pair is None:
            return

        window_start = now_ms - self.rule.evidence_window_ms
        open_key, open_doc = None, None
        for key, doc in self.store.scan("alerts", prefix=f"{patient_id}/"):
            if doc.get("acknowledged_by"):
                continue
            if doc["evidence"][1]["timestamp_ms"] >= window_start:
                open_key, open_doc = key, doc
                break

        clinical = self.current_clinical(patient_id)
        if open_doc is not None:
            current = (
                open_doc["evidence"][0]["timestamp_ms"],
                open_doc["evidence"][1]["timestamp_ms"],
            )
            proposed = (pair.first.timestamp_ms, pair.second.timestamp_ms)
            if proposed >= current:
                return  # open alert already covers this episode
            open_doc["evidence"] = [pair.first.to_dict(), pair.second.to_dict()]
            open_doc["raised_at_ms"] = pair.second.timestamp_ms
            open_doc["condition"] = self._classify(clinical, pair.first.timestamp_ms)
            with self.store.transaction():
                self.store.put("alerts", open_key, open_doc)
            return

        alert_id = Alert.make_id(patient_id, pair)
        key = f"{patient_id}/{alert_id}"
        if self.store.get("alerts", key) is not None:
            return  # same evidence was already raised and acknowledged
        doc = {
            "alert_id": alert_id,
            "patient_id": patient_id,
            "raised_at_ms": pair.second.timestamp_ms,
            "condition": self._classify(clinical, pair.first.timestamp_ms),
            "acknowledged_by": None,
            "ack_at_ms": None,
            "evidence": [pair.first.to_dict(), pair.second.to_dict()],
        }
        with self.store.transaction():
            self.store.put("alerts", key, doc)
        self._notify(doc)

    def list_alerts(self, patient_id: str) -> list[dict]:
        self.get_patient(patient_id)
        return [doc for _, doc in self.store.scan("alerts", prefix=f"{patient_id}/")]

    def ack_alert(self, alert_id: str, principal: Principal) -> dict:
        for key, doc in self.store.scan("alerts"):
            if doc["alert_id"] != alert_id:
                continue
            if doc.get("acknowledged_by"):
                raise ConflictError(f"alert {alert_id} already acknowledged")
            doc["acknowledged_by"] = principal.user_id
            doc["ack_at_ms"] = int(time.time() * 1000)
            with self.store.transaction():
                self.store.put("alerts", key, doc)
            return doc
        raise NotFoundError(f"alert {alert_id}")

    def alert_patient_id(self, alert_id: str) -> str | None:
        for _, doc in self.store.scan("alerts"):
            if doc["alert_id"] == alert_id:
                return doc["patient_id"]
        return None

    # -- notifications ---------------------------------------------------------------

    def _notify(self, alert_doc: dict) -> None:
        """One idempotent delivery per assigned clinician."""
        patient_id = alert_doc["patient_id"]
        with self._delivery_cond:
            for uid in self.assigned_clinicians(patient_id):
                dedup_key = f"{alert_doc['alert_id']}:{uid}"
                if self.store.get("meta", f"delivered:{dedup_key}") is not None:
                    continue
                with self.store.transaction():
                    delivery_id = self.store.next_counter("delivery")
                    self.store.put(
                        "deliveries",
                        f"{uid}/{delivery_id:012d}",
                        {
                            "delivery_id": delivery_id,
                            "user_id": uid,
                            "alert_id": alert_doc["alert_id"],
                            "patient_id": patient_id,
                            "created_at_ms": int(time.time() * 1000),
                        },
                    )
                    self.store.put("meta", f"delivered:{dedup_key}", True)
            self._delivery_cond.notify_all()

    def deliveries_for(self, user_id: str, since_id: int = 0) -> list[dict]:
        return [
            doc
            for _, doc in self.store.scan("deliveries", prefix=f"{user_id}/")
            if doc["delivery_id"] > since_id
        ]

    def wait_deliveries(self, user_id: str, since_id: int, timeout_s: float) -> list[dict]:
        """Long-poll: block until a newer delivery exists or the timeout passes."""
        deadline = time.monotonic() + min(timeout_s, 30.0)
        with self._delivery_cond:
            while True:
                rows = self.deliveries_for(user_id, since_id)
                if rows:
                    return rows
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                self._delivery_cond.wait(remaining)

    # -- risk --------------------------------------------------------------------------

    def risk_score(self, patient_id: str) -> dict:
        if self._risk_model is None:
            raise ValidationFailure(["no risk model configured on this server"])
        clinical = self.current_clinical(patient_id) or {}
        readings = self.list_readings(patient_id)
        window_ms = int(self.config.stats_window_days * 24 * 3_600_000)
        if readings:
            last_ms = max(r["timestamp_ms"] for r in readings)
            readings = [r for r in readings if r["timestamp_ms"] >= last_ms - window_ms]
        record = {
            "age": clinical.get("age_years"),
            "weight_kg": clinical.get("weight_kg"),
            "height_cm": clinical.get("height_cm"),
            "race": clinical.get("race", "white"),
            "smoker": clinical.get("smoker", False),
            "cholesterol": clinical.get("cholesterol_mg_dl"),
            "mean_sbp": _mean(r["sbp_mmhg"] for r in readings),
            "mean_dbp": _mean(r["dbp_mmhg"] for r in readings),
            "resting_mean_sbp": _mean(
                r["sbp_mmhg"] for r in readings if r["resting"]
            ),
        }
        probability = predict_record(self._risk_model, record)
        result = {
            "patient_id": patient_id,
            "probability": probability,
            "n_readings": len(readings),
            "computed_at_ms": int(time.time() * 1000),
        }
        with self._patient_lock(patient_id):
            patient = self.get_patient(patient_id)
            patient["last_risk"] = result
            with self.store.transaction():
                self.store.put("patients", patient_id, patient)
        return result

    # -- helpers -----------------------------------------------------------------------

    def _patient_lock(self, patient_id: str) -> threading.Lock:
        with self._locks_guard:
            if patient_id not in self._patient_locks:
                self._patient_locks[patient_id] = threading.RLock()
            return self._patient_locks[patient_id]


def _mean(values) -> float | None:
    items = list(values)
    return sum(items) / len(items) if items else None


def _doc_elevated(doc: dict, rule: AlertRule) -> bool:
    return (
        doc["sbp_mmhg"] > rule.sbp_threshold_mmhg
        or doc["dbp_mmhg"] > rule.dbp_threshold_mmhg
    )


def _valid_clock(text) -> bool:
    if not isinstance(text, str) or len(text) != 5 or text[2] != ":":
        return False
    try:
        h, m = int(text[:2]), int(text[3:])
    except ValueError:
        return False
    return 0 <= h < 24 and 0 <= m < 60


def _validate_clinical(fields: dict, partial: bool) -> list[str]:
    problems = []
    for name, (lo, hi) in _CLINICAL_RANGES.items():
        if name in fields and fields[name] is not None:
            try:
                value = float(fields[name])
            except (TypeError, ValueError):
                problems.append(f"{name} must be numeric")
                continue
            if not (lo <= value <= hi):
                problems.append(f"{name} {value} outside [{lo}, {hi}]")
    if "race" in fields and fields["race"] is not None:
        from pulseguard.vitals.params import RACES

        if fields["race"] not in RACES:
            problems.append(f"unknown race {fields['race']!r}")
    return problems

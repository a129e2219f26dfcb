#!/usr/bin/env python3
"""Record dashboard API fixtures from a real in-process server.

Writes frontend/fixtures/*.json. Wall-clock bookkeeping fields are frozen
so the recorded payloads (and the UI snapshots built on them) stay
byte-stable across regenerations.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from pulseguard.server.api import create_app
from pulseguard.server.core import ServerConfig, ServerCore

T0 = 1_767_225_600_000
HOUR = 3_600_000
FROZEN_WALL = T0 + 26 * HOUR

CLINICAL = {
    "age_years": 36, "weight_kg": 88, "height_cm": 164, "race": "black",
    "smoker": True, "cholesterol_mg_dl": 241, "gestational_age_weeks": 24,
    "proteinuria": False, "enrolled_at_ms": T0,
}


def reading(ts, sbp, dbp, hr=78.0, resting=False):
    return {
        "patient_id": "P1", "device_id": "a1b2c3d4e5f60708", "timestamp_ms": ts,
        "sbp_mmhg": sbp, "dbp_mmhg": dbp, "hr_bpm": hr, "resting": resting,
        "quality": 0.93,
    }


def freeze(obj):
    if isinstance(obj, dict):
        return {
            k: (FROZEN_WALL if k in ("received_at_ms", "entered_at_ms", "ack_at_ms",
                                     "computed_at_ms") and v is not None else freeze(v))
            for k, v in obj.items()
        }
    if isinstance(obj, list):
        return [freeze(v) for v in obj]
    return obj


def main():
    out_dir = Path(__file__).parent.parent / "frontend" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)

    core = ServerCore(ServerConfig(bootstrap_token="admintok"))
    client = TestClient(create_app(core))
    admin = {"Authorization": "Bearer admintok"}
    client.post("/api/v1/admin/patients", json={"patient_id": "P1", "clinical": CLINICAL},
                headers=admin)
    ptok = client.post("/api/v1/admin/users",
                       json={"user_id": "u-p1", "role": "patient", "linked_patients": ["P1"]},
                       headers=admin).json()["token"]
    ctok = client.post("/api/v1/admin/users",
                       json={"user_id": "dr-1", "role": "clinician", "linked_patients": ["P1"]},
                       headers=admin).json()["token"]
    patient = {"Authorization": f"Bearer {ptok}"}
    clinician = {"Authorization": f"Bearer {ctok}"}

    # ten readings over a day, two of them elevated (and a resting stretch)
    series = [
        (T0 + 0 * HOUR, 124.2, 81.1, 76.0, False),
        (T0 + 2 * HOUR, 126.8, 82.9, 77.5, False),
        (T0 + 4 * HOUR, 129.1, 84.0, 79.2, False),
        (T0 + 6 * HOUR, 133.5, 86.2, 80.1, False),
        (T0 + 8 * HOUR, 145.7, 93.4, 84.6, False),   # elevated
        (T0 + 10 * HOUR, 138.9, 88.7, 82.3, False),
        (T0 + 12 * HOUR, 136.2, 87.5, 81.0, False),
        (T0 + 14 * HOUR, 148.3, 95.1, 86.2, False),  # elevated
        (T0 + 23 * HOUR, 127.4, 82.2, 71.9, True),
        (T0 + 24 * HOUR, 125.9, 81.3, 70.4, True),
    ]
    batch = [reading(*row) for row in series]
    client.post("/api/v1/readings", json={"readings": batch}, headers=patient)

    fixtures = {
        "readings": client.get("/api/v1/patients/P1/readings", headers=clinician).json(),
        "statistics": client.get("/api/v1/patients/P1/statistics", headers=clinician).json(),
        "alerts_open": client.get("/api/v1/patients/P1/alerts", headers=clinician).json(),
        "schedule": client.get("/api/v1/patients/P1/schedule", headers=clinician).json(),
        "clinical": client.get("/api/v1/patients/P1/clinical", headers=clinician).json(),
    }
    alert_id = fixtures["alerts_open"]["alerts"][0]["alert_id"]
    client.post(f"/api/v1/alerts/{alert_id}/ack", headers=clinician)
    fixtures["alerts_acked"] = client.get("/api/v1/patients/P1/alerts", headers=clinician).json()
    fixtures["readings_empty"] = {"readings": []}

    for name, payload in fixtures.items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(freeze(payload), indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

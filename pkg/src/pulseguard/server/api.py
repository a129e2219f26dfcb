"""REST surface over ServerCore (see docs/api.md)."""

from __future__ import annotations

from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Query, Request
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from pulseguard.server.auth import Principal, authorize
from pulseguard.server.core import (
    ConflictError,
    NotFoundError,
    ServerConfig,
    ServerCore,
    ValidationFailure,
)


class ReadingsBody(BaseModel):
    readings: list[dict] = Field(..., max_length=100)


class ClinicalBody(BaseModel):
    fields: dict


class ScheduleBody(BaseModel):
    interval_min: int
    resting_window: list[str]


class UserBody(BaseModel):
    user_id: str
    role: str
    linked_patients: list[str] = []


class PatientBody(BaseModel):
    patient_id: str
    clinical: dict = {}


def create_app(core: ServerCore, dashboard_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="pulseguard server", version="1")
    app.state.core = core

    def current_principal(request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise HTTPException(401, "missing bearer token")
        principal = core.principal_for_token(header[7:].strip())
        if principal is None:
            raise HTTPException(401, "unknown token")
        return principal

    def require(principal: Principal, action: str, patient_id: str | None) -> None:
        if not authorize(principal, action, patient_id):
            raise HTTPException(403, f"{principal.role} may not {action} for {patient_id}")

    @app.exception_handler(ValidationFailure)
    async def _validation_handler(request, exc: ValidationFailure):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": exc.problems})

    @app.exception_handler(NotFoundError)
    async def _notfound_handler(request, exc: NotFoundError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(ConflictError)
    async def _conflict_handler(request, exc: ConflictError):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    # -- readings ------------------------------------------------------------

    @app.post("/api/v1/readings")
    def post_readings(body: ReadingsBody, principal: Principal = Depends(current_principal)):
        for doc in body.readings:
            require(principal, "write_readings", doc.get("patient_id"))
        results = core.store_readings(body.readings)
        return {"results": results}

    @app.get("/api/v1/patients/{patient_id}/readings")
    def get_readings(
        patient_id: str,
        from_ms: int | None = Query(default=None, alias="from"),
        to_ms: int | None = Query(default=None, alias="to"),
        principal: Principal = Depends(current_principal),
    ):
        require(principal, "read_readings", patient_id)
        return {"readings": core.list_readings(patient_id, from_ms, to_ms)}

    @app.get("/api/v1/patients/{patient_id}/statistics")
    def get_statistics(
        patient_id: str,
        from_ms: int | None = Query(default=None, alias="from"),
        to_ms: int | None = Query(default=None, alias="to"),
        principal: Principal = Depends(current_principal),
    ):
        require(principal, "read_readings", patient_id)
        return core.query_statistics(patient_id, from_ms, to_ms)

    # -- alerts ----------------------------------------------------------------

    @app.get("/api/v1/patients/{patient_id}/alerts")
    def get_alerts(patient_id: str, principal: Principal = Depends(current_principal)):
        require(principal, "read_alerts", patient_id)
        return {"alerts": core.list_alerts(patient_id)}

    @app.post("/api/v1/alerts/{alert_id}/ack")
    def ack_alert(alert_id: str, principal: Principal = Depends(current_principal)):
        patient_id = core.alert_patient_id(alert_id)
        if patient_id is None:
            raise HTTPException(404, f"alert {alert_id}")
        require(principal, "ack_alert", patient_id)
        return core.ack_alert(alert_id, principal)

    # -- clinical & schedule ------------------------------------------------------

    @app.put("/api/v1/patients/{patient_id}/clinical")
    def put_clinical(
        patient_id: str,
        body: ClinicalBody,
        principal: Principal = Depends(current_principal),
    ):
        require(principal, "enter_clinical_data", patient_id)
        return core.enter_clinical_data(patient_id, body.fields, entered_by=principal.user_id)

    @app.get("/api/v1/patients/{patient_id}/clinical")
    def get_clinical(patient_id: str, principal: Principal = Depends(current_principal)):
        require(principal, "read_readings", patient_id)
        patient = core.get_patient(patient_id)
        return {
            "patient_id": patient_id,
            "version": patient["clinical_version"],
            "fields": core.current_clinical(patient_id),
            "last_risk": patient.get("last_risk"),
        }

    @app.get("/api/v1/patients/{patient_id}/clinical/history")
    def get_clinical_history(
        patient_id: str, principal: Principal = Depends(current_principal)
    ):
        require(principal, "read_readings", patient_id)
        return {"versions": core.clinical_history(patient_id)}

    @app.put("/api/v1/patients/{patient_id}/schedule")
    def put_schedule(
        patient_id: str,
        body: ScheduleBody,
        principal: Principal = Depends(current_principal),
    ):
        require(principal, "edit_schedule", patient_id)
        return core.put_schedule(
            patient_id,
            {"interval_min": body.interval_min, "resting_window": body.resting_window},
        )

    @app.get("/api/v1/patients/{patient_id}/schedule")
    def get_schedule(patient_id: str, principal: Principal = Depends(current_principal)):
        require(principal, "read_readings", patient_id)
        return core.get_schedule(patient_id)

    # -- risk ---------------------------------------------------------------------

    @app.post("/api/v1/patients/{patient_id}/risk-score")
    def risk_score(patient_id: str, principal: Principal = Depends(current_principal)):
        require(principal, "run_risk_score", patient_id)
        return core.risk_score(patient_id)

    # -- notifications ---------------------------------------------------------------

    @app.get("/api/v1/notifications/stream")
    def notifications_stream(
        since: int = 0,
        timeout_s: float = 25.0,
        principal: Principal = Depends(current_principal),
    ):
        # deliveries exist only for clinicians; others long-poll an empty feed
        rows = core.wait_deliveries(principal.user_id, since, timeout_s)
        return {"deliveries": rows}

    # -- admin --------------------------------------------------------------------------

    @app.post("/api/v1/admin/users")
    def create_user(body: UserBody, principal: Principal = Depends(current_principal)):
        require(principal, "manage_users", None)
        token = core.create_user(body.user_id, body.role, body.linked_patients)
        return {"user_id": body.user_id, "token": token}

    @app.post("/api/v1/admin/patients")
    def create_patient(body: PatientBody, principal: Principal = Depends(current_principal)):
        require(principal, "manage_users", None)
        return core.create_patient(body.patient_id, body.clinical)

    if dashboard_dir is not None and Path(dashboard_dir).is_dir():
        app.mount("/dashboard", StaticFiles(directory=str(dashboard_dir), html=True))

    return app


def create_app_from_config(config: ServerConfig, dashboard_dir=None) -> FastAPI:
    return create_app(ServerCore(config), dashboard_dir)

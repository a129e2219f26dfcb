"""Drive server, gateways and devices as separate processes; emit a report.

Every component speaks its real interface: devices talk the encrypted frame
protocol over sockets to gateways, gateways speak the REST API to the
server. The report splits into a ``deterministic`` section (identical
across replays of the same scenario + seed) and a ``timing`` section
(wall-clock dependent diagnostics).
"""

from __future__ import annotations

import json
import secrets
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import yaml

from pulseguard.errors import PulseguardError
from pulseguard.scenario.spec import Scenario

HEALTH_WAIT_S = 15.0


class ScenarioAborted(PulseguardError):
    """A component failed to start or exited abnormally."""


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_health(url: str, timeout_s: float) -> None:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        try:
            if httpx.get(f"{url}/healthz", timeout=1.0).status_code == 200:
                return
        except httpx.HTTPError:
            pass
        time.sleep(0.1)
    raise ScenarioAborted(f"server at {url} did not become healthy")


def _pairing_code(scenario_seed: int, index: int) -> str:
    return f"{(scenario_seed * 7919 + index) % 1_000_000:06d}"


def run_scenario(scenario: Scenario, workdir: str | Path, keep_wall_budget_s: float | None = None) -> dict:
    """Run to completion; the report keeps the server alive for follow-up
    queries until the caller invokes finish(report)."""
    work = Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    wall_started = time.monotonic()
    procs: list[subprocess.Popen] = []
    try:
        report = _run(scenario, work, procs, wall_started, keep_wall_budget_s)
        procs.remove(report["_server_proc"])  # ownership moves to the caller
        return report
    finally:
        for p in procs:
            if p.poll() is None:
                p.terminate()
        for p in procs:
            try:
                p.wait(timeout=10)
            except subprocess.TimeoutExpired:
                p.kill()


def _run(scenario, work, procs, wall_started, keep_wall_budget_s):
    admin_token = secrets.token_hex(16)

    # risk model (trained deterministically when requested)
    model_path = None
    if scenario.risk_model:
        from pulseguard.risk.model import save_model, train
        from pulseguard.vitals.cohort import gen_training_cohort

        cohort = gen_training_cohort(
            int(scenario.risk_model.get("train_n", 4000)),
            int(scenario.risk_model.get("train_seed", 1)),
        )
        model = train(cohort, seed=int(scenario.risk_model.get("train_seed", 1)))
        model_path = work / "risk-model.json"
        save_model(model, model_path)

    # -- server -----------------------------------------------------------------
    server_port = _free_port()
    server_url = f"http://127.0.0.1:{server_port}"
    server_cfg = {
        "store_path": str(work / "server.db"),
        "listen_host": "127.0.0.1",
        "listen_port": server_port,
        "alert_rule": scenario.alert_rule,
        "bootstrap_token": admin_token,
    }
    if model_path:
        server_cfg["risk_model_path"] = str(model_path)
    cfg_path = work / "server.yaml"
    cfg_path.write_text(yaml.safe_dump(server_cfg), encoding="utf-8")
    server_proc = subprocess.Popen(
        [sys.executable, "-m", "pulseguard.server.cli", "--config", str(cfg_path)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.STDOUT,
    )
    procs.append(server_proc)
    _wait_health(server_url, HEALTH_WAIT_S)

    admin = httpx.Client(
        base_url=server_url, headers={"Authorization": f"Bearer {admin_token}"}, timeout=10.0
    )

    # -- users, patients ----------------------------------------------------------
    clinician_id = "dr-1"
    patient_ids = [p.profile.patient_id for p in scenario.patients]
    resp = admin.post(
        "/api/v1/admin/users",
        json={"user_id": clinician_id, "role": "clinician", "linked_patients": patient_ids},
    )
    clinician_token = resp.json()["token"]
    patient_tokens: dict[str, str] = {}
    for p in scenario.patients:
        pid = p.profile.patient_id
        clinical = {
            "age_years": p.profile.age_years,
            "weight_kg": p.profile.weight_kg,
            "height_cm": p.profile.height_cm,
            "race": p.profile.race,
            "smoker": p.profile.smoker,
            "cholesterol_mg_dl": p.profile.cholesterol_mg_dl,
            "gestational_age_weeks": p.profile.gestational_age_weeks,
            "proteinuria": p.profile.proteinuria,
            "enrolled_at_ms": p.profile.enrolled_at_ms,
        }
        r = admin.post(
            "/api/v1/admin/patients", json={"patient_id": pid, "clinical": clinical}
        )
        if r.status_code != 200:
            raise ScenarioAborted(f"create patient {pid}: {r.status_code} {r.text}")
        r = admin.post(
            "/api/v1/admin/users",
            json={"user_id": f"u-{pid}", "role": "patient", "linked_patients": [pid]},
        )
        patient_tokens[pid] = r.json()["token"]

    # -- gateways --------------------------------------------------------------------
    gateway_ports: dict[str, int] = {}
    stats_files: dict[str, Path] = {}
    for idx, p in enumerate(scenario.patients):
        pid = p.profile.patient_id
        port_file = work / f"gw-{pid}.port"
        stats_files[pid] = work / f"gw-{pid}-stats.json"
        args = [
            sys.executable, "-m", "pulseguard.gateway.cli",
            "--listen", "127.0.0.1:0",
            "--server", server_url,
            "--patient", pid,
            "--token", patient_tokens[pid],
            "--store", str(work / f"gw-{pid}.ndjson"),
            "--pairing-code", _pairing_code(scenario.seed, idx),
            "--t0-ms", str(scenario.t0_ms),
            "--time-scale", str(scenario.time_scale),
            "--stats-file", str(stats_files[pid]),
            "--announce-port-file", str(port_file),
        ]
        if p.offline_intervals_h:
            args += ["--offline", ",".join(f"{a}-{b}" for a, b in p.offline_intervals_h)]
        procs.append(
            subprocess.Popen(args, stdout=subprocess.DEVNULL, stderr=subprocess.STDOUT)
        )
        deadline = time.monotonic() + 10.0
        while not port_file.exists() and time.monotonic() < deadline:
            time.sleep(0.05)
        if not port_file.exists():
            raise ScenarioAborted(f"gateway for {pid} did not announce a port")
        gateway_ports[pid] = int(port_file.read_text())

    # -- devices ------------------------------------------------------------------------
    device_procs: dict[str, subprocess.Popen] = {}
    report_files: dict[str, Path] = {}
    for idx, p in enumerate(scenario.patients):
        pid = p.profile.patient_id
        profile_path = work / f"profile-{pid}.yaml"
        profile_path.write_text(yaml.safe_dump(p.profile_doc), encoding="utf-8")
        report_files[pid] = work / f"device-{pid}.json"
        args = [
            sys.executable, "-m", "pulseguard.device.cli",
            "--scenario", str(profile_path),
            "--gateway", f"127.0.0.1:{gateway_ports[pid]}",
            "--interval-min", str(p.device.interval_min),
            "--resting-window", f"{p.device.resting_window[0]}-{p.device.resting_window[1]}",
            "--time-scale", str(scenario.time_scale),
            "--seed", str(scenario.seed * 1000 + idx),
            "--duration-h", str(scenario.duration_h),
            "--start-at-ms", str(scenario.t0_ms),
            "--noise-sigma", str(p.device.noise_sigma_counts),
            "--transfer-offset", str(p.device.transfer_offset),
            "--transfer-scale", str(p.device.transfer_scale),
            "--pairing-code", _pairing_code(scenario.seed, idx),
            "--frame-loss", str(p.device.frame_loss),
            "--report", str(report_files[pid]),
        ]
        if p.device.artifact_every_n:
            args += ["--artifact-every-n", str(p.device.artifact_every_n)]
        device_procs[pid] = subprocess.Popen(
            args, stdout=subprocess.DEVNULL, stderr=subprocess.STDOUT
        )
        procs.append(device_procs[pid])

    # -- wait for the simulated day to elapse ----------------------------------------------
    run_wall_s = scenario.duration_h * 3600.0 / scenario.time_scale
    budget = keep_wall_budget_s or (run_wall_s + 120.0)
    deadline = time.monotonic() + budget
    for pid, proc in device_procs.items():
        remaining = max(1.0, deadline - time.monotonic())
        try:
            proc.wait(timeout=remaining)
        except subprocess.TimeoutExpired:
            raise ScenarioAborted(f"device for {pid} exceeded the wall budget")
        if proc.returncode != 0:
            raise ScenarioAborted(f"device for {pid} exited with {proc.returncode}")

    # let gateways finish uploading, then stop them
    time.sleep(1.0)
    for p in procs:
        if p.poll() is None and p is not server_proc:
            p.terminate()
    for p in procs:
        if p is server_proc:
            continue
        try:
            p.wait(timeout=15)
        except subprocess.TimeoutExpired:
            p.kill()

    # -- collect -------------------------------------------------------------------------------
    device_reports = {
        pid: json.loads(path.read_text(encoding="utf-8"))
        for pid, path in report_files.items()
    }
    gateway_stats = {
        pid: json.loads(path.read_text(encoding="utf-8"))
        for pid, path in stats_files.items()
    }

    clin = httpx.Client(
        base_url=server_url,
        headers={"Authorization": f"Bearer {clinician_token}"},
        timeout=10.0,
    )
    patients_section = {}
    alerts_section = []
    risk_section = {}
    duplicates = 0
    for p in scenario.patients:
        pid = p.profile.patient_id
        readings = clin.get(f"/api/v1/patients/{pid}/readings").json()["readings"]
        keys = [r["id"] for r in readings]
        duplicates += len(keys) - len(set(keys))
        patients_section[pid] = {
            "readings_stored": len(readings),
            "readings": [
                {
                    "id": r["id"],
                    "timestamp_ms": r["timestamp_ms"],
                    "sbp_mmhg": r["sbp_mmhg"],
                    "dbp_mmhg": r["dbp_mmhg"],
                    "hr_bpm": r["hr_bpm"],
                    "resting": r["resting"],
                }
                for r in sorted(readings, key=lambda x: x["timestamp_ms"])
            ],
            "statistics": _strip_stats(clin.get(f"/api/v1/patients/{pid}/statistics").json()),
        }
        for alert in clin.get(f"/api/v1/patients/{pid}/alerts").json()["alerts"]:
            alerts_section.append(
                {
                    "patient_id": pid,
                    "alert_id": alert["alert_id"],
                    "raised_at_ms": alert["raised_at_ms"],
                    "condition": alert["condition"],
                    "evidence_keys": [e["device_id"] + ":" + str(e["timestamp_ms"])
                                      for e in alert["evidence"]],
                    "evidence_gap_ms": alert["evidence"][1]["timestamp_ms"]
                    - alert["evidence"][0]["timestamp_ms"],
                }
            )
        if model_path:
            r = clin.post(f"/api/v1/patients/{pid}/risk-score")
            if r.status_code == 200:
                risk_section[pid] = round(r.json()["probability"], 9)

    emitted = sum(d["readings_emitted"] for d in device_reports.values())
    stored = sum(g["counters"]["stored"] for g in gateway_stats.values())
    discarded = sum(g["counters"]["discarded"] for g in gateway_stats.values())
    server_stored = sum(v["readings_stored"] for v in patients_section.values())

    alerts_section.sort(key=lambda a: (a["patient_id"], a["raised_at_ms"]))
    report = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "deterministic": {
            "patients": patients_section,
            "alerts": alerts_section,
            "risk_scores": risk_section,
            "conservation": {
                "readings_emitted": emitted,
                "readings_stored": stored,
                "readings_discarded": discarded,
                "server_stored": server_stored,
                "holds": emitted == stored + discarded and server_stored == stored,
            },
            "duplicates": duplicates,
            "local_notifications": {
                pid: g["counters"]["local_notifications"] for pid, g in gateway_stats.items()
            },
        },
        "timing": {
            "wall_seconds": round(time.monotonic() - wall_started, 3),
            "device_diagnostics": device_reports,
            "gateway_counters": {
                pid: {
                    k: v
                    for k, v in g["counters"].items()
                    if k in ("replays_rejected", "auth_failures", "unknown_device")
                }
                for pid, g in gateway_stats.items()
            },
        },
        "server_url": server_url,
        "tokens": {"clinician": clinician_token, "admin": admin_token},
    }
    report["_server_proc"] = server_proc  # the caller may keep querying, then stop it
    return report


def _strip_stats(stats: dict) -> dict:
    stats.pop("patient_id", None)
    return stats


def finish(report: dict) -> None:
    """Stop the server process kept alive for post-run queries."""
    proc = report.pop("_server_proc", None)
    if proc is not None and proc.poll() is None:
        proc.terminate()
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()

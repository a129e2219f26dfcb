"""Scenario files: patients, device configs, connectivity scripts.

YAML, documented in docs/scenario-format.md; two committed examples live in
scenarios/. Replaying the same scenario file and seed yields an identical
deterministic report section.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from pulseguard.errors import DomainError
from pulseguard.vitals.params import PatientProfile
from pulseguard.vitals.profile_files import profile_from_dict


@dataclass
class DeviceSpec:
    interval_min: int = 15
    resting_window: tuple[str, str] = ("22:00", "06:00")
    noise_sigma_counts: float = 200.0
    frame_loss: float = 0.0
    artifact_every_n: int | None = None
    transfer_offset: float = 0.0
    transfer_scale: float = 100.0


@dataclass
class PatientSpec:
    profile: PatientProfile
    profile_doc: dict
    device: DeviceSpec
    offline_intervals_h: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class Scenario:
    name: str
    seed: int
    t0_ms: int
    duration_h: float
    time_scale: float
    patients: list[PatientSpec]
    alert_rule: dict = field(default_factory=dict)
    risk_model: dict | None = None  # {"train_n": int, "train_seed": int}

    def __post_init__(self):
        if self.time_scale < 1.0:
            raise DomainError("time_scale must be >= 1")
        if not self.patients:
            raise DomainError("scenario needs at least one patient")
        ids = [p.profile.patient_id for p in self.patients]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate patient ids in scenario")


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        patients = []
        t0_ms = int(doc["t0_ms"])
        for pdoc in doc["patients"]:
            profile_doc = dict(pdoc["profile"])
            profile_doc.setdefault("enrolled_at_ms", t0_ms)
            profile = profile_from_dict(profile_doc)
            ddoc = pdoc.get("device", {})
            device = DeviceSpec(
                interval_min=int(ddoc.get("interval_min", 15)),
                resting_window=tuple(ddoc.get("resting_window", ("22:00", "06:00"))),
                noise_sigma_counts=float(ddoc.get("noise_sigma_counts", 200.0)),
                frame_loss=float(ddoc.get("frame_loss", 0.0)),
                artifact_every_n=ddoc.get("artifact_every_n"),
                transfer_offset=float(ddoc.get("transfer_offset", 0.0)),
                transfer_scale=float(ddoc.get("transfer_scale", 100.0)),
            )
            offline = [tuple(map(float, pair)) for pair in pdoc.get("offline_h", [])]
            patients.append(
                PatientSpec(
                    profile=profile,
                    profile_doc=profile_doc,
                    device=device,
                    offline_intervals_h=offline,
                )
            )
        return Scenario(
            name=str(doc.get("name", "unnamed")),
            seed=int(doc.get("seed", 0)),
            t0_ms=t0_ms,
            duration_h=float(doc["duration_h"]),
            time_scale=float(doc.get("time_scale", 1.0)),
            patients=patients,
            alert_rule=dict(doc.get("alert_rule", {})),
            risk_model=doc.get("risk_model"),
        )
    except KeyError as exc:
        raise DomainError(f"scenario document missing field {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise DomainError(f"scenario file {path} is not a mapping")
    return scenario_from_dict(doc)

"""Crash-tolerant local reading store.

Append-only newline-delimited JSON log. Two record types::

    {"t": "r", "d": {reading...}}   reading persisted (pending upload)
    {"t": "u", "id": "..."}         reading marked uploaded

Replaying the log on startup reconstructs the exact pending set, so a
reading is never lost once its append has been fsynced (which happens
before the device gets its Ack). ``compact()`` rewrites the log to one
record per reading.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from pulseguard.pipeline.reading import BpReading


class LocalStore:
    def __init__(self, path: str | Path, fsync: bool = True):
        self.path = Path(path)
        self._fsync = fsync
        self._lock = threading.RLock()
        self._readings: dict[str, dict] = {}   # id -> reading doc, insertion-ordered
        self._uploaded: set[str] = set()
        self._replay()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _replay(self) -> None:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    continue  # torn tail write from a crash
                if rec.get("t") == "r":
                    doc = rec["d"]
                    self._readings[_doc_id(doc)] = doc
                elif rec.get("t") == "u":
                    self._uploaded.add(rec["id"])
                    if rec.get("s") == "uploaded":  # compacted form marker
                        pass

    def _append(self, rec: dict) -> None:
        self._fh.write(json.dumps(rec, sort_keys=True) + "\n")
        self._fh.flush()
        if self._fsync:
            os.fsync(self._fh.fileno())

    def append_pending(self, reading: BpReading) -> str:
        """Durably persist a reading; returns its id. Idempotent per id."""
        doc = reading.to_dict()
        rid = _doc_id(doc)
        with self._lock:
            if rid not in self._readings:
                self._readings[rid] = doc
                self._append({"t": "r", "d": doc})
        return rid

    def mark_uploaded(self, ids: list[str]) -> None:
        with self._lock:
            for rid in ids:
                if rid in self._readings and rid not in self._uploaded:
                    self._uploaded.add(rid)
                    self._append({"t": "u", "id": rid})

    def pending_in_order(self) -> list[dict]:
        with self._lock:
            return [d for rid, d in self._readings.items() if rid not in self._uploaded]

    def all_readings(self) -> list[dict]:
        with self._lock:
            return list(self._readings.values())

    def counts(self) -> dict:
        with self._lock:
            total = len(self._readings)
            uploaded = len(self._uploaded & set(self._readings))
            return {"stored": total, "uploaded": uploaded, "pending": total - uploaded}

    def compact(self) -> None:
        """Rewrite the log to its logical content (one line per record)."""
        with self._lock:
            tmp = self.path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                for rid, doc in self._readings.items():
                    fh.write(json.dumps({"t": "r", "d": doc}, sort_keys=True) + "\n")
                    if rid in self._uploaded:
                        fh.write(json.dumps({"t": "u", "id": rid}, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._fh.close()
            os.replace(tmp, self.path)
            self._fh = open(self.path, "a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            self._fh.close()


def _doc_id(doc: dict) -> str:
    return f"{doc['device_id']}:{doc['timestamp_ms']}"

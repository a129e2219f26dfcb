"""Embedded transactional key-value store.

Backed by sqlite3 (stdlib), namespaced keys, JSON values. Key layout:

    patients/<patient_id>                      patient record (clinical versions, schedule)
    readings/<patient_id>/<ts:020d>/<dev_hex>  stored reading
    reading_keys/<dev_hex>:<ts>                idempotency key -> reading id
    alerts/<patient_id>/<alert_id>             alert record
    users/<user_id>                            principal record
    tokens/<sha256(token)>                     token hash -> user_id
    profiles/<patient_id>/<version:06d>        clinical history versions
    deliveries/<user_id>/<delivery_id:012d>    alert fan-out records
    meta/...                                   counters, bootstrap state

The zero-padded timestamp/version segments make prefix scans return
time-ordered rows. Swap in another backend by reimplementing this class.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from contextlib import contextmanager
from pathlib import Path


class KVStore:
    def __init__(self, path: str | Path = ":memory:"):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        if str(path) != ":memory:":
            self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute(
            "CREATE TABLE IF NOT EXISTS kv ("
            " ns TEXT NOT NULL, k TEXT NOT NULL, v TEXT NOT NULL,"
            " PRIMARY KEY (ns, k))"
        )
        self._conn.commit()
        self._lock = threading.RLock()

    def close(self) -> None:
        self._conn.close()

    @contextmanager
    def transaction(self):
        """Serialised read-modify-write scope; commits on exit, rolls back on error."""
        with self._lock:
            try:
                yield self
                self._conn.commit()
            except BaseException:
                self._conn.rollback()
                raise

    def get(self, ns: str, key: str):
        with self._lock:
            row = self._conn.execute(
                "SELECT v FROM kv WHERE ns = ? AND k = ?", (ns, key)
            ).fetchone()
        return json.loads(row[0]) if row else None

    def put(self, ns: str, key: str, value) -> None:
        with self._lock:
            self._conn.execute(
                "INSERT INTO kv (ns, k, v) VALUES (?, ?, ?)"
                " ON CONFLICT(ns, k) DO UPDATE SET v = excluded.v",
                (ns, key, json.dumps(value, sort_keys=True)),
            )

    def delete(self, ns: str, key: str) -> None:
        with self._lock:
            self._conn.execute("DELETE FROM kv WHERE ns = ? AND k = ?", (ns, key))

    def scan(self, ns: str, prefix: str = "") -> list[tuple[str, dict]]:
        """Key-ordered (key, value) pairs with the given key prefix."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT k, v FROM kv WHERE ns = ? AND k >= ? AND k < ? ORDER BY k",
                (ns, prefix, prefix + "￿"),
            ).fetchall() if prefix else self._conn.execute(
                "SELECT k, v FROM kv WHERE ns = ? ORDER BY k", (ns,)
            ).fetchall()
        return [(k, json.loads(v)) for k, v in rows]

    def next_counter(self, name: str) -> int:
        """Monotone counter; must run inside a transaction."""
        current = self.get("meta", f"counter:{name}") or 0
        value = current + 1
        self.put("meta", f"counter:{name}", value)
        return value

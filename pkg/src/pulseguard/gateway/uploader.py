"""Store-and-forward uploader with scripted connectivity and backoff."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import httpx

from pulseguard.gateway.store import LocalStore

logger = logging.getLogger(__name__)

BATCH_LIMIT = 100
BACKOFF_START_MS = 1_000
BACKOFF_CAP_MS = 300_000  # 5 minutes logical


@dataclass
class ConnectivityState:
    """Scripted offline intervals plus failure-driven exponential backoff."""

    offline_intervals_ms: list[tuple[int, int]] = field(default_factory=list)
    backoff_ms: int = BACKOFF_START_MS
    retry_at_ms: int = 0

    def scripted_online(self, now_ms: int) -> bool:
        return not any(a <= now_ms < b for a, b in self.offline_intervals_ms)

    def can_attempt(self, now_ms: int) -> bool:
        return self.scripted_online(now_ms) and now_ms >= self.retry_at_ms

    def record_failure(self, now_ms: int) -> None:
        self.retry_at_ms = now_ms + self.backoff_ms
        self.backoff_ms = min(self.backoff_ms * 2, BACKOFF_CAP_MS)

    def record_success(self) -> None:
        self.backoff_ms = BACKOFF_START_MS
        self.retry_at_ms = 0


@dataclass
class UploadReport:
    attempted: int = 0
    uploaded: int = 0
    duplicates: int = 0
    failed: bool = False


class Uploader:
    """POSTs pending readings in FIFO batches; marks uploaded on server ack."""

    def __init__(self, server_url: str, token: str, client: httpx.Client | None = None):
        self._client = client or httpx.Client(base_url=server_url, timeout=10.0)
        self._client.headers["Authorization"] = f"Bearer {token}"

    def close(self) -> None:
        self._client.close()

    def flush(self, store: LocalStore, connectivity: ConnectivityState, now_ms: int) -> UploadReport:
        """Upload everything pending, batch by batch, while allowed."""
        report = UploadReport()
        if not connectivity.can_attempt(now_ms):
            return report
        while True:
            pending = store.pending_in_order()
            if not pending:
                break
            batch = pending[:BATCH_LIMIT]
            report.attempted += len(batch)
            try:
                resp = self._client.post("/api/v1/readings", json={"readings": batch})
            except httpx.HTTPError as exc:
                logger.info("upload failed, backing off: %s", exc)
                connectivity.record_failure(now_ms)
                report.failed = True
                return report
            if resp.status_code != 200:
                logger.warning("server rejected batch: %s %s", resp.status_code, resp.text)
                connectivity.record_failure(now_ms)
                report.failed = True
                return report
            results = resp.json()["results"]
            # the server acknowledges every entry, marking duplicates
            store.mark_uploaded([r["id"] for r in results])
            report.uploaded += sum(1 for r in results if not r["duplicate"])
            report.duplicates += sum(1 for r in results if r["duplicate"])
            connectivity.record_success()
        return report

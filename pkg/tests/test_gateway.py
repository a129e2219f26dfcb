import json

import httpx
from conftest import T0, make_profile

from pulseguard.alerts.rules import AlertRule, evaluate
from pulseguard.gateway.ingest import GatewayIngest, IngestOutcome
from pulseguard.gateway.store import LocalStore
from pulseguard.gateway.uploader import BACKOFF_CAP_MS, ConnectivityState, Uploader
from pulseguard.pipeline.reading import BpReading
from pulseguard.protocol.frames import ReadingBatch, encode_frame
from pulseguard.protocol.session import session_pair
from pulseguard.vitals.waveform import ArtifactKind, inject_artifact, synth_waveform

HOUR = 3_600_000


def make_reading(ts, sbp=120.0, dbp=80.0, patient="P1"):
    return BpReading(patient, b"\x0c" * 8, ts, sbp, dbp, 75.0, False, 0.9)


class TestLocalStore:
    def test_replay_after_restart(self, tmp_path):
        path = tmp_path / "log.ndjson"
        store = LocalStore(path, fsync=False)
        store.append_pending(make_reading(T0))
        store.append_pending(make_reading(T0 + HOUR))
        store.mark_uploaded([make_reading(T0).idempotency_key])
        store.close()
        reopened = LocalStore(path, fsync=False)
        assert reopened.counts() == {"stored": 2, "uploaded": 1, "pending": 1}
        assert reopened.pending_in_order()[0]["timestamp_ms"] == T0 + HOUR

    def test_torn_tail_line_ignored(self, tmp_path):
        path = tmp_path / "log.ndjson"
        store = LocalStore(path, fsync=False)
        store.append_pending(make_reading(T0))
        store.close()
        with open(path, "a", encoding="utf-8") as fh:
            fh.write('{"t": "r", "d": {"trunc')  # crash mid-write
        reopened = LocalStore(path, fsync=False)
        assert reopened.counts()["stored"] == 1

    def test_fifo_order(self, tmp_path):
        store = LocalStore(tmp_path / "log.ndjson", fsync=False)
        for k in range(10):
            store.append_pending(make_reading(T0 + k * HOUR))
        pending = store.pending_in_order()
        assert [p["timestamp_ms"] for p in pending] == [T0 + k * HOUR for k in range(10)]

    def test_compact_preserves_state(self, tmp_path):
        path = tmp_path / "log.ndjson"
        store = LocalStore(path, fsync=False)
        for k in range(5):
            store.append_pending(make_reading(T0 + k * HOUR))
        store.mark_uploaded([make_reading(T0).idempotency_key,
                            make_reading(T0 + HOUR).idempotency_key])
        before = store.counts()
        store.compact()
        assert store.counts() == before
        store.close()
        assert LocalStore(path, fsync=False).counts() == before

    def test_append_idempotent(self, tmp_path):
        store = LocalStore(tmp_path / "log.ndjson", fsync=False)
        store.append_pending(make_reading(T0))
        store.append_pending(make_reading(T0))
        assert store.counts()["stored"] == 1


def build_link(tmp_path):
    profile = make_profile()
    device_id = profile.default_device_id()
    dev_sess, gw_sess = session_pair(device_id, bytes([9]) * 32, bytes([8]) * 16)
    store = LocalStore(tmp_path / "gw.ndjson", fsync=False)
    ingest = GatewayIngest(patient_id="P1", store=store)
    ingest.sessions[device_id] = gw_sess
    return profile, device_id, dev_sess, ingest


def batch_frame(profile, dev_sess, at_ms, corrupt=None, noise=150.0, seed=3):
    w = synth_waveform(profile, at_ms, 10.0, noise, seed=seed)
    if corrupt is not None:
        w = inject_artifact(w, corrupt, seed=seed)
    batch = ReadingBatch(w.start_time_ms, w.sample_rate_hz, w.samples, 90, False)
    return encode_frame(batch, dev_sess)


class TestIngest:
    def test_valid_frame_stored_and_acked(self, tmp_path):
        profile, _, dev_sess, ingest = build_link(tmp_path)
        result = ingest.ingest_frame(batch_frame(profile, dev_sess, T0))
        assert result.outcome is IngestOutcome.STORED
        assert result.ack is not None
        assert ingest.store.counts()["stored"] == 1
        assert 115 < result.reading.sbp_mmhg < 125

    def test_rejected_waveform_acked_but_discarded(self, tmp_path):
        profile, _, dev_sess, ingest = build_link(tmp_path)
        frame = batch_frame(profile, dev_sess, T0, corrupt=ArtifactKind.FLATLINE)
        result = ingest.ingest_frame(frame)
        assert result.outcome is IngestOutcome.DISCARDED
        assert result.ack is not None
        assert ingest.store.counts()["stored"] == 0
        assert ingest.counters["discarded"] == 1

    def test_unknown_device_no_ack(self, tmp_path):
        profile, device_id, dev_sess, ingest = build_link(tmp_path)
        del ingest.sessions[device_id]
        result = ingest.ingest_frame(batch_frame(profile, dev_sess, T0))
        assert result.outcome is IngestOutcome.UNKNOWN_DEVICE and result.ack is None

    def test_tampered_frame_no_ack(self, tmp_path):
        profile, _, dev_sess, ingest = build_link(tmp_path)
        frame = bytearray(batch_frame(profile, dev_sess, T0))
        frame[40] ^= 0xFF
        result = ingest.ingest_frame(bytes(frame))
        assert result.outcome is IngestOutcome.AUTH_FAILURE and result.ack is None

    def test_replay_no_ack_no_double_store(self, tmp_path):
        profile, _, dev_sess, ingest = build_link(tmp_path)
        frame = batch_frame(profile, dev_sess, T0)
        assert ingest.ingest_frame(frame).outcome is IngestOutcome.STORED
        replay = ingest.ingest_frame(frame)
        assert replay.outcome is IngestOutcome.REPLAY and replay.ack is None
        assert ingest.store.counts()["stored"] == 1

    def test_local_notification_matches_alert_engine(self, tmp_path):
        profile, _, dev_sess, ingest = build_link(tmp_path)
        hot = make_profile(155, 98, 80)
        ingest.ingest_frame(batch_frame(hot, dev_sess, T0, seed=5))
        assert ingest.counters["local_notifications"] == 0  # single reading: no pair
        ingest.ingest_frame(batch_frame(hot, dev_sess, T0 + 6 * HOUR, seed=6))
        assert ingest.counters["local_notifications"] == 1
        # and the shared predicate agrees
        history = sorted((BpReading.from_dict(d) for d in ingest.store.all_readings()),
                         key=lambda r: r.timestamp_ms)
        assert evaluate(history, AlertRule()) is not None

    def test_empty_history_no_notification(self, tmp_path):
        _, _, _, ingest = build_link(tmp_path)
        assert ingest.local_alert_check([]) is None

    def test_single_elevated_reading_no_notification(self, tmp_path):
        _, _, _, ingest = build_link(tmp_path)
        assert ingest.local_alert_check([make_reading(T0, 160, 100)]) is None


class FakeServer:
    """Minimal idempotent /api/v1/readings endpoint for uploader tests."""

    def __init__(self, fail_times=0):
        self.seen: dict[str, dict] = {}
        self.batches: list[list[str]] = []
        self.fail_times = fail_times

    def handler(self, request: httpx.Request) -> httpx.Response:
        if self.fail_times > 0:
            self.fail_times -= 1
            return httpx.Response(503, json={"detail": "down"})
        body = json.loads(request.content)
        results = []
        batch_ids = []
        for doc in body["readings"]:
            rid = f"{doc['device_id']}:{doc['timestamp_ms']}"
            batch_ids.append(rid)
            duplicate = rid in self.seen
            self.seen[rid] = doc
            results.append({"id": rid, "duplicate": duplicate})
        self.batches.append(batch_ids)
        return httpx.Response(200, json={"results": results})


def make_uploader(server: FakeServer) -> Uploader:
    client = httpx.Client(
        transport=httpx.MockTransport(server.handler), base_url="http://fake"
    )
    return Uploader("http://fake", token="tok", client=client)


class TestUploader:
    def test_batching_250_into_3(self, tmp_path):
        store = LocalStore(tmp_path / "log.ndjson", fsync=False)
        for k in range(250):
            store.append_pending(make_reading(T0 + k * 60_000))
        server = FakeServer()
        uploader = make_uploader(server)
        report = uploader.flush(store, ConnectivityState(), now_ms=T0)
        assert [len(b) for b in server.batches] == [100, 100, 50]
        assert report.uploaded == 250
        assert store.counts()["pending"] == 0
        # FIFO order preserved end to end
        flat = [rid for b in server.batches for rid in b]
        assert flat == [make_reading(T0 + k * 60_000).idempotency_key for k in range(250)]

    def test_offline_then_deliver_in_order(self, tmp_path):
        store = LocalStore(tmp_path / "log.ndjson", fsync=False)
        for k in range(30):
            store.append_pending(make_reading(T0 + k * 60_000))
        server = FakeServer()
        uploader = make_uploader(server)
        offline = ConnectivityState(offline_intervals_ms=[(T0, T0 + HOUR)])
        report = uploader.flush(store, offline, now_ms=T0 + 30 * 60_000)
        assert report.attempted == 0 and store.counts()["pending"] == 30
        report = uploader.flush(store, offline, now_ms=T0 + HOUR)
        assert report.uploaded == 30 and store.counts()["pending"] == 0

    def test_crash_before_mark_converges_via_dedup(self, tmp_path):
        path = tmp_path / "log.ndjson"
        store = LocalStore(path, fsync=False)
        for k in range(5):
            store.append_pending(make_reading(T0 + k * 60_000))
        server = FakeServer()
        uploader = make_uploader(server)
        uploader.flush(store, ConnectivityState(), now_ms=T0)
        # crash before the mark hit disk: reopen from a copy without marks
        store2 = LocalStore(path, fsync=False)
        store2._uploaded.clear()
        report = uploader.flush(store2, ConnectivityState(), now_ms=T0)
        assert report.duplicates == 5 and report.uploaded == 0
        assert len(server.seen) == 5
        assert store2.counts()["pending"] == 0  # converged to uploaded

    def test_backoff_grows_and_caps(self, tmp_path):
        store = LocalStore(tmp_path / "log.ndjson", fsync=False)
        store.append_pending(make_reading(T0))
        server = FakeServer(fail_times=100)
        uploader = make_uploader(server)
        connectivity = ConnectivityState()
        now = T0
        delays = []
        for _ in range(12):
            uploader.flush(store, connectivity, now_ms=now)
            delays.append(connectivity.retry_at_ms - now)
            now = connectivity.retry_at_ms
        assert delays[0] == 1_000
        assert delays[1] == 2_000
        assert max(delays) == BACKOFF_CAP_MS
        assert all(d <= BACKOFF_CAP_MS for d in delays)

    def test_failure_leaves_pending(self, tmp_path):
        store = LocalStore(tmp_path / "log.ndjson", fsync=False)
        store.append_pending(make_reading(T0))
        server = FakeServer(fail_times=1)
        uploader = make_uploader(server)
        connectivity = ConnectivityState()
        report = uploader.flush(store, connectivity, now_ms=T0)
        assert report.failed and store.counts()["pending"] == 1
        report = uploader.flush(store, connectivity, now_ms=T0 + connectivity.backoff_ms * 2)
        assert store.counts()["pending"] == 0


class TestGatewayService:
    def test_concurrent_stats_writes_do_not_race(self, tmp_path):
        import threading

        from pulseguard.gateway.service import GatewayService

        service = GatewayService(
            listen_addr=("127.0.0.1", 0),
            server_url="http://127.0.0.1:1",  # never reached
            patient_id="P1",
            token="tok",
            store_path=str(tmp_path / "gw.ndjson"),
            pairing_code="123456",
            t0_ms=0,
            stats_path=str(tmp_path / "stats.json"),
        )
        errors = []

        def hammer():
            try:
                for _ in range(300):
                    service.write_stats()
            except Exception as exc:  # the e2e regression: os.replace raced
                errors.append(exc)

        threads = [threading.Thread(target=hammer) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        assert (tmp_path / "stats.json").exists()
        service.store.close()
        service.uploader.close()


class TestSharedAlertPredicate:
    def test_gateway_matches_alert_engine_on_random_histories(self, tmp_path):
        # one shared predicate: the gateway's advisory check must agree with
        # the server-side engine on every history
        import numpy as np

        from oracles import brute_force_alert_pair

        _, _, _, ingest = build_link(tmp_path)
        rule = AlertRule()
        rng = np.random.default_rng(99)
        for _ in range(10_000):
            n = int(rng.integers(0, 14))
            times = np.sort(rng.integers(T0 - 8 * 24 * HOUR, T0, n))
            history = []
            for i, t in enumerate(times):
                sbp = float(rng.uniform(100, 175))
                dbp = float(rng.uniform(60, min(109.0, sbp - 20)))
                history.append(make_reading(int(t) + i, sbp, dbp))
            engine = evaluate(history, rule)
            gateway_view = ingest.local_alert_check(history)
            assert (engine is None) == (gateway_view is None)
            if engine is not None:
                assert engine.first.timestamp_ms == gateway_view.first.timestamp_ms
                assert engine.second.timestamp_ms == gateway_view.second.timestamp_ms
                oracle = brute_force_alert_pair(history, rule, history[-1].timestamp_ms)
                assert oracle[0].timestamp_ms == engine.first.timestamp_ms

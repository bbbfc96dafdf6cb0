import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient
from jsonschema import Draft202012Validator

from qruntime.api import StaticTokenVerifier, create_app
from qruntime.config import PlatformConfig
from qruntime.runtime import Platform

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "qruntime" / "api" / "schemas"

BELL = "qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];"


def schema(name: str) -> Draft202012Validator:
    with open(SCHEMA_DIR / f"{name}.schema.json", "r", encoding="utf-8") as fh:
        return Draft202012Validator(json.load(fh))


def check(name: str, payload: dict) -> dict:
    schema(name).validate(payload)
    return payload


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    config = PlatformConfig(
        data_dir=str(tmp_path_factory.mktemp("api-data")),
        dilation_us_per_unit=0.0,
        drift_sigma=0.0,
        coherence_step=0.0,
        noisy=False,
        fsync=False,
        pump_interval_s=0.005,
        poll_interval_s=3600.0,
        user_job_limit=4,
    )
    platform = Platform(config)
    verifier = StaticTokenVerifier({"tok-alice": "alice", "tok-bob": "bob"})
    app = create_app(platform, verifier)
    platform.start()
    client = TestClient(app)
    client.headers.update({"Authorization": "Bearer tok-alice"})
    yield platform, client
    platform.stop()


def submit_bell(client, **extra):
    body = {
        "kind": "single",
        "backend_name": "sim-linear-5",
        "items": [{"circuit_text": BELL, "shots": 256, "seed": 7}],
    }
    body.update(extra)
    response = client.post("/v1/jobs", json=body)
    return response


def wait_terminal(client, job_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        status = client.get(f"/v1/jobs/{job_id}").json()
        if status["status"] in ("COMPLETED", "FAILED", "CANCELLED"):
            return status
        time.sleep(0.01)
    raise TimeoutError(job_id)


class TestAuth:
    def test_health_is_open(self, service):
        _, client = service
        response = client.get("/health", headers={"Authorization": ""})
        assert response.status_code == 200

    def test_missing_token_rejected(self, service):
        _, client = service
        response = client.get("/v1/backends", headers={"Authorization": ""})
        assert response.status_code == 401
        body = check("error", response.json())
        assert body["code"] == "AUTH_FAILED"

    def test_bad_token_rejected(self, service):
        _, client = service
        response = client.post(
            "/v1/jobs",
            headers={"Authorization": "Bearer wrong"},
            json={"backend_name": "sim-linear-5", "items": [{"circuit_text": BELL}]},
        )
        assert response.status_code == 401
        assert response.json()["code"] == "AUTH_FAILED"


class TestJobs:
    def test_submit_wait_results_bell(self, service):
        _, client = service
        response = submit_bell(client)
        assert response.status_code == 201
        body = check("job_submit_response", response.json())
        job_id = body["job_id"]

        status = wait_terminal(client, job_id)
        check("job_status", status)
        assert status["status"] == "COMPLETED"
        assert status["progress"] == {"completed": 1, "total": 1}

        results = client.get(f"/v1/jobs/{job_id}/results")
        assert results.status_code == 200
        payload = check("job_results", results.json())
        counts = payload["items"][0]["counts"]
        assert set(counts) == {"00", "11"}
        assert sum(counts.values()) == 256

    def test_status_fields_are_iso_timestamps(self, service):
        _, client = service
        job_id = submit_bell(client).json()["job_id"]
        status = wait_terminal(client, job_id)
        assert status["submitted_at"].endswith("Z")
        assert status["finished_at"].endswith("Z")

    def test_unknown_field_rejected(self, service):
        _, client = service
        response = client.post(
            "/v1/jobs",
            json={"backend_name": "sim-linear-5", "items": [{"circuit_text": BELL}], "surprise": 1},
        )
        assert response.status_code == 400
        body = check("error", response.json())
        assert body["code"] == "SCHEMA_VIOLATION"

    def test_unknown_backend_404(self, service):
        _, client = service
        response = submit_bell(client, backend_name="nope")
        assert response.status_code == 404
        assert response.json()["code"] == "UNKNOWN_BACKEND"

    def test_unregistered_stage_conflict(self, service):
        _, client = service
        response = client.post(
            "/v1/jobs",
            json={
                "backend_name": "sim-linear-5",
                "items": [{"circuit_text": BELL, "execution_options": [{"name": "NotAStage"}]}],
            },
        )
        assert response.status_code == 409
        assert response.json()["code"] == "CAPABILITY_MISSING"

    def test_user_limit_429(self, service):
        platform, client = service
        ids = []
        for _ in range(4):
            ids.append(submit_bell(client, items=[{"circuit_text": BELL, "shots": 64}]).json()["job_id"])
        response = submit_bell(client)
        try:
            assert response.status_code in (201, 429)
            if response.status_code == 429:
                assert response.json()["code"] == "USER_LIMIT_EXCEEDED"
        finally:
            for job_id in ids:
                wait_terminal(client, job_id)

    def test_idempotency_key_returns_same_job(self, service):
        _, client = service
        first = submit_bell(client, idempotency_key="idem-1").json()["job_id"]
        second = submit_bell(client, idempotency_key="idem-1").json()["job_id"]
        assert first == second
        wait_terminal(client, first)

    def test_results_not_ready(self, service):
        platform, client = service
        # a longer job: results are requested immediately after submission
        response = submit_bell(client, items=[{"circuit_text": BELL, "shots": 4096}])
        job_id = response.json()["job_id"]
        result = client.get(f"/v1/jobs/{job_id}/results")
        if result.status_code == 409:  # not yet finished
            assert result.json()["code"] == "NOT_READY"
        wait_terminal(client, job_id)

    def test_unknown_job_404(self, service):
        _, client = service
        response = client.get("/v1/jobs/job-999999")
        assert response.status_code == 404
        assert response.json()["code"] == "UNKNOWN_JOB"

    def test_cancel_is_idempotent(self, service):
        platform, client = service
        job_id = submit_bell(client).json()["job_id"]
        first = client.delete(f"/v1/jobs/{job_id}")
        second = client.delete(f"/v1/jobs/{job_id}")
        assert first.status_code == 200
        assert second.status_code == 200
        wait_terminal(client, job_id)

    def test_hybrid_results_schema(self, service):
        _, client = service
        body = {
            "kind": "hybrid",
            "backend_name": "sim-linear-5",
            "items": [
                {
                    "circuit_text": "input float theta; qreg q[1]; creg c[1]; ry(theta) q[0]; measure q[0] -> c[0];",
                    "shots": 128,
                }
            ],
            "hybrid": {"initial_params": {"theta": 0.2}, "iterations": 4, "spsa": {"a": 0.8, "c": 0.2}, "seed": 3},
        }
        response = client.post("/v1/jobs", json=body)
        assert response.status_code == 201
        job_id = response.json()["job_id"]
        status = wait_terminal(client, job_id)
        assert status["status"] == "COMPLETED"
        results = check("job_results", client.get(f"/v1/jobs/{job_id}/results").json())
        assert results["hybrid"]["bindings"] == 8


class TestSessionsAndReservations:
    def test_session_lifecycle_and_echo(self, service):
        _, client = service
        session = client.post("/v1/sessions", json={"backend_id": "sim-linear-5"})
        assert session.status_code == 201
        body = check("session", session.json())
        sid = body["session_id"]
        job_id = submit_bell(client, session_id=sid).json()["job_id"]
        status = wait_terminal(client, job_id)
        assert status["session_id"] == sid
        closed = client.delete(f"/v1/sessions/{sid}")
        assert closed.status_code == 200
        assert closed.json()["open"] is False

    def test_foreign_session_is_invisible(self, service):
        _, client = service
        sid = client.post("/v1/sessions", json={"backend_id": "sim-linear-5"}).json()["session_id"]
        response = client.delete(f"/v1/sessions/{sid}", headers={"Authorization": "Bearer tok-bob"})
        assert response.status_code == 404

    def test_reservation_created_and_conflict(self, service):
        platform, client = service
        start = platform.clock.now() + 3600.0
        from qruntime.api.wire import to_iso

        created = client.post(
            "/v1/reservations",
            json={"backend_id": "sim-ring-7", "start": to_iso(start), "duration_seconds": 600.0},
        )
        assert created.status_code == 201
        check("reservation", created.json())

        overlap = client.post(
            "/v1/reservations",
            headers={"Authorization": "Bearer tok-bob"},
            json={"backend_id": "sim-ring-7", "start": to_iso(start + 60.0), "duration_seconds": 600.0},
        )
        assert overlap.status_code == 409
        body = check("error", overlap.json())
        assert body["code"] == "CONFLICT"
        assert "reservation_id" in body["details"]

    def test_bad_iso_timestamp_rejected(self, service):
        _, client = service
        response = client.post(
            "/v1/reservations", json={"backend_id": "sim-ring-7", "start": "not-a-time"}
        )
        assert response.status_code == 400
        assert response.json()["code"] == "SCHEMA_VIOLATION"


class TestBackendsAndCalibration:
    def test_backend_list_schema(self, service):
        _, client = service
        response = client.get("/v1/backends")
        assert response.status_code == 200
        body = check("backend_list", response.json())
        ids = [b["backend_id"] for b in body["backends"]]
        assert ids == ["sim-linear-5", "sim-ring-7"]

    def test_calibration_schema_and_refresh(self, service):
        _, client = service
        first = check("calibration", client.get("/v1/backends/sim-linear-5/calibration").json())
        refreshed = check(
            "calibration", client.get("/v1/backends/sim-linear-5/calibration", params={"refresh": True}).json()
        )
        assert refreshed["timestamp"] >= first["timestamp"]
        second = check("calibration", client.get("/v1/backends/sim-linear-5/calibration").json())
        assert second == refreshed  # refresh actually advanced the stored snapshot

    def test_unknown_backend_calibration(self, service):
        _, client = service
        response = client.get("/v1/backends/nope/calibration")
        assert response.status_code == 404


class TestWorkers:
    def test_register_and_heartbeat(self, service):
        _, client = service
        response = client.post(
            "/v1/workers/register",
            json={"worker_id": "external-1", "stages": ["ZeroNoiseExtrapolation"], "backends": ["sim-linear-5"], "max_parallel": 2},
        )
        assert response.status_code == 201
        check("worker_ack", response.json())
        beat = client.put("/v1/workers/external-1/heartbeat")
        assert beat.status_code == 200
        body = check("worker_ack", beat.json())
        assert body["acknowledged"] is True
        again = client.put("/v1/workers/external-1/heartbeat")
        assert again.status_code == 200  # idempotent

    def test_unknown_worker_heartbeat(self, service):
        _, client = service
        response = client.put("/v1/workers/ghost/heartbeat")
        assert response.status_code == 404
        assert response.json()["code"] == "UNKNOWN_WORKER"


class TestGoldenSchemasAreValidThemselves:
    def test_all_schema_files_compile(self):
        for path in sorted(SCHEMA_DIR.glob("*.schema.json")):
            with open(path, "r", encoding="utf-8") as fh:
                Draft202012Validator.check_schema(json.load(fh))

    def test_descriptor_schema_accepts_canonical_examples(self):
        validator = schema("job_descriptor")
        validator.validate(
            {
                "kind": "single",
                "backend_name": "sim-linear-5",
                "items": [{"circuit_text": BELL, "shots": 100}],
            }
        )
        validator.validate(
            {
                "kind": "hybrid",
                "backend_name": "auto",
                "items": [{"circuit_text": "input float t; qreg q[1]; ry(t) q[0];", "shots": 10}],
                "hybrid": {"initial_params": {"t": 0.1}, "iterations": 5, "spsa": {"a": 1.0, "c": 0.1}},
            }
        )

    def test_descriptor_schema_rejects_unknown_fields(self):
        validator = schema("job_descriptor")
        bad = {"backend_name": "x", "items": [{"circuit_text": "qreg q[1];"}], "bogus": 1}
        assert not validator.is_valid(bad)

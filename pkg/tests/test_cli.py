import json
import os
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from qruntime.config import load_config

BELL = "qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];"


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="module")
def server(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    port = free_port()
    config_path = base / "qruntime.conf"
    config_path.write_text(
        "\n".join(
            [
                f'data_dir = "{base / "data"}"',
                "dilation_us_per_unit = 0.0",
                "drift_sigma = 0.0",
                "coherence_step = 0.0",
                "noisy = false",
                "fsync = false",
                "pump_interval_s = 0.005",
                "poll_interval_s = 3600.0",
            ]
        )
    )
    proc = subprocess.Popen(
        [sys.executable, "-m", "qruntime", "serve", "--config", str(config_path), "--port", str(port)],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )
    endpoint = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 30
    while time.monotonic() < deadline:
        if proc.poll() is not None:
            out, err = proc.communicate()
            raise RuntimeError(f"serve died: {out}\n{err}")
        try:
            if httpx.get(endpoint + "/health", timeout=1.0).status_code == 200:
                break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        proc.kill()
        raise TimeoutError("serve never became healthy")
    yield endpoint, base
    proc.send_signal(signal.SIGINT)
    try:
        proc.wait(timeout=10)
    except subprocess.TimeoutExpired:
        proc.kill()


def cli(*args, endpoint: str):
    env = dict(os.environ)
    env["QRUNTIME_ENDPOINT"] = endpoint
    return subprocess.run(
        [sys.executable, "-m", "qruntime", *args],
        capture_output=True,
        text=True,
        env=env,
        timeout=120,
    )


class TestCliFlow:
    def test_submit_wait_bell(self, server):
        endpoint, base = server
        job_file = base / "bell.json"
        job_file.write_text(
            json.dumps(
                {
                    "kind": "single",
                    "backend_name": "sim-linear-5",
                    "items": [{"circuit_text": BELL, "shots": 512, "seed": 21}],
                }
            )
        )
        result = cli("submit", "--file", str(job_file), "--wait", "--json", endpoint=endpoint)
        assert result.returncode == 0, result.stderr
        payload = json.loads(result.stdout)
        counts = payload["items"][0]["counts"]
        assert set(counts) == {"00", "11"}
        assert sum(counts.values()) == 512

    def test_submit_then_status_and_results(self, server):
        endpoint, base = server
        job_file = base / "bell2.json"
        job_file.write_text(
            json.dumps(
                {"backend_name": "sim-linear-5", "items": [{"circuit_text": BELL, "shots": 64, "seed": 3}]}
            )
        )
        submitted = cli("submit", "--file", str(job_file), "--json", endpoint=endpoint)
        assert submitted.returncode == 0
        job_id = json.loads(submitted.stdout)["job_id"]
        deadline = time.monotonic() + 30
        while time.monotonic() < deadline:
            status = cli("status", job_id, "--json", endpoint=endpoint)
            assert status.returncode == 0
            body = json.loads(status.stdout)
            if body["status"] in ("COMPLETED", "FAILED"):
                break
            time.sleep(0.05)
        assert body["status"] == "COMPLETED"
        out_path = base / "results.json"
        results = cli("results", job_id, "--out", str(out_path), endpoint=endpoint)
        assert results.returncode == 0
        saved = json.loads(out_path.read_text())
        assert saved["job_id"] == job_id

    def test_status_unknown_job_exit_code(self, server):
        endpoint, _ = server
        result = cli("status", "job-424242", endpoint=endpoint)
        assert result.returncode == 1
        assert "UNKNOWN_JOB" in result.stderr

    def test_backends_json(self, server):
        endpoint, _ = server
        result = cli("backends", "--json", endpoint=endpoint)
        assert result.returncode == 0
        ids = [b["backend_id"] for b in json.loads(result.stdout)["backends"]]
        assert ids == ["sim-linear-5", "sim-ring-7"]

    def test_calibration_refresh(self, server):
        endpoint, _ = server
        result = cli("calibration", "sim-ring-7", "--refresh", "--json", endpoint=endpoint)
        assert result.returncode == 0
        body = json.loads(result.stdout)
        assert body["backend_id"] == "sim-ring-7"
        assert len(body["qubits"]) == 7

    def test_reserve_then_conflict(self, server):
        endpoint, _ = server
        from datetime import datetime, timedelta, timezone

        start = (datetime.now(timezone.utc) + timedelta(hours=2)).isoformat().replace("+00:00", "Z")
        first = cli("reserve", "sim-ring-7", "--start", start, "--minutes", "15", "--json", endpoint=endpoint)
        assert first.returncode == 0, first.stderr
        body = json.loads(first.stdout)
        assert body["status"] == "pending"
        second = cli("reserve", "sim-ring-7", "--start", start, "--minutes", "15", endpoint=endpoint)
        assert second.returncode == 1
        assert "CONFLICT" in second.stderr

    def test_bad_token_is_auth_error(self, server):
        endpoint, _ = server
        env = dict(os.environ)
        env["QRUNTIME_ENDPOINT"] = endpoint
        env["QRUNTIME_TOKEN"] = "wrong"
        result = subprocess.run(
            [sys.executable, "-m", "qruntime", "backends"], capture_output=True, text=True, env=env, timeout=60
        )
        assert result.returncode == 1
        assert "AUTH_FAILED" in result.stderr

    def test_admission_error_exits_one(self, server):
        endpoint, base = server
        job_file = base / "impossible.json"
        job_file.write_text(
            json.dumps(
                {
                    "backend_name": "sim-linear-5",
                    "items": [{"circuit_text": BELL, "execution_options": [{"name": "Missing"}]}],
                }
            )
        )
        result = cli("submit", "--file", str(job_file), "--wait", endpoint=endpoint)
        assert result.returncode == 1
        assert "CAPABILITY_MISSING" in result.stderr

    def test_runtime_failure_exits_two(self, server):
        endpoint, base = server
        job_file = base / "doomed.json"
        # an even fold scale passes admission (the stage name is registered)
        # but the stage constructor rejects it at run time -> FAILED
        job_file.write_text(
            json.dumps(
                {
                    "backend_name": "sim-linear-5",
                    "items": [
                        {
                            "circuit_text": BELL,
                            "shots": 64,
                            "execution_options": [
                                {"name": "ZeroNoiseExtrapolation", "config": {"scales": [2]}}
                            ],
                        }
                    ],
                    "max_retries": 0,
                }
            )
        )
        result = cli("submit", "--file", str(job_file), "--wait", "--json", endpoint=endpoint)
        assert result.returncode == 2
        body = json.loads(result.stdout)
        assert body["status"] == "FAILED"


class TestConfigFile:
    def test_load_and_env_override(self, tmp_path):
        path = tmp_path / "qr.conf"
        path.write_text("port = 9100\ndata_dir = \"/tmp/x\"\nnoisy = false\n# comment\nuser_job_limit = 7\n")
        config = load_config(path, env={})
        assert config.port == 9100
        assert config.data_dir == "/tmp/x"
        assert config.noisy is False
        assert config.user_job_limit == 7
        overridden = load_config(path, env={"QRUNTIME_PORT": "9200", "QRUNTIME_NOISY": "true"})
        assert overridden.port == 9200
        assert overridden.noisy is True

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "qr.conf"
        path.write_text("wat = 1\n")
        with pytest.raises(ValueError):
            load_config(path, env={})

    def test_defaults_without_file(self):
        config = load_config(None, env={})
        assert config.staleness_limit_s == 300.0
        assert config.poll_interval_s == 60.0
        assert config.user_job_limit == 5
        assert config.worker_ttl_s == 30.0

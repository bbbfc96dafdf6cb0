"""Operator and researcher command line.

`serve` hosts the platform (service + simulated fleet + default workers);
the remaining commands drive a running service over its REST API. Every read
command takes --json for machine-readable output. Exit codes: 0 success,
1 request/transport error (code on stderr), 2 job finished FAILED under
--wait.
"""

from __future__ import annotations

import json
import os
import sys
import time

import click
import httpx

from .config import DEV_TOKEN, load_config

DEFAULT_ENDPOINT = "http://127.0.0.1:8411"


def _endpoint(value: str | None) -> str:
    return value or os.environ.get("QRUNTIME_ENDPOINT") or DEFAULT_ENDPOINT


def _token(value: str | None) -> str:
    return value or os.environ.get("QRUNTIME_TOKEN") or DEV_TOKEN


def _client(endpoint: str, token: str) -> httpx.Client:
    return httpx.Client(base_url=endpoint, headers={"Authorization": f"Bearer {token}"}, timeout=30.0)


def _fail(response: httpx.Response) -> None:
    try:
        body = response.json()
        code = body.get("code", f"HTTP_{response.status_code}")
        message = body.get("message", "")
    except ValueError:
        code, message = f"HTTP_{response.status_code}", response.text[:200]
    click.echo(f"{code}: {message}", err=True)
    sys.exit(1)


def _request(client: httpx.Client, method: str, path: str, ok: tuple[int, ...] = (200, 201), **kwargs) -> dict:
    try:
        response = client.request(method, path, **kwargs)
    except httpx.HTTPError as exc:
        click.echo(f"TRANSPORT_ERROR: {exc}", err=True)
        sys.exit(1)
    if response.status_code not in ok:
        _fail(response)
    return response.json()


def _emit(data: dict, as_json: bool, human: str | None = None) -> None:
    if as_json:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    elif human is not None:
        click.echo(human)
    else:
        click.echo(json.dumps(data, indent=2, sort_keys=True))


@click.group()
def main() -> None:
    """qruntime: self-hostable quantum runtime platform."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--port", type=int, default=None, help="override the configured port")
@click.option("--host", type=str, default=None)
def serve(config_path, port, host) -> None:
    """Start the service with the simulated fleet and default workers."""
    import uvicorn

    from .api import create_app, load_verifier
    from .runtime import Platform

    config = load_config(config_path)
    if port is not None:
        config.port = port
    if host is not None:
        config.host = host
    platform = Platform(config)
    verifier = load_verifier(config)
    app = create_app(platform, verifier)
    platform.start()
    if platform.truncation_report:
        click.echo(f"recovery: {platform.truncation_report}", err=True)
    if platform.recovered_jobs:
        click.echo(f"recovery: requeued {len(platform.recovered_jobs)} in-flight job(s)", err=True)
    backends = ", ".join(platform.scheduler.backend_ids())
    click.echo(f"qruntime ready on http://{config.host}:{config.port} (backends: {backends})")
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    finally:
        platform.stop()


@main.command()
@click.option("--file", "job_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--wait", is_flag=True, help="poll until the job reaches a terminal state")
@click.option("--poll-seconds", type=float, default=0.25, show_default=True)
@click.option("--timeout", type=float, default=600.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
def submit(job_file, wait, poll_seconds, timeout, as_json, endpoint, token) -> None:
    """POST a job descriptor file; with --wait, follow it to completion."""
    with open(job_file, "r", encoding="utf-8") as fh:
        descriptor = json.load(fh)
    with _client(_endpoint(endpoint), _token(token)) as client:
        body = _request(client, "POST", "/v1/jobs", json=descriptor)
        job_id = body["job_id"]
        if not wait:
            _emit(body, as_json, human=job_id)
            return
        deadline = time.monotonic() + timeout
        status = None
        while time.monotonic() < deadline:
            status = _request(client, "GET", f"/v1/jobs/{job_id}")
            if status["status"] in ("COMPLETED", "FAILED", "CANCELLED"):
                break
            time.sleep(poll_seconds)
        else:
            click.echo(f"TIMEOUT: job {job_id} still {status['status'] if status else 'unknown'}", err=True)
            sys.exit(1)
        if status["status"] == "COMPLETED":
            results = _request(client, "GET", f"/v1/jobs/{job_id}/results")
            _emit(results, as_json)
            return
        _emit(status, as_json)
        sys.exit(2 if status["status"] == "FAILED" else 1)


@main.command()
@click.argument("job_id")
@click.option("--json", "as_json", is_flag=True)
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
def status(job_id, as_json, endpoint, token) -> None:
    """Print job status, eta, and progress."""
    with _client(_endpoint(endpoint), _token(token)) as client:
        body = _request(client, "GET", f"/v1/jobs/{job_id}")
    progress = body.get("progress") or {}
    human = (
        f"{body['job_id']}: {body['status']} on {body['backend_id']} "
        f"(eta {body['eta_seconds']:.1f}s, progress {progress.get('completed', 0)}/{progress.get('total', 0)})"
    )
    _emit(body, as_json, human=human)


@main.command()
@click.argument("job_id")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True)
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
def results(job_id, out_path, as_json, endpoint, token) -> None:
    """Fetch results JSON for a completed job."""
    with _client(_endpoint(endpoint), _token(token)) as client:
        body = _request(client, "GET", f"/v1/jobs/{job_id}/results")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
        click.echo(out_path)
    else:
        _emit(body, as_json)


@main.command()
@click.argument("job_id")
@click.option("--json", "as_json", is_flag=True)
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
def cancel(job_id, as_json, endpoint, token) -> None:
    """Cancel a job (idempotent)."""
    with _client(_endpoint(endpoint), _token(token)) as client:
        body = _request(client, "DELETE", f"/v1/jobs/{job_id}")
    _emit(body, as_json, human=f"{body['job_id']}: {body['status']}")


@main.command()
@click.option("--json", "as_json", is_flag=True)
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
def backends(as_json, endpoint, token) -> None:
    """List registered backends."""
    with _client(_endpoint(endpoint), _token(token)) as client:
        body = _request(client, "GET", "/v1/backends")
    if as_json:
        _emit(body, True)
        return
    for b in body["backends"]:
        click.echo(
            f"{b['backend_id']}: {b['num_qubits']} qubits, basis {','.join(b['basis_gates'])}, "
            f"queue depth {b['queue_depth']}"
        )


@main.command()
@click.argument("backend")
@click.option("--refresh", is_flag=True, help="trigger an on-demand calibration poll")
@click.option("--json", "as_json", is_flag=True)
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
def calibration(backend, refresh, as_json, endpoint, token) -> None:
    """Show the latest calibration snapshot for a backend."""
    with _client(_endpoint(endpoint), _token(token)) as client:
        body = _request(client, "GET", f"/v1/backends/{backend}/calibration", params={"refresh": refresh})
    if as_json:
        _emit(body, True)
        return
    click.echo(f"{body['backend_id']} @ {body['timestamp']}")
    for i, q in enumerate(body["qubits"]):
        click.echo(
            f"  q{i}: t1={q['t1_us']:.1f}us t2={q['t2_us']:.1f}us "
            f"f={q['frequency_ghz']:.3f}GHz readout_err={q['readout_error']:.4f}"
        )


@main.command()
@click.argument("backend")
@click.option("--start", required=True, help="ISO-8601 start time")
@click.option("--minutes", type=float, default=15.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
def reserve(backend, start, minutes, as_json, endpoint, token) -> None:
    """Reserve exclusive access to a backend."""
    payload = {"backend_id": backend, "start": start, "duration_seconds": minutes * 60.0}
    with _client(_endpoint(endpoint), _token(token)) as client:
        body = _request(client, "POST", "/v1/reservations", json=payload)
    _emit(body, as_json, human=f"{body['reservation_id']}: {body['backend_id']} {body['start']} -> {body['end']}")


if __name__ == "__main__":
    main()

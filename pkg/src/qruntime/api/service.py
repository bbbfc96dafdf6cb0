"""REST surface of the platform.

Versioned under /v1, JSON over HTTP, request/response only (clients poll).
Every endpoint except /health requires a bearer token; every error body is
{"code", "message", "details"} with a stable string code. Mutations are
forwarded to the scheduler, whose lock serializes them; reads are served from
current state.
"""

from __future__ import annotations

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

import qruntime

from ..errors import (
    AuthFailed,
    JobCancelledError,
    JobFailedError,
    PlatformError,
    ResultsNotReady,
)
from ..runtime import Platform
from ..scheduling import JobStatus
from .auth import TokenVerifier
from .wire import (
    WireJobDescriptor,
    WireReservationRequest,
    WireSessionRequest,
    WireWorkerRegistration,
    backend_body,
    calibration_body,
    descriptor_from_wire,
    from_iso,
    job_results_body,
    job_status_body,
    reservation_body,
    session_body,
)

HTTP_STATUS = {
    "AUTH_FAILED": 401,
    "SCHEMA_VIOLATION": 400,
    "INVALID_JOB": 400,
    "UNKNOWN_BACKEND": 404,
    "UNKNOWN_JOB": 404,
    "UNKNOWN_WORKER": 404,
    "UNKNOWN_SESSION": 404,
    "CAPABILITY_MISSING": 409,
    "USER_LIMIT_EXCEEDED": 429,
    "CONFLICT": 409,
    "NOT_READY": 409,
    "JOB_FAILED": 409,
    "JOB_CANCELLED": 409,
    "NO_CAPABLE_BACKEND": 409,
    "ILLEGAL_TRANSITION": 500,
    "INTERNAL": 500,
}


def create_app(platform: Platform, verifier: TokenVerifier) -> FastAPI:
    app = FastAPI(title="qruntime", version=qruntime.__version__, docs_url=None, redoc_url=None)

    def current_user(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise AuthFailed("missing bearer token")
        user = verifier.verify(header[7:].strip())
        if user is None:
            raise AuthFailed("token rejected")
        return user

    @app.exception_handler(PlatformError)
    async def platform_error(request: Request, exc: PlatformError):
        status = HTTP_STATUS.get(exc.code, 500)
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "SCHEMA_VIOLATION",
                "message": "request body failed schema validation",
                "details": {"errors": [
                    {"loc": [str(p) for p in err.get("loc", [])], "msg": err.get("msg", "")}
                    for err in exc.errors()
                ]},
            },
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": qruntime.__version__}

    # ------------------------------------------------------------------ jobs

    @app.post("/v1/jobs", status_code=201)
    def submit_job(body: WireJobDescriptor, user: str = Depends(current_user)):
        descriptor = descriptor_from_wire(body, user)
        record = platform.scheduler.submit(descriptor)
        return {"job_id": record.job_id}

    @app.get("/v1/jobs/{job_id}")
    def job_status(job_id: str, user: str = Depends(current_user)):
        record = platform.scheduler.job(job_id)
        eta = platform.scheduler.eta(job_id)
        return job_status_body(record, eta)

    @app.get("/v1/jobs/{job_id}/results")
    def job_results(job_id: str, user: str = Depends(current_user)):
        record = platform.scheduler.job(job_id)
        if record.status == JobStatus.COMPLETED:
            return job_results_body(record)
        if record.status == JobStatus.FAILED:
            raise JobFailedError("job failed", record.error or {})
        if record.status == JobStatus.CANCELLED:
            raise JobCancelledError("job was cancelled")
        raise ResultsNotReady(f"job '{job_id}' is {record.status.value}")

    @app.delete("/v1/jobs/{job_id}")
    def cancel_job(job_id: str, user: str = Depends(current_user)):
        record = platform.scheduler.cancel(job_id)
        return {"job_id": record.job_id, "status": record.status.value, "cancel_requested": record.cancel_requested}

    # -------------------------------------------------------------- sessions

    @app.post("/v1/sessions", status_code=201)
    def open_session(body: WireSessionRequest, user: str = Depends(current_user)):
        session = platform.scheduler.open_session(user, body.backend_id, ttl=body.ttl_seconds)
        return session_body(session)

    @app.delete("/v1/sessions/{session_id}")
    def close_session(session_id: str, user: str = Depends(current_user)):
        session = platform.scheduler.close_session(session_id, user=user)
        return session_body(session)

    # ---------------------------------------------------------- reservations

    @app.post("/v1/reservations", status_code=201)
    def create_reservation(body: WireReservationRequest, user: str = Depends(current_user)):
        start = from_iso(body.start)
        reservation = platform.scheduler.reserve(body.backend_id, user, start, body.duration_seconds)
        return reservation_body(reservation, platform.clock.now())

    # ------------------------------------------------------------- backends

    @app.get("/v1/backends")
    def backends(user: str = Depends(current_user)):
        out = []
        for backend_id in platform.scheduler.backend_ids():
            device = platform.fleet[backend_id]
            out.append(backend_body(device.capabilities(), device.queue_depth()))
        return {"backends": out}

    @app.get("/v1/backends/{backend_id}/calibration")
    def calibration(backend_id: str, refresh: bool = False, user: str = Depends(current_user)):
        platform.scheduler.backend_caps(backend_id)  # 404 on unknown backend
        if refresh:
            snapshot = platform.calibrations.poll(backend_id)
        else:
            snapshot = platform._latest_or_poll(backend_id)
            if snapshot is None:
                raise ResultsNotReady(f"no calibration recorded for '{backend_id}'")
        return calibration_body(snapshot)

    # -------------------------------------------------------------- workers

    @app.post("/v1/workers/register", status_code=201)
    def register_worker(body: WireWorkerRegistration, user: str = Depends(current_user)):
        info = platform.scheduler.register_worker(
            worker_id=body.worker_id,
            stages=body.stages,
            backends=body.backends,
            max_parallel=body.max_parallel,
        )
        return {"worker_id": info.worker_id, "ttl_seconds": platform.config.worker_ttl_s}

    @app.put("/v1/workers/{worker_id}/heartbeat")
    def heartbeat(worker_id: str, user: str = Depends(current_user)):
        info = platform.scheduler.heartbeat(worker_id)
        return {"worker_id": info.worker_id, "acknowledged": True, "ttl_seconds": platform.config.worker_ttl_s}

    return app

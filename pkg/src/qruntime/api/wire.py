"""Wire-format models and converters.

Inbound bodies are pydantic models with unknown fields rejected; outbound
bodies are plain dicts shaped exactly like the published JSON schema files in
`qruntime/api/schemas/`. All wire timestamps are ISO-8601 UTC.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..calibration import CalibrationSnapshot
from ..capabilities import BackendCapabilities
from ..errors import SchemaViolationError
from ..pipeline import Observable, StageSpec
from ..scheduling import HybridConfig, JobDescriptor, JobItem, JobRecord, Reservation, Session


def to_iso(ts: float | None) -> str | None:
    if ts is None:
        return None
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat().replace("+00:00", "Z")


def from_iso(text: str) -> float:
    try:
        normalized = text.replace("Z", "+00:00")
        parsed = datetime.fromisoformat(normalized)
    except ValueError as exc:
        raise SchemaViolationError(f"not an ISO-8601 timestamp: {text!r}") from None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.timestamp()


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class WireStageSpec(_Strict):
    name: str
    config: dict = Field(default_factory=dict)


class WireObservable(_Strict):
    kind: Literal["z_parity"] = "z_parity"
    bits: list[int] | None = None


class WireJobItem(_Strict):
    circuit_text: str
    execution_options: list[WireStageSpec] = Field(default_factory=list)
    shots: int = Field(default=1024, ge=1)
    observable: WireObservable | None = None
    seed: int | None = None


class WireSpsa(_Strict):
    a: float = Field(gt=0)
    c: float = Field(gt=0)


class WireHybrid(_Strict):
    initial_params: dict[str, float]
    iterations: int = Field(ge=0)
    spsa: WireSpsa
    seed: int | None = None


class WireJobDescriptor(_Strict):
    kind: Literal["single", "batch", "hybrid"] = "single"
    backend_name: str
    items: list[WireJobItem] = Field(min_length=1)
    priority: int = 0
    session_id: str | None = None
    max_retries: int = Field(default=3, ge=0)
    hybrid: WireHybrid | None = None
    idempotency_key: str | None = None


class WireSessionRequest(_Strict):
    backend_id: str
    ttl_seconds: float | None = Field(default=None, gt=0)


class WireReservationRequest(_Strict):
    backend_id: str
    start: str  # ISO-8601
    duration_seconds: float | None = Field(default=None, gt=0)


class WireWorkerRegistration(_Strict):
    worker_id: str
    stages: list[str] = Field(default_factory=list)
    backends: list[str] = Field(default_factory=list)
    max_parallel: int = Field(default=1, ge=1)


def descriptor_from_wire(body: WireJobDescriptor, user: str) -> JobDescriptor:
    return JobDescriptor(
        user=user,
        kind=body.kind,
        backend_name=body.backend_name,
        items=tuple(
            JobItem(
                circuit_text=item.circuit_text,
                execution_options=tuple(StageSpec(name=s.name, config=dict(s.config)) for s in item.execution_options),
                shots=item.shots,
                observable=Observable(kind=item.observable.kind, bits=tuple(item.observable.bits) if item.observable.bits else None)
                if item.observable
                else None,
                seed=item.seed,
            )
            for item in body.items
        ),
        priority=body.priority,
        session_id=body.session_id,
        max_retries=body.max_retries,
        hybrid=HybridConfig(
            initial_params=dict(body.hybrid.initial_params),
            iterations=body.hybrid.iterations,
            a=body.hybrid.spsa.a,
            c=body.hybrid.spsa.c,
            seed=body.hybrid.seed,
        )
        if body.hybrid
        else None,
        idempotency_key=body.idempotency_key,
    )


def job_status_body(record: JobRecord, eta_seconds: float) -> dict:
    progress = None
    if record.progress is not None:
        progress = {"completed": record.progress[0], "total": record.progress[1]}
    return {
        "job_id": record.job_id,
        "status": record.status.value,
        "kind": record.descriptor.kind,
        "backend_id": record.backend_id,
        "submitted_at": to_iso(record.submitted_at),
        "started_at": to_iso(record.started_at),
        "finished_at": to_iso(record.finished_at),
        "attempts": record.attempts,
        "eta_seconds": eta_seconds,
        "progress": progress,
        "error": record.error,
        "session_id": record.session_id,
    }


def job_results_body(record: JobRecord) -> dict:
    body: dict = {"job_id": record.job_id, "kind": record.descriptor.kind}
    results = record.results or {}
    if record.descriptor.kind == "hybrid":
        body["hybrid"] = results
        body["items"] = None
    else:
        body["items"] = results.get("items", [])
        body["hybrid"] = None
    return body


def backend_body(caps: BackendCapabilities, queue_depth: int) -> dict:
    return {
        "backend_id": caps.backend_id,
        "num_qubits": caps.num_qubits,
        "basis_gates": sorted(caps.basis_gates),
        "coupling": [list(pair) for pair in sorted(caps.coupling)],
        "max_shots": caps.max_shots,
        "queue_depth": queue_depth,
        "gate_durations_ns": dict(sorted(caps.gate_durations.items())),
        "readout_duration_ns": caps.readout_duration,
        "timing_granularity_ns": caps.timing_granularity,
    }


def calibration_body(snapshot: CalibrationSnapshot) -> dict:
    return {
        "backend_id": snapshot.backend_id,
        "timestamp": to_iso(snapshot.timestamp),
        "qubits": [
            {
                "t1_us": q.t1_us,
                "t2_us": q.t2_us,
                "frequency_ghz": q.frequency_ghz,
                "readout_error": q.readout_error,
            }
            for q in snapshot.qubits
        ],
        "gates": [
            {
                "gate": gate,
                "qubits": list(qubits),
                "error_rate": entry.error_rate,
                "duration_ns": entry.duration_ns,
            }
            for (gate, qubits), entry in sorted(snapshot.gates.items())
        ],
    }


def reservation_body(reservation: Reservation, now: float) -> dict:
    return {
        "reservation_id": reservation.reservation_id,
        "backend_id": reservation.backend_id,
        "user": reservation.user,
        "start": to_iso(reservation.start),
        "end": to_iso(reservation.end),
        "status": reservation.status_at(now),
    }


def session_body(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "user": session.user,
        "backend_id": session.backend_id,
        "ttl_seconds": session.ttl,
        "open": session.open,
    }

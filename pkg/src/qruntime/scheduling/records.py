"""Job, worker, reservation, and session records.

JobRecord is the lifecycle state machine of a submitted workload. Transitions
are restricted to:

    QUEUED    -> SCHEDULED | CANCELLED
    SCHEDULED -> RUNNING | QUEUED | CANCELLED
    RUNNING   -> COMPLETED | FAILED | QUEUED (retry / continuation)

Everything here serializes to plain JSON dicts: descriptors mirror the wire
schema field-for-field, and records round-trip through the event store.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..errors import IllegalTransition, InvalidJob
from ..pipeline import Observable, StageSpec

DEFAULT_MAX_RETRIES = 3
DEFAULT_RESERVATION_S = 900.0  # 15 minutes
DEFAULT_SESSION_TTL_S = 600.0  # 10 minutes idle


class JobStatus(str, Enum):
    QUEUED = "QUEUED"
    SCHEDULED = "SCHEDULED"
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"
    CANCELLED = "CANCELLED"


LEGAL_TRANSITIONS: dict[JobStatus, frozenset[JobStatus]] = {
    JobStatus.QUEUED: frozenset({JobStatus.SCHEDULED, JobStatus.CANCELLED}),
    JobStatus.SCHEDULED: frozenset({JobStatus.RUNNING, JobStatus.QUEUED, JobStatus.CANCELLED}),
    JobStatus.RUNNING: frozenset({JobStatus.COMPLETED, JobStatus.FAILED, JobStatus.QUEUED}),
    JobStatus.COMPLETED: frozenset(),
    JobStatus.FAILED: frozenset(),
    JobStatus.CANCELLED: frozenset(),
}

TERMINAL_STATUSES = frozenset({JobStatus.COMPLETED, JobStatus.FAILED, JobStatus.CANCELLED})


def _observable_to_dict(obs: Observable | None) -> dict | None:
    if obs is None:
        return None
    out: dict = {"kind": obs.kind}
    if obs.bits is not None:
        out["bits"] = list(obs.bits)
    return out


def _observable_from_dict(data: dict | None) -> Observable | None:
    if data is None:
        return None
    bits = data.get("bits")
    return Observable(kind=data.get("kind", "z_parity"), bits=tuple(bits) if bits is not None else None)


@dataclass(frozen=True)
class JobItem:
    circuit_text: str
    execution_options: tuple[StageSpec, ...] = ()
    shots: int = 1024
    observable: Observable | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "circuit_text": self.circuit_text,
            "execution_options": [{"name": s.name, "config": dict(s.config)} for s in self.execution_options],
            "shots": self.shots,
        }
        if self.observable is not None:
            out["observable"] = _observable_to_dict(self.observable)
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @staticmethod
    def from_dict(data: dict) -> "JobItem":
        return JobItem(
            circuit_text=data["circuit_text"],
            execution_options=tuple(
                StageSpec(name=o["name"], config=dict(o.get("config", {}))) for o in data.get("execution_options", [])
            ),
            shots=int(data.get("shots", 1024)),
            observable=_observable_from_dict(data.get("observable")),
            seed=data.get("seed"),
        )


@dataclass(frozen=True)
class HybridConfig:
    initial_params: dict[str, float]
    iterations: int
    a: float
    c: float
    seed: int | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "initial_params": {k: float(v) for k, v in self.initial_params.items()},
            "iterations": self.iterations,
            "spsa": {"a": self.a, "c": self.c},
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @staticmethod
    def from_dict(data: dict) -> "HybridConfig":
        spsa = data.get("spsa", {})
        return HybridConfig(
            initial_params={k: float(v) for k, v in data.get("initial_params", {}).items()},
            iterations=int(data.get("iterations", 0)),
            a=float(spsa.get("a", 0.5)),
            c=float(spsa.get("c", 0.2)),
            seed=data.get("seed"),
        )


@dataclass(frozen=True)
class JobDescriptor:
    user: str
    kind: str  # single | batch | hybrid
    backend_name: str
    items: tuple[JobItem, ...]
    priority: int = 0
    session_id: str | None = None
    max_retries: int = DEFAULT_MAX_RETRIES
    hybrid: HybridConfig | None = None
    idempotency_key: str | None = None

    def check(self) -> None:
        if self.kind not in ("single", "batch", "hybrid"):
            raise InvalidJob(f"unknown job kind '{self.kind}'")
        if not self.items:
            raise InvalidJob("a job needs at least one item")
        if any(item.shots < 1 for item in self.items):
            raise InvalidJob("shots must be >= 1")
        if self.max_retries < 0:
            raise InvalidJob("max_retries must be >= 0")
        if self.kind == "single" and len(self.items) != 1:
            raise InvalidJob("a single job carries exactly one item")
        if self.kind == "hybrid":
            if self.hybrid is None:
                raise InvalidJob("hybrid jobs need a hybrid config")
            if len(self.items) != 1:
                raise InvalidJob("hybrid jobs carry exactly one (parametric) item")
            if self.hybrid.iterations < 0:
                raise InvalidJob("iterations must be >= 0")
        elif self.hybrid is not None:
            raise InvalidJob(f"'{self.kind}' jobs do not take a hybrid config")

    def to_dict(self) -> dict:
        out: dict = {
            "kind": self.kind,
            "backend_name": self.backend_name,
            "items": [item.to_dict() for item in self.items],
            "priority": self.priority,
            "max_retries": self.max_retries,
        }
        if self.session_id is not None:
            out["session_id"] = self.session_id
        if self.hybrid is not None:
            out["hybrid"] = self.hybrid.to_dict()
        if self.idempotency_key is not None:
            out["idempotency_key"] = self.idempotency_key
        return out

    @staticmethod
    def from_dict(data: dict, user: str) -> "JobDescriptor":
        return JobDescriptor(
            user=user,
            kind=data.get("kind", "single"),
            backend_name=data["backend_name"],
            items=tuple(JobItem.from_dict(i) for i in data.get("items", [])),
            priority=int(data.get("priority", 0)),
            session_id=data.get("session_id"),
            max_retries=int(data.get("max_retries", DEFAULT_MAX_RETRIES)),
            hybrid=HybridConfig.from_dict(data["hybrid"]) if data.get("hybrid") else None,
            idempotency_key=data.get("idempotency_key"),
        )


@dataclass
class JobRecord:
    job_id: str
    descriptor: JobDescriptor
    backend_id: str  # resolved (auto-selection happens at submission)
    status: JobStatus = JobStatus.QUEUED
    attempts: int = 0  # times the job entered RUNNING
    submitted_at: float = 0.0
    started_at: float | None = None
    finished_at: float | None = None
    not_before: float = 0.0  # retry backoff gate
    run_started_at: float | None = None  # start of the current attempt
    assigned_worker: str | None = None
    required_stages: frozenset[str] = frozenset()
    base_estimate_ns: float = 0.0  # unadjusted duration model output
    checkpoint: dict | None = None
    results: dict | None = None
    error: dict | None = None
    progress: tuple[int, int] | None = None
    cancel_requested: bool = False

    @property
    def user(self) -> str:
        return self.descriptor.user

    @property
    def session_id(self) -> str | None:
        return self.descriptor.session_id

    @property
    def terminal(self) -> bool:
        return self.status in TERMINAL_STATUSES

    def transition(self, to: JobStatus, now: float) -> None:
        if to not in LEGAL_TRANSITIONS[self.status]:
            raise IllegalTransition(f"job {self.job_id}: illegal transition {self.status.value} -> {to.value}")
        self.status = to
        if to == JobStatus.RUNNING:
            self.attempts += 1
            self.run_started_at = now
            if self.started_at is None:
                self.started_at = now
        if to in TERMINAL_STATUSES:
            self.finished_at = now

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "descriptor": self.descriptor.to_dict(),
            "user": self.user,
            "backend_id": self.backend_id,
            "status": self.status.value,
            "attempts": self.attempts,
            "submitted_at": self.submitted_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "not_before": self.not_before,
            "required_stages": sorted(self.required_stages),
            "base_estimate_ns": self.base_estimate_ns,
            "checkpoint": self.checkpoint,
            "results": self.results,
            "error": self.error,
            "progress": list(self.progress) if self.progress else None,
            "cancel_requested": self.cancel_requested,
        }

    @staticmethod
    def from_dict(data: dict) -> "JobRecord":
        record = JobRecord(
            job_id=data["job_id"],
            descriptor=JobDescriptor.from_dict(data["descriptor"], user=data["user"]),
            backend_id=data["backend_id"],
        )
        record.status = JobStatus(data["status"])
        record.attempts = int(data.get("attempts", 0))
        record.submitted_at = data.get("submitted_at", 0.0)
        record.started_at = data.get("started_at")
        record.finished_at = data.get("finished_at")
        record.not_before = data.get("not_before", 0.0)
        record.required_stages = frozenset(data.get("required_stages", []))
        record.base_estimate_ns = data.get("base_estimate_ns", 0.0)
        record.checkpoint = data.get("checkpoint")
        record.results = data.get("results")
        record.error = data.get("error")
        progress = data.get("progress")
        record.progress = tuple(progress) if progress else None
        record.cancel_requested = bool(data.get("cancel_requested", False))
        return record


@dataclass
class WorkerInfo:
    worker_id: str
    stages: frozenset[str]
    backends: frozenset[str]
    max_parallel: int = 1
    last_heartbeat: float = 0.0

    def alive(self, now: float, ttl: float) -> bool:
        return now - self.last_heartbeat <= ttl

    def to_dict(self) -> dict:
        return {
            "worker_id": self.worker_id,
            "stages": sorted(self.stages),
            "backends": sorted(self.backends),
            "max_parallel": self.max_parallel,
            "last_heartbeat": self.last_heartbeat,
        }

    @staticmethod
    def from_dict(data: dict) -> "WorkerInfo":
        return WorkerInfo(
            worker_id=data["worker_id"],
            stages=frozenset(data.get("stages", [])),
            backends=frozenset(data.get("backends", [])),
            max_parallel=int(data.get("max_parallel", 1)),
            last_heartbeat=data.get("last_heartbeat", 0.0),
        )


@dataclass
class Reservation:
    """Exclusive [start, end) window on one backend for one user."""

    reservation_id: str
    backend_id: str
    user: str
    start: float
    end: float

    def overlaps(self, start: float, end: float) -> bool:
        return self.start < end and start < self.end

    def active_at(self, now: float) -> bool:
        return self.start <= now < self.end

    def status_at(self, now: float) -> str:
        if now < self.start:
            return "pending"
        return "active" if now < self.end else "expired"

    def to_dict(self) -> dict:
        return {
            "reservation_id": self.reservation_id,
            "backend_id": self.backend_id,
            "user": self.user,
            "start": self.start,
            "end": self.end,
        }

    @staticmethod
    def from_dict(data: dict) -> "Reservation":
        return Reservation(
            reservation_id=data["reservation_id"],
            backend_id=data["backend_id"],
            user=data["user"],
            start=data["start"],
            end=data["end"],
        )


@dataclass
class Session:
    session_id: str
    user: str
    backend_id: str
    ttl: float = DEFAULT_SESSION_TTL_S
    open: bool = True
    last_activity: float = 0.0

    def idle(self, now: float) -> bool:
        return now - self.last_activity > self.ttl

    def active(self, now: float) -> bool:
        return self.open and not self.idle(now)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "user": self.user,
            "backend_id": self.backend_id,
            "ttl": self.ttl,
            "open": self.open,
            "last_activity": self.last_activity,
        }

    @staticmethod
    def from_dict(data: dict) -> "Session":
        return Session(
            session_id=data["session_id"],
            user=data["user"],
            backend_id=data["backend_id"],
            ttl=data.get("ttl", DEFAULT_SESSION_TTL_S),
            open=bool(data.get("open", True)),
            last_activity=data.get("last_activity", 0.0),
        )

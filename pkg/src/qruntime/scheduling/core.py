"""Scheduler state machine: admission, queues, workers, reservations,
sessions, retries, and recovery.

All mutations run under one lock and append an event describing the change,
so the event log is a serialized history of scheduler state; `apply_event`
replays that history during recovery. Scheduling decisions themselves are
delegated to the pure functions in `policy`.

Execution is delegated to an engine object with

    start(record, worker_id, token) -> None

which must eventually call back `on_job_finished(job_id, token, outcome)`.
The token fences zombie completions: a completion whose token does not match
the record's current attempt is dropped.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from ..capabilities import BackendCapabilities
from ..circuits import QasmError, parse
from ..clock import Clock
from ..errors import (
    CapabilityMissing,
    InvalidJob,
    NoCapableBackend,
    ReservationConflict,
    UnknownBackend,
    UnknownJob,
    UnknownSession,
    UnknownWorker,
    UserLimitExceeded,
)
from ..store import Event
from ..transpiler import compile_template, estimate_fidelity
from .estimator import ResourceEstimator
from .policy import Assignment, SchedulerView, eta_seconds, next_decision
from .records import (
    DEFAULT_SESSION_TTL_S,
    JobDescriptor,
    JobRecord,
    JobStatus,
    Reservation,
    Session,
    WorkerInfo,
)

BACKOFF_CAP_S = 60.0


@dataclass
class SchedulerConfig:
    user_job_limit: int = 5
    worker_ttl_s: float = 30.0
    session_ttl_s: float = DEFAULT_SESSION_TTL_S
    reservation_default_s: float = 900.0


@dataclass
class JobOutcome:
    completed: bool
    results: dict | None = None
    error: dict | None = None
    transient: bool = False


EmitFn = Callable[[str, dict], None]


class Scheduler:
    def __init__(
        self,
        clock: Clock,
        backends: dict[str, BackendCapabilities],
        estimator: ResourceEstimator | None = None,
        config: SchedulerConfig | None = None,
        emit: EmitFn | None = None,
        calibration_lookup: Callable[[str], object] | None = None,
    ):
        self._clock = clock
        self._backends = dict(backends)
        self._estimator = estimator or ResourceEstimator()
        self._config = config or SchedulerConfig()
        self._emit_fn = emit
        self._calibration_lookup = calibration_lookup
        self._engine = None

        self._lock = threading.RLock()
        self._jobs: dict[str, JobRecord] = {}
        self._workers: dict[str, WorkerInfo] = {}
        self._reservations: list[Reservation] = []
        self._sessions: dict[str, Session] = {}
        self._engaged_sessions: dict[str, str | None] = {}
        self._backend_busy: dict[str, str | None] = {b: None for b in self._backends}
        self._worker_load: dict[str, int] = {}
        self._idempotency: dict[tuple[str, str], str] = {}
        self._next_job = 1
        self._next_reservation = 1
        self._next_session = 1

    # ------------------------------------------------------------- plumbing

    def attach_engine(self, engine) -> None:
        self._engine = engine

    @property
    def estimator(self) -> ResourceEstimator:
        return self._estimator

    def _emit(self, kind: str, payload: dict) -> None:
        if self._emit_fn is not None:
            self._emit_fn(kind, payload)

    def _now(self) -> float:
        return self._clock.now()

    def backend_caps(self, backend_id: str) -> BackendCapabilities:
        caps = self._backends.get(backend_id)
        if caps is None:
            raise UnknownBackend(f"no backend named '{backend_id}'")
        return caps

    def backend_ids(self) -> list[str]:
        return sorted(self._backends)

    # ------------------------------------------------------------- admission

    def _live_workers(self, now: float) -> list[WorkerInfo]:
        return [w for w in self._workers.values() if w.alive(now, self._config.worker_ttl_s)]

    def _check_capabilities(self, required: frozenset[str], backend_id: str, now: float) -> None:
        live = self._live_workers(now)
        if any(required <= w.stages and backend_id in w.backends for w in live):
            return
        advertised: set[str] = set()
        for w in live:
            advertised |= w.stages
        missing = sorted(required - advertised)
        if missing:
            raise CapabilityMissing(
                f"no live worker provides stage '{missing[0]}'", details={"stage": missing[0]}
            )
        raise CapabilityMissing(
            f"no live worker serves backend '{backend_id}' with the required stages",
            details={"backend_id": backend_id, "stages": sorted(required)},
        )

    def _parse_items(self, descriptor: JobDescriptor):
        circuits = []
        for idx, item in enumerate(descriptor.items):
            try:
                circuit = parse(item.circuit_text)
            except QasmError as exc:
                raise InvalidJob(f"item {idx}: {exc}") from None
            if descriptor.kind == "hybrid":
                if not circuit.symbols:
                    raise InvalidJob("the hybrid item must be parametric")
                missing = circuit.symbols - set(descriptor.hybrid.initial_params)
                if missing:
                    raise InvalidJob(f"initial_params missing values for {sorted(missing)}")
            elif circuit.symbols:
                raise InvalidJob(
                    f"item {idx} has unbound parameters {sorted(circuit.symbols)}; "
                    "only hybrid jobs may be parametric"
                )
            circuits.append(circuit)
        return circuits

    def _check_fit(self, circuits, descriptor: JobDescriptor, caps: BackendCapabilities) -> bool:
        for circuit, item in zip(circuits, descriptor.items):
            if circuit.num_qubits > caps.num_qubits:
                return False
            if item.shots > caps.max_shots:
                return False
        return True

    def select_backend(self, descriptor: JobDescriptor, circuits, now: float) -> str:
        """Pick the backend maximizing the compiled job's estimated fidelity;
        ties break toward lower eta, then lexicographic id."""
        required = _required_stages(descriptor)
        scored = []
        for backend_id in self.backend_ids():
            caps = self._backends[backend_id]
            if not self._check_fit(circuits, descriptor, caps):
                continue
            live = self._live_workers(now)
            if not any(required <= w.stages and backend_id in w.backends for w in live):
                continue
            cal = self._calibration_lookup(backend_id) if self._calibration_lookup else None
            if cal is None:
                continue
            fidelity = 1.0
            try:
                for circuit in circuits:
                    template = compile_template(circuit, caps, cal)
                    fidelity *= estimate_fidelity(template.routed, cal)
            except Exception:
                continue
            backlog = self._backend_backlog_s(backend_id, now)
            scored.append((-fidelity, backlog, backend_id))
        if not scored:
            raise NoCapableBackend("no backend can run this job")
        scored.sort()
        return scored[0][2]

    def _backend_backlog_s(self, backend_id: str, now: float) -> float:
        total = 0.0
        for record in self._jobs.values():
            if record.backend_id != backend_id:
                continue
            if record.status == JobStatus.QUEUED:
                total += self._estimate_s(record)
            elif record.status == JobStatus.RUNNING and record.run_started_at is not None:
                total += max(record.run_started_at + self._estimate_s(record) - now, 0.0)
        return total

    def submit(self, descriptor: JobDescriptor) -> JobRecord:
        now = self._now()
        with self._lock:
            descriptor.check()
            if descriptor.idempotency_key is not None:
                prior = self._idempotency.get((descriptor.user, descriptor.idempotency_key))
                if prior is not None:
                    return self._jobs[prior]

            circuits = self._parse_items(descriptor)
            if descriptor.backend_name == "auto":
                backend_id = self.select_backend(descriptor, circuits, now)
            else:
                backend_id = descriptor.backend_name
                caps = self.backend_caps(backend_id)
                for idx, (circuit, item) in enumerate(zip(circuits, descriptor.items)):
                    if circuit.num_qubits > caps.num_qubits:
                        raise InvalidJob(
                            f"item {idx} needs {circuit.num_qubits} qubits; "
                            f"backend '{backend_id}' has {caps.num_qubits}"
                        )
                    if item.shots > caps.max_shots:
                        raise InvalidJob(
                            f"item {idx} asks for {item.shots} shots; "
                            f"backend '{backend_id}' allows {caps.max_shots}"
                        )

            required = _required_stages(descriptor)
            self._check_capabilities(required, backend_id, now)

            active = sum(1 for r in self._jobs.values() if r.user == descriptor.user and not r.terminal)
            if active >= self._config.user_job_limit:
                raise UserLimitExceeded(
                    f"user '{descriptor.user}' already has {active} active jobs "
                    f"(limit {self._config.user_job_limit})"
                )

            if descriptor.session_id is not None:
                session = self._sessions.get(descriptor.session_id)
                if session is None:
                    raise UnknownSession(f"no session '{descriptor.session_id}'")
                if session.user != descriptor.user:
                    raise UnknownSession(f"no session '{descriptor.session_id}'")
                if not session.open:
                    raise InvalidJob(f"session '{descriptor.session_id}' is closed")
                if session.backend_id != backend_id:
                    raise InvalidJob(
                        f"session '{descriptor.session_id}' is bound to backend "
                        f"'{session.backend_id}', not '{backend_id}'"
                    )
                session.last_activity = now
                self._emit("session_touched", {"session_id": session.session_id, "at": now})

            caps = self._backends[backend_id]
            base_ns = self._estimator.estimate_job_ns(descriptor, caps)
            job_id = f"job-{self._next_job:06d}"
            self._next_job += 1
            record = JobRecord(
                job_id=job_id,
                descriptor=descriptor,
                backend_id=backend_id,
                submitted_at=now,
                required_stages=required,
                base_estimate_ns=base_ns,
            )
            total = descriptor.hybrid.iterations if descriptor.kind == "hybrid" else len(descriptor.items)
            record.progress = (0, total)
            self._jobs[job_id] = record
            if descriptor.idempotency_key is not None:
                self._idempotency[(descriptor.user, descriptor.idempotency_key)] = job_id
            self._emit(
                "job_submitted",
                {
                    "job_id": job_id,
                    "descriptor": descriptor.to_dict(),
                    "user": descriptor.user,
                    "backend_id": backend_id,
                    "required_stages": sorted(required),
                    "submitted_at": now,
                    "base_estimate_ns": base_ns,
                },
            )
            return record

    # ------------------------------------------------------------- queries

    def job(self, job_id: str) -> JobRecord:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                raise UnknownJob(f"no job '{job_id}'")
            return record

    def jobs(self) -> list[JobRecord]:
        with self._lock:
            return list(self._jobs.values())

    def eta(self, job_id: str) -> float:
        with self._lock:
            record = self.job(job_id)
            if record.terminal or record.status == JobStatus.RUNNING:
                return 0.0
            return eta_seconds(record, self._view(self._now()))

    # ------------------------------------------------------------- commands

    def cancel(self, job_id: str) -> JobRecord:
        now = self._now()
        with self._lock:
            record = self.job(job_id)
            if record.terminal:
                return record
            if record.status in (JobStatus.QUEUED, JobStatus.SCHEDULED):
                self._release(record)
                self._transition(record, JobStatus.CANCELLED, now, reason="cancelled by user")
            else:  # RUNNING: flag it; the engine aborts at the next boundary
                if not record.cancel_requested:
                    record.cancel_requested = True
                    self._emit("job_cancel_requested", {"job_id": job_id, "at": now})
            return record

    def register_worker(self, worker_id: str, stages, backends, max_parallel: int = 1) -> WorkerInfo:
        now = self._now()
        with self._lock:
            info = WorkerInfo(
                worker_id=worker_id,
                stages=frozenset(stages),
                backends=frozenset(backends),
                max_parallel=max_parallel,
                last_heartbeat=now,
            )
            self._workers[worker_id] = info
            self._worker_load.setdefault(worker_id, 0)
            self._emit(
                "worker_registered",
                {
                    "worker_id": worker_id,
                    "stages": sorted(info.stages),
                    "backends": sorted(info.backends),
                    "max_parallel": max_parallel,
                    "at": now,
                },
            )
            return info

    def heartbeat(self, worker_id: str) -> WorkerInfo:
        now = self._now()
        with self._lock:
            info = self._workers.get(worker_id)
            if info is None:
                raise UnknownWorker(f"no worker '{worker_id}' registered")
            info.last_heartbeat = now
            self._emit("worker_heartbeat", {"worker_id": worker_id, "at": now})
            return info

    def workers(self) -> list[WorkerInfo]:
        with self._lock:
            return list(self._workers.values())

    def reserve(self, backend_id: str, user: str, start: float, duration_s: float | None = None) -> Reservation:
        now = self._now()
        with self._lock:
            self.backend_caps(backend_id)
            if duration_s is None:
                duration_s = self._config.reservation_default_s
            if duration_s <= 0:
                raise InvalidJob("reservation duration must be > 0")
            if start < now:
                raise InvalidJob("reservation start must not be in the past")
            end = start + duration_s
            for r in self._reservations:
                if r.backend_id == backend_id and r.overlaps(start, end):
                    raise ReservationConflict(
                        f"overlaps reservation '{r.reservation_id}'",
                        details={"reservation_id": r.reservation_id},
                    )
            reservation = Reservation(
                reservation_id=f"res-{self._next_reservation:04d}",
                backend_id=backend_id,
                user=user,
                start=start,
                end=end,
            )
            self._next_reservation += 1
            self._reservations.append(reservation)
            self._emit("reservation_created", reservation.to_dict())
            return reservation

    def reservations(self) -> list[Reservation]:
        with self._lock:
            return list(self._reservations)

    def open_session(self, user: str, backend_id: str, ttl: float | None = None) -> Session:
        now = self._now()
        with self._lock:
            self.backend_caps(backend_id)
            session = Session(
                session_id=f"ses-{self._next_session:04d}",
                user=user,
                backend_id=backend_id,
                ttl=ttl if ttl is not None else self._config.session_ttl_s,
                last_activity=now,
            )
            self._next_session += 1
            self._sessions[session.session_id] = session
            self._emit(
                "session_opened",
                {
                    "session_id": session.session_id,
                    "user": user,
                    "backend_id": backend_id,
                    "ttl": session.ttl,
                    "at": now,
                },
            )
            return session

    def close_session(self, session_id: str, user: str | None = None) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None or (user is not None and session.user != user):
                raise UnknownSession(f"no session '{session_id}'")
            if session.open:
                session.open = False
                self._emit("session_closed", {"session_id": session_id})
            return session

    def session(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(f"no session '{session_id}'")
            return session

    # ------------------------------------------------------------- the loop

    def _estimate_s(self, record: JobRecord) -> float:
        return self._estimator.adjusted_seconds(record.backend_id, record.base_estimate_ns)

    def _view(self, now: float) -> SchedulerView:
        estimates = {
            r.job_id: self._estimate_s(r)
            for r in self._jobs.values()
            if not r.terminal
        }
        return SchedulerView(
            now=now,
            backends=tuple(self.backend_ids()),
            jobs=tuple(self._jobs.values()),
            workers=tuple(self._workers.values()),
            reservations=tuple(self._reservations),
            sessions=dict(self._sessions),
            engaged_sessions=dict(self._engaged_sessions),
            backend_busy=dict(self._backend_busy),
            worker_load=dict(self._worker_load),
            worker_ttl=self._config.worker_ttl_s,
            estimates_s=estimates,
        )

    def pump(self) -> list[Assignment]:
        """Expire workers, make assignments, and hand them to the engine."""
        now = self._now()
        dispatches: list[tuple[JobRecord, Assignment, tuple]] = []
        with self._lock:
            self._expire_workers(now)
            assignments = next_decision(self._view(now))
            for a in assignments:
                record = self._jobs[a.job_id]
                self._transition(record, JobStatus.SCHEDULED, now, worker=a.worker_id)
                record.assigned_worker = a.worker_id
                self._worker_load[a.worker_id] = self._worker_load.get(a.worker_id, 0) + 1
                self._transition(record, JobStatus.RUNNING, now, worker=a.worker_id)
                self._backend_busy[a.backend_id] = a.job_id
                self._engaged_sessions[a.backend_id] = record.session_id
                dispatches.append((record, a, (a.job_id, record.attempts)))
        for record, a, token in dispatches:
            if self._engine is not None:
                self._engine.start(record, a.worker_id, token)
        return [a for _, a, _ in dispatches]

    def _expire_workers(self, now: float) -> None:
        for worker_id, info in list(self._workers.items()):
            if info.alive(now, self._config.worker_ttl_s):
                continue
            for record in self._jobs.values():
                if record.status == JobStatus.RUNNING and record.assigned_worker == worker_id:
                    self._release(record)
                    self._requeue_or_fail(
                        record,
                        now,
                        error={"code": "WORKER_LOST", "message": f"worker '{worker_id}' missed heartbeats"},
                    )

    def _release(self, record: JobRecord) -> None:
        if self._backend_busy.get(record.backend_id) == record.job_id:
            self._backend_busy[record.backend_id] = None
        if record.assigned_worker is not None:
            load = self._worker_load.get(record.assigned_worker, 0)
            self._worker_load[record.assigned_worker] = max(load - 1, 0)
            record.assigned_worker = None

    def _requeue_or_fail(self, record: JobRecord, now: float, error: dict) -> None:
        if record.attempts <= record.descriptor.max_retries:
            record.not_before = now + min(2.0**record.attempts, BACKOFF_CAP_S)
            self._transition(record, JobStatus.QUEUED, now, reason=error.get("message"))
        else:
            record.error = error
            self._transition(record, JobStatus.FAILED, now, reason=error.get("message"))

    def on_job_finished(self, job_id: str, token: tuple, outcome: JobOutcome) -> None:
        now = self._now()
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None or record.status != JobStatus.RUNNING:
                return
            if token != (job_id, record.attempts):
                return  # a stale attempt is reporting back; ignore it
            self._release(record)
            session = self._sessions.get(record.session_id) if record.session_id else None
            if session is not None:
                session.last_activity = now
                self._emit("session_touched", {"session_id": session.session_id, "at": now})
            if outcome.completed:
                record.results = outcome.results
                if record.progress is not None:
                    record.progress = (record.progress[1], record.progress[1])
                self._emit("job_results", {"job_id": job_id, "results": outcome.results})
                self._transition(record, JobStatus.COMPLETED, now)
            elif outcome.transient:
                self._requeue_or_fail(record, now, error=outcome.error or {})
            else:
                record.error = outcome.error
                self._transition(record, JobStatus.FAILED, now, reason=(outcome.error or {}).get("message"))

    def record_checkpoint(self, job_id: str, checkpoint: dict) -> None:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                return
            record.checkpoint = checkpoint
            if record.progress is not None:
                record.progress = (int(checkpoint.get("iteration", 0)), record.progress[1])
            payload = {"job_id": job_id, "iteration": int(checkpoint.get("iteration", 0)), "state": checkpoint}
            self._emit("job_checkpoint", payload)

    def record_progress(self, job_id: str, completed: int, total: int) -> None:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                return
            record.progress = (completed, total)
            self._emit("job_progress", {"job_id": job_id, "completed": completed, "total": total})

    def cancel_requested(self, job_id: str) -> bool:
        with self._lock:
            record = self._jobs.get(job_id)
            return bool(record and record.cancel_requested)

    def _transition(
        self,
        record: JobRecord,
        to: JobStatus,
        now: float,
        worker: str | None = None,
        reason: str | None = None,
    ) -> None:
        origin = record.status
        record.transition(to, now)
        payload = {
            "job_id": record.job_id,
            "from": origin.value,
            "to": to.value,
            "at": now,
            "attempts": record.attempts,
            "not_before": record.not_before,
        }
        if worker is not None:
            payload["worker"] = worker
        if reason:
            payload["reason"] = reason
        if record.error is not None and to == JobStatus.FAILED:
            payload["error"] = record.error
        self._emit("job_transition", payload)

    # ------------------------------------------------------------- recovery

    def apply_event(self, event: Event) -> None:
        """Replay one persisted event into scheduler state (no re-emission)."""
        kind, p = event.kind, event.payload
        if kind == "job_submitted":
            descriptor = JobDescriptor.from_dict(p["descriptor"], user=p["user"])
            record = JobRecord(
                job_id=p["job_id"],
                descriptor=descriptor,
                backend_id=p["backend_id"],
                submitted_at=p.get("submitted_at", event.timestamp),
                required_stages=frozenset(p.get("required_stages", [])),
                base_estimate_ns=p.get("base_estimate_ns", 0.0),
            )
            total = descriptor.hybrid.iterations if descriptor.kind == "hybrid" else len(descriptor.items)
            record.progress = (0, total)
            self._jobs[record.job_id] = record
            if descriptor.idempotency_key is not None:
                self._idempotency[(descriptor.user, descriptor.idempotency_key)] = record.job_id
            number = int(record.job_id.rsplit("-", 1)[-1])
            self._next_job = max(self._next_job, number + 1)
        elif kind == "job_transition":
            record = self._jobs.get(p["job_id"])
            if record is None:
                return
            to = JobStatus(p["to"])
            at = p.get("at", event.timestamp)
            record.status = to
            record.attempts = int(p.get("attempts", record.attempts))
            record.not_before = p.get("not_before", record.not_before)
            if to == JobStatus.RUNNING:
                record.run_started_at = at
                if record.started_at is None:
                    record.started_at = at
                record.assigned_worker = p.get("worker")
                self._backend_busy[record.backend_id] = record.job_id
                self._engaged_sessions[record.backend_id] = record.session_id
                if record.assigned_worker:
                    self._worker_load[record.assigned_worker] = self._worker_load.get(record.assigned_worker, 0) + 1
            else:
                if self._backend_busy.get(record.backend_id) == record.job_id:
                    self._backend_busy[record.backend_id] = None
                if record.assigned_worker:
                    load = self._worker_load.get(record.assigned_worker, 0)
                    self._worker_load[record.assigned_worker] = max(load - 1, 0)
                    record.assigned_worker = None
            if to in (JobStatus.COMPLETED, JobStatus.FAILED, JobStatus.CANCELLED):
                record.finished_at = at
                if to == JobStatus.FAILED and p.get("error"):
                    record.error = p["error"]
        elif kind == "job_checkpoint":
            record = self._jobs.get(p["job_id"])
            if record is not None:
                record.checkpoint = p.get("state")
                if record.progress is not None:
                    record.progress = (int(p.get("iteration", 0)), record.progress[1])
        elif kind == "job_results":
            record = self._jobs.get(p["job_id"])
            if record is not None:
                record.results = p.get("results")
                if record.progress is not None:
                    record.progress = (record.progress[1], record.progress[1])
        elif kind == "job_progress":
            record = self._jobs.get(p["job_id"])
            if record is not None:
                record.progress = (int(p["completed"]), int(p["total"]))
        elif kind == "job_cancel_requested":
            record = self._jobs.get(p["job_id"])
            if record is not None:
                record.cancel_requested = True
        elif kind == "worker_registered":
            info = WorkerInfo(
                worker_id=p["worker_id"],
                stages=frozenset(p.get("stages", [])),
                backends=frozenset(p.get("backends", [])),
                max_parallel=int(p.get("max_parallel", 1)),
                last_heartbeat=p.get("at", event.timestamp),
            )
            self._workers[info.worker_id] = info
            self._worker_load.setdefault(info.worker_id, 0)
        elif kind == "worker_heartbeat":
            info = self._workers.get(p["worker_id"])
            if info is not None:
                info.last_heartbeat = p["at"]
        elif kind == "reservation_created":
            reservation = Reservation.from_dict(p)
            self._reservations.append(reservation)
            number = int(reservation.reservation_id.rsplit("-", 1)[-1])
            self._next_reservation = max(self._next_reservation, number + 1)
        elif kind == "session_opened":
            session = Session(
                session_id=p["session_id"],
                user=p["user"],
                backend_id=p["backend_id"],
                ttl=p.get("ttl", self._config.session_ttl_s),
                last_activity=p.get("at", event.timestamp),
            )
            self._sessions[session.session_id] = session
            number = int(session.session_id.rsplit("-", 1)[-1])
            self._next_session = max(self._next_session, number + 1)
        elif kind == "session_closed":
            session = self._sessions.get(p["session_id"])
            if session is not None:
                session.open = False
        elif kind == "session_touched":
            session = self._sessions.get(p["session_id"])
            if session is not None:
                session.last_activity = p["at"]
        # calibration_recorded is handled by the platform, not the scheduler

    def finish_recovery(self) -> list[str]:
        """Requeue anything that was in flight when the process died; returns
        the requeued job ids. Emits fresh transition events so the log stays
        a faithful history."""
        now = self._now()
        requeued = []
        with self._lock:
            for record in self._jobs.values():
                if record.status in (JobStatus.RUNNING, JobStatus.SCHEDULED):
                    self._release(record)
                    record.not_before = 0.0
                    self._transition(record, JobStatus.QUEUED, now, reason="recovered after restart")
                    requeued.append(record.job_id)
        return requeued

    # ------------------------------------------------------------- snapshots

    def state_dict(self) -> dict:
        with self._lock:
            return {
                "jobs": {jid: r.to_dict() for jid, r in sorted(self._jobs.items())},
                "workers": {wid: w.to_dict() for wid, w in sorted(self._workers.items())},
                "reservations": [r.to_dict() for r in self._reservations],
                "sessions": {sid: s.to_dict() for sid, s in sorted(self._sessions.items())},
                "engaged_sessions": dict(self._engaged_sessions),
                "idempotency": {f"{u}\x00{k}": jid for (u, k), jid in sorted(self._idempotency.items())},
                "counters": {
                    "job": self._next_job,
                    "reservation": self._next_reservation,
                    "session": self._next_session,
                },
            }

    def restore_state(self, state: dict) -> None:
        with self._lock:
            self._jobs = {jid: JobRecord.from_dict(d) for jid, d in state.get("jobs", {}).items()}
            self._workers = {wid: WorkerInfo.from_dict(d) for wid, d in state.get("workers", {}).items()}
            self._reservations = [Reservation.from_dict(d) for d in state.get("reservations", [])]
            self._sessions = {sid: Session.from_dict(d) for sid, d in state.get("sessions", {}).items()}
            self._engaged_sessions = dict(state.get("engaged_sessions", {}))
            self._idempotency = {}
            for key, jid in state.get("idempotency", {}).items():
                user, _, idem = key.partition("\x00")
                self._idempotency[(user, idem)] = jid
            counters = state.get("counters", {})
            self._next_job = counters.get("job", 1)
            self._next_reservation = counters.get("reservation", 1)
            self._next_session = counters.get("session", 1)
            self._backend_busy = {b: None for b in self._backends}
            self._worker_load = {wid: 0 for wid in self._workers}
            for record in self._jobs.values():
                if record.status == JobStatus.RUNNING:
                    self._backend_busy[record.backend_id] = record.job_id


def _required_stages(descriptor: JobDescriptor) -> frozenset[str]:
    names: set[str] = set()
    for item in descriptor.items:
        for spec in item.execution_options:
            names.add(spec.name)
    return frozenset(names)

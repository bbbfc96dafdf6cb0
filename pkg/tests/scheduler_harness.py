"""Simulated-clock harness for scheduler behavior tests.

The fake engine completes jobs after exactly their estimated duration on the
manual clock (with optional injected failures), so traces are deterministic
and time-based invariants are exact. `check_decisions`, when enabled, recomputes
every assignment with a test-local reimplementation of the documented
comparator and fails on any divergence.
"""

from __future__ import annotations

from dataclasses import dataclass

from qruntime.capabilities import BackendCapabilities, line_coupling
from qruntime.clock import ManualClock
from qruntime.pipeline import StageSpec
from qruntime.scheduling import (
    JobDescriptor,
    JobItem,
    JobOutcome,
    JobStatus,
    ResourceEstimator,
    Scheduler,
    SchedulerConfig,
)

CIRCUIT = "qreg q[1]; creg c[1]; x q[0]; measure q[0] -> c[0];"


def simple_caps(backend_id: str, num_qubits: int = 3) -> BackendCapabilities:
    return BackendCapabilities(
        backend_id=backend_id,
        num_qubits=num_qubits,
        coupling=line_coupling(num_qubits),
        gate_durations={"rz": 10.0, "sx": 35.0, "x": 35.0, "cx": 300.0},
    )


class SecondsEstimator(ResourceEstimator):
    """Interprets an item's shot count as its duration in seconds."""

    def estimate_job_ns(self, descriptor, caps):
        return float(sum(item.shots for item in descriptor.items)) * 1e9

    def adjusted_seconds(self, backend_id, base_ns):
        return base_ns / 1e9


@dataclass
class PendingCompletion:
    finish_at: float
    order: int
    job_id: str
    token: tuple
    outcome: JobOutcome


class FakeEngine:
    def __init__(self, harness: "Harness"):
        self.harness = harness
        self.pending: list[PendingCompletion] = []
        self._order = 0
        self.fail_plan = None  # callable(record, attempt) -> JobOutcome | None

    def start(self, record, worker_id, token):
        duration = record.base_estimate_ns / 1e9
        outcome = None
        if self.fail_plan is not None:
            outcome = self.fail_plan(record, record.attempts)
        if outcome is None:
            outcome = JobOutcome(completed=True, results={"items": []})
        self._order += 1
        self.pending.append(
            PendingCompletion(
                finish_at=self.harness.clock.now() + duration,
                order=self._order,
                job_id=record.job_id,
                token=token,
                outcome=outcome,
            )
        )

    def deliver_due(self, now: float) -> int:
        due = sorted(
            [p for p in self.pending if p.finish_at <= now], key=lambda p: (p.finish_at, p.order)
        )
        for item in due:
            self.pending.remove(item)
            self.harness.scheduler.on_job_finished(item.job_id, item.token, item.outcome)
        return len(due)

    def next_finish(self) -> float | None:
        return min((p.finish_at for p in self.pending), default=None)


class Harness:
    def __init__(
        self,
        backend_ids=("alpha", "beta"),
        user_job_limit: int = 5,
        worker_ttl: float = 30.0,
        session_ttl: float = 600.0,
        check_decisions: bool = True,
    ):
        self.clock = ManualClock(10_000.0)
        self.events: list[tuple[str, dict]] = []
        self.caps = {bid: simple_caps(bid) for bid in backend_ids}
        self.scheduler = Scheduler(
            clock=self.clock,
            backends=self.caps,
            estimator=SecondsEstimator(),
            config=SchedulerConfig(
                user_job_limit=user_job_limit,
                worker_ttl_s=worker_ttl,
                session_ttl_s=session_ttl,
            ),
            emit=lambda kind, payload: self.events.append((kind, dict(payload))),
        )
        self.engine = FakeEngine(self)
        self.scheduler.attach_engine(self.engine)
        self.check_decisions = check_decisions
        self.auto_heartbeat = True  # keep workers alive across time jumps
        self.engaged: dict[str, str | None] = {}  # test-local affinity tracking
        self.start_log: list[tuple[float, str, str]] = []  # (at, backend, job_id)
        self.decision_mismatches: list[str] = []

    # ------------------------------------------------------------- commands

    def add_worker(self, worker_id="w1", stages=("EM",), backends=None, max_parallel=16):
        return self.scheduler.register_worker(
            worker_id, stages=stages, backends=backends or list(self.caps), max_parallel=max_parallel
        )

    def heartbeat_all(self):
        for w in self.scheduler.workers():
            try:
                self.scheduler.heartbeat(w.worker_id)
            except Exception:
                pass

    def submit(
        self,
        user="u1",
        backend="alpha",
        duration_s: int = 1,
        priority: int = 0,
        session_id=None,
        options=(),
        max_retries: int = 3,
        idempotency_key=None,
    ):
        descriptor = JobDescriptor(
            user=user,
            kind="single",
            backend_name=backend,
            items=(
                JobItem(
                    circuit_text=CIRCUIT,
                    shots=duration_s,
                    execution_options=tuple(StageSpec(name=o) for o in options),
                ),
            ),
            priority=priority,
            session_id=session_id,
            max_retries=max_retries,
            idempotency_key=idempotency_key,
        )
        return self.scheduler.submit(descriptor)

    # ------------------------------------------------------------- stepping

    def _expected_choice(self, backend_id: str) -> str | None:
        """Test-local reimplementation of the documented selection order."""
        now = self.clock.now()
        sched = self.scheduler
        if sched._backend_busy.get(backend_id):
            return None
        live = [w for w in sched.workers() if now - w.last_heartbeat <= sched._config.worker_ttl_s]
        candidates = []
        for record in sched.jobs():
            if record.status != JobStatus.QUEUED or record.backend_id != backend_id:
                continue
            if record.not_before > now:
                continue
            est = record.base_estimate_ns / 1e9
            blocked = False
            for r in sched.reservations():
                if r.backend_id == backend_id and r.user != record.user:
                    if (r.start < now + max(est, 0.0) and now < r.end) or (r.start <= now < r.end):
                        blocked = True
            if blocked:
                continue
            if not any(
                record.required_stages <= w.stages and backend_id in w.backends for w in live
            ):
                continue
            sid = record.session_id
            session = sched._sessions.get(sid) if sid else None
            session_live = bool(session and session.open and now - session.last_activity <= session.ttl)
            engaged = self.engaged.get(backend_id)
            engaged_session = sched._sessions.get(engaged) if engaged else None
            engaged_live = bool(
                engaged_session
                and engaged_session.open
                and now - engaged_session.last_activity <= engaged_session.ttl
            )
            if not session_live:
                rank = 2
            elif engaged_live:
                rank = 0 if sid == engaged else 1
            else:
                rank = 1
            candidates.append(
                ((rank, -record.descriptor.priority, record.submitted_at, record.job_id), record.job_id)
            )
        if not candidates:
            return None
        return min(candidates)[1]

    def step(self):
        now = self.clock.now()
        if self.auto_heartbeat:
            self.heartbeat_all()
        self.engine.deliver_due(now)
        expected = {}
        if self.check_decisions:
            for backend_id in sorted(self.caps):
                expected[backend_id] = self._expected_choice(backend_id)
        assignments = self.scheduler.pump()
        for a in assignments:
            self.start_log.append((now, a.backend_id, a.job_id))
            record = self.scheduler.job(a.job_id)
            self.engaged[a.backend_id] = record.session_id
            if self.check_decisions and expected.get(a.backend_id) != a.job_id:
                self.decision_mismatches.append(
                    f"t={now}: backend {a.backend_id} started {a.job_id}, "
                    f"comparator oracle wanted {expected.get(a.backend_id)}"
                )
        if self.check_decisions:
            assigned_backends = {a.backend_id for a in assignments}
            for backend_id, choice in expected.items():
                if choice is not None and backend_id not in assigned_backends:
                    self.decision_mismatches.append(
                        f"t={now}: backend {backend_id} idle but oracle wanted {choice}"
                    )
        return assignments

    def advance(self, dt: float):
        """Move time forward, stopping at every pending completion so jobs
        finish at exactly their logical end time."""
        target = self.clock.now() + dt
        while True:
            nf = self.engine.next_finish()
            if nf is None or nf >= target or nf <= self.clock.now():
                break
            self.clock.set(nf)
            self.step()
        self.clock.set(target)
        return self.step()

    def run_until_quiet(self, max_seconds: float = 4_000_000.0, auto_heartbeat: bool = True):
        deadline = self.clock.now() + max_seconds
        while self.clock.now() < deadline:
            if auto_heartbeat:
                self.heartbeat_all()
            self.step()
            schedulable = [
                r
                for r in self.scheduler.jobs()
                if r.status in (JobStatus.QUEUED, JobStatus.SCHEDULED, JobStatus.RUNNING)
            ]
            if not schedulable and not self.engine.pending:
                return
            times = [p.finish_at for p in self.engine.pending]
            times += [
                r.not_before
                for r in schedulable
                if r.status == JobStatus.QUEUED and r.not_before > self.clock.now()
            ]
            for r in self.scheduler.reservations():
                if r.end > self.clock.now():
                    times += [max(r.start, self.clock.now() + 0.001), r.end]
            nxt = min([t for t in times if t > self.clock.now()], default=self.clock.now() + 1.0)
            self.clock.set(nxt)
        raise TimeoutError("trace did not quiesce")

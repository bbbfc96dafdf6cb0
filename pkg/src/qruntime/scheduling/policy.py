"""Pure scheduling decisions.

`next_decision` inspects a read-only view of scheduler state and returns the
assignments to make right now; it never mutates anything, so ordering
policies are unit-testable in isolation. The eligibility comparator is, in
precedence order:

    1. session affinity - jobs of the backend's engaged session, then jobs of
       any other open non-idle session, then plain jobs;
    2. priority, larger integer first;
    3. submission time, earlier first;
    4. job_id, lexicographic.

Reservation windows gate new assignments only (running jobs are never
preempted): a job is skipped while its estimated run would overlap another
user's window.
"""

from __future__ import annotations

from dataclasses import dataclass

from .records import JobRecord, JobStatus, Reservation, Session, WorkerInfo


@dataclass(frozen=True)
class Assignment:
    job_id: str
    worker_id: str
    backend_id: str


@dataclass(frozen=True)
class SchedulerView:
    """Immutable snapshot of everything a decision needs."""

    now: float
    backends: tuple[str, ...]
    jobs: tuple[JobRecord, ...]
    workers: tuple[WorkerInfo, ...]
    reservations: tuple[Reservation, ...]
    sessions: dict[str, Session]
    engaged_sessions: dict[str, str | None]  # backend -> session currently holding affinity
    backend_busy: dict[str, str | None]  # backend -> running job
    worker_load: dict[str, int]
    worker_ttl: float
    estimates_s: dict[str, float]  # job_id -> adjusted duration estimate


def _session_rank(job: JobRecord, view: SchedulerView) -> int:
    sid = job.session_id
    if sid is None:
        return 2
    session = view.sessions.get(sid)
    if session is None or not session.active(view.now):
        return 2
    engaged = view.engaged_sessions.get(job.backend_id)
    engaged_session = view.sessions.get(engaged) if engaged else None
    if engaged_session is not None and engaged_session.active(view.now):
        return 0 if sid == engaged else 1
    return 1


def comparator_key(job: JobRecord, view: SchedulerView) -> tuple:
    return (_session_rank(job, view), -job.descriptor.priority, job.submitted_at, job.job_id)


def blocked_by_reservation(job: JobRecord, view: SchedulerView) -> bool:
    """True when starting the job now would overlap a foreign window."""
    est = view.estimates_s.get(job.job_id, 0.0)
    start, end = view.now, view.now + max(est, 0.0)
    for r in view.reservations:
        if r.backend_id != job.backend_id or r.user == job.user:
            continue
        if r.overlaps(start, end) or r.active_at(view.now):
            return True
    return False


def worker_for(job: JobRecord, view: SchedulerView, tentative_load: dict[str, int]) -> str | None:
    candidates = []
    for w in view.workers:
        if not w.alive(view.now, view.worker_ttl):
            continue
        if job.backend_id not in w.backends:
            continue
        if not job.required_stages <= w.stages:
            continue
        if tentative_load.get(w.worker_id, 0) >= w.max_parallel:
            continue
        candidates.append(w.worker_id)
    return min(candidates) if candidates else None


def next_decision(view: SchedulerView) -> list[Assignment]:
    """One assignment per idle backend, chosen by the comparator."""
    assignments: list[Assignment] = []
    tentative_load = dict(view.worker_load)
    for backend_id in view.backends:
        if view.backend_busy.get(backend_id):
            continue
        eligible = [
            j
            for j in view.jobs
            if j.status == JobStatus.QUEUED
            and j.backend_id == backend_id
            and j.not_before <= view.now
            and not blocked_by_reservation(j, view)
        ]
        eligible.sort(key=lambda j: comparator_key(j, view))
        for job in eligible:
            worker_id = worker_for(job, view, tentative_load)
            if worker_id is None:
                continue  # nobody can run it right now; try the next job
            assignments.append(Assignment(job_id=job.job_id, worker_id=worker_id, backend_id=backend_id))
            tentative_load[worker_id] = tentative_load.get(worker_id, 0) + 1
            break
    return assignments


def _advance_past_blackouts(t: float, duration: float, user: str, backend_id: str, reservations: tuple[Reservation, ...]) -> float:
    """Earliest start >= t at which a run of `duration` avoids all foreign
    windows on the backend."""
    moved = True
    while moved:
        moved = False
        for r in sorted(reservations, key=lambda r: r.start):
            if r.backend_id != backend_id or r.user == user:
                continue
            if r.overlaps(t, t + max(duration, 1e-9)):
                t = r.end
                moved = True
    return t


def eta_seconds(job: JobRecord, view: SchedulerView) -> float:
    """Forward-simulated wait: remaining time of the running job, the queued
    jobs ahead under the comparator, and any reservation blackouts."""
    t = view.now
    running_id = view.backend_busy.get(job.backend_id)
    if running_id:
        running = next((j for j in view.jobs if j.job_id == running_id), None)
        if running is not None and running.run_started_at is not None:
            est = view.estimates_s.get(running.job_id, 0.0)
            t += max(running.run_started_at + est - view.now, 0.0)
    my_key = comparator_key(job, view)
    ahead = [
        j
        for j in view.jobs
        if j.job_id != job.job_id
        and j.backend_id == job.backend_id
        and j.status in (JobStatus.QUEUED, JobStatus.SCHEDULED)
        and comparator_key(j, view) < my_key
    ]
    ahead.sort(key=lambda j: comparator_key(j, view))
    for other in ahead:
        est = view.estimates_s.get(other.job_id, 0.0)
        t = _advance_past_blackouts(t, est, other.user, other.backend_id, view.reservations)
        t += est
    t = _advance_past_blackouts(t, view.estimates_s.get(job.job_id, 0.0), job.user, job.backend_id, view.reservations)
    return max(t - view.now, 0.0)

"""Composition root: fleet, calibration, pipeline registry, scheduler, store,
and the threaded execution engine that actually runs jobs.

The engine interprets the three job kinds:

  single / batch  compile each item once, bind against fresh calibration,
                  run its stage chain against the device, collect counts and
                  expectation values per item;
  hybrid          compile the parametric item once, then drive the SPSA loop,
                  late-binding parameters per evaluation and checkpointing
                  after every iteration.

Late binding refreshes calibration on demand when a snapshot is stale and
recompiles the template when the snapshot has drifted past the staleness
limit; both paths are counted in the job's result metadata.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .backends import (
    AdapterError,
    DriftConfig,
    ExecutionFailed,
    HandleStatus,
    default_fleet,
)
from .calibration import (
    AdapterUnavailable,
    CalibrationManager,
    CalibrationPoller,
    NoCalibrationData,
    snapshot_from_dict,
    snapshot_to_dict,
)
from .circuits import Circuit, parse
from .clock import Clock, SystemClock
from .config import PlatformConfig
from .errors import PlatformError
from .pipeline import Observable, UnknownStage, default_registry, resolve, run_chain
from .scheduling import (
    JobOutcome,
    JobRecord,
    ResourceEstimator,
    Scheduler,
    SchedulerConfig,
    evaluation_seed,
    run_spsa,
)
from .store import EventLog, SnapshotFile
from .transpiler import (
    CompiledTemplate,
    CompileError,
    ExecutablePayload,
    RecompileRequired,
    StaleCalibration,
    bind_with_calibration,
    compile_template,
    estimate_duration,
    estimate_fidelity,
)

DEVICE_POLL_S = 0.0005
MAX_BIND_ATTEMPTS = 6


class SimulatedCrash(Exception):
    """Raised by test hooks to make a job thread vanish mid-run."""


class JobCancelled(Exception):
    pass


@dataclass
class TemplateHolder:
    """One compiled template per job item, rebuilt on RecompileRequired."""

    circuit: Circuit
    template: CompiledTemplate | None = None
    binds: int = 0
    recompile_events: int = 0


class ThreadedEngine:
    """Runs each dispatched job on its own daemon thread and reports the
    outcome back to the scheduler. The per-device execution queue inside each
    adapter serializes actual circuit execution."""

    def __init__(self, platform: "Platform"):
        self._platform = platform
        # Test hook: called after every hybrid iteration checkpoint with
        # (job_id, completed_iteration); may raise SimulatedCrash.
        self.iteration_hook = None

    def start(self, record: JobRecord, worker_id: str, token: tuple) -> None:
        thread = threading.Thread(
            target=self._run, args=(record, token), daemon=True, name=f"job-{record.job_id}"
        )
        thread.start()

    def _run(self, record: JobRecord, token: tuple) -> None:
        scheduler = self._platform.scheduler
        try:
            outcome = self._execute(record)
        except SimulatedCrash:
            return  # the "process" died: no completion, no requeue
        except JobCancelled:
            outcome = JobOutcome(
                completed=False,
                error={"code": "JOB_CANCELLED", "message": "cancelled while running"},
                transient=False,
            )
        except UnknownStage as exc:
            outcome = JobOutcome(
                completed=False,
                error={"code": "CAPABILITY_MISSING", "message": str(exc)},
                transient=False,
            )
        except (CompileError, PlatformError) as exc:
            code = getattr(exc, "code", "COMPILE_ERROR")
            outcome = JobOutcome(completed=False, error={"code": code, "message": str(exc)}, transient=False)
        except (StaleCalibration, RecompileRequired, AdapterError, AdapterUnavailable, NoCalibrationData) as exc:
            outcome = JobOutcome(
                completed=False,
                error={"code": "EXECUTION_ERROR", "message": str(exc)},
                transient=True,
            )
        except Exception as exc:  # unexpected: fail hard rather than loop
            outcome = JobOutcome(completed=False, error={"code": "INTERNAL", "message": str(exc)}, transient=False)
        scheduler.on_job_finished(record.job_id, token, outcome)

    # ------------------------------------------------------------ execution

    def _check_cancel(self, record: JobRecord) -> None:
        if self._platform.scheduler.cancel_requested(record.job_id):
            raise JobCancelled()

    def _fresh_calibration(self, backend_id: str):
        calman = self._platform.calibrations
        try:
            return calman.latest(backend_id)
        except NoCalibrationData:
            return calman.poll(backend_id)

    def _bind_fresh(self, holder: TemplateHolder, params: dict, shots: int, caps, seed: int | None):
        """Bind against the freshest snapshot, polling on staleness and
        recompiling on drift. Returns (payload, snapshot)."""
        calman = self._platform.calibrations
        staleness = self._platform.config.staleness_limit_s
        cal = self._fresh_calibration(caps.backend_id)
        if holder.template is None:
            holder.template = compile_template(holder.circuit, caps, cal)
        for _ in range(MAX_BIND_ATTEMPTS):
            try:
                payload = bind_with_calibration(
                    holder.template,
                    params,
                    cal,
                    caps,
                    shots,
                    now=self._platform.clock.now(),
                    staleness_limit=staleness,
                    seed=seed,
                )
                holder.binds += 1
                return payload, cal
            except StaleCalibration:
                cal = calman.poll(caps.backend_id)
            except RecompileRequired:
                holder.template = compile_template(holder.circuit, caps, cal, previous=holder.template)
                holder.recompile_events += 1
        raise StaleCalibration(float("inf"), staleness)

    def _device_executor(self, device, caps, cal):
        """Chain executor: wrap a variant circuit in a payload and push it
        through the device queue."""

        def execute(circuit: Circuit, shots: int, seed: int | None):
            payload = ExecutablePayload(
                circuit=circuit,
                backend_id=caps.backend_id,
                shots=shots,
                calibration_ts=cal.timestamp,
                estimated_duration=estimate_duration(circuit, caps, cal),
                estimated_fidelity=estimate_fidelity(circuit, cal),
                seed=seed,
            )
            handle = device.submit(payload)
            while True:
                status = device.status(handle)
                if status == HandleStatus.DONE:
                    return device.results(handle)
                if status == HandleStatus.FAILED:
                    device.results(handle)  # raises ExecutionFailed with the cause
                    raise ExecutionFailed(handle, "device reported failure")
                time.sleep(DEVICE_POLL_S)

        return execute

    def _execute(self, record: JobRecord) -> JobOutcome:
        descriptor = record.descriptor
        device = self._platform.fleet[record.backend_id]
        caps = device.capabilities()
        if descriptor.kind == "hybrid":
            return self._execute_hybrid(record, device, caps)
        return self._execute_items(record, device, caps)

    def _execute_items(self, record: JobRecord, device, caps) -> JobOutcome:
        descriptor = record.descriptor
        scheduler = self._platform.scheduler
        registry = self._platform.registry
        item_results = []
        wall_start = time.monotonic()
        fidelity_product = 1.0
        for idx, item in enumerate(descriptor.items):
            self._check_cancel(record)
            chain = resolve(list(item.execution_options), registry)
            holder = TemplateHolder(circuit=parse(item.circuit_text))
            payload, cal = self._bind_fresh(holder, {}, item.shots, caps, seed=item.seed)
            fidelity_product *= payload.estimated_fidelity
            executor = self._device_executor(device, caps, cal)
            result = run_chain(
                chain,
                payload.circuit,
                item.shots,
                executor,
                observable=item.observable or Observable(),
                seed=item.seed,
            )
            item_results.append(_result_to_dict(result, payload))
            scheduler.record_progress(record.job_id, idx + 1, len(descriptor.items))
        self._record_feedback(record, caps, wall_start, fidelity_product, item_results)
        return JobOutcome(completed=True, results={"items": item_results})

    def _execute_hybrid(self, record: JobRecord, device, caps) -> JobOutcome:
        descriptor = record.descriptor
        scheduler = self._platform.scheduler
        item = descriptor.items[0]
        hybrid = descriptor.hybrid
        chain = resolve(list(item.execution_options), self._platform.registry)
        holder = TemplateHolder(circuit=parse(item.circuit_text))
        observable = item.observable or Observable()
        wall_start = time.monotonic()

        def evaluate(params: dict[str, float], iteration: int, eval_index: int) -> float:
            self._check_cancel(record)
            seed = evaluation_seed(hybrid.seed, iteration, eval_index)
            payload, cal = self._bind_fresh(holder, params, item.shots, caps, seed=seed)
            executor = self._device_executor(device, caps, cal)
            result = run_chain(chain, payload.circuit, item.shots, executor, observable=observable, seed=seed)
            return result.value

        def checkpoint(state: dict) -> None:
            scheduler.record_checkpoint(record.job_id, state)
            if self.iteration_hook is not None:
                self.iteration_hook(record.job_id, state["iteration"])

        outcome = run_spsa(
            initial_params=hybrid.initial_params,
            iterations=hybrid.iterations,
            a=hybrid.a,
            c=hybrid.c,
            evaluate=evaluate,
            seed=hybrid.seed,
            checkpoint=checkpoint,
            resume=record.checkpoint,
        )
        results = {
            "best_params": outcome.best_params,
            "best_value": outcome.best_value,
            "final_params": outcome.final_params,
            "trace": outcome.trace,
            "iterations": hybrid.iterations,
            "compilations": holder.template.compile_count if holder.template else 0,
            "bindings": holder.binds,
            "recompile_events": holder.recompile_events,
        }
        self._record_feedback(record, caps, wall_start, None, None)
        return JobOutcome(completed=True, results=results)

    def _record_feedback(self, record, caps, wall_start: float, fidelity, item_results) -> None:
        observed_s = time.monotonic() - wall_start
        if observed_s <= 0 or record.base_estimate_ns <= 0:
            return
        proxy = None
        if item_results:
            counts = item_results[0].get("counts") or {}
            total = sum(counts.values())
            proxy = max(counts.values()) / total if total else None
        self._platform.scheduler.estimator.duration_model.record_feedback(
            caps.backend_id,
            record.base_estimate_ns,
            observed_s * 1e9,
            estimated_fidelity=fidelity,
            observed_success_rate=proxy,
        )


def _result_to_dict(result, payload) -> dict:
    return {
        "counts": result.counts.to_dict() if result.counts is not None else None,
        "expectation": {
            "value": result.value,
            "variance": result.variance,
            "metadata": _jsonable(result.metadata),
        },
        "estimated_duration_ns": payload.estimated_duration,
        "estimated_fidelity": payload.estimated_fidelity,
        "calibration_ts": payload.calibration_ts,
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    return value


class Platform:
    """Everything a deployment needs, wired together."""

    def __init__(self, config: PlatformConfig | None = None, clock: Clock | None = None):
        self.config = config or PlatformConfig()
        self.clock = clock or SystemClock()

        data_dir = Path(self.config.data_dir)
        self.log = EventLog(data_dir / "events.log", fsync=self.config.fsync)
        self.snapshots = SnapshotFile(data_dir / "snapshot.json")

        drift = DriftConfig(error_sigma=self.config.drift_sigma, coherence_step=self.config.coherence_step)
        self.fleet = default_fleet(
            seed=self.config.fleet_seed,
            clock=self.clock,
            drift=drift,
            dilation_us_per_unit=self.config.dilation_us_per_unit,
            max_job_wall_s=self.config.max_job_wall_s,
            noisy=self.config.noisy,
        )
        self.registry = default_registry()
        self.calibrations = CalibrationManager(
            adapters=self.fleet,
            clock=self.clock,
            on_record=lambda snap: self._emit("calibration_recorded", snapshot_to_dict(snap)),
        )
        self.estimator = ResourceEstimator()
        self.scheduler = Scheduler(
            clock=self.clock,
            backends={bid: dev.capabilities() for bid, dev in self.fleet.items()},
            estimator=self.estimator,
            config=SchedulerConfig(
                user_job_limit=self.config.user_job_limit,
                worker_ttl_s=self.config.worker_ttl_s,
                session_ttl_s=self.config.session_ttl_s,
                reservation_default_s=self.config.reservation_default_s,
            ),
            emit=self._emit,
            calibration_lookup=self._latest_or_poll,
        )
        self.engine = ThreadedEngine(self)
        self.scheduler.attach_engine(self.engine)

        self.recovered_jobs: list[str] = []
        self.truncation_report: str | None = None
        self._recover()

        self._poller = CalibrationPoller(self.calibrations, interval=self.config.poll_interval_s)
        self._pump_stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._started = False

    # ------------------------------------------------------------- plumbing

    def _emit(self, kind: str, payload: dict) -> None:
        self.log.append(kind, payload, self.clock.now())

    def _latest_or_poll(self, backend_id: str):
        try:
            return self.calibrations.latest(backend_id)
        except NoCalibrationData:
            try:
                return self.calibrations.poll(backend_id)
            except AdapterUnavailable:
                return None

    def _recover(self) -> None:
        from_seq = 1
        loaded = self.snapshots.load()
        if loaded is not None:
            as_of_seq, state = loaded
            self.scheduler.restore_state(state.get("scheduler", {}))
            for snap_dict in state.get("calibration", []):
                self.calibrations.restore(snapshot_from_dict(snap_dict))
            from_seq = as_of_seq + 1
        report = self.log.replay(from_seq)
        for event in report.events:
            if event.kind == "calibration_recorded":
                self.calibrations.restore(snapshot_from_dict(event.payload))
            else:
                self.scheduler.apply_event(event)
        if report.truncated_at_seq is not None:
            self.truncation_report = (
                f"log truncated at seq {report.truncated_at_seq}: {report.truncation_reason}"
            )
        self.recovered_jobs = self.scheduler.finish_recovery()

    def save_snapshot(self) -> None:
        state = {
            "scheduler": self.scheduler.state_dict(),
            "calibration": [
                snapshot_to_dict(snap)
                for backend_id in self.calibrations.backends()
                for snap in self.calibrations.history(backend_id, float("-inf"), float("inf"))
            ],
        }
        self.snapshots.save(self.log.replay().last_seq, state)

    # ------------------------------------------------------------- lifecycle

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        for device in self.fleet.values():
            device.start()
        for backend_id in self.calibrations.backends():
            try:
                self.calibrations.poll(backend_id)
            except AdapterUnavailable:
                pass
        for i in range(self.config.default_workers):
            self.scheduler.register_worker(
                worker_id=f"worker-{i + 1}",
                stages=self.registry.names(),
                backends=list(self.fleet),
                max_parallel=self.config.worker_max_parallel,
            )
        self._poller.start()
        pump = threading.Thread(target=self._pump_loop, daemon=True, name="scheduler-pump")
        pump.start()
        self._threads.append(pump)
        beat = threading.Thread(target=self._heartbeat_loop, daemon=True, name="worker-heartbeats")
        beat.start()
        self._threads.append(beat)

    def _pump_loop(self) -> None:
        while not self._pump_stop.wait(self.config.pump_interval_s):
            try:
                self.scheduler.pump()
            except Exception:
                pass  # the pump must survive individual decision errors

    def _heartbeat_loop(self) -> None:
        interval = max(self.config.worker_ttl_s / 3.0, 0.5)
        while not self._pump_stop.wait(interval):
            for i in range(self.config.default_workers):
                try:
                    self.scheduler.heartbeat(f"worker-{i + 1}")
                except Exception:
                    pass

    def stop(self, snapshot: bool = True) -> None:
        if not self._started:
            return
        self._pump_stop.set()
        self._poller.stop()
        for thread in self._threads:
            thread.join(timeout=2.0)
        for device in self.fleet.values():
            device.stop()
        if snapshot:
            self.save_snapshot()
        self.log.close()
        self._started = False

    # ------------------------------------------------------------- helpers

    def wait_for_terminal(self, job_id: str, timeout_s: float = 60.0, poll_s: float = 0.01) -> JobRecord:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            record = self.scheduler.job(job_id)
            if record.terminal:
                return record
            time.sleep(poll_s)
        raise TimeoutError(f"job {job_id} did not finish within {timeout_s}s")

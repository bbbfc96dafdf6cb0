"""Reference adapter: a seeded noisy-simulator QPU.

Each SimulatedDevice owns a FIFO queue served by a single executor thread
(one payload "running" at a time), a drifting calibration that regenerates on
every poll, and a wall-clock dilation model so queue and ETA behavior is
observable: a job holds the device for estimated_duration x shots ns-shot
units at `dilation_us_per_unit` microseconds each, capped at `max_job_wall_s`
seconds.
"""

from __future__ import annotations

import itertools
import queue
import threading
from dataclasses import dataclass, replace

import numpy as np

from ..calibration import CalibrationSnapshot, GateCalibration, QubitCalibration
from ..capabilities import BackendCapabilities, line_coupling, ring_coupling
from ..clock import Clock, SystemClock
from .adapter import BackendAdapter, ExecutionFailed, HandleStatus, NotReady, UnknownHandle
from .counts import Counts
from .noise import NoiseModel
from .statevector import simulate_counts

RESULT_RETENTION_S = 3600.0

DEFAULT_GATE_DURATIONS = {"rz": 10.0, "sx": 35.0, "x": 35.0, "cx": 300.0}


@dataclass(frozen=True)
class DriftConfig:
    """Random-walk parameters for day-to-day calibration drift."""

    error_sigma: float = 0.05  # lognormal sigma on gate error rates
    coherence_step: float = 0.02  # +/- fraction per step on t1/t2
    error_floor: float = 1e-5
    error_ceiling: float = 0.5

    @staticmethod
    def frozen() -> "DriftConfig":
        return DriftConfig(error_sigma=0.0, coherence_step=0.0)


def drift_step(snapshot: CalibrationSnapshot, seed: int, t: int, config: DriftConfig | None = None) -> CalibrationSnapshot:
    """Produce the next snapshot in a drift sequence.

    Deterministic for a given (seed, t): gate errors are multiplied by
    exp(N(0, sigma)) and clamped to [floor, ceiling]; t1/t2 random-walk by
    +/- coherence_step, preserving t2 <= 2*t1. The timestamp is left for the
    caller (the calibration manager stamps receipt time).
    """
    config = config or DriftConfig()
    rng = np.random.default_rng([seed & 0x7FFFFFFF, t & 0x7FFFFFFF])
    gates = {}
    for key in sorted(snapshot.gates, key=lambda k: (k[0], k[1])):
        entry = snapshot.gates[key]
        g = rng.normal(0.0, config.error_sigma) if config.error_sigma > 0 else 0.0
        rate = float(np.clip(entry.error_rate * np.exp(g), config.error_floor, config.error_ceiling))
        gates[key] = GateCalibration(error_rate=rate, duration_ns=entry.duration_ns)
    qubits = []
    for qc in snapshot.qubits:
        if config.coherence_step > 0:
            f1 = 1.0 + rng.uniform(-config.coherence_step, config.coherence_step)
            f2 = 1.0 + rng.uniform(-config.coherence_step, config.coherence_step)
        else:
            f1 = f2 = 1.0
        t1 = qc.t1_us * f1
        t2 = min(qc.t2_us * f2, 2.0 * t1)
        qubits.append(QubitCalibration(t1_us=t1, t2_us=t2, frequency_ghz=qc.frequency_ghz, readout_error=qc.readout_error))
    return replace(snapshot, qubits=tuple(qubits), gates=gates)


def seed_calibration(caps: BackendCapabilities, seed: int) -> CalibrationSnapshot:
    """Initial plausible characterization for a simulated device."""
    rng = np.random.default_rng(seed)
    qubits = []
    for _ in range(caps.num_qubits):
        t1 = float(rng.uniform(80.0, 140.0))
        qubits.append(
            QubitCalibration(
                t1_us=t1,
                t2_us=float(rng.uniform(0.7, 1.6)) * t1,
                frequency_ghz=float(rng.uniform(4.7, 5.2)),
                readout_error=float(rng.uniform(0.01, 0.03)),
            )
        )
    gates: dict[tuple[str, tuple[int, ...]], GateCalibration] = {}
    for gate in sorted(caps.basis_gates - {"cx"}):
        for q in range(caps.num_qubits):
            gates[(gate, (q,))] = GateCalibration(
                error_rate=float(rng.uniform(1e-4, 1e-3)),
                duration_ns=caps.gate_durations.get(gate, 35.0),
            )
    for pair in sorted(caps.coupling):
        gates[("cx", pair)] = GateCalibration(
            error_rate=float(rng.uniform(5e-3, 2e-2)),
            duration_ns=caps.gate_durations.get("cx", 300.0),
        )
    return CalibrationSnapshot(backend_id=caps.backend_id, timestamp=0.0, qubits=tuple(qubits), gates=gates)


class SimulatedDevice(BackendAdapter):
    """Noisy statevector QPU behind the adapter contract."""

    def __init__(
        self,
        caps: BackendCapabilities,
        seed: int = 0,
        clock: Clock | None = None,
        drift: DriftConfig | None = None,
        dilation_us_per_unit: float = 1.0,
        max_job_wall_s: float = 2.0,
        noisy: bool = True,
    ):
        self._caps = caps
        self._seed = seed
        self._clock = clock or SystemClock()
        self._drift = drift or DriftConfig()
        self._dilation = dilation_us_per_unit
        self._max_wall = max_job_wall_s
        self._noisy = noisy

        self._calibration = seed_calibration(caps, seed)
        self._drift_t = 0

        self._queue: "queue.Queue[str | None]" = queue.Queue()
        self._lock = threading.Lock()
        self._handles: dict[str, dict] = {}
        self._handle_counter = itertools.count(1)
        self._fallback_seeds = itertools.count(seed * 1_000_003 + 1)
        self._running: str | None = None
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    # -- adapter contract --

    def capabilities(self) -> BackendCapabilities:
        return self._caps

    def calibration(self) -> CalibrationSnapshot:
        """Current characterization; drifts one step per retrieval."""
        with self._lock:
            self._drift_t += 1
            self._calibration = drift_step(self._calibration, self._seed, self._drift_t, self._drift)
            return self._calibration

    def submit(self, payload) -> str:
        if payload.backend_id != self._caps.backend_id:
            raise ExecutionFailed("-", f"payload targets '{payload.backend_id}', this device is '{self._caps.backend_id}'")
        if payload.shots > self._caps.max_shots:
            raise ExecutionFailed("-", f"shots {payload.shots} exceed max_shots {self._caps.max_shots}")
        handle = f"{self._caps.backend_id}-h{next(self._handle_counter)}"
        with self._lock:
            self._handles[handle] = {
                "payload": payload,
                "status": HandleStatus.WAITING,
                "counts": None,
                "error": None,
                "fetched_at": None,
            }
        self._queue.put(handle)
        return handle

    def status(self, handle: str) -> HandleStatus:
        with self._lock:
            entry = self._handles.get(handle)
            if entry is None:
                raise UnknownHandle(handle)
            return entry["status"]

    def results(self, handle: str) -> Counts:
        self._prune()
        with self._lock:
            entry = self._handles.get(handle)
            if entry is None:
                raise UnknownHandle(handle)
            status = entry["status"]
            if status == HandleStatus.FAILED:
                raise ExecutionFailed(handle, entry["error"] or "unknown failure")
            if status != HandleStatus.DONE:
                raise NotReady(handle, status)
            if entry["fetched_at"] is None:
                entry["fetched_at"] = self._clock.now()
            return entry["counts"]

    def queue_depth(self) -> int:
        with self._lock:
            waiting = sum(1 for e in self._handles.values() if e["status"] == HandleStatus.WAITING)
            return waiting + (1 if self._running is not None else 0)

    # -- lifecycle --

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._serve, daemon=True, name=f"device-{self._caps.backend_id}")
        self._thread.start()

    def stop(self) -> None:
        if self._thread is None:
            return
        self._stop.set()
        self._queue.put(None)
        self._thread.join(timeout=5.0)
        self._thread = None

    def _wall_time(self, payload) -> float:
        units = max(payload.estimated_duration, 0.0) * payload.shots
        return min(units * self._dilation * 1e-6, self._max_wall)

    def _serve(self) -> None:
        while not self._stop.is_set():
            handle = self._queue.get()
            if handle is None:
                return
            with self._lock:
                entry = self._handles.get(handle)
                if entry is None:
                    continue
                entry["status"] = HandleStatus.RUNNING
                self._running = handle
                payload = entry["payload"]
                noise_source = self._calibration if self._noisy else None
            try:
                wall = self._wall_time(payload)
                if wall > 0 and self._stop.wait(wall):
                    pass  # shutting down; still finish the payload
                noise = NoiseModel.from_calibration(noise_source) if noise_source else NoiseModel.noiseless()
                seed = payload.seed if payload.seed is not None else next(self._fallback_seeds)
                counts = simulate_counts(payload.circuit, noise, payload.shots, seed)
                with self._lock:
                    entry["counts"] = counts
                    entry["status"] = HandleStatus.DONE
            except Exception as exc:  # failure is a terminal handle state, not a crash
                with self._lock:
                    entry["error"] = str(exc)
                    entry["status"] = HandleStatus.FAILED
            finally:
                with self._lock:
                    self._running = None

    def _prune(self) -> None:
        now = self._clock.now()
        with self._lock:
            stale = [
                h
                for h, e in self._handles.items()
                if e["fetched_at"] is not None and now - e["fetched_at"] > RESULT_RETENTION_S
            ]
            for h in stale:
                del self._handles[h]


def linear_device_caps(backend_id: str = "sim-linear-5", num_qubits: int = 5) -> BackendCapabilities:
    return BackendCapabilities(
        backend_id=backend_id,
        num_qubits=num_qubits,
        coupling=line_coupling(num_qubits),
        gate_durations=dict(DEFAULT_GATE_DURATIONS),
    )


def ring_device_caps(backend_id: str = "sim-ring-7", num_qubits: int = 7) -> BackendCapabilities:
    return BackendCapabilities(
        backend_id=backend_id,
        num_qubits=num_qubits,
        coupling=ring_coupling(num_qubits),
        gate_durations=dict(DEFAULT_GATE_DURATIONS),
    )


def default_fleet(
    seed: int = 7,
    clock: Clock | None = None,
    drift: DriftConfig | None = None,
    dilation_us_per_unit: float = 1.0,
    max_job_wall_s: float = 2.0,
    noisy: bool = True,
) -> dict[str, SimulatedDevice]:
    """Two heterogeneous simulated devices: a 5-qubit line and a 7-qubit ring."""
    devices = {}
    for i, caps in enumerate((linear_device_caps(), ring_device_caps())):
        devices[caps.backend_id] = SimulatedDevice(
            caps,
            seed=seed + i,
            clock=clock,
            drift=drift,
            dilation_us_per_unit=dilation_us_per_unit,
            max_job_wall_s=max_job_wall_s,
            noisy=noisy,
        )
    return devices

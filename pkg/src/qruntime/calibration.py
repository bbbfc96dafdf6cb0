"""Device characterization snapshots and their per-backend history.

A CalibrationSnapshot is the timestamped set of measured device properties
(coherence times, qubit frequencies, readout errors, per-gate error rates and
durations) that drives layout selection, fidelity estimation, and the
simulator noise model. The CalibrationManager polls adapters - periodically
or on demand - and keeps a bounded, strictly ordered history per backend.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Callable

from .clock import Clock, SystemClock

HISTORY_LIMIT = 1000
DEFAULT_POLL_INTERVAL = 60.0


class CalibrationError(Exception):
    pass


class NoCalibrationData(CalibrationError):
    def __init__(self, backend_id: str):
        super().__init__(f"no calibration recorded for backend '{backend_id}'")
        self.backend_id = backend_id


class AdapterUnavailable(CalibrationError):
    def __init__(self, backend_id: str, cause: str):
        super().__init__(f"calibration poll of '{backend_id}' failed: {cause}")
        self.backend_id = backend_id
        self.cause = cause


@dataclass(frozen=True)
class QubitCalibration:
    t1_us: float
    t2_us: float
    frequency_ghz: float
    readout_error: float

    def __post_init__(self):
        if self.t2_us > 2.0 * self.t1_us + 1e-12:
            raise ValueError(f"t2 ({self.t2_us}) exceeds 2*t1 ({2 * self.t1_us})")
        if not 0.0 <= self.readout_error < 1.0:
            raise ValueError(f"readout_error {self.readout_error} outside [0,1)")


@dataclass(frozen=True)
class GateCalibration:
    error_rate: float
    duration_ns: float

    def __post_init__(self):
        if not 0.0 <= self.error_rate < 1.0:
            raise ValueError(f"error_rate {self.error_rate} outside [0,1)")
        if self.duration_ns <= 0:
            raise ValueError("duration_ns must be > 0")


@dataclass(frozen=True)
class CalibrationSnapshot:
    backend_id: str
    timestamp: float  # UTC unix seconds
    qubits: tuple[QubitCalibration, ...]
    gates: dict[tuple[str, tuple[int, ...]], GateCalibration] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(
            self, "gates", {(g, tuple(qs)): entry for (g, qs), entry in self.gates.items()}
        )

    def gate_error(self, gate: str, qubits: tuple[int, ...]) -> float:
        entry = self.gates.get((gate, tuple(qubits)))
        if entry is None and len(qubits) == 2:
            entry = self.gates.get((gate, (qubits[1], qubits[0])))
        return entry.error_rate if entry else 0.0

    def gate_duration(self, gate: str, qubits: tuple[int, ...]) -> float | None:
        entry = self.gates.get((gate, tuple(qubits)))
        if entry is None and len(qubits) == 2:
            entry = self.gates.get((gate, (qubits[1], qubits[0])))
        return entry.duration_ns if entry else None

    def readout_error(self, qubit: int) -> float:
        return self.qubits[qubit].readout_error

    def max_cx_error(self) -> float:
        errors = [e.error_rate for (g, _), e in self.gates.items() if g == "cx"]
        return max(errors) if errors else 0.0

    def at_time(self, timestamp: float) -> "CalibrationSnapshot":
        return replace(self, timestamp=timestamp)


def snapshot_to_dict(snapshot: CalibrationSnapshot) -> dict:
    return {
        "backend_id": snapshot.backend_id,
        "timestamp": snapshot.timestamp,
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


def snapshot_from_dict(data: dict) -> CalibrationSnapshot:
    return CalibrationSnapshot(
        backend_id=data["backend_id"],
        timestamp=float(data["timestamp"]),
        qubits=tuple(
            QubitCalibration(
                t1_us=q["t1_us"],
                t2_us=q["t2_us"],
                frequency_ghz=q["frequency_ghz"],
                readout_error=q["readout_error"],
            )
            for q in data.get("qubits", [])
        ),
        gates={
            (g["gate"], tuple(g["qubits"])): GateCalibration(
                error_rate=g["error_rate"], duration_ns=g["duration_ns"]
            )
            for g in data.get("gates", [])
        },
    )


class CalibrationManager:
    """Per-backend calibration history: append-only, strictly ordered,
    bounded to HISTORY_LIMIT snapshots with FIFO eviction.

    Reads are lock-free against immutable snapshots; writes are serialized
    per manager. An optional on_record callback (used to persist snapshots
    through the event store) fires after every successful poll.
    """

    def __init__(
        self,
        adapters: dict[str, object] | None = None,
        clock: Clock | None = None,
        on_record: Callable[[CalibrationSnapshot], None] | None = None,
    ):
        self._adapters = dict(adapters or {})
        self._clock = clock or SystemClock()
        self._on_record = on_record
        self._history: dict[str, list[CalibrationSnapshot]] = {}
        self._failures: list[tuple[float, str, str]] = []
        self._lock = threading.Lock()

    def add_adapter(self, backend_id: str, adapter) -> None:
        self._adapters[backend_id] = adapter

    def backends(self) -> list[str]:
        return sorted(self._adapters)

    def poll(self, backend_id: str) -> CalibrationSnapshot:
        """Fetch a fresh snapshot via the adapter, stamp it with receipt time,
        and append it to the history. A failed poll never regresses latest."""
        adapter = self._adapters.get(backend_id)
        if adapter is None:
            raise AdapterUnavailable(backend_id, "no adapter registered")
        try:
            snapshot = adapter.calibration()
        except Exception as exc:
            with self._lock:
                self._failures.append((self._clock.now(), backend_id, str(exc)))
            raise AdapterUnavailable(backend_id, str(exc)) from exc
        with self._lock:
            history = self._history.setdefault(backend_id, [])
            stamp = self._clock.now()
            if history and stamp <= history[-1].timestamp:
                stamp = history[-1].timestamp + 1e-6
            snapshot = snapshot.at_time(stamp)
            history.append(snapshot)
            if len(history) > HISTORY_LIMIT:
                del history[: len(history) - HISTORY_LIMIT]
        if self._on_record is not None:
            self._on_record(snapshot)
        return snapshot

    def latest(self, backend_id: str) -> CalibrationSnapshot:
        with self._lock:
            history = self._history.get(backend_id)
            if not history:
                raise NoCalibrationData(backend_id)
            return history[-1]

    def history(self, backend_id: str, from_ts: float, to_ts: float) -> list[CalibrationSnapshot]:
        if from_ts > to_ts:
            raise ValueError("from_ts must be <= to_ts")
        with self._lock:
            history = self._history.get(backend_id, [])
            return [s for s in history if from_ts <= s.timestamp <= to_ts]

    def failures(self) -> list[tuple[float, str, str]]:
        with self._lock:
            return list(self._failures)

    def restore(self, snapshot: CalibrationSnapshot) -> None:
        """Re-insert a persisted snapshot during recovery (keeps its stamp)."""
        with self._lock:
            history = self._history.setdefault(snapshot.backend_id, [])
            if history and snapshot.timestamp <= history[-1].timestamp:
                snapshot = snapshot.at_time(history[-1].timestamp + 1e-6)
            history.append(snapshot)
            if len(history) > HISTORY_LIMIT:
                del history[: len(history) - HISTORY_LIMIT]


class CalibrationPoller:
    """One background polling task per backend.

    The first poll happens immediately at start; subsequent polls are
    scheduled on fixed deadlines so the count over a run of duration D stays
    within [floor(D/P), ceil(D/P)+1]. Failed polls are swallowed (they are
    recorded by the manager).
    """

    def __init__(self, manager: CalibrationManager, interval: float = DEFAULT_POLL_INTERVAL):
        self._manager = manager
        self._interval = interval
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        for backend_id in self._manager.backends():
            t = threading.Thread(target=self._run, args=(backend_id,), daemon=True, name=f"calpoll-{backend_id}")
            t.start()
            self._threads.append(t)

    def _run(self, backend_id: str) -> None:
        import time

        deadline = time.monotonic()
        while not self._stop.is_set():
            try:
                self._manager.poll(backend_id)
            except AdapterUnavailable:
                pass
            deadline += self._interval
            delay = deadline - time.monotonic()
            if delay > 0 and self._stop.wait(delay):
                return

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=2.0)
        self._threads.clear()

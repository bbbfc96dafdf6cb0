"""Compile-once / bind-many parametric compilation.

A circuit is decomposed, placed, and routed exactly once into a
CompiledTemplate; parameter values are bound per execution against the
freshest calibration snapshot. Binding fails fast when the snapshot is older
than the staleness limit (StaleCalibration: refresh and retry) or when the
snapshot has moved too far from the one the layout was chosen with
(RecompileRequired: the placement may no longer be good).

Each bind stamps the payload with a duration estimate (sum of calibrated gate
durations plus readout, rounded up to the timing granularity) and a
first-order fidelity estimate (product of per-gate and per-readout survival
probabilities).
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass, field
from typing import Callable

from ..calibration import CalibrationSnapshot
from ..capabilities import BackendCapabilities, normalize_pair
from ..circuits import Circuit, ParamBinding, bind, validate
from .decompose import decompose
from .layout import select_layout
from .routing import route

DEFAULT_STALENESS_LIMIT = 300.0  # seconds

_template_ids = itertools.count(1)

# Hook for calibration-driven angle adjustment at bind time:
# (gate, physical qubits, angle, snapshot) -> adjusted angle. The default (None)
# applies no frame offset.
AngleAdjuster = Callable[[str, tuple[int, ...], float, CalibrationSnapshot], float]


class CompileError(ValueError):
    pass


class StaleCalibration(Exception):
    def __init__(self, age: float, limit: float):
        super().__init__(f"calibration is {age:.3f}s old, limit is {limit:.3f}s")
        self.age = age
        self.limit = limit


class RecompileRequired(Exception):
    def __init__(self, drift: float, limit: float):
        super().__init__(
            f"calibration moved {drift:.3f}s past the snapshot this template was placed with (limit {limit:.3f}s)"
        )
        self.drift = drift
        self.limit = limit


@dataclass(frozen=True)
class CompiledTemplate:
    template_id: str
    backend_id: str
    routed: Circuit  # basis gates on physical qubits, symbols preserved
    layout: tuple[int, ...]
    output_permutation: dict[int, int]
    layout_calibration_ts: float
    compile_count: int = 1
    stats: "TemplateStats" = field(default_factory=lambda: TemplateStats())


class TemplateStats:
    """Mutable counters hanging off an otherwise immutable template."""

    def __init__(self):
        self._lock = threading.Lock()
        self._binds = 0

    def record_bind(self) -> None:
        with self._lock:
            self._binds += 1

    @property
    def bind_count(self) -> int:
        with self._lock:
            return self._binds


@dataclass(frozen=True)
class ExecutablePayload:
    circuit: Circuit  # fully bound
    backend_id: str
    shots: int
    calibration_ts: float
    estimated_duration: float  # ns per shot
    estimated_fidelity: float
    template_id: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if not self.circuit.is_bound:
            raise CompileError("payload circuit still has unbound parameters")
        if not 0.0 < self.estimated_fidelity <= 1.0:
            raise CompileError(f"estimated_fidelity {self.estimated_fidelity} outside (0,1]")


def compile_template(
    circuit: Circuit,
    caps: BackendCapabilities,
    cal: CalibrationSnapshot,
    previous: CompiledTemplate | None = None,
) -> CompiledTemplate:
    """decompose -> select_layout -> route, keeping symbols intact.

    Pass the previous template when recompiling so compile_count advances.
    """
    fatal = [v for v in validate(circuit, caps) if v.fatal]
    if fatal:
        raise CompileError("; ".join(v.detail for v in fatal))
    lowered = decompose(circuit, caps.basis_gates)
    layout = select_layout(lowered, caps, cal)
    routed = route(lowered, caps, layout)
    return CompiledTemplate(
        template_id=f"tpl-{next(_template_ids)}",
        backend_id=caps.backend_id,
        routed=routed.circuit,
        layout=layout,
        output_permutation=routed.output_permutation,
        layout_calibration_ts=cal.timestamp,
        compile_count=(previous.compile_count + 1) if previous else 1,
    )


def estimate_duration(circuit: Circuit, caps: BackendCapabilities, cal: CalibrationSnapshot | None = None) -> float:
    """Per-shot duration in ns: calibrated gate durations (capability defaults
    when the snapshot has no entry) plus readout, rounded up to the timing
    granularity."""
    total = 0.0
    for ins in circuit.instructions:
        if ins.gate in ("measure", "barrier"):
            continue
        dur = cal.gate_duration(ins.gate, ins.qubits) if cal else None
        if dur is None:
            dur = caps.gate_durations.get(ins.gate, 35.0)
        total += dur
    total += caps.readout_duration
    gran = caps.timing_granularity
    if gran > 0:
        total = math.ceil(total / gran - 1e-12) * gran
    return total


def estimate_fidelity(circuit: Circuit, cal: CalibrationSnapshot) -> float:
    fid = 1.0
    for ins in circuit.instructions:
        if ins.gate in ("measure", "barrier"):
            continue
        key = ins.qubits if len(ins.qubits) == 1 else normalize_pair(*ins.qubits)
        fid *= 1.0 - cal.gate_error(ins.gate, key)
    for q in circuit.measured_qubits():
        fid *= 1.0 - cal.readout_error(q)
    return fid


def bind_with_calibration(
    template: CompiledTemplate,
    binding: ParamBinding | dict[str, float],
    cal: CalibrationSnapshot,
    caps: BackendCapabilities,
    shots: int,
    now: float,
    staleness_limit: float = DEFAULT_STALENESS_LIMIT,
    seed: int | None = None,
    angle_adjuster: AngleAdjuster | None = None,
) -> ExecutablePayload:
    """Late-bind a template against the given snapshot.

    Raises StaleCalibration when the snapshot is older than the limit (the
    caller should refresh and retry) and RecompileRequired when the snapshot
    has diverged from the layout-time one by more than the limit.
    """
    if cal.backend_id != template.backend_id:
        raise CompileError(
            f"calibration is for '{cal.backend_id}', template targets '{template.backend_id}'"
        )
    if shots < 1:
        raise CompileError("shots must be >= 1")
    if shots > caps.max_shots:
        raise CompileError(f"shots {shots} exceed backend max_shots {caps.max_shots}")
    age = now - cal.timestamp
    if age > staleness_limit:
        raise StaleCalibration(age, staleness_limit)
    drift = abs(cal.timestamp - template.layout_calibration_ts)
    if drift > staleness_limit:
        raise RecompileRequired(drift, staleness_limit)

    bound = bind(template.routed, binding)
    if angle_adjuster is not None:
        from dataclasses import replace as _replace

        adjusted = []
        for ins in bound.instructions:
            if ins.params:
                theta = angle_adjuster(ins.gate, ins.qubits, float(ins.params[0]), cal)
                adjusted.append(_replace(ins, params=(theta,)))
            else:
                adjusted.append(ins)
        bound = Circuit(bound.num_qubits, bound.num_clbits, tuple(adjusted), frozenset())

    template.stats.record_bind()
    return ExecutablePayload(
        circuit=bound,
        backend_id=template.backend_id,
        shots=shots,
        calibration_ts=cal.timestamp,
        estimated_duration=estimate_duration(bound, caps, cal),
        estimated_fidelity=estimate_fidelity(bound, cal),
        template_id=template.template_id,
        seed=seed,
    )


class DurationModel:
    """Per-backend multiplicative correction learned from observed runs.

    Quoted estimates are base * factor; after each completed execution the
    factor moves by an exponential moving average with weight ALPHA, so a
    prior estimate of 100 ns and an observation of 200 ns yield 120 ns.
    Observed fidelity proxies are logged alongside the estimates.
    """

    ALPHA = 0.2

    def __init__(self):
        self._lock = threading.Lock()
        self._factors: dict[str, float] = {}
        self._fidelity_log: dict[str, list[tuple[float, float]]] = {}

    def adjust(self, backend_id: str, base_ns: float) -> float:
        with self._lock:
            return base_ns * self._factors.get(backend_id, 1.0)

    def record_feedback(
        self,
        backend_id: str,
        base_estimate_ns: float,
        observed_duration_ns: float,
        estimated_fidelity: float | None = None,
        observed_success_rate: float | None = None,
    ) -> float:
        """Fold one observation into the backend's factor; returns the new
        adjusted estimate for the same base."""
        if base_estimate_ns <= 0:
            raise ValueError("base estimate must be > 0")
        with self._lock:
            factor = self._factors.get(backend_id, 1.0)
            factor = (1.0 - self.ALPHA) * factor + self.ALPHA * (observed_duration_ns / base_estimate_ns)
            self._factors[backend_id] = factor
            if estimated_fidelity is not None and observed_success_rate is not None:
                self._fidelity_log.setdefault(backend_id, []).append(
                    (estimated_fidelity, observed_success_rate)
                )
            return base_estimate_ns * factor

    def fidelity_log(self, backend_id: str) -> list[tuple[float, float]]:
        with self._lock:
            return list(self._fidelity_log.get(backend_id, []))

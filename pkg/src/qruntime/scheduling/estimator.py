"""Resource estimation plug-in point.

The default model prices a job item at shots x (sum of gate durations +
readout) plus a fixed per-item overhead, then applies the per-backend EWMA
correction learned from completed executions. Swap in any other estimator by
passing an object with the same `estimate_job_ns` surface to the scheduler.
"""

from __future__ import annotations

from ..capabilities import BackendCapabilities
from ..circuits import Circuit, parse
from ..transpiler import DurationModel, estimate_duration
from .records import JobDescriptor

FIXED_OVERHEAD_NS = 10_000.0  # 10 microseconds per item


class ResourceEstimator:
    """Default estimator; subclass or replace to plug in another model."""

    def __init__(self, duration_model: DurationModel | None = None):
        self.duration_model = duration_model or DurationModel()

    def estimate_circuit_ns(self, circuit: Circuit, shots: int, caps: BackendCapabilities) -> float:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        return shots * estimate_duration(circuit, caps) + FIXED_OVERHEAD_NS

    def estimate_job_ns(self, descriptor: JobDescriptor, caps: BackendCapabilities) -> float:
        """Unadjusted base estimate for a whole job.

        Hybrid jobs are two evaluations per iteration of their single item.
        Stage-chain variant expansion is deliberately not modeled here; the
        EWMA feedback absorbs it.
        """
        total = 0.0
        per_item = []
        for item in descriptor.items:
            circuit = parse(item.circuit_text)
            per_item.append(self.estimate_circuit_ns(circuit, item.shots, caps))
        if descriptor.kind == "hybrid":
            evals = max(2 * descriptor.hybrid.iterations, 1)
            total = per_item[0] * evals
        else:
            total = sum(per_item)
        return total

    def adjusted_seconds(self, backend_id: str, base_ns: float) -> float:
        return self.duration_model.adjust(backend_id, base_ns) / 1e9

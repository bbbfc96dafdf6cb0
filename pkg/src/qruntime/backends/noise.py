"""Noise description consumed by the trajectory simulator.

Built from a calibration snapshot so that drifting device characterization
is observable in sampled outcomes: per-gate depolarizing probabilities come
from the reported gate error rates and per-qubit readout flip probabilities
from the reported readout errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..capabilities import normalize_pair


@dataclass(frozen=True)
class NoiseModel:
    gate_probs: dict[tuple[str, tuple[int, ...]], float] = field(default_factory=dict)
    readout_errors: dict[int, float] = field(default_factory=dict)
    default_1q: float = 0.0
    default_2q: float = 0.0

    def __post_init__(self):
        for key, p in self.gate_probs.items():
            if not 0.0 <= p < 1.0:
                raise ValueError(f"gate probability {p} for {key} outside [0,1)")
        for q, p in self.readout_errors.items():
            if not 0.0 <= p < 1.0:
                raise ValueError(f"readout error {p} for qubit {q} outside [0,1)")
        if not (0.0 <= self.default_1q < 1.0 and 0.0 <= self.default_2q < 1.0):
            raise ValueError("default probabilities outside [0,1)")

    @staticmethod
    def noiseless() -> "NoiseModel":
        return NoiseModel()

    @staticmethod
    def uniform(p_gate: float, readout: float = 0.0, num_qubits: int = 0) -> "NoiseModel":
        """Same depolarizing probability after every gate; handy in tests."""
        return NoiseModel(
            readout_errors={q: readout for q in range(num_qubits)} if readout else {},
            default_1q=p_gate,
            default_2q=p_gate,
        )

    @staticmethod
    def from_calibration(cal) -> "NoiseModel":
        gate_probs: dict[tuple[str, tuple[int, ...]], float] = {}
        for (gate, qubits), entry in cal.gates.items():
            gate_probs[(gate, tuple(qubits))] = entry.error_rate
        readout = {q: qc.readout_error for q, qc in enumerate(cal.qubits)}
        return NoiseModel(gate_probs=gate_probs, readout_errors=readout)

    def gate_probability(self, gate: str, qubits: tuple[int, ...]) -> float:
        if gate in ("measure", "barrier"):
            return 0.0
        key = qubits if len(qubits) == 1 else normalize_pair(*qubits)
        p = self.gate_probs.get((gate, key))
        if p is not None:
            return p
        return self.default_1q if len(qubits) == 1 else self.default_2q

    def readout_error(self, qubit: int) -> float:
        return self.readout_errors.get(qubit, 0.0)

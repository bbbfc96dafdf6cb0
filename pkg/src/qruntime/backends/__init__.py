from .adapter import (
    AdapterError,
    BackendAdapter,
    ExecutionFailed,
    HandleStatus,
    NotReady,
    UnknownHandle,
)
from .counts import Counts, bits_to_string
from .noise import NoiseModel
from .simulated import (
    DriftConfig,
    SimulatedDevice,
    default_fleet,
    drift_step,
    linear_device_caps,
    ring_device_caps,
    seed_calibration,
)
from .statevector import (
    MAX_QUBITS,
    SimulationError,
    TooLargeError,
    gate_matrix,
    simulate_counts,
    simulate_statevector,
)

__all__ = [
    "AdapterError",
    "BackendAdapter",
    "ExecutionFailed",
    "HandleStatus",
    "NotReady",
    "UnknownHandle",
    "Counts",
    "bits_to_string",
    "NoiseModel",
    "DriftConfig",
    "SimulatedDevice",
    "default_fleet",
    "drift_step",
    "linear_device_caps",
    "ring_device_caps",
    "seed_calibration",
    "MAX_QUBITS",
    "SimulationError",
    "TooLargeError",
    "gate_matrix",
    "simulate_counts",
    "simulate_statevector",
]

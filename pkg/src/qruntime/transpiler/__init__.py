from .decompose import TARGET_BASIS, UnsupportedGate, decompose
from .layout import EXHAUSTIVE_LIMIT, LayoutError, layout_score, select_layout
from .routing import DisconnectedQubits, RoutedCircuit, route
from .templates import (
    DEFAULT_STALENESS_LIMIT,
    CompiledTemplate,
    CompileError,
    DurationModel,
    ExecutablePayload,
    RecompileRequired,
    StaleCalibration,
    bind_with_calibration,
    compile_template,
    estimate_duration,
    estimate_fidelity,
)

__all__ = [
    "TARGET_BASIS",
    "UnsupportedGate",
    "decompose",
    "EXHAUSTIVE_LIMIT",
    "LayoutError",
    "layout_score",
    "select_layout",
    "DisconnectedQubits",
    "RoutedCircuit",
    "route",
    "DEFAULT_STALENESS_LIMIT",
    "CompiledTemplate",
    "CompileError",
    "DurationModel",
    "ExecutablePayload",
    "RecompileRequired",
    "StaleCalibration",
    "bind_with_calibration",
    "compile_template",
    "estimate_duration",
    "estimate_fidelity",
]

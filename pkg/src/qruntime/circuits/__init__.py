from .ir import (
    GATES_1Q,
    GATES_2Q,
    KNOWN_GATES,
    ROTATION_GATES,
    Circuit,
    CircuitError,
    Instruction,
    Param,
    ParamBinding,
    SymbolRef,
    UnboundSymbolError,
    Violation,
    bind,
    validate,
)
from .qasm import QasmError, QasmSemanticError, QasmSyntaxError, parse, serialize

__all__ = [
    "GATES_1Q",
    "GATES_2Q",
    "KNOWN_GATES",
    "ROTATION_GATES",
    "Circuit",
    "CircuitError",
    "Instruction",
    "Param",
    "ParamBinding",
    "SymbolRef",
    "UnboundSymbolError",
    "Violation",
    "bind",
    "validate",
    "QasmError",
    "QasmSemanticError",
    "QasmSyntaxError",
    "parse",
    "serialize",
]

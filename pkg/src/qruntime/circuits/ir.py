"""Framework-neutral circuit intermediate representation.

A Circuit is an immutable value: qubit/clbit counts, an ordered instruction
tuple, and the set of free parameter names. Gate parameters are either plain
floats (radians) or a SymbolRef — one named parameter plus a literal offset,
which is all the interchange grammar allows.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

# Interchange gate set. ``sx`` is additionally accepted because it is a
# native basis gate on the simulated devices and compiled circuits must be
# representable (and serializable) in the same IR.
GATES_1Q = frozenset({"h", "x", "y", "z", "s", "sdg", "t", "tdg", "sx", "rx", "ry", "rz"})
GATES_2Q = frozenset({"cx", "cz", "swap"})
ROTATION_GATES = frozenset({"rx", "ry", "rz"})
KNOWN_GATES = GATES_1Q | GATES_2Q | {"measure", "barrier"}


class CircuitError(ValueError):
    """A circuit value violates an IR invariant."""


class UnboundSymbolError(CircuitError):
    def __init__(self, name: str):
        super().__init__(f"no value bound for parameter '{name}'")
        self.name = name


@dataclass(frozen=True)
class SymbolRef:
    """Symbolic parameter reference: ``name`` shifted by ``offset`` radians."""

    name: str
    offset: float = 0.0

    def shifted(self, delta: float) -> "SymbolRef":
        return SymbolRef(self.name, self.offset + delta)


Param = float | SymbolRef


@dataclass(frozen=True)
class Instruction:
    gate: str
    qubits: tuple[int, ...]
    params: tuple[Param, ...] = ()
    clbits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "clbits", tuple(self.clbits))
        if self.gate not in KNOWN_GATES:
            raise CircuitError(f"unknown gate '{self.gate}'")
        if self.gate == "barrier":
            if self.params or self.clbits:
                raise CircuitError("barrier takes no params or clbits")
        elif self.gate == "measure":
            if len(self.qubits) != 1 or len(self.clbits) != 1:
                raise CircuitError("measure maps exactly one qubit to exactly one clbit")
            if self.params:
                raise CircuitError("measure takes no params")
        else:
            arity = 1 if self.gate in GATES_1Q else 2
            if len(self.qubits) != arity:
                raise CircuitError(f"gate '{self.gate}' expects {arity} qubit(s), got {len(self.qubits)}")
            if arity == 2 and self.qubits[0] == self.qubits[1]:
                raise CircuitError(f"gate '{self.gate}' qubits must be distinct")
            want = 1 if self.gate in ROTATION_GATES else 0
            if len(self.params) != want:
                raise CircuitError(f"gate '{self.gate}' expects {want} parameter(s), got {len(self.params)}")
            if self.clbits:
                raise CircuitError(f"gate '{self.gate}' takes no clbits")

    @property
    def symbol(self) -> str | None:
        for p in self.params:
            if isinstance(p, SymbolRef):
                return p.name
        return None


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    num_clbits: int
    instructions: tuple[Instruction, ...]
    symbols: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        object.__setattr__(self, "symbols", frozenset(self.symbols))
        if self.num_qubits < 0 or self.num_clbits < 0:
            raise CircuitError("register sizes must be non-negative")
        for ins in self.instructions:
            for q in ins.qubits:
                if not 0 <= q < self.num_qubits:
                    raise CircuitError(f"qubit index {q} out of range for {self.num_qubits} qubit(s)")
            if ins.gate == "barrier" and len(set(ins.qubits)) != len(ins.qubits):
                raise CircuitError("barrier qubits must be distinct")
            for c in ins.clbits:
                if not 0 <= c < self.num_clbits:
                    raise CircuitError(f"clbit index {c} out of range for {self.num_clbits} clbit(s)")
            sym = ins.symbol
            if sym is not None and sym not in self.symbols:
                raise CircuitError(f"instruction references undeclared parameter '{sym}'")

    @property
    def is_bound(self) -> bool:
        return not self.symbols

    def measured_qubits(self) -> tuple[int, ...]:
        seen: list[int] = []
        for ins in self.instructions:
            if ins.gate == "measure" and ins.qubits[0] not in seen:
                seen.append(ins.qubits[0])
        return tuple(seen)

    def measure_map(self) -> tuple[tuple[int, int], ...]:
        """(qubit, clbit) pairs in program order."""
        return tuple((ins.qubits[0], ins.clbits[0]) for ins in self.instructions if ins.gate == "measure")


@dataclass(frozen=True)
class ParamBinding:
    """Radian values for named parameters."""

    values: dict[str, float] = field(default_factory=dict)

    def covers(self, symbols: frozenset[str]) -> bool:
        return symbols <= set(self.values)


def bind(circuit: Circuit, binding: ParamBinding | dict[str, float]) -> Circuit:
    """Substitute every symbolic parameter with its literal value.

    The binding must cover all free symbols; extra entries are ignored. The
    result carries an empty symbol set. Binding a fully bound circuit with
    anything is the identity.
    """
    values = binding.values if isinstance(binding, ParamBinding) else binding
    if not circuit.symbols:
        return circuit
    missing = sorted(circuit.symbols - set(values))
    if missing:
        raise UnboundSymbolError(missing[0])
    out = []
    for ins in circuit.instructions:
        if ins.symbol is None:
            out.append(ins)
            continue
        resolved = tuple(
            float(values[p.name]) + p.offset if isinstance(p, SymbolRef) else p for p in ins.params
        )
        out.append(replace(ins, params=resolved))
    return Circuit(circuit.num_qubits, circuit.num_clbits, tuple(out), frozenset())


# --- capability validation (report-style, the transpiler repairs what it can) ---


@dataclass(frozen=True)
class Violation:
    kind: str  # too_many_qubits | non_basis_gate | uncoupled_pair
    detail: str
    fatal: bool
    gate: str | None = None
    qubits: tuple[int, ...] = ()


def validate(circuit: Circuit, caps) -> list[Violation]:
    """Report capability violations. Gate-set and coupling findings are
    transpilable (fatal=False); only an oversized circuit is fatal."""
    out: list[Violation] = []
    if circuit.num_qubits > caps.num_qubits:
        out.append(
            Violation(
                kind="too_many_qubits",
                detail=f"circuit uses {circuit.num_qubits} qubits, backend has {caps.num_qubits}",
                fatal=True,
            )
        )
    flagged: set[str] = set()
    for ins in circuit.instructions:
        if ins.gate in ("measure", "barrier"):
            continue
        if ins.gate not in caps.basis_gates and ins.gate not in flagged:
            flagged.add(ins.gate)
            out.append(
                Violation(
                    kind="non_basis_gate",
                    detail=f"gate '{ins.gate}' is not in the backend basis (transpilable)",
                    fatal=False,
                    gate=ins.gate,
                )
            )
        if len(ins.qubits) == 2 and not circuit.num_qubits > caps.num_qubits:
            a, b = ins.qubits
            if a < caps.num_qubits and b < caps.num_qubits and not caps.is_coupled(a, b):
                out.append(
                    Violation(
                        kind="uncoupled_pair",
                        detail=f"2q gate '{ins.gate}' on uncoupled pair ({a},{b}) (routable)",
                        fatal=False,
                        gate=ins.gate,
                        qubits=(a, b),
                    )
                )
    return out

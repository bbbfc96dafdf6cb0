"""Swap insertion so every two-qubit gate acts on a coupled pair.

The input circuit is on logical qubits and already in basis gates; the output
circuit is on physical qubits. Non-adjacent cx gates are resolved by walking
the control along a BFS shortest path in the coupling graph, each hop emitted
as a cx-triple swap. The logical->physical map is tracked throughout, so
measurements land on whatever physical qubit currently holds the logical
state and classical bit labels stay logical. The final map is returned as the
output permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..capabilities import BackendCapabilities
from ..circuits import Circuit, Instruction


class DisconnectedQubits(ValueError):
    def __init__(self, a: int, b: int):
        super().__init__(f"no coupling path between physical qubits {a} and {b}")
        self.pair = (a, b)


@dataclass(frozen=True)
class RoutedCircuit:
    circuit: Circuit  # on physical qubits
    output_permutation: dict[int, int]  # logical -> final physical


def _swap_as_cx(a: int, b: int) -> list[Instruction]:
    return [Instruction("cx", (a, b)), Instruction("cx", (b, a)), Instruction("cx", (a, b))]


def route(circuit: Circuit, caps: BackendCapabilities, layout: tuple[int, ...]) -> RoutedCircuit:
    if len(set(layout)) != len(layout):
        raise ValueError("layout must be injective")
    if any(not 0 <= p < caps.num_qubits for p in layout):
        raise ValueError("layout references physical qubits outside the device")

    position = {logical: layout[logical] for logical in range(circuit.num_qubits)}
    holder = {phys: logical for logical, phys in position.items()}  # partial inverse

    def move(phys_a: int, phys_b: int) -> None:
        la, lb = holder.get(phys_a), holder.get(phys_b)
        if la is not None:
            position[la] = phys_b
        if lb is not None:
            position[lb] = phys_a
        holder[phys_a], holder[phys_b] = lb, la

    out: list[Instruction] = []
    for ins in circuit.instructions:
        if ins.gate == "barrier":
            out.append(replace(ins, qubits=tuple(position[q] for q in ins.qubits)))
            continue
        if ins.gate == "measure":
            out.append(replace(ins, qubits=(position[ins.qubits[0]],)))
            continue
        if len(ins.qubits) == 1:
            out.append(replace(ins, qubits=(position[ins.qubits[0]],)))
            continue
        pa, pb = position[ins.qubits[0]], position[ins.qubits[1]]
        if not caps.is_coupled(pa, pb):
            path = caps.shortest_path(pa, pb)
            if path is None:
                raise DisconnectedQubits(pa, pb)
            # Walk the first operand along the path until adjacent to the second.
            for hop in range(len(path) - 2):
                out.extend(_swap_as_cx(path[hop], path[hop + 1]))
                move(path[hop], path[hop + 1])
            pa, pb = position[ins.qubits[0]], position[ins.qubits[1]]
        out.append(replace(ins, qubits=(pa, pb)))

    routed = Circuit(caps.num_qubits, circuit.num_clbits, tuple(out), circuit.symbols)
    return RoutedCircuit(circuit=routed, output_permutation=dict(position))

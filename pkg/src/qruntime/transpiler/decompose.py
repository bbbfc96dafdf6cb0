"""Rewrite circuits into the {rz, sx, x, cx} basis.

Fixed rule table, applied to a fixpoint. Every rule is exact up to global
phase (checked by the unitary-oracle tests):

    h          -> rz(pi/2) sx rz(pi/2)
    z          -> rz(pi)
    s / sdg    -> rz(+-pi/2)
    t / tdg    -> rz(+-pi/4)
    y          -> rz(pi) x
    rx(a)      -> rz(pi/2) sx rz(a+pi) sx rz(pi/2)
    ry(a)      -> sx rz(a+pi) sx rz(pi)
    cz         -> h(target) cx h(target)
    swap       -> cx cx cx

The rotation rules shift the angle by a literal, so symbolic parameters pass
through unchanged in form (symbol + offset) and the circuit's symbol set is
preserved.
"""

from __future__ import annotations

import math

from ..circuits import Circuit, Instruction, Param, SymbolRef

PI = math.pi

TARGET_BASIS = frozenset({"rz", "sx", "x", "cx"})


class UnsupportedGate(ValueError):
    def __init__(self, gate: str):
        super().__init__(f"no decomposition rule for gate '{gate}'")
        self.gate = gate


def _shift(param: Param, delta: float) -> Param:
    if isinstance(param, SymbolRef):
        return param.shifted(delta)
    return param + delta


def _rule(ins: Instruction) -> list[Instruction] | None:
    g = ins.gate
    q = ins.qubits
    if g == "h":
        return [Instruction("rz", q, (PI / 2,)), Instruction("sx", q), Instruction("rz", q, (PI / 2,))]
    if g == "z":
        return [Instruction("rz", q, (PI,))]
    if g == "s":
        return [Instruction("rz", q, (PI / 2,))]
    if g == "sdg":
        return [Instruction("rz", q, (-PI / 2,))]
    if g == "t":
        return [Instruction("rz", q, (PI / 4,))]
    if g == "tdg":
        return [Instruction("rz", q, (-PI / 4,))]
    if g == "y":
        return [Instruction("rz", q, (PI,)), Instruction("x", q)]
    if g == "rx":
        a = ins.params[0]
        return [
            Instruction("rz", q, (PI / 2,)),
            Instruction("sx", q),
            Instruction("rz", q, (_shift(a, PI),)),
            Instruction("sx", q),
            Instruction("rz", q, (PI / 2,)),
        ]
    if g == "ry":
        a = ins.params[0]
        return [
            Instruction("sx", q),
            Instruction("rz", q, (_shift(a, PI),)),
            Instruction("sx", q),
            Instruction("rz", q, (PI,)),
        ]
    if g == "cz":
        ctrl, tgt = q
        return [
            Instruction("h", (tgt,)),
            Instruction("cx", (ctrl, tgt)),
            Instruction("h", (tgt,)),
        ]
    if g == "swap":
        a, b = q
        return [Instruction("cx", (a, b)), Instruction("cx", (b, a)), Instruction("cx", (a, b))]
    return None


def decompose(circuit: Circuit, basis: frozenset[str] = TARGET_BASIS) -> Circuit:
    """Rewrite until only basis gates plus measure/barrier remain."""
    ops = list(circuit.instructions)
    changed = True
    while changed:
        changed = False
        out: list[Instruction] = []
        for ins in ops:
            if ins.gate in basis or ins.gate in ("measure", "barrier"):
                out.append(ins)
                continue
            expansion = _rule(ins)
            if expansion is None:
                raise UnsupportedGate(ins.gate)
            out.extend(expansion)
            changed = True
        ops = out
    return Circuit(circuit.num_qubits, circuit.num_clbits, tuple(ops), circuit.symbols)

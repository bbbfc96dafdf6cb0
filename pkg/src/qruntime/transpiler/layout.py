"""Calibration-aware placement of logical qubits onto physical qubits.

The quality of a layout is the sum of calibrated error rates of every placed
gate plus the readout error of every measured qubit. A two-qubit gate placed
on an uncoupled pair is charged for the cx-triples routing would insert:
(3*(d-1) + 1) swaps-worth of the worst cx error in the snapshot, where d is
the coupling-graph distance.

Devices with at most 6 physical qubits are searched exhaustively; larger
ones use a greedy build-out (best edge for the most-used pair, then
nearest-neighbor extension). All ties break toward the lexicographically
smallest layout tuple.
"""

from __future__ import annotations

import itertools
import math

from ..calibration import CalibrationSnapshot
from ..capabilities import BackendCapabilities, normalize_pair
from ..circuits import Circuit

EXHAUSTIVE_LIMIT = 6

# Floor on the per-cx charge for uncoupled placements so routing overhead is
# never free, even under an all-zeros calibration.
_MIN_UNCOUPLED_CHARGE = 1e-6


class LayoutError(ValueError):
    pass


def layout_score(
    circuit: Circuit,
    caps: BackendCapabilities,
    cal: CalibrationSnapshot,
    layout: tuple[int, ...],
) -> float:
    uncoupled_charge = max(cal.max_cx_error(), _MIN_UNCOUPLED_CHARGE)
    score = 0.0
    for ins in circuit.instructions:
        if ins.gate in ("measure", "barrier"):
            continue
        if len(ins.qubits) == 1:
            score += cal.gate_error(ins.gate, (layout[ins.qubits[0]],))
        else:
            pa, pb = layout[ins.qubits[0]], layout[ins.qubits[1]]
            if caps.is_coupled(pa, pb):
                score += cal.gate_error(ins.gate, normalize_pair(pa, pb))
            else:
                d = caps.distance(pa, pb)
                if d is None:
                    return math.inf
                score += (3 * (d - 1) + 1) * uncoupled_charge
    for q in circuit.measured_qubits():
        score += cal.readout_error(layout[q])
    return score


def _pair_usage(circuit: Circuit) -> dict[tuple[int, int], int]:
    usage: dict[tuple[int, int], int] = {}
    for ins in circuit.instructions:
        if len(ins.qubits) == 2 and ins.gate not in ("measure", "barrier"):
            key = normalize_pair(*ins.qubits)
            usage[key] = usage.get(key, 0) + 1
    return usage


def _single_qubit_cost(circuit: Circuit, cal: CalibrationSnapshot, logical: int, phys: int) -> float:
    cost = 0.0
    for ins in circuit.instructions:
        if len(ins.qubits) == 1 and ins.gate not in ("measure", "barrier") and ins.qubits[0] == logical:
            cost += cal.gate_error(ins.gate, (phys,))
    if logical in circuit.measured_qubits():
        cost += cal.readout_error(phys)
    return cost


def _greedy_layout(circuit: Circuit, caps: BackendCapabilities, cal: CalibrationSnapshot) -> tuple[int, ...]:
    n = circuit.num_qubits
    placed: dict[int, int] = {}
    free = set(range(caps.num_qubits))
    usage = _pair_usage(circuit)

    if usage:
        anchor = min(usage, key=lambda k: (-usage[k], k))
        best = None
        for a, b in sorted(caps.coupling):
            eps = cal.gate_error("cx", (a, b))
            for pa, pb in ((a, b), (b, a)):
                cand = (eps, (pa, pb))
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise LayoutError("backend has no coupled pairs but the circuit uses 2q gates")
        pa, pb = best[1]
        placed[anchor[0]], placed[anchor[1]] = pa, pb
        free -= {pa, pb}

        def attachment(logical: int) -> int:
            return sum(c for (a, b), c in usage.items() if (a == logical and b in placed) or (b == logical and a in placed))

        while True:
            pending = [q for q in range(n) if q not in placed and attachment(q) > 0]
            if not pending:
                break
            logical = min(pending, key=lambda q: (-attachment(q), q))
            partners = [
                placed[b if a == logical else a]
                for (a, b) in usage
                if (a == logical and b in placed) or (b == logical and a in placed)
            ]
            best_p = None
            for cand in sorted(free):
                dists = [caps.distance(cand, p) for p in partners]
                if any(d is None for d in dists):
                    total_d = math.inf
                else:
                    total_d = sum(dists)
                eps = sum(
                    cal.gate_error("cx", normalize_pair(cand, p)) for p in partners if caps.is_coupled(cand, p)
                )
                key = (total_d, eps, cand)
                if best_p is None or key < best_p:
                    best_p = key
            placed[logical] = best_p[2]
            free.discard(best_p[2])

    for logical in range(n):
        if logical in placed:
            continue
        best_p = min(sorted(free), key=lambda p: (_single_qubit_cost(circuit, cal, logical, p), p))
        placed[logical] = best_p
        free.discard(best_p)

    return tuple(placed[q] for q in range(n))


def select_layout(circuit: Circuit, caps: BackendCapabilities, cal: CalibrationSnapshot) -> tuple[int, ...]:
    """Return the layout tuple (logical index -> physical qubit).

    Exhaustive when the device has <= EXHAUSTIVE_LIMIT physical qubits, so
    the returned score equals the global minimum exactly; greedy otherwise.
    """
    n = circuit.num_qubits
    if n > caps.num_qubits:
        raise LayoutError(f"circuit needs {n} qubits, backend has {caps.num_qubits}")
    if n == 0:
        return ()
    if caps.num_qubits <= EXHAUSTIVE_LIMIT:
        best_layout: tuple[int, ...] | None = None
        best_score = math.inf
        for perm in itertools.permutations(range(caps.num_qubits), n):
            score = layout_score(circuit, caps, cal, perm)
            if score < best_score:  # permutations arrive in lex order: ties keep the first
                best_score = score
                best_layout = perm
        if best_layout is None or math.isinf(best_score):
            raise LayoutError("no connected placement exists for this circuit")
        return best_layout
    return _greedy_layout(circuit, caps, cal)

"""Independent oracles used by the test suite.

Everything here is computed from first principles (dense matrix products,
exhaustive enumeration, closed-form arithmetic) without calling the code
paths under test, so a bug in the implementation cannot hide in its own
verification.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np

SQ2 = 1.0 / math.sqrt(2.0)

GATE_MATRICES_1Q = {
    "h": np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
    "s": np.diag([1, 1j]).astype(complex),
    "sdg": np.diag([1, -1j]).astype(complex),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]).astype(complex),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]).astype(complex),
    "sx": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
}

# |ab> basis with the first listed qubit as the most significant bit.
GATE_MATRICES_2Q = {
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def rotation_matrix(gate: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    if gate == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if gate == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate == "rz":
        return np.array([[np.exp(-1j * theta / 2.0), 0], [0, np.exp(1j * theta / 2.0)]], dtype=complex)
    raise ValueError(gate)


def small_matrix(gate: str, params: tuple) -> np.ndarray:
    if gate in GATE_MATRICES_1Q:
        return GATE_MATRICES_1Q[gate]
    if gate in GATE_MATRICES_2Q:
        return GATE_MATRICES_2Q[gate]
    return rotation_matrix(gate, float(params[0]))


def gate_operator(n: int, qubits: tuple[int, ...], small: np.ndarray) -> np.ndarray:
    """Embed a k-qubit matrix into the full 2^n space by bit arithmetic.
    Amplitude index bit q is qubit q."""
    dim = 2**n
    k = len(qubits)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        col_small = 0
        for q in qubits:  # first listed qubit becomes the most significant bit
            col_small = (col_small << 1) | ((col >> q) & 1)
        for row_small in range(2**k):
            amp = small[row_small, col_small]
            if amp == 0:
                continue
            row = col
            for idx, q in enumerate(qubits):
                bit = (row_small >> (k - 1 - idx)) & 1
                row = (row & ~(1 << q)) | (bit << q)
            full[row, col] += amp
    return full


def circuit_unitary(circuit) -> np.ndarray:
    """Dense unitary of a bound circuit (measure/barrier skipped)."""
    n = circuit.num_qubits
    u = np.eye(2**n, dtype=complex)
    for ins in circuit.instructions:
        if ins.gate in ("measure", "barrier"):
            continue
        u = gate_operator(n, ins.qubits, small_matrix(ins.gate, ins.params)) @ u
    return u


def statevector_by_matrix(circuit) -> np.ndarray:
    state = np.zeros(2**circuit.num_qubits, dtype=complex)
    state[0] = 1.0
    return circuit_unitary(circuit) @ state


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    if a.shape != b.shape:
        return False
    idx = int(np.argmax(np.abs(a)))
    if abs(a[idx]) < 1e-12:
        return bool(np.allclose(a, b, atol=tol))
    phase = b[idx] / a[idx]
    if abs(abs(phase) - 1.0) > 1e-6:
        return False
    return bool(np.max(np.abs(a * phase - b)) <= tol)


def project_to_logical(compiled_state: np.ndarray, permutation: dict[int, int], n_logical: int, n_phys: int):
    """Extract the logical-qubit state from a compiled run.

    Returns (state over logical qubits in logical order, residual norm on the
    non-|0> ancilla subspace). permutation maps logical -> final physical.
    """
    tensor = compiled_state.reshape((2,) * n_phys)
    logical_axes = [n_phys - 1 - permutation[l] for l in range(n_logical)]
    rest = [a for a in range(n_phys) if a not in logical_axes]
    # Logical qubit 0 must end on the fastest-varying axis.
    order = rest + [n_phys - 1 - permutation[l] for l in reversed(range(n_logical))]
    tensor = np.transpose(tensor, order)
    matrix = tensor.reshape((2 ** len(rest), 2**n_logical))
    residual = float(np.linalg.norm(matrix[1:, :])) if len(rest) else 0.0
    return matrix[0, :].copy(), residual


# ---------------------------------------------------------------- layouts


def _bfs_distance(coupling: set[tuple[int, int]], n: int, a: int, b: int) -> int | None:
    if a == b:
        return 0
    adj: dict[int, list[int]] = {q: [] for q in range(n)}
    for x, y in coupling:
        adj[x].append(y)
        adj[y].append(x)
    seen = {a}
    frontier = deque([(a, 0)])
    while frontier:
        node, d = frontier.popleft()
        for nxt in adj[node]:
            if nxt == b:
                return d + 1
            if nxt not in seen:
                seen.add(nxt)
                frontier.append((nxt, d + 1))
    return None


def reference_layout_score(circuit, caps, cal, layout: tuple[int, ...]) -> float:
    """Score recomputed from the documented definition, independently."""
    coupling = set(caps.coupling)
    cx_errors = [entry.error_rate for (g, _), entry in cal.gates.items() if g == "cx"]
    uncoupled_charge = max(max(cx_errors) if cx_errors else 0.0, 1e-6)
    score = 0.0
    measured = set()
    for ins in circuit.instructions:
        if ins.gate == "barrier":
            continue
        if ins.gate == "measure":
            measured.add(ins.qubits[0])
            continue
        phys = tuple(layout[q] for q in ins.qubits)
        if len(phys) == 1:
            entry = cal.gates.get((ins.gate, phys))
            score += entry.error_rate if entry else 0.0
        else:
            lo, hi = min(phys), max(phys)
            if (lo, hi) in coupling:
                entry = cal.gates.get((ins.gate, (lo, hi))) or cal.gates.get((ins.gate, (hi, lo)))
                score += entry.error_rate if entry else 0.0
            else:
                d = _bfs_distance(coupling, caps.num_qubits, phys[0], phys[1])
                if d is None:
                    return math.inf
                score += (3 * (d - 1) + 1) * uncoupled_charge
    for q in measured:
        score += cal.qubits[layout[q]].readout_error
    return score


def exhaustive_best_layout(circuit, caps, cal):
    """Brute force over every injective logical->physical mapping."""
    best_score = math.inf
    best_layout = None
    for perm in itertools.permutations(range(caps.num_qubits), circuit.num_qubits):
        score = reference_layout_score(circuit, caps, cal, perm)
        if score < best_score:
            best_score = score
            best_layout = perm
    return best_layout, best_score

"""Dense statevector simulation with optional depolarizing-trajectory noise.

The noiseless path (`simulate_statevector`) is the semantic oracle used by
the transpiler equivalence checks: it returns the exact 2^n amplitude vector
of the pre-measurement state (measure and barrier instructions are skipped).

The sampling path (`simulate_counts`) is a Monte Carlo trajectory simulator:
after every gate that has a nonzero depolarizing probability, a uniformly
random non-identity Pauli may be injected on the gate's qubits; measured bits
are then flipped with their per-qubit readout error. Identical
(circuit, noise, shots, seed) inputs produce identical Counts.
"""

from __future__ import annotations

import math

import numpy as np

from ..circuits import Circuit
from .counts import Counts, bits_to_string
from .noise import NoiseModel

MAX_QUBITS = 12

_SQ2 = 1.0 / math.sqrt(2.0)

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULIS = (_I, _X, _Y, _Z)

_FIXED_1Q = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": _X,
    "y": _Y,
    "z": _Z,
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, np.exp(-1j * math.pi / 4)]], dtype=complex),
    "sx": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
}

# 2q matrices are written in the |ab> basis with the first listed qubit `a`
# as the most significant index bit.
_FIXED_2Q = {
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


class SimulationError(ValueError):
    pass


class TooLargeError(SimulationError):
    def __init__(self, num_qubits: int):
        super().__init__(f"{num_qubits} qubits exceeds the {MAX_QUBITS}-qubit simulator limit")
        self.num_qubits = num_qubits


def gate_matrix(gate: str, params: tuple[float, ...]) -> np.ndarray:
    if gate in _FIXED_1Q:
        return _FIXED_1Q[gate]
    if gate in _FIXED_2Q:
        return _FIXED_2Q[gate]
    theta = float(params[0])
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    if gate == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if gate == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if gate == "rz":
        return np.array([[np.exp(-1j * theta / 2.0), 0], [0, np.exp(1j * theta / 2.0)]], dtype=complex)
    raise SimulationError(f"no matrix for gate '{gate}'")


def _apply_unitary(state: np.ndarray, matrix: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a k-qubit unitary at the given qubit positions.

    Amplitude index bit i is qubit i, so in the (2,)*n reshaped tensor qubit
    q lives on axis n-1-q.
    """
    k = len(qubits)
    tensor = state.reshape((2,) * n)
    axes = [n - 1 - q for q in qubits]
    tensor = np.moveaxis(tensor, axes, range(k))
    flat = tensor.reshape(2**k, -1)
    flat = matrix @ flat
    tensor = flat.reshape((2,) * k + (2,) * (n - k))
    tensor = np.moveaxis(tensor, range(k), axes)
    return tensor.reshape(-1)


def simulate_statevector(circuit: Circuit) -> np.ndarray:
    """Exact amplitudes of the pre-measurement state.

    The circuit must be fully bound and use at most MAX_QUBITS qubits.
    """
    if not circuit.is_bound:
        raise SimulationError(f"circuit has unbound parameters: {sorted(circuit.symbols)}")
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise TooLargeError(n)
    state = np.zeros(2 ** max(n, 0), dtype=complex)
    state[0] = 1.0
    for ins in circuit.instructions:
        if ins.gate in ("measure", "barrier"):
            continue
        state = _apply_unitary(state, gate_matrix(ins.gate, ins.params), ins.qubits, n)
    return state


def _pauli_matrix(indices: tuple[int, ...]) -> np.ndarray:
    mat = _PAULIS[indices[0]]
    for idx in indices[1:]:
        mat = np.kron(mat, _PAULIS[idx])
    return mat


def _final_distribution(circuit: Circuit, injections: dict[int, tuple[int, ...]], n: int) -> np.ndarray:
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    for pos, ins in enumerate(circuit.instructions):
        if ins.gate in ("measure", "barrier"):
            continue
        state = _apply_unitary(state, gate_matrix(ins.gate, ins.params), ins.qubits, n)
        pauli = injections.get(pos)
        if pauli is not None:
            state = _apply_unitary(state, _pauli_matrix(pauli), ins.qubits, n)
    probs = np.abs(state) ** 2
    total = probs.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
        probs = probs / total
    return probs


def simulate_counts(circuit: Circuit, noise: NoiseModel | None, shots: int, seed: int | None = None) -> Counts:
    """Sample measurement outcomes under the trajectory noise model.

    Trajectories that share the same error pattern are simulated once, so the
    noiseless case costs a single statevector run. One full computational
    basis outcome is drawn per shot and the measure map projects it onto
    classical bits; readout flips are applied per measured bit afterwards.
    """
    if not circuit.is_bound:
        raise SimulationError(f"circuit has unbound parameters: {sorted(circuit.symbols)}")
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise TooLargeError(n)
    noise = noise or NoiseModel.noiseless()
    rng = np.random.default_rng(seed)

    # Noise sites: instruction positions with nonzero depolarizing probability.
    sites: list[tuple[int, float, int]] = []  # (instruction pos, p, arity)
    for pos, ins in enumerate(circuit.instructions):
        if ins.gate in ("measure", "barrier"):
            continue
        p = noise.gate_probability(ins.gate, ins.qubits)
        if p > 0.0:
            sites.append((pos, p, len(ins.qubits)))

    # Error pattern per shot. Pauli indices are drawn for every (shot, site)
    # pair regardless of occurrence to keep the rng stream layout fixed.
    patterns: list[tuple[tuple[int, tuple[int, ...]], ...]] = [()] * shots
    if sites:
        occurs = rng.random((shots, len(sites)))
        choices = rng.integers(1, [4**arity for _, _, arity in sites], size=(shots, len(sites)))
        for s in range(shots):
            pattern = []
            for j, (pos, p, arity) in enumerate(sites):
                if occurs[s, j] < p:
                    idx = int(choices[s, j])
                    if arity == 1:
                        pattern.append((pos, (idx,)))
                    else:
                        pattern.append((pos, (idx // 4, idx % 4)))
            patterns[s] = tuple(pattern)

    # Group shots by pattern; simulate each distinct trajectory once.
    groups: dict[tuple, list[int]] = {}
    for s, pattern in enumerate(patterns):
        groups.setdefault(pattern, []).append(s)

    outcomes = np.zeros(shots, dtype=np.int64)
    dim = 2**n
    for pattern, members in groups.items():
        probs = _final_distribution(circuit, dict(pattern), n)
        outcomes[members] = rng.choice(dim, size=len(members), p=probs)

    measure_map = circuit.measure_map()
    num_clbits = circuit.num_clbits
    bit_columns = np.zeros((shots, num_clbits), dtype=np.int64)
    for qubit, clbit in measure_map:
        bit_columns[:, clbit] = (outcomes >> qubit) & 1
    for qubit, clbit in measure_map:
        flip_p = noise.readout_error(qubit)
        if flip_p > 0.0:
            flips = rng.random(shots) < flip_p
            bit_columns[flips, clbit] ^= 1

    tally: dict[str, int] = {}
    for s in range(shots):
        key = bits_to_string(list(bit_columns[s]))
        tally[key] = tally.get(key, 0) + 1
    return Counts(tally, shots, num_clbits)

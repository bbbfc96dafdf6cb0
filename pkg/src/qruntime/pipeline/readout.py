"""Readout error mitigation via tensored confusion-matrix inversion.

The stage measures the per-qubit confusion matrices empirically: alongside
the main circuit it runs two calibration variants that prepare the measured
qubits in all-zeros and all-ones. Each measured bit's 2x2 confusion matrix

    C = [[1-f0, f1], [f0, 1-f1]]     (columns: prepared 0/1, rows: read 0/1)

is inverted and the tensored inverse applied to the main run's probability
vector before the expectation is taken; the result is clipped to [-1, 1].
"""

from __future__ import annotations

import numpy as np

from ..backends import Counts
from ..circuits import Circuit, Instruction
from .chain import Stage, Variant, VariantResult
from .observables import expectation_variance


class SingularConfusion(ValueError):
    def __init__(self, clbit: int, f0: float, f1: float):
        super().__init__(
            f"confusion matrix for classical bit {clbit} is singular "
            f"(flip probabilities f0={f0:.3f}, f1={f1:.3f}); readout error must be < 0.5"
        )
        self.clbit = clbit


def confusion_matrix(f0: float, f1: float) -> np.ndarray:
    return np.array([[1.0 - f0, f1], [f0, 1.0 - f1]], dtype=float)


# Determinant floor below which an empirically estimated confusion matrix is
# treated as singular: det = 1 - f0 - f1 hovers around zero (within shot
# noise) once the flip probability reaches 0.5, and the inverse explodes.
DET_FLOOR = 0.02


def invert_confusions(confusions: list[np.ndarray], clbits: list[int]) -> list[np.ndarray]:
    inverses = []
    for matrix, clbit in zip(confusions, clbits):
        det = matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0]
        if det <= DET_FLOOR:
            raise SingularConfusion(clbit, float(matrix[1, 0]), float(matrix[0, 1]))
        inverses.append(np.linalg.inv(matrix))
    return inverses


def counts_to_probability_vector(counts: Counts, clbits: list[int]) -> np.ndarray:
    """Probability vector over the selected classical bits, index bit i =
    clbits[i]."""
    dim = 2 ** len(clbits)
    vec = np.zeros(dim, dtype=float)
    for bitstring, n in counts.counts.items():
        idx = 0
        for i, b in enumerate(clbits):
            if bitstring[len(bitstring) - 1 - b] == "1":
                idx |= 1 << i
        vec[idx] += n
    return vec / counts.shots


def apply_tensored_inverse(vec: np.ndarray, inverses: list[np.ndarray]) -> np.ndarray:
    """Apply per-bit 2x2 inverses to the probability vector without forming
    the full 2^n matrix."""
    n = len(inverses)
    tensor = vec.reshape((2,) * n)
    for i, inv in enumerate(inverses):
        axis = n - 1 - i  # index bit i is axis n-1-i in row-major reshape
        tensor = np.moveaxis(tensor, axis, 0)
        shape = tensor.shape
        tensor = (inv @ tensor.reshape(2, -1)).reshape(shape)
        tensor = np.moveaxis(tensor, 0, axis)
    return tensor.reshape(-1)


def corrected_parity(vec: np.ndarray, mask: int | None = None) -> float:
    """Parity expectation over the vector's index bits; a mask restricts the
    parity to a subset of those bits."""
    n = int(np.log2(len(vec)))
    if mask is None:
        mask = (1 << n) - 1
    signs = np.array([(-1) ** bin(i & mask).count("1") for i in range(2**n)], dtype=float)
    return float(np.dot(signs, vec))


def _calibration_circuit(base: Circuit, ones: bool) -> Circuit:
    """Same registers and measure map as the base circuit; prepares the
    measured qubits in |0> (no gates) or |1> (one x per measured qubit)."""
    instructions: list[Instruction] = []
    if ones:
        for q in base.measured_qubits():
            instructions.append(Instruction("x", (q,)))
    for q, c in base.measure_map():
        instructions.append(Instruction("measure", (q,), (), (c,)))
    return Circuit(base.num_qubits, base.num_clbits, tuple(instructions), frozenset())


def _flip_rates(counts: Counts, clbits: list[int], prepared_one: bool) -> list[float]:
    """Per-bit probability of reading the wrong value."""
    rates = []
    for b in clbits:
        wrong = 0
        for bitstring, n in counts.counts.items():
            bit = bitstring[len(bitstring) - 1 - b]
            if (bit == "1") != prepared_one:
                wrong += n
        rates.append(wrong / counts.shots)
    return rates


class ReadoutMitigationStage(Stage):
    """Wrapper that corrects measurement statistics with inverted per-qubit
    confusion matrices estimated from basis-state runs."""

    name = "ReadoutMitigation"

    def expand(self, variant: Variant) -> list[Variant]:
        base = variant.circuit
        if not base.measure_map():
            return [variant.tagged(role="main", cal=False)]
        return [
            variant.tagged(role="main", cal=False),
            Variant(circuit=_calibration_circuit(base, ones=False), tags={**variant.tags, "role": "cal0", "cal": True}),
            Variant(circuit=_calibration_circuit(base, ones=True), tags={**variant.tags, "role": "cal1", "cal": True}),
        ]

    def fold(self, variant: Variant, children: list[Variant], results: list[VariantResult]) -> VariantResult:
        main = results[0]
        if len(results) == 1:
            return main
        clbits = sorted({c for _, c in variant.circuit.measure_map()})
        f0 = _flip_rates(results[1].counts, clbits, prepared_one=False)
        f1 = _flip_rates(results[2].counts, clbits, prepared_one=True)
        confusions = [confusion_matrix(a, b) for a, b in zip(f0, f1)]
        inverses = invert_confusions(confusions, clbits)
        raw_vec = counts_to_probability_vector(main.counts, clbits)
        corrected_vec = apply_tensored_inverse(raw_vec, inverses)
        observable = variant.tags.get("observable")
        mask = None
        if observable is not None and getattr(observable, "bits", None) is not None:
            mask = sum(1 << clbits.index(b) for b in observable.bits if b in clbits)
        value = float(np.clip(corrected_parity(corrected_vec, mask), -1.0, 1.0))
        return VariantResult(
            counts=main.counts,
            value=value,
            variance=expectation_variance(value, main.counts.shots),
            metadata={
                **main.metadata,
                "readout_flip_rates": {"prepared_zero": f0, "prepared_one": f1},
                "readout_raw_value": main.value,
            },
        )

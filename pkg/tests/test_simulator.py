import math

import numpy as np
import pytest
from scipy import stats

from qruntime.backends import (
    Counts,
    NoiseModel,
    TooLargeError,
    simulate_counts,
    simulate_statevector,
)
from qruntime.backends.statevector import SimulationError
from qruntime.circuits import Circuit, Instruction, parse

from conftest import random_circuit
from oracles import equal_up_to_global_phase, statevector_by_matrix

SQ2 = 1.0 / math.sqrt(2.0)


class TestStatevector:
    def test_h_on_zero(self):
        state = simulate_statevector(parse("qreg q[1]; h q[0];"))
        assert np.allclose(state, [SQ2, SQ2], atol=1e-12)

    def test_empty_circuit_identity(self):
        state = simulate_statevector(parse("qreg q[3];"))
        expected = np.zeros(8)
        expected[0] = 1.0
        assert np.allclose(state, expected, atol=0)

    def test_bell_state(self):
        state = simulate_statevector(parse("qreg q[2]; h q[0]; cx q[0],q[1];"))
        assert np.allclose(state, [SQ2, 0, 0, SQ2], atol=1e-12)

    def test_x_endianness(self):
        # x on qubit 0 of 2 flips amplitude index 1 (bit 0), not index 2
        state = simulate_statevector(parse("qreg q[2]; x q[0];"))
        assert np.allclose(state, [0, 1, 0, 0], atol=0)

    def test_norm_preserved(self, rng):
        for _ in range(20):
            c = random_circuit(rng, max_qubits=5, max_gates=20, measure=False)
            state = simulate_statevector(c)
            assert abs(np.linalg.norm(state) - 1.0) <= 1e-12

    def test_matches_matrix_oracle(self, rng):
        for _ in range(25):
            c = random_circuit(rng, max_qubits=4, max_gates=12, measure=False)
            assert equal_up_to_global_phase(statevector_by_matrix(c), simulate_statevector(c), tol=1e-9)

    def test_too_large(self):
        with pytest.raises(TooLargeError):
            simulate_statevector(Circuit(13, 0, ()))

    def test_unbound_rejected(self):
        with pytest.raises(SimulationError):
            simulate_statevector(parse("input float t; qreg q[1]; rz(t) q[0];"))


class TestCounts:
    def test_conservation_and_clbit_width(self):
        counts = simulate_counts(parse("qreg q[2]; creg c[2]; h q[0]; measure q[0]->c[0];"), None, 777, seed=5)
        assert counts.shots == 777
        assert sum(counts.counts.values()) == 777
        assert all(len(k) == 2 for k in counts.counts)

    def test_h_frequency_within_binomial_bound(self):
        counts = simulate_counts(parse("qreg q[1]; creg c[1]; h q[0]; measure q[0]->c[0];"), None, 4096, seed=42)
        p0 = counts.probability("0")
        assert abs(p0 - 0.5) <= 0.04

    def test_noiseless_bell_support(self):
        counts = simulate_counts(
            parse("qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0]->c[0]; measure q[1]->c[1];"),
            None,
            2048,
            seed=9,
        )
        assert set(counts.counts) == {"00", "11"}

    def test_determinism(self):
        circuit = parse("qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0]->c[0]; measure q[1]->c[1];")
        noise = NoiseModel.uniform(0.05, readout=0.02, num_qubits=2)
        a = simulate_counts(circuit, noise, 512, seed=1234)
        b = simulate_counts(circuit, noise, 512, seed=1234)
        assert a == b
        c = simulate_counts(circuit, noise, 512, seed=1235)
        assert a != c  # different stream with overwhelming probability

    def test_readout_flip_half_on_x(self):
        # x then measure with flip probability 0.5: P(read 1) = 0.5
        circuit = parse("qreg q[1]; creg c[1]; x q[0]; measure q[0]->c[0];")
        noise = NoiseModel(readout_errors={0: 0.499999})
        counts = simulate_counts(circuit, noise, 4096, seed=7)
        assert abs(counts.probability("1") - 0.5) <= 0.04

    CHI_SQUARE_CIRCUITS = [
        "qreg q[3]; creg c[3]; h q[0]; h q[1]; h q[2]; measure q[0]->c[0]; measure q[1]->c[1]; measure q[2]->c[2];",
        "qreg q[2]; creg c[2]; ry(1.1) q[0]; cx q[0],q[1]; h q[1]; measure q[0]->c[0]; measure q[1]->c[1];",
        "qreg q[3]; creg c[3]; h q[0]; cx q[0],q[1]; ry(0.7) q[2]; measure q[0]->c[0]; measure q[1]->c[1]; measure q[2]->c[2];",
    ]

    def test_chi_square_goodness_of_fit(self):
        # noiseless sampling matches |amplitude|^2 at p > 0.001
        for seed, text in enumerate(self.CHI_SQUARE_CIRCUITS, start=11):
            c = parse(text)
            state = simulate_statevector(c)
            probs = np.abs(state) ** 2
            counts = simulate_counts(c, None, 4096, seed=seed)
            observed = np.zeros(len(probs))
            # measured bits match qubit order here (measure q->c identity map)
            for bits, n in counts.counts.items():
                observed[int(bits, 2)] += n
            keep = probs > 1e-9
            expected = probs[keep] * 4096
            expected *= observed[keep].sum() / expected.sum()
            _, p_value = stats.chisquare(observed[keep], expected)
            assert p_value > 0.001

    def test_depolarizing_reduces_purity(self):
        circuit = parse("qreg q[1]; creg c[1]; x q[0]; measure q[0]->c[0];")
        noisy = simulate_counts(circuit, NoiseModel.uniform(0.3), 4096, seed=3)
        assert noisy.probability("0") > 0.05  # errors leak population back

    def test_shots_required(self):
        with pytest.raises(SimulationError):
            simulate_counts(parse("qreg q[1]; creg c[1]; measure q[0]->c[0];"), None, 0, seed=1)


class TestCountsType:
    def test_sum_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Counts({"0": 3}, shots=4, num_clbits=1)

    def test_bitstring_width_checked(self):
        with pytest.raises(ValueError):
            Counts({"00": 4}, shots=4, num_clbits=1)

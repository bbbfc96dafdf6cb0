from __future__ import annotations

import math

import numpy as np
import pytest

from qruntime.circuits import Circuit, Instruction

GATE_POOL_1Q = ["h", "x", "y", "z", "s", "sdg", "t", "tdg", "sx"]
GATE_POOL_ROT = ["rx", "ry", "rz"]
GATE_POOL_2Q = ["cx", "cz", "swap"]


def random_circuit(
    rng: np.random.Generator,
    max_qubits: int = 5,
    max_gates: int = 20,
    measure: str = "all",
    min_qubits: int = 1,
) -> Circuit:
    """Random valid bound circuit over the full interchange gate set."""
    n = int(rng.integers(min_qubits, max_qubits + 1))
    n_gates = int(rng.integers(0, max_gates + 1))
    instructions: list[Instruction] = []
    for _ in range(n_gates):
        roll = rng.random()
        if n >= 2 and roll < 0.35:
            gate = GATE_POOL_2Q[int(rng.integers(len(GATE_POOL_2Q)))]
            a, b = rng.choice(n, size=2, replace=False)
            instructions.append(Instruction(gate, (int(a), int(b))))
        elif roll < 0.7:
            gate = GATE_POOL_1Q[int(rng.integers(len(GATE_POOL_1Q)))]
            instructions.append(Instruction(gate, (int(rng.integers(n)),)))
        else:
            gate = GATE_POOL_ROT[int(rng.integers(len(GATE_POOL_ROT)))]
            theta = float(rng.uniform(-2 * math.pi, 2 * math.pi))
            instructions.append(Instruction(gate, (int(rng.integers(n)),), (theta,)))
    if measure == "all":
        for q in range(n):
            instructions.append(Instruction("measure", (q,), (), (q,)))
    elif measure == "some":
        for q in range(n):
            if rng.random() < 0.5:
                instructions.append(Instruction("measure", (q,), (), (q,)))
    return Circuit(n, n, tuple(instructions))


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        verdict = "PASS" if report.passed else "FAIL"
        item.config.pluginmanager.get_plugin("terminalreporter").write_line(
            f"[ACCEPTANCE] {item.nodeid.split('::', 1)[1]}: {verdict}"
        )

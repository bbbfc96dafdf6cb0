"""Static device descriptions: qubit count, native gate set, coupling graph,
timing data. These are the facts compilation and scheduling need about a
backend that do not drift between calibrations.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


def normalize_pair(a: int, b: int) -> tuple[int, int]:
    """Coupling is undirected; pairs are stored as (low, high)."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class BackendCapabilities:
    backend_id: str
    num_qubits: int
    basis_gates: frozenset[str] = frozenset({"rz", "sx", "x", "cx"})
    coupling: frozenset[tuple[int, int]] = frozenset()
    gate_durations: dict[str, float] = field(default_factory=dict)  # ns
    readout_duration: float = 1000.0  # ns
    max_shots: int = 100_000
    timing_granularity: float = 8.0  # ns

    def __post_init__(self):
        for a, b in self.coupling:
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValueError(f"coupling pair ({a},{b}) outside 0..{self.num_qubits - 1}")
            if a == b:
                raise ValueError(f"coupling pair ({a},{b}) is not a pair of distinct qubits")
        if any(d <= 0 for d in self.gate_durations.values()) or self.readout_duration <= 0:
            raise ValueError("gate and readout durations must be > 0")
        if self.max_shots < 1:
            raise ValueError("max_shots must be >= 1")

    def is_coupled(self, a: int, b: int) -> bool:
        return normalize_pair(a, b) in self.coupling

    def neighbors(self, q: int) -> list[int]:
        out = [b if a == q else a for a, b in self.coupling if q in (a, b)]
        return sorted(out)

    def shortest_path(self, src: int, dst: int) -> list[int] | None:
        """BFS shortest path over the coupling graph; neighbors visited in
        ascending order so the result is deterministic. None if disconnected."""
        if src == dst:
            return [src]
        prev: dict[int, int] = {src: src}
        frontier = deque([src])
        while frontier:
            node = frontier.popleft()
            for nxt in self.neighbors(node):
                if nxt in prev:
                    continue
                prev[nxt] = node
                if nxt == dst:
                    path = [dst]
                    while path[-1] != src:
                        path.append(prev[path[-1]])
                    return path[::-1]
                frontier.append(nxt)
        return None

    def distance(self, a: int, b: int) -> int | None:
        path = self.shortest_path(a, b)
        return None if path is None else len(path) - 1


def line_coupling(n: int) -> frozenset[tuple[int, int]]:
    return frozenset((i, i + 1) for i in range(n - 1))


def ring_coupling(n: int) -> frozenset[tuple[int, int]]:
    pairs = {(i, i + 1) for i in range(n - 1)}
    if n > 2:
        pairs.add((0, n - 1))
    return frozenset(pairs)

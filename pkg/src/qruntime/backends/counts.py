"""Measurement outcome histograms.

Bitstring convention follows the usual little-endian readout: character i
counted from the right is classical bit i.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Counts:
    counts: dict[str, int] = field(default_factory=dict)
    shots: int = 0
    num_clbits: int = 0

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected {self.shots} shots")
        for bits in self.counts:
            if len(bits) != self.num_clbits or any(ch not in "01" for ch in bits):
                raise ValueError(f"bitstring {bits!r} does not match {self.num_clbits} clbits")

    def probability(self, bitstring: str) -> float:
        if self.shots == 0:
            return 0.0
        return self.counts.get(bitstring, 0) / self.shots

    def to_dict(self) -> dict[str, int]:
        return dict(sorted(self.counts.items()))


def bits_to_string(bits: list[int] | tuple[int, ...]) -> str:
    """bits[i] is classical bit i; the string reads bit (n-1) ... bit 0."""
    return "".join(str(b) for b in reversed(bits))

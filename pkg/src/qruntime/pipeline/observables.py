"""Observable evaluation on measured counts.

The built-in observable is tensor-Z parity over measured classical bits: each
bitstring contributes (-1)^(parity of the selected bits), weighted by its
frequency. An optional bit subset restricts the parity to those classical
bits.
"""

from __future__ import annotations

from ..backends import Counts


def expectation_z(counts: Counts, bits: list[int] | None = None) -> float:
    if counts.shots == 0:
        raise ValueError("cannot take an expectation over zero shots")
    total = 0.0
    for bitstring, n in counts.counts.items():
        if bits is None:
            ones = bitstring.count("1")
        else:
            ones = sum(1 for b in bits if bitstring[len(bitstring) - 1 - b] == "1")
        total += (-1 if ones % 2 else 1) * n
    return total / counts.shots


def expectation_variance(value: float, shots: int) -> float:
    """Shot-noise variance of a +-1 observable mean."""
    if shots <= 0:
        return 0.0
    return max(1.0 - value * value, 0.0) / shots


def probabilities(counts: Counts) -> dict[str, float]:
    return {bits: n / counts.shots for bits, n in counts.counts.items()}

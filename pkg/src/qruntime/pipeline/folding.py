"""Zero-noise extrapolation: gate folding plus Richardson extrapolation.

Folding multiplies the physical noise while leaving the noiseless semantics
unchanged: at odd scale L, every non-measure gate G becomes
G (Gdag G)^((L-1)/2). Expectation values measured at several scales are then
fit linearly in the scale and read off at zero.
"""

from __future__ import annotations

import numpy as np

from ..circuits import Circuit, Instruction
from .chain import DegenerateInput, Stage, Variant, VariantResult

DEFAULT_SCALES = (1, 3, 5)

# Inverse of each gate as an instruction sequence in the same gate set.
# sx^4 = I, so sx^-1 = sx sx sx keeps the folded circuit in-basis.
_INVERSES: dict[str, tuple[str, ...]] = {
    "h": ("h",),
    "x": ("x",),
    "y": ("y",),
    "z": ("z",),
    "s": ("sdg",),
    "sdg": ("s",),
    "t": ("tdg",),
    "tdg": ("t",),
    "sx": ("sx", "sx", "sx"),
    "cx": ("cx",),
    "cz": ("cz",),
    "swap": ("swap",),
}


def _inverse(ins: Instruction) -> list[Instruction]:
    if ins.gate in ("rx", "ry", "rz"):
        return [Instruction(ins.gate, ins.qubits, (-float(ins.params[0]),))]
    return [Instruction(name, ins.qubits) for name in _INVERSES[ins.gate]]


def zne_fold(circuit: Circuit, scale: int) -> Circuit:
    """Fold every non-measure gate at the given odd scale >= 1."""
    if scale < 1 or scale % 2 == 0:
        raise ValueError(f"fold scale must be odd and >= 1, got {scale}")
    if not circuit.is_bound:
        raise ValueError("folding requires a fully bound circuit")
    if scale == 1:
        return circuit
    repeats = (scale - 1) // 2
    out: list[Instruction] = []
    for ins in circuit.instructions:
        out.append(ins)
        if ins.gate in ("measure", "barrier"):
            continue
        for _ in range(repeats):
            out.extend(_inverse(ins))
            out.append(ins)
    return Circuit(circuit.num_qubits, circuit.num_clbits, tuple(out), circuit.symbols)


def richardson_extrapolate(points: list[tuple[float, float]]) -> float:
    """Least-squares linear fit in the scale, evaluated at zero.

    Exact interpolation for collinear data. Raises DegenerateInput when fewer
    than two distinct scales are present.
    """
    if len({lam for lam, _ in points}) < 2:
        raise DegenerateInput("extrapolation needs at least two distinct scale factors")
    lams = np.array([lam for lam, _ in points], dtype=float)
    vals = np.array([val for _, val in points], dtype=float)
    design = np.stack([np.ones_like(lams), lams], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, vals, rcond=None)
    return float(coeffs[0])


def _intercept_variance(lams: np.ndarray, variances: np.ndarray) -> float:
    """Shot-noise variance of the least-squares intercept."""
    design = np.stack([np.ones_like(lams), lams], axis=1)
    pinv = np.linalg.pinv(design)  # coeffs = pinv @ values
    weights = pinv[0]
    return float(np.sum(weights**2 * variances))


class ZneStage(Stage):
    """Error-mitigating wrapper: runs folded variants and extrapolates.

    config: {"scales": [1, 3, 5]} (odd, ascending; default DEFAULT_SCALES).
    The folded value is clipped into [-1, 1] (the raw fit is kept in
    metadata) since the built-in observable is a Pauli-Z parity.
    """

    name = "ZeroNoiseExtrapolation"

    def __init__(self, config: dict | None = None):
        super().__init__(config)
        scales = tuple(int(s) for s in self.config.get("scales", DEFAULT_SCALES))
        if not scales or any(s < 1 or s % 2 == 0 for s in scales):
            raise ValueError(f"ZNE scales must be odd and >= 1, got {scales}")
        self.scales = tuple(sorted(scales))

    def expand(self, variant: Variant) -> list[Variant]:
        out = []
        for scale in self.scales:
            folded = zne_fold(variant.circuit, scale)
            out.append(Variant(circuit=folded, tags={**variant.tags, "zne_scale": scale}))
        return out

    def fold(self, variant: Variant, children: list[Variant], results: list[VariantResult]) -> VariantResult:
        if len(results) == 1:
            return results[0]
        points = [(float(child.tags["zne_scale"]), res.value) for child, res in zip(children, results)]
        fitted = richardson_extrapolate(points)
        lams = np.array([p[0] for p in points])
        variances = np.array([res.variance for res in results])
        variance = _intercept_variance(lams, variances)
        raw = results[0]  # smallest scale: the unfolded run
        return VariantResult(
            counts=raw.counts,
            value=float(np.clip(fitted, -1.0, 1.0)),
            variance=variance,
            metadata={
                **raw.metadata,
                "zne_scales": [p[0] for p in points],
                "zne_values": [p[1] for p in points],
                "zne_fit": fitted,
            },
        )

from .chain import (
    DegenerateInput,
    ExpectationResult,
    Observable,
    Stage,
    StageChain,
    StageRegistry,
    StageSpec,
    UnknownStage,
    Variant,
    VariantResult,
    resolve,
    run_chain,
)
from .folding import DEFAULT_SCALES, ZneStage, richardson_extrapolate, zne_fold
from .observables import expectation_variance, expectation_z, probabilities
from .readout import ReadoutMitigationStage, SingularConfusion, confusion_matrix


def default_registry() -> StageRegistry:
    """Registry with the built-in stages. "ErrorMitigatedExecutionBackend" is
    the conventional client-facing name for the ZNE wrapper."""
    registry = StageRegistry()
    registry.register("ZeroNoiseExtrapolation", ZneStage)
    registry.register("ErrorMitigatedExecutionBackend", ZneStage)
    registry.register("ReadoutMitigation", ReadoutMitigationStage)
    return registry


__all__ = [
    "DegenerateInput",
    "ExpectationResult",
    "Observable",
    "Stage",
    "StageChain",
    "StageRegistry",
    "StageSpec",
    "UnknownStage",
    "Variant",
    "VariantResult",
    "resolve",
    "run_chain",
    "DEFAULT_SCALES",
    "ZneStage",
    "richardson_extrapolate",
    "zne_fold",
    "expectation_variance",
    "expectation_z",
    "probabilities",
    "ReadoutMitigationStage",
    "SingularConfusion",
    "confusion_matrix",
    "default_registry",
]

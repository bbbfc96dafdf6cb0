"""Decorator-chain execution of pre/post-processing stages.

A stage wraps circuit execution the way a decorator wraps an object: its
`expand` (pre) step turns one work item into several tagged variants before
anything runs, and its `fold` (post) step collapses their results afterwards.
Stages are registered server-side under plain string names and selected per
job item through its execution options list; the leftmost entry is the
outermost wrapper, so for options [A, B] the call order is
A.pre, B.pre, execute, B.post, A.post. An empty options list is the identity
chain and reproduces bare execution bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..backends import Counts
from ..circuits import Circuit
from .observables import expectation_variance, expectation_z


class UnknownStage(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"no pipeline stage registered under '{self.name}'"


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class StageSpec:
    name: str
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Observable:
    kind: str = "z_parity"
    bits: tuple[int, ...] | None = None


@dataclass
class Variant:
    """One executable work item flowing through a chain."""

    circuit: Circuit
    tags: dict = field(default_factory=dict)

    def tagged(self, **tags) -> "Variant":
        merged = dict(self.tags)
        merged.update(tags)
        return Variant(circuit=self.circuit, tags=merged)


@dataclass
class VariantResult:
    counts: Counts | None
    value: float
    variance: float
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExpectationResult:
    value: float
    variance: float
    counts: Counts | None
    metadata: dict = field(default_factory=dict)


class Stage:
    """Base stage: identity expansion, pass-through fold."""

    name = "stage"

    def __init__(self, config: dict | None = None):
        self.config = dict(config or {})

    def expand(self, variant: Variant) -> list[Variant]:
        return [variant]

    def fold(self, variant: Variant, children: list[Variant], results: list[VariantResult]) -> VariantResult:
        return results[0]


StageFactory = Callable[[dict], Stage]


class StageRegistry:
    """Name -> stage factory map; read-mostly and safe for concurrent lookup."""

    def __init__(self):
        self._factories: dict[str, StageFactory] = {}

    def register(self, name: str, factory: StageFactory) -> None:
        self._factories[name] = factory

    def names(self) -> list[str]:
        return sorted(self._factories)

    def create(self, spec: StageSpec) -> Stage:
        factory = self._factories.get(spec.name)
        if factory is None:
            raise UnknownStage(spec.name)
        return factory(spec.config)


@dataclass(frozen=True)
class StageChain:
    stages: tuple[Stage, ...]

    def __len__(self) -> int:
        return len(self.stages)


def resolve(specs: list[StageSpec], registry: StageRegistry) -> StageChain:
    """Build the chain in list order (leftmost = outermost wrapper)."""
    return StageChain(stages=tuple(registry.create(spec) for spec in specs))


# Executor contract: (circuit, shots, seed) -> Counts. The seed argument may
# be None when the caller did not pin one.
ExecutorFn = Callable[[Circuit, int, int | None], Counts]


@dataclass
class _Node:
    variant: Variant
    children: list["_Node"] = field(default_factory=list)
    result: VariantResult | None = None
    leaf_index: int = -1


def _variant_seed(base: int | None, index: int, total: int) -> int | None:
    if base is None:
        return None
    if total == 1:
        return base  # identity chains replay bare execution exactly
    return int(np.random.SeedSequence([base & 0x7FFFFFFFFFFF, index]).generate_state(1)[0])


def run_chain(
    chain: StageChain,
    circuit: Circuit,
    shots: int,
    executor: ExecutorFn,
    observable: Observable | None = None,
    seed: int | None = None,
) -> ExpectationResult:
    """Expand through every stage, execute the leaf variants, fold back up.

    Each stage's expand runs exactly once per incoming variant (outermost
    stage first); leaves execute left to right; folds run innermost first.
    Executor failures propagate and abort the whole chain.
    """
    if not circuit.is_bound:
        raise ValueError("chains run fully bound circuits only")
    observable = observable or Observable()
    bits = list(observable.bits) if observable.bits is not None else None

    # Expansion pass: pre hooks, outermost first. Stages that re-derive values
    # from counts (readout mitigation) read the observable off the tags.
    root = _Node(variant=Variant(circuit=circuit, tags={"observable": observable}))
    leaves: list[_Node] = []

    def expand(node: _Node, depth: int) -> None:
        if depth == len(chain.stages):
            node.leaf_index = len(leaves)
            leaves.append(node)
            return
        stage = chain.stages[depth]
        for child_variant in stage.expand(node.variant):
            child = _Node(variant=child_variant)
            node.children.append(child)
            expand(child, depth + 1)

    expand(root, 0)

    # Execution pass.
    for node in leaves:
        counts = executor(node.variant.circuit, shots, _variant_seed(seed, node.leaf_index, len(leaves)))
        value = expectation_z(counts, bits)
        node.result = VariantResult(
            counts=counts,
            value=value,
            variance=expectation_variance(value, counts.shots),
        )

    # Fold pass: post hooks, innermost first.
    def fold(node: _Node, depth: int) -> VariantResult:
        if depth == len(chain.stages):
            return node.result
        stage = chain.stages[depth]
        results = [fold(child, depth + 1) for child in node.children]
        return stage.fold(node.variant, [c.variant for c in node.children], results)

    result = fold(root, 0)
    return ExpectationResult(
        value=result.value,
        variance=result.variance,
        counts=result.counts,
        metadata=result.metadata,
    )

"""Simultaneous-perturbation stochastic approximation loop.

Two cost evaluations per iteration: the parameters are perturbed by +-c_k
along a random +-1 direction, the gradient estimate is the scaled difference,
and the step is a_k times that estimate, with the standard gain schedules

    a_k = a / (k+1)^0.602        c_k = c / (k+1)^0.101

The loop checkpoints after every iteration (iteration counter, current and
best parameters, generator state, evaluation trace), and can resume from such
a checkpoint bit-for-bit: the perturbation stream continues from the saved
generator state and evaluation seeds are derived from the iteration index,
not from wall time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ALPHA = 0.602
GAMMA = 0.101

# evaluate(params, iteration, eval_index) -> cost; eval_index is 0 for the
# +perturbation and 1 for the -perturbation.
EvaluateFn = Callable[[dict[str, float], int, int], float]
CheckpointFn = Callable[[dict], None]


@dataclass
class SpsaOutcome:
    best_params: dict[str, float]
    best_value: float
    final_params: dict[str, float]
    iterations_run: int
    trace: list[list[float]] = field(default_factory=list)  # [f_plus, f_minus] per iteration


def evaluation_seed(base: int | None, iteration: int, eval_index: int) -> int | None:
    """Deterministic per-evaluation seed, independent of resume points."""
    if base is None:
        return None
    return int(
        np.random.SeedSequence([base & 0x7FFFFFFFFFFF, iteration, eval_index]).generate_state(1)[0]
    )


def _rng_from_state(state: dict | None, seed: int | None) -> np.random.Generator:
    rng = np.random.default_rng(seed)
    if state is not None:
        rng.bit_generator.state = state
    return rng


def run_spsa(
    initial_params: dict[str, float],
    iterations: int,
    a: float,
    c: float,
    evaluate: EvaluateFn,
    seed: int | None = None,
    checkpoint: CheckpointFn | None = None,
    resume: dict | None = None,
) -> SpsaOutcome:
    """Minimize the evaluated cost. `resume` is a previously checkpointed
    state dict; when present the loop continues from its iteration."""
    names = sorted(initial_params)
    if resume is not None:
        theta = np.array([resume["params"][k] for k in names], dtype=float)
        start = int(resume["iteration"])
        best_value = resume["best_value"]
        best_params = dict(resume["best_params"]) if resume.get("best_params") else dict(initial_params)
        trace = [list(pair) for pair in resume.get("trace", [])]
        rng = _rng_from_state(resume.get("rng_state"), seed)
    else:
        theta = np.array([initial_params[k] for k in names], dtype=float)
        start = 0
        best_value = None
        best_params = dict(initial_params)
        trace = []
        rng = _rng_from_state(None, seed)

    def as_dict(vec: np.ndarray) -> dict[str, float]:
        return {k: float(v) for k, v in zip(names, vec)}

    if iterations == 0:
        if best_value is None:
            best_value = float(evaluate(as_dict(theta), 0, 0))
            best_params = as_dict(theta)
        return SpsaOutcome(
            best_params=best_params,
            best_value=best_value,
            final_params=as_dict(theta),
            iterations_run=0,
            trace=trace,
        )

    for k in range(start, iterations):
        delta = rng.integers(0, 2, size=len(names)) * 2 - 1
        a_k = a / (k + 1) ** ALPHA
        c_k = c / (k + 1) ** GAMMA
        f_plus = float(evaluate(as_dict(theta + c_k * delta), k, 0))
        f_minus = float(evaluate(as_dict(theta - c_k * delta), k, 1))
        gradient = (f_plus - f_minus) / (2.0 * c_k) * delta
        for value, vec in ((f_plus, theta + c_k * delta), (f_minus, theta - c_k * delta)):
            if best_value is None or value < best_value:
                best_value = value
                best_params = as_dict(vec)
        theta = theta - a_k * gradient
        trace.append([f_plus, f_minus])
        if checkpoint is not None:
            checkpoint(
                {
                    "iteration": k + 1,
                    "params": as_dict(theta),
                    "best_params": best_params,
                    "best_value": best_value,
                    "rng_state": _jsonable_rng_state(rng),
                    "trace": [list(pair) for pair in trace],
                }
            )

    return SpsaOutcome(
        best_params=best_params,
        best_value=float(best_value),
        final_params=as_dict(theta),
        iterations_run=iterations - start,
        trace=trace,
    )


def _jsonable_rng_state(rng: np.random.Generator) -> dict:
    state = rng.bit_generator.state
    # PCG64 state holds plain ints; make the nesting json-safe copies.
    return {
        "bit_generator": state["bit_generator"],
        "state": {k: int(v) for k, v in state["state"].items()},
        "has_uint32": int(state.get("has_uint32", 0)),
        "uinteger": int(state.get("uinteger", 0)),
    }

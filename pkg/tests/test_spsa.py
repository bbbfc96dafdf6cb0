import numpy as np
import pytest

from qruntime.scheduling import evaluation_seed, run_spsa


def quadratic(params, iteration, eval_index):
    return sum((v - 2.0) ** 2 for v in params.values())


class TestSpsaLoop:
    def test_converges_on_quadratic(self):
        outcome = run_spsa({"x": 0.0, "y": 5.0}, iterations=200, a=0.4, c=0.1, evaluate=quadratic, seed=3)
        assert outcome.best_value < 0.05
        assert outcome.final_params["x"] == pytest.approx(2.0, abs=0.2)
        assert outcome.final_params["y"] == pytest.approx(2.0, abs=0.2)

    def test_two_evaluations_per_iteration(self):
        calls = []

        def counting(params, iteration, eval_index):
            calls.append((iteration, eval_index))
            return quadratic(params, iteration, eval_index)

        run_spsa({"x": 0.0}, iterations=10, a=0.2, c=0.1, evaluate=counting, seed=1)
        assert len(calls) == 20
        assert calls == [(k, e) for k in range(10) for e in (0, 1)]

    def test_zero_iterations_single_initial_evaluation(self):
        calls = []

        def counting(params, iteration, eval_index):
            calls.append(dict(params))
            return 42.0

        outcome = run_spsa({"x": 1.5}, iterations=0, a=0.2, c=0.1, evaluate=counting, seed=1)
        assert calls == [{"x": 1.5}]
        assert outcome.best_value == 42.0
        assert outcome.final_params == {"x": 1.5}

    def test_gain_schedule_shrinks(self):
        perturbations = []

        def capture(params, iteration, eval_index):
            perturbations.append(params["x"])
            return 0.0

        run_spsa({"x": 0.0}, iterations=50, a=0.3, c=0.5, evaluate=capture, seed=2)
        # |theta+/-| = c_k since gradient is always 0; c_k = c/(k+1)^0.101
        magnitudes = [abs(v) for v in perturbations[::2]]
        expected = [0.5 / (k + 1) ** 0.101 for k in range(50)]
        assert magnitudes == pytest.approx(expected)

    def test_resume_is_bitwise_identical(self):
        checkpoints = []

        def deterministic(params, iteration, eval_index):
            return (params["x"] - 1.0) ** 2 + 0.001 * iteration

        full = run_spsa({"x": 4.0}, iterations=30, a=0.5, c=0.2, evaluate=deterministic, seed=11,
                        checkpoint=checkpoints.append)
        resume_state = checkpoints[14]  # state persisted after iteration 15
        resumed = run_spsa({"x": 4.0}, iterations=30, a=0.5, c=0.2, evaluate=deterministic, seed=11,
                           resume=resume_state)
        assert resumed.best_value == full.best_value
        assert resumed.best_params == full.best_params
        assert resumed.final_params == full.final_params
        assert resumed.trace == full.trace

    def test_checkpoint_state_is_json_serializable(self):
        import json

        states = []
        run_spsa({"x": 0.0}, iterations=3, a=0.2, c=0.1, evaluate=quadratic, seed=5, checkpoint=states.append)
        for state in states:
            restored = json.loads(json.dumps(state))
            assert restored["iteration"] == state["iteration"]

    def test_evaluation_seed_depends_on_all_inputs(self):
        seeds = {evaluation_seed(9, k, e) for k in range(5) for e in (0, 1)}
        assert len(seeds) == 10
        assert evaluation_seed(9, 3, 1) == evaluation_seed(9, 3, 1)
        assert evaluation_seed(None, 3, 1) is None

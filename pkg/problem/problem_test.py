import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import numpy as np
import pytest
from pydantic import ValidationError

from problem import BoundarySource, HelmholtzProblem, ProblemConfig, SourceParams, eval_g, exact_solution
from utils.errors import ConfigurationError

BETA_ONE = {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0}


def make_problem(kind, omega=1.0, beta=1.0, **params):
    return HelmholtzProblem(
        a_by_tag={1: 1.0},
        c_by_tag={1: 1.0},
        omega=omega,
        beta_by_marker={m: beta for m in BETA_ONE},
        source=BoundarySource(kind=kind, params=SourceParams(**params)),
    )


def test_plane_wave_trace_by_hand():
    problem = make_problem("plane_wave_trace", direction=(0.6, 0.8))
    g = eval_g(problem, [0.0, 0.0], [-1.0, 0.0])
    assert g[0] == pytest.approx(-0.4j, abs=1e-15)


def test_incoming_plane_wave_vanishes_on_right_side():
    problem = make_problem("incoming_plane_wave", kappa=1.0)
    g = eval_g(problem, [[3.0, 0.2]], [[1.0, 0.0]])
    assert g[0] == 0


def test_gaussian_window_on_left_side():
    jx = 10
    problem = make_problem("gaussian_windowed", omega=2.0, beta=-1.0)
    x = np.array([[-jx / 2, 0.0], [jx / 2, 0.0]])
    n = np.array([[-1.0, 0.0], [1.0, 0.0]])
    g = eval_g(problem, x, n)
    assert g[0] == pytest.approx(2j * np.exp(-2j * (-jx / 2)), abs=1e-14)
    assert g[1] == 0


def test_zero_source():
    problem = make_problem("zero")
    assert np.all(eval_g(problem, np.zeros((5, 2)), np.tile([0.0, 1.0], (5, 1))) == 0)


def test_plane_wave_solves_strong_form():
    kappa = 3.0
    problem = make_problem("plane_wave_trace", omega=kappa, direction=(0.6, 0.8))
    u = exact_solution(problem)
    rng = np.random.default_rng(11)
    step = 1e-4
    for x, y in rng.random((100, 2)):
        laplace = (u(x + step, y) + u(x - step, y) + u(x, y + step) + u(x, y - step) - 4 * u(x, y)) / step**2
        assert abs(-laplace - kappa**2 * u(x, y)) <= 1e-6 * kappa**2


def test_eval_g_is_deterministic():
    problem = make_problem("plane_wave_trace", direction=(0.6, 0.8))
    x = np.random.default_rng(0).random((10, 2))
    n = np.tile([0.0, -1.0], (10, 1))
    assert np.array_equal(eval_g(problem, x, n), eval_g(problem, x, n))


def test_invariants_enforced():
    with pytest.raises(ConfigurationError, match="out of scope"):
        HelmholtzProblem({1: 1.0}, {1: 1.0}, 1.0, BETA_ONE, f=1.0)
    with pytest.raises(ConfigurationError, match="sign-definite"):
        HelmholtzProblem({1: 1.0}, {1: 1.0}, 1.0, {1: 1.0, 2: -1.0})
    with pytest.raises(ConfigurationError):
        HelmholtzProblem({1: 0.0}, {1: 1.0}, 1.0, BETA_ONE)
    with pytest.raises(ValidationError):
        SourceParams(direction=(1.0, 1.0))


def test_missing_tag_and_piecewise_lookup():
    problem = HelmholtzProblem({1: 1.0 / 12.1, 2: 1.0}, {1: 1.0, 2: 1.0}, 1.0, {m: -1.0 for m in BETA_ONE})
    np.testing.assert_allclose(problem.a_values(np.array([1, 2, 1])), [1 / 12.1, 1.0, 1 / 12.1])
    with pytest.raises(ConfigurationError, match="material tag"):
        problem.a_values(np.array([3]))


def test_problem_block_from_json():
    config = ProblemConfig.model_validate_json(
        '{"a_by_tag": {"1": 0.0826, "2": 1.0}, "c_by_tag": {"1": 1, "2": 1}, "omega": 1.48,'
        ' "beta_by_marker": {"1": -1, "2": -1, "3": -1, "4": -1},'
        ' "source": {"kind": "gaussian_windowed", "params": {"side": 4}}}'
    )
    problem = HelmholtzProblem.from_config(config)
    assert problem.kappa == pytest.approx(1.48)
    assert problem.a_by_tag[1] == pytest.approx(0.0826)
    with pytest.raises(ValidationError):
        ProblemConfig.model_validate_json('{"omega": 1.0, "unknown": 2}')

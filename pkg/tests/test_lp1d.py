import itertools
import math

import numpy as np
import pytest

from logic.core import kr_tv_primal_objective, path_diameter, tv_value
from logic.diffops import backward_divergence
from logic.grid import GridFunction, VectorField
from logic.lp1d import gtv_lp, krtv_lp, l1tv_lp
from schemas import RegParams


def _l1tv_brute_force(u0: np.ndarray, lambda1: float) -> float:
    # some minimizer takes its values in the data set
    candidates = np.array(list(itertools.product(u0, repeat=u0.size)))
    values = lambda1 * np.abs(candidates - u0).sum(axis=1) + np.abs(np.diff(candidates, axis=1)).sum(axis=1)
    return float(values.min())


@pytest.mark.parametrize("lambda1", [0.3, 0.8, 1.5, 4.0])
def test_l1tv_matches_brute_force(rng, lambda1):
    for _ in range(5):
        u0 = rng.random(5)
        sol = l1tv_lp(GridFunction(u0), lambda1)
        assert sol.objective == pytest.approx(_l1tv_brute_force(u0, lambda1), abs=1e-9)


def test_krtv_objective_matches_evaluator_and_beats_perturbations(rng):
    lam = RegParams(lambda1=2.0, lambda2=0.7)
    u0 = GridFunction(rng.random(16), h=0.25)
    sol = krtv_lp(u0, lam)
    u, nu = u0.with_values(sol.u), VectorField(sol.field[None, :], u0.h)
    best = kr_tv_primal_objective(u, nu, u0, lam)
    assert best == pytest.approx(sol.objective, rel=1e-7, abs=1e-10)
    for _ in range(50):
        du = 0.05 * rng.standard_normal(16)
        dq = 0.05 * rng.standard_normal(16)
        dq[-1] = 0.0
        other = kr_tv_primal_objective(u.with_values(u.values + du), VectorField((sol.field + dq)[None, :], u0.h), u0, lam)
        assert other >= best - 1e-7


def test_lambda1_infinite_conserves_mass_exactly(rng):
    u0 = GridFunction(rng.random(20))
    sol = krtv_lp(u0, RegParams(lambda2=0.5))
    np.testing.assert_allclose(sol.u, u0.values + backward_divergence(sol.field[None, :]), atol=1e-8)
    assert sol.u.sum() == pytest.approx(u0.values.sum(), abs=1e-8)


def test_mass_preserved_in_the_regime(rng):
    for _ in range(10):
        u0 = GridFunction(rng.random(30), h=1.0 / 29)
        lam = RegParams(lambda1=1.0, lambda2=1.0 / path_diameter(u0))
        sol = krtv_lp(u0, lam)
        assert abs(sol.u.mean() - u0.values.mean()) <= 1e-6


def test_maximum_principle(rng):
    for _ in range(10):
        u0 = GridFunction(rng.random(25) * (rng.random(25) > 0.5))
        sol = krtv_lp(u0, RegParams(lambda1=3.0, lambda2=1.0))
        assert sol.u.min() >= -1e-9
        assert np.abs(sol.u).max() <= np.abs(u0.values).max() + 1e-9


def test_lambda2_infinite_is_l1tv(rng):
    u0 = GridFunction(rng.random(12))
    via_krtv = krtv_lp(u0, RegParams(lambda1=0.9))
    direct = l1tv_lp(u0, 0.9)
    assert via_krtv.objective == pytest.approx(direct.objective)
    assert np.all(via_krtv.field == 0)


def test_gtv_constraint_and_objective(rng):
    u0 = GridFunction(rng.random(20), h=0.5)
    sol = gtv_lp(u0, 2.0)
    np.testing.assert_allclose(sol.u - u0.values, backward_divergence(sol.field[None, :], 0.5), atol=1e-12)
    assert sol.u.mean() == pytest.approx(u0.values.mean(), abs=1e-12)
    expected = 2.0 * np.abs(sol.field).max() + tv_value(u0.with_values(sol.u))
    assert sol.objective == pytest.approx(expected, rel=1e-7, abs=1e-9)
    assert sol.objective <= tv_value(u0) + 1e-9


def test_gtv_constant_is_fixed():
    u0 = GridFunction(np.full(8, 0.4))
    sol = gtv_lp(u0, 1.0)
    np.testing.assert_allclose(sol.u, u0.values, atol=1e-9)
    assert sol.objective == pytest.approx(0.0, abs=1e-9)


def test_input_validation():
    with pytest.raises(ValueError):
        krtv_lp(GridFunction(np.zeros((3, 3))), RegParams(lambda1=1.0))
    with pytest.raises(ValueError):
        krtv_lp(GridFunction(np.zeros(3)), RegParams())
    with pytest.raises(ValueError):
        gtv_lp(GridFunction(np.zeros(3)), -1.0)
    assert math.isinf(RegParams().lambda1)

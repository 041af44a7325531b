import math

import numpy as np
import pytest

from logic.core import (
    diameter,
    kr_tv_dual_objective,
    kr_tv_primal_objective,
    mass_preserving_regime,
    path_diameter,
    restore_dual_feasibility,
    solve_neumann_poisson,
    tv_value,
)
from logic.diffops import backward_divergence, forward_gradient
from logic.grid import GridFunction, VectorField
from logic.prox import node_magnitude
from schemas import RegParams


class TestTotalVariation:

    def test_examples(self):
        assert tv_value(GridFunction([0.0, 1.0, 3.0])) == pytest.approx(3.0)
        assert tv_value(GridFunction([[0.0, 1.0], [0.0, 1.0]])) == pytest.approx(2.0)
        assert tv_value(GridFunction([[0.0, 0.0], [0.0, 1.0]])) == pytest.approx(2.0)

    def test_constant_has_zero_variation(self):
        assert tv_value(GridFunction(np.full((6, 6), 4.2))) == 0.0

    def test_homogeneous_and_shift_invariant(self, rng):
        u = GridFunction(rng.standard_normal((8, 8)))
        assert tv_value(u.with_values(-2.5 * u.values)) == pytest.approx(2.5 * tv_value(u))
        assert tv_value(u.with_values(u.values + 7.0)) == pytest.approx(tv_value(u))

    def test_spacing_scaling(self, rng):
        v = rng.standard_normal((8, 8))
        assert tv_value(GridFunction(v, h=0.5)) == pytest.approx(0.5 * tv_value(GridFunction(v)))
        s = rng.standard_normal(20)
        assert tv_value(GridFunction(s, h=0.1)) == pytest.approx(tv_value(GridFunction(s)))

    def test_matches_direct_summation(self, rng):
        v = rng.standard_normal((8, 8))
        total = 0.0
        for i in range(8):
            for j in range(8):
                di = v[i + 1, j] - v[i, j] if i < 7 else 0.0
                dj = v[i, j + 1] - v[i, j] if j < 7 else 0.0
                total += math.hypot(di, dj)
        assert tv_value(GridFunction(v)) == pytest.approx(total)


class TestPrimalObjective:

    def test_identity_costs_only_variation(self, rng):
        u0 = GridFunction(rng.random((5, 5)))
        value = kr_tv_primal_objective(u0, VectorField.zeros(u0.dims), u0, RegParams(lambda1=2.0, lambda2=1.0))
        assert value == pytest.approx(tv_value(u0))

    def test_constant_offset_costs_lambda1_times_area(self):
        u0 = GridFunction(np.arange(6.0), h=0.5)
        u = u0.with_values(u0.values + 0.2)
        value = kr_tv_primal_objective(u, VectorField.zeros(u0.dims, h=0.5), u0, RegParams(lambda1=3.0, lambda2=1.0))
        assert value == pytest.approx(3.0 * 0.2 * 6 * 0.5 + tv_value(u0))

    def test_flux_cost(self):
        u0 = GridFunction([1.0, 0.0])
        nu = VectorField([[1.0, 0.0]])
        # moving the unit mass one node to the right
        u = GridFunction([0.0, 1.0])
        value = kr_tv_primal_objective(u, VectorField([[-1.0, 0.0]]), u0, RegParams(lambda1=5.0, lambda2=0.5))
        assert value == pytest.approx(0.5 * 1.0 + 1.0)
        assert kr_tv_primal_objective(u0, nu, u0, RegParams(lambda1=5.0, lambda2=0.5)) == pytest.approx(5.0 * 2 + 0.5 + 1.0)

    def test_infinite_weights_are_constraints(self):
        u0 = GridFunction([0.0, 1.0, 0.0])
        zero = VectorField.zeros(u0.dims)
        shifted = u0.with_values(u0.values + 1.0)
        assert kr_tv_primal_objective(shifted, zero, u0, RegParams(lambda2=1.0)) == math.inf
        assert kr_tv_primal_objective(u0, VectorField([[0.1, 0.0, 0.0]]), u0, RegParams(lambda1=1.0)) == math.inf
        assert kr_tv_primal_objective(u0, zero, u0, RegParams()) == pytest.approx(2.0)


class TestDualObjective:

    def test_zero_is_feasible(self, rng):
        u0 = GridFunction(rng.random((4, 4)))
        d = kr_tv_dual_objective(u0.with_values(np.zeros((4, 4))), u0, RegParams(lambda1=1.0, lambda2=1.0))
        assert d.feasible and d.value == 0.0

    def test_constant_is_not_a_divergence(self, rng):
        u0 = GridFunction(rng.random((4, 4)), h=0.5)
        f = u0.with_values(np.full((4, 4), 1.0))
        d = kr_tv_dual_objective(f, u0, RegParams(lambda1=1.0))
        assert not d.feasible and d.value == -math.inf
        assert d.pairing == pytest.approx(-u0.values.sum() * 0.25)

    def test_box_violation_reported(self):
        u0 = GridFunction([0.0, 0.0, 0.0])
        f = GridFunction([2.0, -2.0, 0.0])
        d = kr_tv_dual_objective(f, u0, RegParams(lambda1=1.0))
        assert not d.feasible
        assert d.violation >= 1.0

    def test_weak_duality(self, rng):
        lam = RegParams(lambda1=1.5, lambda2=0.7)
        for _ in range(20):
            u0 = GridFunction(rng.standard_normal((6, 6)))
            f, phi = restore_dual_feasibility(rng.standard_normal((6, 6)) * 3, rng.standard_normal((2, 6, 6)),
                                              1.0, lam.lambda1, lam.lambda2)
            d = kr_tv_dual_objective(GridFunction(f), u0, lam, VectorField(phi))
            assert d.feasible
            u = GridFunction(rng.standard_normal((6, 6)))
            nu = VectorField(rng.standard_normal((2, 6, 6)))
            assert d.value <= kr_tv_primal_objective(u, nu, u0, lam) + 1e-9


class TestGeometry:

    def test_diameters(self):
        assert diameter((3, 5)) == pytest.approx(math.sqrt(20))
        assert path_diameter((3, 5)) == pytest.approx(6.0)
        assert path_diameter(GridFunction(np.zeros(11), h=0.1)) == pytest.approx(1.0)
        assert diameter(GridFunction(np.zeros(1))) == 0.0

    def test_mass_preserving_regime(self):
        assert mass_preserving_regime(RegParams(lambda1=2.0, lambda2=0.25), (8, 8))
        assert not mass_preserving_regime(RegParams(lambda1=1.0, lambda2=1.0), (8, 8))
        assert mass_preserving_regime(RegParams(lambda2=5.0), (8, 8))
        assert not mass_preserving_regime(RegParams(lambda1=5.0), (8, 8))


class TestPoissonAndRestoration:

    @pytest.mark.parametrize("shape", [(17,), (6, 9)])
    def test_neumann_poisson_inverts_div_grad(self, rng, shape):
        rhs = rng.standard_normal(shape)
        w = solve_neumann_poisson(rhs, 0.5)
        lap = backward_divergence(forward_gradient(w, 0.5), 0.5)
        np.testing.assert_allclose(lap, rhs - rhs.mean(), atol=1e-10)
        assert abs(w.mean()) <= 1e-12

    def test_restoration_meets_every_bound(self, rng):
        for _ in range(10):
            f, phi = restore_dual_feasibility(rng.standard_normal((7, 5)) * 5, rng.standard_normal((2, 7, 5)) * 2,
                                              0.5, lambda1=1.0, lambda2=2.0)
            np.testing.assert_allclose(f, backward_divergence(phi, 0.5), atol=1e-10)
            assert np.abs(f).max() <= 1.0 + 1e-12
            assert node_magnitude(forward_gradient(f, 0.5)).max() <= 2.0 + 1e-12
            assert node_magnitude(phi).max() <= 1.0 + 1e-12

    def test_restoration_with_gradient_sum_bound(self, rng):
        f, _ = restore_dual_feasibility(rng.standard_normal(12), rng.standard_normal((1, 12)), 1.0, grad_sum_bound=0.3)
        assert node_magnitude(forward_gradient(f)).sum() <= 0.3 + 1e-12

import numpy as np
import pytest

from logic.errors import AdjointCheckError, SolverDivergedError
from logic.grid import GridFunction
from logic.saddle import LinearOperator, check_adjoint, default_steps, solve
from logic.variational import cascade_operator, flux_operator, krtv_denoise, stacked_operator
from schemas import RegParams, SolverConfig

ZERO = LinearOperator(apply=lambda x: (np.zeros_like(x[0]),), adjoint=lambda y: (np.zeros_like(y[0]),), norm_bound=0.0)


def keep(y, step):
    return y


def test_zero_operator_reduces_to_one_prox_step():
    a = np.array([1.0, -2.0, 3.0])

    def prox_quadratic(x, tau):
        # prox of 1/2 |x - a|^2
        return ((x[0] + tau * a) / (1.0 + tau),)

    cfg = SolverConfig(max_iters=1, tau=1e12, sigma=1.0, alpha=0.0)
    state = solve(ZERO, prox_quadratic, keep, (np.zeros(3),), (np.zeros(3),), cfg)
    np.testing.assert_allclose(state.x[0], a, rtol=1e-9)
    assert state.iterations == 1


def test_adjoint_mismatch_is_rejected():
    broken = LinearOperator(apply=lambda x: (x[0],), adjoint=lambda y: (2.0 * y[0],), norm_bound=2.0)
    with pytest.raises(AdjointCheckError):
        check_adjoint(broken, (np.zeros(4),), (np.zeros(4),))
    with pytest.raises(AdjointCheckError):
        solve(broken, keep, keep, (np.zeros(4),), (np.zeros(4),), SolverConfig(max_iters=3))


def test_model_operators_are_adjoint():
    cases = [
        (cascade_operator((7, 5), 0.5), (np.zeros((7, 5)), np.zeros((2, 7, 5))), (np.zeros((7, 5)), np.zeros((2, 7, 5)))),
        (stacked_operator((12,), 0.5), (np.zeros(12),), (np.zeros(12), np.zeros((1, 12)))),
        (flux_operator((6, 6), 0.5), (np.zeros((2, 6, 6)),), (np.zeros((6, 6)),)),
    ]
    for K, x0, y0 in cases:
        assert check_adjoint(K, x0, y0) <= 1e-10


def test_step_sizes_must_satisfy_the_bound():
    K = cascade_operator((4, 4), 1.0)
    with pytest.raises(ValueError):
        default_steps(K, SolverConfig(tau=1.0, sigma=1.0))
    tau, sigma = default_steps(K, SolverConfig())
    assert tau * sigma * K.norm_bound ** 2 < 1.0


def test_non_finite_iterate_is_reported_with_its_block():
    def poison(x, tau):
        return (np.full_like(x[0], np.nan),)

    cfg = SolverConfig(max_iters=100, check_every=5, alpha=0.0)
    with pytest.raises(SolverDivergedError) as excinfo:
        solve(ZERO, poison, keep, (np.zeros(3),), (np.zeros(3),), cfg)
    assert excinfo.value.block == "x[0]"
    assert excinfo.value.iteration == 5


def test_gap_history_is_recorded_and_best_gap_nonincreasing(rng):
    u0 = GridFunction(rng.random((8, 8)))
    res = krtv_denoise(u0, RegParams(lambda1=1.0, lambda2=0.5), SolverConfig(gap_tol=1e-6, check_every=10))
    history = res.state.gap_history
    assert history and history[-1].iteration == res.state.iterations
    best = [r.best_gap for r in history]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert all(r.gap >= -1e-9 * (1 + abs(r.primal)) for r in history)


def test_callback_sees_every_checkpoint():
    K = stacked_operator((5,), 1.0)
    a0 = np.array([0.0, 1.0, 0.0, 1.0, 0.0])
    seen = []

    def prox_fstar(y, sigma):
        return np.clip(y[0] - sigma * a0, -1, 1), np.clip(y[1], -1, 1)

    def gap_fn(x, y):
        return 1.0, 0.0

    cfg = SolverConfig(max_iters=40, check_every=10)
    state = solve(K, keep, prox_fstar, (a0.copy(),), (np.zeros((5,)), np.zeros((1, 5))), cfg,
                  gap_fn=gap_fn, callback=seen.append)
    assert [r.iteration for r in seen] == [10, 20, 30, 40]
    assert not state.converged


def test_krtv_gap_closes_on_random_image(rng):
    u0 = GridFunction(rng.random((8, 8)))
    res = krtv_denoise(u0, RegParams(lambda1=1.0, lambda2=0.5), SolverConfig(gap_tol=1e-5, max_iters=50000))
    assert res.report.converged
    assert res.report.relative_gap <= 1e-4


def test_runs_are_deterministic(rng):
    u0 = GridFunction(rng.random((6, 6)))
    cfg = SolverConfig(max_iters=300, check_every=50)
    first = krtv_denoise(u0, RegParams(lambda1=1.0, lambda2=0.5), cfg)
    second = krtv_denoise(u0, RegParams(lambda1=1.0, lambda2=0.5), cfg)
    assert np.array_equal(first.u.values, second.u.values)
    assert np.array_equal(first.nu.components, second.nu.components)


@pytest.mark.parametrize("alpha", [0.0, 0.3])
def test_inertia_setting_reaches_same_objective(rng, alpha):
    u0 = GridFunction(rng.random(10))
    res = krtv_denoise(u0, RegParams(lambda1=2.0, lambda2=1.0), SolverConfig(alpha=alpha, gap_tol=1e-8, max_iters=100000))
    exact = krtv_denoise(u0, RegParams(lambda1=2.0, lambda2=1.0), solver="lp")
    assert res.report.primal == pytest.approx(exact.report.objective, rel=1e-6, abs=1e-8)

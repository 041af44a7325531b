"""Quick invariant suite behind `cli.py selftest`."""
import time
from typing import Callable, List, NamedTuple

import numpy as np

from logger import get_logger
from logic.core import mass_preserving_regime
from logic.diffops import backward_divergence, forward_gradient
from logic.grid import DiscreteMeasure, GridFunction
from logic.krnorm_oracle import kr_norm_exact
from logic.phantoms import count_plateau_levels, count_jumps, disk_on_gradient, ramp_signal
from logic.variational import krtv_denoise, l1tv_denoise
from schemas import RegParams, SolverConfig

logger = get_logger()

TIGHT = SolverConfig(gap_tol=1e-8, max_iters=100000, check_every=25)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    duration_ms: float


CHECKS: List[Callable[[], str]] = []


def check(fn: Callable[[], str]) -> Callable[[], str]:
    CHECKS.append(fn)
    return fn


@check
def adjointness() -> str:
    rng = np.random.default_rng(0)
    worst = 0.0
    for shape in [(17,), (64,), (8, 8), (33, 20), (64, 64)]:
        for h in (1.0, 0.5):
            u = rng.standard_normal(shape)
            p = rng.standard_normal((len(shape),) + shape)
            lhs = np.vdot(forward_gradient(u, h), p)
            rhs = -np.vdot(u, backward_divergence(p, h))
            worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(u) * np.linalg.norm(p)))
    assert worst <= 1e-12 * 64, f"adjoint mismatch {worst:.3e}"
    return f"max relative mismatch {worst:.2e}"


@check
def oracle_lemma_estimates() -> str:
    lam = RegParams(lambda1=10.0, lambda2=1.0)
    dipole = kr_norm_exact(DiscreteMeasure([0.0, 1.0], [1.0, -1.0]), lam)
    assert abs(dipole.value - 1.0) <= 1e-6, f"dipole value {dipole.value}"
    positive = kr_norm_exact(DiscreteMeasure([0.0, 0.3, 0.9], [0.5, 1.0, 2.0]), lam)
    assert abs(positive.value - 35.0) <= 1e-6 * 35.0, f"nonnegative value {positive.value}"
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        mu = DiscreteMeasure(rng.random((6, 2)), rng.standard_normal(6))
        res = kr_norm_exact(mu, lam)
        assert res.certificate.certified, f"uncertified gap {res.certificate.gap:.3e}"
        worst = max(worst, abs(res.certificate.gap))
    return f"dipole {dipole.value:.6f}, worst certificate gap {worst:.2e}"


@check
def mass_preservation() -> str:
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(3):
        u0 = GridFunction(rng.random((8, 8)))
        lam = RegParams(lambda1=2.0, lambda2=0.25)
        assert mass_preserving_regime(lam, u0)
        res = krtv_denoise(u0, lam, TIGHT)
        worst = max(worst, abs(res.report.mass_difference))
    assert worst <= 1e-5, f"mean drift {worst:.3e}"
    return f"max mean drift {worst:.2e}"


@check
def maximum_principle() -> str:
    u0 = disk_on_gradient(12, density=0.1, seed=3).noisy
    res = krtv_denoise(u0, RegParams(lambda1=1.0, lambda2=0.5), TIGHT)
    low = float(res.u.values.min())
    high = float(np.abs(res.u.values).max())
    bound = float(np.abs(u0.values).max())
    assert low >= -1e-4, f"min(u) = {low:.3e}"
    assert high <= bound + 1e-4, f"max|u| = {high:.6f} > {bound:.6f}"
    return f"min {low:.2e}, max {high:.4f}"


@check
def l1tv_reduction() -> str:
    u0 = GridFunction(np.random.default_rng(4).random(24), h=1.0)
    exact = l1tv_denoise(u0, 0.8, method="lp")
    cascade = krtv_denoise(u0, RegParams(lambda1=0.8), solver="lp")
    direct = l1tv_denoise(u0, 0.8, TIGHT, method="direct")
    for label, other in (("cascade", cascade.u), ("direct", direct.u)):
        rel = float(np.abs(other.values - exact.u.values).sum() / np.abs(exact.u.values).sum())
        assert rel <= 1e-3, f"{label} differs by {rel:.3e}"
    return "lp, cascade and direct agree"


@check
def ramp_pure_jump() -> str:
    u0 = ramp_signal()
    hits = []
    for lambda2 in np.geomspace(1.8, 2.6, 9):
        u = krtv_denoise(u0, RegParams(lambda1=100.0, lambda2=float(lambda2)), solver="lp").u
        if count_plateau_levels(u.values) == 2 and count_jumps(u.values, 0.05) == 1:
            hits.append(round(float(lambda2), 4))
    assert hits, "no two-level solution in the ramp sweep"
    return f"pure jump at lambda2 in {hits}"


@check
def gap_closure() -> str:
    u0 = GridFunction(np.random.default_rng(5).random((8, 8)))
    res = krtv_denoise(u0, RegParams(lambda1=1.0, lambda2=0.5), SolverConfig(gap_tol=1e-5, max_iters=50000))
    assert res.report.converged and res.report.relative_gap <= 1e-4, f"relative gap {res.report.relative_gap:.3e}"
    return f"relative gap {res.report.relative_gap:.2e} after {res.report.iterations} iterations"


def run_selftest() -> List[CheckResult]:
    results = []
    for fn in CHECKS:
        start = time.perf_counter()
        try:
            detail, passed = fn(), True
        except AssertionError as e:
            detail, passed = str(e), False
        duration = (time.perf_counter() - start) * 1000
        results.append(CheckResult(fn.__name__, passed, detail, duration))
        logger.log_app_event("selftest_check", {"check": fn.__name__, "passed": passed, "detail": detail})
    return results


def all_passed(results: List[CheckResult]) -> bool:
    return all(r.passed for r in results)

"""KR-TV, L1-TV and G-TV problems assembled on the primal-dual solver.

The solvers work on plain sums over grid nodes; every reported objective is
converted to physical units by the factor h**d.
"""
import math
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np

from logger import get_logger
from logic import lp1d
from logic.core import path_diameter, restore_dual_feasibility, tv_value
from logic.diffops import (
    backward_divergence,
    cascade_adjoint,
    cascade_apply,
    flux_norm_bound,
    forward_gradient,
    op_norm_bound,
    stacked_norm_bound,
)
from logic.errors import BracketError
from logic.grid import GridFunction, SaddleState, VectorField
from logic.prox import ball_array, clip_array, max_norm_prox_array, node_magnitude, shrink_array
from logic.saddle import LinearOperator, solve
from schemas import DecompositionReport, RegParams, SolveReport, SolverConfig

logger = get_logger()

MODELS = ("krtv", "l1tv", "gtv")


class KrtvResult(NamedTuple):
    u: GridFunction
    nu: VectorField
    report: SolveReport
    state: Optional[SaddleState]


class L1tvResult(NamedTuple):
    u: GridFunction
    report: SolveReport
    state: Optional[SaddleState]


class GtvResult(NamedTuple):
    u: GridFunction
    g: VectorField
    report: SolveReport
    state: Optional[SaddleState]


class Decomposition(NamedTuple):
    cartoon: GridFunction
    texture: GridFunction
    report: DecompositionReport


class TvMatch(NamedTuple):
    parameter: float
    tv: float
    matched: bool
    # (parameter, TV of the cartoon) in evaluation order
    trace: List[Tuple[float, float]]


def cascade_operator(dims: Tuple[int, ...], h: float) -> LinearOperator:
    """(u, q) -> (u - div q, grad u)."""
    return LinearOperator(
        apply=lambda x: cascade_apply(x[0], x[1], h),
        adjoint=lambda y: cascade_adjoint(y[0], y[1], h),
        norm_bound=op_norm_bound(dims, h),
    )


def stacked_operator(dims: Tuple[int, ...], h: float) -> LinearOperator:
    """u -> (u, grad u)."""
    return LinearOperator(
        apply=lambda x: (x[0], forward_gradient(x[0], h)),
        adjoint=lambda y: (y[0] - backward_divergence(y[1], h),),
        norm_bound=stacked_norm_bound(dims, h),
    )


def flux_operator(dims: Tuple[int, ...], h: float) -> LinearOperator:
    """q -> -div q."""
    return LinearOperator(
        apply=lambda x: (-backward_divergence(x[0], h),),
        adjoint=lambda y: (forward_gradient(y[0], h),),
        norm_bound=flux_norm_bound(dims, h),
    )


def _plain_tv(a: np.ndarray, h: float) -> float:
    return float(node_magnitude(forward_gradient(a, h)).sum())


def _report(method: str, u0: GridFunction, u: np.ndarray, state: Optional[SaddleState],
            primal: float, dual: float, residual: Optional[float] = None,
            converged: Optional[bool] = None) -> SolveReport:
    vol = u0.cell_volume
    gap = primal - dual
    if converged is None:
        converged = state.converged if state is not None else True
    return SolveReport(
        method=method,
        iterations=state.iterations if state is not None else 0,
        converged=converged,
        primal=primal,
        dual=dual,
        gap=gap,
        relative_gap=gap / (1.0 + abs(primal)),
        objective=primal,
        mass_in=u0.integral(),
        mass_out=float(u.sum() * vol),
        mass_difference=float(u.mean() - u0.values.mean()),
        tau=state.tau if state is not None else None,
        sigma=state.sigma if state is not None else None,
        residual=residual,
    )


def _final_gap(state: SaddleState) -> Tuple[float, float]:
    record = state.last_gap
    return record.primal, record.dual


def effective_lambda1(lam: RegParams, u0: GridFunction) -> float:
    """lambda1 = inf is replaced by lambda2 * path diameter, which leaves the dual feasible set unchanged."""
    if lam.lambda1_finite:
        return lam.lambda1
    return lam.lambda2 * max(path_diameter(u0), u0.h)


def krtv_denoise(
    u0: GridFunction,
    lam: RegParams,
    cfg: Optional[SolverConfig] = None,
    solver: str = "pd",
) -> KrtvResult:
    """Minimizer of |u - u0|_KR + TV(u) with the cascading field nu."""
    if not (lam.lambda1_finite or lam.lambda2_finite):
        raise ValueError("KR-TV needs at least one finite weight; both lambda1 and lambda2 are infinite")
    if solver == "lp":
        sol = lp1d.krtv_lp(u0, lam)
        report = _report("krtv-lp", u0, sol.u, None, sol.objective, sol.objective)
        return KrtvResult(u0.with_values(sol.u), VectorField(sol.field[None, :], u0.h), report, None)
    if solver != "pd":
        raise ValueError(f"unknown solver {solver!r}")

    cfg = cfg or SolverConfig()
    h, vol, a0 = u0.h, u0.cell_volume, u0.values
    lambda1 = effective_lambda1(lam, u0)
    lambda2 = lam.lambda2

    def prox_g(x, tau):
        return x[0], shrink_array(x[1], tau * lambda2)

    def prox_fstar(y, sigma):
        return clip_array(y[0] - sigma * a0, lambda1), ball_array(y[1], 1.0)

    def gap_fn(x, y):
        u, q = x
        residual = u - a0 - backward_divergence(q, h)
        primal = lambda1 * float(np.abs(residual).sum()) + _plain_tv(u, h)
        if math.isfinite(lambda2):
            primal += lambda2 * float(node_magnitude(q).sum())
        f, _ = restore_dual_feasibility(y[0], y[1], h, lambda1=lambda1, lambda2=lambda2)
        dual = -float(np.sum(f * a0))
        return primal * vol, dual * vol

    x0 = (a0.copy(), np.zeros((u0.ndim,) + u0.dims))
    y0 = (np.zeros(u0.dims), np.zeros((u0.ndim,) + u0.dims))
    state = solve(cascade_operator(u0.dims, h), prox_g, prox_fstar, x0, y0, cfg, gap_fn=gap_fn, label="krtv")
    primal, dual = _final_gap(state)
    report = _report("krtv-pd", u0, state.u, state, primal, dual)
    return KrtvResult(u0.with_values(state.u), VectorField(state.q, h), report, state)


def l1tv_denoise(
    u0: GridFunction,
    lambda1: float,
    cfg: Optional[SolverConfig] = None,
    method: str = "direct",
) -> L1tvResult:
    """Minimizer of lambda1 |u - u0|_1 + TV(u).

    method: "direct" (two-block problem in u alone), "cascade" (KR-TV with
    lambda2 = inf) or "lp" (exact, 1D only).
    """
    if not (lambda1 > 0 and math.isfinite(lambda1)):
        raise ValueError(f"lambda1 must be positive and finite, got {lambda1}")
    if method == "cascade":
        res = krtv_denoise(u0, RegParams(lambda1=lambda1), cfg)
        return L1tvResult(res.u, res.report.model_copy(update={"method": "l1tv-cascade"}), res.state)
    if method == "lp":
        sol = lp1d.l1tv_lp(u0, lambda1)
        return L1tvResult(u0.with_values(sol.u), _report("l1tv-lp", u0, sol.u, None, sol.objective, sol.objective), None)
    if method != "direct":
        raise ValueError(f"unknown L1-TV method {method!r}")

    cfg = cfg or SolverConfig()
    h, vol, a0 = u0.h, u0.cell_volume, u0.values

    def prox_g(x, tau):
        return x

    def prox_fstar(y, sigma):
        return clip_array(y[0] - sigma * a0, lambda1), ball_array(y[1], 1.0)

    def gap_fn(x, y):
        u = x[0]
        primal = lambda1 * float(np.abs(u - a0).sum()) + _plain_tv(u, h)
        f, _ = restore_dual_feasibility(y[0], y[1], h, lambda1=lambda1)
        return primal * vol, -float(np.sum(f * a0)) * vol

    x0 = (a0.copy(),)
    y0 = (np.zeros(u0.dims), np.zeros((u0.ndim,) + u0.dims))
    state = solve(stacked_operator(u0.dims, h), prox_g, prox_fstar, x0, y0, cfg, gap_fn=gap_fn, label="l1tv")
    primal, dual = _final_gap(state)
    return L1tvResult(u0.with_values(state.u), _report("l1tv-direct", u0, state.u, state, primal, dual), state)


def gtv_decompose(
    u0: GridFunction,
    lam: float,
    cfg: Optional[SolverConfig] = None,
    solver: str = "pd",
) -> GtvResult:
    """Minimizer of lam * max|g| + TV(u) subject to div g = u - u0.

    The returned u is u0 + div g, so the constraint holds exactly; the report's
    residual measures how far the solver's own u iterate was from it.
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be positive and finite, got {lam}")
    if solver == "lp":
        sol = lp1d.gtv_lp(u0, lam)
        report = _report("gtv-lp", u0, sol.u, None, sol.objective, sol.objective, residual=0.0)
        return GtvResult(u0.with_values(sol.u), VectorField(sol.field[None, :], u0.h), report, None)
    if solver != "pd":
        raise ValueError(f"unknown solver {solver!r}")

    cfg = cfg or SolverConfig()
    h, vol, a0 = u0.h, u0.cell_volume, u0.values
    # lam * max|g| in plain-sum units
    weight = lam / vol

    def prox_g(x, tau):
        return x[0], max_norm_prox_array(x[1], tau * weight)

    def prox_fstar(y, sigma):
        return y[0] - sigma * a0, ball_array(y[1], 1.0)

    def gap_fn(x, y):
        g = x[1]
        u_exact = a0 + backward_divergence(g, h)
        primal = weight * float(node_magnitude(g).max()) + _plain_tv(u_exact, h)
        p, _ = restore_dual_feasibility(y[0], y[1], h, grad_sum_bound=weight)
        return primal * vol, -float(np.sum(p * a0)) * vol

    x0 = (a0.copy(), np.zeros((u0.ndim,) + u0.dims))
    y0 = (np.zeros(u0.dims), np.zeros((u0.ndim,) + u0.dims))
    state = solve(cascade_operator(u0.dims, h), prox_g, prox_fstar, x0, y0, cfg, gap_fn=gap_fn, label="gtv")

    g = state.q
    u_exact = a0 + backward_divergence(g, h)
    residual = float(np.abs(backward_divergence(g, h) - (state.u - a0)).sum()) * vol
    within = residual <= cfg.residual_tol * (1.0 + u0.l1_norm())
    if not within:
        logger.log_app_event("gtv_residual_flagged", {"residual": residual, "iterations": state.iterations})
    primal, dual = _final_gap(state)
    report = _report("gtv-pd", u0, u_exact, state, primal, dual, residual=residual,
                     converged=state.converged and within)
    return GtvResult(u0.with_values(u_exact), VectorField(g, h), report, state)


def _regparams(model: str, params: Union[RegParams, float]) -> RegParams:
    if isinstance(params, RegParams):
        return params
    if model == "krtv":
        raise ValueError("the krtv model needs RegParams(lambda1, lambda2)")
    return RegParams(lambda1=params)


def _cartoon(u0: GridFunction, model: str, params: Union[RegParams, float],
             cfg: Optional[SolverConfig], solver: str) -> Tuple[GridFunction, SolveReport]:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}, expected one of {MODELS}")
    lam = _regparams(model, params)
    if model == "krtv":
        res = krtv_denoise(u0, lam, cfg, solver=solver)
    elif model == "l1tv":
        res = l1tv_denoise(u0, lam.lambda1, cfg, method="lp" if solver == "lp" else "direct")
    else:
        res = gtv_decompose(u0, lam.lambda1, cfg, solver=solver)
    return res.u, res.report


def cartoon_texture(
    u0: GridFunction,
    model: str,
    params: Union[RegParams, float],
    cfg: Optional[SolverConfig] = None,
    solver: str = "pd",
) -> Decomposition:
    """cartoon = model minimizer, texture = u0 - cartoon.

    For "l1tv" and "gtv" params is the scalar weight (or RegParams whose
    lambda1 carries it).
    """
    cartoon, solve_report = _cartoon(u0, model, params, cfg, solver)
    texture = u0.with_values(u0.values - cartoon.values)
    shown = params.as_dict() if isinstance(params, RegParams) else {"lambda": float(params)}
    report = DecompositionReport(
        model=model,
        params=shown,
        tv_cartoon=tv_value(cartoon),
        texture_l1=texture.l1_norm(),
        solve=solve_report,
    )
    return Decomposition(cartoon, texture, report)


def match_tv_parameter(
    u0: GridFunction,
    model: str,
    target_tv: float,
    bracket: Tuple[float, float],
    cfg: Optional[SolverConfig] = None,
    fixed_lambda1: Optional[float] = None,
    rel_tol: float = 0.01,
    max_steps: int = 40,
    solver: str = "pd",
) -> TvMatch:
    """Geometric bisection on the model's scalar weight until TV(cartoon) hits target_tv.

    The weight is lambda1 for l1tv, lambda for gtv and lambda2 for krtv (with
    lambda1 = fixed_lambda1, infinite if not given). TV of the cartoon grows
    with the weight. When the TV curve jumps over the target the bracket
    collapses and the closest sample is returned with matched=False.
    """
    lo, hi = sorted(float(b) for b in bracket)
    if not (lo > 0 and math.isfinite(hi)):
        raise ValueError(f"bracket must be positive and finite, got {bracket}")
    trace: List[Tuple[float, float]] = []

    def make_params(value: float) -> Union[RegParams, float]:
        if model == "krtv":
            return RegParams(lambda1=fixed_lambda1, lambda2=value)
        return value

    def evaluate(value: float) -> float:
        cartoon, _ = _cartoon(u0, model, make_params(value), cfg, solver)
        tv = tv_value(cartoon)
        trace.append((value, tv))
        return tv

    tolerance = rel_tol * max(abs(target_tv), 1e-12)

    def done(tv: float) -> bool:
        return abs(tv - target_tv) <= tolerance

    tv_lo, tv_hi = evaluate(lo), evaluate(hi)
    for value, tv in ((lo, tv_lo), (hi, tv_hi)):
        if done(tv):
            return TvMatch(value, tv, True, trace)
    if not min(tv_lo, tv_hi) <= target_tv <= max(tv_lo, tv_hi):
        raise BracketError(f"target TV {target_tv} is outside [{min(tv_lo, tv_hi)}, {max(tv_lo, tv_hi)}] on {bracket}", trace)
    increasing = tv_hi >= tv_lo

    for _ in range(max_steps):
        mid = math.sqrt(lo * hi)
        tv_mid = evaluate(mid)
        if done(tv_mid):
            return TvMatch(mid, tv_mid, True, trace)
        if (tv_mid < target_tv) == increasing:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-9:
            break
    value, tv = min(trace, key=lambda s: abs(s[1] - target_tv))
    logger.log_app_event("tv_match_unresolved", {"model": model, "target": target_tv, "closest": [value, tv]})
    return TvMatch(value, tv, False, trace)



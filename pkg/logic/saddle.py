"""Inertial primal-dual iteration for min_x max_y G(x) + <Kx, y> - F*(y).

One step, with xi/eta the inertial points:

    xi    = x + alpha (x - x_prev),    eta = y + alpha (y - y_prev)
    x+    = prox_{tau G}(xi - tau K^T eta)
    xbar  = x+ + theta (x+ - xi)
    y+    = prox_{sigma F*}(eta + sigma K xbar)

alpha = 0, theta = 1 is the classic scheme. Blocks are tuples of arrays.
"""
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from logger import get_logger
from logic.errors import AdjointCheckError, SolverDivergedError
from logic.grid import GapRecord, SaddleState
from schemas import SolverConfig

logger = get_logger()

ADJOINT_TOL = 1e-10

Block = Tuple[np.ndarray, ...]
ProxMap = Callable[[Block, float], Block]
GapFunction = Callable[[Block, Block], Tuple[float, float]]


@dataclass(frozen=True)
class LinearOperator:
    apply: Callable[[Block], Block]
    adjoint: Callable[[Block], Block]
    norm_bound: float


def _inner(a: Block, b: Block) -> float:
    return float(sum(np.vdot(p, q) for p, q in zip(a, b)))


def _norm(a: Block) -> float:
    return math.sqrt(_inner(a, a))


def _axpy(a: Block, t: float, b: Block) -> Block:
    return tuple(p + t * q for p, q in zip(a, b))


def _inertial(x: Block, x_prev: Block, alpha: float) -> Block:
    if alpha == 0:
        return x
    return tuple(p + alpha * (p - q) for p, q in zip(x, x_prev))


def check_adjoint(K: LinearOperator, x0: Block, y0: Block, seed: int = 0) -> float:
    """Compares <Kx, y> with <x, K^T y> on random probes; returns the relative mismatch."""
    rng = np.random.default_rng(seed)
    x = tuple(rng.standard_normal(np.shape(b)) for b in x0)
    y = tuple(rng.standard_normal(np.shape(b)) for b in y0)
    lhs = _inner(K.apply(x), y)
    rhs = _inner(x, K.adjoint(y))
    mismatch = abs(lhs - rhs) / max(1.0, _norm(x) * _norm(y) * max(K.norm_bound, 1.0))
    if mismatch > ADJOINT_TOL:
        raise AdjointCheckError(f"operator pair is not adjoint: <Kx,y>={lhs!r}, <x,K*y>={rhs!r}")
    return mismatch


def default_steps(K: LinearOperator, cfg: SolverConfig) -> Tuple[float, float]:
    fallback = 0.99 / K.norm_bound if K.norm_bound > 0 else 1.0
    tau = cfg.tau if cfg.tau is not None else fallback
    sigma = cfg.sigma if cfg.sigma is not None else fallback
    if tau * sigma * K.norm_bound ** 2 >= 1.0:
        raise ValueError(f"step sizes violate tau*sigma*|K|^2 < 1 (tau={tau}, sigma={sigma}, |K|<={K.norm_bound})")
    return tau, sigma


def _first_non_finite(blocks: Block) -> Optional[int]:
    for i, b in enumerate(blocks):
        if not np.all(np.isfinite(b)):
            return i
    return None


def solve(
    K: LinearOperator,
    prox_g: ProxMap,
    prox_fstar: ProxMap,
    x0: Block,
    y0: Block,
    cfg: SolverConfig,
    gap_fn: Optional[GapFunction] = None,
    callback: Optional[Callable[[GapRecord], None]] = None,
    label: str = "saddle",
) -> SaddleState:
    if cfg.adjoint_check:
        check_adjoint(K, x0, y0)
    tau, sigma = default_steps(K, cfg)
    alpha, theta = cfg.alpha, cfg.theta

    x = tuple(np.array(b, dtype=float) for b in x0)
    y = tuple(np.array(b, dtype=float) for b in y0)
    state = SaddleState(x=x, y=y, x_prev=x, y_prev=y, tau=tau, sigma=sigma, alpha=alpha, theta=theta)
    logger.log_solver_start(label, np.shape(x[0]), tau, sigma, alpha, cfg.max_iters)
    start = time.perf_counter()
    best_gap = math.inf

    for k in range(1, cfg.max_iters + 1):
        xi = _inertial(state.x, state.x_prev, alpha)
        eta = _inertial(state.y, state.y_prev, alpha)
        x_new = prox_g(_axpy(xi, -tau, K.adjoint(eta)), tau)
        x_bar = tuple(p + theta * (p - q) for p, q in zip(x_new, xi))
        y_new = prox_fstar(_axpy(eta, sigma, K.apply(x_bar)), sigma)
        state.x_prev, state.x = state.x, x_new
        state.y_prev, state.y = state.y, y_new
        state.iterations = k

        if k % cfg.check_every and k != cfg.max_iters:
            continue
        for name, blocks in (("x", state.x), ("y", state.y)):
            bad = _first_non_finite(blocks)
            if bad is not None:
                block = f"{name}[{bad}]"
                logger.log_solver_error(label, k, "non-finite iterate", block)
                raise SolverDivergedError(f"{label}: non-finite values in {block} at iteration {k}", k, block)
        if gap_fn is None:
            continue
        primal, dual = gap_fn(state.x, state.y)
        gap = primal - dual
        best_gap = min(best_gap, gap)
        record = GapRecord(k, primal, dual, gap, best_gap)
        state.gap_history.append(record)
        logger.log_solver_checkpoint(label, k, primal, dual, gap)
        if callback is not None:
            callback(record)
        if gap <= cfg.gap_tol * (1.0 + abs(primal)):
            state.converged = True
            break

    logger.log_solver_finish(
        label,
        state.iterations,
        state.converged,
        gap=state.last_gap.gap if state.last_gap else None,
        duration_ms=(time.perf_counter() - start) * 1000,
    )
    return state

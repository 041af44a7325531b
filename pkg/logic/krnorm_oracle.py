"""KR norm of small point measures by linear programming, and on the grid by
the primal-dual solver.

The exact oracle solves both the transport LP and its potential dual, then
re-evaluates them independently so the returned gap certifies the value.
"""
import math
import os
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.sparse as sps
from dotenv import load_dotenv
from scipy.optimize import linprog

from logger import get_logger
from logic.core import path_diameter
from logic.diffops import backward_divergence, forward_gradient
from logic.errors import LinearProgramError, OracleSizeError
from logic.grid import DiscreteMeasure, GridFunction, SaddleState, VectorField
from logic.prox import clip_array, node_magnitude, shrink_array
from logic.saddle import solve
from logic.variational import flux_operator
from schemas import RegParams, SolveReport, SolverConfig

load_dotenv()

KRNORM_MAX_POINTS = int(os.getenv("KRNORM_MAX_POINTS", "64"))
CERTIFICATE_TOL = 1e-8
HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}

logger = get_logger()


@dataclass(frozen=True)
class TransportPlan:
    """gamma[i, j] is the mass carried from point i to point j."""
    gamma: np.ndarray
    points: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.gamma)):
            raise ValueError("transport plan has non-finite entries")
        if np.any(self.gamma < 0):
            raise ValueError("transport plan must be nonnegative")
        if self.gamma.shape != self.cost.shape:
            raise ValueError("plan and cost matrices differ in shape")

    def transport_cost(self) -> float:
        return float(np.sum(self.gamma * self.cost))

    def net_outflow(self) -> np.ndarray:
        return self.gamma.sum(axis=1) - self.gamma.sum(axis=0)


class Certificate(NamedTuple):
    primal: float
    dual: float
    gap: float
    certified: bool


class KrNormExact(NamedTuple):
    value: float
    plan: TransportPlan
    dual_f: np.ndarray
    certificate: Certificate


class KrNormGrid(NamedTuple):
    value: float
    nu: VectorField
    report: Optional[SolveReport]
    state: Optional[SaddleState]


def _check_exact_inputs(mu: DiscreteMeasure, lam: RegParams):
    if mu.size > KRNORM_MAX_POINTS:
        raise OracleSizeError(f"{mu.size} point masses exceed the oracle limit of {KRNORM_MAX_POINTS}")
    if not lam.lambda1_finite:
        raise ValueError("the exact oracle needs a finite lambda1")


def _primal_value(mu: DiscreteMeasure, gamma: np.ndarray, cost: np.ndarray, lam: RegParams) -> float:
    residual = mu.weights - gamma.sum(axis=1) + gamma.sum(axis=0)
    value = lam.lambda1 * float(np.abs(residual).sum())
    if lam.lambda2_finite:
        value += lam.lambda2 * float(np.sum(gamma * cost))
    return value


def _feasible_potentials(f: np.ndarray, cost: np.ndarray, lam: RegParams) -> np.ndarray:
    f = np.clip(f, -lam.lambda1, lam.lambda1)
    if not lam.lambda2_finite or f.size == 1:
        return f
    off = ~np.eye(f.size, dtype=bool)
    ratio = (f[:, None] - f[None, :])[off] / (lam.lambda2 * cost[off])
    worst = float(ratio.max())
    return f / worst if worst > 1.0 else f


def _solve_transport(mu: DiscreteMeasure, cost: np.ndarray, lam: RegParams) -> np.ndarray:
    n = mu.size
    m = n * n
    # net outflow of gamma flattened row-major: sum_j gamma_ij - sum_j gamma_ji
    out = sps.kron(sps.identity(n), np.ones((1, n)))
    inn = sps.kron(np.ones((1, n)), sps.identity(n))
    flow = (out - inn).tocsr()
    I = sps.identity(n, format="csr")
    # residual r = w - flow(gamma), slack s >= |r|
    A_ub = sps.bmat([[-flow, -I], [flow, -I]], format="csr")
    b_ub = np.concatenate([-mu.weights, mu.weights])
    c = np.concatenate([
        lam.lambda2 * cost.ravel() if lam.lambda2_finite else np.zeros(m),
        np.full(n, lam.lambda1),
    ])
    diagonal = np.eye(n, dtype=bool).ravel()
    gamma_bounds = [(0.0, 0.0) if d or not lam.lambda2_finite else (0.0, None) for d in diagonal]
    bounds = gamma_bounds + [(0.0, None)] * n
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs-ds", options=HIGHS_OPTIONS)
    if not res.success:
        raise LinearProgramError(f"transport LP failed: {res.message}")
    return np.maximum(res.x[:m].reshape(n, n), 0.0)


def _solve_potentials(mu: DiscreteMeasure, cost: np.ndarray, lam: RegParams) -> np.ndarray:
    n = mu.size
    A_ub = None
    b_ub = None
    if lam.lambda2_finite and n > 1:
        rows, cols = np.nonzero(~np.eye(n, dtype=bool))
        k = rows.size
        data = np.concatenate([np.ones(k), -np.ones(k)])
        A_ub = sps.csr_matrix((data, (np.tile(np.arange(k), 2), np.concatenate([rows, cols]))), shape=(k, n))
        b_ub = lam.lambda2 * cost[rows, cols]
    res = linprog(-mu.weights, A_ub=A_ub, b_ub=b_ub, bounds=[(-lam.lambda1, lam.lambda1)] * n,
                  method="highs-ds", options=HIGHS_OPTIONS)
    if not res.success:
        raise LinearProgramError(f"potential LP failed: {res.message}")
    return res.x


def kr_norm_exact(mu: DiscreteMeasure, lam: RegParams) -> KrNormExact:
    """sup { sum f_i w_i : |f_i| <= lambda1, f_i - f_j <= lambda2 |x_i - x_j| }.

    Equal to min over plans gamma >= 0 of
    lambda1 sum |w - out(gamma) + in(gamma)| + lambda2 sum |x_i - x_j| gamma_ij.
    """
    _check_exact_inputs(mu, lam)
    cost = mu.distances()
    gamma = _solve_transport(mu, cost, lam)
    f = _feasible_potentials(_solve_potentials(mu, cost, lam), cost, lam)

    primal = _primal_value(mu, gamma, cost, lam)
    dual = float(f @ mu.weights)
    gap = primal - dual
    certified = abs(gap) <= CERTIFICATE_TOL * (1.0 + abs(primal))
    if not certified:
        logger.log_app_event("krnorm_certificate_failed", {"primal": primal, "dual": dual, "points": mu.size})
    plan = TransportPlan(gamma, mu.points, cost)
    return KrNormExact(primal, plan, f, Certificate(primal, dual, gap, certified))


def embed_measure(mu: DiscreteMeasure, dims: Tuple[int, ...], h: float = 1.0, origin: float = 0.0) -> GridFunction:
    """Snap each point mass to its nearest grid node as a density weight / h**d.

    Coordinate k of a point indexes grid axis k.
    """
    if mu.dimension != len(dims):
        raise ValueError(f"{mu.dimension}-dimensional points cannot be embedded on a {len(dims)}D grid")
    index = np.rint((mu.points - origin) / h).astype(int)
    if np.any(index < 0) or np.any(index >= np.array(dims)):
        raise ValueError("point masses fall outside the grid")
    density = np.zeros(dims)
    np.add.at(density, tuple(index.T), mu.weights / h ** len(dims))
    return GridFunction(density, h, origin)


def kr_norm_grid(mu: GridFunction, lam: RegParams, cfg: Optional[SolverConfig] = None) -> KrNormGrid:
    """min over nu of lambda1 |mu - div nu|_1 + lambda2 |nu|_M on the grid."""
    if not (lam.lambda1_finite or lam.lambda2_finite):
        raise ValueError("lambda1 and lambda2 cannot both be infinite")
    h, vol, m = mu.h, mu.cell_volume, mu.values
    zero_field = VectorField.zeros(mu.dims, h)
    if not lam.lambda2_finite:
        return KrNormGrid(lam.lambda1 * mu.l1_norm(), zero_field, None, None)
    lambda1 = lam.lambda1
    if not lam.lambda1_finite:
        if abs(mu.integral()) > 1e-9 * (1.0 + mu.l1_norm()):
            return KrNormGrid(math.inf, zero_field, None, None)
        lambda1 = lam.lambda2 * max(path_diameter(mu), h)
    lambda2 = lam.lambda2
    cfg = cfg or SolverConfig()

    def prox_g(x, tau):
        return (shrink_array(x[0], tau * lambda2),)

    def prox_fstar(y, sigma):
        return (clip_array(y[0] + sigma * m, lambda1),)

    def gap_fn(x, y):
        q = x[0]
        primal = lambda1 * float(np.abs(m - backward_divergence(q, h)).sum()) + lambda2 * float(node_magnitude(q).sum())
        f = np.clip(y[0], -lambda1, lambda1)
        steep = float(node_magnitude(forward_gradient(f, h)).max())
        if steep > lambda2:
            f = f * (lambda2 / steep)
        return primal * vol, float(np.sum(f * m)) * vol

    x0 = (np.zeros((mu.ndim,) + mu.dims),)
    y0 = (np.zeros(mu.dims),)
    state = solve(flux_operator(mu.dims, h), prox_g, prox_fstar, x0, y0, cfg, gap_fn=gap_fn, label="krnorm")
    record = state.last_gap
    gap = record.primal - record.dual
    report = SolveReport(
        method="krnorm-pd",
        iterations=state.iterations,
        converged=state.converged,
        primal=record.primal,
        dual=record.dual,
        gap=gap,
        relative_gap=gap / (1.0 + abs(record.primal)),
        objective=record.primal,
        mass_in=mu.integral(),
        mass_out=mu.integral(),
        mass_difference=0.0,
        tau=state.tau,
        sigma=state.sigma,
    )
    return KrNormGrid(record.primal, VectorField(state.x[0], h), report, state)

"""One-dimensional KR-TV, L1-TV and G-TV as linear programs (scipy HiGHS).

Absolute values are split into nonnegative slacks. Used by the 1D experiment
sweeps and as an exact reference for the primal-dual solver.
"""
import math
from typing import NamedTuple

import numpy as np
import scipy.sparse as sps
from scipy.optimize import linprog

from logic.diffops import gradient_matrix
from logic.errors import LinearProgramError
from logic.grid import GridFunction
from schemas import RegParams


class LpSolution(NamedTuple):
    u: np.ndarray
    field: np.ndarray
    objective: float
    iterations: int


def _require_1d(u0: GridFunction):
    if u0.ndim != 1:
        raise ValueError(f"the LP solver handles 1D signals only, got shape {u0.dims}")


def _run(c, A_ub, b_ub, bounds, what: str):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise LinearProgramError(f"{what} LP failed: {res.message}")
    return res


def krtv_lp(u0: GridFunction, lam: RegParams) -> LpSolution:
    """min lambda1 |u - u0 - div q|_1 + lambda2 |q|_1 + TV(u) over (u, q).

    Variables are [u, q, a, b, c] with a >= |u - u0 - div q|, b >= |q| and
    c >= |grad u|. An infinite weight pins its slack to zero, which turns the
    term into a hard constraint.
    """
    _require_1d(u0)
    if not (lam.lambda1_finite or lam.lambda2_finite):
        raise ValueError("lambda1 and lambda2 cannot both be infinite")
    n = u0.dims[0]
    vol = u0.cell_volume
    G = gradient_matrix((n,), u0.h)
    I = sps.identity(n, format="csr")
    Z = sps.csr_matrix((n, n))
    # u - div q = u + G^T q
    A_ub = sps.bmat([
        [I, G.T, -I, Z, Z],
        [-I, -G.T, -I, Z, Z],
        [Z, I, Z, -I, Z],
        [Z, -I, Z, -I, Z],
        [G, Z, Z, Z, -I],
        [-G, Z, Z, Z, -I],
    ], format="csr")
    b_ub = np.concatenate([u0.values, -u0.values, np.zeros(4 * n)])

    c = np.zeros(5 * n)
    c[2 * n:3 * n] = lam.lambda1 * vol if lam.lambda1_finite else 0.0
    c[3 * n:4 * n] = lam.lambda2 * vol if lam.lambda2_finite else 0.0
    c[4 * n:] = vol

    u_bounds = [(None, None)] * n
    q_bounds = [(None, None)] * (n - 1) + [(0.0, 0.0)]
    if not lam.lambda2_finite:
        q_bounds = [(0.0, 0.0)] * n
    a_bounds = [(0.0, None) if lam.lambda1_finite else (0.0, 0.0)] * n
    b_bounds = [(0.0, None) if lam.lambda2_finite else (0.0, 0.0)] * n
    bounds = u_bounds + q_bounds + a_bounds + b_bounds + [(0.0, None)] * n

    res = _run(c, A_ub, b_ub, bounds, "KR-TV")
    x = res.x
    return LpSolution(x[:n].copy(), x[n:2 * n].copy(), float(res.fun), int(res.nit))


def l1tv_lp(u0: GridFunction, lambda1: float) -> LpSolution:
    return krtv_lp(u0, RegParams(lambda1=lambda1, lambda2=math.inf))


def gtv_lp(u0: GridFunction, lam: float) -> LpSolution:
    """min lam * max|g| + TV(u0 + div g) over g.

    Variables are [g, t, c] with t >= |g| and c >= |grad(u0 + div g)|.
    """
    _require_1d(u0)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    n = u0.dims[0]
    vol = u0.cell_volume
    G = gradient_matrix((n,), u0.h)
    I = sps.identity(n, format="csr")
    ones = sps.csr_matrix(np.ones((n, 1)))
    zcol = sps.csr_matrix((n, 1))
    # grad(u0 + div g) = G u0 - G G^T g
    GGt = (G @ G.T).tocsr()
    A_ub = sps.bmat([
        [I, -ones, None],
        [-I, -ones, None],
        [-GGt, zcol, -I],
        [GGt, zcol, -I],
    ], format="csr")
    Gu0 = G @ u0.values
    b_ub = np.concatenate([np.zeros(2 * n), -Gu0, Gu0])

    c = np.concatenate([np.zeros(n), [lam], np.full(n, vol)])
    bounds = [(None, None)] * (n - 1) + [(0.0, 0.0)] + [(0.0, None)] + [(0.0, None)] * n

    res = _run(c, A_ub, b_ub, bounds, "G-TV")
    g = res.x[:n].copy()
    u = u0.values - G.T @ g
    return LpSolution(u, g, float(res.fun), int(res.nit))

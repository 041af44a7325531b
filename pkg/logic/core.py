"""Grid geometry and the objective / duality-gap evaluators shared by all solvers.

All evaluators return values in physical units: plain sums times h**d.
"""
import math
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import fft

from logic.diffops import backward_divergence, forward_gradient
from logic.grid import DiscreteMeasure, GapRecord, GridFunction, SaddleState, VectorField
from logic.prox import node_magnitude
from schemas import RegParams

__all__ = [
    "GridFunction", "VectorField", "DiscreteMeasure", "SaddleState", "GapRecord", "RegParams",
    "DualValue", "tv_value", "kr_tv_primal_objective", "kr_tv_dual_objective",
    "diameter", "path_diameter", "mass_preserving_regime",
    "solve_neumann_poisson", "restore_dual_feasibility",
]

FEASIBILITY_TOL = 1e-8


class DualValue(NamedTuple):
    value: float
    feasible: bool
    violation: float
    pairing: float


def tv_value(u: GridFunction) -> float:
    return float(node_magnitude(forward_gradient(u.values, u.h)).sum() * u.cell_volume)


def kr_tv_primal_objective(
    u: GridFunction,
    nu: VectorField,
    u0: GridFunction,
    lam: RegParams,
    tol: float = FEASIBILITY_TOL,
) -> float:
    """lambda1 |u - u0 - div nu|_1 + lambda2 |nu|_M + TV(u).

    An infinite weight turns its term into a hard constraint; the objective is
    +inf when that constraint is violated beyond tol.
    """
    u.require_same_grid(u0)
    nu.require_grid(u)
    residual = u.values - u0.values - backward_divergence(nu.components, u.h)
    scale = 1.0 + float(np.abs(u0.values).max())
    if lam.lambda1_finite:
        discrepancy = lam.lambda1 * float(np.abs(residual).sum()) * u.cell_volume
    elif float(np.abs(residual).max()) > tol * scale:
        return math.inf
    else:
        discrepancy = 0.0
    if lam.lambda2_finite:
        flux = lam.lambda2 * nu.radon_norm()
    elif float(nu.magnitude().max()) > tol:
        return math.inf
    else:
        flux = 0.0
    return discrepancy + flux + tv_value(u)


def kr_tv_dual_objective(
    f: GridFunction,
    u0: GridFunction,
    lam: RegParams,
    phi: Optional[VectorField] = None,
    tol: float = FEASIBILITY_TOL,
) -> DualValue:
    """-<f, u0> for a dual-feasible f, otherwise -inf with the violation reported.

    Feasible means |f| <= lambda1, |grad f| <= lambda2 and f = div phi for some
    |phi| <= 1. When phi is not supplied the candidate is grad w with
    div grad w = f, which decides feasibility exactly in 1D and gives a
    sufficient test in 2D.
    """
    f.require_same_grid(u0)
    pairing = -float(np.sum(f.values * u0.values)) * f.cell_volume
    violations = [0.0]
    if lam.lambda1_finite:
        violations.append(float(np.abs(f.values).max()) - lam.lambda1)
    if lam.lambda2_finite:
        violations.append(float(node_magnitude(forward_gradient(f.values, f.h)).max()) - lam.lambda2)
    if phi is None:
        mean_defect = abs(f.mean())
        w = solve_neumann_poisson(f.values - f.mean(), f.h)
        candidate = forward_gradient(w, f.h)
        violations.append(mean_defect)
    else:
        phi.require_grid(f)
        candidate = phi.components
        violations.append(float(np.abs(f.values - backward_divergence(candidate, f.h)).max()))
    violations.append(float(node_magnitude(candidate).max()) - 1.0)
    violation = max(violations)
    feasible = violation <= tol
    return DualValue(pairing if feasible else -math.inf, feasible, violation, pairing)


def diameter(u: Union[GridFunction, Tuple[int, ...]], h: float = 1.0) -> float:
    """Euclidean diagonal of the grid's bounding box."""
    dims, h = (u.dims, u.h) if isinstance(u, GridFunction) else (tuple(u), h)
    return h * math.sqrt(sum((n - 1) ** 2 for n in dims))


def path_diameter(u: Union[GridFunction, Tuple[int, ...]], h: float = 1.0) -> float:
    """Longest axis-aligned grid path; bounds the oscillation of f with |grad f| <= 1."""
    dims, h = (u.dims, u.h) if isinstance(u, GridFunction) else (tuple(u), h)
    return h * sum(n - 1 for n in dims)


def mass_preserving_regime(lam: RegParams, u: Union[GridFunction, Tuple[int, ...]], h: float = 1.0) -> bool:
    """lambda2 / lambda1 <= 2 / diam, measured with the path diameter."""
    if not lam.lambda1_finite:
        return True
    if not lam.lambda2_finite:
        return False
    diam = path_diameter(u, h)
    return diam == 0 or lam.lambda2 * diam <= 2.0 * lam.lambda1


def _neumann_eigenvalues(dims: Tuple[int, ...], h: float) -> np.ndarray:
    eig = np.zeros(dims)
    for axis, n in enumerate(dims):
        k = np.arange(n)
        shape = [1] * len(dims)
        shape[axis] = n
        eig = eig - ((2.0 - 2.0 * np.cos(np.pi * k / n)) / h ** 2).reshape(shape)
    return eig


def solve_neumann_poisson(rhs: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Zero-mean w with div(grad w) = rhs - mean(rhs), diagonalised by the DCT-II."""
    eig = _neumann_eigenvalues(rhs.shape, h)
    coeffs = fft.dctn(rhs, type=2, norm="ortho")
    zero = eig == 0
    eig[zero] = 1.0
    coeffs = coeffs / eig
    coeffs[zero] = 0.0
    return fft.idctn(coeffs, type=2, norm="ortho")


def restore_dual_feasibility(
    f: np.ndarray,
    phi: np.ndarray,
    h: float,
    lambda1: float = math.inf,
    lambda2: float = math.inf,
    grad_sum_bound: float = math.inf,
) -> Tuple[np.ndarray, np.ndarray]:
    """Map a dual iterate (f, phi) to a point with f = div phi and every bound met.

    lambda2 bounds |grad f| pointwise; grad_sum_bound bounds the plain sum of
    |grad f| over the nodes.
    """
    f0 = f - f.mean()
    w = solve_neumann_poisson(f0 - backward_divergence(phi, h), h)
    phi_fixed = phi + forward_gradient(w, h)
    scale = 1.0
    bound_f = float(np.abs(f0).max())
    if math.isfinite(lambda1) and bound_f > 0:
        scale = min(scale, lambda1 / bound_f)
    g = node_magnitude(forward_gradient(f0, h))
    if math.isfinite(lambda2) and g.max() > 0:
        scale = min(scale, lambda2 / float(g.max()))
    if math.isfinite(grad_sum_bound) and g.sum() > 0:
        scale = min(scale, grad_sum_bound / float(g.sum()))
    bound_phi = float(node_magnitude(phi_fixed).max())
    if bound_phi > 0:
        scale = min(scale, 1.0 / bound_phi)
    return scale * f0, scale * phi_fixed



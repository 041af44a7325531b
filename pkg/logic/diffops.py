"""Forward-difference gradient, its negative adjoint, and operator-norm bounds."""
import math
from typing import Tuple

import numpy as np
import scipy.sparse as sps

from logic.grid import GridFunction, VectorField


def forward_gradient(a: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Forward differences per axis with a zero difference on the last node (Neumann)."""
    g = np.zeros((a.ndim,) + a.shape)
    for axis in range(a.ndim):
        index = [slice(None)] * a.ndim
        index[axis] = slice(0, -1)
        g[(axis,) + tuple(index)] = np.diff(a, axis=axis) / h
    return g


def backward_divergence(p: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Exact negative adjoint of forward_gradient under the plain-sum inner product."""
    out = np.zeros(p.shape[1:])
    for axis in range(p.shape[0]):
        comp = p[axis].copy()
        last = [slice(None)] * comp.ndim
        last[axis] = -1
        # the last-node component is never produced by forward_gradient
        comp[tuple(last)] = 0.0
        out += (comp - np.roll(comp, 1, axis=axis)) / h
    return out


def grad(u: GridFunction) -> VectorField:
    return VectorField(forward_gradient(u.values, u.h), u.h)


def div(v: VectorField) -> GridFunction:
    return GridFunction(backward_divergence(v.components, v.h), v.h)


def gradient_norm_sq_bound(ndim: int, h: float = 1.0) -> float:
    return 4.0 * ndim / h ** 2


def op_norm_bound(dims: Tuple[int, ...], h: float = 1.0) -> float:
    """Upper bound on the norm of K(u, q) = (u - div q, grad u).

    K equals the symmetric block [[I, G^T], [G, 0]], whose largest
    eigenvalue is (1 + sqrt(1 + 4 s^2)) / 2 for the largest singular value s of G.
    """
    l_sq = gradient_norm_sq_bound(len(dims), h)
    return (1.0 + math.sqrt(1.0 + 4.0 * l_sq)) / 2.0


def stacked_norm_bound(dims: Tuple[int, ...], h: float = 1.0) -> float:
    """Upper bound on the norm of u -> (u, grad u)."""
    return math.sqrt(1.0 + gradient_norm_sq_bound(len(dims), h))


def flux_norm_bound(dims: Tuple[int, ...], h: float = 1.0) -> float:
    """Upper bound on the norm of q -> -div q."""
    return math.sqrt(gradient_norm_sq_bound(len(dims), h))


def cascade_apply(u: np.ndarray, q: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    return u - backward_divergence(q, h), forward_gradient(u, h)


def cascade_adjoint(f: np.ndarray, phi: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    return f - backward_divergence(phi, h), forward_gradient(f, h)


def power_iteration_norm(dims: Tuple[int, ...], h: float = 1.0, iterations: int = 500, seed: int = 0) -> float:
    """Power-iteration estimate of the norm of the cascade operator (always from below)."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(dims)
    q = rng.standard_normal((len(dims),) + tuple(dims))
    estimate = 0.0
    for _ in range(iterations):
        norm = math.sqrt(float(np.sum(u ** 2) + np.sum(q ** 2)))
        u, q = u / norm, q / norm
        f, phi = cascade_apply(u, q, h)
        u, q = cascade_adjoint(f, phi, h)
        estimate = math.sqrt(float(np.sum(f ** 2) + np.sum(phi ** 2)))
    return estimate


def _difference_matrix(n: int, h: float) -> sps.csr_matrix:
    if n == 1:
        return sps.csr_matrix((1, 1))
    d = sps.diags([-np.ones(n), np.ones(n - 1)], [0, 1], shape=(n, n), format="lil")
    d[n - 1, n - 1] = 0.0
    return (d / h).tocsr()


def gradient_matrix(dims: Tuple[int, ...], h: float = 1.0) -> sps.csr_matrix:
    """Sparse forward_gradient acting on row-major flattened values.

    Rows are ordered component by component, matching forward_gradient(a).reshape(d, -1).
    """
    if len(dims) == 1:
        return _difference_matrix(dims[0], h)
    rows, cols = dims
    along_rows = sps.kron(_difference_matrix(rows, h), sps.identity(cols))
    along_cols = sps.kron(sps.identity(rows), _difference_matrix(cols, h))
    return sps.vstack([along_rows, along_cols]).tocsr()

"""Projections and proximal maps for the terms of the saddle-point problems.

The *_array functions work on raw arrays (vector fields stacked along axis 0)
and are what the solvers call; the typed wrappers take grid types.
"""
import math

import numpy as np

from logic.grid import GridFunction, VectorField


def node_magnitude(p: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(p ** 2, axis=0))


def clip_array(f: np.ndarray, bound: float) -> np.ndarray:
    if math.isinf(bound):
        return f.copy()
    return np.clip(f, -bound, bound)


def ball_array(p: np.ndarray, radius: float) -> np.ndarray:
    if math.isinf(radius):
        return p.copy()
    mag = node_magnitude(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > radius, radius / mag, 1.0)
    return p * scale


def shrink_array(p: np.ndarray, threshold: float) -> np.ndarray:
    if math.isinf(threshold):
        return np.zeros_like(p)
    mag = node_magnitude(p)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > threshold, 1.0 - threshold / mag, 0.0)
    return p * scale


def _project_magnitudes_l1(m: np.ndarray, radius: float) -> np.ndarray:
    # sort-based projection of a nonnegative vector onto {sum <= radius}
    if m.sum() <= radius:
        return m
    s = np.sort(m.ravel())[::-1]
    cumulative = np.cumsum(s) - radius
    ranks = np.arange(1, s.size + 1)
    rho = np.nonzero(s - cumulative / ranks > 0)[0][-1]
    theta = cumulative[rho] / (rho + 1)
    return np.maximum(m - theta, 0.0)


def l1_ball_array(p: np.ndarray, radius: float) -> np.ndarray:
    """Projection onto {sum over nodes of |p(node)| <= radius}."""
    if math.isinf(radius):
        return p.copy()
    mag = node_magnitude(p)
    projected = _project_magnitudes_l1(mag, radius)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > 0, projected / mag, 0.0)
    return p * scale


def max_norm_prox_array(p: np.ndarray, threshold: float) -> np.ndarray:
    """prox of threshold * max_node |p(node)|, via the Moreau identity."""
    if threshold == 0:
        return p.copy()
    if math.isinf(threshold):
        return np.zeros_like(p)
    return p - threshold * l1_ball_array(p / threshold, 1.0)


def project_box(f: GridFunction, bound: float) -> GridFunction:
    if not bound > 0:
        raise ValueError(f"box bound must be positive, got {bound}")
    return f.with_values(clip_array(f.values, bound))


def project_ball_field(v: VectorField, radius: float) -> VectorField:
    if not radius > 0:
        raise ValueError(f"ball radius must be positive, got {radius}")
    return VectorField(ball_array(v.components, radius), v.h)


def shrink_field(v: VectorField, threshold: float) -> VectorField:
    if threshold < 0:
        raise ValueError(f"shrink threshold must be nonnegative, got {threshold}")
    return VectorField(shrink_array(v.components, threshold), v.h)


def prox_linear(f: GridFunction, u0: GridFunction, step: float) -> GridFunction:
    """prox of step * <., u0>."""
    f.require_same_grid(u0)
    return f.with_values(f.values - step * u0.values)


def project_l1_ball_field(v: VectorField, radius: float) -> VectorField:
    if not radius > 0:
        raise ValueError(f"ball radius must be positive, got {radius}")
    return VectorField(l1_ball_array(v.components, radius), v.h)


def prox_max_norm_field(v: VectorField, threshold: float) -> VectorField:
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    return VectorField(max_norm_prox_array(v.components, threshold), v.h)

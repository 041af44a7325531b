"""Domain types shared by the solvers: grid functions, vector fields,
point measures and the primal-dual iterate."""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from logic.errors import ShapeMismatchError


def _as_finite_array(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite values")
    return arr


@dataclass(frozen=True)
class GridFunction:
    """Scalar field on a uniform 1D or 2D grid (row-major for 2D)."""
    values: np.ndarray
    h: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        values = _as_finite_array(self.values, "GridFunction")
        if values.ndim not in (1, 2) or values.size == 0:
            raise ValueError(f"GridFunction must be a non-empty 1D or 2D array, got shape {values.shape}")
        if not (self.h > 0 and np.isfinite(self.h)):
            raise ValueError(f"grid spacing must be positive, got {self.h}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def zeros(cls, dims: Tuple[int, ...], h: float = 1.0) -> "GridFunction":
        return cls(np.zeros(dims), h)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.ndim

    def integral(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum() * self.cell_volume)

    def mean(self) -> float:
        return float(self.values.mean())

    def with_values(self, values) -> "GridFunction":
        return GridFunction(values, self.h, self.origin)

    def require_same_grid(self, other: "GridFunction", what: str = "grid functions"):
        if self.dims != other.dims:
            raise ShapeMismatchError(f"{what} have different shapes: {self.dims} vs {other.dims}")


@dataclass(frozen=True)
class VectorField:
    """Per-node vector field; components has shape (d, *dims)."""
    components: np.ndarray
    h: float = 1.0

    def __post_init__(self):
        comps = _as_finite_array(self.components, "VectorField")
        if comps.ndim < 2 or comps.shape[0] != comps.ndim - 1 or comps.shape[0] not in (1, 2):
            raise ValueError(f"VectorField components must have shape (d, *dims) with d in (1, 2), got {comps.shape}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def zeros(cls, dims: Tuple[int, ...], h: float = 1.0) -> "VectorField":
        return cls(np.zeros((len(dims),) + tuple(dims)), h)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.components.shape[1:]

    @property
    def ndim(self) -> int:
        return self.components.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.components ** 2, axis=0))

    def radon_norm(self) -> float:
        return float(self.magnitude().sum() * self.h ** self.ndim)

    def require_grid(self, u: GridFunction, what: str = "vector field"):
        if self.dims != u.dims:
            raise ShapeMismatchError(f"{what} shape {self.dims} does not match grid {u.dims}")


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite signed sum of point masses."""
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = _as_finite_array(self.points, "DiscreteMeasure points")
        if points.ndim == 1:
            points = points[:, None]
        weights = _as_finite_array(self.weights, "DiscreteMeasure weights").ravel()
        if points.ndim != 2 or points.shape[0] != weights.shape[0]:
            raise ShapeMismatchError(f"{points.shape[0]} points but {weights.shape[0]} weights")
        if points.shape[0] == 0:
            raise ValueError("DiscreteMeasure needs at least one point")
        if np.any(weights == 0):
            raise ValueError("DiscreteMeasure weights must be nonzero")
        if np.unique(points, axis=0).shape[0] != points.shape[0]:
            raise ValueError("DiscreteMeasure points must be pairwise distinct")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def mass(self) -> float:
        return float(self.weights.sum())

    def distances(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return np.sqrt(np.sum(diff ** 2, axis=-1))

    def diameter(self) -> float:
        return float(self.distances().max())

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights * factor)


@dataclass
class GapRecord:
    iteration: int
    primal: float
    dual: float
    gap: float
    best_gap: float


@dataclass
class SaddleState:
    """Full primal-dual iterate.

    Blocks are tuples of arrays. For the cascade problems the layout is
    x = (u, q) and y = (f, phi); the properties below follow that layout.
    """
    x: tuple
    y: tuple
    x_prev: tuple
    y_prev: tuple
    tau: float
    sigma: float
    alpha: float
    theta: float = 1.0
    iterations: int = 0
    gap_history: list = field(default_factory=list)
    converged: bool = False

    @property
    def u(self) -> np.ndarray:
        return self.x[0]

    @property
    def q(self) -> Optional[np.ndarray]:
        return self.x[1] if len(self.x) > 1 else None

    @property
    def f(self) -> np.ndarray:
        return self.y[0]

    @property
    def phi(self) -> Optional[np.ndarray]:
        return self.y[1] if len(self.y) > 1 else None

    @property
    def prev_u(self) -> np.ndarray:
        return self.x_prev[0]

    @property
    def prev_q(self) -> Optional[np.ndarray]:
        return self.x_prev[1] if len(self.x_prev) > 1 else None

    @property
    def last_gap(self) -> Optional[GapRecord]:
        return self.gap_history[-1] if self.gap_history else None

"""Synthetic test signals and images, and shape statistics of solutions."""
from typing import NamedTuple, Tuple

import numpy as np

from logic.grid import GridFunction

SIGNAL_SAMPLES = 256


def signal_axis(n: int = SIGNAL_SAMPLES) -> Tuple[np.ndarray, float]:
    x = np.linspace(-1.0, 1.0, n)
    return x, 2.0 / (n - 1)


def _signal(values: np.ndarray, h: float) -> GridFunction:
    return GridFunction(values, h, origin=-1.0)


def plateau_signal(n: int = SIGNAL_SAMPLES, half_width: float = 0.25, height: float = 1.0) -> GridFunction:
    x, h = signal_axis(n)
    return _signal(np.where(np.abs(x) < half_width, height, 0.0), h)


def ramp_signal(n: int = SIGNAL_SAMPLES) -> GridFunction:
    x, h = signal_axis(n)
    return _signal(np.clip(x + 0.5, 0.0, 1.0), h)


def hat_signal(n: int = SIGNAL_SAMPLES, half_width: float = 0.5) -> GridFunction:
    x, h = signal_axis(n)
    return _signal(np.maximum(0.0, 1.0 - np.abs(x) / half_width), h)


def _pixel_grid(n: int) -> Tuple[np.ndarray, np.ndarray]:
    # pixel centres in [0, 1]^2, rows first
    t = (np.arange(n) + 0.5) / n
    return np.meshgrid(t, t, indexing="ij")


def disk_indicator(n: int = 32, radius: float = 0.25) -> GridFunction:
    rows, cols = _pixel_grid(n)
    return GridFunction(((rows - 0.5) ** 2 + (cols - 0.5) ** 2 < radius ** 2).astype(float))


def salt_and_pepper(u: GridFunction, density: float, seed: int = 0) -> GridFunction:
    rng = np.random.default_rng(seed)
    values = u.values.copy()
    hit = rng.random(values.shape) < density
    values[hit] = rng.integers(0, 2, size=int(hit.sum())).astype(float)
    return u.with_values(values)


class NoisyPhantom(NamedTuple):
    clean: GridFunction
    noisy: GridFunction


def disk_on_gradient(n: int = 64, radius: float = 0.3, density: float = 0.1, seed: int = 0) -> NoisyPhantom:
    """Bright disk over a horizontal intensity ramp, corrupted by salt-and-pepper noise."""
    rows, cols = _pixel_grid(n)
    clean = 0.2 + 0.4 * cols
    clean = np.where((rows - 0.5) ** 2 + (cols - 0.5) ** 2 < radius ** 2, 0.9, clean)
    clean = GridFunction(clean)
    return NoisyPhantom(clean, salt_and_pepper(clean, density, seed))


class Composite(NamedTuple):
    image: GridFunction
    cartoon: GridFunction
    oscillation: GridFunction


def cartoon_sinusoid(n: int = 64, frequency: float = 8.0, amplitude: float = 0.15) -> Composite:
    """Piecewise-constant cartoon plus a striped oscillation on its right half."""
    rows, cols = _pixel_grid(n)
    cartoon = np.full((n, n), 0.3)
    cartoon[(rows > 0.15) & (rows < 0.55) & (cols > 0.1) & (cols < 0.45)] = 0.7
    cartoon[(rows - 0.7) ** 2 + (cols - 0.3) ** 2 < 0.15 ** 2] = 0.55
    stripes = amplitude * np.sin(2.0 * np.pi * frequency * rows) * (cols > 0.55)
    return Composite(GridFunction(cartoon + stripes), GridFunction(cartoon), GridFunction(stripes))


def count_plateau_levels(values: np.ndarray, rel_gap: float = 0.05, min_size: int = 3) -> int:
    """Clusters of sorted values split at gaps above rel_gap * range, counting clusters of at least min_size samples."""
    v = np.sort(np.ravel(values))
    spread = v[-1] - v[0]
    # solver round-off on a flat solution is not a second level
    if spread <= 1e-9 * (1.0 + abs(v).max()):
        return 1
    cuts = np.nonzero(np.diff(v) > rel_gap * spread)[0]
    sizes = np.diff(np.concatenate([[0], cuts + 1, [v.size]]))
    return int(np.sum(sizes >= min_size))


def count_jumps(values: np.ndarray, threshold: float) -> int:
    """Runs of consecutive samples whose difference exceeds threshold (1D)."""
    big = np.abs(np.diff(np.ravel(values))) > threshold
    return int(np.sum(big[1:] & ~big[:-1]) + (1 if big.size and big[0] else 0))


def support_length(u: GridFunction, rel_threshold: float = 1e-3) -> float:
    """Measure of the set where |u| exceeds rel_threshold * max|u|."""
    peak = float(np.abs(u.values).max())
    if peak == 0:
        return 0.0
    return float(np.sum(np.abs(u.values) > rel_threshold * peak)) * u.cell_volume


def correlation(a: GridFunction, b: GridFunction) -> float:
    x = a.values.ravel() - a.values.mean()
    y = b.values.ravel() - b.values.mean()
    denom = float(np.linalg.norm(x) * np.linalg.norm(y))
    return float(x @ y) / denom if denom > 0 else 0.0

"""PGM images, two-column signal files and point-measure CSV files."""
import csv
from pathlib import Path
from typing import List, Union

import numpy as np

from logger import get_logger
from logic.errors import PgmFormatError, SignalFormatError
from logic.grid import DiscreteMeasure, GridFunction

logger = get_logger()

PathLike = Union[str, Path]
WRITE_MAXVAL = 255
SCALINGS = ("clip", "minmax")


def _header_tokens(data: bytes, count: int):
    """First `count` whitespace-separated header tokens (comments skipped) and the payload offset."""
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise PgmFormatError("truncated header")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from a binary payload
    return tokens, pos + 1


def _parse_pgm(data: bytes) -> np.ndarray:
    tokens, offset = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise PgmFormatError(f"unsupported magic {magic!r}, expected P2 or P5")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PgmFormatError("non-numeric width, height or maxval")
    if width < 1 or height < 1:
        raise PgmFormatError(f"invalid size {width}x{height}")
    if not 0 < maxval <= 65535:
        raise PgmFormatError(f"maxval must be in 1..65535, got {maxval}")

    count = width * height
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = data[offset:offset + count * dtype.itemsize]
        if len(payload) < count * dtype.itemsize:
            raise PgmFormatError(f"truncated payload: expected {count * dtype.itemsize} bytes, got {len(payload)}")
        samples = np.frombuffer(payload, dtype=dtype).astype(float)
    else:
        body = data[offset - 1:].split()
        if len(body) < count:
            raise PgmFormatError(f"truncated payload: expected {count} samples, got {len(body)}")
        try:
            samples = np.array([int(t) for t in body[:count]], dtype=float)
        except ValueError:
            raise PgmFormatError("non-numeric sample in ASCII payload")
    if samples.max(initial=0) > maxval:
        raise PgmFormatError("sample exceeds maxval")
    return samples.reshape(height, width) / maxval


def read_pgm(path: PathLike, h: float = 1.0) -> GridFunction:
    try:
        values = _parse_pgm(Path(path).read_bytes())
    except (OSError, PgmFormatError) as e:
        logger.log_io_event("read_pgm", path, success=False, error=str(e))
        raise
    logger.log_io_event("read_pgm", path, shape=values.shape)
    return GridFunction(values, h)


def quantize(values: np.ndarray, scaling: str = "clip") -> np.ndarray:
    """Map values into [0, 1] and quantize to 0..255 with round-half-up."""
    if scaling not in SCALINGS:
        raise ValueError(f"unknown scaling {scaling!r}, expected one of {SCALINGS}")
    if scaling == "minmax":
        lo, hi = float(values.min()), float(values.max())
        values = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    return np.floor(np.clip(values, 0.0, 1.0) * WRITE_MAXVAL + 0.5).astype(np.uint8)


def write_pgm(path: PathLike, u: GridFunction, scaling: str = "clip", binary: bool = True) -> Path:
    if u.ndim != 2:
        raise ValueError(f"PGM output needs a 2D grid function, got shape {u.dims}")
    samples = quantize(u.values, scaling)
    height, width = samples.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{WRITE_MAXVAL}\n".encode("ascii")
    if binary:
        body = samples.tobytes()
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in samples).encode("ascii") + b"\n"
    path = Path(path)
    path.write_bytes(header + body)
    logger.log_io_event("write_pgm", path, shape=samples.shape)
    return path


def read_signal(path: PathLike) -> GridFunction:
    """Two-column whitespace-separated x, value text with uniform increasing x."""
    try:
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise SignalFormatError(f"line {lineno}: expected two columns, got {len(parts)}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise SignalFormatError(f"line {lineno}: non-numeric entry")
        if not rows:
            raise SignalFormatError("no samples")
        data = np.array(rows)
        x, values = data[:, 0], data[:, 1]
        if x.size == 1:
            return GridFunction(values, 1.0, float(x[0]))
        steps = np.diff(x)
        h = float(steps.mean())
        if np.any(steps <= 0):
            raise SignalFormatError("x must be strictly increasing")
        if np.max(np.abs(steps - h)) > 1e-6 * max(abs(h), 1.0):
            raise SignalFormatError("x must be uniformly spaced")
    except (OSError, SignalFormatError) as e:
        logger.log_io_event("read_signal", path, success=False, error=str(e))
        raise
    logger.log_io_event("read_signal", path, shape=values.shape)
    return GridFunction(values, h, float(x[0]))


def write_signal(path: PathLike, u: GridFunction) -> Path:
    if u.ndim != 1:
        raise ValueError(f"signal output needs a 1D grid function, got shape {u.dims}")
    x = u.origin + u.h * np.arange(u.dims[0])
    path = Path(path)
    path.write_text("".join(f"{xi:.9g} {vi:.9g}\n" for xi, vi in zip(x, u.values)))
    logger.log_io_event("write_signal", path, shape=u.dims)
    return path


def read_points_csv(path: PathLike) -> DiscreteMeasure:
    """CSV rows x[,y],weight; a non-numeric first row is taken as a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
        if rows:
            try:
                [float(c) for c in rows[0]]
            except ValueError:
                rows = rows[1:]
        if not rows:
            raise SignalFormatError("no point masses")
        widths = {len(r) for r in rows}
        if len(widths) != 1 or widths.pop() not in (2, 3):
            raise SignalFormatError("every row needs 2 (x, weight) or 3 (x, y, weight) columns")
        try:
            data = np.array([[float(c) for c in r] for r in rows])
        except ValueError:
            raise SignalFormatError("non-numeric entry")
        measure = DiscreteMeasure(data[:, :-1], data[:, -1])
    except (OSError, SignalFormatError, ValueError) as e:
        logger.log_io_event("read_points", path, success=False, error=str(e))
        raise
    logger.log_io_event("read_points", path, shape=(measure.size,))
    return measure

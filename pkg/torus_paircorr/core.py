"""Torus geometry, point containers and the sup-norm distance.

Every coordinate lives in [0, 1) and distances are measured coordinatewise
to the nearest integer, then maximised over coordinates.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)


class PairCorrError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(PairCorrError, ValueError):
    """A precondition on an argument was violated."""


class ValidationError(PairCorrError, ValueError):
    """Malformed input data, optionally pinned to a line of a source file."""

    def __init__(self, message: str, line: Optional[int] = None, source: Optional[str] = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where = f"{source}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class RangeError(PairCorrError, OverflowError):
    """A value left the supported integer range or hit a guard limit."""


def _require_finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidArgumentError(f"{name} must be finite, got {x}")
    return x


def frac(x: float) -> float:
    """Fractional part ``x - floor(x)``, always in [0, 1)."""
    x = _require_finite(x)
    r = x - math.floor(x)
    # tiny negative inputs round up to exactly 1.0
    return 0.0 if r >= 1.0 else r


def dist_to_nearest_int(x: float) -> float:
    f = frac(x)
    return min(f, 1.0 - f)


def frac_array(x: np.ndarray) -> np.ndarray:
    r = x - np.floor(x)
    r[r >= 1.0] = 0.0
    return r


def torus_deltas(delta: np.ndarray) -> np.ndarray:
    """Coordinatewise distance to the nearest integer of raw differences.

    This is the one formula every pair count goes through; the cell-list
    kernel repeats it operation for operation so both engines agree bitwise.
    """
    f = delta - np.floor(delta)
    return np.minimum(f, 1.0 - f)


@dataclass(frozen=True)
class TorusPoint:
    coords: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) < 1:
            raise InvalidArgumentError("a torus point needs at least one coordinate")
        for c in self.coords:
            if not (0.0 <= c < 1.0):
                raise InvalidArgumentError(f"coordinate {c!r} is outside [0, 1)")

    @property
    def dim(self) -> int:
        return len(self.coords)


def sup_torus_dist(a: TorusPoint, b: TorusPoint) -> float:
    """Sup-norm distance on the torus, in [0, 1/2]."""
    if a.dim != b.dim:
        raise InvalidArgumentError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return max(dist_to_nearest_int(x - y) for x, y in zip(a.coords, b.coords))


@dataclass(frozen=True, eq=False)
class PointSet:
    """An ordered, immutable sequence of torus points of one dimension.

    Args:
        dim: dimension d of every point
        points: array of shape (N, d), coordinates in [0, 1)
        label: free-form provenance string
    """

    dim: int
    points: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidArgumentError(f"dim must be >= 1, got {self.dim}")
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.size == 0:
            pts = pts.reshape(0, self.dim)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise InvalidArgumentError(
                f"points must have shape (N, {self.dim}), got {pts.shape}")
        if pts.size and not (np.all(pts >= 0.0) and np.all(pts < 1.0)):
            raise InvalidArgumentError("every coordinate must lie in [0, 1)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, n: int) -> TorusPoint:
        return TorusPoint(tuple(float(c) for c in self.points[n]))

    def __iter__(self) -> Iterator[TorusPoint]:
        for n in range(len(self)):
            yield self[n]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return (self.dim == other.dim and self.label == other.label
                and np.array_equal(self.points, other.points))

    def prefix(self, n: int) -> "PointSet":
        if not 0 <= n <= len(self):
            raise InvalidArgumentError(f"prefix length {n} outside 0..{len(self)}")
        return PointSet(self.dim, self.points[:n], self.label)

    def translated(self, t: Sequence[float]) -> "PointSet":
        t = np.asarray(t, dtype=np.float64)
        if t.shape != (self.dim,):
            raise InvalidArgumentError(f"translation must have {self.dim} entries")
        return PointSet(self.dim, frac_array(self.points + t), self.label)


def _format_float(x: float) -> str:
    return f"{x:.17g}"


def parse_points(text: str, source: str = "<string>") -> PointSet:
    """Parse the comma-separated point format; '#' starts a comment line."""
    rows = []
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split(',')
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise ValidationError(f"non-numeric field in {line!r}", lineno, source)
        if dim is None:
            dim = len(row)
        elif len(row) != dim:
            raise ValidationError(
                f"expected {dim} coordinates, found {len(row)}", lineno, source)
        for c in row:
            if not (0.0 <= c < 1.0):
                raise ValidationError(f"coordinate {c!r} is outside [0, 1)", lineno, source)
        rows.append(row)
    if dim is None:
        raise ValidationError("no data lines", None, source)
    return PointSet(dim, np.array(rows, dtype=np.float64), label=source)


def read_point_file(path: Union[str, Path]) -> PointSet:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ValidationError(f"cannot read point file: {e.strerror}", None, str(path))
    pts = parse_points(text, source=str(path))
    logger.debug(f"Read {len(pts)} points of dimension {pts.dim} from {path}")
    return pts


def format_points(pts: PointSet, header: Optional[Dict[str, Any]] = None) -> str:
    lines = []
    if header is not None:
        lines.append("# " + json.dumps(header, sort_keys=True))
    for row in pts.points:
        lines.append(",".join(_format_float(float(c)) for c in row))
    return "\n".join(lines) + "\n"


def write_point_file(pts: PointSet, path: Union[str, Path],
                     header: Optional[Dict[str, Any]] = None) -> None:
    Path(path).write_text(format_points(pts, header), encoding='utf-8')

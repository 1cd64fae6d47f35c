"""The pair correlation statistic F_N^(d)(s) on the torus.

Two engines count ordered pairs within sup-norm distance s / N^(1/d): an
all-pairs oracle and a cell-list kernel compiled with numba. Both compute the
distance of each unordered pair once, lower index first, with the formula in
``core.torus_deltas`` and bin it against the sorted thresholds, so their
counts agree exactly.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numba
import numpy as np
from numba import njit, prange

from .config import Settings
from .core import InvalidArgumentError, PointSet, ValidationError, torus_deltas

logger = logging.getLogger(__name__)

# widen cells a hair past r_max so rounding in floor(x * M) never splits a close pair
CELL_MARGIN = 1e-12


@dataclass(frozen=True)
class SGrid:
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(s) for s in self.values)
        if not values:
            raise InvalidArgumentError("the s grid is empty")
        for s in values:
            if not math.isfinite(s) or s < 0.0:
                raise InvalidArgumentError(f"s values must be finite and >= 0, got {s}")
        for lo, hi in zip(values, values[1:]):
            if hi <= lo:
                raise InvalidArgumentError(f"s values must be strictly increasing ({lo} then {hi})")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def parse(cls, text: str) -> "SGrid":
        try:
            return cls(tuple(float(tok) for tok in text.split(',') if tok.strip()))
        except ValueError:
            raise InvalidArgumentError(f"--s must be a comma list of numbers, got {text!r}")


def poisson_reference(s: float, d: int) -> float:
    """(2s)^d, the limit of F_N^(d)(s) for Poissonian sequences."""
    if s < 0:
        raise InvalidArgumentError(f"s must be >= 0, got {s}")
    return (2.0 * s) ** d


@dataclass(frozen=True)
class PairCorrResult:
    N: int
    dim: int
    s_values: SGrid
    counts: Tuple[int, ...]
    f_values: Tuple[float, ...]
    poisson_ref: Tuple[float, ...]
    label: str = ""

    @classmethod
    def from_counts(cls, N: int, dim: int, s_grid: SGrid, counts: Sequence[int],
                    label: str = "") -> "PairCorrResult":
        counts = tuple(int(c) for c in counts)
        return cls(
            N=N, dim=dim, s_values=s_grid, counts=counts,
            f_values=tuple(c / N for c in counts),
            poisson_ref=tuple(poisson_reference(s, dim) for s in s_grid.values),
            label=label,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "dim": self.dim,
            "s_values": list(self.s_values.values),
            "counts": list(self.counts),
            "f_values": list(self.f_values),
            "poisson_ref": list(self.poisson_ref),
            "label": self.label,
        }

    def to_json(self, config: Optional[Dict[str, Any]] = None) -> str:
        payload = self.to_dict()
        if config is not None:
            payload["config"] = config
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PairCorrResult":
        data = json.loads(text)
        return cls.from_counts(data["N"], data["dim"], SGrid(tuple(data["s_values"])),
                               data["counts"], data.get("label", ""))

    def to_csv(self, config: Optional[Dict[str, Any]] = None) -> str:
        meta = {"N": self.N, "dim": self.dim, "label": self.label}
        if config is not None:
            meta["config"] = config
        lines = ["# " + json.dumps(meta, sort_keys=True), "s,count,F,poisson_ref"]
        for s, c, f, p in zip(self.s_values.values, self.counts, self.f_values, self.poisson_ref):
            lines.append(f"{s:.17g},{c},{f:.17g},{p:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PairCorrResult":
        meta = None
        s_values, counts = [], []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith('#'):
                if meta is None:
                    meta = json.loads(line[1:])
                continue
            if line == "s,count,F,poisson_ref":
                continue
            fields = line.split(',')
            if len(fields) != 4:
                raise ValidationError(f"expected 4 fields, found {len(fields)}", lineno)
            s_values.append(float(fields[0]))
            counts.append(int(fields[1]))
        if meta is None:
            raise ValidationError("missing '# {...}' metadata line with N and dim")
        return cls.from_counts(meta["N"], meta["dim"], SGrid(tuple(s_values)), counts,
                               meta.get("label", ""))


def _thresholds(s_grid: SGrid, N: int, d: int) -> np.ndarray:
    return np.asarray(s_grid.values, dtype=np.float64) / (N ** (1.0 / d))


def _check_input(pts: PointSet, s_grid: SGrid) -> None:
    if len(pts) == 0:
        raise InvalidArgumentError("the point set is empty")
    if not isinstance(s_grid, SGrid):
        raise InvalidArgumentError("s_grid must be an SGrid")


def pair_corr_bruteforce(pts: PointSet, s_grid: SGrid) -> PairCorrResult:
    """All-pairs count; the oracle for the cell-list engine."""
    _check_input(pts, s_grid)
    N, d = len(pts), pts.dim
    thresholds = _thresholds(s_grid, N, d)
    r_max = thresholds[-1]
    hist = np.zeros(len(thresholds), dtype=np.int64)
    x = pts.points
    for i in range(N - 1):
        dist = torus_deltas(x[i] - x[i + 1:]).max(axis=1)
        dist = dist[dist <= r_max]
        if dist.size:
            bins = np.searchsorted(thresholds, dist, side='left')
            hist += 2 * np.bincount(bins, minlength=len(thresholds))
    return PairCorrResult.from_counts(N, d, s_grid, np.cumsum(hist), pts.label)


@njit(cache=True)
def _first_bin(thresholds, dist):
    lo = 0
    hi = thresholds.shape[0]
    while lo < hi:
        mid = (lo + hi) // 2
        if thresholds[mid] < dist:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(parallel=True, cache=True)
def _cell_histogram(points, order, cell_start, m, shifts, thresholds, n_chunks):
    n_cells = cell_start.shape[0] - 1
    dim = points.shape[1]
    n_s = thresholds.shape[0]
    r_max = thresholds[n_s - 1]
    n_shift = shifts.shape[0]
    hist = np.zeros((n_chunks, n_s), dtype=np.int64)
    per_chunk = (n_cells + n_chunks - 1) // n_chunks
    for t in prange(n_chunks):
        coords = np.empty(dim, dtype=np.int64)
        c_lo = t * per_chunk
        c_hi = min(n_cells, c_lo + per_chunk)
        for c in range(c_lo, c_hi):
            a_lo = cell_start[c]
            a_hi = cell_start[c + 1]
            if a_lo == a_hi:
                continue
            rem = c
            for k in range(dim):
                coords[k] = rem % m
                rem //= m
            for u in range(n_shift):
                nc = 0
                stride = 1
                for k in range(dim):
                    nc += ((coords[k] + shifts[u, k]) % m) * stride
                    stride *= m
                b_lo = cell_start[nc]
                b_hi = cell_start[nc + 1]
                for a in range(a_lo, a_hi):
                    i = order[a]
                    for b in range(b_lo, b_hi):
                        j = order[b]
                        if j <= i:
                            continue
                        dist = 0.0
                        for k in range(dim):
                            delta = points[i, k] - points[j, k]
                            f = delta - np.floor(delta)
                            g = 1.0 - f
                            if g < f:
                                f = g
                            if f > dist:
                                dist = f
                        if dist <= r_max:
                            hist[t, _first_bin(thresholds, dist)] += 2
    return hist


def cells_per_axis(N: int, d: int, r_max: float) -> int:
    """M = floor(1 / r_max), widened by CELL_MARGIN and capped at floor(N^(1/d))."""
    cap = max(1, int(math.floor(N ** (1.0 / d))))
    width = r_max * (1.0 + CELL_MARGIN)
    if width * cap <= 1.0:
        return cap
    return max(1, min(cap, int(math.floor(1.0 / width))))


def _neighbour_shifts(m: int, d: int) -> np.ndarray:
    # distinct per-axis shifts; for M <= 2 the -1/+1 neighbours coincide
    per_axis = sorted({(-1) % m, 0, 1 % m})
    return np.array(list(itertools.product(per_axis, repeat=d)), dtype=np.int64).reshape(-1, d)


def _apply_threads(threads: Optional[int]) -> None:
    # set on every call: numba keeps the count process-wide, 0 restores its default
    if threads is None:
        threads = Settings.from_env().threads
    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(min(threads, limit) if threads > 0 else limit)


def pair_corr_celllist(pts: PointSet, s_grid: SGrid,
                       threads: Optional[int] = None) -> PairCorrResult:
    """Cell-list count of the same statistic, identical to the oracle.

    Args:
        pts: the point set
        s_grid: increasing s values; the largest fixes the cell size
        threads: worker threads, None reads PAIRCORR_THREADS (0 = numba default)
    """
    _check_input(pts, s_grid)
    N, d = len(pts), pts.dim
    thresholds = _thresholds(s_grid, N, d)
    if N < 2:
        return PairCorrResult.from_counts(N, d, s_grid, [0] * len(thresholds), pts.label)

    m = cells_per_axis(N, d, float(thresholds[-1]))
    idx = np.minimum(np.floor(pts.points * m).astype(np.int64), m - 1)
    strides = m ** np.arange(d, dtype=np.int64)
    cell_id = idx @ strides
    order = np.argsort(cell_id, kind='stable')
    cell_start = np.searchsorted(cell_id[order], np.arange(m ** d + 1, dtype=np.int64))

    _apply_threads(threads)
    n_chunks = max(1, min(m ** d, 8 * numba.get_num_threads()))
    logger.debug(f"Cell list: N={N}, d={d}, M={m}, chunks={n_chunks}")
    hist = _cell_histogram(pts.points, order, cell_start, m, _neighbour_shifts(m, d),
                           thresholds, n_chunks)
    counts = np.cumsum(hist.sum(axis=0))
    return PairCorrResult.from_counts(N, d, s_grid, counts, pts.label)


def pair_correlation(pts: PointSet, s_grid: SGrid, method: str = "auto",
                     threads: Optional[int] = None) -> PairCorrResult:
    if method in ("auto", "celllist"):
        return pair_corr_celllist(pts, s_grid, threads)
    if method == "bruteforce":
        return pair_corr_bruteforce(pts, s_grid)
    raise InvalidArgumentError(f"unknown counting method {method!r}")

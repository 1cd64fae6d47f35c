"""Checks of computed statistics against the closed-form results.

Moments of F for random points, the quadratic lower bound that rules out
Poissonian behaviour for non-equidistributed sequences, the explicit
Kronecker witness, star discrepancy, and convergence sweeps.
"""

import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Settings
from .core import InvalidArgumentError, PointSet, RangeError, ValidationError, torus_deltas
from .energy import EnergyReport, additive_energy
from .generators import (AlphaVector, GeneratorSpec, IntegerSequence, frac_products,
                         gen_an_alpha, gen_kronecker, gen_uniform_iid, random_alphas)
from .paircorr import SGrid, pair_correlation, poisson_reference

logger = logging.getLogger(__name__)

A_SEARCH_LIMIT = 1_000_000
LAG_TOLERANCE = 1e-9
WITNESS_MAX_N = 50_000_000
# cap on K^d cells for the grid discrepancy estimate
DISCREPANCY_MAX_CELLS = 1 << 26
DEFAULT_GRID_K = 64


# Moments of F for i.i.d. uniform points

def expectation_formula(N: int, s: float, d: int) -> float:
    """E F_N^(d)(s) = (N-1)/N (2s)^d for i.i.d. uniform points."""
    if N < 1 or d < 1:
        raise InvalidArgumentError(f"need N >= 1 and d >= 1, got N={N}, d={d}")
    return (N - 1) / N * poisson_reference(s, d)


def chebyshev_bound(N: int, s: float, d: int, eps: float, c: float) -> float:
    """c max(s^d, s^(2d-1)) / (eps^2 N), a bound on P(|F - (2s)^d| >= eps).

    The constant c depends on d and is left to the caller.
    """
    if N < 1 or d < 1 or s <= 0 or eps <= 0 or c <= 0:
        raise InvalidArgumentError(
            f"chebyshev_bound needs positive arguments, got N={N}, s={s}, d={d}, eps={eps}, c={c}")
    return c * max(s ** d, s ** (2 * d - 1)) / (eps * eps * N)


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Independent per-trial seeds spawned from one root seed."""
    return [int(x) for x in np.random.SeedSequence(seed).generate_state(trials)]


def variance_monte_carlo(d: int, N: int, s: float, trials: int, seed: int,
                         method: str = "auto") -> Tuple[float, float]:
    """Sample mean and variance (ddof=1) of F_N^(d)(s) over uniform point sets.

    Args:
        d: dimension
        N: points per trial
        s: scale
        trials: number of independent point sets, at least 2
        seed: root seed; trial k uses the k-th spawned seed
        method: counting engine passed to ``pair_correlation``
    """
    if trials < 2:
        raise InvalidArgumentError(f"trials must be >= 2, got {trials}")
    grid = SGrid((s,))
    values = np.empty(trials, dtype=np.float64)
    for k, trial_seed in enumerate(trial_seeds(seed, trials)):
        pts = gen_uniform_iid(d, N, trial_seed)
        values[k] = pair_correlation(pts, grid, method).f_values[0]
    logger.info(f"Monte Carlo d={d} N={N} s={s}: {trials} trials, mean {values.mean():.6g}")
    return float(values.mean()), float(values.var(ddof=1))


# Lower bound for sequences that are not equidistributed

def _check_eps_lam(eps: float, lam: float, strict: bool = False) -> None:
    if not 0.0 < lam < 1.0:
        raise InvalidArgumentError(f"lambda must lie in (0, 1), got {lam}")
    if eps < 0.0 or (strict and eps == 0.0):
        raise InvalidArgumentError(f"eps must be {'>' if strict else '>='} 0, got {eps}")
    if not (eps < lam and eps < 1.0 - lam):
        raise InvalidArgumentError(
            f"eps must be below min(lambda, 1 - lambda) = {min(lam, 1.0 - lam)}, got {eps}")


def _bin_density_form(eps: float, lam: float) -> float:
    return lam * (1.0 - eps / lam) ** 2 + (1.0 - lam) * (1.0 + eps / (1.0 - lam)) ** 2


def theorem2_lower_bound(eps: float, lam: float, s: int) -> float:
    """R(s) = (4s(s-1)+1) Q(eps, lam) - 1, a lower bound for F_N(s) when a box
    of volume lam holds an eps-deficient share of the points."""
    _check_eps_lam(eps, lam)
    if s < 0 or int(s) != s:
        raise InvalidArgumentError(f"s must be a non-negative integer, got {s}")
    s = int(s)
    return (4 * s * (s - 1) + 1) * _bin_density_form(eps, lam) - 1.0


def theorem2_leading_coeff(eps: float, lam: float) -> float:
    """Leading coefficient of R(s) - (2s)^2 in s; equals 4 eps^2 / (lam (1 - lam))."""
    _check_eps_lam(eps, lam)
    return 4.0 * _bin_density_form(eps, lam) - 4.0


def min_contradicting_s(eps: float, lam: float) -> int:
    """Smallest positive integer s with R(s) > (2s)^2."""
    _check_eps_lam(eps, lam, strict=True)
    q = _bin_density_form(eps, lam)
    if q - 1.0 <= 0.0:
        raise RangeError(f"eps={eps} is too small to separate R from (2s)^2 in double precision")
    root = (q + math.sqrt(2.0 * q - 1.0)) / (2.0 * (q - 1.0))
    if root > 2.0 ** 52:
        raise RangeError(f"the crossing for eps={eps}, lambda={lam} lies beyond 2^52")

    def above(s: int) -> bool:
        return theorem2_lower_bound(eps, lam, s) > 4.0 * s * s

    s = max(1, int(math.floor(root)))
    while not above(s):
        s += 1
    while s > 1 and above(s - 1):
        s -= 1
    return s


# Kronecker witness

@dataclass(frozen=True)
class KroneckerWitness:
    q: int
    theta: float
    A: int
    B: float
    L: int
    nu_tilde: float
    N: int
    lag: int
    pair_count_at_lag: int
    gamma_bound: float
    sandwich_lo: float
    sandwich_hi: float
    rho: float = 1.0
    lag_distance: float = 0.0
    scale: float = 0.0
    lag_pairs_expected: int = 0
    gamma_holds: bool = False
    sandwich_ok: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self, config: Optional[Dict[str, Any]] = None) -> str:
        payload = self.to_dict()
        if config is not None:
            payload["config"] = config
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "KroneckerWitness":
        data = json.loads(text)
        data.pop("config", None)
        return cls(**data)


def _require_plane(alpha: AlphaVector) -> None:
    if alpha.dim != 2:
        raise InvalidArgumentError(f"the witness construction is planar; alpha has {alpha.dim} entries")


def simultaneous_approx_search(alpha: AlphaVector, q_max: int,
                               rho: float = 1.0) -> List[Tuple[int, float]]:
    """Every q <= q_max with 0 < theta < rho, where theta / sqrt(q) = max_i ||q alpha_i||.

    Args:
        alpha: a pair (alpha_1, alpha_2)
        q_max: largest denominator scanned
        rho: acceptance level for theta
    """
    _require_plane(alpha)
    if q_max < 1:
        raise InvalidArgumentError(f"q_max must be >= 1, got {q_max}")
    if rho <= 0:
        raise InvalidArgumentError(f"rho must be > 0, got {rho}")
    q = np.arange(1, q_max + 1, dtype=np.int64)
    worst = np.zeros(q_max, dtype=np.float64)
    for a in alpha.alphas:
        f = frac_products(q, a)
        worst = np.maximum(worst, np.minimum(f, 1.0 - f))
    theta = np.sqrt(q.astype(np.float64)) * worst
    keep = np.nonzero((theta > 0.0) & (theta < rho))[0]
    hits = [(int(q[k]), float(theta[k])) for k in keep]
    if not hits:
        logger.warning(f"No q <= {q_max} with theta < {rho}")
    logger.debug(f"Approximation search found {len(hits)} q values up to {q_max}")
    return hits


def best_approximation(hits: Sequence[Tuple[int, float]]) -> Optional[Tuple[int, float]]:
    """The hit with the smallest theta, ties to the smaller q."""
    if not hits:
        return None
    return min(hits, key=lambda h: (h[1], h[0]))


def _a_condition(a: int, theta: float) -> bool:
    return ((1.0 / (a * theta)) ** (2.0 / 3.0) + 1.0) ** 3 * theta ** 2 < (1.0 + theta ** 2) / 2.0


def minimal_a(theta: float) -> int:
    """Least integer A >= 1 with ((1/(A theta))^(2/3) + 1)^3 theta^2 < (1 + theta^2)/2."""
    if not 0.0 < theta < 1.0:
        raise InvalidArgumentError(f"theta must lie in (0, 1), got {theta}")
    for a in range(1, A_SEARCH_LIMIT + 1):
        if _a_condition(a, theta):
            return a
    raise RangeError(f"no A <= {A_SEARCH_LIMIT} satisfies the condition for theta={theta}")


def witness_gamma(rho: float) -> float:
    """(2/(1+rho^2) - 1) / A_rho^2; 0.0 when rho >= 1 leaves A_rho unbounded."""
    if rho >= 1.0:
        return 0.0
    return (2.0 / (1.0 + rho * rho) - 1.0) / minimal_a(rho) ** 2


def count_lag_pairs(pts: PointSet, lag: int, distance: float,
                    tol: float = LAG_TOLERANCE) -> int:
    """Pairs (x_k, x_{k+lag}) whose sup torus distance is within tol of distance."""
    if lag >= len(pts):
        return 0
    x = pts.points
    dist = torus_deltas(x[:-lag] - x[lag:]).max(axis=1)
    return int(np.count_nonzero(np.abs(dist - distance) <= tol))


def kronecker_witness(alpha: AlphaVector, q: int, theta: float,
                      rho: float = 1.0) -> KroneckerWitness:
    """Build N and the lag qL for which the Kronecker sequence has at least
    N - qL pairs at one common distance L theta / sqrt(q).

    Args:
        alpha: the pair (alpha_1, alpha_2)
        q: denominator from the approximation search
        theta: sqrt(q) max_i ||q alpha_i||, in (0, 1)
        rho: acceptance level used for the gamma constant
    """
    _require_plane(alpha)
    if q < 1:
        raise InvalidArgumentError(f"q must be >= 1, got {q}")
    if not 0.0 < theta < 1.0:
        raise InvalidArgumentError(f"theta must lie in (0, 1), got {theta}")

    A = minimal_a(theta)
    B = 2.0 / (1.0 + theta ** 2)
    L = int(math.ceil((1.0 / (A * theta)) ** (2.0 / 3.0)))
    nu_tilde = A * A * L * q - q / (L * L * theta * theta)
    N = A * A * L * q - int(math.floor(nu_tilde))
    if N > WITNESS_MAX_N:
        raise RangeError(f"witness for q={q} needs N={N} points, above {WITNESS_MAX_N}")
    lag = q * L
    lag_distance = L * theta / math.sqrt(q)

    pts = gen_kronecker(alpha, N)
    pair_count = count_lag_pairs(pts, lag, lag_distance)

    sandwich_lo = 1.0 / math.sqrt(N)
    sandwich_hi = 3.0 / math.sqrt(N)
    slack = 1e-12 * lag_distance
    sandwich_ok = sandwich_lo - slack <= lag_distance <= sandwich_hi + slack
    gamma = witness_gamma(rho)
    expected = N - lag
    witness = KroneckerWitness(
        q=q, theta=theta, A=A, B=B, L=L, nu_tilde=nu_tilde, N=N, lag=lag,
        pair_count_at_lag=pair_count, gamma_bound=gamma,
        sandwich_lo=sandwich_lo, sandwich_hi=sandwich_hi, rho=rho,
        lag_distance=lag_distance, scale=math.sqrt(N) * lag_distance,
        lag_pairs_expected=expected, gamma_holds=expected >= gamma * N,
        sandwich_ok=sandwich_ok,
    )
    if not sandwich_ok:
        logger.warning(f"Witness q={q}: lag distance {lag_distance:.6g} outside "
                       f"[{sandwich_lo:.6g}, {sandwich_hi:.6g}]")
    if pair_count < expected:
        logger.warning(f"Witness q={q}: only {pair_count} of {expected} lag pairs hit the target distance")
    logger.info(f"✅ Witness q={q}: N={N}, lag={lag}, {pair_count} pairs at distance {lag_distance:.6g}")
    return witness


def witness_pair_excess(witness: KroneckerWitness, alpha: AlphaVector,
                        delta: float, method: str = "auto") -> Tuple[float, float, float]:
    """F at s_hi = sqrt(N) L theta / sqrt(q) and at s_hi - delta, and their difference.

    The lag pairs sit exactly at s_hi, so the difference is at least 2(N - qL)/N.
    s_hi is nudged up by one part in 1e9 so rounding in s / sqrt(N) keeps them inside.
    """
    if not 0.0 < delta < witness.scale:
        raise InvalidArgumentError(f"delta must lie in (0, {witness.scale}), got {delta}")
    pts = gen_kronecker(alpha, witness.N)
    s_hi = witness.scale * (1.0 + 1e-9)
    result = pair_correlation(pts, SGrid((witness.scale - delta, s_hi)), method)
    f_lo, f_hi = result.f_values
    return f_lo, f_hi, f_hi - f_lo


def witness_window(witness: KroneckerWitness, gamma: float) -> Tuple[int, float, float]:
    """The integer a with 1 + a gamma/100 <= scale <= 1 + (a+1) gamma/100, and that window."""
    if gamma <= 0:
        raise InvalidArgumentError(f"gamma must be > 0, got {gamma}")
    if witness.scale < 1.0:
        raise InvalidArgumentError(f"witness scale {witness.scale} is below 1; the sandwich failed")
    step = gamma / 100.0
    a = int(math.floor((witness.scale - 1.0) / step))
    return a, 1.0 + a * step, 1.0 + (a + 1) * step


# Equidistribution

def star_discrepancy_exact_1d(pts: PointSet) -> float:
    if pts.dim != 1 or len(pts) == 0:
        raise InvalidArgumentError("the exact formula needs a non-empty one-dimensional point set")
    x = np.sort(pts.points[:, 0])
    n = x.shape[0]
    i = np.arange(1, n + 1, dtype=np.float64)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def star_discrepancy_estimate(pts: PointSet, grid_K: int = DEFAULT_GRID_K) -> float:
    """Largest |fraction - volume| over anchored boxes with corners on a K-grid.

    In one dimension the exact star discrepancy is returned instead.
    """
    if len(pts) == 0:
        raise InvalidArgumentError("the point set is empty")
    if grid_K < 2:
        raise InvalidArgumentError(f"grid_K must be >= 2, got {grid_K}")
    if pts.dim == 1:
        return star_discrepancy_exact_1d(pts)
    d = pts.dim
    if grid_K ** d > DISCREPANCY_MAX_CELLS:
        raise InvalidArgumentError(f"grid_K={grid_K} gives {grid_K ** d} cells in d={d}; lower --grid-k")
    idx = np.minimum(np.floor(pts.points * grid_K).astype(np.int64), grid_K - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (grid_K,) * d)
    counts = np.bincount(flat, minlength=grid_K ** d).reshape((grid_K,) * d)
    for axis in range(d):
        counts = np.cumsum(counts, axis=axis)
    edges = np.arange(1, grid_K + 1, dtype=np.float64) / grid_K
    volume = edges
    for _ in range(d - 1):
        volume = np.multiply.outer(volume, edges)
    return float(np.max(np.abs(counts / len(pts) - volume)))


def box_deviation(pts: PointSet, upper: Sequence[float]) -> float:
    """Signed share of points in [0, u_1) x ... x [0, u_d) minus its volume."""
    u = np.asarray(upper, dtype=np.float64)
    if u.shape != (pts.dim,) or np.any(u <= 0.0) or np.any(u > 1.0):
        raise InvalidArgumentError(f"upper corner must have {pts.dim} entries in (0, 1]")
    if len(pts) == 0:
        raise InvalidArgumentError("the point set is empty")
    inside = np.all(pts.points < u, axis=1)
    return float(np.count_nonzero(inside) / len(pts) - np.prod(u))


def _ceil_root(N: int, d: int) -> int:
    n = max(1, int(round(N ** (1.0 / d))))
    while n ** d < N:
        n += 1
    while n > 1 and (n - 1) ** d >= N:
        n -= 1
    return n


def binned_pair_lower_bound(pts: PointSet, s: int) -> int:
    """Ordered pairs certified within s / N^(1/d) by cell occupancy alone.

    The torus is cut into n^d cells, n = ceil(N^(1/d)). With A the counts and B
    the counts summed over the positive half of the offsets in {-(s-1)..s-1}^d,
    returns sum A(A-1) + 2AB, which never exceeds N F_N^(d)(s).
    """
    if s < 1 or int(s) != s:
        raise InvalidArgumentError(f"s must be a positive integer, got {s}")
    N, d = len(pts), pts.dim
    if N == 0:
        raise InvalidArgumentError("the point set is empty")
    n = _ceil_root(N, d)
    if 2 * s - 1 > n:
        raise InvalidArgumentError(f"need 2s-1 <= n = {n} cells per axis, got s={s}")
    idx = np.minimum(np.floor(pts.points * n).astype(np.int64), n - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (n,) * d)
    occupancy = np.bincount(flat, minlength=n ** d).reshape((n,) * d)

    neighbours = np.zeros_like(occupancy)
    for offset in itertools.product(range(-(s - 1), s), repeat=d):
        first = next((o for o in offset if o != 0), 0)
        if first > 0:
            neighbours += np.roll(occupancy, shift=tuple(-o for o in offset), axis=tuple(range(d)))
    return int(np.sum(occupancy * (occupancy - 1)) + 2 * np.sum(occupancy * neighbours))


# Sweeps

SWEEP_HEADER = "N,s,F,poisson_ref,abs_dev"


@dataclass(frozen=True)
class ConvergenceSweep:
    s_values: SGrid
    n_values: Tuple[int, ...]
    table: Tuple[Tuple[float, ...], ...]
    deviations: Tuple[Tuple[float, ...], ...]
    dim: int = 1
    label: str = ""

    def __post_init__(self):
        rows, cols = len(self.n_values), len(self.s_values)
        for name, matrix in (("table", self.table), ("deviations", self.deviations)):
            if len(matrix) != rows or any(len(r) != cols for r in matrix):
                raise InvalidArgumentError(f"{name} must be {rows} x {cols}")

    def max_deviation(self, min_n: int = 1) -> float:
        """Largest |F - (2s)^d| over the rows with N >= min_n."""
        rows = [dev for n, dev in zip(self.n_values, self.deviations) if n >= min_n]
        if not rows:
            raise InvalidArgumentError(f"no sweep size reaches N >= {min_n}")
        return max(max(row) for row in rows)

    def to_json(self, config: Optional[Dict[str, Any]] = None) -> str:
        payload: Dict[str, Any] = {
            "dim": self.dim,
            "label": self.label,
            "n_values": list(self.n_values),
            "s_values": list(self.s_values.values),
            "table": [list(row) for row in self.table],
            "deviations": [list(row) for row in self.deviations],
        }
        if config is not None:
            payload["config"] = config
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_csv(self, config: Optional[Dict[str, Any]] = None) -> str:
        meta = {"dim": self.dim, "label": self.label}
        if config is not None:
            meta["config"] = config
        lines = ["# " + json.dumps(meta, sort_keys=True), SWEEP_HEADER]
        for n, row, dev in zip(self.n_values, self.table, self.deviations):
            for s, f, e in zip(self.s_values.values, row, dev):
                lines.append(f"{n},{s:.17g},{f:.17g},{poisson_reference(s, self.dim):.17g},{e:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ConvergenceSweep":
        meta = None
        rows: Dict[int, Dict[float, Tuple[float, float]]] = {}
        s_seen: List[float] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line == SWEEP_HEADER:
                continue
            if line.startswith('#'):
                if meta is None:
                    meta = json.loads(line[1:])
                continue
            fields = line.split(',')
            if len(fields) != 5:
                raise ValidationError(f"expected 5 fields, found {len(fields)}", lineno)
            try:
                n, s, f, e = int(fields[0]), float(fields[1]), float(fields[2]), float(fields[4])
            except ValueError:
                raise ValidationError(f"non-numeric field in {line!r}", lineno)
            if s not in s_seen:
                s_seen.append(s)
            rows.setdefault(n, {})[s] = (f, e)
        if meta is None:
            raise ValidationError("missing '# {...}' metadata line")
        n_values = tuple(rows)
        return cls(
            s_values=SGrid(tuple(s_seen)),
            n_values=n_values,
            table=tuple(tuple(rows[n][s][0] for s in s_seen) for n in n_values),
            deviations=tuple(tuple(rows[n][s][1] for s in s_seen) for n in n_values),
            dim=meta["dim"], label=meta.get("label", ""),
        )


def subsequence_schedule(n_max: int, gamma: float = 0.1, points: int = 12) -> List[int]:
    """Sizes round(M^(1+gamma)) for M log-spaced up to n_max^(1/(1+gamma))."""
    if n_max < 2:
        raise InvalidArgumentError(f"n_max must be >= 2, got {n_max}")
    if gamma <= 0 or points < 1:
        raise InvalidArgumentError(f"need gamma > 0 and points >= 1, got {gamma}, {points}")
    m_max = n_max ** (1.0 / (1.0 + gamma))
    sizes = np.rint(np.geomspace(1.0, m_max, points) ** (1.0 + gamma)).astype(np.int64)
    sizes = np.clip(sizes, 2, n_max)
    return sorted(set(int(n) for n in sizes))


def _check_sizes(n_values: Sequence[int]) -> Tuple[int, ...]:
    sizes = tuple(int(n) for n in n_values)
    if not sizes or sizes[0] < 1:
        raise InvalidArgumentError("n_values must be a non-empty list of positive sizes")
    for lo, hi in zip(sizes, sizes[1:]):
        if hi <= lo:
            raise InvalidArgumentError(f"n_values must be strictly increasing ({lo} then {hi})")
    return sizes


def convergence_sweep(spec: GeneratorSpec, s_grid: SGrid,
                      n_values: Optional[Sequence[int]] = None, n_max: int = 100_000,
                      gamma: float = 0.1, method: str = "auto",
                      threads: Optional[int] = None) -> ConvergenceSweep:
    """F_N(s) on prefixes of one generated sequence.

    Args:
        spec: generator of the sequence (dimension and seed included)
        s_grid: scales evaluated at every N
        n_values: prefix sizes; defaults to ``subsequence_schedule(n_max, gamma)``
        n_max: largest size of the default schedule
        gamma: exponent of the default schedule
        method: counting engine
        threads: worker threads for the cell-list engine
    """
    sizes = _check_sizes(n_values if n_values is not None else subsequence_schedule(n_max, gamma))
    pts = spec.build(sizes[-1])
    ref = [poisson_reference(s, spec.dim) for s in s_grid.values]
    table, deviations = [], []
    for n in sizes:
        result = pair_correlation(pts.prefix(n), s_grid, method, threads)
        table.append(tuple(result.f_values))
        deviations.append(tuple(abs(f - p) for f, p in zip(result.f_values, ref)))
        logger.info(f"Sweep {pts.label}: N={n} done")
    return ConvergenceSweep(s_values=s_grid, n_values=sizes, table=tuple(table),
                            deviations=tuple(deviations), dim=spec.dim, label=pts.label)


def interpolation_bounds(pts: PointSet, n: int, n_lo: int, n_hi: int,
                         s: float, method: str = "auto") -> Tuple[int, int, int]:
    """Ordered-pair counts n_lo F_{n_lo}(s n_lo/n_hi) <= n F_n(s) <= n_hi F_{n_hi}(s n_hi/n_lo)."""
    if not 1 <= n_lo <= n <= n_hi <= len(pts):
        raise InvalidArgumentError(f"need 1 <= n_lo <= n <= n_hi <= {len(pts)}, got {n_lo}, {n}, {n_hi}")
    if s <= 0:
        raise InvalidArgumentError(f"s must be > 0, got {s}")

    def count(size: int, scale: float) -> int:
        return pair_correlation(pts.prefix(size), SGrid((scale,)), method).counts[0]

    return count(n_lo, s * n_lo / n_hi), count(n, s), count(n_hi, s * n_hi / n_lo)


@dataclass(frozen=True)
class MetricExperiment:
    """F over random alphas for ({a_n alpha}), next to the energy of A_N."""

    alphas: Tuple[AlphaVector, ...]
    s_values: SGrid
    table: Tuple[Tuple[float, ...], ...]
    mean_abs_dev: Tuple[float, ...]
    energy: EnergyReport = field(repr=False)
    N: int = 0
    dim: int = 1
    label: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "dim": self.dim,
            "label": self.label,
            "s_values": list(self.s_values.values),
            "alphas": [list(a.alphas) for a in self.alphas],
            "table": [list(row) for row in self.table],
            "mean_abs_dev": list(self.mean_abs_dev),
            "energy": self.energy.to_dict(),
        }

    def to_json(self, config: Optional[Dict[str, Any]] = None) -> str:
        payload = self.to_dict()
        if config is not None:
            payload["config"] = config
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def metric_pair_correlation(a: IntegerSequence, d: int, N: int, s_grid: SGrid,
                            samples: int, seed: int, method: str = "auto",
                            settings: Optional[Settings] = None) -> MetricExperiment:
    """Sample alpha uniformly and record F_N(s) of ({a_n alpha}) for each sample."""
    if samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {samples}")
    alphas = random_alphas(d, samples, seed)
    ref = np.array([poisson_reference(s, d) for s in s_grid.values])
    rows = []
    for alpha in alphas:
        rows.append(pair_correlation(gen_an_alpha(a, alpha, N), s_grid, method).f_values)
    table = np.array(rows, dtype=np.float64)
    report = additive_energy(a, N, settings)
    logger.info(f"Metric experiment {a.label}: N={N}, {samples} samples, E/N^3={report.normalized:.4g}")
    return MetricExperiment(
        alphas=tuple(alphas), s_values=s_grid,
        table=tuple(tuple(float(v) for v in row) for row in table),
        mean_abs_dev=tuple(float(v) for v in np.mean(np.abs(table - ref), axis=0)),
        energy=report, N=N, dim=d, label=a.label,
    )

"""Additive energy and the representation function of integer sets."""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Settings
from .core import InvalidArgumentError, RangeError
from .generators import INT64_MAX, IntegerSequence

logger = logging.getLogger(__name__)

# rows of the pair table processed per numpy pass
_CHUNK_PAIRS = 1 << 22
TOP_REPRESENTATIONS = 100


class EnergyRegime(str, Enum):
    MAXIMAL_ORDER = "maximal_order"
    SUBCRITICAL = "subcritical"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class RegimeThresholds:
    """maximal_order if E/N^3 >= tau_max; subcritical if E <= kappa N^3 / (log N)^c."""

    tau_max: float = 0.1
    kappa: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.tau_max > 0 and self.kappa > 0 and self.c > 0):
            raise InvalidArgumentError(f"regime thresholds must be positive: {self}")

    def to_dict(self) -> Dict[str, float]:
        return {"tau_max": self.tau_max, "kappa": self.kappa, "c": self.c}


@dataclass(frozen=True)
class EnergyReport:
    N: int
    energy: int
    normalized: float
    rep_function: Dict[int, int] = field(repr=False)

    def top_representations(self, limit: int = TOP_REPRESENTATIONS) -> List[Tuple[int, int]]:
        ranked = sorted(self.rep_function.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked[:limit]

    def to_dict(self, thresholds: Optional[RegimeThresholds] = None) -> Dict[str, Any]:
        thresholds = thresholds or RegimeThresholds()
        return {
            "N": self.N,
            "energy": self.energy,
            "normalized": self.normalized,
            "regime": energy_regime(self, thresholds).value,
            "thresholds": thresholds.to_dict(),
            "top_representations": [[v, r] for v, r in self.top_representations()],
        }

    def to_json(self, thresholds: Optional[RegimeThresholds] = None,
                config: Optional[Dict[str, Any]] = None) -> str:
        payload = self.to_dict(thresholds)
        if config is not None:
            payload["config"] = config
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _terms(a: IntegerSequence, N: int) -> np.ndarray:
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    return a.prefix(N)


def _pair_multiset(terms: np.ndarray, op: str) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct values and multiplicities of a_j - a_i or a_i + a_j over i < j."""
    n = terms.shape[0]
    values: List[np.ndarray] = []
    counts: List[np.ndarray] = []
    rows_per_chunk = max(1, _CHUNK_PAIRS // max(n, 1))
    for i0 in range(0, n - 1, rows_per_chunk):
        i1 = min(n - 1, i0 + rows_per_chunk)
        parts = []
        for i in range(i0, i1):
            if op == "diff":
                parts.append(terms[i + 1:] - terms[i])
            else:
                parts.append(terms[i + 1:] + terms[i])
        v, c = np.unique(np.concatenate(parts), return_counts=True)
        values.append(v)
        counts.append(c)
    if not values:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    v_all = np.concatenate(values)
    c_all = np.concatenate(counts)
    v, inverse = np.unique(v_all, return_inverse=True)
    c = np.bincount(inverse.reshape(-1), weights=c_all, minlength=v.shape[0])
    return v, np.rint(c).astype(np.int64)


def _sum_of_squares(counts: np.ndarray) -> int:
    if counts.size == 0:
        return 0
    peak = int(counts.max())
    if peak * peak * counts.size <= INT64_MAX:
        return int(np.dot(counts, counts))
    return sum(int(c) * int(c) for c in counts)


def representation_function(a: IntegerSequence, N: int) -> Dict[int, int]:
    """r_N(v) = #{k != l : a_k - a_l = v} for every v with a nonzero count."""
    terms = _terms(a, N)
    if N > 1 and int(terms[-1]) - int(terms[0]) > INT64_MAX:
        raise RangeError("differences of the sequence exceed the signed 64-bit range")
    v, c = _pair_multiset(terms, "diff")
    rep: Dict[int, int] = {}
    for value, count in zip(v.tolist(), c.tolist()):
        rep[value] = count
        rep[-value] = count
    return rep


def _energy_from_sums(terms: np.ndarray) -> int:
    v, c = _pair_multiset(terms, "sum")
    # ordered pairs: off-diagonal sums count twice, the diagonal 2a once
    diag = 2 * terms
    keys = np.concatenate([v, diag])
    weights = np.concatenate([2 * c, np.ones(diag.shape[0], dtype=np.int64)])
    uniq, inverse = np.unique(keys, return_inverse=True)
    reps = np.rint(np.bincount(inverse.reshape(-1), weights=weights,
                               minlength=uniq.shape[0])).astype(np.int64)
    return _sum_of_squares(reps)


def additive_energy(a: IntegerSequence, N: int,
                    settings: Optional[Settings] = None) -> EnergyReport:
    """E(A_N) by the sum multiset, cross-checked against N^2 + sum r_N(v)^2.

    Args:
        a: the integer sequence
        N: prefix length
        settings: supplies the desk cap on N (PAIRCORR_ENERGY_MAX_N)
    """
    settings = settings or Settings.from_env()
    if N > settings.energy_max_n:
        raise RangeError(f"N={N} exceeds the energy cap {settings.energy_max_n}")
    terms = _terms(a, N)
    if max(abs(int(terms[0])), abs(int(terms[-1]))) > INT64_MAX // 2:
        raise RangeError("pairwise sums of the sequence exceed the signed 64-bit range")

    energy = _energy_from_sums(terms)
    rep = representation_function(a, N)
    by_differences = N * N + _sum_of_squares(np.fromiter(rep.values(), dtype=np.int64, count=len(rep)))
    if energy != by_differences:
        raise RuntimeError(
            f"energy paths disagree for {a.label}: sums give {energy}, differences give {by_differences}")
    logger.debug(f"E(A_{N}) = {energy} for {a.label}")
    return EnergyReport(N=N, energy=energy, normalized=energy / N ** 3, rep_function=rep)


def energy_regime(report: EnergyReport,
                  thresholds: Optional[RegimeThresholds] = None) -> EnergyRegime:
    thresholds = thresholds or RegimeThresholds()
    N = report.N
    if N < 3:
        return EnergyRegime.INDETERMINATE
    if report.normalized >= thresholds.tau_max:
        return EnergyRegime.MAXIMAL_ORDER
    if report.energy <= thresholds.kappa * N ** 3 / math.log(N) ** thresholds.c:
        return EnergyRegime.SUBCRITICAL
    return EnergyRegime.INDETERMINATE


def energy_by_quadruples(terms: Sequence[int]) -> int:
    """Count (a, b, c, d) in A^4 with a + b = c + d directly; for small sets only."""
    terms = np.asarray(terms, dtype=np.int64)
    if terms.shape[0] > 40:
        raise InvalidArgumentError("quadruple enumeration is limited to 40 elements")
    sums = (terms[:, None] + terms[None, :]).ravel()
    return int(np.count_nonzero(sums[:, None] == sums[None, :]))


def is_sidon(terms: Sequence[int]) -> bool:
    terms = np.asarray(terms, dtype=np.int64)
    diffs = (terms[None, :] - terms[:, None])[np.triu_indices(terms.shape[0], k=1)]
    return np.unique(diffs).shape[0] == diffs.shape[0]


def greedy_sidon_set(n: int, start: int = 1) -> IntegerSequence:
    """Greedy Sidon set: each new element keeps all differences distinct."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    elems = [start]
    diffs = set()
    candidate = start
    while len(elems) < n:
        candidate += 1
        new = [candidate - e for e in elems]
        if not any(d in diffs for d in new):
            diffs.update(new)
            elems.append(candidate)
    return IntegerSequence(np.array(elems, dtype=np.int64), label=f"sidon(n={n}, start={start})")

"""Sequence families on the torus.

Random points, Kronecker sequences, ({a_n alpha}) over integer sequences,
polynomial sequences and the Halton comparison family.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import qmc

from .core import (InvalidArgumentError, PointSet, RangeError, ValidationError,
                   frac)

logger = logging.getLogger(__name__)

INT64_MAX = np.iinfo(np.int64).max

ALPHA_TOKENS = {
    "sqrt2": math.sqrt(2.0),
    "sqrt3": math.sqrt(3.0),
    "sqrt5": math.sqrt(5.0),
    "phi": (1.0 + math.sqrt(5.0)) / 2.0,
}


class SequenceFamily(str, Enum):
    IDENTITY = "identity"
    SQUARES = "squares"
    CUBES = "cubes"
    PRIMES = "primes"
    LACUNARY_BASE2 = "lacunary_base2"
    FILE = "file"


@dataclass(frozen=True)
class AlphaVector:
    alphas: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(a) for a in self.alphas)
        if not values:
            raise InvalidArgumentError("alpha needs at least one entry")
        for a in values:
            if not math.isfinite(a):
                raise InvalidArgumentError(f"alpha entries must be finite, got {a}")
        object.__setattr__(self, "alphas", values)

    @property
    def dim(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True, eq=False)
class IntegerSequence:
    """Strictly increasing signed 64-bit integers a_1 < a_2 < ..."""

    terms: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        try:
            terms = np.array(self.terms, dtype=np.int64)
        except OverflowError:
            raise RangeError(f"{self.label or 'sequence'}: terms exceed the signed 64-bit range")
        terms = terms.reshape(-1)
        if terms.size > 1:
            bad = np.nonzero(np.diff(terms) <= 0)[0]
            if bad.size:
                k = int(bad[0]) + 2
                raise ValidationError(
                    f"terms must be strictly increasing; a_{k}={terms[k - 1]} "
                    f"does not exceed a_{k - 1}={terms[k - 2]}")
        terms.setflags(write=False)
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return self.terms.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntegerSequence):
            return NotImplemented
        return np.array_equal(self.terms, other.terms)

    def prefix(self, n: int) -> np.ndarray:
        if n > len(self):
            raise InvalidArgumentError(
                f"requested N={n} but {self.label or 'the sequence'} has only "
                f"{len(self)} terms (short by {n - len(self)})")
        return self.terms[:n]


def _dyadic(alpha: float) -> Tuple[int, int]:
    """Write frac(alpha) as m / 2**K with m odd (or m = 0)."""
    a = frac(alpha)
    if a == 0.0:
        return 0, 0
    mant, exp = math.frexp(a)
    m = int(mant * (1 << 53))
    k = 53 - exp
    while m % 2 == 0:
        m //= 2
        k -= 1
    return m, k


def frac_products(terms: np.ndarray, alpha: float) -> np.ndarray:
    """frac(a_n * alpha) for every term, exact for the double value of alpha.

    With alpha = m / 2**K the fractional part is ((a_n * m) mod 2**K) / 2**K.
    For K <= 64 the residue comes out of wrapping uint64 arithmetic; smaller
    alphas fall back to Python integers.
    """
    terms = np.asarray(terms, dtype=np.int64)
    m, k = _dyadic(alpha)
    if m == 0:
        return np.zeros(terms.shape[0], dtype=np.float64)
    if k <= 64:
        mask = np.uint64((1 << k) - 1)
        residue = (terms.view(np.uint64) * np.uint64(m)) & mask
        out = residue.astype(np.float64) * math.ldexp(1.0, -k)
    else:
        modulus = 1 << k
        out = np.array([math.ldexp(float((int(a) * m) % modulus), -k) for a in terms],
                       dtype=np.float64)
    out[out >= 1.0] = 0.0
    return out


def _an_alpha_points(terms: np.ndarray, alpha: AlphaVector, label: str) -> PointSet:
    cols = [frac_products(terms, a) for a in alpha.alphas]
    pts = np.column_stack(cols) if cols else np.zeros((len(terms), 0))
    return PointSet(alpha.dim, pts.reshape(len(terms), alpha.dim), label)


def gen_uniform_iid(d: int, N: int, seed: int) -> PointSet:
    """N i.i.d. uniform points of [0,1)^d from numpy's PCG64 generator.

    Args:
        d: dimension
        N: number of points
        seed: seed for ``numpy.random.default_rng``; identical seeds give identical sets
    """
    if d < 1 or N < 1:
        raise InvalidArgumentError(f"need d >= 1 and N >= 1, got d={d}, N={N}")
    rng = np.random.default_rng(seed)
    return PointSet(d, rng.random((N, d)), label=f"uniform(d={d}, seed={seed})")


def random_alphas(d: int, count: int, seed: int) -> List[AlphaVector]:
    rng = np.random.default_rng(seed)
    return [AlphaVector(tuple(row)) for row in rng.random((count, d))]


def gen_kronecker(alpha: AlphaVector, N: int) -> PointSet:
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    terms = np.arange(1, N + 1, dtype=np.int64)
    return _an_alpha_points(terms, alpha, label=f"kronecker(alpha={list(alpha.alphas)})")


def gen_an_alpha(a: IntegerSequence, alpha: AlphaVector, N: int) -> PointSet:
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    return _an_alpha_points(a.prefix(N), alpha,
                            label=f"an_alpha({a.label}, alpha={list(alpha.alphas)})")


def nth_prime_bound(n: int) -> int:
    """Upper bound for the n-th prime: n(ln n + ln ln n) for n >= 6."""
    if n < 6:
        return 13
    return int(math.ceil(n * (math.log(n) + math.log(math.log(n)))))


def first_primes(n: int) -> np.ndarray:
    limit = nth_prime_bound(n)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.nonzero(is_prime)[0][:n].astype(np.int64)


def read_integer_file(path: Union[str, Path]) -> IntegerSequence:
    """One non-negative integer per line, strictly increasing, '#' comments."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ValidationError(f"cannot read integer file: {e.strerror}", None, str(path))
    values: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        try:
            v = int(line)
        except ValueError:
            raise ValidationError(f"not an integer: {line!r}", lineno, str(path))
        if v < 0:
            raise ValidationError(f"negative entry {v}", lineno, str(path))
        if v > INT64_MAX:
            raise RangeError(f"{path}:{lineno}: {v} exceeds the signed 64-bit range")
        if values and v <= values[-1]:
            kind = "duplicate" if v == values[-1] else "non-increasing"
            raise ValidationError(f"{kind} entry {v} after {values[-1]}", lineno, str(path))
        values.append(v)
    return IntegerSequence(np.array(values, dtype=np.int64), label=str(path))


def make_integer_sequence(family: Union[SequenceFamily, str], N: int,
                          source: Optional[Union[str, Path]] = None) -> IntegerSequence:
    """First N terms of a named integer family.

    Args:
        family: identity, squares, cubes, primes, lacunary_base2 or file
        N: number of terms
        source: integer file, required for the file family
    """
    family = SequenceFamily(family)
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    n = np.arange(1, N + 1, dtype=np.int64)
    if family is SequenceFamily.IDENTITY:
        terms = n
    elif family is SequenceFamily.SQUARES:
        if N > math.isqrt(INT64_MAX):
            raise RangeError(f"squares overflow 64 bits for N={N}")
        terms = n * n
    elif family is SequenceFamily.CUBES:
        if N ** 3 > INT64_MAX:
            raise RangeError(f"cubes overflow 64 bits for N={N}")
        terms = n * n * n
    elif family is SequenceFamily.PRIMES:
        terms = first_primes(N)
    elif family is SequenceFamily.LACUNARY_BASE2:
        if N > 62:
            raise RangeError(f"2**{N} overflows signed 64 bits (lacunary_base2 allows N <= 62)")
        terms = np.left_shift(np.int64(1), n)
    else:
        if source is None:
            raise InvalidArgumentError("the file family needs a source path")
        seq = read_integer_file(source)
        return IntegerSequence(seq.prefix(N), label=seq.label)
    return IntegerSequence(terms, label=family.value)


def _poly_value(coeffs: Sequence[int], n: int) -> int:
    value = 0
    for c in coeffs:
        value = value * n + c
    return value


def gen_polynomial_alpha(coeffs: Sequence[int], alpha: AlphaVector, N: int) -> PointSet:
    """({f(n) alpha}) for an integer polynomial f, coefficients highest degree first."""
    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if len(coeffs) < 3:
        raise InvalidArgumentError(f"need a polynomial of degree >= 2, got coefficients {coeffs}")
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}")
    values = [_poly_value(coeffs, n) for n in range(1, N + 1)]
    for k in range(1, N):
        if values[k] <= values[k - 1]:
            raise ValidationError(
                f"f is not strictly increasing on 1..{N}: f({k + 1})={values[k]} <= f({k})={values[k - 1]}")
    if max(abs(values[0]), abs(values[-1])) > INT64_MAX:
        raise RangeError(f"f(n) leaves the signed 64-bit range before n={N}")
    seq = IntegerSequence(np.array(values, dtype=np.int64), label=f"poly{tuple(coeffs)}")
    return gen_an_alpha(seq, alpha, N)


def gen_halton(d: int, N: int) -> PointSet:
    """Unscrambled Halton points n = 1..N in the first d prime bases."""
    if d < 1 or N < 1:
        raise InvalidArgumentError(f"need d >= 1 and N >= 1, got d={d}, N={N}")
    sampler = qmc.Halton(d=d, scramble=False)
    sampler.fast_forward(1)
    return PointSet(d, sampler.random(N), label=f"halton(d={d})")


def parse_alpha(token: str) -> float:
    token = token.strip()
    if token.lower() in ALPHA_TOKENS:
        return ALPHA_TOKENS[token.lower()]
    try:
        value = float(token)
    except ValueError:
        raise InvalidArgumentError(
            f"alpha must be a decimal or one of {sorted(ALPHA_TOKENS)}, got {token!r}")
    if not math.isfinite(value):
        raise InvalidArgumentError(f"alpha must be finite, got {token!r}")
    return value


class GeneratorKind(str, Enum):
    UNIFORM = "uniform"
    KRONECKER = "kronecker"
    AN_ALPHA = "an_alpha"
    POLY = "poly"
    HALTON = "halton"


@dataclass(frozen=True)
class GeneratorSpec:
    """Everything needed to rebuild a generated point set of any length."""

    kind: GeneratorKind
    dim: int
    seed: int = 0
    alpha: Optional[AlphaVector] = None
    family: Optional[SequenceFamily] = None
    coeffs: Tuple[int, ...] = ()
    source: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        if self.family is not None:
            object.__setattr__(self, "family", SequenceFamily(self.family))
        if self.dim < 1:
            raise InvalidArgumentError(f"dim must be >= 1, got {self.dim}")
        if self.kind in (GeneratorKind.KRONECKER, GeneratorKind.AN_ALPHA, GeneratorKind.POLY):
            if self.alpha is None:
                raise InvalidArgumentError(f"generator {self.kind.value} needs --alpha")
            if self.alpha.dim != self.dim:
                raise InvalidArgumentError(
                    f"alpha has {self.alpha.dim} entries but dim is {self.dim}")
        if self.kind is GeneratorKind.AN_ALPHA and self.family is None:
            raise InvalidArgumentError("generator an_alpha needs --family")
        if self.kind is GeneratorKind.POLY and not self.coeffs:
            raise InvalidArgumentError("generator poly needs --poly-coeffs")

    def build(self, N: int) -> PointSet:
        logger.debug(f"Generating {N} points with {self.kind.value}")
        if self.kind is GeneratorKind.UNIFORM:
            return gen_uniform_iid(self.dim, N, self.seed)
        if self.kind is GeneratorKind.KRONECKER:
            return gen_kronecker(self.alpha, N)
        if self.kind is GeneratorKind.AN_ALPHA:
            seq = make_integer_sequence(self.family, N, self.source)
            return gen_an_alpha(seq, self.alpha, N)
        if self.kind is GeneratorKind.POLY:
            return gen_polynomial_alpha(self.coeffs, self.alpha, N)
        return gen_halton(self.dim, N)

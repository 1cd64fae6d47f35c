"""Pair correlation statistics of sequences on the d-dimensional torus."""

__version__ = "1.0.0"

from .core import (InvalidArgumentError, PairCorrError, PointSet, RangeError,  # noqa: E402
                   TorusPoint, ValidationError, frac, sup_torus_dist)
from .generators import (AlphaVector, GeneratorSpec, IntegerSequence, gen_an_alpha,  # noqa: E402
                         gen_halton, gen_kronecker, gen_polynomial_alpha, gen_uniform_iid,
                         make_integer_sequence)
from .paircorr import (PairCorrResult, SGrid, pair_corr_bruteforce, pair_corr_celllist,  # noqa: E402
                       pair_correlation)
from .energy import EnergyReport, additive_energy, energy_regime, representation_function  # noqa: E402

__all__ = [
    "AlphaVector",
    "EnergyReport",
    "GeneratorSpec",
    "IntegerSequence",
    "InvalidArgumentError",
    "PairCorrError",
    "PairCorrResult",
    "PointSet",
    "RangeError",
    "SGrid",
    "TorusPoint",
    "ValidationError",
    "additive_energy",
    "energy_regime",
    "frac",
    "gen_an_alpha",
    "gen_halton",
    "gen_kronecker",
    "gen_polynomial_alpha",
    "gen_uniform_iid",
    "make_integer_sequence",
    "pair_corr_bruteforce",
    "pair_corr_celllist",
    "pair_correlation",
    "representation_function",
    "sup_torus_dist",
]

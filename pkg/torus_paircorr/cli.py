#!/usr/bin/env python3
"""
Command-line interface for torus-paircorr.

Usage:
    torus-paircorr generate --gen halton --dim 2 --n 1000 --out pts.csv
    torus-paircorr paircorr --dim 2 --n 1000 --seed 1 --gen uniform --s 0.5,1,2
    torus-paircorr energy --family squares --n 100
    torus-paircorr converge --gen kronecker --alpha sqrt2,sqrt3 --n 100000 --s 0.5,1
    torus-paircorr witness --alpha sqrt2,sqrt3 --qmax 100000
    torus-paircorr approx --alpha sqrt2,sqrt3 --qmax 1000 --format json
    torus-paircorr discrepancy --in pts.csv --grid-k 64
    torus-paircorr metric --family squares --dim 1 --n 2000 --samples 20
    torus-paircorr batch --in manifest.json --jobs 4
"""

import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click

from . import __version__
from .batch import BatchRunner, read_manifest
from .config import Settings, configure_logging
from .core import (InvalidArgumentError, PairCorrError, PointSet, ValidationError,
                   format_points, read_point_file)
from .diagnostics import (best_approximation, convergence_sweep, expectation_formula,
                          kronecker_witness, metric_pair_correlation,
                          simultaneous_approx_search, star_discrepancy_estimate,
                          star_discrepancy_exact_1d, variance_monte_carlo)
from .energy import RegimeThresholds, additive_energy
from .generators import (AlphaVector, GeneratorKind, GeneratorSpec, SequenceFamily,
                         make_integer_sequence, parse_alpha)
from .paircorr import SGrid, pair_correlation

logger = logging.getLogger(__name__)

METHODS = ("auto", "bruteforce", "celllist")
FORMATS = ("csv", "json")

GEN_FIELDS = ("gen", "dim", "n", "seed", "alpha", "family", "source", "poly_coeffs")
COMMAND_FIELDS: Dict[str, Tuple[str, ...]] = {
    "generate": GEN_FIELDS + ("fmt",),
    "paircorr": GEN_FIELDS + ("in_path", "s", "method", "trials", "fmt"),
    "energy": ("family", "n", "source", "in_path", "tau_max", "kappa", "log_power"),
    "converge": GEN_FIELDS + ("s", "gamma", "method", "fmt"),
    "witness": ("alpha", "qmax", "rho"),
    "approx": ("alpha", "qmax", "rho", "fmt"),
    "discrepancy": GEN_FIELDS + ("in_path", "grid_k"),
    "metric": ("family", "source", "in_path", "dim", "n", "s", "samples", "seed", "method"),
    "batch": ("in_path", "jobs"),
}


@dataclass
class RunConfig:
    """Every parameter of one invocation; ``out`` is the only field not echoed."""

    command: str
    gen: str = "uniform"
    dim: Optional[int] = None
    n: int = 1000
    seed: int = 0
    alpha: Optional[str] = None
    family: Optional[str] = None
    source: Optional[str] = None
    poly_coeffs: Optional[str] = None
    in_path: Optional[str] = None
    out: Optional[str] = None
    s: str = "1"
    method: str = "auto"
    fmt: str = "csv"
    trials: int = 1
    qmax: int = 100_000
    rho: float = 1.0
    grid_k: int = 64
    gamma: float = 0.1
    samples: int = 20
    jobs: int = 1
    tau_max: float = 0.1
    kappa: float = 1.0
    log_power: float = 1.0

    def alpha_vector(self) -> Optional[AlphaVector]:
        if self.alpha is None:
            return None
        return AlphaVector(tuple(parse_alpha(tok) for tok in self.alpha.split(',') if tok.strip()))

    def coeffs(self) -> Tuple[int, ...]:
        if not self.poly_coeffs:
            return ()
        try:
            return tuple(int(tok) for tok in self.poly_coeffs.split(','))
        except ValueError:
            raise InvalidArgumentError(f"--poly-coeffs must be comma-separated integers, got {self.poly_coeffs!r}")

    def s_grid(self) -> SGrid:
        return SGrid.parse(self.s)

    def resolved_dim(self) -> int:
        if self.dim is not None:
            return self.dim
        alpha = self.alpha_vector()
        return alpha.dim if alpha is not None else 2

    def integer_source(self) -> Optional[str]:
        return self.source or (self.in_path if self.command in ("energy", "metric") else None)

    def validate(self) -> None:
        if self.command not in COMMAND_FIELDS:
            raise InvalidArgumentError(f"unknown command {self.command!r}")
        checks = [
            (self.dim is None or self.dim >= 1, f"--dim must be >= 1, got {self.dim}"),
            (self.n >= 1, f"--n must be >= 1, got {self.n}"),
            (self.seed >= 0, f"--seed must be >= 0, got {self.seed}"),
            (self.trials >= 1, f"--trials must be >= 1, got {self.trials}"),
            (self.qmax >= 1, f"--qmax must be >= 1, got {self.qmax}"),
            (self.rho > 0, f"--rho must be > 0, got {self.rho}"),
            (self.grid_k >= 2, f"--grid-k must be >= 2, got {self.grid_k}"),
            (self.gamma > 0, f"--gamma must be > 0, got {self.gamma}"),
            (self.samples >= 1, f"--samples must be >= 1, got {self.samples}"),
            (self.jobs >= 1, f"--jobs must be >= 1, got {self.jobs}"),
            (self.method in METHODS, f"--method must be one of {METHODS}"),
            (self.fmt in FORMATS, f"--format must be one of {FORMATS}"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidArgumentError(message)
        try:
            GeneratorKind(self.gen)
            if self.family is not None:
                SequenceFamily(self.family)
        except ValueError as e:
            raise InvalidArgumentError(str(e))
        self.s_grid()
        self.alpha_vector()
        self.coeffs()
        RegimeThresholds(self.tau_max, self.kappa, self.log_power)

    def resolved(self) -> Dict[str, Any]:
        """JSON-able echo of the parameters that shape this command's output."""
        values: Dict[str, Any] = {"command": self.command}
        for name in COMMAND_FIELDS[self.command]:
            value = getattr(self, name)
            if name == "dim":
                value = self.resolved_dim()
            elif name == "alpha":
                alpha = self.alpha_vector()
                value = list(alpha.alphas) if alpha is not None else None
            elif name == "s":
                value = list(self.s_grid().values)
            elif name == "poly_coeffs":
                value = list(self.coeffs())
            values[name] = value
        return values

    def generator_spec(self) -> GeneratorSpec:
        return GeneratorSpec(kind=self.gen, dim=self.resolved_dim(), seed=self.seed,
                             alpha=self.alpha_vector(), family=self.family,
                             coeffs=self.coeffs(), source=self.integer_source())


def _points(config: RunConfig) -> PointSet:
    if config.in_path:
        return read_point_file(config.in_path)
    return config.generator_spec().build(config.n)


def _integer_sequence(config: RunConfig):
    if config.family is None:
        raise InvalidArgumentError(f"{config.command} needs --family")
    return make_integer_sequence(config.family, config.n, config.integer_source())


def _json(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv(config: RunConfig, header: str, rows: List[str]) -> str:
    lines = ["# " + json.dumps(config.resolved(), sort_keys=True), header] + rows
    return "\n".join(lines) + "\n"


def _run_generate(config: RunConfig) -> str:
    pts = config.generator_spec().build(config.n)
    if config.fmt == "json":
        return _json({"dim": pts.dim, "label": pts.label,
                      "points": pts.points.tolist(), "config": config.resolved()})
    return format_points(pts, header=config.resolved())


def _run_paircorr(config: RunConfig) -> str:
    grid = config.s_grid()
    if config.trials >= 2:
        return _run_moments(config, grid)
    result = pair_correlation(_points(config), grid, config.method)
    if config.fmt == "json":
        return result.to_json(config.resolved())
    return result.to_csv(config.resolved())


def _run_moments(config: RunConfig, grid: SGrid) -> str:
    if config.in_path or config.gen != GeneratorKind.UNIFORM.value:
        raise InvalidArgumentError("--trials >= 2 repeats uniform draws; use --gen uniform without --in")
    d = config.resolved_dim()
    rows = []
    for s in grid.values:
        mean, variance = variance_monte_carlo(d, config.n, s, config.trials, config.seed, config.method)
        rows.append((s, mean, variance, expectation_formula(config.n, s, d)))
    if config.fmt == "json":
        return _json({"moments": [dict(zip(("s", "mean", "variance", "expectation"), r)) for r in rows],
                      "config": config.resolved()})
    return _csv(config, "s,mean,variance,expectation",
                [",".join(f"{v:.17g}" for v in r) for r in rows])


def _run_energy(config: RunConfig) -> str:
    report = additive_energy(_integer_sequence(config), config.n, Settings.from_env())
    thresholds = RegimeThresholds(config.tau_max, config.kappa, config.log_power)
    return report.to_json(thresholds, config.resolved())


def _run_converge(config: RunConfig) -> str:
    if config.in_path:
        raise InvalidArgumentError("converge generates its own sequence; --in is not accepted")
    sweep = convergence_sweep(config.generator_spec(), config.s_grid(), n_max=config.n,
                              gamma=config.gamma, method=config.method)
    if config.fmt == "json":
        return sweep.to_json(config.resolved())
    return sweep.to_csv(config.resolved())


def _plane_alpha(config: RunConfig) -> AlphaVector:
    alpha = config.alpha_vector()
    if alpha is None or alpha.dim != 2:
        raise InvalidArgumentError(f"{config.command} needs --alpha with two entries")
    return alpha


def _run_witness(config: RunConfig) -> str:
    alpha = _plane_alpha(config)
    hits = [h for h in simultaneous_approx_search(alpha, config.qmax, config.rho) if h[1] < 1.0]
    best = best_approximation(hits)
    if best is None:
        raise PairCorrError(f"no q <= {config.qmax} with theta < min(rho, 1); raise --qmax")
    q, theta = best
    return kronecker_witness(alpha, q, theta, config.rho).to_json(config.resolved())


def _run_approx(config: RunConfig) -> str:
    hits = simultaneous_approx_search(_plane_alpha(config), config.qmax, config.rho)
    if config.fmt == "json":
        best = best_approximation(hits)
        return _json({"hits": [list(h) for h in hits],
                      "best": list(best) if best is not None else None,
                      "config": config.resolved()})
    return _csv(config, "q,theta", [f"{q},{theta:.17g}" for q, theta in hits])


def _run_discrepancy(config: RunConfig) -> str:
    pts = _points(config)
    return _json({
        "N": len(pts),
        "dim": pts.dim,
        "grid_k": config.grid_k,
        "estimate": star_discrepancy_estimate(pts, config.grid_k),
        "exact": star_discrepancy_exact_1d(pts) if pts.dim == 1 else None,
        "config": config.resolved(),
    })


def _run_metric(config: RunConfig) -> str:
    experiment = metric_pair_correlation(_integer_sequence(config), config.resolved_dim(),
                                         config.n, config.s_grid(), config.samples,
                                         config.seed, config.method, Settings.from_env())
    return experiment.to_json(config.resolved())


RUNNERS: Dict[str, Callable[[RunConfig], str]] = {
    "generate": _run_generate,
    "paircorr": _run_paircorr,
    "energy": _run_energy,
    "converge": _run_converge,
    "witness": _run_witness,
    "approx": _run_approx,
    "discrepancy": _run_discrepancy,
    "metric": _run_metric,
}


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding='utf-8')
        logger.info(f"✅ Wrote {out}")
    else:
        click.echo(text, nl=False)


def _run_batch(config: RunConfig) -> int:
    if not config.in_path:
        raise InvalidArgumentError("batch needs --in with a JSON manifest")
    outcomes = BatchRunner(jobs=config.jobs).run(read_manifest(config.in_path))
    failed = [o for o in outcomes if not o.ok]
    _emit(_json({"runs": [o.to_dict() for o in outcomes], "failed": len(failed),
                 "config": config.resolved()}), config.out)
    for o in failed:
        last = o.stderr_lines[-1] if o.stderr_lines else "no output"
        logger.error(f"Run {o.run_id} failed ({o.returncode}): {last}")
    return 2 if failed else 0


def run(config: RunConfig) -> int:
    """Validate, execute one command and write its artifact; returns the exit status."""
    config.validate()
    logger.info(f"Running {config.command} with {config.resolved()}")
    if config.command == "batch":
        return _run_batch(config)
    _emit(RUNNERS[config.command](config), config.out)
    return 0


class PairCorrGroup(click.Group):
    """Maps failures to exit status 1 (bad input) or 2 (runtime) with an 'Error:' line."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            code = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                                standalone_mode=False, **extra)
            code = code if isinstance(code, int) else 0
        except click.exceptions.Exit as e:
            code = e.exit_code
        except click.ClickException as e:
            click.echo(f"Error: {e.format_message()}", err=True)
            code = 1
        except click.Abort:
            click.echo("Error: aborted", err=True)
            code = 1
        except (InvalidArgumentError, ValidationError) as e:
            click.echo(f"Error: {e}", err=True)
            code = 1
        except Exception as e:
            logger.debug("Unhandled failure", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            code = 2
        if standalone_mode:
            sys.exit(code)
        return code


def _options(*decorators: Callable) -> Callable:
    def apply(f: Callable) -> Callable:
        for decorator in reversed(decorators):
            f = decorator(f)
        return f
    return apply


def _generator_options() -> List[Callable]:
    return [
        click.option('--gen', type=click.Choice([k.value for k in GeneratorKind]),
                     default='uniform', show_default=True, help='Point generator'),
        click.option('--dim', type=int, default=None, help='Dimension (default: alpha length, else 2)'),
        click.option('--n', type=int, default=1000, show_default=True, help='Number of points'),
        click.option('--seed', type=int, default=0, show_default=True, help='PRNG seed'),
        click.option('--alpha', default=None, help='Comma list of decimals or sqrt2, sqrt3, sqrt5, phi'),
        click.option('--family', type=click.Choice([f.value for f in SequenceFamily]),
                     default=None, help='Integer sequence family for an_alpha'),
        click.option('--source', type=click.Path(exists=True, dir_okay=False), default=None,
                     help='Integer file for the file family'),
        click.option('--poly-coeffs', default=None, help='Polynomial coefficients, highest degree first'),
    ]


def _in_option(help_text: str) -> Callable:
    return click.option('--in', 'in_path', type=click.Path(exists=True, dir_okay=False),
                        default=None, help=help_text)


def _out_option() -> Callable:
    return click.option('--out', type=click.Path(dir_okay=False), default=None,
                        help='Output file (default: stdout)')


def _format_option() -> Callable:
    return click.option('--format', 'fmt', type=click.Choice(FORMATS), default='csv',
                        show_default=True, help='Output format')


def _s_option() -> Callable:
    return click.option('--s', default='1', show_default=True, help='Comma list of increasing s values')


def _method_option() -> Callable:
    return click.option('--method', type=click.Choice(METHODS), default='auto',
                        show_default=True, help='Pair counting engine')


@click.group(cls=PairCorrGroup)
@click.version_option(version=__version__, prog_name="torus-paircorr")
@click.option('--verbose', '-v', is_flag=True, help='Log progress at INFO level')
def cli(verbose: bool):
    """
    Pair correlation statistics of sequences on the d-torus.

    Results go to stdout or --out; logs go to stderr.
    """
    settings = Settings.from_env()
    configure_logging("INFO" if verbose else settings.log_level)


@cli.command()
@_options(*_generator_options(), _out_option(), _format_option())
def generate(**params):
    """Write a generated point set."""
    return run(RunConfig("generate", **params))


@cli.command()
@_options(*_generator_options(), _in_option('Point-set file instead of a generator'),
          _s_option(), _method_option(),
          click.option('--trials', type=int, default=1, show_default=True,
                       help='Repeat uniform draws and report mean and variance'),
          _out_option(), _format_option())
def paircorr(**params):
    """Compute F_N(s) for a point set."""
    return run(RunConfig("paircorr", **params))


@cli.command()
@_options(click.option('--family', type=click.Choice([f.value for f in SequenceFamily]),
                       required=True, help='Integer sequence family'),
          click.option('--n', type=int, default=1000, show_default=True, help='Number of terms'),
          click.option('--source', type=click.Path(exists=True, dir_okay=False), default=None,
                       help='Integer file for the file family'),
          _in_option('Alias of --source'),
          click.option('--tau-max', type=float, default=0.1, show_default=True,
                       help='E/N^3 at or above which the set counts as maximal order'),
          click.option('--kappa', type=float, default=1.0, show_default=True,
                       help='Constant of the energy-saving threshold'),
          click.option('--log-power', type=float, default=1.0, show_default=True,
                       help='Power of log N in the energy-saving threshold'),
          _out_option())
def energy(**params):
    """Additive energy of the first N terms of a sequence."""
    return run(RunConfig("energy", **params))


@cli.command()
@_options(*_generator_options(), _s_option(), _method_option(),
          click.option('--gamma', type=float, default=0.1, show_default=True,
                       help='Exponent of the N = M^(1+gamma) schedule'),
          _out_option(), _format_option())
def converge(**params):
    """Sweep F_N(s) over growing prefixes; --n is the largest N."""
    return run(RunConfig("converge", **params))


@cli.command()
@_options(click.option('--alpha', required=True, help='Two entries, e.g. sqrt2,sqrt3'),
          click.option('--qmax', type=int, default=100_000, show_default=True, help='Largest q scanned'),
          click.option('--rho', type=float, default=1.0, show_default=True, help='Acceptance level for theta'),
          _out_option())
def witness(**params):
    """Build the lag-pair witness for a Kronecker sequence."""
    return run(RunConfig("witness", **params))


@cli.command()
@_options(click.option('--alpha', required=True, help='Two entries, e.g. sqrt2,sqrt3'),
          click.option('--qmax', type=int, default=100_000, show_default=True, help='Largest q scanned'),
          click.option('--rho', type=float, default=1.0, show_default=True, help='Acceptance level for theta'),
          _out_option(), _format_option())
def approx(**params):
    """List the q with simultaneous approximation quality theta < rho."""
    return run(RunConfig("approx", **params))


@cli.command()
@_options(*_generator_options(), _in_option('Point-set file instead of a generator'),
          click.option('--grid-k', type=int, default=64, show_default=True, help='Grid resolution K'),
          _out_option())
def discrepancy(**params):
    """Star discrepancy (exact in one dimension, grid estimate otherwise)."""
    return run(RunConfig("discrepancy", **params))


@cli.command()
@_options(click.option('--family', type=click.Choice([f.value for f in SequenceFamily]),
                       required=True, help='Integer sequence family'),
          click.option('--source', type=click.Path(exists=True, dir_okay=False), default=None,
                       help='Integer file for the file family'),
          _in_option('Alias of --source'),
          click.option('--dim', type=int, default=None, help='Dimension of alpha (default 2)'),
          click.option('--n', type=int, default=1000, show_default=True, help='Number of terms'),
          _s_option(),
          click.option('--samples', type=int, default=20, show_default=True, help='Random alphas drawn'),
          click.option('--seed', type=int, default=0, show_default=True, help='PRNG seed'),
          _method_option(), _out_option())
def metric(**params):
    """F_N(s) of ({a_n alpha}) over random alphas, next to the energy of A_N."""
    return run(RunConfig("metric", **params))


@cli.command()
@_options(_in_option('JSON manifest: a list of argument lists'),
          click.option('--jobs', type=int, default=1, show_default=True, help='Concurrent runs'),
          _out_option())
def batch(**params):
    """Run a manifest of invocations as concurrent subprocesses."""
    return run(RunConfig("batch", **params))


def main():
    cli()


if __name__ == "__main__":
    main()

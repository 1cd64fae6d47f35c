import math

import numpy as np
import pytest

from torus_paircorr.config import Settings
from torus_paircorr.core import InvalidArgumentError, PointSet
from torus_paircorr.diagnostics import (ConvergenceSweep, KroneckerWitness, best_approximation,
                                        binned_pair_lower_bound, box_deviation, chebyshev_bound,
                                        convergence_sweep, expectation_formula,
                                        interpolation_bounds, kronecker_witness,
                                        metric_pair_correlation, min_contradicting_s, minimal_a,
                                        simultaneous_approx_search, star_discrepancy_estimate,
                                        subsequence_schedule, theorem2_leading_coeff,
                                        theorem2_lower_bound, variance_monte_carlo,
                                        witness_gamma, witness_pair_excess, witness_window)
from torus_paircorr.energy import EnergyRegime, energy_regime
from torus_paircorr.generators import (AlphaVector, GeneratorSpec, gen_halton, gen_kronecker,
                                       gen_uniform_iid, make_integer_sequence)
from torus_paircorr.paircorr import SGrid, pair_correlation

ROOTS = AlphaVector((math.sqrt(2.0), math.sqrt(3.0)))


@pytest.mark.parametrize("N, s, d, expected", [
    (10, 0.5, 2, 0.9),
    (10 ** 9, 1.0, 1, 2 * (1 - 1e-9)),
    (1, 3.0, 2, 0.0),
])
def test_expectation_formula(N, s, d, expected):
    assert expectation_formula(N, s, d) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("N, s, d, eps, expected", [
    (10 ** 4, 1.0, 2, 0.5, 4e-4),
    (10 ** 3, 2.0, 2, 1.0, 8e-3),
    (10 ** 3, 0.5, 3, 0.1, 0.0125),
])
def test_chebyshev_bound(N, s, d, eps, expected):
    assert chebyshev_bound(N, s, d, eps, 1.0) == pytest.approx(expected)


def test_chebyshev_bound_rejects_non_positive():
    with pytest.raises(InvalidArgumentError):
        chebyshev_bound(10, 1.0, 2, 0.0, 1.0)


def test_variance_monte_carlo_sanity():
    mean, variance = variance_monte_carlo(1, 2, 0.01, trials=2, seed=0)
    assert math.isfinite(mean) and variance >= 0.0
    with pytest.raises(InvalidArgumentError):
        variance_monte_carlo(1, 10, 1.0, trials=1, seed=0)


def test_variance_monte_carlo_matches_expectation():
    trials = 40
    mean, variance = variance_monte_carlo(1, 2000, 1.0, trials=trials, seed=9)
    assert abs(mean - expectation_formula(2000, 1.0, 1)) <= 4 * math.sqrt(variance / trials)
    assert variance_monte_carlo(1, 2000, 1.0, trials=trials, seed=9) == (mean, variance)


def test_lower_bound_examples():
    assert theorem2_lower_bound(0.0, 0.5, 3) == pytest.approx(24.0)
    eps, lam = 0.1, 0.25
    q = lam * (1 - eps / lam) ** 2 + (1 - lam) * (1 + eps / (1 - lam)) ** 2
    assert theorem2_lower_bound(eps, lam, 1) == pytest.approx(q - 1.0)


@pytest.mark.parametrize("eps, lam", [(0.5, 0.4), (0.3, 0.8), (-0.1, 0.5), (0.1, 1.0), (0.1, 0.0)])
def test_lower_bound_parameter_range(eps, lam):
    with pytest.raises(InvalidArgumentError):
        theorem2_lower_bound(eps, lam, 2)


@pytest.mark.parametrize("eps, lam, expected", [(0.1, 0.5, 0.16), (0.01, 0.9, 4e-4 / 0.09), (0.0, 0.3, 0.0)])
def test_leading_coeff_examples(eps, lam, expected):
    assert theorem2_leading_coeff(eps, lam) == pytest.approx(expected, abs=1e-12)


def test_leading_coeff_identity():
    rng = np.random.default_rng(31)
    for _ in range(10_000):
        lam = rng.uniform(0.01, 0.99)
        eps = rng.uniform(0.0, 0.999) * min(lam, 1.0 - lam)
        assert abs(theorem2_leading_coeff(eps, lam) - 4 * eps ** 2 / (lam * (1 - lam))) <= 1e-12


def test_leading_coeff_scan_crossing():
    eps, lam = 0.1, 0.25
    crossing = next(s for s in range(1, 10_001) if theorem2_lower_bound(eps, lam, s) > 4 * s * s)
    assert min_contradicting_s(eps, lam) == crossing


def test_min_contradicting_s_is_first_crossing():
    rng = np.random.default_rng(5)
    for _ in range(100):
        lam = rng.uniform(0.05, 0.95)
        eps = rng.uniform(0.05, 0.95) * min(lam, 1.0 - lam)
        s = min_contradicting_s(eps, lam)
        assert theorem2_lower_bound(eps, lam, s) > 4 * s * s
        if s > 1:
            assert theorem2_lower_bound(eps, lam, s - 1) <= 4 * (s - 1) ** 2
        assert min_contradicting_s(eps / 2, lam) >= s


def test_min_contradicting_s_examples():
    assert min_contradicting_s(0.4, 0.5) <= 100
    s = min_contradicting_s(0.2, 0.5)
    assert s == next(k for k in range(1, 1000) if theorem2_lower_bound(0.2, 0.5, k) > 4 * k * k)
    with pytest.raises(InvalidArgumentError):
        min_contradicting_s(0.0, 0.5)


def test_approx_search_edge_cases():
    assert simultaneous_approx_search(AlphaVector((0.0, 0.0)), 100) == []
    assert len(simultaneous_approx_search(ROOTS, 1)) <= 1
    hits = simultaneous_approx_search(ROOTS, 1000)
    assert hits
    assert all(0.0 < theta < 1.0 for _, theta in hits)
    with pytest.raises(InvalidArgumentError):
        simultaneous_approx_search(AlphaVector((0.1, 0.2, 0.3)), 10)


def test_approx_search_theta_definition():
    for q, theta in simultaneous_approx_search(ROOTS, 500):
        worst = max(abs(q * a - round(q * a)) for a in ROOTS.alphas)
        assert theta == pytest.approx(math.sqrt(q) * worst, abs=1e-9)


def test_best_approximation_prefers_small_theta_then_q():
    assert best_approximation([(5, 0.3), (2, 0.1), (3, 0.1)]) == (2, 0.1)
    assert best_approximation([]) is None


def test_minimal_a():
    assert minimal_a(0.5) == 10
    assert witness_gamma(1.0) == 0.0
    assert witness_gamma(0.5) == pytest.approx((2 / 1.25 - 1) / 100)


@pytest.mark.parametrize("q_max", [2000, pytest.param(100_000, marks=pytest.mark.slow)])
def test_witness_for_square_roots(q_max):
    q, theta = best_approximation(simultaneous_approx_search(ROOTS, q_max))
    w = kronecker_witness(ROOTS, q, theta)
    assert w.B == pytest.approx(2 / (1 + theta ** 2)) and w.B > 1
    assert w.L == math.ceil((1 / (w.A * theta)) ** (2 / 3))
    assert w.N == w.A ** 2 * w.L * q - math.floor(w.nu_tilde)
    assert w.N >= w.B * w.L * q
    assert w.lag == q * w.L
    assert w.sandwich_ok
    assert 1 / math.sqrt(w.N) <= w.lag_distance * (1 + 1e-12)
    assert w.lag_distance <= 3 / math.sqrt(w.N)
    assert w.pair_count_at_lag >= w.N - w.lag
    assert w.gamma_holds


def test_witness_json_round_trip():
    q, theta = best_approximation(simultaneous_approx_search(ROOTS, 2000))
    w = kronecker_witness(ROOTS, q, theta, rho=0.9)
    assert KroneckerWitness.from_json(w.to_json({"command": "witness"})) == w


def test_witness_gamma_with_rho_below_one():
    q, theta = best_approximation(simultaneous_approx_search(ROOTS, 2000, rho=0.9))
    w = kronecker_witness(ROOTS, q, theta, rho=0.9)
    assert w.gamma_bound == pytest.approx(witness_gamma(0.9))
    assert w.gamma_bound > 0.0
    assert w.gamma_holds
    assert w.N - w.lag >= w.gamma_bound * w.N


def test_witness_rejects_theta():
    with pytest.raises(InvalidArgumentError):
        kronecker_witness(ROOTS, 5, 1.0)
    with pytest.raises(InvalidArgumentError):
        kronecker_witness(ROOTS, 5, 0.0)


def test_witness_pair_excess_and_window():
    q, theta = best_approximation(simultaneous_approx_search(ROOTS, 2000))
    w = kronecker_witness(ROOTS, q, theta)
    f_lo, f_hi, excess = witness_pair_excess(w, ROOTS, delta=0.01 * w.scale)
    assert f_hi >= f_lo
    assert excess >= 2 * (w.N - w.lag) / w.N - 1e-12
    a, s1, s2 = witness_window(w, gamma=1.0)
    assert s1 <= w.scale <= s2
    assert 0 <= a <= math.ceil(300 / 1.0)


def test_discrepancy_exact_examples():
    assert star_discrepancy_estimate(PointSet(1, np.array([[0.0]])), 10) == 1.0
    assert star_discrepancy_estimate(PointSet(1, np.array([[0.25], [0.75]])), 10) == 0.25


def test_discrepancy_halton():
    assert star_discrepancy_estimate(gen_halton(2, 10_000), 100) < 0.01


def test_discrepancy_refinement_monotone():
    pts = gen_uniform_iid(2, 500, seed=4)
    for K in (4, 8, 16):
        assert star_discrepancy_estimate(pts, K) <= star_discrepancy_estimate(pts, 2 * K) + 1e-12


def test_discrepancy_arguments():
    with pytest.raises(InvalidArgumentError):
        star_discrepancy_estimate(gen_halton(2, 10), 1)
    with pytest.raises(InvalidArgumentError):
        star_discrepancy_estimate(gen_halton(8, 10), 64)


def test_box_deviation():
    pts = PointSet(2, np.array([[0.1, 0.1], [0.6, 0.2], [0.3, 0.9], [0.4, 0.4]]))
    assert box_deviation(pts, [0.5, 0.5]) == pytest.approx(0.5 - 0.25)
    assert box_deviation(pts, [1.0, 1.0]) == pytest.approx(0.0)
    with pytest.raises(InvalidArgumentError):
        box_deviation(pts, [0.0, 0.5])


@pytest.mark.parametrize("d, N, s", [(1, 300, 1), (1, 300, 3), (2, 400, 1), (2, 400, 2), (3, 1000, 2)])
def test_binned_bound_below_count(d, N, s):
    rng = np.random.default_rng(d * 100 + s)
    clustered = PointSet(d, np.minimum(rng.random((N, d)) ** 3, 0.999))
    for pts in (gen_uniform_iid(d, N, seed=s), gen_halton(d, N), clustered):
        bound = binned_pair_lower_bound(pts, s)
        assert 0 <= bound <= pair_correlation(pts, SGrid((float(s),))).counts[0]


def test_binned_bound_needs_room():
    with pytest.raises(InvalidArgumentError):
        binned_pair_lower_bound(gen_uniform_iid(2, 16, seed=1), 3)


def test_subsequence_schedule():
    sizes = subsequence_schedule(10 ** 5)
    assert sizes == sorted(set(sizes))
    assert sizes[0] >= 2 and sizes[-1] <= 10 ** 5
    assert len(sizes) >= 5
    with pytest.raises(InvalidArgumentError):
        subsequence_schedule(1)


def test_convergence_sweep_single_size():
    spec = GeneratorSpec(kind="uniform", dim=2, seed=1)
    sweep = convergence_sweep(spec, SGrid((0.5, 1.0)), n_values=[2])
    assert sweep.n_values == (2,)
    assert len(sweep.table) == 1 and len(sweep.table[0]) == 2
    assert all(math.isfinite(v) for v in sweep.table[0])


def test_convergence_sweep_round_trip():
    spec = GeneratorSpec(kind="kronecker", dim=2, alpha=ROOTS)
    sweep = convergence_sweep(spec, SGrid((0.5, 1.0, 2.0)), n_max=5000)
    assert len(sweep.table) == len(sweep.n_values)
    back = ConvergenceSweep.from_csv(sweep.to_csv({"command": "converge"}))
    assert back == sweep
    assert sweep.to_csv().splitlines()[1] == "N,s,F,poisson_ref,abs_dev"


def test_sweep_deviation_ignores_small_prefixes():
    sweep = ConvergenceSweep(SGrid((1.0,)), (2, 100), ((0.0,), (3.9,)), ((4.0,), (0.1,)), dim=2)
    assert sweep.max_deviation() == 4.0
    assert sweep.max_deviation(min_n=50) == 0.1
    with pytest.raises(InvalidArgumentError):
        sweep.max_deviation(min_n=1000)


def test_convergence_sweep_shape_check():
    with pytest.raises(InvalidArgumentError):
        ConvergenceSweep(SGrid((1.0,)), (10, 20), ((1.0,),), ((0.0,),))
    with pytest.raises(InvalidArgumentError):
        convergence_sweep(GeneratorSpec(kind="halton", dim=1), SGrid((1.0,)), n_values=[10, 5])


def test_interpolation_bounds():
    pts = gen_uniform_iid(2, 3000, seed=6)
    for n_lo, n, n_hi in ((1000, 1500, 2000), (2000, 2000, 2000), (500, 2900, 3000)):
        lower, middle, upper = interpolation_bounds(pts, n, n_lo, n_hi, 1.0)
        assert lower <= middle <= upper


def test_metric_experiment():
    seq = make_integer_sequence("identity", 300)
    exp = metric_pair_correlation(seq, 1, 300, SGrid((0.5, 1.0)), samples=5, seed=2,
                                  settings=Settings())
    assert len(exp.alphas) == 5
    assert len(exp.table) == 5 and all(len(row) == 2 for row in exp.table)
    assert len(exp.mean_abs_dev) == 2
    assert energy_regime(exp.energy) is EnergyRegime.MAXIMAL_ORDER
    assert '"mean_abs_dev"' in exp.to_json()


@pytest.mark.slow
def test_expectation_identity_many_trials():
    for d in (1, 2):
        trials = 2000
        mean, variance = variance_monte_carlo(d, 50, 0.5, trials=trials, seed=d, method="bruteforce")
        assert abs(mean - expectation_formula(50, 0.5, d)) <= 3 * math.sqrt(variance / trials)


@pytest.mark.slow
def test_uniform_poisson_at_desk_scale():
    seeds = range(20)
    calibration = {s: variance_monte_carlo(2, 10_000, s, trials=20, seed=100)[1] for s in (0.5, 1.0, 2.0)}
    for s in (0.5, 1.0, 2.0):
        values = [pair_correlation(gen_uniform_iid(2, 100_000, seed), SGrid((s,))).f_values[0]
                  for seed in seeds]
        ref = (2 * s) ** 2
        assert abs(np.mean(values) - ref) <= 0.02 * ref
        # c from Var F ~ c max(s^d, s^(2d-1)) / N at N = 10^4, then eps at probability 0.01
        c = calibration[s] * 10_000 / max(s ** 2, s ** 3)
        eps = math.sqrt(c * max(s ** 2, s ** 3) / (0.01 * 100_000))
        assert chebyshev_bound(100_000, s, 2, eps, c) == pytest.approx(0.01)
        assert all(abs(v - ref) <= eps for v in values)


@pytest.mark.slow
def test_kronecker_not_poissonian_but_equidistributed():
    grid = SGrid((0.25, 0.5, 1.0, 2.0))
    kron = convergence_sweep(GeneratorSpec(kind="kronecker", dim=2, alpha=ROOTS), grid, n_max=100_000)
    uniform = convergence_sweep(GeneratorSpec(kind="uniform", dim=2, seed=5), grid, n_max=100_000)
    assert kron.n_values == uniform.n_values
    # small N deviates for every sequence; only the large prefixes tell them apart
    assert kron.max_deviation(min_n=10_000) > 0.3
    assert uniform.max_deviation(min_n=10_000) < 0.3
    assert max(uniform.deviations[-1]) < 0.15
    assert max(kron.deviations[-1]) > 0.3
    assert star_discrepancy_estimate(gen_kronecker(ROOTS, 100_000), 64) < 0.02


@pytest.mark.slow
def test_celllist_speed_at_one_million():
    import time

    pts = gen_uniform_iid(2, 1_000_000, seed=0)
    pair_correlation(gen_uniform_iid(2, 1000, seed=0), SGrid((1.0,)))
    start = time.perf_counter()
    result = pair_correlation(pts, SGrid((1.0,)))
    assert time.perf_counter() - start < 10.0
    assert result.f_values[0] == pytest.approx(4.0, abs=0.1)


@pytest.mark.slow
def test_variance_scales_as_one_over_n():
    small = variance_monte_carlo(2, 10_000, 1.0, trials=50, seed=9)[1]
    large = variance_monte_carlo(2, 40_000, 1.0, trials=50, seed=9)[1]
    assert 2.0 <= small / large <= 8.0

import math

import numpy as np
import pytest

from src.data.continued_fractions import QuadraticIrrational, build_convergents
from src.data.spectral import spectral
from src.exceptions import DomainError, ToleranceUnreachableError
from src.features.sudler import IrrationalTarget, sudler_stream
from src.models.limit_functions import (
    calibrate_tail_constant, convergence_report, factorization_terms,
    fractional_parts, g_N_product, global_k0, interval_I, limit_G,
    limit_sweep, log_limit_G, make_limit_spec, ostrowski_factorization_check,
    perturbed_product, perturbed_products, rate_envelope, table_for)
from src.models.limit_functions import (
    HEAD_TERMS, SERIES_TERMS, _direct_tail, _limit_terms)


N_TRUNC = 2 ** 16


@pytest.fixture
def golden_spectral(golden, golden_table):
    return spectral(golden, golden_table)


@pytest.fixture
def golden_spec(golden_spectral):
    return make_limit_spec(golden_spectral, 1, n_trunc=N_TRUNC)


def test_unperturbed_product_is_the_sudler_product(golden):
    table = build_convergents(golden, 8)
    q = table.q[8]
    expected = sudler_stream(IrrationalTarget(golden), q).log_P(q)
    assert perturbed_product(golden, 8, 0, table) == pytest.approx(
        expected, abs=1e-12)


def test_perturbed_products_share_one_pass(golden):
    table = build_convergents(golden, 10)
    xs = [-0.3, 0.0, 0.2]
    values = perturbed_products(golden, 10, xs, table)
    for x, value in zip(xs, values):
        assert perturbed_product(golden, 10, x, table) == value


def test_factorization_of_zero_and_single_digit(golden):
    assert ostrowski_factorization_check(golden, 0) == 0.0
    table = build_convergents(golden, 12)
    terms = factorization_terms(144, table)
    assert [k for k, _ in terms] == [11]
    assert abs(ostrowski_factorization_check(golden, 144, table)) < 1e-9


def test_factorization_golden_exhaustive(golden):
    table = build_convergents(golden, 10)
    for N in range(table.q[10]):
        residual = ostrowski_factorization_check(golden, N, table)
        assert abs(residual) < 1e-8


@pytest.mark.slow
def test_factorization_sqrt10_sampled():
    alpha = QuadraticIrrational((3,), (6,))
    table = build_convergents(alpha, 6)
    rng = np.random.default_rng(11)
    for N in rng.integers(1, table.q[6], size=10):
        residual = ostrowski_factorization_check(alpha, int(N), table)
        assert abs(residual) < 1e-8


def test_table_for(golden):
    table = table_for(golden, 89)
    assert table.q[-1] == 89 and table.q_next == 144


def test_fractional_parts_match_float_arithmetic():
    frac = fractional_parts(QuadraticIrrational((0,), (1,)), 1, 2 ** 20)
    n = np.arange(1, 2 ** 20)
    alpha = (math.sqrt(5) - 1) / 2
    assert np.all((frac >= 0) & (frac < 1))
    assert frac[0] == pytest.approx(alpha, abs=1e-15)
    assert frac[-1] == pytest.approx((n[-1] * alpha) % 1, abs=1e-9)


def test_spec_of_golden(golden_spec):
    assert golden_spec.B_r == pytest.approx(1 / math.sqrt(5), rel=1e-12)
    assert golden_spec.alpha_r == QuadraticIrrational((0,), (1,))
    assert golden_spec.n_trunc == N_TRUNC
    assert golden_spec.tail_tolerance == pytest.approx(
        golden_spec.tail_constant * math.log(N_TRUNC) / N_TRUNC)


def test_zero_of_G(golden_spec):
    B = golden_spec.B_r
    assert limit_G(golden_spec, -B) == (0.0, 0.0)
    assert log_limit_G(golden_spec, -B) == -math.inf
    near = limit_G(golden_spec, -B + 1e-9)[0]
    assert 0 < near < 1e-6


def test_G_is_positive_on_the_interval(benchmark_alpha):
    table = build_convergents(benchmark_alpha, 10)
    data = spectral(benchmark_alpha, table)
    spec = make_limit_spec(data, 1, n_trunc=N_TRUNC)
    interval = interval_I(data, 1)
    sweep = limit_sweep(spec, interval.grid(200))
    assert list(sweep.columns) == ['x', 'G', 'tail_bound']
    assert (sweep['G'] > 0).all()
    assert (sweep['tail_bound'] >= 0).all()


def test_truncation_certificate(golden_spectral):
    coarse = make_limit_spec(golden_spectral, 1, n_trunc=N_TRUNC)
    fine = make_limit_spec(golden_spectral, 1, n_trunc=4 * N_TRUNC)
    for x in (-0.35, -0.1, 0.0, 0.2, 0.33):
        value, bound = limit_G(coarse, x)
        assert abs(value - limit_G(fine, x)[0]) <= bound


def test_series_tail_matches_direct_tail(golden_spec):
    terms = _limit_terms(golden_spec.alpha_r, golden_spec.B_r, N_TRUNC)
    v = 0.1 + golden_spec.B_r / 2
    j = np.arange(1, SERIES_TERMS + 1)
    series = terms.log_base - np.sum((v ** 2) ** j * terms.w_sums / j)
    direct = _direct_tail(golden_spec, v, HEAD_TERMS)
    assert series == pytest.approx(direct, abs=1e-10)
    # far outside the series regime the direct tail takes over
    assert math.isfinite(log_limit_G(golden_spec, 300.0))


def test_tolerance_cap(golden_spectral):
    with pytest.raises(ToleranceUnreachableError):
        make_limit_spec(golden_spectral, 1, tail_tolerance=1e-12)
    with pytest.raises(ToleranceUnreachableError):
        make_limit_spec(golden_spectral, 1, n_trunc=2 ** 25)
    with pytest.raises(DomainError):
        make_limit_spec(golden_spectral, 2)


def test_automatic_truncation_meets_tolerance(golden_spectral):
    spec = make_limit_spec(golden_spectral, 1, tail_tolerance=1e-4)
    assert spec.tail_constant * math.log(spec.n_trunc) / spec.n_trunc <= 1e-4
    assert spec.n_trunc & (spec.n_trunc - 1) == 0


def test_tail_constant_is_cached():
    alpha_r = QuadraticIrrational((0,), (1,))
    B = 1 / math.sqrt(5)
    assert calibrate_tail_constant(alpha_r, B) is \
        calibrate_tail_constant(alpha_r, B)
    assert calibrate_tail_constant(alpha_r, B) > 0


def test_golden_interval(golden_spectral):
    B = 1 / math.sqrt(5)
    interval = interval_I(golden_spectral, 1)
    assert interval.lo == pytest.approx(-7 / 8 * B)
    assert interval.hi == pytest.approx(7 / 8 * B)
    assert interval.k0 is None


def test_interval_uses_the_next_quotient():
    alpha = QuadraticIrrational((0,), (2,))
    data = spectral(alpha, build_convergents(alpha, 10))
    B = float(data.B_of(1))
    interval = interval_I(data, 1)
    assert interval.lo < 0 < interval.hi
    assert interval.hi == pytest.approx((2 - 1 / 10) * B)


def test_global_k0(golden_spectral, golden_table):
    assert interval_I(golden_spectral, 1, golden_table).k0 == 1
    assert global_k0(golden_spectral, golden_table) == 1


def test_g_N_product(golden, golden_table, golden_spec):
    assert g_N_product(golden, 1, 5, golden_table) == 0.0
    specs = {1: golden_spec}
    single = g_N_product(golden, 89, 3, golden_table, specs)
    assert single == pytest.approx(log_limit_G(golden_spec, 0.0))


def test_G_N_tracks_P_N(golden, golden_table, golden_spec):
    specs = {1: golden_spec}
    gaps = []
    for N in range(1, golden_table.q[12]):
        log_P = sudler_stream(IrrationalTarget(golden), N).log_P(N)
        log_G = g_N_product(golden, N, 1, golden_table, specs)
        gaps.append(log_P - log_G)
    assert max(np.abs(gaps)) < 5


def test_convergence_report_columns(golden, golden_spec):
    df = convergence_report(golden, 1, np.linspace(-0.3, 0.3, 5),
                            [4, 5], spec=golden_spec)
    assert list(df['k']) == [5, 6]
    assert list(df.columns) == [
        'm', 'k', 'q_k', 'sup_error', 'rate_envelope', 'additive_envelope',
        'envelope_ratio']
    assert df['rate_envelope'].iloc[0] == pytest.approx(rate_envelope(8))


@pytest.mark.slow
def test_convergence_to_G(golden, golden_spectral):
    spec = make_limit_spec(golden_spectral, 1, tail_tolerance=1e-5)
    grid = interval_I(golden_spectral, 1).grid(100)
    df = convergence_report(golden, 1, grid, [7, 11, 15, 19], spec=spec)
    assert list(df['k']) == [8, 12, 16, 20]
    errors = list(df['sup_error'])
    assert errors == sorted(errors, reverse=True)
    assert errors[-1] < 1e-3
    ratios = df['envelope_ratio']
    assert ratios.iloc[1:].max() <= 2 * ratios.iloc[0]

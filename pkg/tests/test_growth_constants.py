import math
from fractions import Fraction

import numpy as np
import pytest

from src.data.continued_fractions import QuadraticIrrational, build_convergents
from src.data.make_dataset import convergent_corpus
from src.exceptions import BudgetError
from src.models.growth_constants import (
    INFINITY, BoundCheck, _growing_band, bd_check, default_window,
    estimate_growth_rate, estimate_K, estimate_many, fit_line,
    kashaev_ratio, parse_c, vol_41)


LOG_PHI = math.log((1 + math.sqrt(5)) / 2)
VOL = 2.0298832128193072


def _check(report, name):
    return next(b for b in report.bounds if b.name == name)


def test_vol_41():
    assert vol_41() == pytest.approx(VOL, abs=1e-9)
    assert abs(vol_41(panels=128) - vol_41()) < 1e-10
    assert vol_41() / (2 * math.pi) == pytest.approx(0.32306, abs=1e-5)


@pytest.mark.parametrize('text, c', [
    ('inf', INFINITY), ('Infinity', INFINITY), ('2', 2.0), ('0.5', 0.5)])
def test_parse_c(text, c):
    assert parse_c(text) == c


@pytest.mark.parametrize('text', ['0', '-1', 'two'])
def test_parse_c_rejects(text):
    with pytest.raises(ValueError):
        parse_c(text)


def test_fit_line():
    slope, intercept, residuals = fit_line([1, 2, 3, 4], [3, 5, 7, 9])
    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(1.0)
    assert np.max(np.abs(residuals)) < 1e-12


def test_growing_band():
    assert _growing_band(np.array([0.01, -0.01, 0.0, 0.0, 0.5, -0.5]))
    assert not _growing_band(np.array([0.1, -0.1, 0.1, -0.1, 0.1, -0.1]))


def test_bound_check_observational():
    check = BoundCheck('margin', 1.0, 0.0, False, observational=True)
    assert not check.failed
    assert BoundCheck('hard', 1.0, 0.0, False).failed


def test_kashaev_asymptotics():
    ratios = [kashaev_ratio(n) for n in (500, 1000, 2000)]
    for r in ratios:
        assert 0.8 < r < 1.25
    gaps = [abs(r - 1) for r in ratios]
    assert gaps == sorted(gaps, reverse=True)


def test_bd_check_trivial():
    report = bd_check(Fraction(0))
    assert report.log_J == 0.0
    assert report.prediction == 0.0
    assert report.deviation == 0.0


def test_bd_check_fails_for_bounded_quotients(golden):
    for x in convergent_corpus(golden, 10, 20):
        report = bd_check(x)
        assert report.deviation / report.k >= 0.3


def test_default_window(golden):
    lo, hi = default_window(golden, budget=1000)
    table = build_convergents(golden, hi + 1)
    cost = sum(table.q[k] for k in range(lo, hi + 1))
    assert lo < hi
    assert cost <= 1000 < cost + table.q[hi + 1]


def test_budget_error(sqrt2):
    with pytest.raises(BudgetError):
        estimate_K(sqrt2, INFINITY, (6, 40))


def test_window_shorter_than_period():
    alpha = QuadraticIrrational((0,), (1, 2, 3))
    with pytest.raises(ValueError):
        estimate_K(alpha, INFINITY, (4, 5))


def test_golden_maximum(golden):
    report = estimate_K(golden, INFINITY, (8, 24))
    assert report.K_hat == pytest.approx(LOG_PHI, abs=0.02)
    assert report.ks == list(range(8, 25))
    assert len(report.per_k_values) == 17
    assert not report.unstable
    assert _check(report, 'K_inf >= lambda').passed
    assert _check(report, 'log max + log min = log q_k').passed
    assert _check(report, 'K_inf - lambda (strict margin)').observational
    record = report.to_dict()
    assert record['c'] == 'inf'
    assert record['k_window'] == [8, 24]


def test_golden_squares(golden):
    k_inf, k_2 = estimate_many(golden, [INFINITY, 2], (8, 24))
    assert k_2.K_hat == pytest.approx(0.55, abs=0.05)
    for name in ('K_c >= (1/c + 1/2) lambda', 'K_c - lambda/c <= K_inf',
                 'K_inf <= K_c'):
        assert _check(k_2, name).passed
    assert k_inf.c == INFINITY


def test_golden_growth_rate_in_log_M(golden):
    rate = estimate_growth_rate(golden, INFINITY, (8, 20))
    assert rate.lam == pytest.approx(LOG_PHI, rel=1e-12)
    assert rate.implied_K == pytest.approx(LOG_PHI, abs=0.1)


@pytest.mark.slow
def test_sqrt2_maximum(sqrt2):
    report = estimate_K(sqrt2, INFINITY, (6, 18))
    assert report.K_hat == pytest.approx(math.log(1 + math.sqrt(2)),
                                         abs=0.02)


@pytest.mark.slow
@pytest.mark.parametrize('pre_period', [(3,), (0,)])
def test_sqrt10_exceeds_lambda(pre_period):
    alpha = QuadraticIrrational(pre_period, (6,))
    report = estimate_K(alpha, INFINITY, (3, 9))
    lam = math.log(3 + math.sqrt(10))
    assert report.K_hat - report.slope_slack - lam >= 0.02

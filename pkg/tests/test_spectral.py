import math
from fractions import Fraction

import pytest

from conftest import PHI
from src.data.continued_fractions import QuadraticIrrational, build_convergents
from src.data.spectral import (
    avg_partial_quotient, kappa, period_matrix, reversed_period, spectral)


def test_golden_spectral_data(golden, golden_table):
    data = spectral(golden, golden_table)
    assert data.T == (((0, 1), (1, 1)),)
    assert float(data.eta) == pytest.approx(PHI, rel=1e-14)
    assert float(data.lam) == pytest.approx(0.4812118250596034, rel=1e-14)
    assert float(data.B_of(1)) == pytest.approx(1 / math.sqrt(5), rel=1e-12)
    assert data.kappa == Fraction(1, 4)
    assert data.alpha_rev == (QuadraticIrrational((0,), (1,)),)


def test_sqrt2_lambda(sqrt2):
    data = spectral(sqrt2, build_convergents(sqrt2, 20))
    assert float(data.lam) == pytest.approx(math.log(1 + math.sqrt(2)),
                                            rel=1e-14)
    assert data.det == -1 and data.trace == 2


def test_q_k_follows_the_closed_form(benchmark_alpha):
    table = build_convergents(benchmark_alpha, 25)
    data = spectral(benchmark_alpha, table)
    for k in range(3, table.k_max + 1):
        m = k - 1
        q_hat = (data.C[0] * data.eta ** m
                 + data.D[0] * (-1) ** m * data.eta ** (-m))
        assert float(q_hat) == pytest.approx(table.q[k], rel=1e-12)
        assert math.log(table.q[k]) / k == pytest.approx(
            float(data.lam), abs=3.0 / k)


def test_period_two_matrices_share_trace():
    alpha = QuadraticIrrational((0,), (1, 2))
    assert period_matrix(alpha, 1) != period_matrix(alpha, 2)
    data = spectral(alpha, build_convergents(alpha, 12))
    assert data.det == 1
    assert data.trace == 4
    assert len(data.B) == 2
    assert reversed_period(alpha, 1) == QuadraticIrrational((0,), (1, 2))
    assert reversed_period(alpha, 2) == QuadraticIrrational((0,), (2, 1))


def test_kappa_and_mean():
    sqrt5 = QuadraticIrrational((2,), (4,))
    assert kappa(sqrt5) == Fraction(1, 7)
    assert avg_partial_quotient(sqrt5) == 4
    assert avg_partial_quotient(QuadraticIrrational((0,), (1, 2))) == \
        Fraction(3, 2)


def test_shallow_table_is_rejected(golden):
    with pytest.raises(ValueError):
        spectral(golden, build_convergents(golden, 2))


@pytest.mark.parametrize('k_max', [25, 60, 100])
def test_deep_tables(benchmark_alpha, k_max):
    table = build_convergents(benchmark_alpha, k_max)
    data = spectral(benchmark_alpha, table)
    for k in range(1, k_max + 1):
        d_hat = data.E[0] * data.eta ** (1 - k)
        assert float(d_hat / table.delta[k]) == pytest.approx(1, rel=1e-12)

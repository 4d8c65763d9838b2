from fractions import Fraction

import pytest

from conftest import small_fractions
from src.config import RunConfig
from src.data.continued_fractions import QuadraticIrrational, build_convergents
from src.data.make_dataset import convergent_corpus, random_reduced_fractions
from src.data.spectral import kappa
from src.models import metrics


@pytest.fixture(scope='module')
def corpus():
    return random_reduced_fractions(50, 1000, seed=7)


def test_reflection_suite(corpus):
    result = metrics.reflection_suite(corpus)
    assert result.passed
    assert len(result.table) == 50
    assert result.counterexamples.empty
    assert result.summary() == {'suite': 'reflection', 'cases': 50,
                                'failures': 0, 'pass': True}


def test_average_suite(corpus):
    result = metrics.average_suite(corpus)
    assert result.passed
    assert result.table['tolerance'].max() == pytest.approx(1e-10)


def test_exhaustive_small_denominators():
    fractions = small_fractions(30)
    assert metrics.reflection_suite(fractions).passed
    assert metrics.average_suite(fractions).passed


def test_relaxed_profile_widens_tolerances():
    config = RunConfig(tolerance_profile='relaxed')
    result = metrics.reflection_suite([Fraction(3, 10)], config)
    assert result.table['tolerance'].iloc[0] == pytest.approx(1e-6)
    assert result.table['last_tolerance'].iloc[0] == pytest.approx(1e-8)


def test_cotangent_suite(golden):
    targets = convergent_corpus(golden, 1, 15) + [(golden, 12)]
    result = metrics.cotangent_suite(targets)
    assert result.passed
    assert list(result.table['q_k'])[-1] == 233


def test_transfer_suite(golden):
    result = metrics.transfer_suite(golden, range(5, 13))
    assert result.passed
    assert result.table['fitted_C'].nunique() == 1
    large = metrics.transfer_suite(QuadraticIrrational((0,), (10,)),
                                   range(2, 6))
    assert large.passed


def test_epsilon_rows(golden):
    table = build_convergents(golden, 5)
    x, rows = metrics.epsilon_rows(2, table, float(kappa(golden)))
    assert x.digits[2] == 1
    [(k, eps, inside, below)] = rows
    assert k == 2
    assert eps == 0.0
    assert inside and below


@pytest.mark.parametrize('name, upto_k', [('golden', 12), ('sqrt2', 6)])
def test_factorization_suite(name, upto_k, request):
    alpha = request.getfixturevalue(name)
    result = metrics.factorization_suite(alpha, upto_k)
    assert result.passed
    table = build_convergents(alpha, upto_k)
    assert len(result.table) == table.q[upto_k]
    assert result.table['round_trip'].all()


def test_bounds_suite(golden):
    result = metrics.bounds_suite(golden, [2], (8, 20))
    assert set(result.table['c']) == {2}
    assert result.table['bound'].str.contains('K_inf <= K_c').any()
    hard = result.table[~result.table['observational']]
    assert hard['pass'].all()
    assert result.passed


def test_registry():
    assert sorted(metrics.SUITES) == [
        'average', 'bounds', 'cotangent', 'factorization', 'reflection',
        'transfer']


@pytest.mark.slow
@pytest.mark.parametrize('seed', [1, 2, 3])
def test_reflection_at_full_scale(seed):
    fractions = random_reduced_fractions(1000, 10 ** 5, seed=seed)
    result = metrics.reflection_suite(fractions)
    assert result.passed, result.counterexamples

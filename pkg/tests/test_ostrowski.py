import itertools
from collections import Counter

import numpy as np
import pytest

from conftest import PHI
from src.data.continued_fractions import build_convergents
from src.data.ostrowski import (
    OstrowskiExpansion, capacity, decode, encode, epsilon, tail_value,
    validate)
from src.exceptions import InvalidDigitsError, OstrowskiRangeError


def test_golden_four(golden):
    table = build_convergents(golden, 6)
    x = encode(4, table)
    assert x.digits == (0, 1, 0, 1)
    assert x.to_json() == [0, 1, 0, 1]
    assert x.top == 3
    assert decode(x, table) == 4


def test_sqrt2_eleven(sqrt2):
    table = build_convergents(sqrt2, 4)
    assert encode(11, table).digits == (1, 0, 2)


def test_zero(golden):
    x = encode(0, build_convergents(golden, 4))
    assert x.digits == (0,)
    assert x.top == -1


def test_round_trip_golden_exhaustive(golden):
    table = build_convergents(golden, 15)
    for N in range(table.q[15]):
        assert decode(encode(N, table), table) == N


def test_round_trip_sampled(benchmark_alpha):
    table = build_convergents(benchmark_alpha, 15)
    rng = np.random.default_rng(7)
    for N in rng.integers(0, table.q[15], size=500):
        N = int(N)
        assert decode(encode(N, table), table) == N


def test_epsilon_of_a_single_digit(golden):
    table = build_convergents(golden, 6)
    x = encode(2, table)
    assert x.digits == (0, 0, 1)
    assert float(epsilon(0, x, table)) == pytest.approx(PHI ** -3, rel=1e-12)
    assert float(epsilon(1, x, table)) == pytest.approx(-PHI ** -3,
                                                       rel=1e-12)
    assert float(epsilon(2, x, table)) == 0.0


def test_tail_value(sqrt2):
    table = build_convergents(sqrt2, 4)
    x = encode(11, table)
    assert tail_value(0, x, table) == 11
    assert tail_value(1, x, table) == 10


def test_out_of_range(golden):
    table = build_convergents(golden, 4)
    assert capacity(table) == 8
    with pytest.raises(OstrowskiRangeError):
        encode(8, table)
    with pytest.raises(OstrowskiRangeError):
        encode(-1, table)


def test_digit_rules(sqrt2):
    table = build_convergents(sqrt2, 4)
    # b_1 = a_2 needs b_0 = 0
    with pytest.raises(InvalidDigitsError):
        validate(OstrowskiExpansion(5, (1, 2)), table)
    # b_0 <= a_1 - 1
    with pytest.raises(InvalidDigitsError):
        validate(OstrowskiExpansion(2, (2,)), table)
    with pytest.raises(InvalidDigitsError):
        decode(OstrowskiExpansion(6, (0, 2)), table)


def _valid_digit_vectors(table, length):
    ranges = [range(table.partial_quotient(1))]
    ranges += [range(table.partial_quotient(k + 1) + 1)
               for k in range(1, length)]
    for digits in itertools.product(*ranges):
        total = sum(b * q for b, q in zip(digits, table.q))
        try:
            validate(OstrowskiExpansion(total, digits), table)
        except InvalidDigitsError:
            continue
        yield total, digits


@pytest.mark.parametrize('name', ['golden', 'sqrt2'])
def test_expansion_is_unique_below_q10(name, request):
    alpha = request.getfixturevalue(name)
    table = build_convergents(alpha, 10)
    counts = Counter()
    for total, digits in _valid_digit_vectors(table, 10):
        counts[total] += 1
        padded = encode(total, table).digits
        assert padded == digits[:len(padded)]
        assert not any(digits[len(padded):])
    assert sorted(counts) == list(range(table.q[10]))
    assert set(counts.values()) == {1}

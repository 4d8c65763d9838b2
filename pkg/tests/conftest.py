import math
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp

from src.config import RunConfig
from src.data.continued_fractions import QuadraticIrrational, build_convergents
from src.data.make_dataset import BENCHMARK_IRRATIONALS


PHI = (1 + math.sqrt(5)) / 2


@pytest.fixture
def golden():
    return QuadraticIrrational((1,), (1,))


@pytest.fixture
def sqrt2():
    return QuadraticIrrational((1,), (2,))


@pytest.fixture
def golden_table(golden):
    return build_convergents(golden, 30)


@pytest.fixture
def config():
    return RunConfig()


@pytest.fixture(params=sorted(BENCHMARK_IRRATIONALS))
def benchmark_alpha(request):
    return BENCHMARK_IRRATIONALS[request.param]


def naive_log_products(x, n_max, dps=40):
    """log P_N for N = 0..n_max by multiplying the sines one by one."""
    with mp.workdps(dps):
        value = mpmath.mpf(x.numerator) / x.denominator
        out, total = [0.0], mpmath.mpf(0)
        for n in range(1, n_max + 1):
            total += mpmath.log(abs(2 * mpmath.sinpi(n * value)))
            out.append(float(total))
    return out


def naive_log_power_sum(logs, c):
    with mp.workdps(40):
        return float(mpmath.log(mpmath.fsum(
            mpmath.exp(c * mpmath.mpf(v)) for v in logs)) / c)


@pytest.fixture
def oracle():
    return naive_log_products


@pytest.fixture
def power_oracle():
    return naive_log_power_sum


def small_fractions(b_max):
    return [Fraction(a, b) for b in range(2, b_max + 1) for a in range(1, b)
            if math.gcd(a, b) == 1]

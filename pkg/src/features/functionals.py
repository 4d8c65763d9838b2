"""Functionals of Sudler products and the identities they satisfy.

Everything is computed in one streaming pass over log P_N, so a/b with
b around 10^8 never materializes more than a chunk at a time.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from src.config import RunConfig
from src.data.continued_fractions import (
    QuadraticIrrational, build_convergents, cf_of_rational)
from src.exceptions import DomainError, FormError
from src.features.sudler import (
    IrrationalTarget, as_target, cotangent_partial_sums, iter_log_products)


COTANGENT_CONSTANT = 124
COTANGENT_LOG_FACTOR = 24


log = logging.getLogger(__name__)


def _config(config):
    return config if config is not None else RunConfig()


def _irrational(alpha, config):
    return IrrationalTarget(alpha, _config(config).precision_bits)


def _stream(target, n_max, config, shift=None):
    config = _config(config)
    return iter_log_products(target, n_max, config.chunk_size,
                             config.workers, shift)


@dataclass
class CheckResult:
    """One verified quantity: `{name, value, residual, bound, pass}`."""

    name: str
    value: float
    residual: float
    bound: float
    passed: bool

    def to_dict(self):
        record = asdict(self)
        record['pass'] = record.pop('passed')
        return record


@dataclass
class StreamSummary:
    """Single-pass statistics of log P_N over n_lo <= N <= n_max."""

    n_lo: int = 0
    log_max: float = -math.inf
    argmax: int = -1
    log_min: float = math.inf
    argmin: int = -1
    total: float = 0.0
    count: int = 0
    log_sums: Dict[float, float] = field(default_factory=dict)

    def update(self, start, values, cs=()):
        cut = max(self.n_lo - start, 0)
        if cut >= len(values):
            return
        values = values[cut:]
        start += cut
        i, j = int(np.argmax(values)), int(np.argmin(values))
        # strict comparisons keep the earliest witness
        if values[i] > self.log_max:
            self.log_max, self.argmax = float(values[i]), start + i
        if values[j] < self.log_min:
            self.log_min, self.argmin = float(values[j]), start + j
        self.total += float(np.sum(values))
        self.count += len(values)
        for c in cs:
            part = logsumexp(c * values)
            self.log_sums[c] = float(
                np.logaddexp(self.log_sums.get(c, -math.inf), part))

    @property
    def mean(self):
        return self.total / self.count


def summarize(target, n_max, cs=(), n_lo=0, config=None):
    """Scan log P_N(target) for n_lo <= N <= n_max in one pass."""
    summary = StreamSummary(n_lo=n_lo)
    for start, values in _stream(target, n_max, config):
        summary.update(start, values, cs)
    return summary


def _full_range(target):
    target = as_target(target)
    if not isinstance(target, Fraction):
        raise ValueError("an explicit N range is needed for {}".format(
            target))
    return 0, target.denominator


def jones_F(x, config=None):
    """log J_{4_1,0}(e(a/b)) = log sum_{N<b} P_N(a/b)^2."""
    x = Fraction(x)
    return summarize(x, x.denominator - 1, cs=(2,), config=config).log_sums[2]


def power_sum(target, c, N_range=None, config=None):
    """log (sum_N P_N^c)^{1/c} over the half-open range N_range.

    N_range defaults to [0, b) for a/b.
    """
    if c <= 0:
        raise DomainError("c must be positive, got {}".format(c))
    lo, hi = N_range if N_range is not None else _full_range(target)
    if hi <= lo:
        raise DomainError("empty N range [{}, {})".format(lo, hi))
    summary = summarize(target, hi - 1, cs=(c,), n_lo=lo, config=config)
    return summary.log_sums[c] / c


@dataclass(frozen=True)
class ExtremeReport:
    log_max: float
    argmax: int
    log_min: float
    argmin: int
    log_b_or_qk: float

    @property
    def reflection_residual(self):
        """log max + log min - log b; zero for rational targets."""
        return self.log_max + self.log_min - self.log_b_or_qk


def extremes(target, n_hi=None, config=None):
    """Max and min of log P_N over 0 <= N < n_hi (n_hi = b for a/b)."""
    target = as_target(target)
    if n_hi is None:
        _, n_hi = _full_range(target)
        if n_hi < 2:
            raise DomainError("extremes need b >= 2")
    summary = summarize(target, n_hi - 1, config=config)
    return ExtremeReport(summary.log_max, summary.argmax,
                         summary.log_min, summary.argmin, math.log(n_hi))


def log_products(target, n_max, config=None):
    return np.concatenate([v for _, v in _stream(target, n_max, config)])


def reflection_residuals(x, config=None):
    """log P_N + log P_{b-N-1} - log b for every N < b."""
    x = Fraction(x)
    values = log_products(x, x.denominator - 1, config)
    return values + values[::-1] - math.log(x.denominator)


def reflection_check(x, N, config=None):
    x = Fraction(x)
    if not 0 <= N < x.denominator:
        raise DomainError("N={} outside [0, {})".format(N, x.denominator))
    return float(reflection_residuals(x, config)[N])


def average_log_check(x, config=None):
    """(1/b) sum_{N<b} log P_N(a/b) - (log b) / 2."""
    x = Fraction(x)
    summary = summarize(x, x.denominator - 1, config=config)
    return summary.mean - math.log(x.denominator) / 2


def last_term_check(x, config=None):
    """Relative deviation of P_{b-1}(a/b) from b."""
    x = Fraction(x)
    summary = summarize(x, x.denominator - 1, n_lo=x.denominator - 1,
                        config=config)
    return math.expm1(summary.total - math.log(x.denominator))


def _quotients_bound(digits, k):
    """(A_k, a_{k+1}) from partial quotients a_0, a_1, ..."""
    A_k = 1 + max(digits[1:k + 1], default=0)
    a_next = digits[k + 1] if k + 1 < len(digits) else None
    return A_k, a_next


def cotangent_bound(A_k, q_k):
    return (COTANGENT_CONSTANT + COTANGENT_LOG_FACTOR * math.log(A_k)) * q_k


@dataclass(frozen=True)
class CotangentReport:
    target: str
    N: int
    value: float
    bound: float
    A_k: int
    q_k: int

    @property
    def passed(self):
        return abs(self.value) <= self.bound


def _cotangent_setup(target, k, config):
    target = as_target(target)
    if isinstance(target, Fraction):
        digits = cf_of_rational(target)
        k = len(digits) - 1 if k is None else k
        A_k, _ = _quotients_bound(digits, k)
        return target, A_k, target.denominator
    if k is None:
        raise ValueError("k is required for an irrational target")
    table = build_convergents(target.alpha, k)
    return _irrational(target.alpha, config), table.A(k), table.q[k]


def cotangent_sum(target, N, k=None, config=None):
    """sum_{n=1}^N cot(pi n alpha) with the bound (124 + 24 log A_k) q_k.

    For a rational p_k/q_k the index k defaults to its expansion length.
    """
    target, A_k, q_k = _cotangent_setup(target, k, config)
    if not 0 <= N < q_k:
        raise DomainError("N={} outside [0, q_k={})".format(N, q_k))
    config = _config(config)
    sums = cotangent_partial_sums(target, N, config.chunk_size,
                                  config.workers)
    return CotangentReport(str(target), N, float(sums[-1]),
                           cotangent_bound(A_k, q_k), A_k, q_k)


def cotangent_sweep(target, k=None, config=None):
    """The N < q_k with the largest |cotangent sum|."""
    target, A_k, q_k = _cotangent_setup(target, k, config)
    config = _config(config)
    sums = cotangent_partial_sums(target, q_k - 1, config.chunk_size,
                                  config.workers)
    N = int(np.argmax(np.abs(sums)))
    return CotangentReport(str(target), N, float(sums[N]),
                           cotangent_bound(A_k, q_k), A_k, q_k)


def transfer_bound(table, k):
    """log A_k / a_{k+1}."""
    return math.log(table.A(k)) / table.partial_quotient(k + 1)


def transfer_check(alpha, k, N, config=None):
    """(residual, bound) of log P_N(alpha) - log P_N(p_k/q_k), N < q_k."""
    table = build_convergents(alpha, k + 1)
    if not 0 <= N < table.q[k]:
        raise DomainError("N={} outside [0, q_{}={})".format(
            N, k, table.q[k]))
    irrational = summarize(_irrational(alpha, config), N, n_lo=N,
                           config=config)
    rational = summarize(table.convergent(k), N, n_lo=N, config=config)
    return irrational.total - rational.total, transfer_bound(table, k)


@dataclass(frozen=True)
class TransferReport:
    k: int
    q_k: int
    sup_residual: float
    argsup: int
    bound: float
    max_residual: float
    power_residuals: Dict[float, float]

    @property
    def ratio(self):
        return self.sup_residual / self.bound if self.bound else math.inf


def transfer_sweep(alpha, k, cs=(1, 2), config=None):
    """sup over N < q_k of the transfer residual, plus the same comparison
    for the maxima and the c-power sums of the two products."""
    table = build_convergents(alpha, k + 1)
    q_k = table.q[k]
    pairs = zip(_stream(_irrational(alpha, config), q_k - 1, config),
                _stream(table.convergent(k), q_k - 1, config))
    sup, argsup = 0.0, 0
    left, right = StreamSummary(), StreamSummary()
    for (start, v_alpha), (_, v_rat) in pairs:
        diff = np.abs(v_alpha - v_rat)
        i = int(np.argmax(diff))
        if diff[i] > sup:
            sup, argsup = float(diff[i]), start + i
        left.update(start, v_alpha, cs)
        right.update(start, v_rat, cs)
    powers = {c: (left.log_sums[c] - right.log_sums[c]) / c for c in cs}
    return TransferReport(k, q_k, sup, argsup, transfer_bound(table, k),
                          left.log_max - right.log_max, powers)


@dataclass(frozen=True)
class ReflectionReport:
    k: int
    q_k: int
    sup_residual: float
    bound: float
    extremes_residual: float


def irrational_reflection_check(alpha, k, config=None):
    """log P_N(alpha) + log P_{q_k-N-1}(alpha) - log q_k over N < q_k."""
    table = build_convergents(alpha, k + 1)
    q_k = table.q[k]
    values = log_products(_irrational(alpha, config), q_k - 1, config)
    residuals = values + values[::-1] - math.log(q_k)
    return ReflectionReport(
        k, q_k, float(np.max(np.abs(residuals))), transfer_bound(table, k),
        float(values.max() + values.min() - math.log(q_k)))


def irrational_growth(alpha, M, c, config=None):
    """(log (sum_{N<=M} P_N(alpha)^c)^{1/c}, log max_{N<=M} P_N(alpha))."""
    if c <= 0:
        raise DomainError("c must be positive, got {}".format(c))
    summary = summarize(_irrational(alpha, config), M, cs=(c,),
                        config=config)
    return summary.log_sums[c] / c, summary.log_max


def lubinsky_exponents(K_inf, lam, slack=0.0):
    """(c1, c2) with c2 = c1 + 1 = K_inf / lambda.

    Raises:
        DomainError: if K_inf < lambda - slack
    """
    if lam <= 0:
        raise DomainError("lambda must be positive, got {}".format(lam))
    if K_inf < lam - slack:
        raise DomainError(
            "K_inf={} is below lambda={}".format(K_inf, lam))
    c2 = K_inf / lam
    return c2 - 1, c2


def _check_h_form(alpha):
    if not (isinstance(alpha, QuadraticIrrational)
            and alpha.pre_period == (0,) and alpha.p == 1):
        raise FormError(
            "h along convergents needs alpha = [0; (a)], got {}".format(
                alpha))


def zagier_h(alpha, k, config=None):
    """log J(e(p_k/q_k)) - log J(e(p_{k-1}/q_{k-1})) for alpha = [0; (a)]."""
    _check_h_form(alpha)
    if k < 1:
        raise DomainError("k must be >= 1")
    table = build_convergents(alpha, k)
    return (jones_F(table.convergent(k), config)
            - jones_F(table.convergent(k - 1), config))


def zagier_h_sequence(alpha, K, config=None):
    """Table of k, p_k, q_k, log J, h and the running mean of h."""
    _check_h_form(alpha)
    table = build_convergents(alpha, K)
    log_J = [jones_F(table.convergent(k), config) for k in range(K + 1)]
    h = np.diff(log_J)
    ks = np.arange(1, K + 1)
    df = pd.DataFrame({
        'k': ks,
        'p_k': [table.p[k] for k in ks],
        'q_k': [table.q[k] for k in ks],
        'log_J': log_J[1:],
        'h': h,
        'cesaro_mean': np.cumsum(h) / ks,
    })
    log.info("h sequence of %s up to k=%d: mean %.4f",
             alpha, K, df['cesaro_mean'].iloc[-1] if K else math.nan)
    return df

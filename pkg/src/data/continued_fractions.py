"""Exact continued-fraction arithmetic.

Rationals are `fractions.Fraction`; quadratic irrationals are given by their
eventually periodic partial quotients. Convergents are exact integers, the
approximation errors delta_k are mpmath reals at the table's precision.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

import mpmath
from mpmath import mp

from src.exceptions import (
    InconsistencyError, NonCanonicalError, PrecisionError)


DEFAULT_MIN_PRECISION_BITS = 256
PRECISION_MARGIN_BITS = 64
# guard bits used when evaluating a surd for a given target precision
SURD_GUARD_BITS = 16


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadraticIrrational:
    """alpha = [a0; a1, ..., as, (b1, ..., bp)].

    `pre_period` holds a0 followed by the s pre-period digits, `period` the
    p repeating digits. Non-canonical input is rejected, never rewritten.
    """

    pre_period: Tuple[int, ...]
    period: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'pre_period', tuple(self.pre_period))
        object.__setattr__(self, 'period', tuple(self.period))
        if not self.pre_period:
            raise ValueError("pre_period must contain at least a0")
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(a < 1 for a in self.pre_period[1:] + self.period):
            raise ValueError(
                "partial quotients a_k, k >= 1, must be positive")
        p = len(self.period)
        for d in range(1, p):
            if p % d == 0 and self.period == self.period[:d] * (p // d):
                raise NonCanonicalError(
                    "period {} repeats the shorter period {}".format(
                        self.period, self.period[:d]))
        if len(self.pre_period) > 1 and self.pre_period[-1] == self.period[-1]:
            raise NonCanonicalError(
                "pre-period digit {} can be absorbed into the period".format(
                    self.pre_period[-1]))

    @property
    def s(self):
        return len(self.pre_period) - 1

    @property
    def p(self):
        return len(self.period)

    def partial_quotient(self, k):
        if k < 0:
            raise IndexError(k)
        if k <= self.s:
            return self.pre_period[k]
        return self.period[(k - self.s - 1) % self.p]

    def residue(self, k):
        """[k]: the index r in 1..p with k = s + m*p + r."""
        if k <= self.s:
            raise ValueError(
                "residue undefined for k={} inside the pre-period".format(k))
        return (k - self.s - 1) % self.p + 1

    @property
    def max_quotient(self):
        """max_{k>=1} a_k."""
        return max(self.pre_period[1:] + self.period)

    def __str__(self):
        head = '[{}; '.format(self.pre_period[0])
        pre = ''.join('{}, '.format(a) for a in self.pre_period[1:])
        return head + pre + '(' + ', '.join(map(str, self.period)) + ')]'


Alpha = Union[QuadraticIrrational, Fraction]


def cf_of_rational(x):
    """Continued-fraction digits of a rational, last digit > 1.

    Args:
        x (Fraction or int): the rational a/b
    Returns:
        list: [a0, a1, ..., ak]
    """
    x = Fraction(x)
    a, b = x.numerator, x.denominator
    digits = []
    while True:
        quotient, remainder = divmod(a, b)
        digits.append(quotient)
        if remainder == 0:
            break
        a, b = b, remainder
    return digits


def convergents(digits):
    """Exact (p_k, q_k) for a finite digit sequence."""
    p_prev, p = 1, digits[0]
    q_prev, q = 0, 1
    ps, qs = [p], [q]
    for a in digits[1:]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        ps.append(p)
        qs.append(q)
    return ps, qs


def _digit_matrix(digits):
    # product of [[a, 1], [1, 0]] in digit order
    m00, m01, m10, m11 = 1, 0, 0, 1
    for a in digits:
        m00, m01 = m00 * a + m01, m00
        m10, m11 = m10 * a + m11, m10
    return m00, m01, m10, m11


def evaluate_surd(alpha, precision_bits=DEFAULT_MIN_PRECISION_BITS):
    """Value of a quadratic irrational from its fixed-point quadratic.

    The purely periodic tail y = [b1; ..., bp, y] is the positive root of
    k_p y^2 + (k_{p-1} - h_p) y - h_{p-1} = 0; the pre-period Moebius map is
    applied afterwards.
    """
    h, h_prev, k, k_prev = _digit_matrix(alpha.period)
    P, P_prev, Q, Q_prev = _digit_matrix(alpha.pre_period)
    with mp.workprec(precision_bits + SURD_GUARD_BITS):
        disc = (k_prev - h) ** 2 + 4 * k * h_prev
        y = (h - k_prev + mpmath.sqrt(disc)) / (2 * k)
        return (P * y + P_prev) / (Q * y + Q_prev)


def required_precision(q):
    """Bits needed so that delta_k = |q_k alpha - p_k| is not noise."""
    return 2 * math.log2(q) + PRECISION_MARGIN_BITS


def default_precision(q):
    return max(DEFAULT_MIN_PRECISION_BITS,
               math.ceil(required_precision(q)))


@dataclass(frozen=True)
class ConvergentTable:
    """Per-index records (a_k, p_k, q_k, delta_k), k = 0..k_max."""

    alpha: Alpha
    partial_quotients: Tuple[int, ...]
    p: Tuple[int, ...]
    q: Tuple[int, ...]
    delta: Tuple[mpmath.mpf, ...]
    alpha_value: mpmath.mpf
    precision_bits: int
    q_next: Optional[int] = None

    @property
    def k_max(self):
        return len(self.q) - 1

    @property
    def is_rational(self):
        return isinstance(self.alpha, Fraction)

    def partial_quotient(self, k):
        """a_k, also past k_max for quadratic irrationals."""
        if k < len(self.partial_quotients):
            return self.partial_quotients[k]
        if self.is_rational:
            raise IndexError(
                "a_{} does not exist for {}".format(k, self.alpha))
        return self.alpha.partial_quotient(k)

    def A(self, k):
        """A_k = 1 + max_{1 <= l <= k} a_l (1 for k = 0)."""
        return 1 + max((self.partial_quotient(l) for l in range(1, k + 1)),
                       default=0)

    def convergent(self, k):
        return Fraction(self.p[k], self.q[k])

    def delta_float(self, k):
        return float(self.delta[k])


def build_convergents(alpha, k_max, precision_bits=None):
    """Convergent table of a quadratic irrational or a rational.

    Args:
        alpha (QuadraticIrrational or Fraction): the number
        k_max (int): last index; capped at the expansion length of rationals
        precision_bits (int): working precision, defaults to
            max(256, 2 log2 q_{k_max} + 64)
    Returns:
        ConvergentTable
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    if isinstance(alpha, QuadraticIrrational):
        digits = [alpha.partial_quotient(k) for k in range(k_max + 2)]
    else:
        alpha = Fraction(alpha)
        digits = cf_of_rational(alpha)
        k_max = min(k_max, len(digits) - 1)
    ps, qs = convergents(digits)
    q_next = qs[k_max + 1] if len(qs) > k_max + 1 else None
    ps, qs, digits = ps[:k_max + 1], qs[:k_max + 1], digits[:k_max + 1]

    needed = required_precision(qs[-1])
    if precision_bits is None:
        precision_bits = default_precision(qs[-1])
    elif precision_bits < needed:
        raise PrecisionError(
            "precision_bits={} < 2 log2(q_{}) + {} = {:.1f}".format(
                precision_bits, k_max, PRECISION_MARGIN_BITS, needed))

    with mp.workprec(precision_bits):
        if isinstance(alpha, QuadraticIrrational):
            value = evaluate_surd(alpha, precision_bits)
        else:
            value = mpmath.mpf(alpha.numerator) / alpha.denominator
        delta = tuple(
            (q * value - p) * (-1) ** k
            for k, (p, q) in enumerate(zip(ps, qs)))

    table = ConvergentTable(
        alpha=alpha,
        partial_quotients=tuple(digits),
        p=tuple(ps),
        q=tuple(qs),
        delta=delta,
        alpha_value=value,
        precision_bits=precision_bits,
        q_next=q_next,
    )
    check_table(table)
    log.debug("built %d convergents of %s at %d bits",
              k_max + 1, alpha, precision_bits)
    return table


def check_table(table):
    """Raise InconsistencyError if a ConvergentTable invariant fails."""
    p_prev, q_prev = 1, 0
    for k, (p, q) in enumerate(zip(table.p, table.q)):
        if q * p_prev - p * q_prev != (-1) ** k:
            raise InconsistencyError(
                "determinant identity fails at k={}".format(k))
        p_prev, q_prev = p, q
    if table.is_rational:
        return

    q_all = list(table.q) + [table.q_next]
    with mp.workprec(table.precision_bits):
        for k, d in enumerate(table.delta):
            if d <= 0:
                raise InconsistencyError(
                    "delta_{} = {} is not positive".format(k, d))
            if k > 0 and d >= table.delta[k - 1]:
                raise InconsistencyError(
                    "delta_k not decreasing at k={}".format(k))
            if k >= 1 or table.partial_quotient(1) > 1:
                lower = mpmath.mpf(1) / (q_all[k + 1] + q_all[k])
                upper = mpmath.mpf(1) / q_all[k + 1]
                if not lower < d < upper:
                    raise InconsistencyError(
                        "delta_{} outside (1/(q_k+1 + q_k), 1/q_k+1)".format(
                            k))

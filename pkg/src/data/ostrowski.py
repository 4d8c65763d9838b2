"""Ostrowski numeration N = sum_k b_k q_k over a convergent table."""
import logging
from dataclasses import dataclass
from typing import Tuple

import mpmath
from mpmath import mp

from src.exceptions import InvalidDigitsError, OstrowskiRangeError


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OstrowskiExpansion:
    """Digits b_0, b_1, ..., little-endian, trimmed above the top nonzero."""

    N: int
    digits: Tuple[int, ...]

    def digit(self, k):
        return self.digits[k] if k < len(self.digits) else 0

    @property
    def top(self):
        """Index of the highest nonzero digit, -1 for N = 0."""
        for k in range(len(self.digits) - 1, -1, -1):
            if self.digits[k]:
                return k
        return -1

    def to_json(self):
        return list(self.digits)


def capacity(table):
    """Smallest integer the table can no longer encode."""
    if table.q_next is not None:
        return table.q_next
    # a finished rational expansion a/b encodes 0 <= N < b
    return table.q[-1]


def encode(N, table):
    """Greedy Ostrowski expansion of N; the digit rules are then asserted."""
    if N < 0:
        raise OstrowskiRangeError("N must be nonnegative, got {}".format(N))
    if N >= capacity(table):
        raise OstrowskiRangeError(
            "N={} is too large for a table with k_max={}".format(
                N, table.k_max))
    digits = [0] * (table.k_max + 1)
    rest = N
    for k in range(table.k_max, -1, -1):
        digits[k], rest = divmod(rest, table.q[k])
    while len(digits) > 1 and digits[-1] == 0:
        digits.pop()
    expansion = OstrowskiExpansion(N, tuple(digits))
    validate(expansion, table)
    return expansion


def validate(x, table):
    """Raise InvalidDigitsError unless x is a canonical Ostrowski expansion."""
    digits = x.digits
    if len(digits) > table.k_max + 1:
        raise InvalidDigitsError(
            "{} digits exceed the table (k_max={})".format(
                len(digits), table.k_max))
    for k, b in enumerate(digits):
        if b == 0:
            continue
        a_next = table.partial_quotient(k + 1)
        upper = a_next - 1 if k == 0 else a_next
        if not 0 <= b <= upper:
            raise InvalidDigitsError(
                "b_{}={} outside [0, {}]".format(k, b, upper))
        if k > 0 and b == a_next and digits[k - 1] != 0:
            raise InvalidDigitsError(
                "b_{}=a_{} requires b_{}=0".format(k, k + 1, k - 1))
    total = sum(b * q for b, q in zip(digits, table.q))
    if total != x.N:
        raise InvalidDigitsError(
            "digits sum to {}, not N={}".format(total, x.N))


def decode(x, table):
    validate(x, table)
    return sum(b * q for b, q in zip(x.digits, table.q))


def epsilon(k, x, table):
    """eps_k(N) = q_k sum_{l > k} (-1)^{k+l} b_l delta_l.

    Summed from the top digit downward at the table's precision.
    """
    if not 0 <= k <= table.k_max:
        raise IndexError(k)
    with mp.workprec(table.precision_bits):
        total = mpmath.mpf(0)
        for l in range(len(x.digits) - 1, k, -1):
            b = x.digits[l]
            if b:
                total += (-1) ** (k + l) * b * table.delta[l]
        return table.q[k] * total


def tail_value(k, x, table):
    """N_k = sum_{l >= k} b_l q_l."""
    return sum(b * q for b, q in zip(x.digits[k:], table.q[k:]))

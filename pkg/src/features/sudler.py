"""Sudler products P_N(alpha) = prod_{n=1}^N |2 sin(pi n alpha)| in log form.

Every target is reduced to an integer phase source: the n-th argument is
(n * num + shift) / den modulo 1. Rationals a/b use (a mod b, b) exactly;
quadratic irrationals use a fixed-point numerator of their fractional part
with den = 2^F, F wide enough that n * num carries no phase drift.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import joblib
import mpmath
import numpy as np
import pandas as pd
from mpmath import mp

from src.config import DEFAULT_CHUNK_SIZE, DEFAULT_PRECISION_BITS, progress
from src.data.continued_fractions import (
    SURD_GUARD_BITS, QuadraticIrrational, evaluate_surd)
from src.exceptions import SingularFactorError


# factors with |phase| below this are recomputed in extended precision
NEAR_SINGULAR = 1e-8
NEAR_SINGULAR_BITS = 128
FIXED_POINT_MARGIN_BITS = 64
INT64_LIMIT = 2 ** 63
FLOAT_EXACT_LIMIT = 2 ** 53


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IrrationalTarget:
    alpha: QuadraticIrrational
    precision_bits: int = DEFAULT_PRECISION_BITS

    def __str__(self):
        return str(self.alpha)


Target = Union[Fraction, IrrationalTarget]


def as_target(target):
    """Normalize ints, Fractions and bare QuadraticIrrationals to a Target."""
    if isinstance(target, IrrationalTarget):
        return target
    if isinstance(target, QuadraticIrrational):
        return IrrationalTarget(target)
    return Fraction(target)


@dataclass(frozen=True)
class PhaseSource:
    """Phases (n * num + shift) / den mod 1, exact in integer arithmetic."""

    num: int
    den: int
    shift: int = 0
    label: str = ''

    def fits_int64(self, n_hi):
        return (self.den < FLOAT_EXACT_LIMIT
                and self.den * (n_hi + 1) < INT64_LIMIT)

    def with_shift(self, shift):
        return PhaseSource(self.num, self.den, shift % self.den, self.label)


def fixed_point_bits(n_max, precision_bits):
    return max(precision_bits,
               FIXED_POINT_MARGIN_BITS + 2 * max(n_max, 1).bit_length())


def fixed_point(x, bits):
    """floor(frac(x) * 2^bits) for an mpmath real x."""
    with mp.workprec(bits + SURD_GUARD_BITS):
        x = mpmath.mpf(x)
        return int(mpmath.floor(mpmath.ldexp(x - mpmath.floor(x), bits)))


def phase_source(target, n_max, shift=None):
    """Phase source of `target` good for n <= n_max.

    Args:
        target (Fraction or IrrationalTarget): the number alpha
        n_max (int): largest index that will be evaluated
        shift (mpmath.mpf): optional real added to every argument n*alpha
    Returns:
        PhaseSource
    """
    target = as_target(target)
    if isinstance(target, Fraction):
        if shift is not None:
            raise ValueError("shifted phases need an irrational target")
        b = target.denominator
        return PhaseSource(target.numerator % b, b, 0, str(target))

    bits = fixed_point_bits(n_max, target.precision_bits)
    value = evaluate_surd(target.alpha, bits + SURD_GUARD_BITS)
    num = fixed_point(value, bits)
    off = 0 if shift is None else fixed_point(shift, bits)
    return PhaseSource(num, 1 << bits, off, str(target))


def residues(source, n_lo, n_hi):
    """(n, r) with r = (n * num + shift) mod den for n_lo <= n < n_hi."""
    n = np.arange(n_lo, n_hi, dtype=np.int64)
    if not source.fits_int64(n_hi):
        n = n.astype(object)
    return n, (n * source.num + source.shift) % source.den


def signed_phases(source, n, r):
    """Phases in [-1/2, 1/2) with their signed integer numerators.

    Raises:
        SingularFactorError: at the first n with an integer argument
    """
    zero = np.flatnonzero(r == 0)
    if zero.size:
        raise SingularFactorError(int(n[zero[0]]), source.label)
    s = np.where(2 * r >= source.den, r - source.den, r)
    return s, np.asarray(s / source.den, dtype=float)


def _log_sin_exact(s, den):
    with mp.workprec(NEAR_SINGULAR_BITS):
        x = mpmath.mpf(s) / den
        return float(mpmath.log(2 * abs(mpmath.sinpi(x))))


def log_factors_from_residues(source, n, r):
    s, f = signed_phases(source, n, r)
    out = np.log(2 * np.abs(np.sin(np.pi * f)))
    near = np.flatnonzero(np.abs(f) < NEAR_SINGULAR)
    for i in near:
        out[i] = _log_sin_exact(int(s[i]), source.den)
    if near.size:
        log.debug("%d near-singular factors recomputed for %s",
                  near.size, source.label)
    return out


def chunk_log_factors(source, n_lo, n_hi):
    """log|2 sin(pi n alpha)| for n_lo <= n < n_hi."""
    n, r = residues(source, n_lo, n_hi)
    return log_factors_from_residues(source, n, r)


def chunk_cotangents(source, n_lo, n_hi):
    """cot(pi n alpha) for n_lo <= n < n_hi."""
    n, r = residues(source, n_lo, n_hi)
    _, f = signed_phases(source, n, r)
    return 1.0 / np.tan(np.pi * f)


def log_sin_factor(x):
    """log|2 sin(pi x)|.

    A Fraction is reduced modulo 1 in integer arithmetic before rounding.

    Raises:
        SingularFactorError: if x is an integer
    """
    if isinstance(x, (Fraction, int)):
        x = Fraction(x)
        source = PhaseSource(x.numerator % x.denominator, x.denominator,
                             0, str(x))
        n, r = residues(source, 1, 2)
        return float(log_factors_from_residues(source, n, r)[0])
    f = float(x) - round(float(x))
    if f == 0:
        raise SingularFactorError(1, x)
    if abs(f) < NEAR_SINGULAR:
        with mp.workprec(NEAR_SINGULAR_BITS):
            return float(mpmath.log(2 * abs(mpmath.sinpi(f))))
    return float(np.log(2 * abs(np.sin(np.pi * f))))


def chunk_bounds(n_max, chunk_size):
    """Half-open index ranges [lo, hi) covering 1..n_max, ascending."""
    return [(lo, min(lo + chunk_size, n_max + 1))
            for lo in range(1, n_max + 1, chunk_size)]


def compensated_cumsum(part, head=0.0, tail=0.0):
    """Prefix sums of `part` started from the double-double offset head + tail.

    The rounding error of every addition in np.cumsum is recovered with
    two-sum and accumulated separately. Returns (sums, head, tail) with the
    offset of the next chunk.
    """
    running = np.cumsum(np.concatenate(([head], part)))
    before, after = running[:-1], running[1:]
    seen = after - before
    errors = (before - (after - seen)) + (part - seen)
    carry = tail + np.cumsum(errors)
    return after + carry, after[-1], carry[-1]


def iter_prefix_sums(source, n_max, kernel=chunk_log_factors,
                     chunk_size=DEFAULT_CHUNK_SIZE, workers=1, desc=None):
    """Yield (N_lo, partial sums S_N for N_lo <= N < N_hi) chunk by chunk.

    S_0 = 0 comes first. Chunks are evaluated `workers` at a time and
    composed in ascending order, so the floats do not depend on `workers`.
    """
    yield 0, np.zeros(1)
    bounds = chunk_bounds(n_max, chunk_size)
    batch = max(workers, 1)
    head, tail = 0.0, 0.0
    batches = range(0, len(bounds), batch)
    if len(bounds) > batch:
        batches = progress(batches, desc=desc or source.label, unit='batch')
    for start in batches:
        todo = bounds[start:start + batch]
        if workers == 1:
            parts = [kernel(source, lo, hi) for lo, hi in todo]
        else:
            parts = joblib.Parallel(n_jobs=workers)(
                joblib.delayed(kernel)(source, lo, hi) for lo, hi in todo)
        for (lo, _), part in zip(todo, parts):
            sums, head, tail = compensated_cumsum(part, head, tail)
            yield lo, sums


def iter_log_products(target, n_max, chunk_size=DEFAULT_CHUNK_SIZE,
                      workers=1, shift=None):
    """Stream log P_N(alpha) for N = 0..n_max without materializing it."""
    target = as_target(target)
    _check_range(target, n_max)
    source = phase_source(target, n_max, shift)
    return iter_prefix_sums(source, n_max, chunk_log_factors,
                            chunk_size, workers)


def _check_range(target, n_max):
    if n_max < 0:
        raise ValueError("N_max must be >= 0, got {}".format(n_max))
    if isinstance(target, Fraction) and n_max >= target.denominator:
        # P_N(a/b) = 0 for N >= b
        raise SingularFactorError(target.denominator, target)


@dataclass(frozen=True, eq=False)
class LogProductStream:
    """values[N] = log P_N(target) for N = 0..n_max."""

    target: Target
    n_max: int
    values: np.ndarray
    chunk_size: int

    def __len__(self):
        return len(self.values)

    def log_P(self, N):
        return float(self.values[N])

    def factors(self):
        """log|2 sin(pi N alpha)| for N = 1..n_max."""
        return np.diff(self.values)

    def to_frame(self):
        return pd.DataFrame({'N': np.arange(self.n_max + 1),
                             'logP': self.values})


def sudler_stream(target, n_max, chunk_size=DEFAULT_CHUNK_SIZE, workers=1):
    """Materialized log P_N(target) for N = 0..n_max.

    Raises:
        SingularFactorError: if target = a/b and n_max >= b
    """
    target = as_target(target)
    parts = [v for _, v in iter_log_products(
        target, n_max, chunk_size, workers)]
    values = np.concatenate(parts)
    log.debug("log P_N(%s) for N <= %d in %d chunks",
              target, n_max, len(parts) - 1)
    return LogProductStream(target, n_max, values, chunk_size)


def cotangent_partial_sums(target, n_max, chunk_size=DEFAULT_CHUNK_SIZE,
                           workers=1):
    """sum_{n=1}^N cot(pi n alpha) for N = 0..n_max."""
    target = as_target(target)
    _check_range(target, n_max)
    source = phase_source(target, n_max)
    return np.concatenate([v for _, v in iter_prefix_sums(
        source, n_max, chunk_cotangents, chunk_size, workers)])

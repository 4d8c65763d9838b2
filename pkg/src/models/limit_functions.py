"""Perturbed Sudler products and their limit functions.

P_{q_k}(alpha, x) = prod_{n<=q_k} |2 sin(pi (n alpha + (-1)^k x / q_k))|
converges along each residue class k = s + mp + r to

G_r(alpha, x) = 2 pi |x + B_r|
    * prod_{n>=1} |(1 - B_r ({n alpha_r} - 1/2) / n)^2 - (x + B_r/2)^2 / n^2|.
"""
import functools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import joblib
import mpmath
import numpy as np
import pandas as pd
from mpmath import mp

from src.config import RunConfig, progress
from src.data.continued_fractions import (
    QuadraticIrrational, build_convergents, convergents, evaluate_surd)
from src.data.ostrowski import encode, epsilon
from src.data.spectral import spectral as spectral_data
from src.exceptions import DomainError, ToleranceUnreachableError
from src.features.functionals import summarize
from src.features.sudler import (
    IrrationalTarget, fixed_point, log_factors_from_residues, phase_source,
    residues)


DEFAULT_N_TRUNC = 2 ** 16
DEFAULT_TAIL_TOLERANCE = 1e-6
N_TRUNC_CAP = 2 ** 24
# calibration of the tail constant
CALIBRATION_REF = 2 ** 16
CALIBRATION_POWERS = range(6, 15)
CALIBRATION_FACTOR = 2.0
# {n alpha_r} as a 90-bit fixed-point number in three 30-bit limbs
LIMB_BITS = 30
PHASE_BITS = 3 * LIMB_BITS
# factors n <= HEAD_TERMS are multiplied out, the rest summed as a series
HEAD_TERMS = 1024
SERIES_TERMS = 10
SERIES_RATIO = 1.0 / 16
TERM_CHUNK = 2 ** 20


log = logging.getLogger(__name__)


def _config(config):
    return config if config is not None else RunConfig()


def perturbed_products(alpha, k, xs, table=None, config=None):
    """log P_{q_k}(alpha, x) for every x in xs.

    The residues n alpha mod 1 are computed once and reused for every x.

    Args:
        alpha (QuadraticIrrational): the number
        k (int): convergent index
        xs (iterable of real): perturbations, floats or mpmath reals
        table (ConvergentTable): optional table with k_max >= k
        config (RunConfig): precision and workers
    Returns:
        numpy.ndarray
    """
    config = _config(config)
    table = table if table is not None else build_convergents(alpha, k)
    q_k = table.q[k]
    base = phase_source(IrrationalTarget(alpha, config.precision_bits), q_k)
    bits = base.den.bit_length() - 1
    with mp.workprec(bits + 64):
        sign = (-1) ** k
        offsets = [fixed_point(sign * mpmath.mpf(x) / q_k, bits) for x in xs]
    if config.workers == 1 or len(offsets) < 2:
        return _perturbed_chunk(base, q_k, offsets)
    groups = np.array_split(np.arange(len(offsets)), config.workers)
    parts = joblib.Parallel(n_jobs=config.workers)(
        joblib.delayed(_perturbed_chunk)(
            base, q_k, [offsets[i] for i in group])
        for group in groups if len(group))
    return np.concatenate(parts)


def _perturbed_chunk(base, q_k, offsets):
    n, r0 = residues(base, 1, q_k + 1)
    out = np.empty(len(offsets))
    for i, off in enumerate(offsets):
        source = base.with_shift(off)
        r = (r0 + source.shift) % source.den
        out[i] = np.sum(log_factors_from_residues(source, n, r))
    return out


def perturbed_product(alpha, k, x, table=None, config=None):
    """log P_{q_k}(alpha, x).

    Raises:
        SingularFactorError: if some argument is an exact integer
    """
    return float(perturbed_products(alpha, k, [x], table, config)[0])


def table_for(alpha, N, precision_bits=None):
    """Convergent table of alpha just deep enough to encode N."""
    k = 0
    while True:
        digits = [alpha.partial_quotient(j) for j in range(k + 2)]
        _, qs = convergents(digits)
        if qs[-1] > N:
            return build_convergents(alpha, k, precision_bits)
        k += 1


def factorization_terms(N, table):
    """[(k, [b q_k delta_k + eps_k(N) for b < b_k])] over nonzero digits."""
    x = encode(N, table)
    terms = []
    with mp.workprec(table.precision_bits):
        for k, b_k in enumerate(x.digits):
            if b_k:
                eps = epsilon(k, x, table)
                step = table.q[k] * table.delta[k]
                terms.append((k, [b * step + eps for b in range(b_k)]))
    return terms


def ostrowski_factorization_check(alpha, N, table=None, config=None):
    """log P_N(alpha) minus the log of its Ostrowski factorization
    into perturbed products P_{q_k}(alpha, b q_k delta_k + eps_k(N))."""
    config = _config(config)
    if table is None or N >= table.q_next:
        table = table_for(alpha, N, None)
    lhs = summarize(IrrationalTarget(alpha, config.precision_bits), N,
                    n_lo=N, config=config).total
    rhs = 0.0
    for k, xs in factorization_terms(N, table):
        rhs += float(np.sum(perturbed_products(alpha, k, xs, table, config)))
    return lhs - rhs


def fractional_parts(alpha, n_lo, n_hi):
    """{n alpha} for n_lo <= n < n_hi from a 90-bit fixed-point alpha."""
    value = evaluate_surd(alpha, PHASE_BITS + 32)
    M = fixed_point(value, PHASE_BITS)
    mask = (1 << LIMB_BITS) - 1
    m0, m1, m2 = M & mask, (M >> LIMB_BITS) & mask, M >> (2 * LIMB_BITS)
    n = np.arange(n_lo, n_hi, dtype=np.int64)
    t0 = n * m0
    t1 = n * m1 + (t0 >> LIMB_BITS)
    t2 = (n * m2 + (t1 >> LIMB_BITS)) & mask
    scale = 2.0 ** -LIMB_BITS
    low = (t1 & mask) + (t0 & mask) * scale
    return (t2 + low * scale) * scale


def _first_order_sums(alpha_r, B, n_max):
    # S(N) = sum_{n<=N} 2 B ({n alpha_r} - 1/2) / n
    n = np.arange(1, n_max + 1)
    frac = fractional_parts(alpha_r, 1, n_max + 1)
    return np.cumsum(2 * B * (frac - 0.5) / n)


@functools.lru_cache(maxsize=None)
def calibrate_tail_constant(alpha_r, B):
    """C with |log tail| <~ C log N / N, measured on the first-order sum.

    Twice the largest |S(N_ref) - S(N_1)| N_1 / log N_1 over
    N_1 = 2^6 .. 2^14.
    """
    S = _first_order_sums(alpha_r, B, CALIBRATION_REF)
    worst = max(abs(S[-1] - S[2 ** j - 1]) * 2 ** j / math.log(2 ** j)
                for j in CALIBRATION_POWERS)
    C = CALIBRATION_FACTOR * worst
    log.debug("tail constant of %s: %.4g", alpha_r, C)
    return C


@dataclass(frozen=True)
class LimitFunctionSpec:
    r: int
    B_r: float
    alpha_r: QuadraticIrrational
    n_trunc: int
    tail_tolerance: float
    tail_constant: float

    def tail_log_bound(self, x):
        """Bound on |log G - log G_truncated| at x."""
        n = self.n_trunc
        v = x + self.B_r / 2
        return (self.tail_constant * math.log(n) / n
                + 2 * (self.B_r ** 2 / 4 + v ** 2) / n)


def truncation_budget(C, n):
    return C * math.log(n) / n


def make_limit_spec(spectral, r, n_trunc=None,
                    tail_tolerance=DEFAULT_TAIL_TOLERANCE, cap=N_TRUNC_CAP):
    """LimitFunctionSpec of residue r.

    Without n_trunc the truncation is the smallest power of two from
    DEFAULT_N_TRUNC up whose budget C log n / n meets tail_tolerance. An
    explicit n_trunc is used as given and records its own budget.

    Raises:
        ToleranceUnreachableError: if the budget needs n beyond `cap`
    """
    if not 1 <= r <= spectral.alpha.p:
        raise DomainError("r={} outside 1..{}".format(r, spectral.alpha.p))
    B = float(spectral.B_of(r))
    alpha_r = spectral.alpha_rev[r - 1]
    C = calibrate_tail_constant(alpha_r, B)
    if n_trunc is None:
        n_trunc = DEFAULT_N_TRUNC
        while truncation_budget(C, n_trunc) > tail_tolerance:
            n_trunc *= 2
            if n_trunc > cap:
                raise ToleranceUnreachableError(
                    "tail tolerance {} needs n_trunc > {} (C={:.3g})".format(
                        tail_tolerance, cap, C))
    else:
        if n_trunc > cap:
            raise ToleranceUnreachableError(
                "n_trunc={} exceeds the cap {}".format(n_trunc, cap))
        tail_tolerance = truncation_budget(C, n_trunc)
    log.info("G_%d of %s truncated at n=%d (budget %.2e)",
             r, spectral.alpha, n_trunc, truncation_budget(C, n_trunc))
    return LimitFunctionSpec(r, B, alpha_r, n_trunc, tail_tolerance, C)


@dataclass(frozen=True, eq=False)
class _LimitTerms:
    u_head: np.ndarray
    log_base: float
    w_sums: np.ndarray


@functools.lru_cache(maxsize=16)
def _limit_terms(alpha_r, B, n_trunc):
    """x-independent parts of log G_r.

    With u_n = B ({n alpha_r} - 1/2) / n and w_n = 1 / (n (1 - u_n))^2, each
    factor n > HEAD_TERMS is (1 - u_n)^2 (1 - v^2 w_n); the logs of the
    first parts are summed once, the second expanded in powers of v^2.
    """
    head = min(HEAD_TERMS, n_trunc)
    frac = fractional_parts(alpha_r, 1, head + 1)
    u_head = B * (frac - 0.5) / np.arange(1, head + 1)
    log_base = 0.0
    w_sums = np.zeros(SERIES_TERMS)
    for lo in range(head + 1, n_trunc + 1, TERM_CHUNK):
        hi = min(lo + TERM_CHUNK, n_trunc + 1)
        n = np.arange(lo, hi)
        u = B * (fractional_parts(alpha_r, lo, hi) - 0.5) / n
        log_base += float(np.sum(2 * np.log1p(-u)))
        w = 1.0 / (n * (1 - u)) ** 2
        wj = w.copy()
        for j in range(SERIES_TERMS):
            w_sums[j] += float(np.sum(wj))
            wj *= w
    return _LimitTerms(u_head, log_base, w_sums)


def _log_factors(u, n, v):
    with np.errstate(divide='ignore'):
        return np.log(np.abs((1 - u) ** 2 - v ** 2 / n ** 2))


def log_limit_G(spec, x):
    """log G_r(alpha, x) at the truncation of `spec`; -inf at a zero of G."""
    B = spec.B_r
    if x == -B:
        return -math.inf
    v = x + B / 2
    terms = _limit_terms(spec.alpha_r, B, spec.n_trunc)
    head = len(terms.u_head)
    total = math.log(2 * math.pi * abs(x + B))
    total += float(np.sum(_log_factors(
        terms.u_head, np.arange(1, head + 1), v)))
    if head == spec.n_trunc:
        return total
    # (1 - u)^2 >= 1/4 and n > head, so v^2 w_n <= 4 v^2 / head^2
    if 4 * v ** 2 / (head + 1) ** 2 <= SERIES_RATIO:
        j = np.arange(1, SERIES_TERMS + 1)
        series = -np.sum((v ** 2) ** j * terms.w_sums / j)
        return total + terms.log_base + float(series)
    return total + _direct_tail(spec, v, head)


def _direct_tail(spec, v, head):
    total = 0.0
    for lo in range(head + 1, spec.n_trunc + 1, TERM_CHUNK):
        hi = min(lo + TERM_CHUNK, spec.n_trunc + 1)
        n = np.arange(lo, hi)
        u = spec.B_r * (fractional_parts(spec.alpha_r, lo, hi) - 0.5) / n
        total += float(np.sum(_log_factors(u, n, v)))
    return total


def limit_G(spec, x):
    """(G_r(alpha, x), tail_bound) with |G - value| <= tail_bound."""
    if x == -spec.B_r:
        return 0.0, 0.0
    value = math.exp(log_limit_G(spec, x))
    return value, value * math.expm1(spec.tail_log_bound(x))


def limit_sweep(spec, xs):
    """DataFrame x, G, tail_bound over the grid xs."""
    rows = [(x,) + limit_G(spec, x) for x in progress(xs, desc='G')]
    return pd.DataFrame(rows, columns=['x', 'G', 'tail_bound'])


@dataclass(frozen=True)
class IntervalSpec:
    """I_r = [lo, hi] and the observed k_0 (None when undetermined)."""

    r: int
    lo: float
    hi: float
    k0: Optional[int] = None

    def grid(self, points):
        return np.linspace(self.lo, self.hi, points)


def interval_I(spectral, r, table=None):
    """I_r = [-(1 - kappa/2) B_r, (a_{s+r+1} - kappa/2) B_r].

    k_0 is the smallest tabled k in class r from which on every shifted
    digit window b q_k delta_k + [-(1-kappa) q_k delta_k, (1-kappa) q_k
    delta_k], b < a_{k+1}, lies inside I_r.
    """
    alpha = spectral.alpha
    kap = float(spectral.kappa)
    B = float(spectral.B_of(r))
    a = alpha.partial_quotient(alpha.s + r + 1)
    lo, hi = -(1 - kap / 2) * B, (a - kap / 2) * B
    k0 = None
    if table is not None:
        k0 = _observed_k0(alpha, r, table, kap, lo, hi)
        if k0 is None:
            log.warning("k0 of residue %d of %s is undetermined up to k=%d",
                        r, alpha, table.k_max)
    return IntervalSpec(r, lo, hi, k0)


def _observed_k0(alpha, r, table, kap, lo, hi):
    ks = [k for k in range(alpha.s + 1, table.k_max + 1)
          if alpha.residue(k) == r]
    k0 = None
    for k in ks:
        qd = table.q[k] * table.delta_float(k)
        a_next = alpha.partial_quotient(k + 1)
        inside = (-(1 - kap) * qd >= lo
                  and (a_next - 1) * qd + (1 - kap) * qd <= hi)
        if inside and k0 is None:
            k0 = k
        elif not inside:
            k0 = None
    return k0


def global_k0(spectral, table):
    """max_r k0_r, or None if some residue is undetermined."""
    k0s = [interval_I(spectral, r, table).k0
           for r in range(1, spectral.alpha.p + 1)]
    if any(k0 is None for k0 in k0s):
        return None
    return max(k0s)


def rate_envelope(q):
    return q ** -0.5 * math.log(q) ** 0.75


def convergence_report(alpha, r, x_grid, m_range, spec=None, config=None):
    """Per m: sup over x_grid of |P_{q_k}(alpha, x) - G_r(alpha, x)|.

    Both envelope shapes are reported, the multiplicative
    q_k^{-1/2} log^{3/4} q_k and the additive q_k^{-2}.
    """
    m_range = list(m_range)
    k_top = alpha.s + max(m_range) * alpha.p + r
    table = build_convergents(alpha, max(k_top, alpha.s + 3 * alpha.p))
    if spec is None:
        spec = make_limit_spec(spectral_data(alpha, table), r)
    G = np.array([limit_G(spec, float(x))[0] for x in x_grid])
    rows = []
    for m in progress(m_range, desc='m'):
        k = alpha.s + m * alpha.p + r
        P = np.exp(perturbed_products(alpha, k, x_grid, table, config))
        q = table.q[k]
        sup = float(np.max(np.abs(P - G)))
        rows.append((m, k, q, sup, rate_envelope(q), float(q) ** -2,
                     sup / rate_envelope(q)))
    return pd.DataFrame(rows, columns=[
        'm', 'k', 'q_k', 'sup_error', 'rate_envelope', 'additive_envelope',
        'envelope_ratio'])


def g_N_product(alpha, N, k0, table=None, specs=None, config=None):
    """log G_N(alpha): the factors G_{[k]}(alpha, b q_k delta_k + eps_k(N))
    over the Ostrowski digits of N at indices k >= k0."""
    if table is None or N >= table.q_next:
        table = table_for(alpha, max(N, 1), None)
    if table.k_max < alpha.s + 3 * alpha.p:
        table = build_convergents(alpha, alpha.s + 3 * alpha.p)
    specs = {} if specs is None else specs
    total = 0.0
    for k, xs in factorization_terms(N, table):
        if k < k0:
            continue
        r = alpha.residue(k)
        if r not in specs:
            specs[r] = make_limit_spec(spectral_data(alpha, table), r)
        total += sum(log_limit_G(specs[r], float(x)) for x in xs)
    return total

"""Growth constants K_c, K_inf along convergents, Vol(4_1) and the
volume-type predictions they are compared with."""
import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import joblib
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import linregress

from src.config import RunConfig, progress
from src.data.continued_fractions import (
    build_convergents, cf_of_rational, convergents)
from src.data.spectral import avg_partial_quotient
from src.data.spectral import spectral as spectral_data
from src.exceptions import BudgetError
from src.features.functionals import jones_F, summarize
from src.features.sudler import IrrationalTarget


# total number of product factors one estimate may evaluate
MAX_FACTORS = 10 ** 8
# bands are inflated by this factor before they serve as slack
BAND_INFLATION = 1.5
VOL_SPLIT = 1.0 / 12
VOL_UPPER = 5.0 / 6
VOL_PANELS = 64
VOL_ORDER = 20
INFINITY = math.inf


log = logging.getLogger(__name__)


def _config(config):
    return config if config is not None else RunConfig()


@dataclass(frozen=True)
class BoundCheck:
    """lhs <= rhs style check; observational entries never fail."""

    name: str
    lhs: float
    rhs: float
    passed: bool
    observational: bool = False

    @property
    def failed(self):
        return not (self.passed or self.observational)

    def to_dict(self):
        return {'name': self.name, 'lhs': self.lhs, 'rhs': self.rhs,
                'pass': self.passed, 'observational': self.observational}


@dataclass
class EstimateReport:
    alpha: object
    c: float
    K_hat: float
    intercept: float
    k_window: Tuple[int, int]
    per_k_values: List[float]
    fit_residual_band: float
    slope_slack: float
    reflection_link: Optional[float] = None
    unstable: bool = False
    bounds: List[BoundCheck] = field(default_factory=list)

    @property
    def ks(self):
        return list(range(self.k_window[0], self.k_window[1] + 1))

    @property
    def passed(self):
        return not any(b.failed for b in self.bounds)

    def to_dict(self):
        return {
            'alpha': str(self.alpha),
            'c': 'inf' if self.c == INFINITY else self.c,
            'K_hat': self.K_hat,
            'intercept': self.intercept,
            'k_window': list(self.k_window),
            'per_k_values': list(self.per_k_values),
            'fit_residual_band': self.fit_residual_band,
            'slope_slack': self.slope_slack,
            'reflection_link': self.reflection_link,
            'unstable': self.unstable,
            'bounds': [b.to_dict() for b in self.bounds],
        }


def parse_c(text):
    """'inf' or a positive real."""
    if str(text).strip().lower() in ('inf', 'infinity', 'oo'):
        return INFINITY
    c = float(text)
    if c <= 0:
        raise ValueError("c must be positive, got {}".format(text))
    return c


def _per_k_value(x, c, precision_bits, chunk_size):
    # one convergent p_k/q_k; the worker runs serially
    config = RunConfig(precision_bits=precision_bits, chunk_size=chunk_size)
    b = x.denominator
    if c == INFINITY:
        summary = summarize(x, b - 1, config=config)
        return (summary.log_max,
                summary.log_max + summary.log_min - math.log(b))
    summary = summarize(x, b - 1, cs=(c,), config=config)
    return summary.log_sums[c] / c, math.nan


def _window_table(alpha, k_window, budget):
    k_lo, k_hi = k_window
    if not 0 <= k_lo < k_hi:
        raise ValueError("bad window {}".format(k_window))
    # period-aligned: the number of points is a multiple of p
    points = k_hi - k_lo + 1
    if points < max(alpha.p, 2):
        raise ValueError("window {} shorter than the period {}".format(
            k_window, alpha.p))
    k_hi -= points % alpha.p
    table = build_convergents(alpha, max(k_hi, alpha.s + 3 * alpha.p))
    cost = sum(table.q[k] for k in range(k_lo, k_hi + 1))
    if cost > budget:
        raise BudgetError(
            "window {}..{} needs {} factors, budget {}".format(
                k_lo, k_hi, cost, budget))
    return table, (k_lo, k_hi)


def default_window(alpha, budget=MAX_FACTORS, k0=None):
    """[k0 + 2, k_hi] with k_hi the deepest index within the budget."""
    k_lo = (k0 if k0 is not None else alpha.s + 1) + 2
    digits = [alpha.partial_quotient(j) for j in range(k_lo + 1)]
    _, qs = convergents(digits)
    cost, k = sum(qs[k_lo:]), k_lo
    while True:
        digits.append(alpha.partial_quotient(len(digits)))
        _, qs = convergents(digits)
        if cost + qs[-1] > budget:
            return k_lo, k
        cost += qs[-1]
        k += 1


def fit_line(ks, values):
    """(slope, intercept, max |residual|) of a least-squares line."""
    fit = linregress(ks, values)
    residuals = np.asarray(values) - (fit.slope * np.asarray(ks)
                                      + fit.intercept)
    return fit.slope, fit.intercept, residuals


def _growing_band(residuals):
    third = max(len(residuals) // 3, 1)
    head = np.max(np.abs(residuals[:third]))
    tail = np.max(np.abs(residuals[-third:]))
    return tail > 2 * head + 0.05


def estimate_K(alpha, c, k_window, config=None, budget=MAX_FACTORS,
               companion=None):
    """Least-squares slope of the per-k values over the window.

    The per-k value is log max_{N<q_k} P_N(p_k/q_k) for c = inf, else
    log (sum_{N<q_k} P_N(p_k/q_k)^c)^{1/c}.

    Args:
        alpha (QuadraticIrrational): the number
        c (float): positive real or math.inf
        k_window (tuple): (k_lo, k_hi), trimmed to whole periods
        config (RunConfig): precision, chunk size and workers
        budget (int): cap on sum_k q_k over the window
        companion (EstimateReport): the c = inf report of the same alpha,
            enables the K_c / K_inf sandwich checks
    Returns:
        EstimateReport
    """
    config = _config(config)
    table, (k_lo, k_hi) = _window_table(alpha, k_window, budget)
    ks = list(range(k_lo, k_hi + 1))
    jobs = [(table.convergent(k), c, config.precision_bits,
             config.chunk_size) for k in ks]
    if config.workers == 1:
        results = [_per_k_value(*job) for job in progress(jobs, desc='k')]
    else:
        results = joblib.Parallel(n_jobs=config.workers)(
            joblib.delayed(_per_k_value)(*job) for job in jobs)
    values = [v for v, _ in results]

    slope, intercept, residuals = fit_line(ks, values)
    band = float(np.max(np.abs(residuals)))
    unstable = _growing_band(residuals)
    if unstable:
        log.warning("residual band of %s (c=%s) grows with k; "
                    "precision may be short", alpha, c)
    link = None
    if c == INFINITY:
        link = float(max(abs(r) for _, r in results))
    report = EstimateReport(
        alpha=alpha, c=c, K_hat=float(slope), intercept=float(intercept),
        k_window=(k_lo, k_hi), per_k_values=values,
        fit_residual_band=band,
        slope_slack=BAND_INFLATION * 2 * band / (k_hi - k_lo),
        reflection_link=link, unstable=unstable)
    report.bounds = bound_suite(report, spectral_data(alpha, table),
                                companion, config.tolerance(table.q[k_hi]))
    log.info("K_%s(%s) ~ %.4f over k=%d..%d (band %.3f)",
             c, alpha, slope, k_lo, k_hi, band)
    return report


def estimate_many(alpha, cs, k_window, config=None, budget=MAX_FACTORS):
    """One report per c; c = inf is computed first and backs the
    sandwich checks of the others."""
    cs = list(cs)
    k_inf = estimate_K(alpha, INFINITY, k_window, config, budget)
    reports = []
    for c in cs:
        if c == INFINITY:
            reports.append(k_inf)
        else:
            reports.append(estimate_K(alpha, c, k_window, config, budget,
                                      companion=k_inf))
    return reports


def bound_suite(report, spectral, companion=None, tolerance=1e-9):
    """The inequalities tying K_c, K_inf, lambda and the volume estimate.

    Every inequality gets the inflated slope slack of the reports involved.
    """
    lam = float(spectral.lam)
    c = report.c
    K = report.K_hat
    slack = report.slope_slack
    vol_pred = vol_41() / (4 * math.pi) * float(
        avg_partial_quotient(spectral.alpha))
    checks = []
    if c == INFINITY:
        checks.append(BoundCheck('K_inf >= lambda', lam, K + slack,
                                 lam <= K + slack))
        checks.append(BoundCheck('K_inf - lambda (strict margin)',
                                 K - slack - lam, 0.0, K - slack > lam,
                                 observational=True))
        if report.reflection_link is not None:
            checks.append(BoundCheck(
                'log max + log min = log q_k', report.reflection_link,
                tolerance, report.reflection_link <= tolerance))
    else:
        jensen = (1 / c + 0.5) * lam
        checks.append(BoundCheck('K_c >= (1/c + 1/2) lambda', jensen,
                                 K + slack, jensen <= K + slack))
        if companion is not None:
            K_inf = companion.K_hat
            both = slack + companion.slope_slack
            checks.append(BoundCheck('K_c - lambda/c <= K_inf',
                                     K - lam / c, K_inf + both,
                                     K - lam / c <= K_inf + both))
            checks.append(BoundCheck('K_inf <= K_c', K_inf, K + both,
                                     K_inf <= K + both))
            checks.append(BoundCheck('K_inf < K_c', K_inf, K, K_inf < K,
                                     observational=True))
    checks.append(BoundCheck('lambda > (Vol/4pi) mean a', vol_pred, lam,
                             vol_pred < lam, observational=True))
    log_A = math.log(1 + spectral.alpha.max_quotient)
    scale = max(1.0, 1.0 / c) * log_A if log_A else 1.0
    checks.append(BoundCheck('|K_c - (Vol/4pi) mean a| / (max(1,1/c) log A)',
                             abs(K - vol_pred) / scale, math.nan, True,
                             observational=True))
    return checks


@dataclass(frozen=True)
class GrowthRate:
    """Slope of log-growth of P_N(alpha) against log M, M = q_k - 1."""

    c: float
    slope: float
    intercept: float
    band: float
    lam: float

    @property
    def implied_K(self):
        return self.slope * self.lam


def estimate_growth_rate(alpha, c, k_window, config=None,
                         budget=MAX_FACTORS):
    """The irrational counterpart of estimate_K: fits
    log (sum_{N<=M} P_N(alpha)^c)^{1/c} (or log max) against log M."""
    config = _config(config)
    table, (k_lo, k_hi) = _window_table(alpha, k_window, budget)
    target = IrrationalTarget(alpha, config.precision_bits)
    log_M, values = [], []
    for k in progress(range(k_lo, k_hi + 1), desc='k'):
        M = table.q[k] - 1
        if M < 1:
            continue
        cs = () if c == INFINITY else (c,)
        summary = summarize(target, M, cs=cs, config=config)
        values.append(summary.log_max if c == INFINITY
                      else summary.log_sums[c] / c)
        log_M.append(math.log(M))
    slope, intercept, residuals = fit_line(log_M, values)
    lam = float(spectral_data(alpha, table).lam)
    return GrowthRate(c, float(slope), float(intercept),
                      float(np.max(np.abs(residuals))), lam)


def gauss_legendre(f, a, b, panels=VOL_PANELS, order=VOL_ORDER):
    """Composite Gauss-Legendre rule for a smooth f on [a, b]."""
    nodes, weights = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    x = mid[:, None] + half[:, None] * nodes[None, :]
    return float(np.sum(half[:, None] * weights[None, :] * f(x)))


@functools.lru_cache(maxsize=None)
def vol_41(panels=VOL_PANELS, order=VOL_ORDER):
    """Vol(4_1) = 4 pi int_0^{5/6} log(2 sin(pi x)) dx.

    On [0, 1/12] the singular part log(2 pi x) is integrated in closed form
    and the smooth remainder log(sinc x) by quadrature.
    """
    h = VOL_SPLIT
    head = h * (math.log(2 * math.pi * h) - 1)
    head += gauss_legendre(lambda x: np.log(np.sinc(x)), 0.0, h,
                           panels, order)
    body = gauss_legendre(lambda x: np.log(2 * np.sin(np.pi * x)),
                          h, VOL_UPPER, panels, order)
    return 4 * math.pi * (head + body)


@dataclass(frozen=True)
class BDReport:
    log_J: float
    prediction: float
    error_budget: float
    k: int

    @property
    def deviation(self):
        return self.log_J - self.prediction

    @property
    def ratio(self):
        """|deviation| / error_budget."""
        return abs(self.deviation) / self.error_budget

    @property
    def volume_ratio(self):
        return self.log_J / self.prediction if self.prediction else math.nan


def bd_check(x, config=None):
    """log J(e(a/b)) against (Vol/2pi)(a_1 + ... + a_k) with the error
    budget A + k log A, A = 1 + max a_l."""
    x = Fraction(x)
    digits = cf_of_rational(x)[1:]
    k = len(digits)
    A = 1 + max(digits, default=0)
    prediction = vol_41() / (2 * math.pi) * sum(digits)
    return BDReport(jones_F(x, config), prediction, A + k * math.log(A), k)


def kashaev_ratio(n, config=None):
    """J(e(1/n)) / (n^{3/2} 3^{-1/4} exp(Vol n / 2pi))."""
    main = (1.5 * math.log(n) - 0.25 * math.log(3)
            + vol_41() * n / (2 * math.pi))
    return math.exp(jones_F(Fraction(1, n), config) - main)

"""Verification suites: each runs one family of identities or bounds over a
corpus and returns a SuiteResult holding one row per case."""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.config import RELAXED_FACTOR, RunConfig, progress
from src.data.continued_fractions import build_convergents
from src.data.ostrowski import decode, encode, epsilon
from src.data.spectral import kappa
from src.features.functionals import (
    cotangent_sweep, log_products, summarize, transfer_sweep)
from src.models.growth_constants import estimate_many
from src.models.limit_functions import ostrowski_factorization_check


FACTORIZATION_TOLERANCE = 1e-8
LAST_TERM_TOLERANCE = 1e-11
# the average-log identity is held to a tenth of the reflection tolerance
AVERAGE_SHARPENING = 0.1
TRANSFER_C_MAX = 50.0


log = logging.getLogger(__name__)


def _config(config):
    return config if config is not None else RunConfig()


def _scaled(tol, config):
    return tol * RELAXED_FACTOR if config.tolerance_profile == 'relaxed' \
        else tol


@dataclass
class SuiteResult:
    name: str
    table: pd.DataFrame
    passed: bool

    @property
    def counterexamples(self):
        return self.table[~self.table['pass']]

    def summary(self):
        return {'suite': self.name, 'cases': len(self.table),
                'failures': int((~self.table['pass']).sum()),
                'pass': bool(self.passed)}


def _result(name, rows, columns):
    table = pd.DataFrame(rows, columns=columns)
    passed = bool(table['pass'].all()) if len(table) else True
    log.info("suite %s: %d cases, %s", name, len(table),
             'pass' if passed else 'FAIL')
    return SuiteResult(name, table, passed)


def reflection_suite(fractions, config=None):
    """log P_N + log P_{b-N-1} = log b for all N < b, and P_{b-1} = b."""
    config = _config(config)
    rows = []
    for x in progress(fractions, desc='reflection'):
        b = x.denominator
        values = log_products(x, b - 1, config)
        residual = float(np.max(np.abs(values + values[::-1] - math.log(b))))
        last = abs(math.expm1(values[-1] - math.log(b)))
        tol = config.tolerance(b)
        last_tol = _scaled(LAST_TERM_TOLERANCE, config)
        rows.append((x.numerator, b, residual, tol, last, last_tol,
                     residual < tol and last < last_tol))
    return _result('reflection', rows, [
        'a', 'b', 'residual', 'tolerance', 'last_term', 'last_tolerance',
        'pass'])


def average_suite(fractions, config=None):
    """(1/b) sum_{N<b} log P_N(a/b) = (log b) / 2."""
    config = _config(config)
    rows = []
    for x in progress(fractions, desc='average'):
        b = x.denominator
        summary = summarize(x, b - 1, config=config)
        residual = abs(summary.mean - math.log(b) / 2)
        tol = AVERAGE_SHARPENING * config.tolerance(b)
        rows.append((x.numerator, b, residual, tol, residual < tol))
    return _result('average', rows, ['a', 'b', 'residual', 'tolerance',
                                     'pass'])


def cotangent_suite(targets, config=None):
    """sup_{N<q_k} |sum_{n<=N} cot(pi n p_k/q_k)| <= (124 + 24 log A_k) q_k.

    `targets` are rationals, or (alpha, k) pairs for irrational sums.
    """
    config = _config(config)
    rows = []
    for target in progress(targets, desc='cotangent'):
        if isinstance(target, tuple):
            report = cotangent_sweep(target[0], target[1], config=config)
        else:
            report = cotangent_sweep(target, config=config)
        rows.append((report.target, report.q_k, report.N, report.value,
                     report.bound, report.passed))
    return _result('cotangent', rows, ['target', 'q_k', 'N', 'value',
                                       'bound', 'pass'])


def transfer_suite(alpha, ks, config=None, c_max=TRANSFER_C_MAX):
    """sup_{N<q_k} |log P_N(alpha) - log P_N(p_k/q_k)| <= C log A_k / a_{k+1}
    with one C < c_max across all k."""
    config = _config(config)
    reports = [transfer_sweep(alpha, k, config=config)
               for k in progress(list(ks), desc='transfer')]
    C = max((r.ratio for r in reports), default=0.0)
    rows = [(r.k, r.q_k, r.sup_residual, r.bound, r.ratio, C, C < c_max)
            for r in reports]
    return _result('transfer', rows, ['k', 'q_k', 'sup_residual', 'bound',
                                      'ratio', 'fitted_C', 'pass'])


def epsilon_rows(N, table, kap):
    """Per nonzero digit: eps_k(N) against (1-kappa) q_k delta_k and
    q_k delta_{k+1}."""
    x = encode(N, table)
    rows = []
    for k, b_k in enumerate(x.digits):
        if not b_k:
            continue
        eps = float(epsilon(k, x, table))
        qd = table.q[k] * table.delta_float(k)
        ceiling = table.q[k] * table.delta_float(k + 1) \
            if k + 1 <= table.k_max else math.inf
        rows.append((k, eps, abs(eps) <= (1 - kap) * qd, eps <= ceiling))
    return x, rows


def factorization_suite(alpha, upto_k, config=None):
    """For every N < q_{upto_k}: the Ostrowski round trip, the eps_k bounds
    and the factorization of P_N into perturbed products."""
    config = _config(config)
    table = build_convergents(alpha, upto_k + 1)
    kap = float(kappa(alpha))
    tol = _scaled(FACTORIZATION_TOLERANCE, config)
    rows = []
    for N in progress(range(table.q[upto_k]), desc='factorization'):
        x, eps = epsilon_rows(N, table, kap)
        round_trip = decode(x, table) == N
        eps_ok = all(inside and below for _, _, inside, below in eps)
        residual = abs(ostrowski_factorization_check(alpha, N, table,
                                                     config))
        rows.append((N, str(list(x.digits)), round_trip, eps_ok, residual,
                     tol, round_trip and eps_ok and residual < tol))
    return _result('factorization', rows, [
        'N', 'digits', 'round_trip', 'epsilon_bounds', 'residual',
        'tolerance', 'pass'])


def bounds_suite(alpha, cs, k_window, config=None):
    """Every bound check of the growth-constant estimates."""
    reports = estimate_many(alpha, cs, k_window, config)
    rows = []
    for report in reports:
        c = 'inf' if math.isinf(report.c) else report.c
        for b in report.bounds:
            rows.append((c, report.K_hat, b.name, b.lhs, b.rhs,
                         b.observational, not b.failed))
    return _result('bounds', rows, ['c', 'K_hat', 'bound', 'lhs', 'rhs',
                                    'observational', 'pass'])


SUITES = {
    'reflection': reflection_suite,
    'average': average_suite,
    'cotangent': cotangent_suite,
    'transfer': transfer_suite,
    'factorization': factorization_suite,
    'bounds': bounds_suite,
}

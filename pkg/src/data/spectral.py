"""Spectral data of the period of a quadratic irrational.

q_{s+mp+r} = C_r eta^m + D_r (-1)^{mp} eta^{-m} and
delta_{s+mp+r} = E_r eta^{-m}, with eta the larger eigenvalue of the period
matrix T_r (its trace and determinant do not depend on r).
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import mpmath
from mpmath import mp

from src.data.continued_fractions import QuadraticIrrational, evaluate_surd
from src.exceptions import InconsistencyError


DELTA_SLACK_BITS = 8


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralData:
    """Period matrices and the constants of the closed-form recursions.

    Lists are indexed by r - 1 for r = 1..p.
    """

    alpha: QuadraticIrrational
    T: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]
    trace: int
    det: int
    eta: mpmath.mpf
    lam: mpmath.mpf
    C: Tuple[mpmath.mpf, ...]
    D: Tuple[mpmath.mpf, ...]
    E: Tuple[mpmath.mpf, ...]
    B: Tuple[mpmath.mpf, ...]
    alpha_rev: Tuple[QuadraticIrrational, ...]
    kappa: Fraction
    precision_bits: int

    @property
    def mu(self):
        with mp.workprec(self.precision_bits):
            return self.det / self.eta

    def B_of(self, r):
        return self.B[r - 1]

    def index(self, m, r):
        return self.alpha.s + m * self.alpha.p + r


def period_matrix(alpha, r):
    """T_r = M(a_{s+r+p}) ... M(a_{s+r+1}) with M(a) = [[0, 1], [1, a]]."""
    m = ((1, 0), (0, 1))
    for j in range(1, alpha.p + 1):
        a = alpha.partial_quotient(alpha.s + r + j)
        (m00, m01), (m10, m11) = m
        # left-multiply by [[0, 1], [1, a]]
        m = ((m10, m11), (m00 + a * m10, m01 + a * m11))
    return m


def reversed_period(alpha, r):
    """alpha_r = [0; (a_{s+r+p}, ..., a_{s+r+1})]."""
    digits = tuple(alpha.partial_quotient(alpha.s + r + alpha.p - i)
                   for i in range(alpha.p))
    return QuadraticIrrational((0,), digits)


def kappa(alpha):
    """Contraction constant 1 / (max a_k + 3)."""
    return Fraction(1, alpha.max_quotient + 3)


def avg_partial_quotient(alpha):
    """Average partial quotient: the mean over one period."""
    return Fraction(sum(alpha.period), alpha.p)


def delta_tolerance(alpha, q, bits):
    """Relative accuracy of a table entry delta_k with q_k = q at `bits`.

    q_k alpha and p_k agree to about log2 q_k + log2 |alpha| bits, and
    1 / delta_k < (a_max + 2) q_k.
    """
    lost = (2 * q.bit_length() + alpha.max_quotient.bit_length()
            + (abs(alpha.pre_period[0]) + 1).bit_length())
    return mpmath.mpf(2) ** (lost + DELTA_SLACK_BITS - bits)


def _residue_samples(alpha, table, r):
    m_top = (table.k_max - alpha.s - r) // alpha.p
    return list(range(m_top + 1))


def spectral(alpha, table):
    """Spectral data of `alpha`, solved from and checked against `table`.

    Args:
        alpha (QuadraticIrrational): the number
        table (ConvergentTable): convergents of alpha, at least three full
            periods past the pre-period
    Returns:
        SpectralData
    """
    s, p = alpha.s, alpha.p
    if table.k_max < s + 3 * p:
        raise ValueError(
            "table too shallow: k_max={} < s + 3p = {}".format(
                table.k_max, s + 3 * p))

    mats = tuple(period_matrix(alpha, r) for r in range(1, p + 1))
    traces = {m[0][0] + m[1][1] for m in mats}
    dets = {m[0][0] * m[1][1] - m[0][1] * m[1][0] for m in mats}
    if len(traces) != 1 or dets != {(-1) ** p}:
        raise InconsistencyError(
            "period matrices disagree: traces {} dets {}".format(
                traces, dets))
    trace, det = traces.pop(), dets.pop()

    bits = table.precision_bits
    tol = mpmath.mpf(2) ** (-bits // 2)
    C, D, E = [], [], []
    # q_k is exact, so C_r and D_r are solved at doubled precision
    with mp.workprec(2 * bits):
        eta = (trace + mpmath.sqrt(trace ** 2 - 4 * det)) / 2
        value = evaluate_surd(alpha, 2 * bits)
        for r in range(1, p + 1):
            ms = _residue_samples(alpha, table, r)
            m1, m2 = ms[-2], ms[-1]
            k1, k2 = s + m1 * p + r, s + m2 * p + r
            s1, s2 = (-1) ** (m1 * p), (-1) ** (m2 * p)
            # [eta^m1, s1 eta^-m1; eta^m2, s2 eta^-m2] (C, D) = (q_k1, q_k2)
            a11, a12 = eta ** m1, s1 * eta ** (-m1)
            a21, a22 = eta ** m2, s2 * eta ** (-m2)
            det_a = a11 * a22 - a12 * a21
            c_r = (table.q[k1] * a22 - a12 * table.q[k2]) / det_a
            d_r = (a11 * table.q[k2] - a21 * table.q[k1]) / det_a
            # table.delta[k2] only carries bits - 2 log2 q_k2 good bits
            delta_k2 = (table.q[k2] * value - table.p[k2]) * (-1) ** k2
            e_r = delta_k2 * eta ** m2
            for m in ms:
                k = s + m * p + r
                q_hat = c_r * eta ** m + d_r * (-1) ** (m * p) * eta ** (-m)
                if abs(q_hat - table.q[k]) / table.q[k] > tol:
                    raise InconsistencyError(
                        "C_{0}, D_{0} fail to predict q_{1}".format(r, k))
                d_hat = e_r * eta ** (-m)
                if (abs(d_hat - table.delta[k]) / table.delta[k]
                        > delta_tolerance(alpha, table.q[k], bits)):
                    raise InconsistencyError(
                        "E_{} fails to predict delta_{}".format(r, k))
            C.append(c_r)
            D.append(d_r)
            E.append(e_r)

    with mp.workprec(bits):
        eta = +eta
        C = tuple(+c for c in C)
        D = tuple(+d for d in D)
        E = tuple(+e for e in E)
        B = tuple(c * e for c, e in zip(C, E))
        lam = mpmath.log(eta) / p

    data = SpectralData(
        alpha=alpha,
        T=mats,
        trace=trace,
        det=det,
        eta=eta,
        lam=lam,
        C=C,
        D=D,
        E=E,
        B=B,
        alpha_rev=tuple(reversed_period(alpha, r) for r in range(1, p + 1)),
        kappa=kappa(alpha),
        precision_bits=bits,
    )
    check_delta_sandwich(table, data.kappa)
    log.debug("spectral data of %s: eta=%s lambda=%s",
              alpha, mpmath.nstr(eta, 12), mpmath.nstr(lam, 12))
    return data


def check_delta_sandwich(table, kap):
    """kappa delta_k <= delta_{k+1} <= (1 - kappa) delta_k for all k."""
    with mp.workprec(table.precision_bits):
        kap = mpmath.mpf(kap.numerator) / kap.denominator
        for k in range(table.k_max):
            d0, d1 = table.delta[k], table.delta[k + 1]
            if not kap * d0 <= d1 <= (1 - kap) * d0:
                raise InconsistencyError(
                    "delta sandwich fails at k={}".format(k))

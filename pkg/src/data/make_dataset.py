# -*- coding: utf-8 -*-
import logging
import math
import os
from fractions import Fraction

import numpy as np
import pandas as pd

from src.data.continued_fractions import QuadraticIrrational, convergents


log = logging.getLogger(__name__)

# the six quadratic irrationals with small partial quotients used throughout
BENCHMARK_IRRATIONALS = {
    'golden': QuadraticIrrational((1,), (1,)),
    'sqrt2': QuadraticIrrational((1,), (2,)),
    'half_1_sqrt13': QuadraticIrrational((2,), (3,)),
    'sqrt5': QuadraticIrrational((2,), (4,)),
    'half_1_sqrt29': QuadraticIrrational((3,), (5,)),
    'sqrt10': QuadraticIrrational((3,), (6,)),
}


def random_reduced_fractions(count, b_max, seed=123, b_min=2):
    """Draw `count` reduced a/b with 0 < a < b and b_min <= b <= b_max.

    Denominators are uniform; numerators are redrawn until coprime.
    """
    rng = np.random.default_rng(seed)
    fractions = []
    while len(fractions) < count:
        b = int(rng.integers(b_min, b_max + 1))
        a = int(rng.integers(1, b))
        while math.gcd(a, b) != 1:
            a = int(rng.integers(1, b))
        fractions.append(Fraction(a, b))
    log.info("drew %d random fractions with b <= %d (seed %d)",
             count, b_max, seed)
    return fractions


def all_reduced_fractions(b_max, b_min=1):
    # Every reduced a/b with 0 <= a < b, denominators in ascending order.
    return [Fraction(a, b)
            for b in range(b_min, b_max + 1)
            for a in range(b)
            if math.gcd(a, b) == 1]


def convergent_corpus(alpha, k_lo, k_hi):
    """The convergents p_k/q_k of alpha for k_lo <= k <= k_hi."""
    digits = [alpha.partial_quotient(k) for k in range(k_hi + 1)]
    ps, qs = convergents(digits)
    return [Fraction(ps[k], qs[k]) for k in range(k_lo, k_hi + 1)]


def corpus_frame(fractions):
    """Fractions as a dataframe with string columns a, b (exact integers)."""
    return pd.DataFrame({
        'a': [str(x.numerator) for x in fractions],
        'b': [str(x.denominator) for x in fractions],
    })


def save_corpus(fractions, fp):
    # Create the parent folder if it is not there yet.
    folder = os.path.dirname(fp)
    if folder and not os.path.exists(folder):
        os.makedirs(folder)
    corpus_frame(fractions).to_csv(fp, index=False)
    log.info("saved %d fractions to %s", len(fractions), fp)


def load_corpus(fp):
    df = pd.read_csv(fp, dtype=str)
    return [Fraction(int(a), int(b)) for a, b in zip(df['a'], df['b'])]

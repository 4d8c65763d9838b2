# -*- coding: utf-8 -*-
"""Command-line entry point `sudlerlab`."""
import json
import logging
import math
import sys
from fractions import Fraction

import click
import numpy as np
import pandas as pd

from src.config import TOLERANCE_PROFILES, RunConfig, set_progress
from src.data.continued_fractions import (
    QuadraticIrrational, build_convergents, cf_of_rational)
from src.data.make_dataset import (
    all_reduced_fractions, convergent_corpus, load_corpus,
    random_reduced_fractions, save_corpus)
from src.data.parsing import parse_alpha, parse_rational
from src.data.spectral import avg_partial_quotient, spectral
from src.exceptions import FormError, SudlerLabError
from src.features.functionals import jones_F, zagier_h_sequence
from src.features.sudler import IrrationalTarget, sudler_stream
from src.models import metrics
from src.models.growth_constants import (
    VOL_PANELS, default_window, estimate_growth_rate, estimate_many, parse_c,
    vol_41)
from src.models.limit_functions import (
    DEFAULT_TAIL_TOLERANCE, interval_I, limit_sweep, make_limit_spec)


LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
# columns holding exact integers; JSON carries them as decimal strings
EXACT_INT_KEYS = ('p_k', 'q_k', 'p', 'q', 'a', 'b')
J_PRINT_LIMIT = 300 * math.log(10)


log = logging.getLogger(__name__)


class SudlerLabGroup(click.Group):
    """Maps library errors to their exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except SudlerLabError as e:
            click.echo('error: {}'.format(e), err=True)
            ctx.exit(e.exit_code)


def _jsonable(key, value):
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return str(int(value)) if key in EXACT_INT_KEYS else int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, dict):
        return {k: _jsonable(k, v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(key, v) for v in value]
    return value


def _records(df):
    return [{k: _jsonable(k, v) for k, v in row.items()}
            for row in df.to_dict(orient='records')]


def emit(config, frame=None, record=None):
    """Write a frame and/or a record to stdout in the configured format."""
    if config.output_format == 'json':
        payload = {}
        if record is not None:
            payload.update(_jsonable(None, record))
        if frame is not None:
            payload['rows'] = _records(frame)
        click.echo(json.dumps(payload, sort_keys=True))
    elif config.output_format == 'csv':
        if frame is not None:
            click.echo(frame.to_csv(index=False), nl=False)
        else:
            click.echo(pd.DataFrame([record]).to_csv(index=False), nl=False)
    else:
        if record is not None:
            for key in record:
                click.echo('{} = {}'.format(key, record[key]))
        if frame is not None:
            click.echo(frame.to_string(index=False, float_format=repr))


def parse_range(text, cast=int):
    """'lo..hi' -> (lo, hi)."""
    try:
        lo, hi = text.split('..')
        return cast(lo), cast(hi)
    except ValueError:
        raise click.BadParameter("expected lo..hi, got {!r}".format(text))


def _quadratic(text):
    alpha = parse_alpha(text)
    if not isinstance(alpha, QuadraticIrrational):
        raise FormError("{} is not a quadratic irrational".format(text))
    return alpha


@click.group(cls=SudlerLabGroup)
@click.option('--precision-bits', type=int, default=None,
              help='Working precision of extended-precision reals.')
@click.option('--workers', type=int, default=None,
              help='Worker processes for chunked evaluation.')
@click.option('--chunk-size', type=int, default=None,
              help='Factors per evaluation chunk.')
@click.option('--json', 'as_json', is_flag=True, help='JSON output.')
@click.option('--csv', 'as_csv', is_flag=True, help='CSV output.')
@click.option('--tolerance-profile', type=click.Choice(TOLERANCE_PROFILES),
              default=None)
@click.option('-v', '--verbose', is_flag=True, help='Debug logging.')
@click.option('--quiet', is_flag=True,
              help='Only warnings on stderr, no progress bars.')
@click.pass_context
def main(ctx, precision_bits, workers, chunk_size, as_json, as_csv,
         tolerance_profile, verbose, quiet):
    """Sudler products, J_{4_1,0} and their growth constants."""
    level = logging.DEBUG if verbose else (
        logging.WARNING if quiet else logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr,
                        force=True)
    set_progress(not quiet)
    if as_json and as_csv:
        raise click.UsageError("--json and --csv are exclusive")
    output_format = 'json' if as_json else ('csv' if as_csv else 'table')
    try:
        ctx.obj = RunConfig.from_env(
            precision_bits=precision_bits, workers=workers,
            chunk_size=chunk_size, output_format=output_format,
            tolerance_profile=tolerance_profile)
    except ValueError as e:
        raise click.UsageError(str(e))
    ctx.meta['explicit_precision'] = precision_bits is not None
    log.debug("run config %s", ctx.obj)


def _bits(ctx):
    return ctx.obj.precision_bits if ctx.meta.get('explicit_precision') \
        else None


@main.command()
@click.argument('alpha_text')
@click.option('--k-max', type=int, default=10, show_default=True)
@click.pass_context
def cf(ctx, alpha_text, k_max):
    """Continued fraction, convergents and delta_k of ALPHA_TEXT."""
    config = ctx.obj
    alpha = parse_alpha(alpha_text)
    table = build_convergents(alpha, k_max, _bits(ctx))
    frame = pd.DataFrame({
        'k': range(table.k_max + 1),
        'a_k': table.partial_quotients,
        'p_k': table.p,
        'q_k': table.q,
        'delta_k': [table.delta_float(k) for k in range(table.k_max + 1)],
    })
    record = {'alpha': str(alpha)}
    if isinstance(alpha, Fraction):
        record['digits'] = cf_of_rational(alpha)
    else:
        deep = build_convergents(
            alpha, max(k_max, alpha.s + 3 * alpha.p + 2), _bits(ctx))
        data = spectral(alpha, deep)
        record.update({
            'lambda': float(data.lam),
            'eta': float(data.eta),
            'B': [float(b) for b in data.B],
            'kappa': str(data.kappa),
            'mean_partial_quotient': float(avg_partial_quotient(alpha)),
        })
    emit(config, frame, record)


@main.command()
@click.argument('rational_text')
@click.pass_context
def jones(ctx, rational_text):
    """log J_{4_1,0}(e(a/b)) and J itself when below 1e300."""
    x = parse_rational(rational_text)
    log_J = jones_F(x, ctx.obj)
    record = {'target': str(x), 'log_J': log_J,
              'J': math.exp(log_J) if log_J < J_PRINT_LIMIT else None}
    emit(ctx.obj, record=record)


@main.command()
@click.argument('target_text')
@click.option('--n-max', type=int, required=True)
@click.pass_context
def sudler(ctx, target_text, n_max):
    """Rows N, logP of the Sudler product of a rational or a surd."""
    config = ctx.obj
    target = parse_alpha(target_text)
    if isinstance(target, QuadraticIrrational):
        target = IrrationalTarget(target, config.precision_bits)
    stream = sudler_stream(target, n_max, config.chunk_size, config.workers)
    frame = stream.to_frame()
    if config.output_format == 'json':
        frame.insert(0, 'target', str(target))
        click.echo(json.dumps(_records(frame), sort_keys=True))
    else:
        emit(config, frame)


def _corpus(random_count, exhaustive, bmax, seed, corpus_fp=None):
    if corpus_fp:
        return load_corpus(corpus_fp)
    if exhaustive:
        return all_reduced_fractions(bmax)
    return random_reduced_fractions(random_count, bmax, seed)


@main.command()
@click.argument('suite', type=click.Choice(sorted(metrics.SUITES)))
@click.option('--random', 'random_count', type=int, default=100,
              show_default=True, help='Random reduced fractions to draw.')
@click.option('--exhaustive', is_flag=True,
              help='All reduced fractions with b <= bmax.')
@click.option('--bmax', type=int, default=1000, show_default=True)
@click.option('--seed', type=int, default=123, show_default=True)
@click.option('--corpus', 'corpus_fp', type=click.Path(exists=True),
              default=None, help='CSV written by make-corpus.')
@click.option('--alpha', 'alpha_text', default=None)
@click.option('--upto-k', type=int, default=10, show_default=True)
@click.option('--k', 'k_text', default=None, help='Window lo..hi.')
@click.option('--c', 'c_text', default='1,2,inf', show_default=True)
@click.pass_context
def verify(ctx, suite, random_count, exhaustive, bmax, seed, corpus_fp,
           alpha_text, upto_k, k_text, c_text):
    """Run a verification SUITE; exit code 1 on any failure."""
    config = ctx.obj
    alpha = _quadratic(alpha_text) if alpha_text else None
    if suite in ('transfer', 'factorization', 'bounds') and alpha is None:
        raise click.UsageError("suite {} needs --alpha".format(suite))
    if suite in ('reflection', 'average'):
        result = metrics.SUITES[suite](
            _corpus(random_count, exhaustive, bmax, seed, corpus_fp), config)
    elif suite == 'cotangent':
        if alpha is not None:
            targets = convergent_corpus(alpha, 1, upto_k)
        else:
            targets = _corpus(random_count, exhaustive, bmax, seed,
                              corpus_fp)
        result = metrics.cotangent_suite(targets, config)
    elif suite == 'transfer':
        lo, hi = parse_range(k_text) if k_text else (1, upto_k)
        result = metrics.transfer_suite(alpha, range(lo, hi + 1), config)
    elif suite == 'factorization':
        result = metrics.factorization_suite(alpha, upto_k, config)
    else:
        window = parse_range(k_text) if k_text else default_window(alpha)
        cs = [parse_c(c) for c in c_text.split(',')]
        result = metrics.bounds_suite(alpha, cs, window, config)
    record = result.summary()
    if config.output_format == 'table':
        emit(config, record=record)
        if len(result.counterexamples):
            emit(config, result.counterexamples)
    else:
        emit(config, result.counterexamples, record)
    if not result.passed:
        ctx.exit(1)


@main.command('estimate-k')
@click.argument('alpha_text')
@click.option('--c', 'c_text', default='inf', show_default=True,
              help='Comma separated exponents, inf for the maximum.')
@click.option('--k', 'k_text', default=None, help='Window lo..hi.')
@click.option('--irrational', is_flag=True,
              help='Also fit the growth in log M of P_N(alpha) itself.')
@click.pass_context
def estimate_k(ctx, alpha_text, c_text, k_text, irrational):
    """Growth constants K_c of ALPHA_TEXT along its convergents."""
    config = ctx.obj
    alpha = _quadratic(alpha_text)
    window = parse_range(k_text) if k_text else default_window(alpha)
    cs = [parse_c(c) for c in c_text.split(',')]
    reports = estimate_many(alpha, cs, window, config)
    records = [r.to_dict() for r in reports]
    if irrational:
        for c, record in zip(cs, records):
            rate = estimate_growth_rate(alpha, c, window, config)
            record['irrational'] = {'slope': rate.slope,
                                    'implied_K': rate.implied_K,
                                    'band': rate.band}
    if config.output_format == 'json':
        click.echo(json.dumps(_jsonable(None, records), sort_keys=True))
        return
    frame = pd.DataFrame([{
        'c': r['c'], 'K_hat': r['K_hat'], 'k_lo': r['k_window'][0],
        'k_hi': r['k_window'][1], 'band': r['fit_residual_band'],
        'slack': r['slope_slack'],
        'failed_bounds': sum(1 for b in rep.bounds if b.failed),
    } for r, rep in zip(records, reports)])
    emit(config, frame)
    if config.output_format == 'table':
        for record, rep in zip(records, reports):
            for b in rep.bounds:
                status = 'observed' if b.observational else (
                    'pass' if b.passed else 'FAIL')
                click.echo('  c={} {}: lhs={!r} rhs={!r} {}'.format(
                    record['c'], b.name, b.lhs, b.rhs, status))


@main.command()
@click.argument('alpha_text')
@click.option('--r', 'r', type=int, default=1, show_default=True)
@click.option('--x-range', 'x_text', default=None,
              help='lo..hi, defaults to the interval I_r.')
@click.option('--points', type=int, default=200, show_default=True)
@click.option('--n-trunc', type=int, default=None)
@click.option('--tail-tolerance', type=float,
              default=DEFAULT_TAIL_TOLERANCE, show_default=True)
@click.pass_context
def limitfn(ctx, alpha_text, r, x_text, points, n_trunc, tail_tolerance):
    """Sweep of the limit function G_r over an x grid."""
    config = ctx.obj
    alpha = _quadratic(alpha_text)
    table = build_convergents(alpha, alpha.s + 3 * alpha.p + 2, _bits(ctx))
    data = spectral(alpha, table)
    spec = make_limit_spec(data, r, n_trunc, tail_tolerance)
    if x_text:
        lo, hi = parse_range(x_text, float)
    else:
        interval = interval_I(data, r)
        lo, hi = interval.lo, interval.hi
    xs = list(np.linspace(lo, hi, points))
    if lo <= -spec.B_r <= hi:
        xs = sorted(set(xs) | {-spec.B_r})
    emit(config, limit_sweep(spec, xs))


@main.command('make-corpus')
@click.argument('output_filepath', type=click.Path())
@click.option('--random', 'random_count', type=int, default=100,
              show_default=True)
@click.option('--exhaustive', is_flag=True)
@click.option('--bmax', type=int, default=1000, show_default=True)
@click.option('--seed', type=int, default=123, show_default=True)
@click.option('--alpha', 'alpha_text', default=None,
              help='Write the convergents of ALPHA instead.')
@click.option('--upto-k', type=int, default=10, show_default=True)
@click.pass_context
def make_corpus(ctx, output_filepath, random_count, exhaustive, bmax, seed,
                alpha_text, upto_k):
    """Write a rational corpus (columns a, b) for `verify --corpus`."""
    if alpha_text:
        fractions = convergent_corpus(_quadratic(alpha_text), 1, upto_k)
    else:
        fractions = _corpus(random_count, exhaustive, bmax, seed)
    save_corpus(fractions, output_filepath)
    emit(ctx.obj, record={'path': output_filepath, 'count': len(fractions)})


@main.command()
@click.pass_context
def vol41(ctx):
    """Vol(4_1) with its quadrature step-halving difference."""
    vol = vol_41()
    finer = vol_41(panels=2 * VOL_PANELS)
    emit(ctx.obj, record={
        'vol': vol, 'vol_over_2pi': vol / (2 * math.pi),
        'vol_over_4pi': vol / (4 * math.pi),
        'halving_difference': abs(finer - vol)})


@main.command('h-sequence')
@click.argument('alpha_text')
@click.option('--k-max', type=int, default=20, show_default=True)
@click.pass_context
def h_sequence(ctx, alpha_text, k_max):
    """h(p_k/q_k) = log J(p_k/q_k) - log J(p_{k-1}/q_{k-1})."""
    alpha = _quadratic(alpha_text)
    emit(ctx.obj, zagier_h_sequence(alpha, k_max, ctx.obj))


if __name__ == '__main__':
    main()

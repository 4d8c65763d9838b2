"""Text format of numbers: `a/b`, `a`, `[a0; a1, ..., ak]` or
`[a0; a1, ..., as, (b1, ..., bp)]` with the period in parentheses."""
from fractions import Fraction

import pyparsing as pp

from src.data.continued_fractions import QuadraticIrrational, convergents
from src.exceptions import AlphaParseError


_signed = pp.pyparsing_common.signed_integer
_unsigned = pp.pyparsing_common.integer


def _int_list(item):
    return pp.Group(item + pp.ZeroOrMore(pp.Suppress(',') + item))


_period = pp.Suppress('(') + _int_list(_unsigned)('period') + pp.Suppress(')')
_body = _period | (
    _int_list(_unsigned)('pre') + pp.Optional(pp.Suppress(',') + _period))
_cf = (pp.Suppress('[') + _signed('a0')
       + pp.Optional(pp.Suppress(';') + _body) + pp.Suppress(']'))
_rational = _signed('num') + pp.Optional(pp.Suppress('/') + _unsigned('den'))
GRAMMAR = (_cf | _rational) + pp.StringEnd()


def parse_alpha(text):
    """Parse a rational or a quadratic irrational.

    Returns:
        Fraction or QuadraticIrrational
    Raises:
        AlphaParseError: with the character position of the failure
    """
    try:
        res = GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseException as e:
        raise AlphaParseError(text, e.loc, e.msg)

    if 'a0' not in res:
        den = res.get('den', 1)
        if den == 0:
            raise AlphaParseError(
                text, text.index('/') + 1, "zero denominator")
        return Fraction(res['num'], den)

    pre = [res['a0']] + list(res.get('pre', []))
    if 'period' not in res:
        if any(a < 1 for a in pre[1:]):
            raise AlphaParseError(text, 0, "partial quotients must be >= 1")
        ps, qs = convergents(pre)
        return Fraction(ps[-1], qs[-1])
    try:
        return QuadraticIrrational(tuple(pre), tuple(res['period']))
    except ValueError as e:
        raise AlphaParseError(text, 0, str(e))


def parse_rational(text):
    value = parse_alpha(text)
    if not isinstance(value, Fraction):
        raise AlphaParseError(text, 0, "a rational number is required")
    return value

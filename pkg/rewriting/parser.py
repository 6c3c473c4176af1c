"""
TRS file format.

One declaration per line; ``#`` starts a comment::

    vars x y              # optional; otherwise x, y, z, u, v, w (+ digits) are variables
    f(x,x) -> D           # rewrite rule
    C(a) = a              # equation (a file uses either -> or =, never both)
    term cw = rec X = C(X) in X

Left-hand sides are plain finite terms: ``rec`` is rejected there even when
it unfolds to a finite term.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import pyparsing as pp

from common.exceptions import InfiniteLhs, InfinirError, ModeError, TrsSyntaxError
from rewriting.rules import Trs, check_rule
from terms.graph import RationalTerm, Signature, to_finite
from terms.syntax import EXPRESSION, IDENT, make_term, mentions_rec, resolve, variable_predicate

logger = logging.getLogger('rewriting')


class Mode(str, Enum):
    EQUATIONAL = 'equational'
    REWRITING = 'rewriting'


ARROW = '->'

_TERM = pp.Keyword('term')
_VARS = pp.Keyword('vars')

VARS_LINE = pp.Suppress(_VARS) + pp.Group(pp.ZeroOrMore(IDENT + pp.Optional(pp.Suppress(','))))('names')
TERM_LINE = pp.Suppress(_TERM) + IDENT('name') + pp.Suppress('=') + EXPRESSION('value')
RULE_LINE = EXPRESSION('lhs') + (pp.Literal(ARROW) | pp.Literal('='))('sep') + EXPRESSION('rhs')
LINE = VARS_LINE | TERM_LINE | RULE_LINE


@dataclass
class TrsFile:
    trs: Trs
    mode: Optional[Mode] = None
    terms: Dict[str, RationalTerm] = field(default_factory=dict)
    variables: Optional[Tuple[str, ...]] = None


def _at_line(exc: InfinirError, lineno: int) -> InfinirError:
    if 'line' in exc.context:
        return exc
    return type(exc)(f"line {lineno}: {exc.message}", **{**exc.context, 'line': lineno})


def _strip_comment(line: str) -> str:
    return line.split('#', 1)[0].strip()


def _declaration(result, lineno, mode, terms, sides, is_variable) -> Optional[Mode]:
    if 'name' in result:
        value = resolve(result['value'], named=terms, is_variable=is_variable)
        terms[result['name']] = make_term([], value)
        return mode
    line_mode = Mode.REWRITING if result['sep'] == ARROW else Mode.EQUATIONAL
    if mode is not None and line_mode != mode:
        raise ModeError(f"line {lineno}: file mixes '=' and '->' declarations", line=lineno)
    lhs = None if mentions_rec(result['lhs']) else to_finite(
        make_term([], resolve(result['lhs'], is_variable=is_variable))
    )
    if lhs is None:
        raise InfiniteLhs(f"line {lineno}: left-hand side must be a finite term", line=lineno)
    rhs = make_term([], resolve(result['rhs'], named=terms, is_variable=is_variable))
    sides.append((lineno, lhs, rhs))
    return line_mode


def parse_trs(text: str) -> TrsFile:
    lines = text.splitlines()
    parsed: List[Tuple[int, pp.ParseResults]] = []
    for lineno, line in enumerate(lines, 1):
        if not _strip_comment(line):
            continue
        try:
            parsed.append((lineno, LINE.parse_string(_strip_comment(line), parse_all=True)))
        except pp.ParseBaseException as exc:
            raise TrsSyntaxError(exc.msg, line=lineno, col=exc.col) from None

    variables: Optional[List[str]] = None
    for _, result in parsed:
        if 'names' in result:
            variables = (variables or []) + list(result['names'])
    is_variable = variable_predicate(variables)

    mode: Optional[Mode] = None
    terms: Dict[str, RationalTerm] = {}
    sides: List[Tuple[int, object, RationalTerm]] = []
    for lineno, result in parsed:
        if 'names' in result:
            continue
        try:
            mode = _declaration(result, lineno, mode, terms, sides, is_variable)
        except InfinirError as exc:
            raise _at_line(exc, lineno) from None

    rules = []
    for lineno, lhs, rhs in sides:
        try:
            rules.append(check_rule(lhs, rhs))
        except InfinirError as exc:
            raise _at_line(exc, lineno) from None
    trs = Trs.from_rules(rules, Signature.of(*terms.values()))
    logger.info("Parsed %d %s declarations and %d named terms", len(rules), mode.value if mode else 'rule', len(terms))
    return TrsFile(trs, mode, terms, tuple(variables) if variables is not None else None)

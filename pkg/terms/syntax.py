"""
Term expressions: ``f(t1,...,tn)``, bare identifiers and ``rec X = e, ... in e``.

Bare identifiers resolve in this order: a name bound by an enclosing ``rec``,
a named term of the workspace, a variable (listed explicitly, or matching the
default ``[u-z][0-9_]*`` convention), otherwise a constant.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pyparsing as pp

from common.exceptions import InfiniteLhs, TrsSyntaxError, UnboundName, UnguardedBinding
from terms.graph import FiniteTerm, Node, RationalTerm, Signature, canonical, to_finite

logger = logging.getLogger('terms')

pp.ParserElement.enable_packrat()

DEFAULT_VARIABLE = re.compile(r'[u-z][0-9_]*\Z')
RESERVED = frozenset({'rec', 'in'})


# ---------- expression tree ----------

@dataclass(frozen=True)
class App:
    label: str
    args: Tuple['Expr', ...] = ()


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Ref:
    """Reference to a ``rec`` binding."""

    name: str


@dataclass(frozen=True)
class Rec:
    bindings: Tuple[Tuple[str, 'Expr'], ...]
    body: 'Expr'


@dataclass(frozen=True)
class Embed:
    """An already built term spliced into an expression."""

    term: RationalTerm


@dataclass(frozen=True)
class Name:
    """Bare identifier as parsed; replaced during resolution."""

    ident: str


Expr = Union[App, Var, Ref, Rec, Embed, Name]


# ---------- grammar ----------

def _grammar() -> Tuple[pp.ParserElement, pp.ParserElement]:
    LPAR, RPAR, EQ = map(pp.Suppress, '()=')
    REC = pp.Keyword('rec')
    IN = pp.Keyword('in')

    # a single token; results names on it are plain strings
    ident = pp.Word(pp.alphanums + '_', pp.alphanums + "_'").add_condition(
        lambda t: t[0] not in RESERVED, message='reserved word'
    )
    expr = pp.Forward()

    binding = pp.Group(ident + EQ + expr)
    rec = (pp.Suppress(REC) + pp.Group(pp.DelimitedList(binding)) + pp.Suppress(IN) + expr).set_parse_action(
        lambda t: Rec(tuple((b[0], b[1]) for b in t[0]), t[1])
    )
    app = (ident + LPAR + pp.Group(pp.Optional(pp.DelimitedList(expr))) + RPAR).set_parse_action(
        lambda t: App(t[0], tuple(t[1]))
    )
    name = ident.copy().set_parse_action(lambda t: Name(t[0]))

    expr <<= rec | app | name
    return ident, expr


IDENT, EXPRESSION = _grammar()


def parse_expression(text: str, line: int = 1, col_offset: int = 0) -> Expr:
    """Parse ``text`` into an unresolved expression tree."""
    try:
        return EXPRESSION.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as exc:
        raise TrsSyntaxError(exc.msg, line=line + exc.lineno - 1, col=col_offset + exc.col) from None


# ---------- resolution ----------

def variable_predicate(variables: Optional[Iterable[str]] = None) -> Callable[[str], bool]:
    if variables is None:
        return lambda ident: bool(DEFAULT_VARIABLE.match(ident))
    declared = frozenset(variables)
    return declared.__contains__


def resolve(
    expr: Expr,
    scope: frozenset = frozenset(),
    named: Optional[Mapping[str, RationalTerm]] = None,
    is_variable: Optional[Callable[[str], bool]] = None,
) -> Expr:
    named = named or {}
    is_variable = is_variable or variable_predicate()

    def walk(e: Expr, bound: frozenset) -> Expr:
        if isinstance(e, Name):
            if e.ident in bound:
                return Ref(e.ident)
            if e.ident in named:
                return Embed(named[e.ident])
            if is_variable(e.ident):
                return Var(e.ident)
            return App(e.ident)
        if isinstance(e, App):
            return App(e.label, tuple(walk(a, bound) for a in e.args))
        if isinstance(e, Rec):
            inner = bound | {n for n, _ in e.bindings}
            return Rec(tuple((n, walk(b, inner)) for n, b in e.bindings), walk(e.body, inner))
        return e

    return walk(expr, frozenset(scope))


# ---------- construction ----------

class _Builder:
    def __init__(self):
        self.nodes: List[Optional[Node]] = []
        self.alias: Dict[int, int] = {}
        self.slot_names: Dict[int, str] = {}

    def placeholder(self, name: str) -> int:
        self.nodes.append(None)
        slot = len(self.nodes) - 1
        self.slot_names[slot] = name
        return slot

    def build(self, expr: Expr, scope: Mapping[str, int]) -> int:
        if isinstance(expr, App):
            children = tuple(self.build(a, scope) for a in expr.args)
            self.nodes.append(Node(expr.label, children))
            return len(self.nodes) - 1
        if isinstance(expr, Var):
            self.nodes.append(Node(expr.name, (), True))
            return len(self.nodes) - 1
        if isinstance(expr, Ref):
            if expr.name not in scope:
                raise UnboundName(f"'{expr.name}' is not bound by any rec", name=expr.name)
            return scope[expr.name]
        if isinstance(expr, Name):
            if expr.ident in scope:
                return scope[expr.ident]
            self.nodes.append(Node(expr.ident))
            return len(self.nodes) - 1
        if isinstance(expr, Rec):
            return self.bind(expr.bindings, expr.body, scope)
        if isinstance(expr, Embed):
            base = len(self.nodes)
            for node in expr.term.nodes:
                self.nodes.append(Node(node.label, tuple(c + base for c in node.children), node.is_variable))
            return base + expr.term.root
        raise TypeError(f"not a term expression: {expr!r}")

    def bind(self, bindings: Sequence[Tuple[str, Expr]], body: Expr, scope: Mapping[str, int]) -> int:
        inner = dict(scope)
        for name, _ in bindings:
            inner[name] = self.placeholder(name)
        for name, value in bindings:
            self.alias[inner[name]] = self.build(value, inner)
        return self.build(body, inner)

    def target(self, index: int) -> int:
        seen = []
        while index in self.alias:
            if index in seen:
                names = ' = '.join(self.slot_names[i] for i in seen + [index])
                raise UnguardedBinding(f"unguarded binding {names}", name=self.slot_names[index])
            seen.append(index)
            index = self.alias[index]
        return index

    def finish(self, root: int) -> RationalTerm:
        for slot in self.alias:
            self.target(slot)
        nodes = [
            Node(n.label, tuple(self.target(c) for c in n.children), n.is_variable) if n is not None else None
            for n in self.nodes
        ]
        return canonical(nodes, self.target(root))


def make_term(
    bindings: Sequence[Tuple[str, Union[Expr, str]]],
    root: Union[Expr, str],
    signature: Optional[Signature] = None,
) -> RationalTerm:
    """
    Solve the guarded equation system ``bindings`` and return the term denoted by ``root``.

    Binding bodies and the root may be expression trees (using ``Ref`` for
    the bound names) or source text, in which case bare identifiers that
    name a binding are read as references.
    """
    names = frozenset(n for n, _ in bindings)

    def as_expr(value: Union[Expr, str]) -> Expr:
        if isinstance(value, str):
            return resolve(parse_expression(value), scope=names)
        return value

    builder = _Builder()
    top = builder.bind([(n, as_expr(v)) for n, v in bindings], as_expr(root), {})
    term = builder.finish(top)
    if signature is not None:
        signature.check(term)
    return term


def parse_term(
    text: str,
    variables: Optional[Iterable[str]] = None,
    named: Optional[Mapping[str, RationalTerm]] = None,
    signature: Optional[Signature] = None,
    line: int = 1,
    col_offset: int = 0,
) -> RationalTerm:
    expr = resolve(parse_expression(text, line, col_offset), named=named, is_variable=variable_predicate(variables))
    return make_term([], expr, signature)


def parse_finite_term(
    text: str,
    variables: Optional[Iterable[str]] = None,
    line: int = 1,
    col_offset: int = 0,
) -> FiniteTerm:
    """Parse a rule left-hand side; ``rec`` and named terms are rejected."""
    expr = resolve(parse_expression(text, line, col_offset), is_variable=variable_predicate(variables))
    finite = to_finite(make_term([], expr))
    if finite is None or mentions_rec(expr):
        raise InfiniteLhs(f"left-hand side '{text.strip()}' must be a finite term", line=line)
    return finite


def mentions_rec(expr: Expr) -> bool:
    if isinstance(expr, Rec):
        return True
    if isinstance(expr, App):
        return any(mentions_rec(a) for a in expr.args)
    return False


# ---------- rendering ----------

def _prefix(t: RationalTerm) -> str:
    labels = {n.label for n in t.nodes}
    for prefix in ('X', 'Y', 'Z', 'R'):
        if not any(re.fullmatch(re.escape(prefix) + r'\d+', label) for label in labels):
            return prefix
    return 'REC'


def render_term(t: RationalTerm) -> str:
    """Print ``t`` so that ``parse_term`` reads it back to the same term."""
    indegree = [0] * len(t.nodes)
    for node in t.nodes:
        for child in node.children:
            indegree[child] += 1
    shared = {i for i, d in enumerate(indegree) if d >= 2}
    if indegree[t.root]:
        shared.add(t.root)
    prefix = _prefix(t)

    def inline(i: int, top: bool = False) -> str:
        if i in shared and not top:
            return f"{prefix}{i}"
        node = t.nodes[i]
        if not node.children:
            return node.label
        return f"{node.label}({','.join(inline(c) for c in node.children)})"

    if not shared:
        return inline(t.root)
    definitions = ', '.join(f"{prefix}{i} = {inline(i, top=True)}" for i in sorted(shared))
    return f"rec {definitions} in {inline(t.root)}"


def render_finite(term: FiniteTerm) -> str:
    return str(term)

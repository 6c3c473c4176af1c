"""
Rational terms as canonical rooted term graphs.

A ``RationalTerm`` is a finite graph whose tree unfolding is the (possibly
infinite) term it denotes. Every term handed out by this module is in
canonical form: the minimal graph for its unfolding with nodes numbered
breadth-first from the root. Two canonical terms are bisimilar exactly when
they are equal as Python values, so they can be hashed and stored in sets.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import total_ordering
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from common.exceptions import ArityMismatch, InvalidPosition, ReservedSymbol

logger = logging.getLogger('terms')

CUT = '#'

Position = Tuple[int, ...]
ROOT: Position = ()


def format_position(position: Sequence[int]) -> str:
    """Render a position as ``eps`` or dotted child indices (``1.2``)."""
    return '.'.join(str(i) for i in position) if position else 'eps'


@dataclass(frozen=True)
class Node:
    label: str
    children: Tuple[int, ...] = ()
    is_variable: bool = False

    @property
    def head(self) -> Tuple[str, int, bool]:
        return (self.label, len(self.children), self.is_variable)


@dataclass(frozen=True)
class Signature:
    """Function symbols with their arities."""

    symbols: Tuple[Tuple[str, int], ...] = ()

    def __post_init__(self):
        seen: Dict[str, int] = {}
        for name, arity in self.symbols:
            if name == CUT:
                raise ReservedSymbol(f"'{CUT}' is reserved for truncation", symbol=name)
            if name in seen and seen[name] != arity:
                raise ArityMismatch(
                    f"symbol '{name}' declared with arities {seen[name]} and {arity}", symbol=name
                )
            seen[name] = arity
        object.__setattr__(self, 'symbols', tuple(sorted(seen.items())))

    @property
    def arities(self) -> Dict[str, int]:
        return dict(self.symbols)

    def arity(self, name: str) -> Optional[int]:
        return self.arities.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.arities

    def merge(self, other: 'Signature') -> 'Signature':
        return Signature(self.symbols + other.symbols)

    @classmethod
    def of(cls, *terms: 'RationalTerm') -> 'Signature':
        """Signature inferred from the symbols used in ``terms``."""
        symbols = []
        for term in terms:
            symbols.extend(term.symbols())
        return cls(tuple(symbols))

    def check(self, term: 'RationalTerm') -> None:
        """Raise ArityMismatch when ``term`` disagrees with the declared arities."""
        arities = self.arities
        for node in term.nodes:
            if node.is_variable:
                if node.label in arities:
                    raise ArityMismatch(
                        f"'{node.label}' is used both as a variable and as a symbol", symbol=node.label
                    )
                continue
            expected = arities.get(node.label)
            if expected is not None and expected != len(node.children):
                raise ArityMismatch(
                    f"symbol '{node.label}' has arity {expected}, used with {len(node.children)} arguments",
                    symbol=node.label,
                )


@dataclass(frozen=True)
class FiniteTerm:
    """An ordinary well-founded term, used for rule left-hand sides and truncations."""

    label: str
    args: Tuple['FiniteTerm', ...] = ()
    is_variable: bool = False

    def __str__(self) -> str:
        if not self.args:
            return self.label
        return f"{self.label}({','.join(str(a) for a in self.args)})"

    @property
    def is_cut(self) -> bool:
        return self.label == CUT and not self.is_variable

    def depth(self) -> int:
        return 1 + max((a.depth() for a in self.args), default=-1)

    def variables(self) -> FrozenSet[str]:
        return frozenset(name for name, _ in self.variable_occurrences())

    def variable_occurrences(self) -> List[Tuple[str, Position]]:
        found: List[Tuple[str, Position]] = []
        stack: List[Tuple['FiniteTerm', Position]] = [(self, ROOT)]
        while stack:
            term, position = stack.pop()
            if term.is_variable:
                found.append((term.label, position))
            for i in reversed(range(len(term.args))):
                stack.append((term.args[i], position + (i + 1,)))
        return found

    def labels(self) -> Iterator[str]:
        yield self.label
        for arg in self.args:
            yield from arg.labels()


@total_ordering
@dataclass(frozen=True)
class DyadicDistance:
    """``Zero`` or ``2^-exponent``; ordered by the value it denotes."""

    exponent: Optional[int] = None

    @classmethod
    def zero(cls) -> 'DyadicDistance':
        return cls(None)

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def __lt__(self, other: 'DyadicDistance') -> bool:
        if self.is_zero:
            return not other.is_zero
        if other.is_zero:
            return False
        return self.exponent > other.exponent

    def __str__(self) -> str:
        return '0' if self.is_zero else f"2^-{self.exponent}"


@dataclass(frozen=True)
class RationalTerm:
    nodes: Tuple[Node, ...]
    root: int = 0

    def __post_init__(self):
        count = len(self.nodes)
        if not 0 <= self.root < count:
            raise InvalidPosition(f"root {self.root} outside a graph of {count} nodes")
        arities: Dict[str, int] = {}
        for node in self.nodes:
            if node.is_variable:
                if node.children:
                    raise ArityMismatch(f"variable '{node.label}' cannot have arguments", symbol=node.label)
                continue
            if any(not 0 <= c < count for c in node.children):
                raise InvalidPosition(f"node '{node.label}' points outside the graph")
            known = arities.setdefault(node.label, len(node.children))
            if known != len(node.children):
                raise ArityMismatch(
                    f"symbol '{node.label}' used with arities {known} and {len(node.children)}",
                    symbol=node.label,
                )

    def __str__(self) -> str:
        from terms.syntax import render_term

        return render_term(self)

    def __repr__(self) -> str:
        return f"RationalTerm({self})"

    # ---------- root access ----------

    @property
    def head(self) -> Node:
        return self.nodes[self.root]

    @property
    def label(self) -> str:
        return self.head.label

    @property
    def arity(self) -> int:
        return len(self.head.children)

    @property
    def is_variable(self) -> bool:
        return self.head.is_variable

    @property
    def size(self) -> int:
        return len(self.nodes)

    def child(self, i: int) -> 'RationalTerm':
        """The i-th argument (1-based)."""
        return subterm_at(self, (i,))

    def arguments(self) -> Tuple['RationalTerm', ...]:
        return tuple(canonical(self.nodes, c) for c in self.head.children)

    def symbols(self) -> List[Tuple[str, int]]:
        return [(n.label, len(n.children)) for n in self.nodes if not n.is_variable]

    def is_finite(self) -> bool:
        return _is_acyclic(self.nodes, self.root)


# ---------- construction helpers ----------

def _reachable(nodes: Sequence[Node], root: int) -> List[int]:
    order = [root]
    seen = {root}
    queue = deque([root])
    while queue:
        for child in nodes[queue.popleft()].children:
            if child not in seen:
                seen.add(child)
                order.append(child)
                queue.append(child)
    return order


def _is_acyclic(nodes: Sequence[Node], root: int) -> bool:
    reachable = _reachable(nodes, root)
    g = nx.DiGraph()
    g.add_nodes_from(reachable)
    g.add_edges_from((i, c) for i in reachable for c in nodes[i].children)
    return nx.is_directed_acyclic_graph(g)


def canonical(nodes: Sequence[Node], root: int) -> RationalTerm:
    """
    Minimize the graph reachable from ``root`` and number it breadth-first.

    Partition refinement: nodes start grouped by (label, arity, kind) and
    blocks are split by the blocks of their children until stable.
    """
    reachable = _reachable(nodes, root)
    ids: Dict[Tuple, int] = {}
    block = {i: ids.setdefault(nodes[i].head, len(ids)) for i in reachable}
    count = len(ids)
    while True:
        ids = {}
        refined = {
            i: ids.setdefault((block[i], tuple(block[c] for c in nodes[i].children)), len(ids))
            for i in reachable
        }
        block = refined
        if len(ids) == count:
            break
        count = len(ids)

    representative: Dict[int, int] = {}
    for i in reachable:
        representative.setdefault(block[i], i)

    numbering = {block[root]: 0}
    order = [block[root]]
    queue = deque([block[root]])
    while queue:
        b = queue.popleft()
        for child in nodes[representative[b]].children:
            cb = block[child]
            if cb not in numbering:
                numbering[cb] = len(order)
                order.append(cb)
                queue.append(cb)

    result = []
    for b in order:
        node = nodes[representative[b]]
        result.append(Node(node.label, tuple(numbering[block[c]] for c in node.children), node.is_variable))
    return RationalTerm(tuple(result), 0)


def minimize(t: RationalTerm) -> RationalTerm:
    return canonical(t.nodes, t.root)


def apply(label: str, *args: RationalTerm) -> RationalTerm:
    """Build ``label(args...)``; with no arguments this is a constant."""
    nodes: List[Node] = [Node(label)]
    children = []
    for arg in args:
        base = len(nodes)
        nodes.extend(_shifted(arg, base))
        children.append(base + arg.root)
    nodes[0] = Node(label, tuple(children))
    return canonical(nodes, 0)


def variable(name: str) -> RationalTerm:
    return RationalTerm((Node(name, (), True),), 0)


def from_finite(term: FiniteTerm) -> RationalTerm:
    nodes: List[Node] = []

    def build(ft: FiniteTerm) -> int:
        children = tuple(build(a) for a in ft.args)
        nodes.append(Node(ft.label, children, ft.is_variable))
        return len(nodes) - 1

    root = build(term)
    return canonical(nodes, root)


def to_finite(t: RationalTerm) -> Optional[FiniteTerm]:
    """The tree of ``t`` when its unfolding is finite, else None."""
    if not t.is_finite():
        return None

    def build(i: int) -> FiniteTerm:
        node = t.nodes[i]
        return FiniteTerm(node.label, tuple(build(c) for c in node.children), node.is_variable)

    return build(t.root)


def _shifted(t: RationalTerm, base: int) -> List[Node]:
    return [Node(n.label, tuple(c + base for c in n.children), n.is_variable) for n in t.nodes]


# ---------- observation ----------

def bisimilar(s: RationalTerm, t: RationalTerm) -> bool:
    """True iff the tree unfoldings of ``s`` and ``t`` coincide."""
    start = (s.root, t.root)
    seen = {start}
    queue = deque([start])
    while queue:
        i, j = queue.popleft()
        a, b = s.nodes[i], t.nodes[j]
        if a.head != b.head:
            return False
        for pair in zip(a.children, b.children):
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return True


def distance(s: RationalTerm, t: RationalTerm) -> DyadicDistance:
    """Exact dyadic distance: ``2^-n`` for the first level ``n`` where the trees differ."""
    start = (s.root, t.root)
    seen = {start}
    level = [start]
    depth = 0
    while level:
        following = []
        for i, j in level:
            a, b = s.nodes[i], t.nodes[j]
            if a.head != b.head:
                return DyadicDistance(depth)
            for pair in zip(a.children, b.children):
                if pair not in seen:
                    seen.add(pair)
                    following.append(pair)
        level = following
        depth += 1
    return DyadicDistance.zero()


def truncate(t: RationalTerm, n: int) -> FiniteTerm:
    """Tree unfolding of ``t`` with every subterm at depth ``n`` replaced by ``#``."""
    memo: Dict[Tuple[int, int], FiniteTerm] = {}
    cut = FiniteTerm(CUT)

    def build(i: int, budget: int) -> FiniteTerm:
        if budget == 0:
            return cut
        key = (i, budget)
        if key not in memo:
            node = t.nodes[i]
            memo[key] = FiniteTerm(
                node.label, tuple(build(c, budget - 1) for c in node.children), node.is_variable
            )
        return memo[key]

    return build(t.root, n)


def node_at(t: RationalTerm, position: Sequence[int]) -> int:
    index = t.root
    for step, i in enumerate(position):
        children = t.nodes[index].children
        if not 1 <= i <= len(children):
            raise InvalidPosition(
                f"position {format_position(position)} leaves the term at step {step + 1}",
                position=tuple(position),
            )
        index = children[i - 1]
    return index


def subterm_at(t: RationalTerm, position: Sequence[int]) -> RationalTerm:
    return canonical(t.nodes, node_at(t, position))


def inner_positions(t: RationalTerm) -> Dict[int, Position]:
    """
    One shortest non-empty position for every node met below the root, in
    breadth-first order. The root itself is included when it lies on a cycle.
    """
    g = nx.DiGraph()
    g.add_node(t.root)
    for i, node in enumerate(t.nodes):
        for k, child in enumerate(node.children, 1):
            if not g.has_edge(i, child):
                g.add_edge(i, child, index=k)
    paths = nx.single_source_shortest_path(g, t.root)

    def position(path: List[int]) -> Position:
        return tuple(g.edges[u, v]['index'] for u, v in zip(path, path[1:]))

    found = {i: position(path) for i, path in paths.items() if i != t.root}
    returns = [position(paths[u]) + (g.edges[u, t.root]['index'],) for u in g.predecessors(t.root) if u in paths]
    if returns:
        found[t.root] = min(returns, key=lambda p: (len(p), p))
    return found


def positions(t: RationalTerm, max_depth: int) -> Iterator[Tuple[Position, int]]:
    """Tree positions of length at most ``max_depth`` with their nodes, in lexicographic order."""
    stack: List[Tuple[Position, int]] = [(ROOT, t.root)]
    while stack:
        position, index = stack.pop()
        yield position, index
        if len(position) < max_depth:
            children = t.nodes[index].children
            for k in range(len(children), 0, -1):
                stack.append((position + (k,), children[k - 1]))


def variables_of(t: RationalTerm) -> FrozenSet[str]:
    return frozenset(t.nodes[i].label for i in _reachable(t.nodes, t.root) if t.nodes[i].is_variable)


# ---------- transformation ----------

def substitute(t: RationalTerm, sigma: Mapping[str, RationalTerm]) -> RationalTerm:
    """Apply ``sigma`` corecursively: each variable node becomes an edge to the root of its image."""
    if not sigma:
        return minimize(t)
    nodes = list(t.nodes)
    targets: Dict[str, int] = {}
    for name in sorted(sigma):
        image = sigma[name]
        base = len(nodes)
        nodes.extend(_shifted(image, base))
        targets[name] = base + image.root
    redirect = {
        i: targets[node.label]
        for i, node in enumerate(t.nodes)
        if node.is_variable and node.label in targets
    }
    for i, node in enumerate(t.nodes):
        nodes[i] = Node(node.label, tuple(redirect.get(c, c) for c in node.children), node.is_variable)
    return canonical(nodes, redirect.get(t.root, t.root))


def _unroll(t: RationalTerm, position: Sequence[int], nodes: List[Node]) -> Tuple[List[int], List[int]]:
    """Copy the nodes along ``position`` so the occurrence there can be replaced on its own."""
    path = [t.root]
    for step, i in enumerate(position):
        children = t.nodes[path[-1]].children
        if not 1 <= i <= len(children):
            raise InvalidPosition(
                f"position {format_position(position)} leaves the term at step {step + 1}",
                position=tuple(position),
            )
        path.append(children[i - 1])
    copies = []
    for index in path[:-1]:
        nodes.append(t.nodes[index])
        copies.append(len(nodes) - 1)
    return path, copies


def _relink(nodes: List[Node], copies: List[int], position: Sequence[int], last: int) -> None:
    for depth, copy in enumerate(copies):
        node = nodes[copy]
        children = list(node.children)
        children[position[depth] - 1] = copies[depth + 1] if depth + 1 < len(copies) else last
        nodes[copy] = Node(node.label, tuple(children), node.is_variable)


def replace_at(t: RationalTerm, position: Sequence[int], replacement: RationalTerm) -> RationalTerm:
    """The term ``t[replacement]_position`` under tree semantics (other occurrences untouched)."""
    if not position:
        return minimize(replacement)
    nodes = list(t.nodes)
    _, copies = _unroll(t, position, nodes)
    base = len(nodes)
    nodes.extend(_shifted(replacement, base))
    _relink(nodes, copies, position, base + replacement.root)
    return canonical(nodes, copies[0])


def pump(t: RationalTerm, position: Sequence[int]) -> RationalTerm:
    """The rational limit ``L = t[L]_position`` (position must be non-empty)."""
    if not position:
        raise InvalidPosition("cannot pump at the root", position=())
    nodes = list(t.nodes)
    _, copies = _unroll(t, position, nodes)
    _relink(nodes, copies, position, copies[0])
    return canonical(nodes, copies[0])


def with_arguments(t: RationalTerm, args: Iterable[RationalTerm]) -> RationalTerm:
    """Same root symbol as ``t`` over new arguments."""
    args = tuple(args)
    if len(args) != t.arity:
        raise ArityMismatch(f"'{t.label}' expects {t.arity} arguments, got {len(args)}", symbol=t.label)
    return apply(t.label, *args)

"""
Compression of infinitary rewriting certificates.

An ``OredCertificate`` presents a reduction of length at most omega level
by level: each node is a finite head reduction that brings its start term
to the target's root symbol, followed by one child per argument that
either continues one level down or stops because the argument already
equals the target's. Levels that repeat the same pending work are shared,
so the certificate's cycles become cycles here.

Only left-linear systems with finite left-hand sides compress. A head is
the certificate's own root steps, each preceded by just enough of the
nested argument reductions to expose the rule's left-hand side.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx
from django.conf import settings

from common.exceptions import InfinirError, InvalidBudget, InvalidCertificate, NotLeftLinear
from proofs.certificates import Identity, ProofGraph, RootStepItem
from proofs.validation import ValidationReport, ViolationCode, validate
from relations.universe import RelationKind
from rewriting.reductions import FiniteReduction, ReductionStep
from rewriting.rules import Trs, freeze, is_left_linear, match_root
from terms.graph import (
    FiniteTerm, Node, Position, RationalTerm, apply, canonical, format_position, substitute, truncate,
    with_arguments,
)

logger = logging.getLogger('compression')

STOP = 'stop'
PENDING = '<'

Child = Union[int, str]


@dataclass(frozen=True)
class OredNode:
    start: RationalTerm
    target: RationalTerm
    head: FiniteReduction
    children: Tuple[Child, ...] = ()


@dataclass(frozen=True)
class OredCertificate:
    nodes: Tuple[OredNode, ...]
    root: int = 0

    @property
    def start(self) -> RationalTerm:
        return self.nodes[self.root].start

    @property
    def target(self) -> RationalTerm:
        return self.nodes[self.root].target

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        for i, node in enumerate(self.nodes):
            g.add_edges_from((i, c) for c in node.children if c != STOP and 0 <= c < len(self.nodes))
        return g

    def productive(self) -> frozenset:
        """Nodes from which some non-empty head is reachable."""
        g = self.graph()
        working = {i for i, node in enumerate(self.nodes) if node.head.steps}
        for i in list(working):
            working |= nx.ancestors(g, i)
        return frozenset(working)

    def is_finite(self) -> bool:
        """No productive cycle: the denoted reduction has finitely many steps."""
        productive = self.productive()
        return nx.is_directed_acyclic_graph(self.graph().subgraph(productive))


@dataclass(frozen=True)
class EmittedStep:
    step: ReductionStep
    level: int


@dataclass(frozen=True)
class StepStream:
    start: RationalTerm
    steps: Tuple[EmittedStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def reduction(self) -> FiniteReduction:
        return FiniteReduction(self.start, tuple(e.step for e in self.steps))

    def replay(self, trs: Trs) -> List[RationalTerm]:
        return self.reduction.terms(trs)


# ---------- compress ----------

def _pending(index: int, t: RationalTerm) -> RationalTerm:
    """``t`` with certificate node ``index`` still to be run on it."""
    return apply(f'{PENDING}{index}>', t)


def _pending_index(t: RationalTerm) -> Optional[int]:
    if t.label.startswith(PENDING) and not t.is_variable:
        return int(t.label[len(PENDING):-1])
    return None


def _erase(t: RationalTerm) -> RationalTerm:
    """The actual term: every pending marker replaced by the term under it."""
    nodes = t.nodes

    def through(i: int) -> int:
        while nodes[i].label.startswith(PENDING) and not nodes[i].is_variable:
            i = nodes[i].children[0]
        return i

    stripped = [Node(n.label, tuple(through(c) for c in n.children), n.is_variable) for n in nodes]
    return canonical(stripped, through(t.root))


class _Compressor:
    """
    Replays the certificate level by level. The working term carries the
    reductions not yet performed as marker nodes over the subterms they
    start from: lifts push their premises one level down as markers, and a
    marker is only run when a root step needs a symbol under it. Markers
    below rule variables travel with the substitution, which is sound
    because every left-hand side is linear.
    """

    def __init__(self, p: ProofGraph, trs: Trs):
        self.p = p
        self.trs = trs
        self.max_nodes = getattr(settings, 'COMPRESS_MAX_NODES', 256)
        self.index: Dict[Tuple[RationalTerm, RationalTerm], int] = {}
        self.nodes: List[Optional[OredNode]] = []
        self.queue: deque = deque()
        self.steps: List[ReductionStep] = []

    def node(self, start: RationalTerm, target: RationalTerm) -> int:
        key = (start, target)
        if key not in self.index:
            if len(self.nodes) >= self.max_nodes:
                raise InvalidBudget(
                    f"compression needs more than {self.max_nodes} levels (COMPRESS_MAX_NODES)", nodes=len(self.nodes),
                )
            self.index[key] = len(self.nodes)
            self.nodes.append(None)
            self.queue.append(key)
        return self.index[key]

    def concrete(self, m: RationalTerm, position: Position) -> RationalTerm:
        """Run pending markers at the root until a symbol of the actual term shows."""
        index = _pending_index(m)
        while index is not None:
            m = self.split(index, self.concrete(m.child(1), position), position)
            index = _pending_index(m)
        return m

    def split(self, index: int, m: RationalTerm, position: Position) -> RationalTerm:
        for item in self.p.nodes[index].rule.items:
            if isinstance(item, RootStepItem):
                m = self.root_step(m, item.rule_index, position)
            else:
                m = self.lift(item.node, m, position)
        return m

    def lift(self, index: int, m: RationalTerm, position: Position) -> RationalTerm:
        node = self.p.nodes[index]
        if isinstance(node.rule, Identity):
            return m
        m = self.concrete(m, position)
        if m.arity != len(node.rule.premises):
            raise InvalidCertificate(f"lift {index} expects {len(node.rule.premises)} arguments under {_erase(m)}")
        return with_arguments(m, (_pending(premise, arg) for premise, arg in zip(node.rule.premises, m.arguments())))

    def expose(self, m: RationalTerm, pattern: FiniteTerm, position: Position) -> RationalTerm:
        """Run the markers that sit where ``pattern`` has a symbol."""
        if pattern.is_variable:
            return m
        m = self.concrete(m, position)
        if (m.label, m.arity, m.is_variable) != (pattern.label, len(pattern.args), False):
            raise InvalidCertificate(f"'{pattern}' does not occur at {format_position(position)} of the replayed term")
        if not pattern.args:
            return m
        return with_arguments(m, (
            self.expose(arg, sub, tuple(position) + (i,))
            for i, (sub, arg) in enumerate(zip(pattern.args, m.arguments()), 1)
        ))

    def root_step(self, m: RationalTerm, rule_index: int, position: Position) -> RationalTerm:
        rule = self.trs.rule(rule_index)
        m = self.expose(m, rule.lhs, position)
        sigma = match_root(rule.pattern, m)
        if sigma is None:
            raise InvalidCertificate(f"rule {rule_index} does not apply at {format_position(position)}")
        self.steps.append(ReductionStep(tuple(position), rule_index, freeze({k: _erase(v) for k, v in sigma.items()})))
        return substitute(rule.rhs, sigma)

    def level(self, m: RationalTerm, target: RationalTerm) -> OredNode:
        start = _erase(m)
        if start == target:
            return OredNode(start, target, FiniteReduction(start), tuple(STOP for _ in range(target.arity)))
        self.steps = []
        done = self.concrete(m, ())
        end = _erase(done)
        if (end.label, end.arity, end.is_variable) != (target.label, target.arity, target.is_variable):
            raise InvalidCertificate(f"replay from {start} ends in {end}, not at the root of {target}")
        children = tuple(
            STOP if _erase(a) == b else self.node(a, b)
            for a, b in zip(done.arguments(), target.arguments())
        )
        return OredNode(start, target, FiniteReduction(start, tuple(self.steps), end), children)

    def run(self) -> OredCertificate:
        s, t = self.p.goal
        root = self.node(_pending(self.p.root, s), t)
        while self.queue:
            key = self.queue.popleft()
            self.nodes[self.index[key]] = self.level(*key)
        return OredCertificate(tuple(self.nodes), root)


def compress(p: ProofGraph, trs: Trs) -> OredCertificate:
    if p.kind is not RelationKind.IRED:
        raise InvalidCertificate(f"only {RelationKind.IRED.value} certificates compress", kind=p.kind.value)
    if not is_left_linear(trs):
        raise NotLeftLinear("compression needs a left-linear rule set")
    report = validate(p, trs)
    if not report.ok:
        raise InvalidCertificate(f"certificate has {len(report.violations)} violations: {report.violations[0]}")
    ored = _Compressor(p, trs).run()
    logger.info("Compressed %s ->> %s into %d levels", ored.start, ored.target, len(ored.nodes))
    return ored


# ---------- step streams ----------

def _levels(o: OredCertificate, k: Optional[int] = None, max_level: Optional[int] = None) -> StepStream:
    productive = o.productive()
    emitted: List[EmittedStep] = []
    level: List[Tuple[int, Position]] = [(o.root, ())] if o.root in productive else []
    depth = 0
    while level and (max_level is None or depth < max_level):
        following = []
        for index, position in level:
            node = o.nodes[index]
            for step in node.head.steps:
                if k is not None and len(emitted) == k:
                    return StepStream(o.start, tuple(emitted))
                emitted.append(EmittedStep(step.shifted(position), depth))
            for i, child in enumerate(node.children):
                if child != STOP and child in productive:
                    following.append((child, tuple(position) + (i + 1,)))
        level = following
        depth += 1
    return StepStream(o.start, tuple(emitted))


def emit_steps(o: OredCertificate, k: int) -> StepStream:
    """
    The first ``k`` steps: every head of level 0, then level 1 left to
    right, and so on. Shorter only when the whole reduction is shorter.
    """
    if k < 0:
        raise InvalidBudget(f"step count must be non-negative, got {k}", steps=k)
    return _levels(o, k=k)


# ---------- validation ----------

def validate_ored(o: OredCertificate, trs: Trs, depth: int) -> ValidationReport:
    report = ValidationReport()
    if not 0 <= o.root < len(o.nodes):
        report.add(o.root, ViolationCode.DANGLING_EDGE, "root is not a node of the certificate")
        return report
    for index, node in enumerate(o.nodes):
        _check_node(report, o, index, node, trs)
    if report.ok:
        for n in range(1, depth + 1):
            stream = _levels(o, max_level=n)
            try:
                end = stream.replay(trs)[-1]
            except InfinirError as exc:
                report.add(o.root, ViolationCode.BAD_STEP, f"levels below {n} do not replay: {exc.message}")
                break
            if truncate(end, n) != truncate(o.target, n):
                report.add(o.root, ViolationCode.TRUNCATION_MISMATCH,
                           f"after {n} levels the term is {truncate(end, n)}, target needs {truncate(o.target, n)}")
                break
    for violation in report.violations:
        logger.warning("Ored violation: %s", violation)
    return report


def _check_node(report: ValidationReport, o: OredCertificate, index: int, node: OredNode, trs: Trs) -> None:
    if node.head.start != node.start:
        report.add(index, ViolationCode.BROKEN_CHAIN, f"head starts at {node.head.start}, node at {node.start}")
    try:
        end = node.head.terms(trs)[-1]
    except InfinirError as exc:
        report.add(index, ViolationCode.BAD_STEP, exc.message)
        return
    target = node.target
    if (end.label, end.is_variable) != (target.label, target.is_variable):
        report.add(index, ViolationCode.ROOT_SYMBOL_MISMATCH, f"head ends in {end}, target is {target}")
        return
    if not (end.arity == target.arity == len(node.children)):
        report.add(index, ViolationCode.ARITY_MISMATCH,
                   f"{len(node.children)} children for {end} and {target}")
        return
    for i, (child, a, b) in enumerate(zip(node.children, end.arguments(), target.arguments())):
        if child == STOP:
            if a != b:
                report.add(index, ViolationCode.NOT_BISIMILAR, f"argument {i + 1} stops at {a}, target needs {b}")
        elif not (isinstance(child, int) and 0 <= child < len(o.nodes)):
            report.add(index, ViolationCode.DANGLING_EDGE, f"child {child!r} is not a node")
        elif (o.nodes[child].start, o.nodes[child].target) != (a, b):
            report.add(index, ViolationCode.BROKEN_CHAIN, f"child {child} does not continue argument {i + 1}")

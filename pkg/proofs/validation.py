"""
Independent checker for cyclic certificates.

Every local rule instance is re-checked against the rule set; for
infinitary rewriting the global condition is that no marked lift lies on
a cycle. ``validate`` never raises: problems are collected in a report.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Set

import networkx as nx

from proofs.certificates import (
    Identity, Judgment, Lift, LiftItem, ProofGraph, RootStepItem, Split,
)
from relations.universe import RelationKind
from rewriting.rules import Direction, Trs, check_root_step
from terms.graph import bisimilar

logger = logging.getLogger('proofs')


class ViolationCode(str, Enum):
    BAD_ROOT_STEP = 'BadRootStep'
    UNKNOWN_RULE = 'UnknownRule'
    BAD_DIRECTION = 'BadDirection'
    BROKEN_CHAIN = 'BrokenChain'
    WRONG_RULE = 'WrongRule'
    WRONG_JUDGMENT = 'WrongJudgment'
    ROOT_SYMBOL_MISMATCH = 'RootSymbolMismatch'
    ARITY_MISMATCH = 'ArityMismatch'
    ARGUMENT_MISMATCH = 'ArgumentMismatch'
    NOT_BISIMILAR = 'NotBisimilar'
    DANGLING_EDGE = 'DanglingEdge'
    MARKED_LIFT_OUTSIDE_IRED = 'MarkedLiftOutsideIred'
    UNMARKED_INNER_LIFT = 'UnmarkedInnerLift'
    MARKED_FINAL_LIFT = 'MarkedFinalLift'
    MARKED_LIFT_ON_CYCLE = 'MarkedLiftOnCycle'
    BAD_STEP = 'BadStep'
    TRUNCATION_MISMATCH = 'TruncationMismatch'


@dataclass(frozen=True)
class Violation:
    node: int
    code: ViolationCode
    message: str

    def __str__(self) -> str:
        return f"node {self.node}: {self.code.value}: {self.message}"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> Set[ViolationCode]:
        return {v.code for v in self.violations}

    def add(self, node: int, code: ViolationCode, message: str) -> None:
        self.violations.append(Violation(node, code, message))

    def extend(self, other: 'ValidationReport') -> None:
        self.violations.extend(other.violations)


def _nontrivial_components(g: nx.DiGraph) -> List[Set[int]]:
    return [
        c for c in nx.strongly_connected_components(g)
        if len(c) > 1 or any(g.has_edge(n, n) for n in c)
    ]


class _Checker:
    def __init__(self, p: ProofGraph, trs: Trs):
        self.p = p
        self.trs = trs
        self.report = ValidationReport()

    def in_range(self, index: int) -> bool:
        return 0 <= index < len(self.p.nodes)

    def run(self) -> ValidationReport:
        if not self.in_range(self.p.root):
            self.report.add(self.p.root, ViolationCode.DANGLING_EDGE, "root is not a node of the certificate")
            return self.report
        for index, node in enumerate(self.p.nodes):
            if node.judgment is Judgment.DOWN_FIN and self.p.kind is not RelationKind.IRED:
                self.report.add(index, ViolationCode.MARKED_LIFT_OUTSIDE_IRED,
                                f"marked lift in a {self.p.kind.value} certificate")
            if isinstance(node.rule, Split):
                self.split(index, node)
            elif isinstance(node.rule, Lift):
                self.lift(index, node)
            elif isinstance(node.rule, Identity):
                self.identity(index, node)
            else:
                self.report.add(index, ViolationCode.WRONG_RULE, f"unknown rule {node.rule!r}")
        if self.p.kind is RelationKind.IRED:
            self.marked_cycles()
        return self.report

    def split(self, index, node) -> None:
        if node.judgment is not Judgment.REL:
            self.report.add(index, ViolationCode.WRONG_RULE, f"split cannot justify {node.judgment.value}")
        source, target = node.goal
        current = source
        items = node.rule.items
        for position, item in enumerate(items):
            final = position == len(items) - 1
            if isinstance(item, RootStepItem):
                current = self.step_item(index, current, item)
            elif isinstance(item, LiftItem):
                current = self.lift_item(index, current, item, final)
            else:
                self.report.add(index, ViolationCode.WRONG_RULE, f"unknown premise item {item!r}")
                return
            if current is None:
                return
        if not bisimilar(current, target):
            self.report.add(index, ViolationCode.BROKEN_CHAIN, f"premise ends in {current}, goal needs {target}")

    def step_item(self, index, current, item: RootStepItem):
        if not bisimilar(item.source, current):
            self.report.add(index, ViolationCode.BROKEN_CHAIN, f"root step starts at {item.source}, chain is at {current}")
        if item.direction is Direction.BWD and self.p.kind is not RelationKind.IEQ:
            self.report.add(index, ViolationCode.BAD_DIRECTION, "backward root step outside equational reasoning")
        if not 0 <= item.rule_index < len(self.trs.rules):
            self.report.add(index, ViolationCode.UNKNOWN_RULE, f"rule index {item.rule_index} out of range")
            return item.target
        reason = check_root_step(item.as_root_step(), self.trs)
        if reason is not None:
            self.report.add(index, ViolationCode.BAD_ROOT_STEP, reason)
        return item.target

    def lift_item(self, index, current, item: LiftItem, final: bool):
        if not self.in_range(item.node):
            self.report.add(index, ViolationCode.DANGLING_EDGE, f"premise points at missing node {item.node}")
            return None
        premise = self.p.nodes[item.node]
        if not premise.judgment.is_lift:
            self.report.add(index, ViolationCode.WRONG_JUDGMENT, f"premise {item.node} is not a lift")
        elif self.p.kind is RelationKind.IRED:
            if final and premise.judgment is Judgment.DOWN_FIN:
                self.report.add(index, ViolationCode.MARKED_FINAL_LIFT, f"last premise {item.node} is a marked lift")
            if not final and premise.judgment is Judgment.DOWN:
                self.report.add(index, ViolationCode.UNMARKED_INNER_LIFT,
                                f"premise {item.node} before the last item is not marked")
        start, end = premise.goal
        if not bisimilar(start, current):
            self.report.add(index, ViolationCode.BROKEN_CHAIN, f"lift starts at {start}, chain is at {current}")
        return end

    def lift(self, index, node) -> None:
        if not node.judgment.is_lift:
            self.report.add(index, ViolationCode.WRONG_RULE, "lift cannot justify rel")
        s, t = node.goal
        if (s.label, s.is_variable) != (t.label, t.is_variable) or s.arity != t.arity:
            self.report.add(index, ViolationCode.ROOT_SYMBOL_MISMATCH, f"{s} and {t} have different root symbols")
            return
        premises = node.rule.premises
        if len(premises) != s.arity:
            self.report.add(index, ViolationCode.ARITY_MISMATCH,
                            f"{len(premises)} premises for a symbol of arity {s.arity}")
            return
        for i, premise_index in enumerate(premises):
            if not self.in_range(premise_index):
                self.report.add(index, ViolationCode.DANGLING_EDGE, f"premise points at missing node {premise_index}")
                continue
            premise = self.p.nodes[premise_index]
            if premise.judgment is not Judgment.REL:
                self.report.add(index, ViolationCode.WRONG_JUDGMENT, f"premise {premise_index} is not a rel judgment")
            a, b = premise.goal
            if not (bisimilar(a, s.child(i + 1)) and bisimilar(b, t.child(i + 1))):
                self.report.add(index, ViolationCode.ARGUMENT_MISMATCH,
                                f"premise {premise_index} relates {a} and {b}, not argument {i + 1}")

    def identity(self, index, node) -> None:
        if not node.judgment.is_lift:
            self.report.add(index, ViolationCode.WRONG_RULE, "id cannot justify rel")
        s, t = node.goal
        if not bisimilar(s, t):
            self.report.add(index, ViolationCode.NOT_BISIMILAR, f"{s} and {t} are not bisimilar")

    def marked_cycles(self) -> None:
        for component in _nontrivial_components(self.p.graph()):
            for index in sorted(component):
                if self.p.nodes[index].judgment is Judgment.DOWN_FIN:
                    self.report.add(index, ViolationCode.MARKED_LIFT_ON_CYCLE, "marked lift lies on a cycle")


def validate(p: ProofGraph, trs: Trs) -> ValidationReport:
    report = _Checker(p, trs).run()
    for violation in report.violations:
        logger.warning("Certificate violation: %s", violation)
    return report


def is_guarded(p: ProofGraph) -> bool:
    """Every cycle passes through a node justified by Lift."""
    return all(
        any(isinstance(p.nodes[i].rule, Lift) for i in component)
        for component in _nontrivial_components(p.graph())
    )


def nesting_depth(p: ProofGraph) -> Optional[int]:
    """
    Largest number of marked lifts on a path from the root, or None when a
    marked lift lies on a cycle (the unfolding nests them without bound).
    """
    g = p.graph()
    for component in _nontrivial_components(g):
        if any(p.nodes[i].judgment is Judgment.DOWN_FIN for i in component):
            return None
    dag = nx.condensation(g)
    weight = {
        c: sum(1 for i in dag.nodes[c]['members'] if p.nodes[i].judgment is Judgment.DOWN_FIN)
        for c in dag.nodes
    }
    best = {}
    for c in reversed(list(nx.topological_sort(dag))):
        best[c] = weight[c] + max((best[d] for d in dag.successors(c)), default=0)
    return best[dag.graph['mapping'][p.root]]

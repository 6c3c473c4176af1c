"""Finite prefixes of the reductions denoted by infinitary rewriting certificates."""

from __future__ import annotations

import logging
from typing import List

from django.conf import settings

from common.exceptions import InfinirError, InvalidBudget, InvalidCertificate, PrefixUnavailable
from proofs.certificates import Identity, Judgment, LiftItem, ProofGraph, RootStepItem
from proofs.validation import validate
from relations.universe import RelationKind
from rewriting.reductions import FiniteReduction, ReductionStep
from rewriting.rules import Trs, contract, freeze
from terms.graph import Position, subterm_at, truncate

logger = logging.getLogger('proofs')


class _Stuck(Exception):
    pass


class _Unfolding:
    """
    Replays the certificate on the actual term. ``depth`` is how far below
    the current position the result must agree with the goal's target;
    marked lifts are approximated ``slack`` levels deeper so that the next
    root step finds its redex.
    """

    def __init__(self, p: ProofGraph, trs: Trs, slack: int):
        self.p = p
        self.trs = trs
        self.slack = slack
        self.current = p.goal[0]
        self.steps: List[ReductionStep] = []

    def rel(self, index: int, position: Position, depth: int) -> None:
        if depth <= 0:
            return
        items = self.p.nodes[index].rule.items
        for n, item in enumerate(items):
            if isinstance(item, RootStepItem):
                try:
                    self.current, sigma = contract(self.current, position, item.rule_index, self.trs)
                except InfinirError:
                    raise _Stuck from None
                self.steps.append(ReductionStep(position, item.rule_index, freeze(sigma)))
            elif n == len(items) - 1 and self.p.nodes[item.node].judgment is Judgment.DOWN:
                self.down(item.node, position, depth - 1)
            else:
                self.down(item.node, position, depth + self.slack - 1)

    def down(self, index: int, position: Position, depth: int) -> None:
        node = self.p.nodes[index]
        if isinstance(node.rule, Identity) or depth <= 0:
            return
        here = subterm_at(self.current, position)
        source = node.goal[0]
        if (here.label, here.arity, here.is_variable) != (source.label, source.arity, source.is_variable):
            raise _Stuck
        for i, premise in enumerate(node.rule.premises):
            self.rel(premise, tuple(position) + (i + 1,), depth)


def extract_prefix(p: ProofGraph, trs: Trs, n: int) -> FiniteReduction:
    """
    A finite reduction from the certificate's source whose end agrees with
    its target up to depth ``n``. Argument reductions run leftmost first.
    """
    if p.kind is not RelationKind.IRED:
        raise InvalidCertificate(f"prefixes exist only for {RelationKind.IRED.value} certificates", kind=p.kind.value)
    if n < 0:
        raise InvalidBudget(f"prefix depth must be non-negative, got {n}", depth=n)
    report = validate(p, trs)
    if not report.ok:
        raise InvalidCertificate(f"certificate has {len(report.violations)} violations: {report.violations[0]}")
    source, target = p.goal
    if n == 0:
        return FiniteReduction(source)

    wanted = truncate(target, n)
    for slack in range(getattr(settings, 'PREFIX_MAX_SLACK', 16) + 1):
        unfolding = _Unfolding(p, trs, slack)
        try:
            unfolding.rel(p.root, (), n)
        except _Stuck:
            continue
        if truncate(unfolding.current, n) == wanted:
            logger.debug("Prefix of depth %d found with slack %d (%d steps)", n, slack, len(unfolding.steps))
            return FiniteReduction(source, tuple(unfolding.steps), unfolding.current)
    raise PrefixUnavailable(f"no finite reduction from {source} reaches {target} up to depth {n}", depth=n)

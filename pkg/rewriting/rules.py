"""
Rewrite rules over rational terms.

Parameters shared by the step functions:
    t: the term being rewritten (canonical RationalTerm)
    trs: the rule set; rules are addressed by their index in ``trs.rules``
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple, Union

from common.exceptions import FreeVariableInRhs, LhsIsVariable, NoMatch, ReservedSymbol
from terms.graph import (
    CUT, FiniteTerm, Position, RationalTerm, Signature, canonical, format_position, from_finite,
    node_at, positions, replace_at, substitute, variables_of,
)

logger = logging.getLogger('rewriting')

Substitution = Dict[str, RationalTerm]
FrozenSubstitution = Tuple[Tuple[str, RationalTerm], ...]


def freeze(sigma: Mapping[str, RationalTerm]) -> FrozenSubstitution:
    return tuple(sorted(sigma.items()))


class Direction(str, Enum):
    FWD = 'fwd'
    BWD = 'bwd'


@dataclass(frozen=True)
class Rule:
    lhs: FiniteTerm
    rhs: RationalTerm

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs}"

    @cached_property
    def pattern(self) -> RationalTerm:
        return from_finite(self.lhs)

    @cached_property
    def is_left_linear(self) -> bool:
        names = [name for name, _ in self.lhs.variable_occurrences()]
        return len(names) == len(set(names))

    @cached_property
    def is_reversible(self) -> bool:
        """Both orientations are rules: the rhs binds every lhs variable."""
        return not self.rhs.is_variable and self.lhs.variables() <= variables_of(self.rhs)

    @property
    def lhs_depth(self) -> int:
        return self.lhs.depth()


@dataclass(frozen=True)
class Trs:
    signature: Signature
    rules: Tuple[Rule, ...] = ()

    def __str__(self) -> str:
        return '\n'.join(str(r) for r in self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    @classmethod
    def from_rules(cls, rules: Sequence[Rule], signature: Optional[Signature] = None) -> 'Trs':
        inferred = Signature.of(*[t for r in rules for t in (r.pattern, r.rhs)])
        signature = inferred if signature is None else signature.merge(inferred)
        return cls(signature, tuple(check_rule(r.lhs, r.rhs, signature) for r in rules))

    def rule(self, index: int) -> Rule:
        if not 0 <= index < len(self.rules):
            raise NoMatch(f"rule index {index} out of range", rule_index=index)
        return self.rules[index]

    @property
    def max_lhs_depth(self) -> int:
        return max((r.lhs_depth for r in self.rules), default=0)


@dataclass(frozen=True)
class RootStep:
    """``source ->eps target`` (fwd), or ``source <-eps target`` (bwd) for equational reasoning."""

    rule_index: int
    sigma: FrozenSubstitution
    source: RationalTerm
    target: RationalTerm
    direction: Direction = Direction.FWD

    @property
    def substitution(self) -> Substitution:
        return dict(self.sigma)


# ---------- rules ----------

def check_rule(lhs: FiniteTerm, rhs: RationalTerm, sig: Optional[Signature] = None) -> Rule:
    if lhs.is_variable:
        raise LhsIsVariable(f"left-hand side '{lhs}' is a variable")
    if CUT in set(lhs.labels()) or any(n.label == CUT for n in rhs.nodes):
        raise ReservedSymbol(f"'{CUT}' may not occur in rules", symbol=CUT)
    free = variables_of(rhs) - lhs.variables()
    if free:
        raise FreeVariableInRhs(
            f"right-hand side of '{lhs}' uses unbound variables {', '.join(sorted(free))}",
            variables=sorted(free),
        )
    rule = Rule(lhs, rhs)
    # inconsistent arities between the two sides raise here
    Signature.of(rule.pattern, rhs)
    if sig is not None:
        sig.check(rule.pattern)
        sig.check(rhs)
    return rule


def is_left_linear(trs: Trs) -> bool:
    return all(r.is_left_linear for r in trs.rules)


# ---------- matching ----------

def match_pattern(pattern: RationalTerm, t: RationalTerm, at: Optional[int] = None) -> Optional[Substitution]:
    """
    Match ``pattern`` against the subterm of ``t`` rooted at node ``at``.

    Pairs of (pattern node, term node) already under examination are assumed
    to match, so cyclic patterns are handled coinductively. Repeated
    variables must be bound to bisimilar subterms.
    """
    start = (pattern.root, t.root if at is None else at)
    seen = {start}
    queue = deque([start])
    sigma: Substitution = {}
    while queue:
        p, i = queue.popleft()
        pnode = pattern.nodes[p]
        if pnode.is_variable:
            bound = canonical(t.nodes, i)
            if sigma.setdefault(pnode.label, bound) != bound:
                return None
            continue
        tnode = t.nodes[i]
        if tnode.head != pnode.head:
            return None
        for pair in zip(pnode.children, tnode.children):
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return sigma


def match_root(lhs: Union[FiniteTerm, RationalTerm], t: RationalTerm) -> Optional[Substitution]:
    pattern = from_finite(lhs) if isinstance(lhs, FiniteTerm) else lhs
    return match_pattern(pattern, t)


# ---------- steps ----------

def root_steps(t: RationalTerm, trs: Trs) -> List[RootStep]:
    steps = []
    for index, rule in enumerate(trs.rules):
        sigma = match_pattern(rule.pattern, t)
        if sigma is not None:
            steps.append(RootStep(index, freeze(sigma), t, substitute(rule.rhs, sigma)))
    return steps


def inverse_root_steps(t: RationalTerm, trs: Trs) -> List[RootStep]:
    """Steps ``t <-eps u``: reversible rules whose rhs matches ``t``."""
    steps = []
    for index, rule in enumerate(trs.rules):
        if not rule.is_reversible:
            continue
        sigma = match_pattern(rule.rhs, t)
        if sigma is not None:
            steps.append(RootStep(index, freeze(sigma), t, substitute(rule.pattern, sigma), Direction.BWD))
    return steps


def check_root_step(step: RootStep, trs: Trs) -> Optional[str]:
    """None when ``step`` is a root step of ``trs``, else the reason it is not."""
    if not 0 <= step.rule_index < len(trs.rules):
        return f"rule index {step.rule_index} out of range"
    rule = trs.rules[step.rule_index]
    redex, contractum = (step.source, step.target) if step.direction == Direction.FWD else (step.target, step.source)
    sigma = match_pattern(rule.pattern, redex)
    if sigma is None:
        return f"'{rule.lhs}' does not match {redex}"
    stated = step.substitution
    if any(stated.get(name, bound) != bound for name, bound in sigma.items()):
        return f"substitution does not match '{rule.lhs}' against {redex}"
    if substitute(rule.rhs, sigma) != contractum:
        return f"rule {step.rule_index} rewrites {redex} to {substitute(rule.rhs, sigma)}, not {contractum}"
    return None


def contract(t: RationalTerm, position: Position, rule_index: int, trs: Trs) -> Tuple[RationalTerm, Substitution]:
    """Rewrite the occurrence at ``position``; returns the result and the matching substitution."""
    rule = trs.rule(rule_index)
    index = node_at(t, position)
    sigma = match_pattern(rule.pattern, t, at=index)
    if sigma is None:
        raise NoMatch(
            f"rule {rule_index} ({rule.lhs}) does not match at {format_position(position)}",
            position=tuple(position), rule_index=rule_index,
        )
    return replace_at(t, position, substitute(rule.rhs, sigma)), sigma


def step_at(t: RationalTerm, p: Position, rule: int, trs: Trs) -> RationalTerm:
    return contract(t, p, rule, trs)[0]


def redex_nodes(t: RationalTerm, trs: Trs) -> Set[int]:
    return {
        i for i in range(len(t.nodes))
        if any(match_pattern(r.pattern, t, at=i) is not None for r in trs.rules)
    }


def is_normal_form(t: RationalTerm, trs: Trs) -> bool:
    return not redex_nodes(t, trs)


def redex_positions(t: RationalTerm, trs: Trs, max_depth: int) -> List[Tuple[Position, int, Substitution]]:
    """(position, rule index, sigma) for every redex at depth <= max_depth, positions lexicographic."""
    found = []
    for position, index in positions(t, max_depth):
        for k, rule in enumerate(trs.rules):
            sigma = match_pattern(rule.pattern, t, at=index)
            if sigma is not None:
                found.append((position, k, sigma))
    return found


def rule_variables(trs: Trs) -> FrozenSet[str]:
    names: Set[str] = set()
    for rule in trs.rules:
        names |= rule.lhs.variables()
    return frozenset(names)

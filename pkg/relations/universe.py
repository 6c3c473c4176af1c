"""
Finite carriers for exact fixed-point solving.

A ``Universe`` is an ordered set of canonical terms together with the root
steps between its members. ``close_universe`` saturates a seed set under
root steps and root-argument descent and reports whether saturation
finished inside the budget.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from common.exceptions import InvalidBudget
from rewriting.rules import Direction, FrozenSubstitution, RootStep, Trs, inverse_root_steps, root_steps
from terms.graph import RationalTerm, canonical, inner_positions, minimize, pump, substitute, variables_of

logger = logging.getLogger('relations')


class RelationKind(str, Enum):
    IEQ = 'ieq'
    BI = 'bi'
    IRED = 'ired'

    @property
    def symmetric_generator(self) -> bool:
        return self is RelationKind.IEQ

    @property
    def label(self) -> str:
        return {RelationKind.IEQ: 'infinitary equality', RelationKind.BI: 'bi-infinite rewriting',
                RelationKind.IRED: 'infinitary rewriting'}[self]


@dataclass(frozen=True)
class GeneratorStep:
    source: int
    target: int
    rule_index: int
    direction: Direction
    sigma: FrozenSubstitution

    @classmethod
    def of(cls, source: int, target: int, step: RootStep) -> 'GeneratorStep':
        return cls(source, target, step.rule_index, step.direction, step.sigma)

    def inverted(self) -> 'GeneratorStep':
        flipped = Direction.BWD if self.direction is Direction.FWD else Direction.FWD
        return GeneratorStep(self.target, self.source, self.rule_index, flipped, self.sigma)


@dataclass(frozen=True)
class Universe:
    kind: RelationKind
    terms: Tuple[RationalTerm, ...]
    closed: bool
    trs: Trs = field(compare=False, repr=False, default=None)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, t: RationalTerm) -> bool:
        return t in self.index

    def __iter__(self):
        return iter(self.terms)

    @cached_property
    def index(self) -> Dict[RationalTerm, int]:
        return {t: i for i, t in enumerate(self.terms)}

    def index_of(self, t: RationalTerm) -> Optional[int]:
        return self.index.get(t)

    @cached_property
    def children(self) -> Tuple[Optional[Tuple[int, ...]], ...]:
        """Member indices of each term's arguments, or None when an argument is not a member."""
        result = []
        for t in self.terms:
            args = [self.index.get(a) for a in t.arguments()]
            result.append(None if None in args else tuple(args))
        return tuple(result)

    @cached_property
    def steps(self) -> Tuple[GeneratorStep, ...]:
        return self.steps_for(self.trs)

    def steps_for(self, trs: Trs) -> Tuple[GeneratorStep, ...]:
        """
        Root steps between members and their inverses, ordered by source
        member, forward before backward, then rule order.
        """
        found = []
        for i, t in enumerate(self.terms):
            for step in root_steps(t, trs):
                j = self.index.get(step.target)
                if j is not None:
                    found.append(GeneratorStep.of(i, j, step))
        found += [g.inverted() for g in found]
        found.sort(key=lambda g: (g.source, g.direction is Direction.BWD))
        return tuple(found)

    def closed_for(self, kind: RelationKind) -> bool:
        return self.closed and (kind is not RelationKind.IEQ or self.kind is RelationKind.IEQ)

    @classmethod
    def from_terms(cls, terms: Iterable[RationalTerm], trs: Trs, kind: RelationKind) -> 'Universe':
        """A universe over exactly ``terms``; closed when forward steps and arguments stay inside."""
        members: List[RationalTerm] = []
        for t in terms:
            t = minimize(t)
            if t not in members:
                members.append(t)
        member_set = set(members)
        closed = all(
            all(a in member_set for a in t.arguments())
            and all(s.target in member_set for s in root_steps(t, trs))
            for t in members
        )
        return cls(kind, tuple(members), closed, trs)


# ---------- closure ----------

class _Closure:
    def __init__(self, trs: Trs, kind: RelationKind, budget: int):
        self.trs = trs
        self.kind = kind
        self.budget = budget
        self.members: List[RationalTerm] = []
        self.member_set: Set[RationalTerm] = set()
        self.overflow = False
        self.incomplete = False
        self.heads: Set[Tuple[str, int]] = set()
        self.active: List[RationalTerm] = []
        self.sources: List[RationalTerm] = []
        self.derived: Set[RationalTerm] = set()
        self.patterns = [r.pattern for r in trs.rules]
        if kind.symmetric_generator:
            self.patterns += [r.rhs for r in trs.rules if r.is_reversible]
            self.incomplete = any(not r.is_reversible for r in trs.rules)

    def add(self, t: RationalTerm) -> None:
        if t in self.member_set:
            return
        if len(self.members) >= self.budget:
            self.overflow = True
            return
        self.members.append(t)
        self.member_set.add(t)

    def steps(self, t: RationalTerm) -> List[RootStep]:
        steps = root_steps(t, self.trs)
        if self.kind.symmetric_generator:
            steps += inverse_root_steps(t, self.trs)
        return steps

    def limits(self, step: RootStep) -> List[RationalTerm]:
        """Limits of repeating a step whose source reappears strictly inside its target."""
        target = step.target
        found = []
        for index, position in inner_positions(target).items():
            if canonical(target.nodes, index) == step.source:
                limit = pump(target, position)
                if limit not in found:
                    found.append(limit)
        return found

    def instances(self, t: RationalTerm) -> List[RationalTerm]:
        """Rule-side instances over the non-instance members seen so far, ``t`` among them."""
        if t in self.derived:
            return []
        self.sources.append(t)
        fresh = []
        if not t.is_variable and (t.label, t.arity) not in self.heads:
            self.heads.add((t.label, t.arity))
            fresh = [p for p in self.patterns if not p.is_variable and (p.label, p.arity) == (t.label, t.arity)]
        found: List[RationalTerm] = []
        for pattern in self.active:
            found.extend(self._instantiate(pattern, t))
        for pattern in fresh:
            found.extend(self._instantiate(pattern, None))
        self.active.extend(fresh)
        return found

    def _instantiate(self, pattern: RationalTerm, required: Optional[RationalTerm]) -> List[RationalTerm]:
        names = sorted(variables_of(pattern))
        if required is None:
            choices = itertools.product(self.sources, repeat=len(names))
        elif not names:
            return []
        else:
            # each tuple is produced once: slots before the first use of ``required`` avoid it
            earlier = self.sources[:-1]
            choices = (
                head + (required,) + tail
                for i in range(len(names))
                for head in itertools.product(earlier, repeat=i)
                for tail in itertools.product(self.sources, repeat=len(names) - i - 1)
            )
        return [substitute(pattern, dict(zip(names, choice))) for choice in choices]

    def run(self, seeds: Sequence[RationalTerm]) -> None:
        for seed in seeds:
            self.add(minimize(seed))
        k = 0
        while k < len(self.members) and not self.overflow:
            t = self.members[k]
            for step in self.steps(t):
                self.add(step.target)
            for arg in t.arguments():
                self.add(arg)
            for step in self.steps(t):
                for limit in self.limits(step):
                    self.add(limit)
            for instance in self.instances(t):
                if instance not in self.member_set:
                    self.derived.add(instance)
                    self.add(instance)
            k += 1


def close_universe(
    seeds: Sequence[RationalTerm],
    trs: Trs,
    kind: RelationKind,
    node_budget: int,
) -> Universe:
    """
    Saturate ``seeds`` under root steps, arguments, step limits and rule-side instances.

    At most ``node_budget`` terms are admitted; when saturation needs more the
    partial set is returned with ``closed=False``. Equational universes over
    rules that drop variables are never closed (their inverse steps are
    unbounded).
    """
    if node_budget <= 0:
        raise InvalidBudget(f"universe budget must be positive, got {node_budget}", budget=node_budget)
    closure = _Closure(trs, kind, node_budget)
    closure.run(seeds)
    closed = not closure.overflow and not closure.incomplete
    universe = Universe(kind, tuple(closure.members), closed, trs)
    logger.info("Universe for %s: %d terms, closed=%s", kind.value, len(universe), closed)
    return universe

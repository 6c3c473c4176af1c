"""Finite rewrite sequences and their bounded enumeration."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

from common.exceptions import InvalidBudget
from rewriting.rules import FrozenSubstitution, Trs, contract, freeze, redex_positions
from terms.graph import Position, RationalTerm, format_position, replace_at, substitute

logger = logging.getLogger('rewriting')


@dataclass(frozen=True)
class ReductionStep:
    position: Position
    rule_index: int
    sigma: FrozenSubstitution = ()

    def __str__(self) -> str:
        return f"{format_position(self.position)} {self.rule_index}"

    def shifted(self, prefix: Sequence[int]) -> 'ReductionStep':
        return ReductionStep(tuple(prefix) + self.position, self.rule_index, self.sigma)


@dataclass(frozen=True)
class FiniteReduction:
    start: RationalTerm
    steps: Tuple[ReductionStep, ...] = ()
    end: Optional[RationalTerm] = field(default=None, compare=False)

    def __post_init__(self):
        if self.end is None and not self.steps:
            object.__setattr__(self, 'end', self.start)

    def __len__(self) -> int:
        return len(self.steps)

    def terms(self, trs: Trs) -> List[RationalTerm]:
        """Replay every step; raises NoMatch or InvalidPosition when a step does not apply."""
        current = self.start
        sequence = [current]
        for step in self.steps:
            current, _ = contract(current, step.position, step.rule_index, trs)
            sequence.append(current)
        return sequence

    def final(self, trs: Trs) -> RationalTerm:
        if self.end is not None:
            return self.end
        return self.terms(trs)[-1]

    def then(self, other: 'FiniteReduction') -> 'FiniteReduction':
        return FiniteReduction(self.start, self.steps + other.steps, other.end)

    def under(self, prefix: Sequence[int], context: RationalTerm, end: Optional[RationalTerm] = None) -> 'FiniteReduction':
        """The same steps performed inside ``context`` at ``prefix``."""
        return FiniteReduction(context, tuple(s.shifted(prefix) for s in self.steps), end)


def _extend(reduction: FiniteReduction, trs: Trs, max_depth: int) -> Iterator[FiniteReduction]:
    current = reduction.end
    for position, index, sigma in redex_positions(current, trs, max_depth):
        result = replace_at(current, position, substitute(trs.rules[index].rhs, sigma))
        yield FiniteReduction(
            reduction.start, reduction.steps + (ReductionStep(position, index, freeze(sigma)),), result
        )


def finite_reductions(s: RationalTerm, trs: Trs, max_len: int, max_depth: int) -> Iterator[FiniteReduction]:
    """
    Every reduction from ``s`` with at most ``max_len`` steps at positions of
    length at most ``max_depth``, shortest first; within one length, ordered
    by position (lexicographic) and then rule index.
    """
    if max_len < 0 or max_depth < 0:
        raise InvalidBudget("reduction bounds must be non-negative", max_len=max_len, max_depth=max_depth)
    level = [FiniteReduction(s)]
    for length in range(max_len + 1):
        following = []
        for reduction in level:
            yield reduction
            if length < max_len:
                following.extend(_extend(reduction, trs, max_depth))
        if not following:
            return
        level = following
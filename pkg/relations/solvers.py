"""
Exact fixed-point solvers on finite universes.

All relations are sets of index pairs over one ``Universe``. Greatest fixed
points are computed by downward iteration from the full relation; the
least fixed point for infinitary rewriting iterates upward from the empty
relation, solving an inner greatest fixed point at every stage.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import FrozenSet, Iterator, List, Optional, Tuple

import networkx as nx

from common.exceptions import ModeError, UniverseNotClosed
from relations.universe import RelationKind, Universe
from rewriting.rules import Direction, Trs

logger = logging.getLogger('relations')

Pair = Tuple[int, int]


@dataclass(frozen=True)
class PairRelation:
    size: int
    pairs: FrozenSet[Pair] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'pairs', frozenset(self.pairs))
        for i, j in self.pairs:
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise ValueError(f"pair ({i}, {j}) outside a universe of {self.size} terms")

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.pairs

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __le__(self, other: 'PairRelation') -> bool:
        return self.pairs <= other.pairs

    def __or__(self, other: 'PairRelation') -> 'PairRelation':
        return self.union(other)

    @classmethod
    def identity(cls, size: int) -> 'PairRelation':
        return cls(size, frozenset((i, i) for i in range(size)))

    @classmethod
    def full(cls, size: int) -> 'PairRelation':
        return cls(size, frozenset((i, j) for i in range(size) for j in range(size)))

    @classmethod
    def empty(cls, size: int) -> 'PairRelation':
        return cls(size)

    def union(self, other: 'PairRelation') -> 'PairRelation':
        return PairRelation(self.size, self.pairs | other.pairs)

    def inverse(self) -> 'PairRelation':
        return PairRelation(self.size, frozenset((j, i) for i, j in self.pairs))

    def compose(self, other: 'PairRelation') -> 'PairRelation':
        """``self`` followed by ``other``."""
        after = defaultdict(list)
        for j, k in other.pairs:
            after[j].append(k)
        return PairRelation(self.size, frozenset((i, k) for i, j in self.pairs for k in after[j]))

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.size))
        g.add_edges_from(sorted(self.pairs))
        return g

    def star(self, limit: Optional[int] = None) -> 'PairRelation':
        """Reflexive-transitive closure; with ``limit``, only paths of at most that many edges."""
        g = self.graph()
        if limit is None:
            return PairRelation(self.size, frozenset(nx.transitive_closure(g, reflexive=True).edges()))
        return PairRelation(self.size, frozenset(
            (i, j) for i in range(self.size)
            for j in nx.single_source_shortest_path_length(g, i, cutoff=limit)
        ))

    def is_reflexive(self) -> bool:
        return all((i, i) in self.pairs for i in range(self.size))

    def is_symmetric(self) -> bool:
        return all((j, i) in self.pairs for i, j in self.pairs)

    def is_transitive(self) -> bool:
        return self.compose(self) <= self

    def terms(self, u: Universe) -> List[Tuple[str, str]]:
        return [(str(u.terms[i]), str(u.terms[j])) for i, j in self]


def lift(R: PairRelation, u: Universe) -> PairRelation:
    """Pairs ``f(s1..sn), f(t1..tn)`` of members with every ``(si, ti)`` in R, plus the identity."""
    buckets = defaultdict(list)
    for i, t in enumerate(u.terms):
        if u.children[i] is not None and t.arity and not t.is_variable:
            buckets[(t.label, t.arity)].append(i)
    pairs = {(i, i) for i in range(len(u))}
    for members in buckets.values():
        for i in members:
            for j in members:
                if i != j and all((a, b) in R.pairs for a, b in zip(u.children[i], u.children[j])):
                    pairs.add((i, j))
    return PairRelation(len(u), frozenset(pairs))


def conversion(R: PairRelation) -> PairRelation:
    """Equivalence closure ``(R^-1 | R)*``."""
    return (R | R.inverse()).star()


def generator(u: Universe, kind: RelationKind, trs: Optional[Trs] = None) -> PairRelation:
    steps = u.steps if trs is None else u.steps_for(trs)
    allowed = {Direction.FWD, Direction.BWD} if kind.symmetric_generator else {Direction.FWD}
    return PairRelation(len(u), frozenset((s.source, s.target) for s in steps if s.direction in allowed))


def gfp_closure(u: Universe, G: PairRelation, limit: Optional[int] = None) -> PairRelation:
    """Greatest R with ``R = (G | lift(R))*`` on ``u``; ``limit`` bounds the chain length."""
    R = PairRelation.full(len(u))
    rounds = 0
    while True:
        rounds += 1
        following = (G | lift(R, u)).star(limit)
        if following == R:
            break
        R = following
    logger.debug("gfp on %d terms stable after %d rounds (%d pairs)", len(u), rounds, len(R))
    return R


def _require_closed(u: Universe, kind: RelationKind) -> None:
    if not u.closed_for(kind):
        raise UniverseNotClosed(
            f"universe of {len(u)} terms is not closed for {kind.value}", size=len(u), kind=kind.value
        )


def decide_nu(u: Universe, kind: RelationKind, trs: Optional[Trs] = None) -> PairRelation:
    if kind is RelationKind.IRED:
        raise ModeError("infinitary rewriting is decided by decide_ired", kind=kind.value)
    _require_closed(u, kind)
    return gfp_closure(u, generator(u, kind, trs))


def t_infinity(u: Universe, S: PairRelation) -> PairRelation:
    """Greatest R with ``R = (S^-1 | S | lift(R))*``: equational closure below the root."""
    return gfp_closure(u, S | S.inverse())


def inner_nu(u: Universe, steps: PairRelation, R: PairRelation, limit: Optional[int] = None) -> PairRelation:
    """Greatest S with ``S = (steps | lift(R))* ; lift(S)``."""
    prefix = (steps | lift(R, u)).star(limit)
    S = PairRelation.full(len(u))
    while True:
        following = prefix.compose(lift(S, u))
        if following == S:
            return S
        S = following


def ired_stages(u: Universe, trs: Optional[Trs] = None, limit: Optional[int] = None) -> List[PairRelation]:
    """``R_0 = {}`` and ``R_k+1 = inner_nu(R_k)`` until stable; the last stage is the fixed point."""
    steps = generator(u, RelationKind.IRED, trs)
    stages = [PairRelation.empty(len(u))]
    while True:
        following = inner_nu(u, steps, stages[-1], limit)
        if following == stages[-1]:
            break
        stages.append(following)
    logger.debug("ired on %d terms stable after %d stages", len(u), len(stages) - 1)
    return stages


def decide_ired(u: Universe, trs: Optional[Trs] = None) -> PairRelation:
    _require_closed(u, RelationKind.IRED)
    return ired_stages(u, trs)[-1]


def decide(u: Universe, kind: RelationKind, trs: Optional[Trs] = None) -> PairRelation:
    if kind is RelationKind.IRED:
        return decide_ired(u, trs)
    return decide_nu(u, kind, trs)


def stage_of(stages: List[PairRelation], pair: Pair) -> Optional[int]:
    """First stage containing ``pair``."""
    for k, stage in enumerate(stages):
        if pair in stage:
            return k
    return None


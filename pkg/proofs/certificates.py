"""
Cyclic proof certificates.

A ``ProofGraph`` is a finite graph of judgments; its unfolding from the
root is the (possibly infinite) derivation. Judgments:

    REL       s ~ t    justified by a Split over root steps and lifts
    DOWN      s ~> t   justified by Lift (argument-wise REL) or Identity
    DOWN_FIN  marked lift, only in infinitary rewriting certificates
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Tuple, Union

import networkx as nx

from relations.universe import RelationKind
from rewriting.rules import Direction, FrozenSubstitution, RootStep
from terms.graph import RationalTerm


class Judgment(str, Enum):
    REL = 'rel'
    DOWN = 'down'
    DOWN_FIN = 'down_fin'

    @property
    def is_lift(self) -> bool:
        return self is not Judgment.REL

    @property
    def symbol(self) -> str:
        return {Judgment.REL: '~', Judgment.DOWN: '~>', Judgment.DOWN_FIN: '~>.'}[self]


@dataclass(frozen=True)
class RootStepItem:
    rule_index: int
    direction: Direction
    sigma: FrozenSubstitution
    source: RationalTerm
    target: RationalTerm

    @classmethod
    def of(cls, step: RootStep) -> 'RootStepItem':
        return cls(step.rule_index, step.direction, step.sigma, step.source, step.target)

    def as_root_step(self) -> RootStep:
        return RootStep(self.rule_index, self.sigma, self.source, self.target, self.direction)


@dataclass(frozen=True)
class LiftItem:
    node: int


Item = Union[RootStepItem, LiftItem]


@dataclass(frozen=True)
class Split:
    items: Tuple[Item, ...]

    name = 'split'


@dataclass(frozen=True)
class Lift:
    premises: Tuple[int, ...]

    name = 'lift'


@dataclass(frozen=True)
class Identity:
    name = 'id'


Rule = Union[Split, Lift, Identity]


@dataclass(frozen=True)
class ProofNode:
    judgment: Judgment
    goal: Tuple[RationalTerm, RationalTerm]
    rule: Rule

    def successors(self) -> List[int]:
        if isinstance(self.rule, Split):
            return [item.node for item in self.rule.items if isinstance(item, LiftItem)]
        if isinstance(self.rule, Lift):
            return list(self.rule.premises)
        return []

    def __str__(self) -> str:
        s, t = self.goal
        return f"{s} {self.judgment.symbol} {t}"


@dataclass(frozen=True)
class ProofGraph:
    kind: RelationKind
    nodes: Tuple[ProofNode, ...]
    root: int = 0

    @property
    def goal(self) -> Tuple[RationalTerm, RationalTerm]:
        return self.nodes[self.root].goal

    def edges(self) -> Iterator[Tuple[int, int]]:
        for i, node in enumerate(self.nodes):
            for j in node.successors():
                yield i, j

    def graph(self) -> nx.DiGraph:
        """Node graph; edges pointing outside the certificate are dropped."""
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        g.add_edges_from((i, j) for i, j in self.edges() if 0 <= j < len(self.nodes))
        return g

    def count(self, judgment: Optional[Judgment] = None, rule: Optional[type] = None) -> int:
        return sum(
            1 for n in self.nodes
            if (judgment is None or n.judgment is judgment) and (rule is None or isinstance(n.rule, rule))
        )

    def back_edges(self) -> List[Tuple[int, int]]:
        """Edges closing a cycle in a depth-first walk from the root."""
        found = []
        open_nodes = set()
        for u, v, kind in nx.dfs_labeled_edges(self.graph(), source=self.root):
            if kind == 'forward':
                open_nodes.add(v)
            elif kind == 'reverse':
                open_nodes.discard(v)
            elif kind == 'nontree' and v in open_nodes:
                found.append((u, v))
        return found

    def terms(self) -> List[RationalTerm]:
        """Every term mentioned, in first-appearance order."""
        seen: List[RationalTerm] = []

        def note(t: RationalTerm) -> None:
            if t not in seen:
                seen.append(t)

        for node in self.nodes:
            for t in node.goal:
                note(t)
            if isinstance(node.rule, Split):
                for item in node.rule.items:
                    if isinstance(item, RootStepItem):
                        note(item.source)
                        note(item.target)
                        for _, bound in item.sigma:
                            note(bound)
        return seen


class CertificateBuilder:
    """Allocates node slots first so premises can point back at nodes still being built."""

    def __init__(self, kind: RelationKind):
        self.kind = kind
        self.slots: List[Optional[ProofNode]] = []

    def __len__(self) -> int:
        return len(self.slots)

    def reserve(self) -> int:
        self.slots.append(None)
        return len(self.slots) - 1

    def fill(self, index: int, node: ProofNode) -> int:
        self.slots[index] = node
        return index

    def add(self, node: ProofNode) -> int:
        return self.fill(self.reserve(), node)

    def build(self, root: int = 0) -> ProofGraph:
        missing = [i for i, n in enumerate(self.slots) if n is None]
        if missing:
            raise ValueError(f"certificate nodes {missing} were reserved but never filled")
        return ProofGraph(self.kind, tuple(self.slots), root)

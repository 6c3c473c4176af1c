"""
Bounded proof search.

The search is tabled: it collects a candidate pool of terms with the same
closure as ``close_universe`` (bounded by ``max_new_term_nodes``), solves the
relation on the pool with split sequences bounded by ``max_split``, and then
rebuilds a cyclic certificate goal-first. Goals are shared, so a goal met
again becomes a back-edge. The result is re-checked by the certificate
validator before it is reported.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Sequence, Tuple

import networkx as nx
from django.conf import settings

from common.exceptions import InvalidBudget
from common.verdicts import Verdict
from proofs.certificates import (
    CertificateBuilder, Identity, Judgment, Lift, LiftItem, ProofGraph, ProofNode, RootStepItem, Split,
)
from proofs.validation import validate
from relations.solvers import PairRelation, gfp_closure, generator, ired_stages, lift, stage_of
from relations.universe import GeneratorStep, RelationKind, Universe, close_universe
from rewriting.rules import Direction, Trs
from terms.graph import RationalTerm, minimize

logger = logging.getLogger('relations')

Pair = Tuple[int, int]


@dataclass(frozen=True)
class SearchBudget:
    max_goals: int = 10000
    max_split: int = 8
    max_new_term_nodes: int = 256

    def __post_init__(self):
        for name in ('max_goals', 'max_split', 'max_new_term_nodes'):
            value = getattr(self, name)
            if value <= 0:
                raise InvalidBudget(f"{name} must be positive, got {value}", **{name: value})

    @classmethod
    def from_settings(cls, **overrides) -> 'SearchBudget':
        values = {
            'max_goals': getattr(settings, 'SEARCH_MAX_GOALS', 10000),
            'max_split': getattr(settings, 'SEARCH_MAX_SPLIT', 8),
            'max_new_term_nodes': getattr(settings, 'SEARCH_MAX_NEW_TERM_NODES', 256),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class _Exhausted(Exception):
    pass


class _Reconstruction(ABC):
    """Rebuilds a certificate from a solved relation; nodes are allocated before their premises."""

    def __init__(self, pool: Universe, kind: RelationKind, budget: SearchBudget):
        self.pool = pool
        self.kind = kind
        self.budget = budget
        self.builder = CertificateBuilder(kind)
        self.rel_nodes: Dict[Pair, int] = {}
        self.lift_nodes: Dict[Tuple[Judgment, Pair], int] = {}
        self.pending: Deque[Tuple[str, Pair, int, Judgment]] = deque()

    def goal(self, pair: Pair) -> Tuple[RationalTerm, RationalTerm]:
        return self.pool.terms[pair[0]], self.pool.terms[pair[1]]

    def reserve(self) -> int:
        if len(self.builder) >= self.budget.max_goals:
            raise _Exhausted
        return self.builder.reserve()

    def rel(self, pair: Pair) -> int:
        if pair not in self.rel_nodes:
            self.rel_nodes[pair] = self.reserve()
            self.pending.append(('rel', pair, self.rel_nodes[pair], Judgment.REL))
        return self.rel_nodes[pair]

    def down(self, pair: Pair, judgment: Judgment = Judgment.DOWN) -> int:
        key = (judgment, pair)
        if key not in self.lift_nodes:
            self.lift_nodes[key] = self.reserve()
            self.pending.append(('down', pair, self.lift_nodes[key], judgment))
        return self.lift_nodes[key]

    def step_item(self, step: GeneratorStep) -> RootStepItem:
        return RootStepItem(
            step.rule_index, step.direction, step.sigma, self.pool.terms[step.source], self.pool.terms[step.target]
        )

    def fill_down(self, pair: Pair, index: int, judgment: Judgment) -> None:
        a, b = pair
        if a == b:
            rule = Identity()
        else:
            rule = Lift(tuple(self.rel(c) for c in zip(self.pool.children[a], self.pool.children[b])))
        self.builder.fill(index, ProofNode(judgment, self.goal(pair), rule))

    @abstractmethod
    def split_items(self, pair: Pair) -> List:
        """The split sequence justifying a related pair."""

    def run(self, pair: Pair) -> ProofGraph:
        root = self.rel(pair)
        while self.pending:
            what, current, index, judgment = self.pending.popleft()
            if what == 'rel':
                items = self.split_items(current)
                self.builder.fill(index, ProofNode(Judgment.REL, self.goal(current), Split(tuple(items))))
            else:
                self.fill_down(current, index, judgment)
        return self.builder.build(root)


def _step_edges(pool: Universe, kind: RelationKind) -> Dict[Pair, GeneratorStep]:
    """First generator step per (source, target), in member order then rule order."""
    edges: Dict[Pair, GeneratorStep] = {}
    for step in pool.steps:
        if step.direction is Direction.BWD and not kind.symmetric_generator:
            continue
        if step.source != step.target:
            edges.setdefault((step.source, step.target), step)
    return edges


class _NuReconstruction(_Reconstruction):
    """Splits are shortest paths over step edges and lifts of the fixed point."""

    def __init__(self, pool, kind, budget, relation: PairRelation):
        super().__init__(pool, kind, budget)
        self.steps = _step_edges(pool, kind)
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(range(len(pool)))
        for edge in self.steps:
            self.graph.add_edge(*edge)
        for a, b in lift(relation, pool):
            if a != b and not self.graph.has_edge(a, b):
                self.graph.add_edge(a, b)

    def split_items(self, pair: Pair) -> List:
        i, j = pair
        if i == j:
            return [LiftItem(self.down(pair))]
        path = nx.shortest_path(self.graph, i, j)
        items = []
        for edge in zip(path, path[1:]):
            if edge in self.steps:
                items.append(self.step_item(self.steps[edge]))
            else:
                items.append(LiftItem(self.down(edge)))
        return items


class _IredReconstruction(_Reconstruction):
    """
    A rel goal at stage ``k`` is split as steps and marked lifts of stage
    ``k - 1`` followed by one unmarked lift of stage ``k``. Marked lifts only
    point at earlier stages, so they never lie on a cycle.
    """

    def __init__(self, pool, kind, budget, stages: List[PairRelation]):
        super().__init__(pool, kind, budget)
        self.stages = stages
        self.lifted = [lift(stage, pool) for stage in stages]
        self.steps = _step_edges(pool, kind)
        self.edges: Dict[int, Dict[int, List[int]]] = {}

    def successors(self, k: int) -> Dict[int, List[int]]:
        """Steps, then lifts of stage ``k``, per source term."""
        if k not in self.edges:
            found: Dict[int, List[int]] = {}
            for a, b in sorted(self.steps):
                found.setdefault(a, []).append(b)
            for a, b in self.lifted[k]:
                if a != b and (a, b) not in self.steps:
                    found.setdefault(a, []).append(b)
            self.edges[k] = found
        return self.edges[k]

    def split_items(self, pair: Pair) -> List:
        i, j = pair
        if i == j:
            return [LiftItem(self.down(pair))]
        k = stage_of(self.stages, pair)
        closing = self.lifted[k]
        successors = self.successors(k - 1)

        parent: Dict[int, Optional[int]] = {i: None}
        queue = deque([(i, 0)])
        reached = None
        while queue:
            m, length = queue.popleft()
            if (m, j) in closing:
                reached = m
                break
            if length == self.budget.max_split:
                continue
            for b in successors.get(m, []):
                if b not in parent:
                    parent[b] = m
                    queue.append((b, length + 1))
        if reached is None:
            raise _Exhausted

        path = [reached]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        edges = list(zip(path, path[1:]))
        items = []
        for n, edge in enumerate(edges):
            if edge in self.steps:
                items.append(self.step_item(self.steps[edge]))
            elif reached == j and n == len(edges) - 1:
                items.append(LiftItem(self.down(edge)))
            else:
                items.append(LiftItem(self.down(edge, Judgment.DOWN_FIN)))
        if reached != j:
            items.append(LiftItem(self.down((reached, j))))
        return items


def search_proof(
    s: RationalTerm,
    t: RationalTerm,
    kind: RelationKind,
    trs: Trs,
    budget: Optional[SearchBudget] = None,
    hints: Sequence[RationalTerm] = (),
) -> Verdict:
    """
    Look for a certificate of ``s kind t``. Returns Proved with a validated
    ``ProofGraph`` or Unknown; never Refuted, since the pool is not closed in
    general. ``hints`` are extra seed terms for the pool.
    """
    budget = budget or SearchBudget.from_settings()
    s, t = minimize(s), minimize(t)
    seeds = [s, t, *(minimize(h) for h in hints)]
    pool = close_universe(seeds, trs, kind, len(seeds) + budget.max_new_term_nodes)
    pair = (pool.index_of(s), pool.index_of(t))

    if kind is RelationKind.IRED:
        stages = ired_stages(pool, limit=budget.max_split)
        related = pair in stages[-1]
        reconstruction = _IredReconstruction(pool, kind, budget, stages) if related else None
    else:
        # the final lift of a split is not counted against max_split
        relation = gfp_closure(pool, generator(pool, kind), limit=budget.max_split + 1)
        related = pair in relation
        reconstruction = _NuReconstruction(pool, kind, budget, relation) if related else None

    if not related:
        logger.info("No %s certificate for %s and %s within a pool of %d terms", kind.value, s, t, len(pool))
        return Verdict.unknown(universe=pool)
    try:
        certificate = reconstruction.run(pair)
    except _Exhausted:
        logger.warning("Search for %s %s %s exceeded %d goals", s, kind.value, t, budget.max_goals)
        return Verdict.unknown(universe=pool)

    report = validate(certificate, trs)
    if not report.ok:
        logger.error("Rebuilt certificate for %s %s %s failed validation: %s",
                     s, kind.value, t, '; '.join(str(v) for v in report.violations))
        return Verdict.unknown(universe=pool)
    logger.info("Proved %s %s %s with %d certificate nodes", s, kind.value, t, len(certificate.nodes))
    return Verdict.proved(certificate=certificate, universe=pool)

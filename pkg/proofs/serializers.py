"""
JSON documents for certificates.

::

    {"kind": "ired", "variables": [], "terms": ["a", "rec X0 = C(X0) in X0", "C(a)"],
     "nodes": [{"judgment": "rel", "goal": [0, 1], "rule": "split",
                "premise": [{"step": {"rule_index": 1, "direction": "fwd", "sigma": {},
                                      "source": 0, "target": 2}},
                            {"lift": 1}]},
               {"judgment": "down", "goal": [2, 1], "rule": "lift", "premises": [0]}],
     "root": 0}

Terms are stored once in ``terms`` and referenced by index.
"""

from __future__ import annotations

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from common.exceptions import InfinirError, InvalidCertificate
from proofs.certificates import (
    Identity, Judgment, Lift, LiftItem, ProofGraph, ProofNode, RootStepItem, Split,
)
from relations.universe import RelationKind
from rewriting.rules import Direction
from terms.graph import RationalTerm
from terms.syntax import parse_term, render_term


class StepItemSchema(BaseModel):
    model_config = ConfigDict(extra='forbid')

    rule_index: int
    direction: Direction = Direction.FWD
    sigma: Dict[str, int] = {}
    source: int
    target: int


class PremiseItemSchema(BaseModel):
    model_config = ConfigDict(extra='forbid')

    step: Optional[StepItemSchema] = None
    lift: Optional[int] = None

    @model_validator(mode='after')
    def exactly_one(self) -> 'PremiseItemSchema':
        if (self.step is None) == (self.lift is None):
            raise ValueError("a premise item is either a step or a lift")
        return self


class NodeSchema(BaseModel):
    model_config = ConfigDict(extra='forbid')

    judgment: Judgment
    goal: Tuple[int, int]
    rule: Literal['split', 'lift', 'id']
    premise: List[PremiseItemSchema] = []
    premises: List[int] = []


class CertificateSchema(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: RelationKind
    variables: List[str] = []
    terms: List[str]
    nodes: List[NodeSchema]
    root: int = 0


class _TermTable:
    def __init__(self):
        self.terms: List[RationalTerm] = []
        self.index: Dict[RationalTerm, int] = {}

    def __call__(self, t: RationalTerm) -> int:
        if t not in self.index:
            self.index[t] = len(self.terms)
            self.terms.append(t)
        return self.index[t]


def to_schema(p: ProofGraph) -> CertificateSchema:
    table = _TermTable()
    nodes = []
    for node in p.nodes:
        goal = (table(node.goal[0]), table(node.goal[1]))
        if isinstance(node.rule, Split):
            premise = []
            for item in node.rule.items:
                if isinstance(item, LiftItem):
                    premise.append(PremiseItemSchema(lift=item.node))
                else:
                    premise.append(PremiseItemSchema(step=StepItemSchema(
                        rule_index=item.rule_index,
                        direction=item.direction,
                        sigma={name: table(bound) for name, bound in item.sigma},
                        source=table(item.source),
                        target=table(item.target),
                    )))
            nodes.append(NodeSchema(judgment=node.judgment, goal=goal, rule='split', premise=premise))
        elif isinstance(node.rule, Lift):
            nodes.append(NodeSchema(judgment=node.judgment, goal=goal, rule='lift', premises=list(node.rule.premises)))
        else:
            nodes.append(NodeSchema(judgment=node.judgment, goal=goal, rule='id'))
    variables = sorted({n.label for t in table.terms for n in t.nodes if n.is_variable})
    return CertificateSchema(
        kind=p.kind, variables=variables, terms=[render_term(t) for t in table.terms], nodes=nodes, root=p.root
    )


def dump(p: ProofGraph) -> str:
    return to_schema(p).model_dump_json(indent=2)


def from_schema(doc: CertificateSchema) -> ProofGraph:
    try:
        terms = [parse_term(text, variables=doc.variables) for text in doc.terms]
    except InfinirError as exc:
        raise InvalidCertificate(f"bad term in certificate: {exc.message}") from None

    def term(i: int) -> RationalTerm:
        if not 0 <= i < len(terms):
            raise InvalidCertificate(f"term index {i} out of range", index=i)
        return terms[i]

    nodes = []
    for entry in doc.nodes:
        goal = (term(entry.goal[0]), term(entry.goal[1]))
        if entry.rule == 'split':
            items = []
            for item in entry.premise:
                if item.lift is not None:
                    items.append(LiftItem(item.lift))
                else:
                    step = item.step
                    sigma = tuple(sorted((name, term(i)) for name, i in step.sigma.items()))
                    items.append(RootStepItem(step.rule_index, step.direction, sigma, term(step.source), term(step.target)))
            rule = Split(tuple(items))
        elif entry.rule == 'lift':
            rule = Lift(tuple(entry.premises))
        else:
            rule = Identity()
        nodes.append(ProofNode(entry.judgment, goal, rule))
    return ProofGraph(doc.kind, tuple(nodes), doc.root)


def load(text: str) -> ProofGraph:
    try:
        doc = CertificateSchema.model_validate_json(text)
    except ValidationError as exc:
        raise InvalidCertificate(f"malformed certificate document: {exc.error_count()} errors",
                                 errors=exc.errors(include_url=False)) from None
    return from_schema(doc)

"""JSON documents for compressed reductions; terms are tabled as in certificate documents."""

from __future__ import annotations

from typing import Dict, List, Literal, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from common.exceptions import InfinirError, InvalidCertificate
from compression.ored import STOP, OredCertificate, OredNode
from rewriting.reductions import FiniteReduction, ReductionStep
from terms.graph import RationalTerm
from terms.syntax import parse_term, render_term


class HeadStepSchema(BaseModel):
    model_config = ConfigDict(extra='forbid')

    position: List[int]
    rule_index: int
    sigma: Dict[str, int] = {}


class OredNodeSchema(BaseModel):
    model_config = ConfigDict(extra='forbid')

    start: int
    target: int
    head: List[HeadStepSchema] = []
    children: List[Union[int, Literal['stop']]] = []


class OredSchema(BaseModel):
    model_config = ConfigDict(extra='forbid')

    variables: List[str] = []
    terms: List[str]
    nodes: List[OredNodeSchema]
    root: int = 0


def dump(o: OredCertificate) -> str:
    terms: List[RationalTerm] = []
    index: Dict[RationalTerm, int] = {}

    def table(t: RationalTerm) -> int:
        if t not in index:
            index[t] = len(terms)
            terms.append(t)
        return index[t]

    nodes = [
        OredNodeSchema(
            start=table(node.start),
            target=table(node.target),
            head=[
                HeadStepSchema(
                    position=list(step.position),
                    rule_index=step.rule_index,
                    sigma={name: table(bound) for name, bound in step.sigma},
                )
                for step in node.head.steps
            ],
            children=list(node.children),
        )
        for node in o.nodes
    ]
    variables = sorted({n.label for t in terms for n in t.nodes if n.is_variable})
    doc = OredSchema(variables=variables, terms=[render_term(t) for t in terms], nodes=nodes, root=o.root)
    return doc.model_dump_json(indent=2)


def load(text: str) -> OredCertificate:
    try:
        doc = OredSchema.model_validate_json(text)
    except ValidationError as exc:
        raise InvalidCertificate(f"malformed compressed reduction: {exc.error_count()} errors") from None
    try:
        terms = [parse_term(t, variables=doc.variables) for t in doc.terms]
        nodes = []
        for entry in doc.nodes:
            steps = tuple(
                ReductionStep(tuple(s.position), s.rule_index, tuple(sorted((k, terms[v]) for k, v in s.sigma.items())))
                for s in entry.head
            )
            start = terms[entry.start]
            nodes.append(OredNode(
                start, terms[entry.target], FiniteReduction(start, steps),
                tuple(STOP if c == 'stop' else c for c in entry.children),
            ))
    except IndexError:
        raise InvalidCertificate("term index out of range") from None
    except InfinirError as exc:
        raise InvalidCertificate(f"bad term in compressed reduction: {exc.message}") from None
    return OredCertificate(tuple(nodes), doc.root)

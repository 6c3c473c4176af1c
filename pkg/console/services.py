"""
Service functions behind the ``infinir`` command.

Each function takes a parsed ``Workspace`` and plain values, calls into the
engine apps and returns engine objects; printing and exit codes belong to
the command.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import List, Optional, Tuple

from django.conf import settings

from common.exceptions import InvalidBudget, ModeError
from common.verdicts import Verdict
from compression.ored import OredCertificate, StepStream, compress, emit_steps, validate_ored
from console.workspace import Workspace
from proofs import serializers as certificates
from proofs.certificates import ProofGraph
from proofs.dot import to_dot
from proofs.validation import ValidationReport, validate
from relations.search import SearchBudget, search_proof
from relations.solvers import decide
from relations.universe import RelationKind, close_universe
from rewriting.parser import Mode
from terms.graph import DyadicDistance, FiniteTerm, RationalTerm, distance, format_position, minimize, truncate

logger = logging.getLogger('console')

_MODES = {
    RelationKind.IEQ: Mode.EQUATIONAL,
    RelationKind.BI: Mode.REWRITING,
    RelationKind.IRED: Mode.REWRITING,
}


def require_mode(ws: Workspace, kind: RelationKind) -> None:
    """Equations answer ieq, rules answer bi and ired; a file without declarations answers all."""
    if ws.mode is not None and ws.mode is not _MODES[kind]:
        raise ModeError(
            f"{kind.value} needs a {_MODES[kind].value} file, this one is {ws.mode.value}",
            kind=kind.value, mode=ws.mode.value,
        )


def run_check(
    ws: Workspace,
    kind: RelationKind,
    source: RationalTerm,
    target: RationalTerm,
    budget: Optional[SearchBudget] = None,
    universe_budget: Optional[int] = None,
) -> Verdict:
    """
    Decide ``source kind target`` exactly when the universe of both terms
    closes within ``universe_budget`` members, otherwise fall back to the
    certificate search.

    Args:
        ws: parsed TRS file
        kind: relation to check
        source, target: the two terms
        budget: search limits for the fallback (settings defaults when None)
        universe_budget: member limit for the exact attempt (UNIVERSE_BUDGET when None)
    """
    require_mode(ws, kind)
    budget = budget or SearchBudget.from_settings()
    if universe_budget is None:
        universe_budget = getattr(settings, 'UNIVERSE_BUDGET', 64)
    s, t = minimize(source), minimize(target)

    universe = close_universe([s, t], ws.trs, kind, universe_budget)
    if universe.closed_for(kind):
        relation = decide(universe, kind)
        pair = (universe.index_of(s), universe.index_of(t))
        if pair in relation:
            logger.info("Solver proved %s %s %s on %d terms", s, kind.value, t, len(universe))
            return Verdict.proved(relation=relation, universe=universe, via='solver')
        logger.info("Solver refuted %s %s %s on %d terms", s, kind.value, t, len(universe))
        return Verdict.refuted(relation=relation, universe=universe, via='solver')

    logger.info("Universe did not close within %d terms, searching", universe_budget)
    return search_proof(s, t, kind, ws.trs, budget)


def run_prove(
    ws: Workspace,
    kind: RelationKind,
    source: RationalTerm,
    target: RationalTerm,
    budget: Optional[SearchBudget] = None,
    universe_budget: Optional[int] = None,
) -> Verdict:
    """``run_check``, but a Proved verdict always carries a certificate."""
    budget = budget or SearchBudget.from_settings()
    verdict = run_check(ws, kind, source, target, budget, universe_budget)
    if verdict.is_proved and verdict.certificate is None:
        found = search_proof(source, target, kind, ws.trs, budget, hints=verdict.universe.terms)
        if not found.is_proved:
            logger.warning("Solver proved %s %s %s but no certificate fits the search budget",
                           source, kind.value, target)
            return Verdict.unknown(universe=verdict.universe, relation=verdict.relation, via='solver')
        verdict = dataclasses.replace(verdict, certificate=found.certificate)
    return verdict


def run_verify(ws: Workspace, document: str) -> ValidationReport:
    p = certificates.load(document)
    require_mode(ws, p.kind)
    return validate(p, ws.trs)


def run_compress(ws: Workspace, document: str) -> OredCertificate:
    p = certificates.load(document)
    require_mode(ws, p.kind)
    return compress(p, ws.trs)


def run_emit(ws: Workspace, o: OredCertificate, k: int) -> List[Tuple[str, int, RationalTerm]]:
    """The first ``k`` steps of a compressed reduction as (position, rule, result) rows."""
    stream: StepStream = emit_steps(o, k)
    results = stream.replay(ws.trs)[1:]
    return [(format_position(e.step.position), e.step.rule_index, t) for e, t in zip(stream.steps, results)]


def run_validate_ored(ws: Workspace, o: OredCertificate, depth: Optional[int] = None) -> ValidationReport:
    if depth is None:
        depth = getattr(settings, 'ORED_CHECK_DEPTH', 8)
    return validate_ored(o, ws.trs, depth)


def run_unfold(ws: Workspace, term: RationalTerm, depth: int) -> FiniteTerm:
    if depth < 0:
        raise InvalidBudget(f"unfolding depth must be non-negative, got {depth}", depth=depth)
    return truncate(term, depth)


def run_distance(ws: Workspace, s: RationalTerm, t: RationalTerm) -> DyadicDistance:
    return distance(s, t)


def export_dot(p: ProofGraph) -> str:
    return to_dot(p)

"""A parsed TRS file together with its named terms."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from rewriting.parser import Mode, parse_trs
from rewriting.rules import Trs
from terms.graph import RationalTerm
from terms.syntax import parse_term

logger = logging.getLogger('console')


@dataclass
class Workspace:
    trs: Trs
    terms: Dict[str, RationalTerm] = field(default_factory=dict)
    mode: Optional[Mode] = None
    variables: Optional[Tuple[str, ...]] = None

    def resolve(self, expr: str) -> RationalTerm:
        """
        A named term of the file, or a term expression that may mention
        those names.
        """
        name = expr.strip()
        if name in self.terms:
            return self.terms[name]
        return parse_term(expr, variables=self.variables, named=self.terms, signature=self.trs.signature)


def parse_trs_file(text: str) -> Workspace:
    parsed = parse_trs(text)
    return Workspace(parsed.trs, dict(parsed.terms), parsed.mode, parsed.variables)


def load_workspace(path) -> Workspace:
    logger.debug("Loading workspace from %s", path)
    return parse_trs_file(Path(path).read_text(encoding='utf-8'))

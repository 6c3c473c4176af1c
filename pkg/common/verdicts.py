"""Three-valued answers returned by the solvers, the search and the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional


class Outcome(str, Enum):
    PROVED = 'proved'
    REFUTED = 'refuted'
    UNKNOWN = 'unknown'

    @property
    def exit_code(self) -> int:
        return {Outcome.PROVED: 0, Outcome.REFUTED: 1, Outcome.UNKNOWN: 2}[self]


@dataclass(frozen=True)
class Verdict:
    """
    Outcome plus whatever justifies it.

    ``certificate`` is a ProofGraph for search results, ``relation`` and
    ``universe`` are set when the exact solver answered.
    """

    outcome: Outcome
    certificate: Optional[Any] = None
    relation: Optional[Any] = None
    universe: Optional[Any] = None
    via: str = 'search'

    @classmethod
    def proved(cls, **kwargs) -> 'Verdict':
        return cls(Outcome.PROVED, **kwargs)

    @classmethod
    def refuted(cls, **kwargs) -> 'Verdict':
        return cls(Outcome.REFUTED, **kwargs)

    @classmethod
    def unknown(cls, **kwargs) -> 'Verdict':
        return cls(Outcome.UNKNOWN, **kwargs)

    @property
    def is_proved(self) -> bool:
        return self.outcome is Outcome.PROVED

    @property
    def exit_code(self) -> int:
        return self.outcome.exit_code

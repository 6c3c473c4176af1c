"""
Domain errors shared by every engine app.

Each error is a ``django.core.exceptions.ValidationError`` with a stable
``code`` so callers can branch on ``exc.code`` and the CLI can print a
one-line message.
"""

from __future__ import annotations

from typing import Any

from django.core.exceptions import ValidationError


class InfinirError(ValidationError):
    """Base class for engine errors."""

    default_code = 'infinir_error'

    def __init__(self, message: str, **context: Any):
        super().__init__(message, code=self.default_code)
        self.context = context

    def __str__(self) -> str:
        return self.message


# ---------- terms ----------

class ArityMismatch(InfinirError):
    default_code = 'arity_mismatch'


class UnboundName(InfinirError):
    default_code = 'unbound_name'


class UnguardedBinding(InfinirError):
    default_code = 'unguarded_binding'


class InvalidPosition(InfinirError):
    default_code = 'invalid_position'


class ReservedSymbol(InfinirError):
    default_code = 'reserved_symbol'


# ---------- rewriting ----------

class NoMatch(InfinirError):
    default_code = 'no_match'


class LhsIsVariable(InfinirError):
    default_code = 'lhs_is_variable'


class FreeVariableInRhs(InfinirError):
    default_code = 'free_variable_in_rhs'


class InfiniteLhs(InfinirError):
    default_code = 'infinite_lhs'


# ---------- relations ----------

class UniverseNotClosed(InfinirError):
    default_code = 'universe_not_closed'


class InvalidBudget(InfinirError):
    default_code = 'invalid_budget'


# ---------- proofs / compression ----------

class InvalidCertificate(InfinirError):
    default_code = 'invalid_certificate'


class PrefixUnavailable(InfinirError):
    default_code = 'prefix_unavailable'


class NotLeftLinear(InfinirError):
    default_code = 'not_left_linear'


# ---------- console ----------

class ModeError(InfinirError):
    default_code = 'mode_error'


class TrsSyntaxError(InfinirError):
    """Parse error in a term expression or TRS file, with 1-based line/col."""

    default_code = 'trs_syntax_error'

    def __init__(self, message: str, line: int = 1, col: int = 1, **context: Any):
        super().__init__(f"line {line}, col {col}: {message}", line=line, col=col, **context)
        self.line = line
        self.col = col

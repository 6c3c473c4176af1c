from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from common.exceptions import ArityMismatch, InfinirError, TrsSyntaxError
from common.verdicts import Outcome, Verdict


class VerdictTests(SimpleTestCase):
    def test_exit_codes(self):
        self.assertEqual(Verdict.proved().exit_code, 0)
        self.assertEqual(Verdict.refuted().exit_code, 1)
        self.assertEqual(Verdict.unknown().exit_code, 2)

    def test_defaults(self):
        verdict = Verdict.proved(via='solver')
        self.assertIs(verdict.outcome, Outcome.PROVED)
        self.assertTrue(verdict.is_proved)
        self.assertIsNone(verdict.certificate)
        self.assertFalse(Verdict.unknown().is_proved)


class ErrorTests(SimpleTestCase):
    def test_errors_are_validation_errors(self):
        exc = ArityMismatch("symbol 'f' has arity 2", symbol='f')
        self.assertIsInstance(exc, InfinirError)
        self.assertIsInstance(exc, ValidationError)
        self.assertEqual(exc.code, 'arity_mismatch')
        self.assertEqual(exc.context, {'symbol': 'f'})
        self.assertEqual(str(exc), "symbol 'f' has arity 2")

    def test_syntax_error_position(self):
        exc = TrsSyntaxError("Expected ')'", line=3, col=7)
        self.assertEqual((exc.line, exc.col), (3, 7))
        self.assertEqual(exc.code, 'trs_syntax_error')
        self.assertTrue(str(exc).startswith('line 3, col 7:'))

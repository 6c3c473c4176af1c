import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from common.exceptions import ModeError, TrsSyntaxError
from console.services import run_check, run_prove
from console.workspace import parse_trs_file
from relations.universe import RelationKind
from rewriting.parser import Mode

FIXTURES = Path(__file__).resolve().parent / 'fixtures'


def fixture(name):
    return str(FIXTURES / name)


class CommandTestCase(SimpleTestCase):
    def run_command(self, *args):
        """Run ``infinir`` and return (exit code, stdout, stderr)."""
        out, err = StringIO(), StringIO()
        try:
            call_command('infinir', *args, stdout=out, stderr=err)
        except SystemExit as exc:
            return exc.code, out.getvalue(), err.getvalue()
        return 0, out.getvalue(), err.getvalue()


class WorkspaceTests(SimpleTestCase):
    def test_rewriting_file(self):
        ws = parse_trs_file('C(a) -> a')
        self.assertEqual(len(ws.trs.rules), 1)
        self.assertEqual(ws.mode, Mode.REWRITING)

    def test_equations_with_named_term(self):
        ws = parse_trs_file('C(a) = a\nterm cw = rec X = C(X) in X')
        self.assertEqual(ws.mode, Mode.EQUATIONAL)
        self.assertEqual(ws.resolve('cw'), ws.resolve('C(cw)'))
        self.assertEqual(ws.resolve(' cw '), ws.terms['cw'])

    def test_non_left_linear_system(self):
        ws = parse_trs_file('f(x,x) -> D\na -> C(a)\nb -> C(b)')
        self.assertEqual(len(ws.trs.rules), 3)

    def test_mixed_declarations(self):
        with self.assertRaises(ModeError):
            parse_trs_file('C(a) = a\nb -> a')

    def test_syntax_error_position(self):
        with self.assertRaises(TrsSyntaxError) as ctx:
            parse_trs_file('a -> b\nf(a -> b')
        self.assertEqual(ctx.exception.line, 2)


class ServiceTests(SimpleTestCase):
    def test_solver_answers_on_closed_universe(self):
        ws = parse_trs_file('C(a) -> a\nterm cw = rec X = C(X) in X')
        verdict = run_check(ws, RelationKind.IRED, ws.resolve('cw'), ws.resolve('a'))
        self.assertEqual(verdict.exit_code, 1)
        self.assertEqual(verdict.via, 'solver')
        self.assertTrue(verdict.universe.closed)

    def test_bi_infinite_rewriting_reaches_a(self):
        ws = parse_trs_file('C(a) -> a\nterm cw = rec X = C(X) in X')
        verdict = run_prove(ws, RelationKind.BI, ws.resolve('cw'), ws.resolve('a'))
        self.assertTrue(verdict.is_proved)
        self.assertIsNotNone(verdict.certificate)

    def test_mode_guard(self):
        ws = parse_trs_file('C(a) = a')
        with self.assertRaises(ModeError):
            run_check(ws, RelationKind.BI, ws.resolve('a'), ws.resolve('a'))
        ws = parse_trs_file('term cw = rec X = C(X) in X')
        self.assertTrue(run_check(ws, RelationKind.IEQ, ws.resolve('cw'), ws.resolve('cw')).is_proved)


class CheckCommandTests(CommandTestCase):
    def test_equational_limit(self):
        code, out, _ = self.run_command('check', fixture('limit.trs'), '--rel', 'ieq', '--from', 'cw', '--to', 'a')
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)['outcome'], 'proved')

    def test_refuted_on_closed_universe(self):
        code, out, _ = self.run_command(
            'check', fixture('collapse.trs'), '--rel', 'ired', '--from', 'cw', '--to', 'a', '--format', 'text',
        )
        self.assertEqual(code, 1)
        self.assertEqual(out.strip(), 'refuted (solver)')

    def test_non_left_linear_reduction(self):
        code, _, _ = self.run_command('check', fixture('nonlinear.trs'), '--rel', 'ired', '--from', 'f(a,b)', '--to', 'D')
        self.assertEqual(code, 0)

    def test_mode_error_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('check', fixture('limit.trs'), '--rel', 'ired', '--from', 'cw', '--to', 'a')
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('ModeError', str(ctx.exception))

    def test_invalid_budget(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('check', fixture('limit.trs'), '--rel', 'ieq', '--from', 'cw', '--to', 'a',
                             '--budget-split', '0')
        self.assertEqual(ctx.exception.returncode, 3)

    def test_output_is_deterministic(self):
        args = ('check', fixture('nonlinear.trs'), '--rel', 'ired', '--from', 'f(a,b)', '--to', 'D')
        self.assertEqual(self.run_command(*args), self.run_command(*args))


class ProveAndVerifyCommandTests(CommandTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return str(Path(self.tmp.name) / name)

    def test_prove_output_verifies(self):
        for trs, rel, source, target in (
            ('limit.trs', 'ieq', 'cw', 'a'),
            ('nonlinear.trs', 'ired', 'f(a,b)', 'D'),
            ('omega.trs', 'ired', 'a', 'cw'),
        ):
            emitted = self.path(f'{rel}.json')
            code, _, _ = self.run_command('prove', fixture(trs), '--rel', rel, '--from', source, '--to', target,
                                          '--emit', emitted)
            self.assertEqual(code, 0)
            code, out, _ = self.run_command('verify', fixture(trs), emitted)
            self.assertEqual(code, 0, out)
            self.assertIn('ok', out)

    def test_prove_refuted_writes_no_document(self):
        code, out, err = self.run_command('prove', fixture('collapse.trs'), '--rel', 'ired',
                                          '--from', 'cw', '--to', 'a')
        self.assertEqual(code, 1)
        self.assertEqual(out, '')
        self.assertIn('refuted', err)

    def test_verify_rejects_bad_root_step(self):
        document = self.path('bad.json')
        Path(document).write_text(json.dumps({
            'kind': 'bi', 'terms': ['C(a)', 'b'], 'root': 0,
            'nodes': [{'judgment': 'rel', 'goal': [0, 1], 'rule': 'split',
                       'premise': [{'step': {'rule_index': 0, 'source': 0, 'target': 1}}]}],
        }))
        code, out, _ = self.run_command('verify', fixture('collapse.trs'), document)
        self.assertEqual(code, 1)
        self.assertIn('BadRootStep', out)

    def test_verify_malformed_document(self):
        document = self.path('broken.json')
        Path(document).write_text('{"kind": "ired"}')
        with self.assertRaises(CommandError) as ctx:
            self.run_command('verify', fixture('collapse.trs'), document)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_missing_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('verify', fixture('collapse.trs'), self.path('absent.json'))
        self.assertEqual(ctx.exception.returncode, 3)

    def test_export_dot(self):
        emitted = self.path('ired.json')
        self.run_command('prove', fixture('nonlinear.trs'), '--rel', 'ired', '--from', 'f(a,b)', '--to', 'D',
                         '--emit', emitted)
        code, out, _ = self.run_command('export_dot', fixture('nonlinear.trs'), emitted)
        self.assertEqual(code, 0)
        self.assertIn('digraph certificate {', out)
        self.assertIn('style=dashed', out)

    def test_prove_dot_format(self):
        code, out, _ = self.run_command('prove', fixture('limit.trs'), '--rel', 'ieq', '--from', 'cw', '--to', 'a',
                                        '--format', 'dot')
        self.assertEqual(code, 0)
        self.assertNotIn('style=dashed', out)


class CompressCommandTests(CommandTestCase):
    def test_non_left_linear_system(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('compress', fixture('nonlinear.trs'), '--from', 'f(a,b)', '--to', 'D')
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('NotLeftLinear', str(ctx.exception))

    def test_steps_of_the_omega_reduction(self):
        code, out, _ = self.run_command('compress', fixture('omega.trs'), '--from', 'a', '--to', 'cw', '--steps', '3')
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines(), [
            'eps  0  C(a)',
            '1  0  C(C(a))',
            '1.1  0  C(C(C(a)))',
        ])

    def test_document_output(self):
        code, out, _ = self.run_command('compress', fixture('omega.trs'), '--from', 'a', '--to', 'cw')
        self.assertEqual(code, 0)
        doc = json.loads(out)
        self.assertEqual(doc['nodes'][doc['root']]['children'], [doc['root']])


class TermCommandTests(CommandTestCase):
    def test_distance(self):
        code, out, _ = self.run_command('distance', fixture('limit.trs'), 'cw', 'C(a)')
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), '2^-1')

    def test_distance_zero(self):
        _, out, _ = self.run_command('distance', fixture('limit.trs'), 'cw', 'C(cw)')
        self.assertEqual(out.strip(), '0')

    def test_unfold(self):
        code, out, _ = self.run_command('unfold', fixture('limit.trs'), 'cw', '--depth', '3')
        self.assertEqual(code, 0)
        self.assertEqual(out.strip(), 'C(C(C(#)))')

    def test_negative_depth(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('unfold', fixture('limit.trs'), 'cw', '--depth', '-1')
        self.assertEqual(ctx.exception.returncode, 3)

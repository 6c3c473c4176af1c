import itertools

from django.test import SimpleTestCase

from common.exceptions import (
    ArityMismatch, FreeVariableInRhs, InfiniteLhs, LhsIsVariable, ModeError, NoMatch, TrsSyntaxError,
)
from rewriting.parser import Mode, parse_trs
from rewriting.reductions import finite_reductions
from rewriting.rules import (
    Direction, check_rule, inverse_root_steps, is_left_linear, match_root, redex_nodes, root_steps,
    step_at,
)
from terms.graph import canonical, positions, subterm_at, substitute
from terms.syntax import parse_finite_term, parse_term

CW = 'rec X = C(X) in X'
NON_LINEAR = "f(x,x) -> D\na -> C(a)\nb -> C(b)\n"


def term(text):
    return parse_term(text)


def lhs(text):
    return parse_finite_term(text)


def trs(text):
    return parse_trs(text).trs


class CheckRuleTests(SimpleTestCase):
    def test_valid_rules(self):
        self.assertEqual(str(check_rule(lhs('C(a)'), term('a'))), 'C(a) -> a')
        self.assertTrue(check_rule(lhs('f(x,x)'), term('D')))

    def test_invalid_rules(self):
        with self.assertRaises(LhsIsVariable):
            check_rule(lhs('x'), term('a'))
        with self.assertRaises(FreeVariableInRhs):
            check_rule(lhs('f(x)'), term('g(y)'))
        with self.assertRaises(ArityMismatch):
            check_rule(lhs('f(a)'), term('f(a,a)'))

    def test_left_linearity(self):
        self.assertFalse(is_left_linear(trs(NON_LINEAR)))
        self.assertTrue(is_left_linear(trs('C(a) -> a')))
        self.assertTrue(is_left_linear(trs('f(x,y) -> g(x)')))


class MatchTests(SimpleTestCase):
    def test_examples(self):
        cw = term(CW)
        self.assertEqual(match_root(lhs('f(x,x)'), term(f'f({CW},{CW})')), {'x': cw})
        self.assertIsNone(match_root(lhs('f(x,x)'), term('f(a,b)')))
        self.assertEqual(match_root(lhs('C(a)'), term('C(a)')), {})

    def test_sound_and_complete_on_small_terms(self):
        patterns = [lhs(p) for p in ('f(x,x)', 'f(x,y)', 'C(x)', 'f(C(x),y)', 'f(a,x)')]
        corpus = [term(t) for t in (
            'f(a,a)', 'f(a,b)', 'f(C(a),C(a))', f'f({CW},{CW})', f'f(C(a),{CW})', 'C(f(a,a))', CW,
            'rec X = f(X,X) in X', 'rec X = f(C(X),a) in X',
        )]
        for pattern, t in itertools.product(patterns, corpus):
            names = sorted(pattern.variables())
            candidates = [canonical(t.nodes, i) for i in range(len(t.nodes))]
            brute = [
                dict(zip(names, choice))
                for choice in itertools.product(candidates, repeat=len(names))
                if substitute(parse_term(str(pattern)), dict(zip(names, choice))) == t
            ]
            found = match_root(pattern, t)
            if found is None:
                self.assertEqual(brute, [], f"{pattern} against {t}")
            else:
                self.assertEqual(substitute(parse_term(str(pattern)), found), t)
                self.assertIn(found, brute)


class StepTests(SimpleTestCase):
    def test_root_steps(self):
        nonlinear = trs(NON_LINEAR)
        self.assertEqual([s.target for s in root_steps(term('a'), nonlinear)], [term('C(a)')])
        self.assertEqual(root_steps(term(CW), trs('C(a) -> a')), [])
        self.assertEqual(root_steps(term('b'), trs('f(x,x) -> D')), [])

    def test_inverse_root_steps(self):
        steps = inverse_root_steps(term('a'), trs('C(a) = a'))
        self.assertEqual([(s.target, s.direction) for s in steps], [(term('C(a)'), Direction.BWD)])
        self.assertEqual(inverse_root_steps(term('a'), trs('f(x,y) = g(x)')), [])

    def test_step_at(self):
        collapse = trs('C(a) -> a')
        self.assertEqual(step_at(term('f(C(a),b)'), (1,), 0, collapse), term('f(a,b)'))
        with self.assertRaises(NoMatch):
            step_at(term(CW), (1, 1), 0, collapse)
        self.assertEqual(step_at(term('f(a,b)'), (1,), 1, trs(NON_LINEAR)), term('f(C(a),b)'))

    def test_step_leaves_disjoint_positions_alone(self):
        rules = trs('a -> C(a)')
        t = term('f(a,rec X = g(a,X) in X)')
        u = step_at(t, (2, 1), 0, rules)
        self.assertEqual(subterm_at(u, (2, 1)), term('C(a)'))
        for position, _ in positions(t, 4):
            if position[:2] == (2, 1) or (2, 1)[:len(position)] == position:
                continue
            self.assertEqual(subterm_at(t, position).label, subterm_at(u, position).label)

    def test_redex_nodes(self):
        nonlinear = trs(NON_LINEAR)
        self.assertEqual(redex_nodes(term('D'), nonlinear), set())
        fab = term('f(a,b)')
        self.assertEqual({fab.nodes[i].label for i in redex_nodes(fab, nonlinear)}, {'a', 'b'})
        self.assertEqual(redex_nodes(term(CW), trs('C(a) -> a')), set())


class FiniteReductionTests(SimpleTestCase):
    def test_a_reduces_twice(self):
        nonlinear = trs(NON_LINEAR)
        found = {r.end: r for r in finite_reductions(term('a'), nonlinear, 2, 2)}
        self.assertIn(term('C(C(a))'), found)
        self.assertEqual([s.position for s in found[term('C(C(a))')].steps], [(), (1,)])

    def test_trivial_bounds(self):
        nonlinear = trs(NON_LINEAR)
        self.assertEqual([len(r) for r in finite_reductions(term('a'), nonlinear, 0, 3)], [0])
        self.assertEqual([len(r) for r in finite_reductions(term('D'), nonlinear, 4, 4)], [0])

    def test_larger_bounds_enumerate_more(self):
        nonlinear = trs(NON_LINEAR)
        small = {r.steps for r in finite_reductions(term('f(a,b)'), nonlinear, 1, 1)}
        large = {r.steps for r in finite_reductions(term('f(a,b)'), nonlinear, 2, 2)}
        self.assertLessEqual(small, large)

    def test_every_reduction_replays(self):
        nonlinear = trs(NON_LINEAR)
        for reduction in finite_reductions(term('f(a,b)'), nonlinear, 3, 2):
            self.assertEqual(reduction.terms(nonlinear)[-1], reduction.end)


class TrsFileTests(SimpleTestCase):
    def test_rewriting_file(self):
        parsed = parse_trs('C(a) -> a')
        self.assertEqual(len(parsed.trs.rules), 1)
        self.assertEqual(parsed.mode, Mode.REWRITING)

    def test_equational_file_with_named_term(self):
        parsed = parse_trs('C(a) = a\nterm cw = rec X = C(X) in X')
        self.assertEqual(parsed.mode, Mode.EQUATIONAL)
        self.assertEqual(len(parsed.trs.rules), 1)
        self.assertEqual(parsed.terms['cw'], term(CW))
        self.assertEqual([type(name) for name in parsed.terms], [str])

    def test_named_terms_in_later_declarations(self):
        parsed = parse_trs('term cw = rec X = C(X) in X\nterm dw = D(cw)\na -> cw')
        self.assertEqual(parsed.terms['dw'], term(f'D({CW})'))
        self.assertEqual(parsed.trs.rules[0].rhs, term(CW))

    def test_rec_is_rejected_on_finite_lhs(self):
        with self.assertRaises(InfiniteLhs):
            parse_trs('rec X = C(a) in X -> a')
        with self.assertRaises(TrsSyntaxError):
            parse_trs('term rec = a')

    def test_non_left_linear_system(self):
        parsed = parse_trs('# not left-linear\n' + NON_LINEAR)
        self.assertEqual(len(parsed.trs.rules), 3)
        self.assertTrue(parsed.trs.rules[0].lhs.args[0].is_variable)

    def test_declared_variables(self):
        parsed = parse_trs('vars n\ng(n) -> n')
        self.assertTrue(parsed.trs.rules[0].lhs.args[0].is_variable)

    def test_errors(self):
        with self.assertRaises(ModeError):
            parse_trs('a -> b\nb = a')
        with self.assertRaises(TrsSyntaxError) as ctx:
            parse_trs('a -> b\nf(a -> b')
        self.assertEqual(ctx.exception.line, 2)
        with self.assertRaises(LhsIsVariable):
            parse_trs('x -> a')
        with self.assertRaises(ArityMismatch):
            parse_trs('f(a) -> f(a,a)')
        with self.assertRaises(InfiniteLhs):
            parse_trs('rec X = C(X) in X -> a')

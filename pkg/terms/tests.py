import itertools

from django.test import SimpleTestCase

from common.exceptions import (
    ArityMismatch, InfiniteLhs, InvalidPosition, ReservedSymbol, TrsSyntaxError, UnboundName,
    UnguardedBinding,
)
from terms.graph import (
    CUT, DyadicDistance, FiniteTerm, Node, RationalTerm, Signature, bisimilar, distance, inner_positions, minimize,
    positions, pump, replace_at, subterm_at, substitute, truncate, variables_of,
)
from terms.syntax import Ref, make_term, parse_finite_term, parse_term, render_term

CW = 'rec X = C(X) in X'


def term(text, **kwargs):
    return parse_term(text, **kwargs)


class MakeTermTests(SimpleTestCase):
    def test_c_omega_is_a_single_self_loop(self):
        t = make_term([('X', 'C(X)')], 'X')
        self.assertEqual(t.nodes, (Node('C', (0,)),))
        self.assertEqual(t.root, 0)

    def test_constant_embeds(self):
        self.assertEqual(make_term([], 'a').nodes, (Node('a'),))

    def test_binary_stream(self):
        t = make_term([('X', 'f(0, X)')], 'X')
        self.assertEqual(t.nodes, (Node('f', (1, 0)), Node('0')))

    def test_mutual_bindings(self):
        t = make_term([('X', 'f(Y)'), ('Y', 'g(X)')], 'X')
        self.assertEqual(len(t.nodes), 2)
        self.assertEqual(t, term('rec X = f(g(X)) in X'))

    def test_unguarded_binding_rejected(self):
        with self.assertRaises(UnguardedBinding):
            make_term([('X', 'X')], 'a')
        with self.assertRaises(UnguardedBinding):
            make_term([('X', 'Y'), ('Y', 'X')], 'X')

    def test_unbound_reference(self):
        with self.assertRaises(UnboundName):
            make_term([], Ref('X'))

    def test_arity_mismatch(self):
        with self.assertRaises(ArityMismatch):
            term('f(a, f(a))')
        with self.assertRaises(ArityMismatch):
            Signature((('f', 2),)).check(term('f(a)'))

    def test_cut_symbol_reserved(self):
        with self.assertRaises(ReservedSymbol):
            Signature(((CUT, 0),))

    def test_syntax_error_carries_position(self):
        with self.assertRaises(TrsSyntaxError) as ctx:
            term('f(a,')
        self.assertEqual(ctx.exception.line, 1)
        self.assertEqual(ctx.exception.code, 'trs_syntax_error')

    def test_variable_convention(self):
        self.assertTrue(term('x').is_variable)
        self.assertFalse(term('a').is_variable)
        self.assertTrue(term('a', variables=['a']).is_variable)

    def test_named_terms_are_embedded(self):
        cw = term(CW)
        self.assertEqual(term('C(cw)', named={'cw': cw}), cw)

    def test_finite_lhs_only(self):
        self.assertEqual(str(parse_finite_term('f(x,x)')), 'f(x,x)')
        with self.assertRaises(InfiniteLhs):
            parse_finite_term(CW)


class BisimilarityTests(SimpleTestCase):
    def test_two_node_chain_is_c_omega(self):
        chain = RationalTerm((Node('C', (1,)), Node('C', (0,))), 0)
        self.assertTrue(bisimilar(term(CW), chain))
        self.assertEqual(minimize(chain), term(CW))

    def test_not_bisimilar(self):
        self.assertFalse(bisimilar(term(CW), term('C(a)')))
        self.assertTrue(bisimilar(term('a'), term('a')))

    def test_minimize_shares_equal_leaves(self):
        raw = RationalTerm((Node('f', (1, 2)), Node('a'), Node('a')), 0)
        self.assertEqual(minimize(raw).nodes, (Node('f', (1, 1)), Node('a')))
        self.assertEqual(minimize(minimize(raw)), minimize(raw))
        self.assertEqual(minimize(term('a')), term('a'))


class FinitenessTests(SimpleTestCase):
    def test_shared_subterms_are_finite(self):
        self.assertTrue(term('f(g(a),g(a))').is_finite())
        self.assertTrue(term('rec X = g(a) in f(X,X)').is_finite())

    def test_cycles_are_infinite(self):
        self.assertFalse(term(CW).is_finite())
        self.assertFalse(term('f(a,rec X = g(b,X) in X)').is_finite())

    def test_unreachable_cycle_is_ignored(self):
        self.assertTrue(RationalTerm((Node('a'), Node('C', (1,))), 0).is_finite())


class DistanceTests(SimpleTestCase):
    corpus = [CW, 'C(a)', 'C(C(a))', 'a', 'b', 'f(a,b)', 'f(a,a)', 'rec X = f(a,X) in X', 'f(rec X = C(X) in X,b)']

    def test_examples(self):
        self.assertEqual(distance(term(CW), term(CW)), DyadicDistance.zero())
        self.assertEqual(distance(term('a'), term('b')), DyadicDistance(0))
        self.assertEqual(distance(term(CW), term('C(a)')), DyadicDistance(1))
        self.assertEqual(str(distance(term(CW), term('C(a)'))), '2^-1')
        self.assertEqual(str(DyadicDistance.zero()), '0')

    def test_ordering(self):
        self.assertLess(DyadicDistance.zero(), DyadicDistance(3))
        self.assertLess(DyadicDistance(3), DyadicDistance(1))

    def test_ultrametric(self):
        terms = [term(t) for t in self.corpus]
        for s, t, u in itertools.product(terms, repeat=3):
            self.assertLessEqual(distance(s, u), max(distance(s, t), distance(t, u)))

    def test_truncation_oracle(self):
        terms = [term(t) for t in self.corpus]
        for s, t in itertools.product(terms, repeat=2):
            d = distance(s, t)
            bound = len(s.nodes) * len(t.nodes) + 1
            if d.is_zero:
                self.assertTrue(all(truncate(s, k) == truncate(t, k) for k in range(bound)))
            else:
                self.assertEqual(truncate(s, d.exponent), truncate(t, d.exponent))
                self.assertNotEqual(truncate(s, d.exponent + 1), truncate(t, d.exponent + 1))


class TruncateAndPositionTests(SimpleTestCase):
    def test_truncate(self):
        self.assertEqual(str(truncate(term(CW), 0)), CUT)
        self.assertEqual(str(truncate(term(CW), 2)), 'C(C(#))')
        self.assertEqual(truncate(term('f(a,b)'), 5), FiniteTerm('f', (FiniteTerm('a'), FiniteTerm('b'))))

    def test_subterm_at(self):
        t = term('f(a,b)')
        self.assertEqual(subterm_at(t, ()), t)
        self.assertEqual(subterm_at(term(CW), (1,)), term(CW))
        self.assertEqual(subterm_at(t, (2,)), term('b'))
        with self.assertRaises(InvalidPosition):
            subterm_at(t, (3,))

    def test_inner_positions(self):
        t = term('rec X = f(g(X),X) in X')
        found = inner_positions(t)
        self.assertEqual(found[t.root], (2,))
        self.assertEqual(sorted(found.values()), [(1,), (2,)])
        self.assertEqual(inner_positions(term('f(a,a)')), {1: (1,)})
        self.assertEqual(inner_positions(term('a')), {})

    def test_positions_are_lexicographic(self):
        found = [p for p, _ in positions(term('f(g(a),b)'), 5)]
        self.assertEqual(found, [(), (1,), (1, 1), (2,)])
        self.assertEqual(len(list(positions(term(CW), 3))), 4)


class SubstitutionTests(SimpleTestCase):
    def test_variables_of(self):
        self.assertEqual(variables_of(term('f(x,x)')), {'x'})
        self.assertEqual(variables_of(term(CW)), set())
        self.assertEqual(variables_of(term('f(x,g(y))')), {'x', 'y'})

    def test_substitute(self):
        cw = term(CW)
        self.assertEqual(substitute(term('f(x,x)'), {'x': cw}), term(f'f({CW},{CW})'))
        self.assertEqual(substitute(term('f(x,a)'), {}), term('f(x,a)'))
        self.assertEqual(substitute(term('C(x)'), {'x': term('a')}), term('C(a)'))

    def test_substitution_commutes_with_subterms(self):
        t = term('f(g(x),rec X = h(x,X) in X)')
        sigma = {'x': term(CW)}
        for position, _ in positions(t, 3):
            if subterm_at(t, position).is_variable:
                continue
            self.assertEqual(substitute(subterm_at(t, position), sigma), subterm_at(substitute(t, sigma), position))

    def test_replace_only_the_occurrence(self):
        self.assertEqual(replace_at(term('f(c,c)'), (1,), term('d')), term('f(d,c)'))
        self.assertEqual(replace_at(term(CW), (1,), term('a')), term('C(a)'))

    def test_pump(self):
        self.assertEqual(pump(term('C(a)'), (1,)), term(CW))
        self.assertEqual(pump(term('f(a,b)'), (1,)), term('rec X = f(X,b) in X'))


class RenderTests(SimpleTestCase):
    def test_render(self):
        self.assertEqual(render_term(term('f(a,b)')), 'f(a,b)')
        self.assertEqual(render_term(term(CW)), 'rec X0 = C(X0) in X0')

    def test_render_reads_back(self):
        for text in DistanceTests.corpus + ['f(x,g(x))', 'rec X = f(Y,X), Y = g(Y) in h(X,X)']:
            t = term(text)
            self.assertEqual(term(render_term(t)), t)

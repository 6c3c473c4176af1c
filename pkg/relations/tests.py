import random

from django.test import SimpleTestCase

from common.exceptions import InvalidBudget, ModeError, UniverseNotClosed
from proofs.certificates import Judgment, Lift, LiftItem, RootStepItem, Split
from proofs.validation import is_guarded, nesting_depth, validate
from relations.search import SearchBudget, _Reconstruction, search_proof
from relations.solvers import (
    PairRelation, conversion, decide, decide_ired, decide_nu, generator, inner_nu, lift, t_infinity,
)
from relations.universe import RelationKind, Universe, close_universe
from rewriting.parser import parse_trs
from rewriting.rules import Trs
from terms.graph import pump
from terms.syntax import parse_term

CW = 'rec X = C(X) in X'
NON_LINEAR = "f(x,x) -> D\na -> C(a)\nb -> C(b)\n"
CROSSED_LIMITS = "a -> f(a)\nb -> f(b)\nC(b) -> C(C(a))\n"

IEQ, BI, IRED = RelationKind.IEQ, RelationKind.BI, RelationKind.IRED


def term(text):
    return parse_term(text)


def trs(text):
    return parse_trs(text).trs


def pair(u, s, t):
    return u.index_of(term(s)), u.index_of(term(t))


def random_ground_term(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(['a', 'a', CW]) if rng.random() < 0.2 else 'a'
    if rng.random() < 0.5:
        return f"C({random_ground_term(rng, depth - 1)})"
    return f"f({random_ground_term(rng, depth - 1)},{random_ground_term(rng, depth - 1)})"


OPEN_RULES = ('C(C(x)) -> C(x)', 'f(x,a) -> x', 'f(x,C(a)) -> x')


def random_system(rng, open_rules=False):
    """
    Up to four ground rules over a, C and f, and with ``open_rules`` one more
    left-linear rule with a variable. Returns the rules and their ground sides.
    """
    rules = []
    for _ in range(rng.randint(1, 4)):
        lhs = random_ground_term(rng, 2).replace(CW, 'a')
        rhs = random_ground_term(rng, 2)
        if lhs != rhs:
            rules.append((lhs, rhs))
    rules = rules or [('a', 'C(a)')]
    rewriting = '\n'.join(f"{lhs} -> {rhs}" for lhs, rhs in rules)
    if open_rules:
        rewriting += '\n' + rng.choice(OPEN_RULES)
    return trs(rewriting), [term(side) for rule in rules for side in rule]


def corpus(seed=7, size=60, budget=64, open_rules=False):
    """
    (trs, universe) pairs for the systems whose universe closes. Ground
    systems are closed for equations, systems with variables for rewriting.
    """
    rng = random.Random(seed)
    kind = IRED if open_rules else IEQ
    found = []
    for _ in range(size):
        rules, sides = random_system(rng, open_rules)
        u = close_universe([term('a'), *sides], rules, kind, budget)
        if u.closed:
            found.append((rules, u))
    return found


class LiftTests(SimpleTestCase):
    def test_lift_of_empty_is_identity(self):
        u = close_universe([term(CW), term('a')], trs('C(a) = a'), IEQ, 10)
        self.assertEqual(lift(PairRelation.empty(len(u)), u), PairRelation.identity(len(u)))

    def test_lift_relates_arguments(self):
        u = Universe.from_terms([term('a'), term('C(a)'), term(CW)], trs('a -> C(a)'), IRED)
        R = PairRelation(len(u), {pair(u, 'a', CW)})
        self.assertIn(pair(u, 'C(a)', CW), lift(R, u))
        self.assertNotIn(pair(u, 'a', CW), lift(R, u))

    def test_constants_only_lift_to_identity(self):
        u = Universe.from_terms([term('a'), term('b')], Trs.from_rules([]), BI)
        self.assertEqual(lift(PairRelation.full(2), u), PairRelation.identity(2))

    def test_lift_is_monotone(self):
        u = close_universe([term('f(a,b)'), term('D')], trs(NON_LINEAR), IRED, 64)
        small = PairRelation(len(u), {pair(u, 'a', 'C(a)')})
        self.assertLessEqual(lift(small, u), lift(PairRelation.full(len(u)), u))


class CloseUniverseTests(SimpleTestCase):
    def test_equational_universe(self):
        u = close_universe([term(CW), term('a')], trs('C(a) = a'), IEQ, 10)
        self.assertTrue(u.closed)
        self.assertEqual(set(u.terms), {term(CW), term('a'), term('C(a)')})

    def test_rewriting_universe_closes_with_limit(self):
        u = close_universe([term('a')], trs('a -> C(a)'), BI, 10)
        self.assertTrue(u.closed)
        self.assertEqual(set(u.terms), {term('a'), term('C(a)'), term(CW)})

    def test_growing_rule_does_not_saturate(self):
        u = close_universe([term('C(a)')], trs('C(x) -> C(C(x))'), BI, 10)
        self.assertFalse(u.closed)
        self.assertEqual(len(u), 10)
        with self.assertRaises(UniverseNotClosed):
            decide_nu(u, BI)

    def test_limit_below_a_branching_cyclic_rhs(self):
        n = 14
        bindings = [f"X{i} = f{i}(X{i + 1},X{i + 1})" for i in range(n - 1)] + [f"X{n - 1} = f{n - 1}(X0,a)"]
        rhs = term(f"rec {', '.join(bindings)} in X0")
        u = close_universe([term('a')], trs(f"a -> {rhs}"), BI, 64)
        self.assertIn(rhs, u.terms)
        self.assertIn(pump(rhs, (1,) * (n - 1) + (2,)), u.terms)

    def test_normal_form_universe(self):
        u = close_universe([term('D')], trs(NON_LINEAR), IRED, 10)
        self.assertTrue(u.closed)
        self.assertEqual(u.terms, (term('D'),))

    def test_budget_must_be_positive(self):
        with self.assertRaises(InvalidBudget):
            close_universe([term('a')], trs('a -> b'), BI, 0)

    def test_equations_dropping_variables_never_close(self):
        u = close_universe([term('f(c)')], trs('f(x) = x'), IEQ, 64)
        self.assertFalse(u.closed)


class DecideTests(SimpleTestCase):
    def test_limit_equals_constant(self):
        u = close_universe([term(CW), term('a')], trs('C(a) = a'), IEQ, 10)
        self.assertIn(pair(u, CW, 'a'), decide_nu(u, IEQ))

    def test_separation_of_bi_and_ired(self):
        rules = trs('C(a) -> a')
        u = close_universe([term(CW), term('a')], rules, IRED, 10)
        self.assertTrue(u.closed)
        self.assertIn(pair(u, CW, 'a'), decide_nu(u, BI))
        self.assertNotIn(pair(u, CW, 'a'), decide_ired(u))

    def test_empty_system_relates_only_equal_terms(self):
        u = Universe.from_terms([term('a'), term(CW), term('C(a)')], Trs.from_rules([]), BI)
        self.assertEqual(decide_nu(u, BI), PairRelation.identity(3))

    def test_omega_reduction_relation(self):
        u = close_universe([term('a'), term(CW)], trs('a -> C(a)'), IRED, 10)
        R = decide_ired(u)
        self.assertIn(pair(u, 'a', CW), R)
        self.assertTrue(R.is_reflexive())

    def test_ired_needs_decide_ired(self):
        u = close_universe([term('a')], trs('a -> C(a)'), IRED, 10)
        with self.assertRaises(ModeError):
            decide_nu(u, IRED)
        self.assertEqual(decide(u, IRED), decide_ired(u))

    def test_rewriting_universe_is_not_closed_for_equations(self):
        u = close_universe([term('a')], trs('a -> C(a)'), BI, 10)
        with self.assertRaises(UniverseNotClosed):
            decide_nu(u, IEQ)

    def test_fixed_point_and_maximality(self):
        for rules, u in corpus(size=12):
            for kind in (IEQ, BI):
                R = decide_nu(u, kind)
                G = generator(u, kind)
                self.assertEqual((G | lift(R, u)).star(), R)
                for p in set(PairRelation.full(len(u)).pairs) - R.pairs:
                    bigger = R | PairRelation(len(u), {p})
                    self.assertNotIn(p, (G | lift(bigger, u)).star())
            R = decide_ired(u)
            self.assertEqual(inner_nu(u, generator(u, IRED), R), R)

    def test_equations_versus_rules_on_shared_system(self):
        u = close_universe([term('a'), term('b'), term('C(a)'), term(CW)], trs(CROSSED_LIMITS.replace('->', '=')), IEQ, 64)
        self.assertTrue(u.closed)
        R = decide_nu(u, IEQ)
        self.assertIn(pair(u, 'a', 'b'), R)
        self.assertIn(pair(u, 'C(a)', CW), R)

        u = close_universe([term('C(a)'), term(CW)], trs(CROSSED_LIMITS), IRED, 64)
        self.assertTrue(u.closed)
        self.assertNotIn(pair(u, 'C(a)', CW), decide_ired(u))
        self.assertNotIn(pair(u, 'C(a)', CW), conversion(decide_nu(u, BI)))

    def test_collapsing_rule_relates_everything(self):
        terms = [term('c'), term('f(c)'), term('f(f(c))'), term('rec X = f(X) in X')]
        u = Universe.from_terms(terms, trs('f(x) -> x'), IEQ)
        self.assertTrue(u.closed)
        self.assertEqual(decide_nu(u, IEQ), PairRelation.full(4))


class InclusionChainTests(SimpleTestCase):
    def test_corpus_is_large_enough(self):
        self.assertGreaterEqual(len(corpus()), 50)

    def test_inclusions_and_order_properties(self):
        for rules, u in corpus():
            ieq = decide_nu(u, IEQ)
            bi = decide_nu(u, BI)
            ired = decide_ired(u)
            self.assertLessEqual(ired, bi)
            self.assertLessEqual(bi, ieq)
            self.assertLessEqual(ired, conversion(ired))
            self.assertLessEqual(conversion(ired), conversion(bi))
            self.assertLessEqual(conversion(bi), ieq)
            self.assertTrue(ieq.is_reflexive() and ieq.is_symmetric() and ieq.is_transitive(), str(rules))
            for R in (bi, ired):
                self.assertTrue(R.is_reflexive() and R.is_transitive(), str(rules))

    def test_idempotence(self):
        for rules, u in corpus():
            ieq = decide_nu(u, IEQ)
            self.assertEqual(t_infinity(u, ieq), ieq, str(rules))


class SearchTests(SimpleTestCase):
    def test_equational_limit_certificate(self):
        verdict = search_proof(term(CW), term('a'), IEQ, trs('C(a) = a'))
        self.assertTrue(verdict.is_proved)
        p = verdict.certificate
        self.assertEqual(len(p.nodes), 2)
        self.assertEqual(p.count(rule=Split), 1)
        self.assertEqual(p.count(rule=Lift), 1)
        self.assertEqual(len(p.back_edges()), 1)
        self.assertTrue(validate(p, trs('C(a) = a')).ok)
        self.assertTrue(is_guarded(p))

    def test_omega_reduction_certificate(self):
        verdict = search_proof(term('a'), term(CW), IRED, trs(NON_LINEAR))
        p = verdict.certificate
        root = p.nodes[p.root]
        self.assertEqual(len(p.nodes), 2)
        self.assertIsInstance(root.rule.items[0], RootStepItem)
        self.assertIsInstance(root.rule.items[1], LiftItem)
        self.assertEqual(p.nodes[root.rule.items[1].node].judgment, Judgment.DOWN)
        self.assertEqual(p.back_edges(), [(root.rule.items[1].node, p.root)])
        self.assertEqual(nesting_depth(p), 0)

    def test_non_left_linear_certificate(self):
        rules = trs(NON_LINEAR)
        verdict = search_proof(term('f(a,b)'), term('D'), IRED, rules)
        self.assertTrue(verdict.is_proved)
        p = verdict.certificate
        self.assertTrue(validate(p, rules).ok)
        self.assertEqual(p.count(judgment=Judgment.DOWN_FIN), 1)
        marked, step = p.nodes[p.root].rule.items
        self.assertEqual(p.nodes[marked.node].judgment, Judgment.DOWN_FIN)
        self.assertEqual(len(p.nodes[marked.node].rule.premises), 2)
        self.assertEqual((step.rule_index, step.target), (0, term('D')))
        self.assertEqual(nesting_depth(p), 1)

    def test_unprovable_goal_is_unknown(self):
        verdict = search_proof(term(CW), term('a'), IRED, trs('C(a) -> a'))
        self.assertFalse(verdict.is_proved)
        self.assertIsNone(verdict.certificate)

    def test_goal_budget(self):
        verdict = search_proof(term('a'), term(CW), IRED, trs(NON_LINEAR), SearchBudget(max_goals=1))
        self.assertEqual(verdict.exit_code, 2)

    def test_invalid_budget(self):
        with self.assertRaises(InvalidBudget):
            SearchBudget(max_split=0)
        with self.assertRaises(InvalidBudget):
            SearchBudget.from_settings(max_goals=-1)

    def test_identity_goal(self):
        p = search_proof(term('f(a,b)'), term('f(a,b)'), BI, trs(NON_LINEAR)).certificate
        self.assertEqual(p.count(judgment=Judgment.DOWN), 1)
        self.assertTrue(validate(p, trs(NON_LINEAR)).ok)

    def test_agreement_with_solvers(self):
        budget = SearchBudget(max_split=200, max_new_term_nodes=64)
        for rules, u in corpus(seed=11, size=10):
            if len(u) > 10:
                continue
            hints = list(u.terms)
            for kind in (IEQ, BI, IRED):
                R = decide(u, kind)
                for i, s in enumerate(u.terms):
                    for j, t in enumerate(u.terms):
                        verdict = search_proof(s, t, kind, rules, budget, hints=hints)
                        self.assertEqual(verdict.is_proved, (i, j) in R, f"{s} {kind.value} {t} under {rules}")
                        if verdict.is_proved:
                            self.assertTrue(validate(verdict.certificate, rules).ok)

    def test_agreement_with_solvers_on_rules_with_variables(self):
        budget = SearchBudget(max_split=200, max_new_term_nodes=64)
        systems = corpus(seed=11, size=10, open_rules=True)
        self.assertTrue(systems)
        for rules, u in systems:
            self.assertTrue(any(rule.lhs.variables() for rule in rules.rules), str(rules))
            if len(u) > 10:
                continue
            hints = list(u.terms)
            for kind in (BI, IRED):
                R = decide(u, kind)
                for i, s in enumerate(u.terms):
                    for j, t in enumerate(u.terms):
                        verdict = search_proof(s, t, kind, rules, budget, hints=hints)
                        self.assertEqual(verdict.is_proved, (i, j) in R, f"{s} {kind.value} {t} under {rules}")
                        if verdict.is_proved:
                            self.assertTrue(validate(verdict.certificate, rules).ok)

    def test_reconstruction_needs_a_split_policy(self):
        u = close_universe([term('a')], trs('a -> C(a)'), IRED, 10)
        with self.assertRaises(TypeError):
            _Reconstruction(u, IRED, SearchBudget())

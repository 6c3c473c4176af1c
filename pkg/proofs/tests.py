import dataclasses
import json

from django.test import SimpleTestCase

from common.exceptions import InvalidCertificate, PrefixUnavailable
from proofs.certificates import (
    CertificateBuilder, Identity, Judgment, Lift, LiftItem, ProofGraph, ProofNode, RootStepItem, Split,
)
from proofs.dot import to_dot, to_graph
from proofs.extraction import extract_prefix
from proofs.serializers import dump, load
from proofs.validation import ViolationCode, is_guarded, nesting_depth, validate
from relations.search import SearchBudget, search_proof
from relations.solvers import decide_ired
from relations.tests import corpus
from relations.universe import RelationKind
from rewriting.parser import parse_trs
from rewriting.rules import Direction
from terms.graph import truncate
from terms.syntax import parse_term

CW = 'rec X = C(X) in X'
NON_LINEAR = "f(x,x) -> D\na -> C(a)\nb -> C(b)\n"
SATURATING = SearchBudget(max_split=64)


def term(text):
    return parse_term(text)


def trs(text):
    return parse_trs(text).trs


def certificate(s, t, kind, rules):
    verdict = search_proof(term(s), term(t), kind, trs(rules))
    assert verdict.is_proved, f"{s} {kind.value} {t}"
    return verdict.certificate


class ProofGraphTests(SimpleTestCase):
    def test_back_edges_point_at_open_nodes_only(self):
        a = term('a')
        p = ProofGraph(RelationKind.IRED, (
            ProofNode(Judgment.REL, (a, a), Split((LiftItem(1), LiftItem(2)))),
            ProofNode(Judgment.DOWN, (a, a), Lift((2,))),
            ProofNode(Judgment.DOWN, (a, a), Lift((0,))),
        ))
        self.assertEqual(p.back_edges(), [(2, 0)])

    def test_acyclic_certificate_has_no_back_edges(self):
        p = certificate('a', 'c', RelationKind.IRED, 'a -> b\nb -> c')
        self.assertEqual(p.back_edges(), [])


class ValidationTests(SimpleTestCase):
    def test_equational_certificate_is_valid(self):
        report = validate(certificate(CW, 'a', RelationKind.IEQ, 'C(a) = a'), trs('C(a) = a'))
        self.assertTrue(report.ok)
        self.assertEqual(report.violations, [])

    def test_marked_lift_on_cycle(self):
        p = certificate('a', CW, RelationKind.IRED, NON_LINEAR)
        lift_index = p.nodes[p.root].rule.items[-1].node
        nodes = list(p.nodes)
        nodes[lift_index] = dataclasses.replace(nodes[lift_index], judgment=Judgment.DOWN_FIN)
        marked = dataclasses.replace(p, nodes=tuple(nodes))
        report = validate(marked, trs(NON_LINEAR))
        self.assertFalse(report.ok)
        self.assertIn(ViolationCode.MARKED_LIFT_ON_CYCLE, report.codes)
        self.assertIsNone(nesting_depth(marked))

    def test_bad_root_step(self):
        rules = trs('C(a) -> a')
        step = RootStepItem(0, Direction.FWD, (), term('C(a)'), term('b'))
        p = ProofGraph(RelationKind.BI, (ProofNode(Judgment.REL, (term('C(a)'), term('b')), Split((step,))),))
        self.assertEqual(validate(p, rules).codes, {ViolationCode.BAD_ROOT_STEP})

    def test_backward_step_outside_equations(self):
        rules = trs('C(a) -> a')
        step = RootStepItem(0, Direction.BWD, (), term('a'), term('C(a)'))
        p = ProofGraph(RelationKind.BI, (ProofNode(Judgment.REL, (term('a'), term('C(a)')), Split((step,))),))
        self.assertEqual(validate(p, rules).codes, {ViolationCode.BAD_DIRECTION})
        self.assertTrue(validate(dataclasses.replace(p, kind=RelationKind.IEQ), rules).ok)

    def test_local_rule_violations(self):
        rules = trs('C(a) -> a')
        builder = CertificateBuilder(RelationKind.BI)
        builder.add(ProofNode(Judgment.REL, (term('f(a,b)'), term('f(a,a)')), Split((LiftItem(1),))))
        builder.add(ProofNode(Judgment.DOWN, (term('f(a,b)'), term('f(a,a)')), Lift((2, 3))))
        builder.add(ProofNode(Judgment.REL, (term('a'), term('a')), Split((LiftItem(4),))))
        builder.add(ProofNode(Judgment.REL, (term('b'), term('a')), Split((LiftItem(5),))))
        builder.add(ProofNode(Judgment.DOWN, (term('a'), term('a')), Identity()))
        builder.add(ProofNode(Judgment.DOWN, (term('b'), term('a')), Identity()))
        report = validate(builder.build(), rules)
        self.assertEqual(report.codes, {ViolationCode.NOT_BISIMILAR})

        p = ProofGraph(RelationKind.BI, (
            ProofNode(Judgment.DOWN, (term('f(a,b)'), term('g(a,b)')), Lift(())),
            ProofNode(Judgment.DOWN, (term('C(a)'), term('C(a)')), Lift((7,))),
            ProofNode(Judgment.DOWN, (term('C(a)'), term('C(b)')), Lift((0,))),
            ProofNode(Judgment.REL, (term('a'), term('a')), Identity()),
        ))
        codes = validate(p, rules).codes
        self.assertLessEqual(
            {ViolationCode.ROOT_SYMBOL_MISMATCH, ViolationCode.DANGLING_EDGE, ViolationCode.WRONG_JUDGMENT,
             ViolationCode.ARGUMENT_MISMATCH, ViolationCode.WRONG_RULE},
            codes,
        )

    def test_marked_lift_rules(self):
        p = certificate('f(a,b)', 'D', RelationKind.IRED, NON_LINEAR)
        root = p.nodes[p.root]
        marked = p.nodes[root.rule.items[0].node]
        unmarked = dataclasses.replace(p, nodes=tuple(
            dataclasses.replace(n, judgment=Judgment.DOWN) if n is marked else n for n in p.nodes
        ))
        self.assertIn(ViolationCode.UNMARKED_INNER_LIFT, validate(unmarked, trs(NON_LINEAR)).codes)
        as_bi = dataclasses.replace(p, kind=RelationKind.BI)
        self.assertIn(ViolationCode.MARKED_LIFT_OUTSIDE_IRED, validate(as_bi, trs(NON_LINEAR)).codes)

    def test_search_certificates_are_guarded(self):
        for rules, u in corpus(size=10):
            R = decide_ired(u)
            for i, j in list(R)[:6]:
                verdict = search_proof(u.terms[i], u.terms[j], RelationKind.IRED, rules, SATURATING)
                self.assertTrue(verdict.is_proved)
                self.assertTrue(is_guarded(verdict.certificate))
                self.assertIsNotNone(nesting_depth(verdict.certificate))


class ExtractPrefixTests(SimpleTestCase):
    def test_omega_reduction_prefix(self):
        p = certificate('a', CW, RelationKind.IRED, NON_LINEAR)
        reduction = extract_prefix(p, trs(NON_LINEAR), 2)
        self.assertEqual([s.position for s in reduction.steps], [(), (1,)])
        self.assertEqual(reduction.end, term('C(C(a))'))
        self.assertEqual(str(truncate(reduction.end, 2)), 'C(C(#))')

    def test_depth_zero_is_empty(self):
        p = certificate('f(a,b)', 'D', RelationKind.IRED, NON_LINEAR)
        self.assertEqual(len(extract_prefix(p, trs(NON_LINEAR), 0)), 0)

    def test_non_left_linear_redex_is_never_reached(self):
        p = certificate('f(a,b)', 'D', RelationKind.IRED, NON_LINEAR)
        with self.assertRaises(PrefixUnavailable):
            extract_prefix(p, trs(NON_LINEAR), 1)

    def test_only_rewriting_certificates(self):
        p = certificate(CW, 'a', RelationKind.IEQ, 'C(a) = a')
        with self.assertRaises(InvalidCertificate):
            extract_prefix(p, trs('C(a) = a'), 2)

    def test_monotone_refinement(self):
        p = certificate('a', CW, RelationKind.IRED, NON_LINEAR)
        ends = [extract_prefix(p, trs(NON_LINEAR), n).end for n in range(1, 8)]
        for n, (shorter, longer) in enumerate(zip(ends, ends[1:]), 1):
            self.assertEqual(truncate(shorter, n), truncate(longer, n))

    def test_corpus_prefixes_replay(self):
        for rules, u in corpus(size=15):
            R = decide_ired(u)
            for i, j in [pair for pair in R if pair[0] != pair[1]][:4]:
                p = search_proof(u.terms[i], u.terms[j], RelationKind.IRED, rules, SATURATING).certificate
                for n in range(9):
                    reduction = extract_prefix(p, rules, n)
                    self.assertEqual(reduction.terms(rules)[-1], reduction.end)
                    self.assertEqual(truncate(reduction.end, n), truncate(u.terms[j], n), f"{p.goal} at {n}")


class SerializerTests(SimpleTestCase):
    def test_round_trip(self):
        for s, t, kind, rules in (
            (CW, 'a', RelationKind.IEQ, 'C(a) = a'),
            ('f(a,b)', 'D', RelationKind.IRED, NON_LINEAR),
        ):
            p = certificate(s, t, kind, rules)
            text = dump(p)
            self.assertEqual(load(text), p)
            self.assertEqual(validate(load(text), trs(rules)).ok, validate(p, trs(rules)).ok)
            self.assertEqual(dump(load(text)), text)

    def test_document_shape(self):
        doc = json.loads(dump(certificate('a', CW, RelationKind.IRED, NON_LINEAR)))
        self.assertEqual(doc['kind'], 'ired')
        self.assertEqual(set(doc), {'kind', 'variables', 'terms', 'nodes', 'root'})
        step = doc['nodes'][0]['premise'][0]['step']
        self.assertEqual((step['rule_index'], step['direction']), (1, 'fwd'))

    def test_rejects_malformed_documents(self):
        with self.assertRaises(InvalidCertificate):
            load('{"kind": "ired"}')
        with self.assertRaises(InvalidCertificate):
            load('{"kind": "ired", "terms": ["a"], "nodes": [], "root": 0, "extra": 1}')
        with self.assertRaises(InvalidCertificate):
            load('{"kind": "ired", "terms": ["a"], "root": 0,'
                 ' "nodes": [{"judgment": "down", "goal": [0, 3], "rule": "id"}]}')
        with self.assertRaises(InvalidCertificate):
            load('{"kind": "ired", "terms": ["f(a"], "nodes": [], "root": 0}')
        with self.assertRaises(InvalidCertificate):
            load('{"kind": "ired", "terms": ["a"], "root": 0, "nodes": [{"judgment": "rel", "goal": [0, 0],'
                 ' "rule": "split", "premise": [{"lift": 0, "step": {"rule_index": 0, "source": 0, "target": 0}}]}]}')


class DotTests(SimpleTestCase):
    def test_marked_lifts_are_drawn_distinctly(self):
        p = certificate('f(a,b)', 'D', RelationKind.IRED, NON_LINEAR)
        g = to_graph(p)
        self.assertEqual(g.number_of_nodes(), len(p.nodes))
        dashed = [n for n, data in g.nodes(data=True) if data.get('style') == 'dashed']
        self.assertEqual(len(dashed), p.count(Judgment.DOWN_FIN))
        text = to_dot(p)
        self.assertIn('digraph certificate {', text)
        self.assertEqual(text.count('style=dashed'), len(dashed))
        self.assertIn('->eps[0]', text)

    def test_every_node_is_drawn(self):
        p = certificate(CW, 'a', RelationKind.IEQ, 'C(a) = a')
        text = to_dot(p)
        self.assertNotIn('dashed', text)
        for index in range(len(p.nodes)):
            self.assertRegex(text, rf'\bn{index} \[')
        self.assertEqual(to_graph(p).number_of_edges(), len(list(p.edges())))

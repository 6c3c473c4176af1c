import dataclasses

from django.test import SimpleTestCase

from common.exceptions import InvalidCertificate, NotLeftLinear
from compression.ored import STOP, OredCertificate, compress, emit_steps, validate_ored
from compression.serializers import dump, load
from proofs.validation import ViolationCode
from relations.search import SearchBudget, search_proof
from relations.solvers import decide_ired
from relations.tests import corpus
from relations.universe import RelationKind
from rewriting.parser import parse_trs
from rewriting.reductions import FiniteReduction, ReductionStep
from terms.syntax import parse_term

CW = 'rec X = C(X) in X'
NON_LINEAR = "f(x,x) -> D\na -> C(a)\nb -> C(b)\n"


def term(text):
    return parse_term(text)


def trs(text):
    return parse_trs(text).trs


def compressed(s, t, rules):
    rules = trs(rules)
    verdict = search_proof(term(s), term(t), RelationKind.IRED, rules)
    return compress(verdict.certificate, rules), rules


class CompressTests(SimpleTestCase):
    def test_omega_reduction(self):
        o, rules = compressed('a', CW, 'a -> C(a)')
        root = o.nodes[o.root]
        self.assertEqual([s.position for s in root.head.steps], [()])
        self.assertEqual(root.children, (o.root,))
        self.assertFalse(o.is_finite())

    def test_long_root_segment_is_replayed(self):
        chain = '\n'.join(['a -> b1'] + [f'b{i} -> b{i + 1}' for i in range(1, 9)] + ['b9 -> C(a)'])
        rules = trs(chain)
        verdict = search_proof(term('a'), term(CW), RelationKind.IRED, rules, SearchBudget(max_split=12))
        self.assertTrue(verdict.is_proved)
        o = compress(verdict.certificate, rules)
        root = o.nodes[o.root]
        self.assertEqual(len(root.head), 10)
        self.assertEqual(root.children, (o.root,))
        self.assertTrue(validate_ored(o, rules, 6).ok)

    def test_argument_reduction_runs_before_the_root_step(self):
        o, rules = compressed('C(a)', 'D', 'a -> b\nC(b) -> D')
        root = o.nodes[o.root]
        self.assertEqual([(s.position, s.rule_index) for s in root.head.steps], [((1,), 0), ((), 1)])
        self.assertEqual(root.children, ())
        self.assertTrue(validate_ored(o, rules, 4).ok)

    def test_pending_reduction_moves_with_the_substitution(self):
        o, rules = compressed('f(a)', 'g(rec X = C(X) in X)', 'a -> C(a)\nf(x) -> g(x)')
        self.assertTrue(validate_ored(o, rules, 8).ok)
        self.assertFalse(o.is_finite())
        self.assertEqual(emit_steps(o, 3).replay(rules)[-1], term('g(C(C(a)))'))

    def test_non_left_linear_system_is_rejected(self):
        rules = trs(NON_LINEAR)
        p = search_proof(term('f(a,b)'), term('D'), RelationKind.IRED, rules).certificate
        with self.assertRaises(NotLeftLinear):
            compress(p, rules)

    def test_identity_certificate(self):
        o, _ = compressed('f(a,b)', 'f(a,b)', 'a -> C(a)')
        self.assertEqual(len(o.nodes), 1)
        self.assertEqual(len(o.nodes[0].head), 0)
        self.assertEqual(o.nodes[0].children, (STOP, STOP))

    def test_only_rewriting_certificates(self):
        rules = trs('C(a) = a')
        p = search_proof(term(CW), term('a'), RelationKind.IEQ, rules).certificate
        with self.assertRaises(InvalidCertificate):
            compress(p, rules)

    def test_corpus_certificates_compress(self):
        budget = SearchBudget(max_split=64)
        for rules, u in corpus(size=15):
            R = decide_ired(u)
            for i, j in [pair for pair in R if pair[0] != pair[1]][:3]:
                p = search_proof(u.terms[i], u.terms[j], RelationKind.IRED, rules, budget).certificate
                o = compress(p, rules)
                self.assertTrue(validate_ored(o, rules, 8).ok, f"{p.goal} under {rules}")
                stream = emit_steps(o, 32)
                self.assertEqual(stream.replay(rules)[0], u.terms[i])
                levels = [e.level for e in stream.steps]
                self.assertEqual(levels, sorted(levels))
                for emitted in stream.steps:
                    self.assertGreaterEqual(len(emitted.step.position), emitted.level)

    def test_corpus_with_variables_compresses(self):
        budget = SearchBudget(max_split=64)
        for rules, u in corpus(size=15, open_rules=True):
            R = decide_ired(u)
            for i, j in [pair for pair in R if pair[0] != pair[1]][:3]:
                p = search_proof(u.terms[i], u.terms[j], RelationKind.IRED, rules, budget).certificate
                o = compress(p, rules)
                self.assertTrue(validate_ored(o, rules, 8).ok, f"{p.goal} under {rules}")
                self.assertEqual(emit_steps(o, 16).replay(rules)[0], u.terms[i])


class EmitStepsTests(SimpleTestCase):
    def test_first_three_steps(self):
        o, rules = compressed('a', CW, 'a -> C(a)')
        stream = emit_steps(o, 3)
        self.assertEqual([e.step.position for e in stream.steps], [(), (1,), (1, 1)])
        self.assertEqual(stream.replay(rules)[-1], term('C(C(C(a)))'))

    def test_zero_steps(self):
        o, _ = compressed('a', CW, 'a -> C(a)')
        self.assertEqual(len(emit_steps(o, 0)), 0)

    def test_finite_reduction_is_exhausted(self):
        o, rules = compressed('a', 'c', 'a -> b\nb -> c')
        self.assertEqual(o.nodes[o.root].children, ())
        self.assertTrue(o.is_finite())
        stream = emit_steps(o, 5)
        self.assertEqual(len(stream), 2)
        self.assertEqual(stream.replay(rules)[-1], term('c'))


class ValidateOredTests(SimpleTestCase):
    def test_compressed_omega_reduction_is_valid(self):
        o, rules = compressed('a', CW, 'a -> C(a)')
        self.assertTrue(validate_ored(o, rules, 8).ok)

    def test_bad_step(self):
        o, rules = compressed('a', CW, 'a -> C(a)')
        root = o.nodes[o.root]
        bogus = FiniteReduction(root.start, (ReductionStep((1,), 0),))
        broken = OredCertificate((dataclasses.replace(root, head=bogus),), o.root)
        self.assertIn(ViolationCode.BAD_STEP, validate_ored(broken, rules, 4).codes)

    def test_child_arity(self):
        o, rules = compressed('a', CW, 'a -> C(a)')
        root = o.nodes[o.root]
        broken = OredCertificate((dataclasses.replace(root, children=(0, 0)),), o.root)
        self.assertEqual(validate_ored(broken, rules, 4).codes, {ViolationCode.ARITY_MISMATCH})

    def test_stopped_argument_must_match_target(self):
        o, rules = compressed('f(a,b)', 'f(a,b)', 'a -> C(a)')
        node = dataclasses.replace(o.nodes[0], children=(STOP, STOP))
        self.assertTrue(validate_ored(OredCertificate((node,)), rules, 3).ok)
        node = dataclasses.replace(node, target=term('f(a,a)'))
        self.assertEqual(validate_ored(OredCertificate((node,)), rules, 3).codes, {ViolationCode.NOT_BISIMILAR})


class SerializerTests(SimpleTestCase):
    def test_round_trip(self):
        o, rules = compressed('a', CW, 'a -> C(a)')
        text = dump(o)
        self.assertEqual(load(text), o)
        self.assertTrue(validate_ored(load(text), rules, 4).ok)

    def test_rejects_unknown_fields(self):
        with self.assertRaises(InvalidCertificate):
            load('{"terms": ["a"], "nodes": [], "root": 0, "kind": "ired"}')
        with self.assertRaises(InvalidCertificate):
            load('{"terms": ["a"], "nodes": [{"start": 0, "target": 4}], "root": 0}')

#!/usr/bin/env python3
"""
Test Suite for the type algebra and the checkers
"""

import json
import os
import unittest

from hypothesis import given, settings, strategies as st

from ramrec_errors import ProgramNotFound, TypeCheckError
from ramrec_program import RamrecProgram
from ramrec_terms import Lam, ToNorm, Var
from ramrec_typecheck import TypeChecker, judge, typecheck
from ramrec_types import (
    NAT, UNIT, Arrow, Calculus, ConstF, IdF, MuT, ProdF, ProdT, SumF, SumT, Tier,
    UnitT, apply_functor, classify, degree, format_type, functor_size, id_count,
    is_hereditarily_sequential, is_inhabited, is_normal, is_safe, norm, safe, tier,
    unfold, vertex_bound_constant,
)

PROGRAMS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'programs')

TREE = MuT(SumF(ConstF(UNIT), ProdF(IdF(), IdF())))
NAT_LIST = MuT(SumF(ConstF(UNIT), ProdF(ConstF(NAT), IdF())))


def ground_types():
    """Small ground types built from unit, nat and tree"""
    base = st.sampled_from([UNIT, NAT, TREE, NAT_LIST])
    return st.recursive(base, lambda inner: st.one_of(
        st.builds(SumT, inner, inner), st.builds(ProdT, inner, inner)), max_leaves=4)


class TestTypeAlgebra(unittest.TestCase):
    """Test cases for functors and ground types"""

    def test_apply_functor(self):
        """Test P(X) for the nat functor"""
        self.assertEqual(apply_functor(NAT.functor, NAT), SumT(UNIT, NAT))
        self.assertEqual(unfold(TREE), SumT(UNIT, ProdT(TREE, TREE)))

    def test_unfold_safe(self):
        """Test that a safe datatype unfolds to a safe body"""
        self.assertEqual(unfold(safe(NAT)), SumT(UnitT(True), safe(NAT)))

    def test_degree_and_size(self):
        """Test functor measures"""
        self.assertEqual(degree(NAT.functor), 1)
        self.assertEqual(degree(TREE.functor), 2)
        self.assertEqual(functor_size(TREE.functor), 5)
        self.assertEqual(id_count(TREE.functor), 2)
        self.assertEqual(id_count(NAT_LIST.functor), 1)

    def test_classification(self):
        """Test sequential and branching classification"""
        self.assertTrue(classify(NAT).hereditarily_sequential)
        self.assertTrue(classify(NAT_LIST).sequential)
        self.assertTrue(classify(TREE).branching)
        self.assertFalse(is_hereditarily_sequential(ProdT(NAT, TREE)))
        self.assertEqual(classify(ProdT(NAT, safe(NAT))).tier, Tier.MIXED)

    def test_inhabitation(self):
        """Test that mu X. X has no values while nat does"""
        self.assertTrue(is_inhabited(NAT))
        self.assertFalse(is_inhabited(MuT(IdF())))
        self.assertFalse(is_inhabited(MuT(ProdF(ConstF(NAT), IdF()))))
        self.assertTrue(is_inhabited(SumT(MuT(IdF()), UNIT)))

    def test_tiers(self):
        """Test normal, safe and mixed types"""
        self.assertTrue(is_normal(ProdT(NAT, UNIT)))
        self.assertTrue(is_safe(safe(ProdT(NAT, UNIT))))
        self.assertEqual(tier(ProdT(NAT, safe(NAT))), Tier.MIXED)

    def test_format_type(self):
        """Test canonical strings and declared aliases"""
        self.assertEqual(format_type(NAT), "mu t0. unit + t0")
        self.assertEqual(format_type(TREE), "mu t0. unit + t0 * t0")
        self.assertEqual(format_type(safe(NAT), {NAT: 'nat'}), "safe nat")
        self.assertEqual(format_type(Arrow(ProdT(safe(NAT), NAT), safe(NAT)), {NAT: 'nat'}),
                         "safe nat * nat -> safe nat")
        self.assertEqual(format_type(NAT_LIST), "mu t0. unit + (mu t1. unit + t1) * t0")

    def test_vertex_bound_constant(self):
        """Test that unit and nat need small constants"""
        self.assertEqual(vertex_bound_constant(UNIT), 1)
        self.assertEqual(vertex_bound_constant(NAT), 3)

    @given(ground_types())
    @settings(max_examples=100)
    def test_norm_and_safe(self, gamma):
        """Test that norm undoes safe and both are idempotent"""
        self.assertEqual(norm(safe(gamma)), norm(gamma))
        self.assertEqual(safe(safe(gamma)), safe(gamma))
        self.assertTrue(is_safe(safe(gamma)))
        self.assertTrue(is_normal(norm(gamma)))


class TestTypeChecker(unittest.TestCase):
    """Test cases for the S1, RS1 and RS1.1 checkers"""

    def load(self, source: str) -> RamrecProgram:
        return RamrecProgram(source)

    def test_plus_prime_signature(self):
        """Test plus' : safe nat * nat -> safe nat"""
        program = RamrecProgram.from_file(os.path.join(PROGRAMS, 'plus_prime.s1'))
        self.assertEqual(program.describe("plus'"), "plus' : safe nat * nat -> safe nat")

    def test_corpus_judgments(self):
        """Test that every corpus program has the types in its sidecar"""
        for filename in sorted(os.listdir(PROGRAMS)):
            if not filename.endswith('.s1'):
                continue
            program = RamrecProgram.from_file(os.path.join(PROGRAMS, filename))
            with open(os.path.join(PROGRAMS, filename[:-3] + '.expected.json'), encoding='utf-8') as f:
                expected = json.load(f)
            self.assertEqual(program.level.value, expected['calculus'])
            for name, text in expected['judgments'].items():
                self.assertEqual(program.format_type(program.judgment(name).type), text, f"{filename}:{name}")

    def test_negative_programs(self):
        """Test that each rejected program fails with its recorded code"""
        negative = os.path.join(PROGRAMS, 'negative')
        for filename in sorted(f for f in os.listdir(negative) if f.endswith('.s1')):
            with open(os.path.join(negative, filename[:-3] + '.expected.json'), encoding='utf-8') as f:
                code = json.load(f)['error']
            with self.assertRaises(TypeCheckError) as caught:
                RamrecProgram.from_file(os.path.join(negative, filename))
            self.assertEqual(caught.exception.code, code, filename)

    def test_level_violation(self):
        """Test that toSafe is rejected in an S1 program"""
        with self.assertRaises(TypeCheckError) as caught:
            self.load("datatype nat = Zero | Succ of nat\nmain = toSafe 1")
        self.assertEqual(caught.exception.code, 'LevelViolation')

    def test_cs_needs_rs1_1(self):
        """Test that cs is rejected below RS1.1"""
        with self.assertRaises(TypeCheckError) as caught:
            self.load("%calculus rs1\ndatatype nat = Zero | Succ of nat\nmain = cs[nat] 3")
        self.assertEqual(caught.exception.code, 'LevelViolation')

    def test_fold_result_must_be_safe(self):
        """Test that a ramified fold cannot return normal data"""
        source = ("%calculus rs1\ndatatype nat = Zero | Succ of nat\n"
                  "def double = fn (x : nat) => fold[nat] (fn (w : unit + nat) => "
                  "case w of inl u => 0 | inr r => Succ (Succ r)) x\n")
        with self.assertRaises(TypeCheckError):
            self.load(source)

    def test_same_fold_in_s1(self):
        """Test that the unramified double is accepted in S1"""
        source = ("%calculus s1\ndatatype nat = Zero | Succ of nat\n"
                  "def double = fn (x : nat) => fold[nat] (fn (w : unit + nat) => "
                  "case w of inl u => 0 | inr r => Succ (Succ r)) x\n")
        program = self.load(source)
        self.assertEqual(program.describe('double'), "double : nat -> nat")

    def test_uninhabited_datatype(self):
        """Test that a datatype without a base case is rejected"""
        with self.assertRaises(TypeCheckError) as caught:
            self.load("datatype stream = More of stream")
        self.assertEqual(caught.exception.code, 'UninhabitedType')

    def test_mismatch(self):
        """Test a plain type mismatch"""
        with self.assertRaises(TypeCheckError) as caught:
            self.load("datatype nat = Zero | Succ of nat\ndef f = fn (x : nat) => fst x")
        self.assertEqual(caught.exception.code, 'TypeMismatch')

    def test_disabled_condition(self):
        """Test that switching off the toNorm condition accepts the leak"""
        context = [('y', safe(NAT))]
        with self.assertRaises(TypeCheckError):
            typecheck(Calculus.RS1, context, ToNorm(Var('y')))
        self.assertEqual(typecheck(Calculus.RS1, context, ToNorm(Var('y')), disabled_conditions={'to_norm'}), NAT)

    def test_judgment_open(self):
        """Test that opening a function judgment binds its argument"""
        fn = Lam('x', Var('x'), NAT)
        judgment = judge(Calculus.S1, [], fn, 'id')
        self.assertEqual(judgment.type, Arrow(NAT, NAT))
        opened = judgment.open()
        self.assertEqual(opened.context, [('x', NAT)])
        self.assertEqual(opened.type, NAT)
        self.assertIn("x : mu t0. unit + t0", opened.format())

    def test_checker_fills_types(self):
        """Test that checking records each subterm's type"""
        fn = Lam('x', Var('x'), NAT)
        TypeChecker(Calculus.S1).typecheck([], fn)
        self.assertEqual(fn.body.ty, NAT)
        self.assertEqual(fn.ty, Arrow(NAT, NAT))


class TestProgram(unittest.TestCase):
    """Test cases for loading programs"""

    def test_missing_file(self):
        """Test that a missing file raises FileNotFound"""
        with self.assertRaises(ProgramNotFound) as caught:
            RamrecProgram.from_file('missing.s1')
        self.assertEqual(caught.exception.code, 'FileNotFound')

    def test_functions_and_ground(self):
        """Test that definitions split into functions and ground terms"""
        program = RamrecProgram.from_file(os.path.join(PROGRAMS, 'height_grow.s1'))
        self.assertIn('height', program.functions())
        self.assertEqual(program.ground(), ['small', 'main'])
        self.assertEqual(program.label, 'height_grow.s1')


if __name__ == '__main__':
    unittest.main(verbosity=2)

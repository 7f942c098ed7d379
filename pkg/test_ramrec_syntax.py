#!/usr/bin/env python3
"""
Test Suite for the surface language
Parsing, desugaring, pretty printing and the pretty/parse roundtrip
"""

import os
import unittest

from ramrec_errors import DesugarError, ParseError
from ramrec_syntax import desugar, desugar_with_names, parse, parse_type, pretty
from ramrec_terms import (
    App, Con, Fold, Inj, Lam, Pair, Proj, SafeCon, Unit, Var, alpha_equivalent,
)
from ramrec_types import NAT, UNIT, Calculus, ConstF, IdF, MuT, ProdF, SumF, SumT, format_type, safe

PROGRAMS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'programs')

NAT_DECL = "datatype nat = Zero | Succ of nat\n"
TREE_DECL = NAT_DECL + "datatype tree = Leaf | Branch of tree * tree\n"
LIST_DECL = NAT_DECL + "datatype natlist = Empty | Cons of nat * natlist\n"


def core(source: str, name: str = 'main'):
    terms, _ = desugar(parse(source))
    return terms[name]


class TestParse(unittest.TestCase):
    """Test cases for parse"""

    def test_nat_declaration(self):
        """Test that nat is read as mu(C_unit + Id)"""
        program = parse(NAT_DECL)
        _, datatypes = desugar(program)
        self.assertEqual(datatypes['nat'], NAT)
        self.assertEqual(datatypes['nat'], MuT(SumF(ConstF(UNIT), IdF())))

    def test_empty_file(self):
        """Test that an empty file is an empty program without main"""
        program = parse("")
        self.assertEqual(program.datatype_decls, [])
        self.assertEqual(program.defs, [])
        self.assertIsNone(program.main)

    def test_pragma(self):
        """Test that the pragma selects the calculus"""
        self.assertEqual(parse("%calculus rs1.1\n").calculus_level, Calculus.RS1_1)
        self.assertEqual(parse("%calculus rs1\n").calculus_level, Calculus.RS1)
        self.assertEqual(parse("").calculus_level, Calculus.S1)

    def test_malformed_declaration(self):
        """Test that a constructor without its argument type is a parse error"""
        with self.assertRaises(ParseError) as caught:
            parse("datatype t = A of")
        self.assertEqual(caught.exception.code, 'ParseError')

    def test_parse_error_position(self):
        """Test that parse errors carry a line and column"""
        with self.assertRaises(ParseError) as caught:
            parse(NAT_DECL + "main = fn =>")
        self.assertEqual(caught.exception.line, 2)
        self.assertIsNotNone(caught.exception.column)

    def test_duplicate_names(self):
        """Test that datatypes, constructors and defs must be unique"""
        cases = [
            NAT_DECL + NAT_DECL,
            NAT_DECL + "datatype other = Zero\n",
            NAT_DECL + "def a = 0\ndef a = 1\n",
        ]
        for source in cases:
            with self.assertRaises(ParseError) as caught:
                parse(source)
            self.assertEqual(caught.exception.code, 'DuplicateName')

    def test_comments_are_ignored(self):
        """Test that block comments may appear between declarations"""
        program = parse("(* numbers *)\n" + NAT_DECL + "(* zero *) main = 0")
        self.assertIsNotNone(program.main)


class TestDesugar(unittest.TestCase):
    """Test cases for desugar"""

    def test_zero(self):
        """Test that Zero becomes Con_nat(inl ())"""
        self.assertEqual(core(NAT_DECL + "main = Zero"), Con(NAT, Inj(1, Unit())))

    def test_numeral(self):
        """Test that numerals become Succ chains ending in Zero"""
        three = core(NAT_DECL + "main = 3")
        depth = 0
        while three.body.index == 2:
            depth += 1
            three = three.body.body
        self.assertEqual(depth, 3)
        self.assertEqual(three, Con(NAT, Inj(1, Unit())))
        self.assertEqual(core(NAT_DECL + "main = 0"), Con(NAT, Inj(1, Unit())))

    def test_let_becomes_application(self):
        """Test that let t = e in Branch (t, t) is ((fn t => Branch (t, t)) e)"""
        term = core(TREE_DECL + "main = let t = Leaf in Branch (t, t)")
        self.assertIsInstance(term, App)
        self.assertIsInstance(term.fn, Lam)
        self.assertEqual(term.fn.name, 't')
        tree = term.fn.body.datatype
        self.assertEqual(term.fn.body, Con(tree, Inj(2, Pair(Var('t'), Var('t')))))

    def test_constructor_chain(self):
        """Test the right-nested injections of a three-constructor datatype"""
        source = "datatype three = A | B | C\n"
        a, b, c = (core(source + f"main = {name}") for name in 'ABC')
        self.assertEqual(a.body, Inj(1, Unit()))
        self.assertEqual(b.body, Inj(2, Inj(1, Unit())))
        self.assertEqual(c.body, Inj(2, Inj(2, Unit())))

    def test_list_literal(self):
        """Test that [1] is Cons (1, Empty)"""
        term = core(LIST_DECL + "main = [1]")
        same = core(LIST_DECL + "main = 1 :: []")
        self.assertTrue(alpha_equivalent(term, same))
        self.assertIsInstance(term.body, Inj)
        self.assertIsInstance(term.body.body, Pair)

    def test_tuple_pattern(self):
        """Test that a tuple binder projects out of a fresh variable"""
        term = core(NAT_DECL + "def f = fn ((a, b) : nat * nat) => Succ b", 'f')
        self.assertIsInstance(term, Lam)
        self.assertTrue(term.name.startswith('_'))
        outer = term.body
        self.assertIsInstance(outer, App)
        self.assertEqual(outer.arg, Proj(1, Var(term.name)))

    def test_safe_constructor(self):
        """Test that safe Zero builds a safe constructor over safe ()"""
        term = core("%calculus rs1\n" + NAT_DECL + "main = safe Zero")
        self.assertEqual(term, SafeCon(NAT, Inj(1, Unit(safe=True))))

    def test_definitions_are_inlined(self):
        """Test that a def is copied into every use"""
        terms, _ = desugar(parse(NAT_DECL + "def one = 1\nmain = (one, one)"))
        main = terms['main']
        self.assertTrue(alpha_equivalent(main.first, terms['one']))
        self.assertIsNot(main.first, main.second)

    def test_unknown_constructor(self):
        """Test UnknownConstructor for an undeclared constructor"""
        with self.assertRaises(DesugarError) as caught:
            core(NAT_DECL + "main = Nil")
        self.assertEqual(caught.exception.code, 'UnknownConstructor')

    def test_unknown_datatype(self):
        """Test UnknownDatatype for an undeclared type name"""
        with self.assertRaises(DesugarError) as caught:
            core(NAT_DECL + "def f = fn (x : list) => x", 'f')
        self.assertEqual(caught.exception.code, 'UnknownDatatype')

    def test_unbound_identifier(self):
        """Test UnboundIdentifier for a free variable"""
        with self.assertRaises(DesugarError) as caught:
            core(NAT_DECL + "main = Succ y")
        self.assertEqual(caught.exception.code, 'UnboundIdentifier')

    def test_recursive_definition(self):
        """Test that definitions may not refer to themselves"""
        with self.assertRaises(DesugarError) as caught:
            core(NAT_DECL + "def f = fn (x : nat) => f x\nmain = 0")
        self.assertEqual(caught.exception.code, 'RecursiveDefinition')

    def test_numerals_need_nat(self):
        """Test that numerals without a nat declaration are rejected"""
        with self.assertRaises(DesugarError):
            core("datatype unary = Z | S of unary\nmain = 2")


class TestParseType(unittest.TestCase):
    """Test cases for type expressions"""

    def test_canonical_string(self):
        """Test that canonical strings parse back to the same type"""
        tree = MuT(SumF(ConstF(UNIT), ProdF(IdF(), IdF())))
        for gamma in (NAT, tree, safe(NAT)):
            self.assertEqual(parse_type(format_type(gamma)), gamma)

    def test_declared_names(self):
        """Test that declared datatype names may be used"""
        _, names = desugar_with_names(parse(TREE_DECL))
        self.assertEqual(parse_type("safe nat * tree", names).left, safe(NAT))


class TestPretty(unittest.TestCase):
    """Test cases for pretty"""

    def setUp(self):
        _, self.names = desugar_with_names(parse(TREE_DECL))

    def test_constructor_names(self):
        """Test that constructors are printed by name when declared"""
        self.assertEqual(pretty(Con(NAT, Inj(1, Unit())), self.names), "0")
        tree = self.names.datatypes['tree']
        self.assertEqual(pretty(Con(tree, Inj(1, Unit())), self.names), "Leaf")

    def test_identity(self):
        """Test fn x => x"""
        self.assertEqual(pretty(Lam('x', Var('x'))), "fn x => x")

    def test_fold(self):
        """Test that folds print with their datatype and step"""
        step = Lam('w', Var('w'), SumT(UNIT, NAT))
        text = pretty(Fold(NAT, step, Var('y')), self.names)
        self.assertEqual(text, "fold[nat] (fn (w : unit + nat) => w) y")

    def test_without_names(self):
        """Test the raw constructor form when no datatype is declared"""
        self.assertEqual(pretty(Con(NAT, Inj(1, Unit()))), "con[mu t0. unit + t0] (inl ())")


class TestRoundtrip(unittest.TestCase):
    """Test that every corpus definition survives pretty and parse"""

    def test_corpus_roundtrip(self):
        """Test desugar(parse(pretty(t))) is alpha-equivalent to t"""
        checked = 0
        for filename in sorted(os.listdir(PROGRAMS)):
            if not filename.endswith('.s1'):
                continue
            with open(os.path.join(PROGRAMS, filename), encoding='utf-8') as f:
                source = f.read()
            header = '\n'.join(line for line in source.splitlines()
                               if line.startswith('%calculus') or line.startswith('datatype'))
            terms, names = desugar_with_names(parse(source))
            for name, term in terms.items():
                text = pretty(term, names)
                again = core(f"{header}\nmain = {text}\n")
                self.assertTrue(alpha_equivalent(again, term), f"{filename}:{name} -> {text}")
                checked += 1
        self.assertGreater(checked, 10)


if __name__ == '__main__':
    unittest.main(verbosity=2)

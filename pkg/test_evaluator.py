#!/usr/bin/env python3
"""
Test Suite for the big-step evaluator
Top-down and memoizing fold strategies, cost metering and sharing
"""

import json
import os
import unittest

from evaluator import (
    SEMANTICS, CostMeter, Environment, Evaluator, apply_function, cost_dp, cost_td,
    describe_meter, evaluate, reduce_functor,
)
from ramrec_errors import EvaluationError, HeapInvariantError, RamrecError, StepBudgetExceeded
from ramrec_program import RamrecProgram
from ramrec_terms import Lam, Var
from ramrec_types import NAT, ConstF, IdF
from value_generators import ValueGenerator
from value_heap import (
    Heap, bisimilar, isomorphic, numeral, read_numeral, size, total_vertices, tree_size,
)

PROGRAMS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'programs')

COPY_SOURCE = """%calculus s1
datatype nat = Zero | Succ of nat

def copy = fn (n : nat) =>
  fold[nat] (fn (w : unit + nat) => case w of inl u => 0 | inr r => Succ r) n
"""

COERCE_SOURCE = """%calculus rs1
datatype nat = Zero | Succ of nat

def up = fn (x : nat) => toSafe x
def round_trip = fn (x : nat) => toNorm (toSafe x)
"""


def load(filename: str) -> RamrecProgram:
    return RamrecProgram.from_file(os.path.join(PROGRAMS, filename))


def run_main(filename: str, semantics: str = 'dp', meter=None):
    program = load(filename)
    return evaluate(program.judgment('main').subject, Environment(), semantics, meter)


class TestResults(unittest.TestCase):
    """Test cases for the values programs compute"""

    def test_arithmetic(self):
        """Test plus', times' and sum_list under both strategies"""
        for semantics in ('td', 'dp'):
            self.assertEqual(read_numeral(run_main('plus_prime.s1', semantics)), 5)
            self.assertEqual(read_numeral(run_main('times_prime.s1', semantics)), 12)
            self.assertEqual(read_numeral(run_main('sum_list.s1', semantics)), 6)

    def test_compressed_size(self):
        """Test that cs of the four-leaf tree is 3 and is metered"""
        meter = CostMeter()
        v = run_main('compressed_size.s1', 'dp', meter)
        self.assertEqual(read_numeral(v), 3)
        self.assertGreater(meter.cs_nodes, 0)

    def test_grow_keeps_sharing(self):
        """Test that grow m has m+1 constructors and a 2^(m+1)-1 unfolding"""
        grow = load('grow.s1').function('grow')
        for semantics in ('td', 'dp'):
            for m in range(8):
                v = apply_function(grow, numeral(Heap(), m), semantics)
                self.assertEqual(size(v), m + 1)
                self.assertEqual(tree_size(v), 2 ** (m + 1) - 1)

    def test_strategies_agree(self):
        """Test that td and dp give bisimilar values on every ground definition"""
        for filename in sorted(os.listdir(PROGRAMS)):
            if not filename.endswith('.s1'):
                continue
            with open(os.path.join(PROGRAMS, filename[:-3] + '.expected.json'), encoding='utf-8') as f:
                skipped = set(json.load(f).get('td_skip', []))
            program = load(filename)
            for name in program.ground():
                if name in skipped:
                    continue
                subject = program.judgment(name).subject
                td = evaluate(subject, Environment(), 'td')
                dp = evaluate(subject, Environment(), 'dp')
                self.assertTrue(bisimilar(td, dp), f"{filename}:{name}")

    def test_height_of_grow(self):
        """Test height(grow m) = m with the memoizing strategy"""
        program = load('height_grow.s1')
        for m in (0, 1, 5, 20):
            tree = apply_function(program.function('grow'), numeral(Heap(), m), 'dp')
            self.assertEqual(read_numeral(apply_function(program.function('height'), tree, 'dp')), m)


class TestCosts(unittest.TestCase):
    """Test cases for the cost meter"""

    def setUp(self):
        self.copy = RamrecProgram(COPY_SOURCE).function('copy')

    def test_fold_steps(self):
        """Test one step per constructor and one memo hit per predecessor"""
        for semantics in ('td', 'dp'):
            meter = CostMeter()
            v = apply_function(self.copy, numeral(Heap(), 7), semantics, meter)
            self.assertEqual(read_numeral(v), 7)
            self.assertEqual(meter.fold_steps, 8)
        meter = CostMeter()
        apply_function(self.copy, numeral(Heap(), 7), 'dp', meter)
        self.assertEqual(meter.memo_hits, 7)

    def test_cost_grows_with_input(self):
        """Test that a longer numeral costs more"""
        costs = []
        for m in (2, 4, 8):
            meter = CostMeter()
            apply_function(self.copy, numeral(Heap(), m), 'td', meter)
            costs.append(meter.nodes)
        self.assertLess(costs[0], costs[1])
        self.assertLess(costs[1], costs[2])

    def test_top_down_recomputes_shared_trees(self):
        """Test that td pays for the unfolding while dp pays for the dag"""
        program = load('height_grow.s1')
        tree = apply_function(program.function('grow'), numeral(Heap(), 10), 'dp')
        td, dp = CostMeter(), CostMeter()
        apply_function(program.function('height'), tree, 'td', td)
        apply_function(program.function('height'), tree, 'dp', dp)
        self.assertGreaterEqual(td.nodes, 2 ** 11 - 1)
        self.assertLess(dp.nodes, td.nodes)

    def test_memoized_height_is_polynomial(self):
        """Test that dp cost of height(grow m) stays under a cubic in m+1"""
        program = load('height_grow.s1')
        ratios = {}
        for m in (2, 10, 40):
            tree = apply_function(program.function('grow'), numeral(Heap(), m), 'dp')
            meter = CostMeter()
            apply_function(program.function('height'), tree, 'dp', meter)
            ratios[m] = meter.nodes / (m + 1) ** 3
        self.assertLessEqual(ratios[40], ratios[2])
        self.assertLessEqual(ratios[40], ratios[10])

    def test_cost_helpers(self):
        """Test cost_td and cost_dp on a closed term"""
        subject = load('plus_prime.s1').judgment('main').subject
        self.assertGreater(cost_td(subject), 0)
        self.assertGreater(cost_dp(subject), 0)

    def test_describe_meter(self):
        """Test the one-line meter summary"""
        text = describe_meter(CostMeter(nodes=4, fold_steps=1))
        self.assertEqual(text, "nodes=4 fold_steps=1 memo_hits=0 cs_nodes=0")


class TestEvaluationLaws(unittest.TestCase):
    """Test cases for the size, sharing and cost laws evaluation keeps"""

    def test_grow_vertex_counts(self):
        """Test that grow 1 has six vertices and grow 3 has twelve"""
        grow = load('grow.s1').function('grow')
        for semantics in SEMANTICS:
            self.assertEqual(total_vertices(apply_function(grow, numeral(Heap(), 1), semantics)), 6)
            self.assertEqual(total_vertices(apply_function(grow, numeral(Heap(), 3), semantics)), 12)

    def test_result_size_within_cost(self):
        """Test size of a result <= size of its input plus the nodes charged"""
        cases = [
            (load('grow.s1').function('grow'), [numeral(Heap(), m) for m in (0, 3, 9)]),
            (RamrecProgram(COPY_SOURCE).function('copy'), [numeral(Heap(), m) for m in (0, 4, 17)]),
            (load('sum_list.s1').function('sum_list'),
             [ValueGenerator(seed=seed).value(load('sum_list.s1').function('sum_list').ty.arg, 6)
              for seed in range(5)]),
        ]
        for fn, inputs in cases:
            for v in inputs:
                for semantics in SEMANTICS:
                    meter = CostMeter()
                    result = apply_function(fn, v, semantics, meter)
                    self.assertLessEqual(size(result), size(v) + meter.nodes)

    def test_coercions_keep_the_root(self):
        """Test that toSafe and toNorm return the vertex they are given"""
        program = RamrecProgram(COERCE_SOURCE)
        for semantics in SEMANTICS:
            v = numeral(Heap(), 4)
            for name in ('up', 'round_trip'):
                self.assertEqual(apply_function(program.function(name), v, semantics).root, v.root)
            self.assertEqual(len(v.heap), total_vertices(v))

    def test_deterministic(self):
        """Test that repeated runs give isomorphic dags and equal meters"""
        for filename in ('mixed_pair.s1', 'sum_list.s1', 'compressed_size.s1'):
            subject = load(filename).judgment('main').subject
            for semantics in SEMANTICS:
                runs = []
                for _ in range(2):
                    meter = CostMeter()
                    runs.append((evaluate(subject, Environment(), semantics, meter), meter))
                (first, first_meter), (second, second_meter) = runs
                self.assertTrue(isomorphic(first, second), filename)
                self.assertEqual(first_meter, second_meter, filename)

    def test_sequential_fold_is_linear(self):
        """Test that a fold over numerals costs a constant per constructor"""
        copy = RamrecProgram(COPY_SOURCE).function('copy')
        for semantics in SEMANTICS:
            per_constructor = []
            for m in (1, 8, 64):
                v = numeral(Heap(), m)
                meter = CostMeter()
                apply_function(copy, v, semantics, meter)
                per_constructor.append(meter.nodes / size(v))
            self.assertLessEqual(max(per_constructor), 2 * min(per_constructor), semantics)

    def test_node_budget(self):
        """Test that a budgeted meter stops the evaluation"""
        copy = RamrecProgram(COPY_SOURCE).function('copy')
        unlimited = CostMeter()
        apply_function(copy, numeral(Heap(), 10), 'td', unlimited)
        with self.assertRaises(StepBudgetExceeded):
            apply_function(copy, numeral(Heap(), 10), 'td', CostMeter(budget=unlimited.nodes - 1))
        exact = CostMeter(budget=unlimited.nodes)
        apply_function(copy, numeral(Heap(), 10), 'td', exact)
        self.assertEqual(exact, unlimited)
        self.assertNotIn('budget', exact.to_dict())


class TestEvaluatorErrors(unittest.TestCase):
    """Test cases for evaluator misuse"""

    def test_unknown_semantics(self):
        """Test that only td and dp are accepted"""
        with self.assertRaises(RamrecError) as caught:
            Evaluator(Heap(), 'bottom-up')
        self.assertEqual(caught.exception.code, 'UsageError')

    def test_foreign_heap(self):
        """Test that bindings must live in the environment's heap"""
        env = Environment(Heap())
        with self.assertRaises(HeapInvariantError):
            env.push('x', numeral(Heap(), 1))

    def test_function_is_not_evaluated(self):
        """Test that only ground terms are evaluated"""
        fn = RamrecProgram(COPY_SOURCE).function('copy')
        with self.assertRaises(EvaluationError):
            evaluate(fn, Environment())

    def test_unbound_variable(self):
        """Test that a free variable fails at run time"""
        term = Var('x')
        term.ty = NAT
        with self.assertRaises(EvaluationError):
            evaluate(term, Environment())

    def test_functor_reduction(self):
        """Test that Id f is f and C f is an identity"""
        f = Lam('x', Var('x'), NAT)
        self.assertIs(reduce_functor(IdF(), f), f)
        self.assertIsInstance(reduce_functor(ConstF(NAT), f), Lam)


if __name__ == '__main__':
    unittest.main(verbosity=2)

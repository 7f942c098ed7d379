#!/usr/bin/env python3
"""
Test Suite for the CEK machine
"""

import os
import re
import unittest

from cek_machine import cek_init, cek_run, cek_step, pending_pops
from evaluator import CostMeter, Environment, evaluate
from ramrec_errors import StepBudgetExceeded, StuckState
from ramrec_program import RamrecProgram
from value_heap import bisimilar, read_numeral, size

PROGRAMS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'programs')

TRACE_LINE = re.compile(r"^R\d+[a-d]? \| .+ \| \d+$")


def main_of(filename: str):
    program = RamrecProgram.from_file(os.path.join(PROGRAMS, filename))
    return program.judgment('main').subject


class TestCekRun(unittest.TestCase):
    """Test cases for running the machine to a final state"""

    def test_agrees_with_top_down(self):
        """Test value and step bound against the top-down evaluator"""
        for filename in ('plus_prime.s1', 'times_prime.s1', 'sum_list.s1', 'grow.s1', 'mixed_pair.s1'):
            subject = main_of(filename)
            meter = CostMeter()
            expected = evaluate(subject, Environment(), 'td', meter)
            v, steps, lines = cek_run(subject)
            self.assertTrue(bisimilar(v, expected), filename)
            self.assertLessEqual(steps, 3 * meter.nodes, filename)
            self.assertEqual(lines, [])

    def test_plus(self):
        """Test plus' (2, 3) = 5"""
        v, _, _ = cek_run(main_of('plus_prime.s1'))
        self.assertEqual(read_numeral(v), 5)

    def test_sharing(self):
        """Test that grow 5 stays a six-constructor dag"""
        v, _, _ = cek_run(main_of('grow.s1'))
        self.assertEqual(size(v), 6)

    def test_trace_lines(self):
        """Test one trace line per step in rule | context | depth form"""
        v, steps, lines = cek_run(main_of('plus_prime.s1'), trace=True)
        self.assertEqual(len(lines), steps)
        for line in lines:
            self.assertRegex(line, TRACE_LINE)
        self.assertTrue(lines[-1].endswith('| 0'))

    def test_compressed_size_rule(self):
        """Test that cs fires its own rule pair"""
        v, _, lines = cek_run(main_of('compressed_size.s1'), trace=True)
        self.assertEqual(read_numeral(v), 3)
        rules = {line.split(' | ')[0] for line in lines}
        self.assertIn('R13a', rules)
        self.assertIn('R13b', rules)

    def test_safe_rules(self):
        """Test that ramified programs use the safe constructor rules"""
        _, _, lines = cek_run(main_of('plus_prime.s1'), trace=True)
        rules = {line.split(' | ')[0] for line in lines}
        self.assertIn('R11b', rules)
        self.assertIn('R12b', rules)
        self.assertIn('R10', rules)


class TestCekSteps(unittest.TestCase):
    """Test cases for single steps and budgets"""

    def test_step_budget(self):
        """Test that a small budget stops the run"""
        with self.assertRaises(StepBudgetExceeded):
            cek_run(main_of('plus_prime.s1'), max_steps=3)

    def test_final_state_is_stuck(self):
        """Test that stepping a final state is an internal error"""
        state = cek_init(main_of('plus_prime.s1'))
        while not state.final:
            state = cek_step(state)
        with self.assertRaises(StuckState):
            cek_step(state)

    def test_environment_is_restored(self):
        """Test that every push is popped by the end of the run"""
        env = Environment()
        state = cek_init(main_of('sum_list.s1'), env)
        self.assertEqual(pending_pops(state), 0)
        while not state.final:
            state = cek_step(state)
            self.assertEqual(pending_pops(state), len(env))
        self.assertEqual(len(env), 0)


if __name__ == '__main__':
    unittest.main(verbosity=2)

#!/usr/bin/env python3
"""
Test Suite for value term graphs
"""

import unittest

import networkx as nx
from hypothesis import given, settings, strategies as st

from ramrec_errors import HeapInvariantError, RepresentationError
from ramrec_types import NAT, UNIT, ConstF, IdF, MuT, ProdF, ProdT, SumF, SumT, vertex_bound_constant
from value_generators import ValueGenerator
from value_heap import (
    Heap, ValueRef, VertexKind, bisimilar, build_tree, compress, compressed_size,
    construct, copy_value, isomorphic, numeral, read_numeral, size, to_dot,
    to_networkx, total_vertices, tree_size, unshare, validate,
)

TREE = MuT(SumF(ConstF(UNIT), ProdF(IdF(), IdF())))


def grow(heap: Heap, m: int) -> ValueRef:
    """Complete binary tree of height m with each level shared"""
    root = construct(heap, TREE, 0, 2, heap.unit())
    for _ in range(m):
        root = construct(heap, TREE, 1, 2, heap.pair(root, root, ProdT(TREE, TREE)))
    return ValueRef(heap, root, TREE)


def leaf_shape():
    return ('con', (1, ()))


def branch_shape(left, right):
    return ('con', (2, ('pair', left, right)))


def dag_digraph(v: ValueRef) -> nx.DiGraph:
    graph = to_networkx(v)
    for i, data in graph.nodes(data=True):
        data['label'] = (data['kind'], data['index'], data['tag'])
    return graph


class TestSizes(unittest.TestCase):
    """Test cases for size, tree size and total vertices"""

    def test_numeral_size(self):
        """Test that the numeral m has m+1 constructor vertices"""
        for m in range(6):
            v = numeral(Heap(), m)
            self.assertEqual(size(v), m + 1)
            self.assertEqual(tree_size(v), m + 1)
            self.assertEqual(read_numeral(v), m)

    def test_shared_tree(self):
        """Test size m+1 against tree size 2^(m+1)-1"""
        for m in range(1, 12):
            v = grow(Heap(), m)
            self.assertEqual(size(v), m + 1)
            self.assertEqual(tree_size(v), 2 ** (m + 1) - 1)

    def test_vertex_bound(self):
        """Test total_vertices <= k * (1 + size) on shared trees"""
        k = vertex_bound_constant(TREE)
        for m in range(8):
            v = grow(Heap(), m)
            self.assertLessEqual(total_vertices(v), k * (1 + size(v)))

    def test_unit_value(self):
        """Test that unit has no constructors"""
        heap = Heap()
        v = ValueRef(heap, heap.unit(), UNIT)
        self.assertEqual(size(v), 0)
        self.assertEqual(total_vertices(v), 1)

    def test_read_numeral_rejects_trees(self):
        """Test that read_numeral refuses other datatypes"""
        with self.assertRaises(RepresentationError):
            read_numeral(grow(Heap(), 2))


class TestBisimilarity(unittest.TestCase):
    """Test cases for bisimilarity, compression and unsharing"""

    def test_shared_and_unshared(self):
        """Test that sharing does not change the unfolding"""
        v = grow(Heap(), 4)
        u = unshare(v)
        self.assertTrue(bisimilar(v, u))
        self.assertEqual(size(u), tree_size(v))
        self.assertFalse(isomorphic(v, u))

    def test_different_values(self):
        """Test two different numerals"""
        heap = Heap()
        self.assertFalse(bisimilar(numeral(heap, 2), numeral(heap, 3)))
        self.assertTrue(bisimilar(numeral(heap, 3), numeral(Heap(), 3)))

    def test_compress_restores_sharing(self):
        """Test that compressing the unfolding gives the shared tree back"""
        v = grow(Heap(), 5)
        c = compress(unshare(v))
        self.assertEqual(size(c), 6)
        self.assertTrue(isomorphic(c, compress(v)))

    def test_compressed_size_of_mixed_tree(self):
        """Test Branch (Branch (Leaf, Leaf), Branch (Leaf, Leaf)) compresses to 3"""
        leaf = leaf_shape()
        shape = branch_shape(branch_shape(leaf, leaf), branch_shape(leaf, leaf))
        v = build_tree(Heap(), TREE, shape)
        self.assertEqual(size(v), 7)
        self.assertEqual(compressed_size(v), 3)

    def test_isomorphic_matches_networkx(self):
        """Test dag isomorphism against networkx"""
        heap = Heap()
        v, w = grow(heap, 3), grow(Heap(), 3)
        self.assertTrue(isomorphic(v, w))
        matcher = nx.algorithms.isomorphism.DiGraphMatcher(
            nx.DiGraph(dag_digraph(v)), nx.DiGraph(dag_digraph(w)),
            node_match=lambda a, b: a['label'] == b['label'])
        self.assertTrue(matcher.is_isomorphic())

    def test_copy_value(self):
        """Test that copying keeps sharing"""
        v = grow(Heap(), 6)
        copied = copy_value(v, Heap())
        self.assertTrue(isomorphic(v, copied))
        self.assertIsNot(copied.heap, v.heap)

    def test_unshare_limit(self):
        """Test that a too large unfolding is refused"""
        with self.assertRaises(RepresentationError):
            unshare(grow(Heap(), 20), limit=1000)

    @given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=0, max_value=12))
    @settings(max_examples=60, deadline=None)
    def test_compression_properties(self, seed, budget):
        """Test that compression is bisimilar, idempotent and never grows"""
        v = ValueGenerator(seed=seed, share_probability=0.4).value(TREE, budget)
        c = compress(v)
        self.assertTrue(bisimilar(v, c))
        self.assertLessEqual(size(c), size(v))
        self.assertTrue(isomorphic(compress(c), c))
        self.assertEqual(compressed_size(unshare(v)), size(c))


class TestHeapInvariants(unittest.TestCase):
    """Test cases for arena discipline and validation"""

    def test_children_must_exist(self):
        """Test that a vertex cannot point to an unallocated child"""
        heap = Heap()
        with self.assertRaises(HeapInvariantError):
            heap.con(5, NAT)

    def test_validate_accepts_generated_values(self):
        """Test that generated values pass validation"""
        for seed in range(20):
            validate(ValueGenerator(seed=seed).value(SumT(NAT, ProdT(TREE, NAT)), 6))

    def test_validate_rejects_wrong_tag(self):
        """Test that a mistyped vertex is reported"""
        heap = Heap()
        zero = heap.con(heap.inj(1, heap.unit(), SumT(UNIT, NAT)), NAT)
        with self.assertRaises(HeapInvariantError):
            validate(ValueRef(heap, zero, TREE))

    def test_dot_export(self):
        """Test the DOT rendering of a small dag"""
        v = grow(Heap(), 1)
        dot = to_dot(v, {TREE: 'tree'})
        self.assertTrue(dot.startswith('digraph "value" {'))
        self.assertIn('con tree', dot)
        self.assertEqual(dot.count('-> '), sum(len(v.heap[i].children) for i in to_networkx(v).nodes))

    def test_networkx_export(self):
        """Test that edges keep their slots"""
        v = grow(Heap(), 2)
        graph = to_networkx(v)
        pairs = [i for i, data in graph.nodes(data=True) if data['kind'] == VertexKind.PAIR.value]
        for i in pairs:
            slots = sorted(data['slot'] for _, _, data in graph.out_edges(i, data=True))
            self.assertEqual(slots, [1, 2])


if __name__ == '__main__':
    unittest.main(verbosity=2)

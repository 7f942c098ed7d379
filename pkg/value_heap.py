#!/usr/bin/env python3
"""
Value Heap
Value term graphs: an append-only arena of labeled vertices where sharing is
index identity. Children are always allocated before their parents, so index
order is a topological order and every algorithm here is a single sweep.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple

import networkx as nx

from ramrec_errors import HeapInvariantError, RepresentationError, TypeCheckError
from ramrec_terms import Con, Inj, Pair, SafeCon, Term, Unit
from ramrec_types import (
    NAT, UNIT, GroundType, MuT, ProdT, SumT, UnitT, apply_functor, format_type,
    norm, unfold,
)

logger = logging.getLogger(__name__)

_heap_ids = itertools.count(1)

NAT_SUM = SumT(UNIT, NAT)


class VertexKind(Enum):
    UNIT = 'unit'
    INJ = 'inj'
    PAIR = 'pair'
    CON = 'mu'


ARITY = {VertexKind.UNIT: 0, VertexKind.INJ: 1, VertexKind.PAIR: 2, VertexKind.CON: 1}


@dataclass(frozen=True)
class Vertex:
    kind: VertexKind
    children: Tuple[int, ...]
    tag: GroundType
    index: int = 0

    def label(self, names: Optional[Dict[GroundType, str]] = None) -> str:
        if self.kind is VertexKind.UNIT:
            return '()'
        if self.kind is VertexKind.INJ:
            return f"inj{self.index}"
        if self.kind is VertexKind.PAIR:
            return 'pair'
        return f"con {format_type(self.tag, names)}"


class Heap:
    """Arena of vertices; single writer while an evaluation runs"""

    def __init__(self):
        self.id = next(_heap_ids)
        self.vertices: List[Vertex] = []

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, index: int) -> Vertex:
        return self.vertices[index]

    def __repr__(self) -> str:
        return f"Heap(#{self.id}, {len(self.vertices)} vertices)"

    def alloc(self, kind: VertexKind, children: Tuple[int, ...], tag: GroundType, index: int = 0) -> int:
        for child in children:
            if not 0 <= child < len(self.vertices):
                raise HeapInvariantError(f"child {child} is not allocated yet")
        self.vertices.append(Vertex(kind, tuple(children), tag, index))
        return len(self.vertices) - 1

    def unit(self) -> int:
        return self.alloc(VertexKind.UNIT, (), UNIT)

    def inj(self, index: int, child: int, tag: GroundType) -> int:
        return self.alloc(VertexKind.INJ, (child,), norm(tag), index)

    def pair(self, first: int, second: int, tag: GroundType) -> int:
        return self.alloc(VertexKind.PAIR, (first, second), norm(tag))

    def con(self, child: int, tag: GroundType) -> int:
        return self.alloc(VertexKind.CON, (child,), norm(tag))

    def ref(self, root: int, gamma: GroundType) -> 'ValueRef':
        return ValueRef(self, root, gamma)


@dataclass(frozen=True)
class ValueRef:
    """A value: a root vertex in a heap, seen at a ground type"""
    heap: Heap
    root: int
    type: GroundType

    @property
    def vertex(self) -> Vertex:
        return self.heap[self.root]

    def child(self, position: int, gamma: GroundType) -> 'ValueRef':
        return ValueRef(self.heap, self.vertex.children[position], gamma)

    def retype(self, gamma: GroundType) -> 'ValueRef':
        return ValueRef(self.heap, self.root, gamma)


def reachable(heap: Heap, root: int) -> List[int]:
    """Vertex indices reachable from root, ascending (children first)"""
    seen: Set[int] = {root}
    stack = [root]
    while stack:
        for child in heap[stack.pop()].children:
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return sorted(seen)


def size(v: ValueRef) -> int:
    """Number of constructor vertices"""
    return sum(1 for i in reachable(v.heap, v.root) if v.heap[i].kind is VertexKind.CON)


def total_vertices(v: ValueRef) -> int:
    return len(reachable(v.heap, v.root))


def tree_size(v: ValueRef) -> int:
    """Size of the sharing-free unfolding, counted per vertex"""
    counts: Dict[int, int] = {}
    for i in reachable(v.heap, v.root):
        vertex = v.heap[i]
        own = 1 if vertex.kind is VertexKind.CON else 0
        counts[i] = own + sum(counts[c] for c in vertex.children)
    return counts[v.root]


def tree_vertices(v: ValueRef) -> int:
    """Vertex count of the sharing-free unfolding"""
    counts: Dict[int, int] = {}
    for i in reachable(v.heap, v.root):
        counts[i] = 1 + sum(counts[c] for c in v.heap[i].children)
    return counts[v.root]


def bisimilar(v: ValueRef, w: ValueRef) -> bool:
    """Equal tree unfoldings"""
    if norm(v.type) != norm(w.type):
        raise TypeCheckError(f"cannot compare '{format_type(v.type)}' with '{format_type(w.type)}'")
    seen: Set[Tuple[int, int]] = set()
    stack = [(v.root, w.root)]
    while stack:
        a, b = stack.pop()
        if (a, b) in seen:
            continue
        seen.add((a, b))
        x, y = v.heap[a], w.heap[b]
        if x.kind is not y.kind or x.index != y.index or len(x.children) != len(y.children):
            return False
        stack.extend(zip(x.children, y.children))
    return True


def compress(v: ValueRef) -> ValueRef:
    """Maximally shared form of v in a fresh heap, by bottom-up hash-consing"""
    out = Heap()
    canonical: Dict[tuple, int] = {}
    mapped: Dict[int, int] = {}
    for i in reachable(v.heap, v.root):
        vertex = v.heap[i]
        kids = tuple(mapped[c] for c in vertex.children)
        key = (vertex.kind, vertex.index, vertex.tag, kids)
        if key not in canonical:
            canonical[key] = out.alloc(vertex.kind, kids, vertex.tag, vertex.index)
        mapped[i] = canonical[key]
    return ValueRef(out, mapped[v.root], v.type)


def compressed_size(v: ValueRef) -> int:
    return size(compress(v))


def copy_value(v: ValueRef, target: Heap) -> ValueRef:
    """Copy v into target, keeping its sharing"""
    mapped: Dict[int, int] = {}
    for i in reachable(v.heap, v.root):
        vertex = v.heap[i]
        mapped[i] = target.alloc(vertex.kind, tuple(mapped[c] for c in vertex.children), vertex.tag, vertex.index)
    return ValueRef(target, mapped[v.root], v.type)


def unshare(v: ValueRef, limit: Optional[int] = 1_000_000) -> ValueRef:
    """Sharing-free copy of v (a tree) in a fresh heap"""
    if limit is not None and tree_vertices(v) > limit:
        raise RepresentationError(f"unfolding has more than {limit} vertices")
    out = Heap()
    results: List[int] = []
    stack = [(v.root, False)]
    while stack:
        i, done = stack.pop()
        vertex = v.heap[i]
        if done:
            count = len(vertex.children)
            kids = tuple(results[len(results) - count:]) if count else ()
            del results[len(results) - count:]
            results.append(out.alloc(vertex.kind, kids, vertex.tag, vertex.index))
        else:
            stack.append((i, True))
            stack.extend((c, False) for c in reversed(vertex.children))
    return ValueRef(out, results[0], v.type)


def isomorphic(v: ValueRef, w: ValueRef) -> bool:
    """Rooted, edge-ordered, labeled dag isomorphism"""
    forward: Dict[int, int] = {}
    backward: Dict[int, int] = {}
    stack = [(v.root, w.root)]
    while stack:
        a, b = stack.pop()
        if a in forward or b in backward:
            if forward.get(a) != b or backward.get(b) != a:
                return False
            continue
        forward[a], backward[b] = b, a
        x, y = v.heap[a], w.heap[b]
        if (x.kind, x.index, x.tag, len(x.children)) != (y.kind, y.index, y.tag, len(y.children)):
            return False
        stack.extend(zip(x.children, y.children))
    return True


# ---------- numerals and printing ----------

def numeral(heap: Heap, n: int) -> ValueRef:
    """The chain Succ^n(Zero)"""
    current = heap.con(heap.inj(1, heap.unit(), NAT_SUM), NAT)
    for _ in range(n):
        current = heap.con(heap.inj(2, current, NAT_SUM), NAT)
    return ValueRef(heap, current, NAT)


def construct(heap: Heap, mu: MuT, index: int, count: int, child: int) -> int:
    """Constructor index of count, applied to an allocated argument"""
    if count == 1:
        return heap.con(child, mu)
    sums = [apply_functor(mu.functor, norm(mu))]
    for _ in range(count - 2):
        sums.append(sums[-1].right)
    root = heap.inj(1, child, sums[index]) if index < count - 1 else child
    for depth in reversed(range(min(index, count - 1))):
        root = heap.inj(2, root, sums[depth])
    return heap.con(root, mu)


def read_numeral(v: ValueRef) -> int:
    count = 0
    i = v.root
    while True:
        vertex = v.heap[i]
        if vertex.kind is not VertexKind.CON or vertex.tag != NAT:
            raise RepresentationError(f"not a numeral: vertex {i} is {vertex.label()}")
        inner = v.heap[vertex.children[0]]
        if inner.kind is not VertexKind.INJ:
            raise RepresentationError(f"not a numeral: vertex {vertex.children[0]} is {inner.label()}")
        if inner.index == 1:
            return count
        count += 1
        i = inner.children[0]


def value_to_term(v: ValueRef) -> Term:
    """The value as a core term (its tree unfolding), for printing"""
    results: List[Term] = []
    stack: List[Tuple[int, GroundType, bool]] = [(v.root, v.type, False)]
    while stack:
        i, gamma, done = stack.pop()
        vertex = v.heap[i]
        if not done:
            stack.append((i, gamma, True))
            for position, child_type in reversed(list(enumerate(child_types(vertex, gamma)))):
                stack.append((vertex.children[position], child_type, False))
            continue
        if vertex.kind is VertexKind.UNIT:
            results.append(Unit(safe=isinstance(gamma, UnitT) and gamma.safe))
        elif vertex.kind is VertexKind.INJ:
            results.append(Inj(vertex.index, results.pop()))
        elif vertex.kind is VertexKind.PAIR:
            second = results.pop()
            results.append(Pair(results.pop(), second))
        else:
            body = results.pop()
            delta = MuT(gamma.functor) if isinstance(gamma, MuT) else vertex.tag
            results.append(SafeCon(delta, body) if getattr(gamma, 'safe', False) else Con(delta, body))
    return results[0]


def child_types(vertex: Vertex, gamma: GroundType) -> List[GroundType]:
    """Types of a vertex's children when the vertex is seen at gamma"""
    if vertex.kind is VertexKind.INJ and isinstance(gamma, SumT):
        return [gamma.left if vertex.index == 1 else gamma.right]
    if vertex.kind is VertexKind.PAIR and isinstance(gamma, ProdT):
        return [gamma.left, gamma.right]
    if vertex.kind is VertexKind.CON and isinstance(gamma, MuT):
        return [unfold(gamma)]
    if vertex.kind is VertexKind.UNIT:
        return []
    raise HeapInvariantError(f"vertex {vertex.label()} cannot have type '{format_type(gamma)}'")


# ---------- exports and validation ----------

def to_dot(v: ValueRef, names: Optional[Dict[GroundType, str]] = None, name: str = 'value') -> str:
    """Graphviz DOT of the dag below v"""
    lines = [f'digraph "{name}" {{', '  node [shape=box, fontname="monospace"];']
    for i in reachable(v.heap, v.root):
        vertex = v.heap[i]
        shape = ', style=bold' if i == v.root else ''
        label = vertex.label(names).replace('"', '\\"')
        lines.append(f'  v{i} [label="{label}"{shape}];')
        for position, child in enumerate(vertex.children, start=1):
            edge = f' [label="π{position}"]' if vertex.kind is VertexKind.PAIR else ''
            lines.append(f'  v{i} -> v{child}{edge};')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def to_networkx(v: ValueRef) -> nx.MultiDiGraph:
    """The dag below v; edges carry their slot (1 or 2)"""
    graph = nx.MultiDiGraph(root=v.root)
    for i in reachable(v.heap, v.root):
        vertex = v.heap[i]
        graph.add_node(i, kind=vertex.kind.value, index=vertex.index, tag=format_type(vertex.tag))
        for slot, child in enumerate(vertex.children, start=1):
            graph.add_edge(i, child, slot=slot)
    return graph


def validate(v: ValueRef) -> None:
    """Check arity, ordering and type tags of every vertex below v"""
    expected: Dict[int, GroundType] = {v.root: norm(v.type)}
    for i in reversed(reachable(v.heap, v.root)):
        vertex = v.heap[i]
        if len(vertex.children) != ARITY[vertex.kind]:
            raise HeapInvariantError(f"vertex {i} ({vertex.label()}) has {len(vertex.children)} children")
        if any(c >= i for c in vertex.children):
            raise HeapInvariantError(f"vertex {i} points forward; the arena must stay topologically ordered")
        if vertex.tag != expected[i]:
            raise HeapInvariantError(f"vertex {i} is tagged '{format_type(vertex.tag)}' "
                                     f"but reached at '{format_type(expected[i])}'")
        for child, gamma in zip(vertex.children, _vertex_child_tags(vertex)):
            gamma = norm(gamma)
            if expected.setdefault(child, gamma) != gamma:
                raise HeapInvariantError(f"vertex {child} is reached at two types")


def _vertex_child_tags(vertex: Vertex) -> List[GroundType]:
    tag = vertex.tag
    if vertex.kind is VertexKind.UNIT:
        if not isinstance(tag, UnitT):
            raise HeapInvariantError(f"unit vertex tagged '{format_type(tag)}'")
        return []
    if vertex.kind is VertexKind.INJ:
        if not isinstance(tag, SumT) or vertex.index not in (1, 2):
            raise HeapInvariantError(f"injection vertex tagged '{format_type(tag)}'")
        return [tag.left if vertex.index == 1 else tag.right]
    if vertex.kind is VertexKind.PAIR:
        if not isinstance(tag, ProdT):
            raise HeapInvariantError(f"pair vertex tagged '{format_type(tag)}'")
        return [tag.left, tag.right]
    if not isinstance(tag, MuT):
        raise HeapInvariantError(f"constructor vertex tagged '{format_type(tag)}'")
    return [apply_functor(tag.functor, tag)]


def build_tree(heap: Heap, gamma: GroundType, shape: Iterable) -> ValueRef:
    """Build a value from nested tuples: () for unit, (1|2, x) injections,
    ('pair', a, b) pairs and ('con', x) constructors"""
    def build(node, t: GroundType) -> int:
        if node == ():
            return heap.unit()
        if node[0] == 'pair':
            return heap.pair(build(node[1], t.left), build(node[2], t.right), t)
        if node[0] == 'con':
            return heap.con(build(node[1], unfold(t)), t)
        return heap.inj(node[0], build(node[1], t.left if node[0] == 1 else t.right), t)
    return ValueRef(heap, build(shape, gamma), gamma)

#!/usr/bin/env python3
"""
Bound Analysis
Polynomial size and cost bounds for ramified programs, the spans and residual
sizes they are stated in, a randomized normal-invariance checker and the
tree-size functions for hereditarily sequential types.
"""

import copy
import functools
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from evaluator import Environment, evaluate
from ramrec_errors import (
    GenerationFailure, NotHereditarilySequential, TypeCheckError, UnsupportedConstruct,
)
from ramrec_syntax import desugar, parse, pretty
from ramrec_terms import (
    App, CS, Case, Con, Des, Fold, Inj, Lam, Pair, Proj, SafeCon, SafeDes, Term,
    ToNorm, ToSafe, Unit, Var, fresh_name, free_vars,
)
from ramrec_typecheck import Judgment, typecheck
from ramrec_types import (
    NAT, UNIT, Arrow, Calculus, Functor, GroundType, IdF, ProdT,
    SumF, SumT, Tier, UnitT, apply_functor, format_type, functor_size, has_id,
    id_count, is_hereditarily_sequential, is_normal, is_safe, safe, tier,
    vertex_bound_constant,
)
from value_generators import ValueGenerator, default_seed
from value_heap import Heap, ValueRef, VertexKind, reachable, value_to_term

logger = logging.getLogger(__name__)


# ---------- polynomials ----------

Monomial = Tuple[str, ...]


class Polynomial:
    """Polynomial with natural coefficients over size indeterminates |x|"""

    __slots__ = ('terms',)

    def __init__(self, terms: Optional[Mapping[Monomial, int]] = None):
        self.terms: Dict[Monomial, int] = {tuple(sorted(m)): c for m, c in (terms or {}).items() if c}

    @classmethod
    def constant(cls, c: int) -> 'Polynomial':
        return cls({(): c})

    @classmethod
    def var(cls, name: str) -> 'Polynomial':
        return cls({(name,): 1})

    @staticmethod
    def lift(other: Any) -> 'Polynomial':
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, int):
            return Polynomial.constant(other)
        raise TypeError(f"cannot combine a polynomial with {type(other).__name__}")

    def __add__(self, other) -> 'Polynomial':
        result = dict(self.terms)
        for m, c in Polynomial.lift(other).terms.items():
            result[m] = result.get(m, 0) + c
        return Polynomial(result)

    __radd__ = __add__

    def __mul__(self, other) -> 'Polynomial':
        result: Dict[Monomial, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in Polynomial.lift(other).terms.items():
                m = tuple(sorted(m1 + m2))
                result[m] = result.get(m, 0) + c1 * c2
        return Polynomial(result)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> 'Polynomial':
        result = Polynomial.constant(1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Polynomial.constant(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def substitute(self, name: str, replacement) -> 'Polynomial':
        """self with |name| replaced by a polynomial"""
        replacement = Polynomial.lift(replacement)
        result = Polynomial()
        for m, c in self.terms.items():
            k = m.count(name)
            rest = Polynomial({tuple(x for x in m if x != name): c})
            result = result + (rest * replacement ** k if k else rest)
        return result

    def evaluate(self, sizes: Mapping[str, int]) -> int:
        """Value at the given sizes; missing indeterminates count as 0"""
        total = 0
        for m, c in self.terms.items():
            term = c
            for x in m:
                term *= sizes.get(x, 0)
            total += term
        return total

    @property
    def variables(self) -> Set[str]:
        return {x for m in self.terms for x in m}

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        if not self.terms:
            return '0'
        parts = []
        for m in sorted(self.terms, key=lambda m: (-len(m), m)):
            c = self.terms[m]
            powers = Counter(m)
            factors = [f"|{x}|^{k}" if k > 1 else f"|{x}|" for x, k in sorted(powers.items())]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append('*'.join(factors))
            else:
                parts.append(f"{c}*" + '*'.join(factors))
        return ' + '.join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


# ---------- spans ----------

@dataclass(frozen=True)
class Span:
    """Induced subgraph of a value graph; edges are (source, slot, target)"""
    heap: Heap
    root: Optional[int]
    vertices: FrozenSet[int] = frozenset()
    edges: FrozenSet[Tuple[int, int, int]] = frozenset()

    @classmethod
    def empty(cls, heap: Heap) -> 'Span':
        return cls(heap, None)

    @classmethod
    def whole(cls, v: ValueRef) -> 'Span':
        vertices = reachable(v.heap, v.root)
        edges = {(i, slot, child) for i in vertices for slot, child in enumerate(v.heap[i].children, 1)}
        return cls(v.heap, v.root, frozenset(vertices), frozenset(edges))

    def is_empty(self) -> bool:
        return not self.vertices

    def size(self) -> int:
        return count_constructors(self.heap, self.vertices)

    def without(self, other: Iterable[int]) -> 'Span':
        """Subgraph induced on the vertices not in other"""
        keep = self.vertices - frozenset(other)
        edges = frozenset(e for e in self.edges if e[0] in keep and e[2] in keep)
        return Span(self.heap, self.root if self.root in keep else None, keep, edges)

    def out_edges(self, vertex: int) -> List[Tuple[int, int]]:
        return sorted((slot, target) for source, slot, target in self.edges if source == vertex)


def count_constructors(heap: Heap, vertices: Iterable[int]) -> int:
    return sum(1 for i in vertices if heap[i].kind is VertexKind.CON)


def _tier_span(gamma: GroundType, v: ValueRef, wanted: Tier) -> Span:
    t = tier(gamma)
    if t is wanted:
        return Span.whole(v)
    if t is not Tier.MIXED:
        return Span.empty(v.heap)
    vertex = v.vertex
    if isinstance(gamma, SumT):
        parts = [(1, gamma.left if vertex.index == 1 else gamma.right)]
    else:
        parts = [(1, gamma.left), (2, gamma.right)]
    vertices = {v.root}
    edges: Set[Tuple[int, int, int]] = set()
    for slot, part in parts:
        child = v.child(slot - 1, part)
        sub = _tier_span(part, child, wanted)
        if not sub.is_empty():
            vertices |= sub.vertices
            edges |= sub.edges
            edges.add((v.root, slot, child.root))
    return Span(v.heap, v.root, frozenset(vertices), frozenset(edges))


def normal_span(gamma: GroundType, v: ValueRef) -> Span:
    """The part of v a gamma-typed program may inspect freely"""
    return _tier_span(gamma, v, Tier.NORMAL)


def safe_span(gamma: GroundType, v: ValueRef) -> Span:
    return _tier_span(gamma, v, Tier.SAFE)


def nonnormal_span(gamma: GroundType, v: ValueRef) -> Span:
    return Span.whole(v).without(normal_span(gamma, v).vertices)


def spans_isomorphic(a: Span, b: Span) -> bool:
    """Label- and slot-preserving bijection between two spans, rooted"""
    if a.is_empty() or b.is_empty():
        return a.is_empty() and b.is_empty()
    if len(a.vertices) != len(b.vertices) or len(a.edges) != len(b.edges):
        return False
    forward: Dict[int, int] = {}
    backward: Dict[int, int] = {}
    stack = [(a.root, b.root)]
    while stack:
        x, y = stack.pop()
        if forward.get(x, y) != y or backward.get(y, x) != x:
            return False
        if x in forward:
            continue
        forward[x], backward[y] = y, x
        vx, vy = a.heap[x], b.heap[y]
        if (vx.kind, vx.index, vx.tag) != (vy.kind, vy.index, vy.tag):
            return False
        ex, ey = a.out_edges(x), b.out_edges(y)
        if [slot for slot, _ in ex] != [slot for slot, _ in ey]:
            return False
        stack.extend((cx, cy) for (_, cx), (_, cy) in zip(ex, ey))
    return len(forward) == len(a.vertices)


# ---------- residual sizes ----------

def residual_of_value(v: ValueRef, inputs: Sequence[Tuple[GroundType, ValueRef]]) -> int:
    """Constructors of v that are normal or not taken from a safe input"""
    from_inputs: Set[int] = set()
    for gamma, value in inputs:
        from_inputs |= safe_span(gamma, value).vertices
    sharp = normal_span(v.type, v).vertices
    rest = nonnormal_span(v.type, v).vertices - from_inputs
    return count_constructors(v.heap, sharp | rest)


def variable_sizes(context: Sequence[Tuple[str, GroundType]], theta: Mapping[str, ValueRef]) -> Dict[str, int]:
    """Residual size of each bound variable, the point bounds are evaluated at"""
    return {x: residual_of_value(theta[x].retype(gamma), [(gamma, theta[x])])
            for x, gamma in context if x in theta}


def residual_size(judgment: Judgment, theta: Mapping[str, ValueRef], semantics: str = 'td') -> int:
    """Residual size of the judgment's value under theta"""
    judgment = judgment.open()
    heap = _common_heap(theta)
    v = evaluate(judgment.subject, Environment.of(heap, dict(theta)), semantics)
    used = free_vars(judgment.subject)
    inputs = [(gamma, theta[x]) for x, gamma in judgment.context if x in used and x in theta]
    return residual_of_value(v, inputs)


def _common_heap(theta: Mapping[str, ValueRef]) -> Heap:
    heaps = {id(v.heap): v.heap for v in theta.values()}
    if len(heaps) > 1:
        raise GenerationFailure("environment values must share one heap")
    return next(iter(heaps.values())) if heaps else Heap()


# ---------- bound synthesis ----------

class BoundSynthesizer:
    """Size bound q and cost bound p of every subterm of a checked term"""

    def __init__(self):
        self._q: Dict[int, Polynomial] = {}
        self._p: Dict[int, Polynomial] = {}

    def size(self, t: Term) -> Polynomial:
        found = self._q.get(id(t))
        if found is None:
            found = self._q[id(t)] = self._size(t)
        return found

    def cost(self, t: Term) -> Polynomial:
        found = self._p.get(id(t))
        if found is None:
            found = self._p[id(t)] = self._cost(t)
        return found

    def _size(self, t: Term) -> Polynomial:
        if isinstance(t, Var):
            return Polynomial.var(t.name)
        if isinstance(t, Unit):
            return Polynomial()
        if isinstance(t, Pair):
            return self.size(t.first) + self.size(t.second)
        if isinstance(t, (Proj, Inj, Des, SafeDes, ToSafe, ToNorm)):
            return self.size(t.body)
        if isinstance(t, (Con, SafeCon, CS)):
            return 1 + self.size(t.body)
        if isinstance(t, App):
            fn, q1 = _lam(t.fn), self.size(t.arg)
            q0 = self.size(fn.body)
            binder = _binder_type(fn, t.arg)
            if is_normal(binder):
                return q0.substitute(fn.name, q1)
            if is_safe(binder):
                return q0.substitute(fn.name, 0) + q1
            return q0.substitute(fn.name, q1) + q1
        if isinstance(t, Case):
            q0 = self.size(t.subject)
            bound = (self.size(t.left).substitute(t.left_name, q0)
                     + self.size(t.right).substitute(t.right_name, q0))
            return bound if is_normal(t.subject.ty) else bound + q0
        if isinstance(t, Fold):
            q1 = self.size(t.arg)
            q0 = self.size(t.step.body).substitute(t.step.name, q1)
            return q1 * q0 + q1 * q1
        raise UnsupportedConstruct(f"no size bound for {type(t).__name__}")

    def _cost(self, t: Term) -> Polynomial:
        if isinstance(t, (Var, Unit)):
            return Polynomial.constant(1)
        if isinstance(t, Pair):
            return 1 + self.cost(t.first) + self.cost(t.second)
        if isinstance(t, (Proj, Inj, Con, Des, SafeCon, SafeDes, ToSafe, ToNorm)):
            return 1 + self.cost(t.body)
        if isinstance(t, App):
            fn = _lam(t.fn)
            return 1 + self.cost(fn.body).substitute(fn.name, self.size(t.arg)) + self.cost(t.arg)
        if isinstance(t, Case):
            q0 = self.size(t.subject)
            return (1 + self.cost(t.subject)
                    + self.cost(t.left).substitute(t.left_name, q0)
                    + self.cost(t.right).substitute(t.right_name, q0))
        if isinstance(t, Fold):
            functor = t.datatype.functor
            q1 = self.size(t.arg)
            per_vertex = self.cost(t.step.body).substitute(t.step.name, q1) + (
                2 + functor_size(functor) + id_count(functor))
            return self.cost(t.arg) + q1 * per_vertex
        if isinstance(t, CS):
            q0 = self.size(t.body)
            k = vertex_bound_constant(t.datatype)
            return 2 + self.cost(t.body) + k * (1 + q0) + q0
        raise UnsupportedConstruct(f"no cost bound for {type(t).__name__}")


def _lam(t: Term) -> Lam:
    if not isinstance(t, Lam):
        raise UnsupportedConstruct("application of a non-lambda")
    return t


def _binder_type(fn: Lam, arg: Term) -> GroundType:
    if isinstance(fn.ty, Arrow):
        return fn.ty.arg
    return fn.annotation if fn.annotation is not None else arg.ty


def _ramified(judgment: Judgment) -> Judgment:
    if not judgment.level.ramified:
        raise UnsupportedConstruct(f"bounds need a ramified calculus, not {judgment.level.value}")
    if judgment.subject.ty is None:
        raise TypeCheckError("the judgment's term has not been checked")
    return judgment.open()


def synthesize_size_bound(judgment: Judgment) -> Polynomial:
    """q with residual size <= q at the residual sizes of the free variables"""
    return BoundSynthesizer().size(_ramified(judgment).subject)


def synthesize_cost_bound(judgment: Judgment) -> Polynomial:
    """p with dp cost <= p at the residual sizes of the free variables"""
    return BoundSynthesizer().cost(_ramified(judgment).subject)


@dataclass
class BoundReport:
    name: str
    signature: str
    size_bound: Polynomial
    cost_bound: Polynomial

    def to_dict(self) -> Dict[str, str]:
        return {'name': self.name, 'type': self.signature,
                'size_bound': str(self.size_bound), 'cost_bound': str(self.cost_bound)}


def bound_report(judgment: Judgment, names: Optional[Dict[GroundType, str]] = None) -> BoundReport:
    synthesizer = BoundSynthesizer()
    opened = _ramified(judgment)
    return BoundReport(
        name=judgment.name or 'e',
        signature=format_type(judgment.type, names),
        size_bound=synthesizer.size(opened.subject),
        cost_bound=synthesizer.cost(opened.subject),
    )


# ---------- normal invariance ----------

@dataclass
class NIReport:
    name: str
    trials: int
    passed: bool
    vacuous: bool = False
    failures: int = 0
    seed: int = 0
    counterexample: Optional[Dict[str, str]] = field(default=None)

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'trials': self.trials, 'passed': self.passed,
                'vacuous': self.vacuous, 'failures': self.failures, 'seed': self.seed,
                'counterexample': self.counterexample}


def assembly(values: Sequence[ValueRef], types: Sequence[GroundType]) -> ValueRef:
    """Right-nested pair of the values, all in one heap"""
    heap = values[-1].heap
    root, gamma = values[-1].root, types[-1]
    for value, part in zip(reversed(values[:-1]), reversed(types[:-1])):
        gamma = ProdT(part, gamma)
        root = heap.pair(value.root, root, gamma)
    return ValueRef(heap, root, gamma)


class _Regenerator:
    """Copies the normal parts of values into a new heap and redraws the safe parts"""

    def __init__(self, generator: ValueGenerator, budget: int):
        self.generator = generator
        self.heap = generator.heap
        self.budget = budget
        self.memo: Dict[int, int] = {}

    def value(self, v: ValueRef, gamma: GroundType) -> ValueRef:
        return ValueRef(self.heap, self._vertex(v.heap, v.root, gamma), gamma)

    def _copy(self, heap: Heap, root: int) -> int:
        for i in reachable(heap, root):
            if i not in self.memo:
                vertex = heap[i]
                kids = tuple(self.memo[c] for c in vertex.children)
                self.memo[i] = self.heap.alloc(vertex.kind, kids, vertex.tag, vertex.index)
        return self.memo[root]

    def _vertex(self, heap: Heap, root: int, gamma: GroundType) -> int:
        t = tier(gamma)
        if t is Tier.NORMAL:
            return self._copy(heap, root)
        if t is Tier.SAFE:
            return self.generator.vertex(gamma, self.generator.rng.randint(0, self.budget))
        vertex = heap[root]
        if isinstance(gamma, SumT):
            part = gamma.left if vertex.index == 1 else gamma.right
            return self.heap.inj(vertex.index, self._vertex(heap, vertex.children[0], part), gamma)
        first = self._vertex(heap, vertex.children[0], gamma.left)
        second = self._vertex(heap, vertex.children[1], gamma.right)
        return self.heap.pair(first, second, gamma)


def has_safe_freedom(context: Sequence[Tuple[str, GroundType]]) -> bool:
    return any(not is_normal(gamma) for _, gamma in context)


def check_normal_invariance(judgment: Judgment, trials: int = 1000, seed: Optional[int] = None,
                            budget: int = 6, semantics: str = 'dp') -> NIReport:
    """Random search for two environments that agree on their normal parts
    but whose results differ on theirs"""
    judgment = judgment.open()
    seed = default_seed() if seed is None else seed
    name = judgment.name or 'e'
    context = list(judgment.context)
    if is_safe(judgment.type) or not has_safe_freedom(context):
        logger.info(f"ℹ️ {name}: nothing safe to vary, invariance holds vacuously")
        return NIReport(name, 0, True, vacuous=True, seed=seed)
    rng = random.Random(seed)
    failures = 0
    counterexample = None
    for trial in range(trials):
        first = ValueGenerator(Heap(), rng=rng)
        theta = {x: first.value(gamma, rng.randint(0, budget)) for x, gamma in context}
        regenerator = _Regenerator(ValueGenerator(Heap(), rng=rng), budget)
        theta2 = {x: regenerator.value(theta[x], gamma) for x, gamma in context}
        v = evaluate(judgment.subject, Environment.of(first.heap, theta), semantics)
        v2 = evaluate(judgment.subject, Environment.of(regenerator.heap, theta2), semantics)
        types = [gamma for _, gamma in context] + [judgment.type]
        a = assembly([theta[x] for x, _ in context] + [v], types)
        b = assembly([theta2[x] for x, _ in context] + [v2], types)
        if not spans_isomorphic(normal_span(a.type, a), normal_span(b.type, b)):
            failures += 1
            if counterexample is None:
                counterexample = _describe_pair(context, theta, theta2, v, v2)
                logger.warning(f"⚠️ {name}: normal parts differ on trial {trial}")
    passed = failures == 0
    logger.info(f"{'✅' if passed else '❌'} {name}: {trials - failures}/{trials} trials invariant")
    return NIReport(name, trials, passed, failures=failures, seed=seed, counterexample=counterexample)


def _describe_pair(context, theta, theta2, v, v2) -> Dict[str, str]:
    described = {}
    for x, _ in context:
        described[x] = f"{pretty(value_to_term(theta[x]))} / {pretty(value_to_term(theta2[x]))}"
    described['result'] = f"{pretty(value_to_term(v))} / {pretty(value_to_term(v2))}"
    return described


def leaking_judgment() -> Judgment:
    """y : safe nat ⊢ toNorm y : nat, accepted only with the toNorm condition off"""
    y = 'y'
    context = [(y, safe(NAT))]
    term = ToNorm(Var(y))
    gamma = typecheck(Calculus.RS1, context, term, disabled_conditions={'to_norm'})
    return Judgment(context, term, gamma, Calculus.RS1, 'leak')


# ---------- tree size ----------

PRELUDE = """\
%calculus rs1
datatype nat = Zero | Succ of nat
def plus' = fn (p : safe nat * nat) =>
  fold[nat] (fn (w : unit + safe nat) => case w of inl u => fst p | inr r => safe Succ r) (snd p)
def plus = fn (p : nat * nat) => toNorm (plus' (toSafe (fst p), snd p))
"""


@functools.lru_cache(maxsize=None)
def _prelude() -> Dict[str, Term]:
    terms, _ = desugar(parse(PRELUDE))
    return terms


def _prelude_fn(name: str) -> Lam:
    return copy.deepcopy(_prelude()[name])


def _zero() -> Term:
    return Con(NAT, Inj(1, Unit()))


def gen_tree_size(gamma: GroundType) -> Lam:
    """Checked RS1 function gamma -> nat computing the tree size of its argument"""
    if not is_normal(gamma):
        raise TypeCheckError(f"tree size is defined for normal types, not '{format_type(gamma)}'")
    if not is_hereditarily_sequential(gamma):
        raise NotHereditarilySequential(f"'{format_type(gamma)}' has a branching datatype")
    fn = _tree_size_fn(gamma)
    typecheck(Calculus.RS1, [], fn)
    return fn


def _tree_size_fn(gamma: GroundType) -> Lam:
    x = fresh_name('x')
    return Lam(x, _tree_size_body(gamma, Var(x)), gamma)


def _tree_size_body(gamma: GroundType, e: Term) -> Term:
    if isinstance(gamma, UnitT):
        return _zero()
    if isinstance(gamma, SumT):
        a, b = fresh_name('a'), fresh_name('b')
        return Case(e, a, App(_tree_size_fn(gamma.left), Var(a)),
                    b, App(_tree_size_fn(gamma.right), Var(b)))
    if isinstance(gamma, ProdT):
        parts = Pair(App(_tree_size_fn(gamma.left), Proj(1, e)),
                     App(_tree_size_fn(gamma.right), Proj(2, e)))
        return App(_prelude_fn('plus'), parts)
    functor = gamma.functor
    z = fresh_name('z')
    tally = _safe_tally(functor, Var(z))
    step = Lam(z, SafeCon(NAT, Inj(2, tally)), apply_functor(functor, safe(NAT)))
    return ToNorm(Fold(gamma, step, e))


def _constant_type(functor: Functor) -> GroundType:
    return apply_functor(functor, UNIT)


def _safe_tally(functor: Functor, e: Term) -> Term:
    """Tree size of a functor layer as a safe nat, recursive positions already tallied"""
    if isinstance(functor, IdF):
        return e
    if not has_id(functor):
        return ToSafe(App(_tree_size_fn(_constant_type(functor)), e))
    if isinstance(functor, SumF):
        a, b = fresh_name('a'), fresh_name('b')
        return Case(e, a, _safe_tally(functor.left, Var(a)), b, _safe_tally(functor.right, Var(b)))
    recursive, other = (1, 2) if has_id(functor.left) else (2, 1)
    parts = (functor.left, functor.right)
    tallied = _safe_tally(parts[recursive - 1], Proj(recursive, e))
    constant = App(_tree_size_fn(_constant_type(parts[other - 1])), Proj(other, copy.deepcopy(e)))
    return App(_prelude_fn("plus'"), Pair(tallied, constant))


def tree_size_bound(gamma: GroundType) -> Polynomial:
    """q with tree_size(v) < q(size(v)) for every gamma value v"""
    fn = gen_tree_size(gamma)
    judgment = Judgment([], fn, fn.ty, Calculus.RS1, 'tree_size')
    return synthesize_size_bound(judgment).substitute(fn.name, Polynomial.var('v'))

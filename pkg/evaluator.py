#!/usr/bin/env python3
"""
Evaluator
Big-step evaluation of checked core terms over a value heap, with exact cost
metering. Two fold strategies:

  td  unrolls fold(f, v) to f(g(des v)) where g is the functor reduction of
      the recursive call, so shared subvalues are recomputed per occurrence
  dp  visits every constructor vertex of v once, children first, and feeds the
      step a view of the vertex whose recursive positions are memoized results
"""

import logging
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from ramrec_errors import EvaluationError, HeapInvariantError, RamrecError, StepBudgetExceeded
from ramrec_terms import (
    App, CS, Case, Con, Des, Fold, Inj, Lam, Pair, Proj, SafeCon, SafeDes, Term,
    ToNorm, ToSafe, Unit, Var, fresh_name,
)
from ramrec_types import (
    Arrow, ConstF, Functor, GroundType, IdF, MuT, SumF, apply_functor,
    functor_size, unfold,
)
from value_heap import Heap, ValueRef, VertexKind, compressed_size, numeral, total_vertices

logger = logging.getLogger(__name__)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

SEMANTICS = ('td', 'dp')


class Environment:
    """Stack of bindings into one heap; lookups see the most recent binding"""

    def __init__(self, heap: Optional[Heap] = None):
        self.heap = heap if heap is not None else Heap()
        self.stack: List[Tuple[str, ValueRef]] = []

    @classmethod
    def of(cls, heap: Heap, bindings: Dict[str, ValueRef]) -> 'Environment':
        env = cls(heap)
        for name, value in bindings.items():
            env.push(name, value)
        return env

    def push(self, name: str, value: ValueRef):
        if value.heap is not self.heap:
            raise HeapInvariantError(f"'{name}' is bound to a value from another heap")
        self.stack.append((name, value))

    def pop(self):
        self.stack.pop()

    def lookup(self, name: str) -> ValueRef:
        for bound, value in reversed(self.stack):
            if bound == name:
                return value
        raise EvaluationError(f"unbound variable '{name}' at run time")

    def __len__(self) -> int:
        return len(self.stack)

    def __contains__(self, name: str) -> bool:
        return any(bound == name for bound, _ in self.stack)

    def bindings(self) -> Dict[str, ValueRef]:
        return dict(self.stack)

    def copy(self) -> 'Environment':
        env = Environment(self.heap)
        env.stack = list(self.stack)
        return env


@dataclass
class CostMeter:
    """Derivation-tree node count plus fold instrumentation.

    With a budget, charging past it aborts the evaluation."""
    nodes: int = 0
    fold_steps: int = 0
    memo_hits: int = 0
    cs_nodes: int = 0
    budget: Optional[int] = field(default=None, compare=False)

    def charge(self, amount: int = 1):
        self.nodes += amount
        if self.budget is not None and self.nodes > self.budget:
            raise StepBudgetExceeded(f"evaluation needs more than {self.budget} derivation nodes")

    def to_dict(self) -> Dict[str, int]:
        return {'nodes': self.nodes, 'fold_steps': self.fold_steps,
                'memo_hits': self.memo_hits, 'cs_nodes': self.cs_nodes}


# ---------- functor reduction ----------

def _typed(term: Term, ty) -> Term:
    term.ty = ty
    return term


def reduce_functor(functor: Functor, f: Term) -> Term:
    """The term g with (P f): P(dom f) -> P(cod f).

    Id f ~> f, C f ~> fn x => x, sums become a case split and products a
    pairing. When f carries an arrow type the result is fully typed."""
    arrow = f.ty if isinstance(f.ty, Arrow) else None
    return _reduce(functor, f, arrow.arg if arrow else None, arrow.result if arrow else None)


def _reduce(functor: Functor, f: Term, dom: Optional[GroundType], cod: Optional[GroundType]) -> Term:
    if isinstance(functor, IdF):
        return f
    typed = dom is not None and cod is not None
    src = apply_functor(functor, dom) if typed else None
    dst = apply_functor(functor, cod) if typed else None
    arrow = Arrow(src, dst) if typed else None
    if isinstance(functor, ConstF):
        x = fresh_name('x', printable=False)
        return _typed(Lam(x, _typed(Var(x), src), src), arrow)
    w = fresh_name('w', printable=False)
    g1 = _reduce(functor.left, f, dom, cod)
    g2 = _reduce(functor.right, f, dom, cod)
    if isinstance(functor, SumF):
        x1 = fresh_name('x', printable=False)
        x2 = fresh_name('x', printable=False)
        left = _typed(Inj(1, _typed(App(g1, _typed(Var(x1), src and src.left)), dst and dst.left)), dst)
        right = _typed(Inj(2, _typed(App(g2, _typed(Var(x2), src and src.right)), dst and dst.right)), dst)
        body = _typed(Case(_typed(Var(w), src), x1, left, x2, right), dst)
    else:
        first = _typed(App(g1, _typed(Proj(1, _typed(Var(w), src)), src and src.left)), dst and dst.left)
        second = _typed(App(g2, _typed(Proj(2, _typed(Var(w), src)), src and src.right)), dst and dst.right)
        body = _typed(Pair(first, second), dst)
    return _typed(Lam(w, body, src), arrow)


def fold_map(fold: Fold) -> Term:
    """g = P(fn k => fold(f, k)), the functor reduction of the recursive call"""
    delta = MuT(fold.datatype.functor)
    k = fresh_name('k', printable=False)
    recursive = _typed(Fold(fold.datatype, fold.step, _typed(Var(k), delta)), fold.ty)
    return reduce_functor(delta.functor, _typed(Lam(k, recursive, delta), Arrow(delta, fold.ty)))


def unroll_fold(fold: Fold, arg: Term, g: Term) -> Term:
    """f(g(des arg)), the body a top-down fold rewrites to"""
    delta = MuT(fold.datatype.functor)
    unfolded = _typed(Des(fold.datatype, arg), unfold(delta))
    return _typed(App(fold.step, _typed(App(g, unfolded), fold.step.annotation)), fold.ty)


@dataclass
class FoldPlan:
    """Unrolled body of a top-down fold over the variable var, built once per step"""
    var: str
    body: Term

    @classmethod
    def build(cls, fold: Fold) -> 'FoldPlan':
        var = fresh_name('k', printable=False)
        arg = _typed(Var(var), MuT(fold.datatype.functor))
        return cls(var, unroll_fold(fold, arg, fold_map(fold)))


# ---------- evaluation ----------

class Evaluator:
    """Evaluates checked terms in one heap with one fold strategy"""

    def __init__(self, heap: Heap, semantics: str = 'td', meter: Optional[CostMeter] = None):
        if semantics not in SEMANTICS:
            raise RamrecError(f"unknown semantics '{semantics}' (use td or dp)", code='UsageError')
        self.heap = heap
        self.semantics = semantics
        self.meter = meter if meter is not None else CostMeter()
        self.plans: Dict[int, FoldPlan] = {}
        self.rules: Dict[type, Callable[[Term, Environment], int]] = {
            Var: self._var, Unit: self._unit, Pair: self._pair, Proj: self._proj,
            Inj: self._inj, Case: self._case, App: self._app, Con: self._con,
            SafeCon: self._con, Des: self._des, SafeDes: self._des, ToSafe: self._coerce,
            ToNorm: self._coerce, CS: self._cs, Fold: self._fold,
        }

    def evaluate(self, term: Term, env: Environment) -> ValueRef:
        if not isinstance(term.ty, GroundType):
            raise EvaluationError(f"cannot evaluate {type(term).__name__}: not a checked ground term")
        return ValueRef(self.heap, self.eval(term, env), term.ty)

    def apply(self, fn: Lam, arg: ValueRef, env: Optional[Environment] = None) -> ValueRef:
        """Value of fn applied to an existing value (one App node)"""
        env = env if env is not None else Environment(self.heap)
        result_type = fn.ty.result if isinstance(fn.ty, Arrow) else fn.body.ty
        self.meter.charge()
        env.push(fn.name, arg)
        try:
            root = self.eval(fn.body, env)
        finally:
            env.pop()
        return ValueRef(self.heap, root, result_type)

    def eval(self, term: Term, env: Environment) -> int:
        rule = self.rules.get(type(term))
        if rule is None:
            raise EvaluationError(f"no evaluation rule for {type(term).__name__}")
        self.meter.charge()
        return rule(term, env)

    def vertex(self, index: int, kind: VertexKind, construct: str):
        vertex = self.heap[index]
        if vertex.kind is not kind:
            raise EvaluationError(f"{construct} expected a {kind.value} vertex, found {vertex.label()}")
        return vertex

    def _var(self, t: Var, env: Environment) -> int:
        return env.lookup(t.name).root

    def _unit(self, t: Unit, env: Environment) -> int:
        return self.heap.unit()

    def _pair(self, t: Pair, env: Environment) -> int:
        first = self.eval(t.first, env)
        second = self.eval(t.second, env)
        return self.heap.pair(first, second, t.ty)

    def _proj(self, t: Proj, env: Environment) -> int:
        return self.vertex(self.eval(t.body, env), VertexKind.PAIR, 'fst/snd').children[t.index - 1]

    def _inj(self, t: Inj, env: Environment) -> int:
        return self.heap.inj(t.index, self.eval(t.body, env), t.ty)

    def _case(self, t: Case, env: Environment) -> int:
        subject = t.subject.ty
        vertex = self.vertex(self.eval(t.subject, env), VertexKind.INJ, 'case')
        if vertex.index == 1:
            name, arm, gamma = t.left_name, t.left, subject.left
        else:
            name, arm, gamma = t.right_name, t.right, subject.right
        env.push(name, ValueRef(self.heap, vertex.children[0], gamma))
        try:
            return self.eval(arm, env)
        finally:
            env.pop()

    def _app(self, t: App, env: Environment) -> int:
        if not isinstance(t.fn, Lam):
            raise EvaluationError("application of a non-lambda")
        arg = self.eval(t.arg, env)
        env.push(t.fn.name, ValueRef(self.heap, arg, t.arg.ty))
        try:
            return self.eval(t.fn.body, env)
        finally:
            env.pop()

    def _con(self, t: Term, env: Environment) -> int:
        return self.heap.con(self.eval(t.body, env), t.ty)

    def _des(self, t: Term, env: Environment) -> int:
        return self.vertex(self.eval(t.body, env), VertexKind.CON, 'des').children[0]

    def _coerce(self, t: Term, env: Environment) -> int:
        return self.eval(t.body, env)

    def _cs(self, t: CS, env: Environment) -> int:
        value = ValueRef(self.heap, self.eval(t.body, env), t.datatype)
        cs = compressed_size(value)
        compression = total_vertices(value) + cs
        self.meter.cs_nodes += compression
        self.meter.charge(compression + 1)
        return numeral(self.heap, cs).root

    def _fold(self, t: Fold, env: Environment) -> int:
        if self.semantics == 'dp':
            return self._fold_dp(t, env)
        return self._fold_td(t, env)

    def _fold_td(self, t: Fold, env: Environment) -> int:
        arg = self.eval(t.arg, env)
        plan = self.plans.get(id(t.step))
        if plan is None:
            plan = self.plans[id(t.step)] = FoldPlan.build(t)
        self.meter.charge(functor_size(t.datatype.functor))
        self.meter.fold_steps += 1
        env.push(plan.var, ValueRef(self.heap, arg, MuT(t.datatype.functor)))
        try:
            return self.eval(plan.body, env)
        finally:
            env.pop()

    def _fold_dp(self, t: Fold, env: Environment) -> int:
        functor = t.datatype.functor
        root = self.eval(t.arg, env)
        memo: Dict[int, int] = {}
        step = t.step
        charge = functor_size(functor)
        for index in sorted(self.recursive_vertices(functor, root)):
            view = self.view(functor, self.heap[index].children[0], step.annotation, memo)
            self.meter.charge(charge + 1)
            self.meter.fold_steps += 1
            env.push(step.name, ValueRef(self.heap, view, step.annotation))
            try:
                memo[index] = self.eval(step.body, env)
            finally:
                env.pop()
        return memo[root]

    def recursive_vertices(self, functor: Functor, root: int) -> List[int]:
        """Constructor vertices reachable from root through recursive positions"""
        found = {root}
        stack = [root]
        while stack:
            con = self.vertex(stack.pop(), VertexKind.CON, 'fold')
            for index in self._id_positions(functor, con.children[0]):
                if index not in found:
                    found.add(index)
                    stack.append(index)
        return list(found)

    def _id_positions(self, functor: Functor, index: int) -> List[int]:
        if isinstance(functor, IdF):
            return [index]
        if isinstance(functor, ConstF):
            return []
        vertex = self.heap[index]
        if isinstance(functor, SumF):
            if vertex.kind is not VertexKind.INJ:
                raise EvaluationError(f"fold expected an injection vertex, found {vertex.label()}")
            return self._id_positions(functor.left if vertex.index == 1 else functor.right, vertex.children[0])
        if vertex.kind is not VertexKind.PAIR:
            raise EvaluationError(f"fold expected a pair vertex, found {vertex.label()}")
        return (self._id_positions(functor.left, vertex.children[0])
                + self._id_positions(functor.right, vertex.children[1]))

    def view(self, functor: Functor, index: int, gamma: GroundType, memo: Dict[int, int]) -> int:
        """P-shaped copy of a vertex body with recursive positions replaced by memo entries"""
        if isinstance(functor, IdF):
            self.meter.charge()
            self.meter.memo_hits += 1
            return memo[index]
        if isinstance(functor, ConstF):
            return index
        vertex = self.heap[index]
        if isinstance(functor, SumF):
            side = functor.left if vertex.index == 1 else functor.right
            part = gamma.left if vertex.index == 1 else gamma.right
            return self.heap.inj(vertex.index, self.view(side, vertex.children[0], part, memo), gamma)
        first = self.view(functor.left, vertex.children[0], gamma.left, memo)
        second = self.view(functor.right, vertex.children[1], gamma.right, memo)
        return self.heap.pair(first, second, gamma)


def evaluate(term: Term, env: Optional[Environment] = None, semantics: str = 'td',
             meter: Optional[CostMeter] = None) -> ValueRef:
    env = env if env is not None else Environment()
    return Evaluator(env.heap, semantics, meter).evaluate(term, env)


def eval_td(term: Term, env: Optional[Environment] = None, meter: Optional[CostMeter] = None) -> ValueRef:
    return evaluate(term, env, 'td', meter)


def eval_dp(term: Term, env: Optional[Environment] = None, meter: Optional[CostMeter] = None) -> ValueRef:
    return evaluate(term, env, 'dp', meter)


def cost_td(term: Term, env: Optional[Environment] = None) -> int:
    meter = CostMeter()
    eval_td(term, env, meter)
    return meter.nodes


def cost_dp(term: Term, env: Optional[Environment] = None) -> int:
    meter = CostMeter()
    eval_dp(term, env, meter)
    return meter.nodes


def apply_function(fn: Lam, arg: ValueRef, semantics: str = 'td',
                   meter: Optional[CostMeter] = None) -> ValueRef:
    """fn applied to arg; the result lives in arg's heap"""
    return Evaluator(arg.heap, semantics, meter).apply(fn, arg)


def describe_meter(meter: CostMeter) -> str:
    return (f"nodes={meter.nodes} fold_steps={meter.fold_steps} "
            f"memo_hits={meter.memo_hits} cs_nodes={meter.cs_nodes}")


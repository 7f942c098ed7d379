#!/usr/bin/env python3
"""
CEK Machine
Context, environment and continuation-stack machine for the top-down
strategy. Each step fires exactly one rule; the run is a left-to-right depth
first walk of the evaluation derivation, so the step count stays within three
times the top-down cost.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from ramrec_errors import StepBudgetExceeded, StuckState
from ramrec_terms import (
    App, CS, Case, Con, Des, Fold, Inj, Lam, Pair, Proj, SafeCon, SafeDes, Term,
    ToNorm, ToSafe, Unit, Var,
)
from ramrec_types import GroundType, MuT
from evaluator import Environment, fold_map, unroll_fold
from value_heap import ValueRef, VertexKind, compressed_size, numeral
from ramrec_syntax import pretty

logger = logging.getLogger(__name__)


# ---------- continuation records ----------

@dataclass
class App1:
    fn: Lam


@dataclass
class App2:
    pass


@dataclass
class Pair1:
    second: Term
    ty: GroundType


@dataclass
class Pair2:
    first: ValueRef
    ty: GroundType


@dataclass
class ProjRec:
    index: int
    ty: GroundType


@dataclass
class InjRec:
    index: int
    ty: GroundType


@dataclass
class Case1:
    left_name: str
    left: Term
    right_name: str
    right: Term
    subject: GroundType


@dataclass
class Case2:
    pass


@dataclass
class Constr:
    ty: GroundType
    safe: bool = False


@dataclass
class Destr:
    ty: GroundType
    safe: bool = False


@dataclass
class Coerce:
    ty: GroundType


@dataclass
class CSRec:
    datatype: MuT


Record = Union[App1, App2, Pair1, Pair2, ProjRec, InjRec, Case1, Case2, Constr, Destr, Coerce, CSRec]


@dataclass
class Expr:
    term: Term


@dataclass
class Val:
    value: ValueRef


@dataclass
class CekState:
    """(context, environment, continuation); kont grows at the end"""
    context: Union[Expr, Val]
    env: Environment
    kont: List[Record] = field(default_factory=list)
    maps: Dict[int, Term] = field(default_factory=dict, repr=False)
    rule: Optional[str] = None

    @property
    def final(self) -> bool:
        return isinstance(self.context, Val) and not self.kont

    def summary(self, width: int = 48) -> str:
        if isinstance(self.context, Val):
            value = self.context.value
            return f"<{value.vertex.label()} #{value.root}>"
        text = pretty(self.context.term)
        return text if len(text) <= width else text[:width - 3] + '...'


def cek_init(term: Term, env: Optional[Environment] = None) -> CekState:
    return CekState(Expr(term), env if env is not None else Environment())


# ---------- transitions ----------

def cek_step(state: CekState) -> CekState:
    """Fire the one applicable rule; the environment and stack are reused"""
    if state.final:
        raise StuckState("the machine is already in a final state")
    if isinstance(state.context, Expr):
        rule, context = _expr_step(state, state.context.term)
    else:
        rule, context = _value_step(state, state.context.value)
    return CekState(context, state.env, state.kont, state.maps, rule)


def _expr_step(state: CekState, t: Term) -> Tuple[str, Union[Expr, Val]]:
    env, kont, heap = state.env, state.kont, state.env.heap
    if isinstance(t, Var):
        return 'R1', Val(env.lookup(t.name).retype(t.ty))
    if isinstance(t, App):
        if not isinstance(t.fn, Lam):
            raise StuckState("application of a non-lambda")
        kont.append(App1(t.fn))
        return 'R2a', Expr(t.arg)
    if isinstance(t, Unit):
        return 'R4', Val(ValueRef(heap, heap.unit(), t.ty))
    if isinstance(t, Pair):
        kont.append(Pair1(t.second, t.ty))
        return 'R4a', Expr(t.first)
    if isinstance(t, Proj):
        kont.append(ProjRec(t.index, t.ty))
        return 'R5a', Expr(t.body)
    if isinstance(t, Inj):
        kont.append(InjRec(t.index, t.ty))
        return 'R6a', Expr(t.body)
    if isinstance(t, Case):
        kont.append(Case1(t.left_name, t.left, t.right_name, t.right, t.subject.ty))
        return 'R7a', Expr(t.subject)
    if isinstance(t, Con):
        kont.append(Constr(t.ty))
        return 'R8a', Expr(t.body)
    if isinstance(t, Des):
        kont.append(Destr(t.ty))
        return 'R9a', Expr(t.body)
    if isinstance(t, Fold):
        g = state.maps.get(id(t.step))
        if g is None:
            g = state.maps[id(t.step)] = fold_map(t)
        return 'R10', Expr(unroll_fold(t, t.arg, g))
    if isinstance(t, SafeCon):
        kont.append(Constr(t.ty, safe=True))
        return 'R11a', Expr(t.body)
    if isinstance(t, SafeDes):
        kont.append(Destr(t.ty, safe=True))
        return 'R11c', Expr(t.body)
    if isinstance(t, (ToSafe, ToNorm)):
        kont.append(Coerce(t.ty))
        return 'R12a', Expr(t.body)
    if isinstance(t, CS):
        kont.append(CSRec(t.datatype))
        return 'R13a', Expr(t.body)
    raise StuckState(f"no rule for {type(t).__name__}")


def _value_step(state: CekState, v: ValueRef) -> Tuple[str, Union[Expr, Val]]:
    env, kont, heap = state.env, state.kont, state.env.heap
    record = kont.pop()
    if isinstance(record, App1):
        env.push(record.fn.name, v)
        kont.append(App2())
        return 'R2b', Expr(record.fn.body)
    if isinstance(record, App2):
        env.pop()
        return 'R2c', Val(v)
    if isinstance(record, Pair1):
        kont.append(Pair2(v, record.ty))
        return 'R4b', Expr(record.second)
    if isinstance(record, Pair2):
        return 'R4c', Val(ValueRef(heap, heap.pair(record.first.root, v.root, record.ty), record.ty))
    vertex = v.vertex
    if isinstance(record, ProjRec):
        _expect(vertex.kind, VertexKind.PAIR, record)
        return 'R5b', Val(ValueRef(heap, vertex.children[record.index - 1], record.ty))
    if isinstance(record, InjRec):
        return 'R6b', Val(ValueRef(heap, heap.inj(record.index, v.root, record.ty), record.ty))
    if isinstance(record, Case1):
        _expect(vertex.kind, VertexKind.INJ, record)
        if vertex.index == 1:
            name, arm, gamma = record.left_name, record.left, record.subject.left
        else:
            name, arm, gamma = record.right_name, record.right, record.subject.right
        env.push(name, ValueRef(heap, vertex.children[0], gamma))
        kont.append(Case2())
        return 'R7b', Expr(arm)
    if isinstance(record, Case2):
        env.pop()
        return 'R7c', Val(v)
    if isinstance(record, Constr):
        root = heap.con(v.root, record.ty)
        return ('R11b' if record.safe else 'R8b'), Val(ValueRef(heap, root, record.ty))
    if isinstance(record, Destr):
        _expect(vertex.kind, VertexKind.CON, record)
        return ('R11d' if record.safe else 'R9b'), Val(ValueRef(heap, vertex.children[0], record.ty))
    if isinstance(record, Coerce):
        return 'R12b', Val(v.retype(record.ty))
    if isinstance(record, CSRec):
        cs = compressed_size(v.retype(record.datatype))
        return 'R13b', Val(numeral(heap, cs))
    raise StuckState(f"unknown record {record!r}")


def _expect(kind: VertexKind, expected: VertexKind, record):
    if kind is not expected:
        raise StuckState(f"{type(record).__name__} met a {kind.value} vertex")


# ---------- driver ----------

def trace_line(state: CekState) -> str:
    return f"{state.rule} | {state.summary()} | {len(state.kont)}"


def cek_run(term: Term, env: Optional[Environment] = None, trace: bool = False,
            max_steps: Optional[int] = None) -> Tuple[ValueRef, int, List[str]]:
    """Run to a final state; returns the value, the step count and the trace"""
    state = cek_init(term, env)
    steps = 0
    lines: List[str] = []
    while not state.final:
        if max_steps is not None and steps >= max_steps:
            raise StepBudgetExceeded(f"no final state after {max_steps} steps")
        state = cek_step(state)
        steps += 1
        if trace:
            lines.append(trace_line(state))
    logger.debug(f"📊 CEK finished in {steps} steps")
    return state.context.value, steps, lines


def pending_pops(state: CekState) -> int:
    """Number of records that will pop the environment"""
    return sum(1 for record in state.kont if isinstance(record, (App2, Case2)))

#!/usr/bin/env python3
"""
Ramrec Type Checker
Bidirectional checking of core terms for S1, RS1 and RS1.1. Every node gets its
type stored in Term.ty, which the evaluators use to tag the vertices they build.
"""

import logging
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, List, Optional, Tuple

from ramrec_errors import TypeCheckError
from ramrec_terms import (
    App, CS, Case, Con, Des, Fold, Inj, Lam, Pair, Proj, SafeCon, SafeDes, Term,
    ToNorm, ToSafe, Unit, Var, free_vars,
)
from ramrec_types import (
    NAT, Arrow, Calculus, ConstF, Functor, GroundType, IdF, MuT, ProdF, ProdT,
    SumF, SumT, Type, UnitT, format_type, is_inhabited, is_normal, is_safe, mu_types,
    norm, safe, unfold,
)

logger = logging.getLogger(__name__)

Context = List[Tuple[str, GroundType]]

SIDE_CONDITIONS = frozenset({'case', 'fold', 'to_norm'})


@dataclass
class Judgment:
    """context ⊢ subject : type"""
    context: Context
    subject: Term
    type: Type
    level: Calculus = Calculus.S1
    name: Optional[str] = field(default=None, compare=False)

    def open(self) -> 'Judgment':
        """Ground judgment for a function body: x : arg ⊢ body : result"""
        if isinstance(self.type, Arrow) and isinstance(self.subject, Lam):
            lam = self.subject
            return Judgment(self.context + [(lam.name, self.type.arg)], lam.body,
                            self.type.result, self.level, self.name)
        return self

    def format(self, names: Optional[Dict[GroundType, str]] = None) -> str:
        context = ', '.join(f"{x} : {format_type(t, names)}" for x, t in self.context)
        return f"{context} ⊢ {self.name or 'e'} : {format_type(self.type, names)}"


class _NeedsAnnotation(TypeCheckError):
    pass


def match_functor(functor: Functor, gamma: GroundType) -> Tuple[bool, List[GroundType]]:
    """Does gamma have the shape P(X)? Returns the types found at the Id positions"""
    if isinstance(functor, IdF):
        return True, [gamma]
    if isinstance(functor, ConstF):
        return functor.obj == gamma, []
    if isinstance(functor, SumF) and isinstance(gamma, SumT) or isinstance(functor, ProdF) and isinstance(gamma, ProdT):
        ok_left, left = match_functor(functor.left, gamma.left)
        ok_right, right = match_functor(functor.right, gamma.right)
        return ok_left and ok_right, left + right
    return False, []


class TypeChecker:
    """Checks terms at one calculus level"""

    def __init__(self, level: Calculus = Calculus.S1,
                 names: Optional[Dict[GroundType, str]] = None,
                 disabled_conditions: AbstractSet[str] = frozenset()):
        self.level = level
        self.names = names or {}
        self.disabled = frozenset(disabled_conditions)

    def fmt(self, gamma) -> str:
        return format_type(gamma, self.names)

    def fail(self, message: str, code: str = 'TypeMismatch'):
        raise TypeCheckError(message, code=code)

    # ---------- level and well-formedness ----------

    def require(self, level: Calculus, construct: str):
        if self.level.rank < level.rank:
            self.fail(f"{construct} needs %calculus {level.value} (program is {self.level.value})",
                      'LevelViolation')

    def well_formed(self, gamma: GroundType):
        if not is_normal(gamma):
            self.require(Calculus.RS1, f"safe type '{self.fmt(gamma)}'")
        for mu in mu_types(gamma):
            if not is_inhabited(mu):
                self.fail(f"type '{self.fmt(mu)}' has no values", 'UninhabitedType')

    def datatype(self, delta: MuT, construct: str) -> MuT:
        self.well_formed(delta)
        if delta.safe:
            self.fail(f"{construct} takes a normal datatype, got '{self.fmt(delta)}'")
        return delta

    def expect(self, term: Term, found: GroundType, expected: GroundType) -> GroundType:
        if found != expected:
            self.fail(f"expected '{self.fmt(expected)}', found '{self.fmt(found)}' "
                      f"in {type(term).__name__}")
        return found

    # ---------- entry point ----------

    def typecheck(self, context: Context, term: Term) -> Type:
        for _, gamma in context:
            self.well_formed(gamma)
        if isinstance(term, Lam):
            if term.annotation is None:
                self.fail(f"top-level function needs an annotated binder: fn ({term.name} : T) => ...")
            self.well_formed(term.annotation)
            result = self.infer(context + [(term.name, term.annotation)], term.body)
            term.ty = Arrow(term.annotation, result)
            return term.ty
        return self.infer(context, term)

    # ---------- inference ----------

    def lookup(self, context: Context, name: str) -> GroundType:
        for bound, gamma in reversed(context):
            if bound == name:
                return gamma
        self.fail(f"unbound identifier '{name}'", 'UnboundIdentifier')

    def infer(self, context: Context, term: Term) -> GroundType:
        gamma = self._infer(context, term)
        term.ty = gamma
        return gamma

    def _infer(self, ctx: Context, t: Term) -> GroundType:
        if isinstance(t, Var):
            return self.lookup(ctx, t.name)
        if isinstance(t, Unit):
            if t.safe:
                self.require(Calculus.RS1, 'safe ()')
            return UnitT(t.safe)
        if isinstance(t, Pair):
            return ProdT(self.infer(ctx, t.first), self.infer(ctx, t.second))
        if isinstance(t, Proj):
            body = self.infer(ctx, t.body)
            if not isinstance(body, ProdT):
                self.fail(f"{'fst' if t.index == 1 else 'snd'} of non-product '{self.fmt(body)}'")
            return body.left if t.index == 1 else body.right
        if isinstance(t, Inj):
            raise _NeedsAnnotation("cannot infer the type of an injection here; add an annotation (e : T)")
        if isinstance(t, Case):
            return self.case(ctx, t, None)
        if isinstance(t, App):
            return self.app(ctx, t, None)
        if isinstance(t, Lam):
            self.fail("functions are not values: a lambda may only be applied or used as a fold step")
        if isinstance(t, Con):
            delta = self.datatype(t.datatype, 'con')
            self.check(ctx, t.body, unfold(delta))
            return delta
        if isinstance(t, Des):
            delta = self.datatype(t.datatype, 'des')
            self.check(ctx, t.body, delta)
            return unfold(delta)
        if isinstance(t, SafeCon):
            self.require(Calculus.RS1, 'scon')
            delta = safe(self.datatype(MuT(t.datatype.functor), 'scon'))
            self.check(ctx, t.body, unfold(delta))
            return delta
        if isinstance(t, SafeDes):
            self.require(Calculus.RS1, 'sdes')
            delta = safe(self.datatype(MuT(t.datatype.functor), 'sdes'))
            self.check(ctx, t.body, delta)
            return unfold(delta)
        if isinstance(t, ToSafe):
            self.require(Calculus.RS1, 'toSafe')
            return safe(self.infer(ctx, t.body))
        if isinstance(t, ToNorm):
            self.require(Calculus.RS1, 'toNorm')
            body = self.infer(ctx, t.body)
            if 'to_norm' not in self.disabled:
                for name in sorted(free_vars(t.body)):
                    gamma = self.lookup(ctx, name)
                    if not is_normal(gamma):
                        self.fail(f"toNorm body mentions '{name}' of non-normal type '{self.fmt(gamma)}'",
                                  'SideConditionToNorm')
            return norm(body)
        if isinstance(t, CS):
            self.require(Calculus.RS1_1, 'cs')
            delta = self.datatype(t.datatype, 'cs')
            self.check(ctx, t.body, delta)
            return NAT
        if isinstance(t, Fold):
            return self.fold(ctx, t, None)
        self.fail(f"unknown term {type(t).__name__}")

    # ---------- checking ----------

    def check(self, context: Context, term: Term, expected: GroundType) -> GroundType:
        if isinstance(term, Inj):
            if not isinstance(expected, SumT):
                self.fail(f"{'inl' if term.index == 1 else 'inr'} where '{self.fmt(expected)}' was expected")
            self.check(context, term.body, expected.left if term.index == 1 else expected.right)
        elif isinstance(term, Pair) and isinstance(expected, ProdT):
            self.check(context, term.first, expected.left)
            self.check(context, term.second, expected.right)
        elif isinstance(term, Case):
            self.case(context, term, expected)
        elif isinstance(term, App):
            self.app(context, term, expected)
        elif isinstance(term, Fold):
            self.fold(context, term, expected)
        else:
            self.expect(term, self.infer(context, term), expected)
        term.ty = expected
        return expected

    def case(self, ctx: Context, t: Case, expected: Optional[GroundType]) -> GroundType:
        subject = self.infer(ctx, t.subject)
        if not isinstance(subject, SumT):
            self.fail(f"case on non-sum '{self.fmt(subject)}'")
        left_ctx = ctx + [(t.left_name, subject.left)]
        right_ctx = ctx + [(t.right_name, subject.right)]
        if expected is not None:
            self.check(left_ctx, t.left, expected)
            self.check(right_ctx, t.right, expected)
            result = expected
        else:
            try:
                result = self.infer(left_ctx, t.left)
                self.check(right_ctx, t.right, result)
            except _NeedsAnnotation:
                result = self.infer(right_ctx, t.right)
                self.check(left_ctx, t.left, result)
        if self.level.ramified and 'case' not in self.disabled:
            if not is_normal(subject) and not is_safe(result):
                self.fail(f"case on '{self.fmt(subject)}' must return a safe type, not '{self.fmt(result)}'",
                          'SideConditionCase')
        return result

    def app(self, ctx: Context, t: App, expected: Optional[GroundType]) -> GroundType:
        if not isinstance(t.fn, Lam):
            self.fail("only lambdas can be applied")
        lam = t.fn
        if lam.annotation is not None:
            self.well_formed(lam.annotation)
            arg = self.check(ctx, t.arg, lam.annotation)
        else:
            arg = self.infer(ctx, t.arg)
        inner = ctx + [(lam.name, arg)]
        if expected is not None:
            result = self.check(inner, lam.body, expected)
        else:
            result = self.infer(inner, lam.body)
        lam.ty = Arrow(arg, result)
        return result

    def fold(self, ctx: Context, t: Fold, expected: Optional[GroundType]) -> GroundType:
        if t.datatype.safe and 'fold' not in self.disabled:
            self.fail(f"fold over safe datatype '{self.fmt(t.datatype)}'", 'SideConditionFoldNormal')
        delta = MuT(t.datatype.functor)
        self.well_formed(delta)
        arg = self.infer(ctx, t.arg)
        if arg != delta:
            if norm(arg) != delta:
                self.expect(t.arg, arg, delta)
            elif 'fold' not in self.disabled:
                self.fail(f"fold argument has safe type '{self.fmt(arg)}'", 'SideConditionFoldNormal')
        step = t.step
        if step.annotation is None:
            self.fail(f"fold step needs an annotated binder: fn ({step.name} : T) => ...")
        self.well_formed(step.annotation)
        matched, positions = match_functor(delta.functor, step.annotation)
        if not matched:
            self.fail(f"fold step takes '{self.fmt(step.annotation)}', "
                      f"which is not an instance of the functor of '{self.fmt(delta)}'")
        inner = ctx + [(step.name, step.annotation)]
        if positions:
            result = positions[0]
            for other in positions[1:]:
                if other != result:
                    self.fail(f"fold step mixes '{self.fmt(result)}' and '{self.fmt(other)}' at recursive positions")
            self.check(inner, step.body, result)
        else:
            result = self.infer(inner, step.body)
        if self.level.ramified and not is_safe(result) and 'fold' not in self.disabled:
            self.fail(f"fold result '{self.fmt(result)}' must be safe")
        if expected is not None:
            self.expect(t, result, expected)
        step.ty = Arrow(step.annotation, result)
        return result


def typecheck(level: Calculus, context: Context, term: Term,
              names: Optional[Dict[GroundType, str]] = None,
              disabled_conditions: AbstractSet[str] = frozenset()) -> Type:
    """Type of term under context at the given calculus, filling in Term.ty"""
    return TypeChecker(level, names, disabled_conditions).typecheck(list(context), term)


def judge(level: Calculus, context: Context, term: Term, name: Optional[str] = None,
          names: Optional[Dict[GroundType, str]] = None) -> Judgment:
    gamma = typecheck(level, context, term, names)
    return Judgment(list(context), term, gamma, level, name)

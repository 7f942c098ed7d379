#!/usr/bin/env python3
"""
Ramrec Terms
Core abstract syntax shared by the checker, both evaluators and the CEK machine.
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Set

from ramrec_types import GroundType, MuT

_counter = itertools.count(1)


def fresh_name(hint: str = 'p', printable: bool = True) -> str:
    """A binder name no program writes; unprintable names never reach the parser"""
    prefix = '_' if printable else '%'
    return f"{prefix}{hint}{next(_counter)}"


@dataclass
class Term:
    """Core expression node; ty is filled in by the type checker"""
    ty: Optional[Any] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class Var(Term):
    name: str


@dataclass
class Lam(Term):
    name: str
    body: Term
    annotation: Optional[GroundType] = None


@dataclass
class App(Term):
    fn: Term
    arg: Term


@dataclass
class Unit(Term):
    safe: bool = False


@dataclass
class Pair(Term):
    first: Term
    second: Term


@dataclass
class Proj(Term):
    index: int
    body: Term


@dataclass
class Inj(Term):
    index: int
    body: Term


@dataclass
class Case(Term):
    subject: Term
    left_name: str
    left: Term
    right_name: str
    right: Term


@dataclass
class Con(Term):
    datatype: MuT
    body: Term


@dataclass
class Des(Term):
    datatype: MuT
    body: Term


@dataclass
class Fold(Term):
    datatype: MuT
    step: Lam
    arg: Term


@dataclass
class SafeCon(Term):
    datatype: MuT
    body: Term


@dataclass
class SafeDes(Term):
    datatype: MuT
    body: Term


@dataclass
class ToSafe(Term):
    body: Term


@dataclass
class ToNorm(Term):
    body: Term


@dataclass
class CS(Term):
    datatype: MuT
    body: Term


def children(term: Term) -> List[Term]:
    if isinstance(term, (Var, Unit)):
        return []
    if isinstance(term, Lam):
        return [term.body]
    if isinstance(term, App):
        return [term.fn, term.arg]
    if isinstance(term, Pair):
        return [term.first, term.second]
    if isinstance(term, Case):
        return [term.subject, term.left, term.right]
    if isinstance(term, Fold):
        return [term.step, term.arg]
    return [term.body]


def subterms(term: Term) -> Iterator[Term]:
    stack = [term]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(children(current)))


def term_size(term: Term) -> int:
    return sum(1 for _ in subterms(term))


def free_vars(term: Term) -> Set[str]:
    if isinstance(term, Var):
        return {term.name}
    if isinstance(term, Lam):
        return free_vars(term.body) - {term.name}
    if isinstance(term, Case):
        return (free_vars(term.subject)
                | (free_vars(term.left) - {term.left_name})
                | (free_vars(term.right) - {term.right_name}))
    result: Set[str] = set()
    for child in children(term):
        result |= free_vars(child)
    return result


def alpha_equivalent(a: Term, b: Term) -> bool:
    """Equality up to renaming of bound variables"""
    return _alpha(a, b, {}, {}, 0)


def _alpha(a: Term, b: Term, left: Dict[str, int], right: Dict[str, int], depth: int) -> bool:
    # bound names map to their binder depth on both sides
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return left.get(a.name, a.name) == right.get(b.name, b.name)
    if isinstance(a, Lam):
        if a.annotation != b.annotation:
            return False
        return _alpha(a.body, b.body, {**left, a.name: depth}, {**right, b.name: depth}, depth + 1)
    if isinstance(a, Unit):
        return a.safe == b.safe
    if isinstance(a, Case):
        return (_alpha(a.subject, b.subject, left, right, depth)
                and _alpha(a.left, b.left, {**left, a.left_name: depth},
                           {**right, b.left_name: depth}, depth + 1)
                and _alpha(a.right, b.right, {**left, a.right_name: depth},
                           {**right, b.right_name: depth}, depth + 1))
    if isinstance(a, (Proj, Inj)) and a.index != b.index:
        return False
    if isinstance(a, (Con, Des, Fold, SafeCon, SafeDes, CS)) and a.datatype != b.datatype:
        return False
    return all(_alpha(x, y, left, right, depth) for x, y in zip(children(a), children(b)))

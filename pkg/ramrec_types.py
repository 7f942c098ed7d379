#!/usr/bin/env python3
"""
Ramrec Types
Ground types, polynomial functors and the type-level operations the checker,
evaluators and analyses share: functor application, normal/safe tiers,
sequential classification, inhabitation and canonical printing.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Set, Union


class Calculus(Enum):
    """The three calculi a program can be written in"""
    S1 = 's1'
    RS1 = 'rs1'
    RS1_1 = 'rs1.1'

    @property
    def rank(self) -> int:
        return {'s1': 0, 'rs1': 1, 'rs1.1': 2}[self.value]

    @property
    def ramified(self) -> bool:
        return self.rank >= 1

    @classmethod
    def from_pragma(cls, text: str) -> 'Calculus':
        for level in cls:
            if level.value == text.strip():
                return level
        raise ValueError(f"unknown calculus '{text}'")


class Tier(Enum):
    NORMAL = 'normal'
    SAFE = 'safe'
    MIXED = 'mixed'


class Functor:
    """Polynomial functor: Id, constants, sums and products"""


@dataclass(frozen=True)
class IdF(Functor):
    pass


@dataclass(frozen=True)
class ConstF(Functor):
    obj: 'GroundType'


@dataclass(frozen=True)
class SumF(Functor):
    left: Functor
    right: Functor


@dataclass(frozen=True)
class ProdF(Functor):
    left: Functor
    right: Functor


class GroundType:
    """unit, sums, products and μP, each base type carrying a safe mark"""


@dataclass(frozen=True)
class UnitT(GroundType):
    safe: bool = False


@dataclass(frozen=True)
class SumT(GroundType):
    left: GroundType
    right: GroundType


@dataclass(frozen=True)
class ProdT(GroundType):
    left: GroundType
    right: GroundType


@dataclass(frozen=True)
class MuT(GroundType):
    functor: Functor
    safe: bool = False


@dataclass(frozen=True)
class Arrow:
    """Type of a top-level function; arrows never nest"""
    arg: GroundType
    result: GroundType


Type = Union[GroundType, Arrow]

UNIT = UnitT()
NAT = MuT(SumF(ConstF(UNIT), IdF()))


def safe(gamma: GroundType) -> GroundType:
    """Mark every base type of gamma safe"""
    if isinstance(gamma, UnitT):
        return UnitT(True)
    if isinstance(gamma, SumT):
        return SumT(safe(gamma.left), safe(gamma.right))
    if isinstance(gamma, ProdT):
        return ProdT(safe(gamma.left), safe(gamma.right))
    if isinstance(gamma, MuT):
        return MuT(gamma.functor, True)
    raise TypeError(f"not a ground type: {gamma!r}")


def norm(gamma: GroundType) -> GroundType:
    """Remove every safe mark"""
    if isinstance(gamma, UnitT):
        return UNIT
    if isinstance(gamma, SumT):
        return SumT(norm(gamma.left), norm(gamma.right))
    if isinstance(gamma, ProdT):
        return ProdT(norm(gamma.left), norm(gamma.right))
    if isinstance(gamma, MuT):
        return MuT(gamma.functor, False)
    raise TypeError(f"not a ground type: {gamma!r}")


def _marks(gamma: GroundType) -> Set[bool]:
    if isinstance(gamma, (UnitT, MuT)):
        return {gamma.safe}
    return _marks(gamma.left) | _marks(gamma.right)


def tier(gamma: GroundType) -> Tier:
    marks = _marks(gamma)
    if marks == {False}:
        return Tier.NORMAL
    if marks == {True}:
        return Tier.SAFE
    return Tier.MIXED


def is_normal(gamma: GroundType) -> bool:
    return tier(gamma) is Tier.NORMAL


def is_safe(gamma: GroundType) -> bool:
    return tier(gamma) is Tier.SAFE


def apply_functor(functor: Functor, gamma: GroundType) -> GroundType:
    """P(γ): Id ↦ γ, C_A ↦ A, sums and products componentwise"""
    if isinstance(functor, IdF):
        return gamma
    if isinstance(functor, ConstF):
        return functor.obj
    if isinstance(functor, SumF):
        return SumT(apply_functor(functor.left, gamma), apply_functor(functor.right, gamma))
    if isinstance(functor, ProdF):
        return ProdT(apply_functor(functor.left, gamma), apply_functor(functor.right, gamma))
    raise TypeError(f"not a functor: {functor!r}")


def unfold(mu: MuT) -> GroundType:
    """The type of a constructor argument: P(δ), or safe(P(δ)) for a safe δ"""
    body = apply_functor(mu.functor, norm(mu))
    return safe(body) if mu.safe else body


def degree(functor: Functor) -> int:
    if isinstance(functor, IdF):
        return 1
    if isinstance(functor, ConstF):
        return 0
    if isinstance(functor, SumF):
        return max(degree(functor.left), degree(functor.right))
    return degree(functor.left) + degree(functor.right)


def functor_size(functor: Functor) -> int:
    """Number of functor nodes"""
    if isinstance(functor, (IdF, ConstF)):
        return 1
    return 1 + functor_size(functor.left) + functor_size(functor.right)


def id_count(functor: Functor) -> int:
    """Number of Id leaves"""
    if isinstance(functor, IdF):
        return 1
    if isinstance(functor, ConstF):
        return 0
    return id_count(functor.left) + id_count(functor.right)


def has_id(functor: Functor) -> bool:
    return id_count(functor) > 0


def functor_constants(functor: Functor) -> List[GroundType]:
    if isinstance(functor, ConstF):
        return [functor.obj]
    if isinstance(functor, IdF):
        return []
    return functor_constants(functor.left) + functor_constants(functor.right)


def mu_types(gamma: GroundType) -> List[MuT]:
    """Every μ type occurring in gamma (normalized), outermost first, no repeats"""
    found: List[MuT] = []

    def visit(t: GroundType):
        if isinstance(t, MuT):
            key = MuT(t.functor)
            if key in found:
                return
            found.append(key)
            for const in functor_constants(t.functor):
                visit(const)
        elif isinstance(t, (SumT, ProdT)):
            visit(t.left)
            visit(t.right)

    visit(gamma)
    return found


def functor_inhabited(functor: Functor, hole_inhabited: bool) -> bool:
    if isinstance(functor, IdF):
        return hole_inhabited
    if isinstance(functor, ConstF):
        return is_inhabited(functor.obj)
    if isinstance(functor, SumF):
        return functor_inhabited(functor.left, hole_inhabited) or functor_inhabited(functor.right, hole_inhabited)
    return functor_inhabited(functor.left, hole_inhabited) and functor_inhabited(functor.right, hole_inhabited)


def is_inhabited(gamma: GroundType) -> bool:
    """μP is empty iff P(0) is empty"""
    if isinstance(gamma, UnitT):
        return True
    if isinstance(gamma, SumT):
        return is_inhabited(gamma.left) or is_inhabited(gamma.right)
    if isinstance(gamma, ProdT):
        return is_inhabited(gamma.left) and is_inhabited(gamma.right)
    return functor_inhabited(gamma.functor, False)


@dataclass(frozen=True)
class TypeClassification:
    sequential: bool
    hereditarily_sequential: bool
    branching: bool
    tier: Tier


def is_sequential(gamma: GroundType) -> bool:
    if isinstance(gamma, UnitT):
        return True
    if isinstance(gamma, (SumT, ProdT)):
        return is_sequential(gamma.left) and is_sequential(gamma.right)
    return degree(gamma.functor) <= 1


def is_hereditarily_sequential(gamma: GroundType) -> bool:
    return is_sequential(gamma) and all(degree(m.functor) <= 1 for m in mu_types(gamma))


def classify(gamma: GroundType) -> TypeClassification:
    sequential = is_sequential(gamma)
    return TypeClassification(
        sequential=sequential,
        hereditarily_sequential=is_hereditarily_sequential(gamma),
        branching=not sequential,
        tier=tier(gamma),
    )


def _struct_count(gamma: GroundType) -> int:
    # vertices of the non-recursive skeleton; μ vertices are paid for per constructor
    if isinstance(gamma, UnitT):
        return 1
    if isinstance(gamma, SumT):
        return 1 + max(_struct_count(gamma.left), _struct_count(gamma.right))
    if isinstance(gamma, ProdT):
        return 1 + _struct_count(gamma.left) + _struct_count(gamma.right)
    return 0


def _skeleton(functor: Functor) -> int:
    if isinstance(functor, IdF):
        return 0
    if isinstance(functor, ConstF):
        return _struct_count(functor.obj)
    if isinstance(functor, SumF):
        return 1 + max(_skeleton(functor.left), _skeleton(functor.right))
    return 1 + _skeleton(functor.left) + _skeleton(functor.right)


def vertex_bound_constant(gamma: GroundType) -> int:
    """k with total_vertices(v) <= k * (1 + size(v)) for every value v of type gamma"""
    candidates = [_struct_count(gamma), 1]
    candidates.extend(1 + _skeleton(m.functor) for m in mu_types(gamma))
    return max(candidates)


def vertex_types(gamma: GroundType) -> List[GroundType]:
    """Normalized types a vertex of a gamma-value can carry"""
    found: List[GroundType] = []

    def visit(t: GroundType):
        t = norm(t)
        if t in found:
            return
        found.append(t)
        if isinstance(t, (SumT, ProdT)):
            visit(t.left)
            visit(t.right)
        elif isinstance(t, MuT):
            visit(apply_functor(t.functor, t))

    visit(gamma)
    return found


# ---------- canonical printing ----------

_TOP, _SUM, _PROD, _ATOM = range(4)


def format_type(gamma: Type, names: Optional[Dict[GroundType, str]] = None) -> str:
    """Canonical text of a type; names maps normal μ types to declared aliases"""
    if isinstance(gamma, Arrow):
        return f"{format_type(gamma.arg, names)} -> {format_type(gamma.result, names)}"
    return _fmt(gamma, names or {}, 0, _TOP)


def _paren(text: str, needed: bool) -> str:
    return f"({text})" if needed else text


def _fmt(gamma: GroundType, names: Dict[GroundType, str], depth: int, ctx: int) -> str:
    if isinstance(gamma, UnitT):
        return 'safe unit' if gamma.safe else 'unit'
    if isinstance(gamma, MuT):
        if gamma.safe:
            return 'safe ' + _fmt(MuT(gamma.functor), names, depth, _ATOM)
        if gamma in names:
            return names[gamma]
        var = f"t{depth}"
        body = _fmt_functor(gamma.functor, var, names, depth + 1, _TOP)
        return _paren(f"mu {var}. {body}", ctx != _TOP)
    if isinstance(gamma, SumT):
        text = f"{_fmt(gamma.left, names, depth, _PROD)} + {_fmt(gamma.right, names, depth, _SUM)}"
        return _paren(text, ctx >= _PROD)
    text = f"{_fmt(gamma.left, names, depth, _ATOM)} * {_fmt(gamma.right, names, depth, _PROD)}"
    return _paren(text, ctx >= _ATOM)


def _fmt_functor(functor: Functor, var: str, names: Dict[GroundType, str], depth: int, ctx: int) -> str:
    if isinstance(functor, IdF):
        return var
    if isinstance(functor, ConstF):
        return _fmt(functor.obj, names, depth, max(ctx, _SUM) if ctx == _TOP else ctx)
    if isinstance(functor, SumF):
        text = (f"{_fmt_functor(functor.left, var, names, depth, _PROD)} + "
                f"{_fmt_functor(functor.right, var, names, depth, _SUM)}")
        return _paren(text, ctx >= _PROD)
    text = (f"{_fmt_functor(functor.left, var, names, depth, _ATOM)} * "
            f"{_fmt_functor(functor.right, var, names, depth, _PROD)}")
    return _paren(text, ctx >= _ATOM)


def format_functor(functor: Functor) -> str:
    """Functor in combinator form, e.g. C[unit] + Id"""
    if isinstance(functor, IdF):
        return 'Id'
    if isinstance(functor, ConstF):
        return f"C[{format_type(functor.obj)}]"
    if isinstance(functor, SumF):
        return f"({format_functor(functor.left)} + {format_functor(functor.right)})"
    return f"({format_functor(functor.left)} * {format_functor(functor.right)})"

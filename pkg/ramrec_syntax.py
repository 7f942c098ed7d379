#!/usr/bin/env python3
"""
Ramrec Syntax
Surface language of .s1 files: lark grammar, parser, desugaring to core terms
and a pretty-printer whose output parses back to an alpha-equivalent term.
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from lark import Lark, Transformer, Token
from lark.exceptions import UnexpectedInput, VisitError

from ramrec_errors import DesugarError, ParseError, RamrecError, TypeCheckError
from ramrec_terms import (
    App, CS, Case, Con, Des, Fold, Inj, Lam, Pair, Proj, SafeCon, SafeDes, Term,
    ToNorm, ToSafe, Unit, Var, fresh_name,
)
from ramrec_types import (
    UNIT, Calculus, ConstF, Functor, GroundType, IdF, MuT, ProdF, ProdT, SumF,
    SumT, format_type, is_inhabited, is_normal, safe,
)

logger = logging.getLogger(__name__)

GRAMMAR = r'''
start: PRAGMA? decl*

?decl: datatype_decl | def_decl | main_decl
datatype_decl: "datatype" NAME "=" ctor_decl ("|" ctor_decl)*
ctor_decl: UNAME ("of" type)?
def_decl: "def" NAME "=" expr
main_decl: "main" "=" expr

?type: "mu" NAME "." type                -> ty_mu
     | ty_sum
?ty_sum: ty_prod "+" ty_sum              -> ty_plus
       | ty_prod
?ty_prod: ty_atom "*" ty_prod            -> ty_times
        | ty_atom
?ty_atom: "unit"                         -> ty_unit
        | "safe" ty_atom                 -> ty_safe
        | NAME                           -> ty_name
        | "(" type ")"

?expr: "fn" binder "=>" expr             -> lam
     | "let" pattern "=" expr "in" expr  -> let
     | "case" expr "of" "inl" pattern "=>" cons "|" "inr" pattern "=>" expr -> case
     | cons
?cons: app "::" cons                     -> cons_op
     | app
?app: app atom                           -> apply
    | prefix
?prefix: "fst" atom                      -> fst
       | "snd" atom                      -> snd
       | "inl" atom                      -> inl
       | "inr" atom                      -> inr
       | "toSafe" atom                   -> to_safe
       | "toNorm" atom                   -> to_norm
       | "con" "[" type "]" atom         -> con
       | "des" "[" type "]" atom         -> des
       | "scon" "[" type "]" atom        -> scon
       | "sdes" "[" type "]" atom        -> sdes
       | "cs" "[" type "]" atom          -> cs
       | "fold" "[" type "]" atom atom   -> fold
       | atom
?atom: NAME                              -> var
     | UNAME                             -> ctor
     | "safe" UNAME                      -> safe_ctor
     | "safe" "(" ")"                    -> safe_unit
     | INT                               -> numeral
     | "(" ")"                           -> unit
     | "(" expr ")"
     | "(" expr "," expr ("," expr)* ")" -> tuple
     | "(" expr ":" type ")"             -> annot
     | "[" "]"                           -> nil
     | "[" expr ("," expr)* "]"          -> list

binder: NAME                             -> bind_name
      | "_"                              -> bind_wild
      | "(" ")"                          -> bind_unit
      | "(" pattern ":" type ")"         -> bind_annot
      | "(" pattern "," pattern ("," pattern)* ")" -> bind_tuple
?pattern: NAME                           -> pat_var
        | "_"                            -> pat_wild
        | "(" ")"                        -> pat_unit
        | "(" pattern "," pattern ("," pattern)* ")" -> pat_tuple

PRAGMA: /%calculus[ \t]+[a-z0-9.]+/
UNAME: /[A-Z][A-Za-z0-9_']*/
NAME: /[a-z_][A-Za-z0-9_']*/
INT: /[0-9]+/
COMMENT: /\(\*(.|\n)*?\*\)/

%import common.WS
%ignore WS
%ignore COMMENT
'''

_parser = Lark(GRAMMAR, parser='lalr', start=['start', 'type'])


# ---------- surface syntax ----------

Pos = Optional[Tuple[int, int]]


def _pos(token) -> Pos:
    if isinstance(token, Token) and token.line is not None:
        return (token.line, token.column)
    return None


class TypeExpr:
    pass


@dataclass
class TEUnit(TypeExpr):
    pass


@dataclass
class TEName(TypeExpr):
    name: str
    pos: Pos = None


@dataclass
class TESafe(TypeExpr):
    inner: TypeExpr


@dataclass
class TESum(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass
class TEProd(TypeExpr):
    left: TypeExpr
    right: TypeExpr


@dataclass
class TEMu(TypeExpr):
    var: str
    body: TypeExpr


class Pattern:
    pass


@dataclass
class PVar(Pattern):
    name: str


@dataclass
class PWild(Pattern):
    pass


@dataclass
class PUnit(Pattern):
    pass


@dataclass
class PTuple(Pattern):
    items: List[Pattern]


class SExpr:
    pass


@dataclass
class SVar(SExpr):
    name: str
    pos: Pos = None


@dataclass
class SCtor(SExpr):
    name: str
    pos: Pos = None
    safe: bool = False


@dataclass
class SNum(SExpr):
    value: int
    pos: Pos = None


@dataclass
class SUnit(SExpr):
    safe: bool = False


@dataclass
class STuple(SExpr):
    items: List[SExpr]


@dataclass
class SList(SExpr):
    items: List[SExpr]


@dataclass
class SConsOp(SExpr):
    head: SExpr
    tail: SExpr


@dataclass
class SApp(SExpr):
    fn: SExpr
    arg: SExpr


@dataclass
class SLam(SExpr):
    pattern: Pattern
    annotation: Optional[TypeExpr]
    body: SExpr


@dataclass
class SLet(SExpr):
    pattern: Pattern
    value: SExpr
    body: SExpr


@dataclass
class SCase(SExpr):
    subject: SExpr
    left_pattern: Pattern
    left: SExpr
    right_pattern: Pattern
    right: SExpr


@dataclass
class SPrefix(SExpr):
    op: str
    arg: SExpr
    type_arg: Optional[TypeExpr] = None


@dataclass
class SFold(SExpr):
    type_arg: TypeExpr
    step: SExpr
    arg: SExpr


@dataclass
class SAnnot(SExpr):
    expr: SExpr
    type_expr: TypeExpr


@dataclass
class CtorDecl:
    name: str
    arg: Optional[TypeExpr]
    pos: Pos = None


@dataclass
class DatatypeDecl:
    name: str
    constructors: List[CtorDecl]
    pos: Pos = None


@dataclass
class SurfaceProgram:
    """A parsed .s1 file before desugaring"""
    calculus_level: Calculus = Calculus.S1
    datatype_decls: List[DatatypeDecl] = field(default_factory=list)
    defs: List[Tuple[str, SExpr]] = field(default_factory=list)
    main: Optional[SExpr] = None


class _SurfaceBuilder(Transformer):
    """Turns lark parse trees into surface syntax"""

    def start(self, items):
        program = SurfaceProgram()
        for item in items:
            if isinstance(item, Token) and item.type == 'PRAGMA':
                level = item.value.split(None, 1)[1]
                try:
                    program.calculus_level = Calculus.from_pragma(level)
                except ValueError:
                    raise ParseError(f"unknown calculus '{level}'", line=item.line, column=item.column)
            elif isinstance(item, DatatypeDecl):
                program.datatype_decls.append(item)
            elif item[0] == 'def':
                program.defs.append((item[1], item[2]))
            else:
                if program.main is not None:
                    raise ParseError("main is defined twice", code='DuplicateName')
                program.main = item[1]
        return program

    def datatype_decl(self, items):
        return DatatypeDecl(str(items[0]), list(items[1:]), _pos(items[0]))

    def ctor_decl(self, items):
        return CtorDecl(str(items[0]), items[1] if len(items) > 1 else None, _pos(items[0]))

    def def_decl(self, items):
        return ('def', str(items[0]), items[1])

    def main_decl(self, items):
        return ('main', items[0])

    # types
    def ty_mu(self, items):
        return TEMu(str(items[0]), items[1])

    def ty_plus(self, items):
        return TESum(items[0], items[1])

    def ty_times(self, items):
        return TEProd(items[0], items[1])

    def ty_unit(self, items):
        return TEUnit()

    def ty_safe(self, items):
        return TESafe(items[0])

    def ty_name(self, items):
        return TEName(str(items[0]), _pos(items[0]))

    # expressions
    def lam(self, items):
        pattern, annotation = items[0]
        return SLam(pattern, annotation, items[1])

    def let(self, items):
        return SLet(items[0], items[1], items[2])

    def case(self, items):
        return SCase(*items)

    def cons_op(self, items):
        return SConsOp(items[0], items[1])

    def apply(self, items):
        return SApp(items[0], items[1])

    def _prefix(op):
        def build(self, items):
            return SPrefix(op, items[0])
        return build

    fst = _prefix('fst')
    snd = _prefix('snd')
    inl = _prefix('inl')
    inr = _prefix('inr')
    to_safe = _prefix('toSafe')
    to_norm = _prefix('toNorm')

    def _typed_prefix(op):
        def build(self, items):
            return SPrefix(op, items[1], items[0])
        return build

    con = _typed_prefix('con')
    des = _typed_prefix('des')
    scon = _typed_prefix('scon')
    sdes = _typed_prefix('sdes')
    cs = _typed_prefix('cs')

    def fold(self, items):
        return SFold(items[0], items[1], items[2])

    def var(self, items):
        return SVar(str(items[0]), _pos(items[0]))

    def ctor(self, items):
        return SCtor(str(items[0]), _pos(items[0]))

    def safe_ctor(self, items):
        return SCtor(str(items[0]), _pos(items[0]), safe=True)

    def safe_unit(self, items):
        return SUnit(safe=True)

    def numeral(self, items):
        return SNum(int(items[0]), _pos(items[0]))

    def unit(self, items):
        return SUnit()

    def tuple(self, items):
        return STuple(list(items))

    def annot(self, items):
        return SAnnot(items[0], items[1])

    def nil(self, items):
        return SList([])

    def list(self, items):
        return SList(list(items))

    # binders and patterns
    def bind_name(self, items):
        return (PVar(str(items[0])), None)

    def bind_wild(self, items):
        return (PWild(), None)

    def bind_unit(self, items):
        return (PUnit(), None)

    def bind_annot(self, items):
        return (items[0], items[1])

    def bind_tuple(self, items):
        return (PTuple(list(items)), None)

    def pat_var(self, items):
        return PVar(str(items[0]))

    def pat_wild(self, items):
        return PWild()

    def pat_unit(self, items):
        return PUnit()

    def pat_tuple(self, items):
        return PTuple(list(items))


def _run_parser(source: str, start: str):
    try:
        tree = _parser.parse(source, start=start)
        return _SurfaceBuilder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, RamrecError):
            raise e.orig_exc
        raise
    except UnexpectedInput as e:
        message = str(e).strip().splitlines()[0]
        line = e.line if e.line and e.line > 0 else None
        column = e.column if e.column and e.column > 0 else None
        raise ParseError(message, line=line, column=column)


def parse(source: str) -> SurfaceProgram:
    """Parse .s1 source text into a surface program"""
    program = _run_parser(source, 'start')
    seen: Set[str] = set()
    for decl in program.datatype_decls:
        if decl.name in seen:
            raise ParseError(f"datatype '{decl.name}' declared twice", code='DuplicateName',
                             line=decl.pos and decl.pos[0], column=decl.pos and decl.pos[1])
        seen.add(decl.name)
    ctors: Set[str] = set()
    for decl in program.datatype_decls:
        for ctor in decl.constructors:
            if ctor.name in ctors:
                raise ParseError(f"constructor '{ctor.name}' declared twice", code='DuplicateName',
                                 line=ctor.pos and ctor.pos[0], column=ctor.pos and ctor.pos[1])
            ctors.add(ctor.name)
    names: Set[str] = set()
    for name, _ in program.defs:
        if name in names:
            raise ParseError(f"definition '{name}' declared twice", code='DuplicateName')
        names.add(name)
    logger.debug(f"📄 Parsed {len(program.datatype_decls)} datatypes, {len(program.defs)} defs")
    return program


# ---------- name tables ----------

@dataclass
class ConstructorInfo:
    name: str
    datatype: str
    mu: MuT
    index: int
    count: int
    arg_type: Optional[GroundType]


@dataclass
class NameTable:
    """Declared datatypes and constructors, used by desugaring and printing"""
    datatypes: Dict[str, MuT] = field(default_factory=dict)
    constructors: Dict[str, ConstructorInfo] = field(default_factory=dict)
    by_mu: Dict[MuT, List[ConstructorInfo]] = field(default_factory=dict)

    @property
    def aliases(self) -> Dict[GroundType, str]:
        return {mu: name for name, mu in self.datatypes.items()}

    def numeral_type(self) -> Optional[MuT]:
        zero = self.constructors.get('Zero')
        succ = self.constructors.get('Succ')
        if zero is None or succ is None or zero.mu != succ.mu:
            return None
        if zero.arg_type is not None or succ.arg_type != zero.mu or zero.count != 2:
            return None
        return zero.mu

    def list_type(self) -> Optional[MuT]:
        empty = self.constructors.get('Empty')
        cons = self.constructors.get('Cons')
        if empty is None or cons is None or empty.mu != cons.mu or empty.arg_type is not None:
            return None
        if not isinstance(cons.arg_type, ProdT) or cons.arg_type.right != cons.mu:
            return None
        return cons.mu

    def format_type(self, gamma) -> str:
        return format_type(gamma, self.aliases)


def injection_chain(index: int, count: int, body: Term) -> Term:
    """Inject a constructor argument into the right-nested sum of count alternatives"""
    if count == 1:
        return body
    term = body if index == count - 1 else Inj(1, body)
    for _ in range(min(index, count - 1)):
        term = Inj(2, term)
    return term


# ---------- type expressions ----------

def _mentions(te: TypeExpr, name: str) -> bool:
    if isinstance(te, TEName):
        return te.name == name
    if isinstance(te, TESafe):
        return _mentions(te.inner, name)
    if isinstance(te, (TESum, TEProd)):
        return _mentions(te.left, name) or _mentions(te.right, name)
    if isinstance(te, TEMu):
        return te.var != name and _mentions(te.body, name)
    return False


def resolve_type(te: TypeExpr, aliases: Dict[str, GroundType]) -> GroundType:
    """Turn a type expression into a ground type, expanding declared names"""
    if isinstance(te, TEUnit):
        return UNIT
    if isinstance(te, TEName):
        if te.name not in aliases:
            line, column = te.pos if te.pos else (None, None)
            raise DesugarError(f"unknown datatype '{te.name}'", code='UnknownDatatype', line=line, column=column)
        return aliases[te.name]
    if isinstance(te, TESafe):
        inner = resolve_type(te.inner, aliases)
        return safe(inner)
    if isinstance(te, TESum):
        return SumT(resolve_type(te.left, aliases), resolve_type(te.right, aliases))
    if isinstance(te, TEProd):
        return ProdT(resolve_type(te.left, aliases), resolve_type(te.right, aliases))
    return MuT(to_functor(te.body, te.var, aliases))


def to_functor(te: TypeExpr, self_name: str, aliases: Dict[str, GroundType]) -> Functor:
    """Read a type expression over self_name as a polynomial functor"""
    if not _mentions(te, self_name):
        constant = resolve_type(te, aliases)
        if not is_normal(constant):
            raise DesugarError("datatype bodies cannot mention safe types", code='TypeMismatch')
        return ConstF(constant)
    if isinstance(te, TEName):
        return IdF()
    if isinstance(te, TESum):
        return SumF(to_functor(te.left, self_name, aliases), to_functor(te.right, self_name, aliases))
    if isinstance(te, TEProd):
        return ProdF(to_functor(te.left, self_name, aliases), to_functor(te.right, self_name, aliases))
    if isinstance(te, TESafe):
        raise DesugarError("datatype bodies cannot mention safe types", code='TypeMismatch')
    raise DesugarError(f"'{self_name}' occurs inside a nested mu type", code='TypeMismatch')


def parse_type(text: str, names: Optional[NameTable] = None) -> GroundType:
    """Parse a type string (canonical or using declared names)"""
    te = _run_parser(text, 'type')
    return resolve_type(te, dict(names.datatypes) if names else {})


# ---------- desugaring ----------

class Desugarer:
    """Resolves sugar, inlines definitions and builds core terms"""

    def __init__(self, program: SurfaceProgram):
        self.program = program
        self.names = NameTable()
        self.sources: Dict[str, SExpr] = dict(program.defs)
        self.terms: Dict[str, Term] = {}
        self._visiting: List[str] = []

    def run(self) -> Tuple[Dict[str, Term], Dict[str, GroundType]]:
        for decl in self.program.datatype_decls:
            self.declare(decl)
        for name, _ in self.program.defs:
            self.definition(name)
        result = dict(self.terms)
        if self.program.main is not None:
            result['main'] = self.expr(self.program.main, frozenset())
        return result, dict(self.names.datatypes)

    def declare(self, decl: DatatypeDecl):
        aliases = dict(self.names.datatypes)
        pieces = []
        for ctor in decl.constructors:
            if ctor.arg is None:
                pieces.append(ConstF(UNIT))
            else:
                pieces.append(to_functor(ctor.arg, decl.name, aliases))
        functor = pieces[-1]
        for piece in reversed(pieces[:-1]):
            functor = SumF(piece, functor)
        mu = MuT(functor)
        if not is_inhabited(mu):
            line, column = decl.pos if decl.pos else (None, None)
            raise TypeCheckError(f"datatype '{decl.name}' has no values", code='UninhabitedType',
                                 line=line, column=column)
        self.names.datatypes[decl.name] = mu
        aliases[decl.name] = mu
        infos = []
        for index, ctor in enumerate(decl.constructors):
            arg_type = resolve_type(ctor.arg, aliases) if ctor.arg is not None else None
            info = ConstructorInfo(ctor.name, decl.name, mu, index, len(decl.constructors), arg_type)
            self.names.constructors[ctor.name] = info
            infos.append(info)
        self.names.by_mu[mu] = infos
        logger.debug(f"📐 datatype {decl.name} = {format_type(mu)}")

    def definition(self, name: str) -> Term:
        if name in self.terms:
            return self.terms[name]
        if name in self._visiting:
            cycle = ' -> '.join(self._visiting + [name])
            raise DesugarError(f"definitions are not recursive: {cycle}", code='RecursiveDefinition')
        self._visiting.append(name)
        self.terms[name] = self.expr(self.sources[name], frozenset())
        self._visiting.pop()
        return self.terms[name]

    def datatype(self, te: TypeExpr) -> MuT:
        gamma = resolve_type(te, dict(self.names.datatypes))
        if not isinstance(gamma, MuT):
            raise DesugarError(f"'{format_type(gamma)}' is not a datatype", code='TypeMismatch')
        return gamma

    def constructor(self, name: str, pos: Pos) -> ConstructorInfo:
        if name not in self.names.constructors:
            line, column = pos if pos else (None, None)
            raise DesugarError(f"unknown constructor '{name}'", code='UnknownConstructor', line=line, column=column)
        return self.names.constructors[name]

    def construct(self, info: ConstructorInfo, arg: Optional[Term], safe: bool = False) -> Term:
        if arg is None:
            arg = Unit(safe=safe)
        body = injection_chain(info.index, info.count, arg)
        return SafeCon(info.mu, body) if safe else Con(info.mu, body)

    def numeral(self, value: int, pos: Pos) -> Term:
        if self.names.numeral_type() is None:
            line, column = pos if pos else (None, None)
            raise DesugarError("numerals need 'datatype nat = Zero | Succ of nat'",
                               code='UnknownConstructor', line=line, column=column)
        zero = self.names.constructors['Zero']
        succ = self.names.constructors['Succ']
        term = self.construct(zero, None)
        for _ in range(value):
            term = self.construct(succ, term)
        return term

    def list_cell(self, head: Optional[Term], tail: Optional[Term]) -> Term:
        if self.names.list_type() is None:
            raise DesugarError("list syntax needs 'Empty' and 'Cons of elem * self' constructors",
                               code='UnknownConstructor')
        if head is None:
            return self.construct(self.names.constructors['Empty'], None)
        return self.construct(self.names.constructors['Cons'], Pair(head, tail))

    def bind(self, pattern: Pattern, source: Term, body: Term) -> Term:
        """Wrap body so the names in pattern are bound to the parts of source"""
        if isinstance(pattern, PVar):
            return App(Lam(pattern.name, body), source)
        if isinstance(pattern, (PWild, PUnit)):
            return body
        items = pattern.items
        rest = items[1] if len(items) == 2 else PTuple(items[1:])
        return self.bind(items[0], Proj(1, source), self.bind(rest, Proj(2, source), body))

    def binder(self, pattern: Pattern, body: SExpr, scope: frozenset) -> Tuple[str, Term]:
        inner = self.expr(body, scope | _pattern_names(pattern))
        if isinstance(pattern, PVar):
            return pattern.name, inner
        name = fresh_name()
        return name, self.bind(pattern, Var(name), inner)

    def expr(self, e: SExpr, scope: frozenset) -> Term:
        if isinstance(e, SVar):
            if e.name in scope:
                return Var(e.name)
            if e.name in self.sources:
                return copy.deepcopy(self.definition(e.name))
            line, column = e.pos if e.pos else (None, None)
            raise DesugarError(f"unbound identifier '{e.name}'", code='UnboundIdentifier', line=line, column=column)
        if isinstance(e, SCtor):
            info = self.constructor(e.name, e.pos)
            if info.arg_type is not None:
                raise DesugarError(f"constructor '{e.name}' expects an argument", code='TypeMismatch')
            return self.construct(info, None, e.safe)
        if isinstance(e, SNum):
            return self.numeral(e.value, e.pos)
        if isinstance(e, SUnit):
            return Unit(safe=e.safe)
        if isinstance(e, STuple):
            terms = [self.expr(item, scope) for item in e.items]
            result = terms[-1]
            for term in reversed(terms[:-1]):
                result = Pair(term, result)
            return result
        if isinstance(e, SList):
            result = self.list_cell(None, None)
            for item in reversed(e.items):
                result = self.list_cell(self.expr(item, scope), result)
            return result
        if isinstance(e, SConsOp):
            return self.list_cell(self.expr(e.head, scope), self.expr(e.tail, scope))
        if isinstance(e, SApp):
            return self.application(e, scope)
        if isinstance(e, SLam):
            annotation = resolve_type(e.annotation, dict(self.names.datatypes)) if e.annotation else None
            name, body = self.binder(e.pattern, e.body, scope)
            return Lam(name, body, annotation)
        if isinstance(e, SLet):
            value = self.expr(e.value, scope)
            name, body = self.binder(e.pattern, e.body, scope)
            return App(Lam(name, body), value)
        if isinstance(e, SCase):
            subject = self.expr(e.subject, scope)
            left_name, left = self.binder(e.left_pattern, e.left, scope)
            right_name, right = self.binder(e.right_pattern, e.right, scope)
            return Case(subject, left_name, left, right_name, right)
        if isinstance(e, SPrefix):
            return self.prefix(e, scope)
        if isinstance(e, SFold):
            step = self.expr(e.step, scope)
            if not isinstance(step, Lam):
                raise DesugarError("the step of a fold must be a lambda", code='TypeMismatch')
            return Fold(self.datatype(e.type_arg), step, self.expr(e.arg, scope))
        if isinstance(e, SAnnot):
            annotation = resolve_type(e.type_expr, dict(self.names.datatypes))
            name = fresh_name('a')
            return App(Lam(name, Var(name), annotation), self.expr(e.expr, scope))
        raise DesugarError(f"unexpected syntax {type(e).__name__}", code='TypeMismatch')

    def application(self, e: SApp, scope: frozenset) -> Term:
        if isinstance(e.fn, SCtor):
            info = self.constructor(e.fn.name, e.fn.pos)
            if info.arg_type is None:
                raise DesugarError(f"constructor '{e.fn.name}' takes no argument", code='TypeMismatch')
            return self.construct(info, self.expr(e.arg, scope), e.fn.safe)
        fn = self.expr(e.fn, scope)
        if not isinstance(fn, Lam):
            raise DesugarError("only lambdas and defined functions can be applied", code='TypeMismatch')
        return App(fn, self.expr(e.arg, scope))

    def prefix(self, e: SPrefix, scope: frozenset) -> Term:
        arg = self.expr(e.arg, scope)
        simple = {
            'fst': lambda t: Proj(1, t),
            'snd': lambda t: Proj(2, t),
            'inl': lambda t: Inj(1, t),
            'inr': lambda t: Inj(2, t),
            'toSafe': ToSafe,
            'toNorm': ToNorm,
        }
        if e.op in simple:
            return simple[e.op](arg)
        datatype = self.datatype(e.type_arg)
        typed = {'con': Con, 'des': Des, 'scon': SafeCon, 'sdes': SafeDes, 'cs': CS}
        return typed[e.op](datatype, arg)


def _pattern_names(pattern: Pattern) -> frozenset:
    if isinstance(pattern, PVar):
        return frozenset([pattern.name])
    if isinstance(pattern, PTuple):
        names = frozenset()
        for item in pattern.items:
            names |= _pattern_names(item)
        return names
    return frozenset()


def desugar(program: SurfaceProgram) -> Tuple[Dict[str, Term], Dict[str, GroundType]]:
    """Core terms per definition (plus 'main') and the declared datatypes"""
    return Desugarer(program).run()


def desugar_with_names(program: SurfaceProgram) -> Tuple[Dict[str, Term], NameTable]:
    desugarer = Desugarer(program)
    terms, _ = desugarer.run()
    return terms, desugarer.names


# ---------- pretty printing ----------

_EXPR, _APP, _ATOM = range(3)


class PrettyPrinter:
    """Prints core terms as surface syntax, resugaring constructors when names are known"""

    def __init__(self, names: Optional[NameTable] = None):
        self.names = names or NameTable()
        self.aliases = self.names.aliases
        self.nat = self.names.numeral_type()

    def format(self, term: Term) -> str:
        return self._fmt(term, _EXPR)

    def _type(self, gamma) -> str:
        return format_type(gamma, self.aliases)

    def _wrap(self, text: str, level: int, required: int) -> str:
        return f"({text})" if level < required else text

    def _fmt(self, t: Term, required: int) -> str:
        text, level = self._render(t)
        return self._wrap(text, level, required)

    def _render(self, t: Term) -> Tuple[str, int]:
        if isinstance(t, Var):
            return t.name, _ATOM
        if isinstance(t, Unit):
            return ('safe ()' if t.safe else '()'), _ATOM
        if isinstance(t, Pair):
            items = [t.first]
            rest = t.second
            while isinstance(rest, Pair):
                items.append(rest.first)
                rest = rest.second
            items.append(rest)
            return '(' + ', '.join(self._fmt(item, _EXPR) for item in items) + ')', _ATOM
        if isinstance(t, Lam):
            if t.annotation is None:
                return f"fn {t.name} => {self._fmt(t.body, _EXPR)}", _EXPR
            return f"fn ({t.name} : {self._type(t.annotation)}) => {self._fmt(t.body, _EXPR)}", _EXPR
        if isinstance(t, App):
            return f"{self._fmt(t.fn, _ATOM)} {self._fmt(t.arg, _ATOM)}", _APP
        if isinstance(t, Case):
            return (f"case {self._fmt(t.subject, _APP)} of inl {t.left_name} => {self._fmt(t.left, _APP)}"
                    f" | inr {t.right_name} => {self._fmt(t.right, _EXPR)}"), _EXPR
        if isinstance(t, Proj):
            return f"{'fst' if t.index == 1 else 'snd'} {self._fmt(t.body, _ATOM)}", _APP
        if isinstance(t, Inj):
            return f"{'inl' if t.index == 1 else 'inr'} {self._fmt(t.body, _ATOM)}", _APP
        if isinstance(t, ToSafe):
            return f"toSafe {self._fmt(t.body, _ATOM)}", _APP
        if isinstance(t, ToNorm):
            return f"toNorm {self._fmt(t.body, _ATOM)}", _APP
        if isinstance(t, Fold):
            return (f"fold[{self._type(t.datatype)}] {self._fmt(t.step, _ATOM)} "
                    f"{self._fmt(t.arg, _ATOM)}"), _APP
        if isinstance(t, (Con, SafeCon)):
            sugared = self._constructor(t)
            if sugared is not None:
                return sugared
            keyword = 'con' if isinstance(t, Con) else 'scon'
            return f"{keyword}[{self._type(t.datatype)}] {self._fmt(t.body, _ATOM)}", _APP
        keyword = {Des: 'des', SafeDes: 'sdes', CS: 'cs'}[type(t)]
        return f"{keyword}[{self._type(t.datatype)}] {self._fmt(t.body, _ATOM)}", _APP

    def _numeral(self, t: Term) -> Optional[int]:
        count = 0
        while isinstance(t, Con) and t.datatype == self.nat:
            if isinstance(t.body, Inj) and t.body.index == 2:
                count += 1
                t = t.body.body
            elif isinstance(t.body, Inj) and isinstance(t.body.body, Unit) and not t.body.body.safe:
                return count
            else:
                return None
        return None

    def _constructor(self, t: Term) -> Optional[Tuple[str, int]]:
        infos = self.names.by_mu.get(t.datatype)
        if not infos:
            return None
        safe = isinstance(t, SafeCon)
        if not safe and self.nat is not None and t.datatype == self.nat:
            value = self._numeral(t)
            if value is not None:
                return str(value), _ATOM
        count = len(infos)
        body, index = t.body, 0
        if count > 1:
            while index < count - 1:
                if isinstance(body, Inj) and body.index == 2:
                    body, index = body.body, index + 1
                elif isinstance(body, Inj) and body.index == 1:
                    body = body.body
                    break
                else:
                    return None
        info = infos[index]
        prefix = 'safe ' if safe else ''
        if info.arg_type is None:
            if isinstance(body, Unit) and body.safe == safe:
                return f"{prefix}{info.name}", _ATOM
            return None
        return f"{prefix}{info.name} {self._fmt(body, _ATOM)}", _APP


def pretty(term: Term, names: Optional[NameTable] = None) -> str:
    """Surface text for a core term"""
    return PrettyPrinter(names).format(term)

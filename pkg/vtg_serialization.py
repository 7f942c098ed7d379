#!/usr/bin/env python3
"""
VTG Serialization
Values as flat vertex lists. Item i of a list of n items has address n-1-i,
and every address an item mentions is smaller than its own, so the list is a
reversed topological sort of the compressed dag.
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from evaluator import apply_function
from ramrec_errors import PipelineMismatch, RepresentationError
from ramrec_terms import Lam
from ramrec_types import (
    NAT, UNIT, ConstF, GroundType, IdF, MuT, ProdF, ProdT, SumF, SumT, UnitT,
    apply_functor, format_type, norm, vertex_bound_constant, vertex_types,
)
from value_generators import minimal_value
from value_heap import (
    Heap, ValueRef, VertexKind, bisimilar, compress, construct, numeral, reachable,
)

logger = logging.getLogger(__name__)

KINDS = ('unit', 'inj1', 'inj2', 'pair', 'mu')


@dataclass(frozen=True)
class VtgItem:
    kind: str
    type: Optional[str] = None
    addrs: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == 'unit':
            return {'kind': 'unit'}
        if self.kind == 'pair':
            return {'kind': 'pair', 'type': self.type, 'addrs': list(self.addrs)}
        return {'kind': self.kind, 'type': self.type, 'addr': self.addrs[0]}

    @classmethod
    def from_dict(cls, data: Any) -> 'VtgItem':
        if not isinstance(data, dict) or data.get('kind') not in KINDS:
            raise RepresentationError(f"not a vertex item: {data!r}")
        kind = data['kind']
        if kind == 'unit':
            return cls('unit')
        if not isinstance(data.get('type'), str):
            raise RepresentationError(f"{kind} item needs a type string")
        addrs = data.get('addrs') if kind == 'pair' else [data.get('addr')]
        if (not isinstance(addrs, list) or len(addrs) != (2 if kind == 'pair' else 1)
                or not all(isinstance(a, int) and not isinstance(a, bool) and a >= 0 for a in addrs)):
            raise RepresentationError(f"{kind} item has malformed addresses: {data!r}")
        return cls(kind, data['type'], tuple(addrs))


VtgList = List[VtgItem]


def _kind_of(vertex) -> str:
    if vertex.kind is VertexKind.INJ:
        return f"inj{vertex.index}"
    return vertex.kind.value


def serialize(v: ValueRef) -> VtgList:
    """Canonical vertex list of compress(v)"""
    c = compress(v)
    heap = c.heap
    address: Dict[int, int] = {}
    order: List[int] = []
    stack = [(c.root, False)]
    while stack:
        i, done = stack.pop()
        if done:
            if i not in address:
                address[i] = len(order)
                order.append(i)
            continue
        if i in address:
            continue
        stack.append((i, True))
        stack.extend((child, False) for child in reversed(heap[i].children))
    items = []
    for i in reversed(order):
        vertex = heap[i]
        kind = _kind_of(vertex)
        if kind == 'unit':
            items.append(VtgItem('unit'))
        else:
            items.append(VtgItem(kind, format_type(vertex.tag), tuple(address[ch] for ch in vertex.children)))
    return items


def deserialize(gamma: GroundType, items: Sequence[VtgItem], strict: bool = True) -> ValueRef:
    """The type-gamma value the list represents, with the sharing it encodes"""
    n = len(items)
    if n == 0:
        raise RepresentationError("empty vertex list")

    def item(address: int) -> VtgItem:
        return items[n - 1 - address]

    expected: Dict[int, GroundType] = {n - 1: norm(gamma)}
    live: List[int] = []
    for address in range(n - 1, -1, -1):
        if address not in expected:
            if strict:
                raise RepresentationError(f"item at address {address} is unreachable")
            continue
        live.append(address)
        current = item(address)
        for child, child_type in zip(current.addrs, _check_item(current, expected[address], address)):
            if child >= address:
                raise RepresentationError(f"address {address} points to {child}; addresses must decrease")
            if expected.setdefault(child, child_type) != child_type:
                raise RepresentationError(f"address {child} is used at two types")
    heap = Heap()
    built: Dict[int, int] = {}
    for address in reversed(live):
        current = item(address)
        t = expected[address]
        kids = [built[a] for a in current.addrs]
        if current.kind == 'unit':
            built[address] = heap.unit()
        elif current.kind == 'pair':
            built[address] = heap.pair(kids[0], kids[1], t)
        elif current.kind == 'mu':
            built[address] = heap.con(kids[0], t)
        else:
            built[address] = heap.inj(1 if current.kind == 'inj1' else 2, kids[0], t)
    return ValueRef(heap, built[n - 1], gamma)


def _check_item(current: VtgItem, t: GroundType, address: int) -> List[GroundType]:
    """Child types of an item seen at t; raises if its label or type string disagree"""
    def mismatch(reason: str):
        raise RepresentationError(f"address {address}: {reason}")

    if isinstance(t, UnitT):
        if current.kind != 'unit':
            mismatch(f"expected a unit vertex, found {current.kind}")
        return []
    if current.kind == 'unit':
        mismatch(f"unit vertex where '{format_type(t)}' was expected")
    if current.type != format_type(t):
        mismatch(f"type string '{current.type}' does not match '{format_type(t)}'")
    if isinstance(t, SumT):
        if current.kind not in ('inj1', 'inj2'):
            mismatch(f"expected an injection, found {current.kind}")
        return [t.left if current.kind == 'inj1' else t.right]
    if isinstance(t, ProdT):
        if current.kind != 'pair':
            mismatch(f"expected a pair, found {current.kind}")
        return [t.left, t.right]
    if current.kind != 'mu':
        mismatch(f"expected a constructor vertex, found {current.kind}")
    return [apply_functor(t.functor, t)]


def deserialize_or_default(gamma: GroundType, items: Sequence[VtgItem]) -> ValueRef:
    """deserialize, or a fixed smallest gamma value when the list is not a representation"""
    try:
        return deserialize(gamma, items)
    except RepresentationError as e:
        logger.warning(f"⚠️ Falling back to the default value: {e}")
        return minimal_value(Heap(), gamma)


# ---------- wire form ----------

def to_json(items: Sequence[VtgItem]) -> List[Dict[str, Any]]:
    return [entry.to_dict() for entry in items]


def from_json(data: Any) -> VtgList:
    if not isinstance(data, list):
        raise RepresentationError("a vertex list must be a JSON array")
    return [VtgItem.from_dict(entry) for entry in data]


def dumps(items: Sequence[VtgItem]) -> str:
    return json.dumps(to_json(items), ensure_ascii=False)


def loads(text: str) -> VtgList:
    try:
        return from_json(json.loads(text))
    except json.JSONDecodeError as e:
        raise RepresentationError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno)


# ---------- the list as an in-language value ----------

STRING = MuT(SumF(ConstF(UNIT), ProdF(ConstF(NAT), IdF())))
_ONE_ADDR = ProdT(STRING, NAT)
_TWO_ADDRS = ProdT(STRING, ProdT(NAT, NAT))
VERTEX = MuT(SumF(ConstF(UNIT), SumF(ConstF(_ONE_ADDR), SumF(ConstF(_ONE_ADDR),
                                     SumF(ConstF(_TWO_ADDRS), ConstF(_ONE_ADDR))))))
LIST_VERTEX = MuT(SumF(ConstF(UNIT), ProdF(ConstF(VERTEX), IdF())))
_CONSTRUCTOR = {'unit': 0, 'inj1': 1, 'inj2': 2, 'pair': 3, 'mu': 4}


def string_size(text: str) -> int:
    """Size of a string encoded as a list of character-code numerals"""
    return len(text) + 1 + sum(ord(ch) + 1 for ch in text)


def vtg_size(items: Sequence[VtgItem]) -> int:
    """Constructor count of the sharing-free list_vertex encoding of items"""
    total = len(items) + 1
    for entry in items:
        total += 1
        if entry.kind != 'unit':
            total += string_size(entry.type) + sum(a + 1 for a in entry.addrs)
    return total


def quadratic_constant(gamma: GroundType) -> int:
    """c with vtg_size(serialize(v)) <= c * (size(v) + 1)**2 for every gamma value v"""
    k = vertex_bound_constant(gamma)
    longest = max((string_size(format_type(t)) for t in vertex_types(gamma)), default=0)
    return k * (2 + longest) + 2 * k * k + 1


def _string(heap: Heap, text: str) -> int:
    root = construct(heap, STRING, 0, 2, heap.unit())
    for ch in reversed(text):
        cell = heap.pair(numeral(heap, ord(ch)).root, root, ProdT(NAT, STRING))
        root = construct(heap, STRING, 1, 2, cell)
    return root


def as_s1_value(items: Sequence[VtgItem], heap: Optional[Heap] = None) -> ValueRef:
    """The list as a sharing-free value of type list_vertex"""
    heap = heap if heap is not None else Heap()
    root = construct(heap, LIST_VERTEX, 0, 2, heap.unit())
    for entry in reversed(items):
        if entry.kind == 'unit':
            payload = heap.unit()
        else:
            text = _string(heap, entry.type)
            addrs = [numeral(heap, a).root for a in entry.addrs]
            if entry.kind == 'pair':
                payload = heap.pair(text, heap.pair(addrs[0], addrs[1], ProdT(NAT, NAT)), _TWO_ADDRS)
            else:
                payload = heap.pair(text, addrs[0], _ONE_ADDR)
        vertex = construct(heap, VERTEX, _CONSTRUCTOR[entry.kind], 5, payload)
        root = construct(heap, LIST_VERTEX, 1, 2, heap.pair(vertex, root, ProdT(VERTEX, LIST_VERTEX)))
    return ValueRef(heap, root, LIST_VERTEX)


def check_addresses(items: Sequence[VtgItem]) -> bool:
    n = len(items)
    return all(a < n - 1 - i for i, entry in enumerate(items) for a in entry.addrs)


# ---------- factorization ----------

def factor_pipeline(fn: Lam, v: ValueRef) -> ValueRef:
    """deserialize . f . serialize, checked against running f on v directly"""
    arg_type, result_type = fn.ty.arg, fn.ty.result
    direct = apply_function(fn, v, 'dp')
    rebuilt = deserialize(arg_type, serialize(v))
    through = apply_function(fn, rebuilt, 'dp')
    result = deserialize(result_type, serialize(through))
    if not bisimilar(result, direct):
        raise PipelineMismatch("the serialized pipeline disagrees with direct evaluation")
    logger.debug(f"✅ factor pipeline agrees on {len(reachable(result.heap, result.root))} vertices")
    return result

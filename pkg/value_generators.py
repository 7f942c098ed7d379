#!/usr/bin/env python3
"""
Value Generators
Seeded random values of any ground type, with sharing injected by reusing
earlier vertices of the same type.
"""

import logging
import math
import os
import random
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

from ramrec_errors import GenerationFailure
from ramrec_types import (
    GroundType, ProdT, SumT, UnitT, apply_functor, format_type, is_inhabited,
    mu_types, norm,
)
from value_heap import Heap, ValueRef

logger = logging.getLogger(__name__)

DEFAULT_SEED = 1729


def default_seed() -> int:
    return int(os.getenv('RAMREC_SEED', str(DEFAULT_SEED)))


def minimal_sizes(gamma: GroundType) -> Dict[GroundType, float]:
    """Fewest constructor vertices a value of each μ type inside gamma needs"""
    mus = mu_types(gamma)
    best: Dict[GroundType, float] = {mu: math.inf for mu in mus}
    changed = True
    while changed:
        changed = False
        for mu in mus:
            candidate = 1 + _min_size(apply_functor(mu.functor, mu), best)
            if candidate < best[mu]:
                best[mu] = candidate
                changed = True
    return best


def _min_size(gamma: GroundType, best: Dict[GroundType, float]) -> float:
    if isinstance(gamma, UnitT):
        return 0
    if isinstance(gamma, SumT):
        return min(_min_size(gamma.left, best), _min_size(gamma.right, best))
    if isinstance(gamma, ProdT):
        return _min_size(gamma.left, best) + _min_size(gamma.right, best)
    return best.get(norm(gamma), math.inf)


class ValueGenerator:
    """Random values in one heap; vertices of equal type may be shared"""

    def __init__(self, heap: Optional[Heap] = None, seed: Optional[int] = None,
                 share_probability: float = 0.3, grow_probability: float = 0.75,
                 rng: Optional[random.Random] = None):
        self.heap = heap if heap is not None else Heap()
        self.rng = rng if rng is not None else random.Random(default_seed() if seed is None else seed)
        self.share_probability = share_probability
        self.grow_probability = grow_probability
        self.pools: Dict[GroundType, List[int]] = defaultdict(list)
        self._sizes: Dict[GroundType, float] = {}

    def min_size(self, gamma: GroundType) -> float:
        for mu in mu_types(gamma):
            if mu not in self._sizes:
                self._sizes.update(minimal_sizes(mu))
        return _min_size(norm(gamma), self._sizes)

    def value(self, gamma: GroundType, budget: int = 8) -> ValueRef:
        if not is_inhabited(gamma):
            raise GenerationFailure(f"type '{format_type(gamma)}' has no values")
        return ValueRef(self.heap, self.vertex(gamma, budget), gamma)

    def minimal(self, gamma: GroundType) -> ValueRef:
        """A smallest value of gamma, without sharing choices"""
        if not is_inhabited(gamma):
            raise GenerationFailure(f"type '{format_type(gamma)}' has no values")
        return ValueRef(self.heap, self._build(norm(gamma), 0, minimal=True), gamma)

    def vertex(self, gamma: GroundType, budget: int) -> int:
        key = norm(gamma)
        pool = self.pools[key]
        if pool and self.rng.random() < self.share_probability:
            return self.rng.choice(pool)
        root = self._build(key, budget)
        pool.append(root)
        return root

    def _build(self, t: GroundType, budget: int, minimal: bool = False) -> int:
        heap = self.heap
        if isinstance(t, UnitT):
            return heap.unit()
        if isinstance(t, SumT):
            side = self._choose_side(t, budget, minimal)
            part = t.left if side == 1 else t.right
            child = self._build(part, budget, True) if minimal else self.vertex(part, budget)
            return heap.inj(side, child, t)
        if isinstance(t, ProdT):
            if minimal:
                return heap.pair(self._build(t.left, 0, True), self._build(t.right, 0, True), t)
            left_budget = self.rng.randint(0, max(budget, 0))
            first = self.vertex(t.left, left_budget)
            second = self.vertex(t.right, budget - left_budget)
            return heap.pair(first, second, t)
        body = apply_functor(t.functor, t)
        child = self._build(body, 0, True) if minimal else self.vertex(body, budget - 1)
        return heap.con(child, t)

    def _choose_side(self, t: SumT, budget: int, minimal: bool) -> int:
        costs = {1: self.min_size(t.left), 2: self.min_size(t.right)}
        cheapest = min(costs, key=lambda side: (costs[side], side))
        if minimal:
            return cheapest
        affordable = [side for side in (1, 2) if costs[side] <= max(budget, 0) and costs[side] < math.inf]
        if len(affordable) < 2:
            return affordable[0] if affordable else cheapest
        if budget > 0 and costs[1] != costs[2]:
            richer = max(affordable, key=lambda side: costs[side])
            return richer if self.rng.random() < self.grow_probability else 3 - richer
        return self.rng.choice(affordable)

    def environment(self, context: Sequence[Tuple[str, GroundType]], budget: int = 8) -> Dict[str, ValueRef]:
        return {name: self.value(gamma, budget) for name, gamma in context}


def random_value(gamma: GroundType, budget: int = 8, seed: Optional[int] = None,
                 share_probability: float = 0.3) -> ValueRef:
    return ValueGenerator(seed=seed, share_probability=share_probability).value(gamma, budget)


def minimal_value(heap: Heap, gamma: GroundType) -> ValueRef:
    return ValueGenerator(heap, seed=0, share_probability=0.0).minimal(gamma)

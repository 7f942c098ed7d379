#!/usr/bin/env python3
"""
Ramrec Program
Loads a .s1 file: parse, desugar, check every definition and main.
"""

import logging
import os
from typing import Dict, List, Optional

from ramrec_errors import ProgramNotFound, RamrecError, TypeCheckError
from ramrec_syntax import NameTable, desugar_with_names, parse, pretty
from ramrec_terms import Lam, Term
from ramrec_typecheck import Judgment, judge
from ramrec_types import Arrow, Calculus, GroundType, format_type

logger = logging.getLogger(__name__)


class RamrecProgram:
    """A checked program: core terms and judgments for each definition"""

    def __init__(self, source: str, path: Optional[str] = None):
        self.source = source
        self.path = path
        surface = parse(source)
        self.level: Calculus = surface.calculus_level
        self.terms, self.names = desugar_with_names(surface)
        self.order: List[str] = [name for name, _ in surface.defs]
        if 'main' in self.terms:
            self.order.append('main')
        self.judgments: Dict[str, Judgment] = {}
        for name in self.order:
            self.judgments[name] = self._check(name)
        logger.info(f"✅ {self.label}: {len(self.order)} definitions checked at {self.level.value}")

    @classmethod
    def from_file(cls, path: str) -> 'RamrecProgram':
        if not os.path.isfile(path):
            raise ProgramNotFound(f"no such program: {path}")
        with open(path, encoding='utf-8') as f:
            return cls(f.read(), path)

    @property
    def label(self) -> str:
        return os.path.basename(self.path) if self.path else '<source>'

    @property
    def aliases(self) -> Dict[GroundType, str]:
        return self.names.aliases

    def _check(self, name: str) -> Judgment:
        try:
            return judge(self.level, [], self.terms[name], name, self.aliases)
        except TypeCheckError as e:
            e.message = f"in '{name}': {e.message}"
            raise

    def has(self, name: str) -> bool:
        return name in self.terms

    def term(self, name: str = 'main') -> Term:
        if name not in self.terms:
            raise RamrecError(f"{self.label} has no definition '{name}'", code='UnboundIdentifier')
        return self.terms[name]

    def judgment(self, name: str = 'main') -> Judgment:
        self.term(name)
        return self.judgments[name]

    def function(self, name: str) -> Lam:
        term = self.term(name)
        if not isinstance(term, Lam):
            raise TypeCheckError(f"'{name}' is not a function")
        return term

    def functions(self) -> List[str]:
        return [name for name in self.order if isinstance(self.judgments[name].type, Arrow)]

    def ground(self) -> List[str]:
        return [name for name in self.order if not isinstance(self.judgments[name].type, Arrow)]

    def format_type(self, gamma) -> str:
        return format_type(gamma, self.aliases)

    def pretty(self, term: Term) -> str:
        return pretty(term, self.names)

    def describe(self, name: str = 'main') -> str:
        return f"{name} : {self.format_type(self.judgment(name).type)}"


def load_program(path: str) -> RamrecProgram:
    return RamrecProgram.from_file(path)


def names_of(program: Optional[RamrecProgram]) -> NameTable:
    return program.names if program else NameTable()

#!/usr/bin/env python3
"""
Ramrec Errors
Error hierarchy shared by the parser, checker, evaluators and tools.
Every error carries a stable code that the CLI reports verbatim.
"""

from typing import Any, Dict, Optional


class RamrecError(Exception):
    """Base class for every error the toolkit reports to a user"""

    code = 'RamrecError'

    def __init__(self, message: str, code: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message)
        self.message = message
        if code is not None:
            self.code = code
        self.line = line
        self.column = column

    def to_dict(self) -> Dict[str, Any]:
        """Structured form used by --json output"""
        return {
            'code': self.code,
            'message': self.message,
            'line': self.line,
            'column': self.column,
        }

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.code} at {self.line}:{self.column}: {self.message}"
        return f"{self.code}: {self.message}"


class ParseError(RamrecError):
    code = 'ParseError'


class DesugarError(RamrecError):
    code = 'UnknownConstructor'


class TypeCheckError(RamrecError):
    code = 'TypeMismatch'


class RepresentationError(RamrecError):
    code = 'RepresentationError'


class StepBudgetExceeded(RamrecError):
    code = 'StepBudgetExceeded'


class NotHereditarilySequential(RamrecError):
    code = 'NotHereditarilySequential'


class UnsupportedConstruct(RamrecError):
    code = 'UnsupportedConstruct'


class GenerationFailure(RamrecError):
    code = 'GenerationFailure'


class PipelineMismatch(RamrecError):
    code = 'PipelineMismatch'


class InternalError(RamrecError):
    """Broken internal invariant; never caused by user input"""

    code = 'InternalError'


class StuckState(InternalError):
    code = 'StuckState'


class HeapInvariantError(InternalError):
    code = 'HeapInvariant'


class EvaluationError(InternalError):
    code = 'EvaluationError'


class ProgramNotFound(RamrecError):
    code = 'FileNotFound'

"""Error types shared across the toolchain.

Exit-code mapping lives in the CLI: runtime errors are 1, type errors 2,
parse errors 3, IO/config errors 4.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Half-open source region; line/col are 1-based."""

    line: int = 0
    col: int = 0
    end_line: int = 0
    end_col: int = 0

    def __str__(self):
        return f"{self.line}:{self.col}"


NO_SPAN = Span()


class ParseError(Exception):
    """Syntax error with position and the tokens that would have been legal."""

    def __init__(self, message, span, expected=()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = tuple(expected)

    def __str__(self):
        s = f"{self.span}: syntax error: {self.message}"
        if self.expected:
            s += " (expected " + ", ".join(self.expected) + ")"
        return s


class ClassError(Exception):
    """Class analysis failure (cycles, duplicates, unknown parents)."""

    def __init__(self, kind, message, span=NO_SPAN):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span

    def __str__(self):
        return f"{self.span}: {self.kind}: {self.message}"


@dataclass(frozen=True)
class TypeError_:
    """One type-rule violation. Name avoids shadowing the builtin."""

    rule: str
    message: str
    span: Span = NO_SPAN

    def render(self, filename="<input>"):
        return f"{filename}:{self.span.line}:{self.span.col}: {self.rule}: {self.message}"


class ConfigError(Exception):
    """Invalid machine configuration (word width, free-list count, ...)."""


class MemoryFault(Exception):
    """Low-level memory access failure; the interpreter wraps these."""

    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind
        self.message = message


class RuntimeErrorKind(enum.Enum):
    ASSERTION_FAILED_IF = "AssertionFailed-if"
    ASSERTION_FAILED_LOOP_ENTRY = "AssertionFailed-loop-entry"
    ASSERTION_FAILED_LOOP = "AssertionFailed-loop"
    NON_ZERO_FIELDS_ON_DELETE = "NonZeroFieldsOnDelete"
    NON_ZERO_CELLS_ON_DELETE = "NonZeroCellsOnDelete"
    DELOCAL_MISMATCH = "DelocalMismatch"
    NEW_TARGET_NOT_NIL = "NewTargetNotNil"
    COPY_TARGET_NOT_NIL = "CopyTargetNotNil"
    UNINITIALIZED_OBJECT = "UninitializedObject"
    UNINITIALIZED_ARRAY = "UninitializedArray"
    INDEX_OUT_OF_BOUNDS = "IndexOutOfBounds"
    DANGLING_REFERENCE_ON_DELETE = "DanglingReferenceOnDelete"
    DIVISION_BY_ZERO = "DivisionByZero"
    STACK_OVERFLOW = "StackOverflow"
    STEP_LIMIT_EXCEEDED = "StepLimitExceeded"
    NIL_DEREFERENCE = "NilDereference"
    # Conditions beyond the core list, kept explicit rather than folded into
    # a neighbouring kind.
    ARRAY_LENGTH_MISMATCH = "ArrayLengthMismatch"
    INVALID_ARRAY_LENGTH = "InvalidArrayLength"
    UNCOPY_MISMATCH = "UncopyMismatch"
    OUT_OF_MEMORY = "OutOfMemory"
    CORRUPT_FREE = "CorruptFree"
    ADDRESS_FAULT = "AddressFault"


class ExecutionError(Exception):
    """Runtime error; halts execution, partial state stays inspectable."""

    def __init__(self, kind: RuntimeErrorKind, message, span=NO_SPAN, trace=()):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.trace = tuple(trace)

    def __str__(self):
        s = f"{self.span}: {self.kind.value}: {self.message}"
        if self.trace:
            s += "\n  in " + "\n  in ".join(str(t) for t in self.trace)
        return s

"""ROOPL++ toolchain: parser, class analyzer, type checker, statement
inverter and a reversible interpreter over a simulated word memory."""

from .classes import ClassMap, array_type_of, build_class_map
from .errors import (ClassError, ConfigError, ExecutionError, MemoryFault,
                     ParseError, RuntimeErrorKind, Span, TypeError_)
from .heap import FreeListSnapshot, MemoryConfig, MemoryImage, init_memory
from .inverter import invert_program, invert_stmt
from .machine import (BACKWARD, FORWARD, Env, Interpreter, MachineState,
                      apply_binop, check_refcounts, live_heap_words,
                      run_program)
from .parser import parse, parse_expression, parse_statement
from .printer import pretty_print
from .typecheck import check_program, main_class_of

__version__ = "0.1.0"

__all__ = [
    "BACKWARD", "FORWARD", "ClassError", "ClassMap", "ConfigError", "Env",
    "ExecutionError", "FreeListSnapshot", "Interpreter", "MachineState",
    "MemoryConfig", "MemoryFault", "MemoryImage", "ParseError",
    "RuntimeErrorKind", "Span", "TypeError_", "apply_binop",
    "array_type_of", "build_class_map", "check_program", "check_refcounts",
    "init_memory", "invert_program", "invert_stmt", "live_heap_words",
    "main_class_of", "parse",
    "parse_expression", "parse_statement", "pretty_print", "run_program",
]

"""Abstract syntax for ROOPL++.

Node equality is structural and ignores source spans, so parse/print
round-trips compare cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import NO_SPAN, Span

MOD_OPS = ("+=", "-=", "^=")

BIN_OPS = (
    "+", "-", "^", "*", "/", "%", "&", "|", "&&", "||",
    "<", ">", "=", "!=", "<=", ">=",
)


def _span_field():
    return field(default=NO_SPAN, compare=False, repr=False)


# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class TypeName:
    pass


@dataclass(frozen=True)
class IntType(TypeName):
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class ClassRef(TypeName):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class IntArrayType(TypeName):
    def __str__(self):
        return "int[]"


@dataclass(frozen=True)
class ClassArrayType(TypeName):
    name: str

    def __str__(self):
        return f"{self.name}[]"


INT = IntType()
INT_ARRAY = IntArrayType()


# ---------------------------------------------------------- expressions

@dataclass(frozen=True)
class Expression:
    pass


@dataclass(frozen=True)
class Constant(Expression):
    value: int
    span: Span = _span_field()


@dataclass(frozen=True)
class Variable(Expression):
    name: str
    span: Span = _span_field()


@dataclass(frozen=True)
class ArrayElement(Expression):
    name: str
    index: Expression
    span: Span = _span_field()


@dataclass(frozen=True)
class Nil(Expression):
    span: Span = _span_field()


@dataclass(frozen=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression
    span: Span = _span_field()


def vars_of(expr: Expression) -> frozenset[str]:
    """Free variables of an expression."""
    if isinstance(expr, (Constant, Nil)):
        return frozenset()
    if isinstance(expr, Variable):
        return frozenset((expr.name,))
    if isinstance(expr, ArrayElement):
        return frozenset((expr.name,)) | vars_of(expr.index)
    if isinstance(expr, BinOp):
        return vars_of(expr.left) | vars_of(expr.right)
    raise TypeError(f"not an expression: {expr!r}")


# -------------------------------------------------------------- lvalues

@dataclass(frozen=True)
class LValue:
    """Assignable place: a variable or one array cell."""

    name: str
    index: Optional[Expression] = None
    span: Span = _span_field()

    @property
    def is_cell(self):
        return self.index is not None


# ---------------------------------------------------- alloc descriptors

@dataclass(frozen=True)
class AllocDesc:
    """The d of new/delete/copy: a class, a class array or an int array.

    `length` is None for plain objects; `name` is None for int arrays.
    """

    name: Optional[str] = None
    length: Optional[Expression] = None
    span: Span = _span_field()

    @property
    def is_array(self):
        return self.length is not None

    @property
    def is_int_array(self):
        return self.is_array and self.name is None

    def declared_type(self) -> TypeName:
        if not self.is_array:
            return ClassRef(self.name)
        if self.is_int_array:
            return INT_ARRAY
        return ClassArrayType(self.name)


# ------------------------------------------------------------ statements

@dataclass(frozen=True)
class Statement:
    pass


@dataclass(frozen=True)
class Skip(Statement):
    span: Span = _span_field()


@dataclass(frozen=True)
class Seq(Statement):
    """Flattened statement sequence; never directly nests another Seq."""

    stmts: tuple[Statement, ...]
    span: Span = _span_field()


@dataclass(frozen=True)
class Assign(Statement):
    target: LValue
    op: str  # one of MOD_OPS
    expr: Expression
    span: Span = _span_field()


@dataclass(frozen=True)
class Swap(Statement):
    left: LValue
    right: LValue
    span: Span = _span_field()


@dataclass(frozen=True)
class If(Statement):
    cond: Expression
    then_body: Statement
    else_body: Statement
    assertion: Expression
    span: Span = _span_field()


@dataclass(frozen=True)
class Loop(Statement):
    assertion: Expression
    do_body: Statement
    loop_body: Statement
    cond: Expression
    span: Span = _span_field()


@dataclass(frozen=True)
class ObjectBlock(Statement):
    class_name: str
    var: str
    body: Statement
    span: Span = _span_field()


@dataclass(frozen=True)
class LocalBlock(Statement):
    var_type: TypeName
    var: str
    entry: Expression
    body: Statement
    exit: Expression
    span: Span = _span_field()


@dataclass(frozen=True)
class New(Statement):
    desc: AllocDesc
    target: LValue
    span: Span = _span_field()


@dataclass(frozen=True)
class Delete(Statement):
    desc: AllocDesc
    target: LValue
    span: Span = _span_field()


@dataclass(frozen=True)
class Copy(Statement):
    desc: AllocDesc
    source: LValue
    target: LValue
    span: Span = _span_field()


@dataclass(frozen=True)
class Uncopy(Statement):
    desc: AllocDesc
    source: LValue
    target: LValue
    span: Span = _span_field()


@dataclass(frozen=True)
class LocalCall(Statement):
    method: str
    args: tuple[str, ...]
    span: Span = _span_field()


@dataclass(frozen=True)
class LocalUncall(Statement):
    method: str
    args: tuple[str, ...]
    span: Span = _span_field()


@dataclass(frozen=True)
class ObjectCall(Statement):
    callee: LValue
    method: str
    args: tuple[str, ...]
    span: Span = _span_field()


@dataclass(frozen=True)
class ObjectUncall(Statement):
    callee: LValue
    method: str
    args: tuple[str, ...]
    span: Span = _span_field()


# ------------------------------------------------------------ top level

@dataclass(frozen=True)
class MethodDecl:
    name: str
    params: tuple[tuple[TypeName, str], ...]
    body: Statement
    span: Span = _span_field()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    parent: Optional[str]
    fields: tuple[tuple[TypeName, str], ...]
    methods: tuple[MethodDecl, ...]
    span: Span = _span_field()


@dataclass(frozen=True)
class Program:
    classes: tuple[ClassDecl, ...]
    span: Span = _span_field()


def seq(stmts, span=NO_SPAN) -> Statement:
    """Build the flattened-sequence normal form from a statement list."""
    flat = []
    for s in stmts:
        if isinstance(s, Seq):
            flat.extend(s.stmts)
        else:
            flat.append(s)
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat), span=span)

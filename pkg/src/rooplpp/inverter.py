"""Source-level statement and program inversion.

`invert_stmt` is an involution.  Conditionals and loops exchange their
entry expression with their exit assertion; local blocks exchange the
initializer with the delocal expression.  Running a statement forward and
then its inverse forward restores the machine state exactly.

Whole-program inversion applies the modified inverter at the top of every
method body: calls and uncalls at that level are kept as they are (the
inversion of the callee body cancels against call/uncall flipping), while
everything beneath is inverted normally.
"""

from __future__ import annotations

from . import syntax as ast

_MOD_INVERSE = {"+=": "-=", "-=": "+=", "^=": "^="}


def invert_stmt(stmt: ast.Statement) -> ast.Statement:
    """The inverse statement I[s]."""
    if isinstance(stmt, ast.Skip):
        return stmt
    if isinstance(stmt, ast.Seq):
        return ast.Seq(tuple(invert_stmt(s) for s in reversed(stmt.stmts)),
                       span=stmt.span)
    if isinstance(stmt, ast.Assign):
        return ast.Assign(stmt.target, _MOD_INVERSE[stmt.op], stmt.expr,
                          span=stmt.span)
    if isinstance(stmt, ast.Swap):
        return stmt
    if isinstance(stmt, ast.If):
        return ast.If(stmt.assertion, invert_stmt(stmt.then_body),
                      invert_stmt(stmt.else_body), stmt.cond, span=stmt.span)
    if isinstance(stmt, ast.Loop):
        return ast.Loop(stmt.cond, invert_stmt(stmt.do_body),
                        invert_stmt(stmt.loop_body), stmt.assertion,
                        span=stmt.span)
    if isinstance(stmt, ast.ObjectBlock):
        return ast.ObjectBlock(stmt.class_name, stmt.var,
                               invert_stmt(stmt.body), span=stmt.span)
    if isinstance(stmt, ast.LocalBlock):
        return ast.LocalBlock(stmt.var_type, stmt.var, stmt.exit,
                              invert_stmt(stmt.body), stmt.entry,
                              span=stmt.span)
    if isinstance(stmt, ast.New):
        return ast.Delete(stmt.desc, stmt.target, span=stmt.span)
    if isinstance(stmt, ast.Delete):
        return ast.New(stmt.desc, stmt.target, span=stmt.span)
    if isinstance(stmt, ast.Copy):
        return ast.Uncopy(stmt.desc, stmt.source, stmt.target, span=stmt.span)
    if isinstance(stmt, ast.Uncopy):
        return ast.Copy(stmt.desc, stmt.source, stmt.target, span=stmt.span)
    if isinstance(stmt, ast.LocalCall):
        return ast.LocalUncall(stmt.method, stmt.args, span=stmt.span)
    if isinstance(stmt, ast.LocalUncall):
        return ast.LocalCall(stmt.method, stmt.args, span=stmt.span)
    if isinstance(stmt, ast.ObjectCall):
        return ast.ObjectUncall(stmt.callee, stmt.method, stmt.args,
                                span=stmt.span)
    if isinstance(stmt, ast.ObjectUncall):
        return ast.ObjectCall(stmt.callee, stmt.method, stmt.args,
                              span=stmt.span)
    raise TypeError(f"not a statement: {stmt!r}")


def _invert_keep_calls(stmt: ast.Statement) -> ast.Statement:
    """Modified inverter: like invert_stmt but calls and uncalls survive
    unchanged at every depth.  Invoking an inverted method then cancels
    against the body inversion, so whole-program inversion composes."""
    if isinstance(stmt, (ast.LocalCall, ast.LocalUncall,
                         ast.ObjectCall, ast.ObjectUncall)):
        return stmt
    if isinstance(stmt, ast.Seq):
        return ast.Seq(tuple(_invert_keep_calls(s) for s in reversed(stmt.stmts)),
                       span=stmt.span)
    if isinstance(stmt, ast.If):
        return ast.If(stmt.assertion, _invert_keep_calls(stmt.then_body),
                      _invert_keep_calls(stmt.else_body), stmt.cond,
                      span=stmt.span)
    if isinstance(stmt, ast.Loop):
        return ast.Loop(stmt.cond, _invert_keep_calls(stmt.do_body),
                        _invert_keep_calls(stmt.loop_body), stmt.assertion,
                        span=stmt.span)
    if isinstance(stmt, ast.ObjectBlock):
        return ast.ObjectBlock(stmt.class_name, stmt.var,
                               _invert_keep_calls(stmt.body), span=stmt.span)
    if isinstance(stmt, ast.LocalBlock):
        return ast.LocalBlock(stmt.var_type, stmt.var, stmt.exit,
                              _invert_keep_calls(stmt.body), stmt.entry,
                              span=stmt.span)
    return invert_stmt(stmt)


def invert_program(program: ast.Program) -> ast.Program:
    """Invert every method body via the modified top-level inverter."""
    classes = []
    for cls in program.classes:
        methods = tuple(
            ast.MethodDecl(m.name, m.params, _invert_keep_calls(m.body),
                           span=m.span)
            for m in cls.methods)
        classes.append(ast.ClassDecl(cls.name, cls.parent, cls.fields,
                                     methods, span=cls.span))
    return ast.Program(tuple(classes), span=program.span)

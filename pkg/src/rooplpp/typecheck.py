"""Static type checker.

Every rejected construct reports the name of the violated rule; the error
list is deterministic (AST order).  Nil has no type of its own: it adopts
any non-int type the context supplies, and is an error where no context
exists (e.g. `1 + nil`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .classes import ClassMap, array_type_of
from .errors import NO_SPAN, TypeError_
from . import syntax as ast
from .syntax import vars_of


@dataclass
class TypeEnv:
    bindings: dict[str, ast.TypeName]
    current_class: str
    field_names: frozenset[str]

    def extend(self, name, ty) -> "TypeEnv":
        new = dict(self.bindings)
        new[name] = ty
        return TypeEnv(new, self.current_class, self.field_names)

    def lookup(self, name):
        return self.bindings.get(name)


class Checker:
    def __init__(self, class_map: ClassMap):
        self.class_map = class_map
        self.errors: list[TypeError_] = []
        self.warnings: list[str] = []

    def error(self, rule, message, span=NO_SPAN):
        self.errors.append(TypeError_(rule, message, span))

    # ---------------------------------------------------------- types

    def assignable(self, actual: ast.TypeName, formal: ast.TypeName) -> bool:
        """actual may be passed where formal is expected (subtyping on
        classes, invariance everywhere else)."""
        if actual == formal:
            return True
        if isinstance(actual, ast.ClassRef) and isinstance(formal, ast.ClassRef):
            return self.class_map.subtype_of(actual.name, formal.name)
        return False

    # ----------------------------------------------------- expressions

    def check_expr(self, env: TypeEnv, expr: ast.Expression,
                   expected: ast.TypeName | None = None) -> ast.TypeName | None:
        """Type of expr, or None after reporting an error.

        `expected` supplies the context type used to resolve Nil.
        """
        if isinstance(expr, ast.Constant):
            return ast.INT
        if isinstance(expr, ast.Nil):
            if expected is None or expected == ast.INT:
                self.error("T-Nil", "nil used where no object or array type "
                           "is expected", expr.span)
                return None
            return expected
        if isinstance(expr, ast.Variable):
            ty = env.lookup(expr.name)
            if ty is None:
                self.error("T-Var", f"unbound variable {expr.name}", expr.span)
            return ty
        if isinstance(expr, ast.ArrayElement):
            ty = env.lookup(expr.name)
            if ty is None:
                self.error("T-ArrElemVar", f"unbound variable {expr.name}",
                           expr.span)
                return None
            if not isinstance(ty, (ast.IntArrayType, ast.ClassArrayType)):
                self.error("T-ArrElemVar",
                           f"{expr.name} has type {ty}, not an array", expr.span)
                return None
            self.expect_int(env, expr.index, "T-ArrElemVar", "array index")
            return array_type_of(ty)
        if isinstance(expr, ast.BinOp):
            return self.check_binop(env, expr)
        raise TypeError(f"not an expression: {expr!r}")

    def check_binop(self, env, expr: ast.BinOp) -> ast.TypeName | None:
        lt = None if isinstance(expr.left, ast.Nil) else self.check_expr(env, expr.left)
        rt = None if isinstance(expr.right, ast.Nil) else self.check_expr(env, expr.right)
        left_nil = isinstance(expr.left, ast.Nil)
        right_nil = isinstance(expr.right, ast.Nil)
        if left_nil and right_nil:
            self.error("T-Nil", "cannot compare nil with nil", expr.span)
            return None
        if left_nil:
            lt = self.check_expr(env, expr.left, expected=rt)
        if right_nil:
            rt = self.check_expr(env, expr.right, expected=lt)
        if lt is None or rt is None:
            return None
        if lt == ast.INT and rt == ast.INT:
            return ast.INT
        # non-integer operands admit only equality tests
        if lt == rt:
            if expr.op in ("=", "!="):
                return ast.INT
            self.error("T-BinOpObj",
                       f"operator {expr.op} is not defined on {lt} operands",
                       expr.span)
            return None
        if expr.op in ("=", "!="):
            self.error("T-BinOpObj", f"cannot compare {lt} with {rt}",
                       expr.span)
            return None
        self.error("T-BinOpInt",
                   f"operator {expr.op} needs int operands, got {lt} and {rt}",
                   expr.span)
        return None

    def expect_int(self, env, expr, rule, what):
        ty = self.check_expr(env, expr, expected=ast.INT)
        if ty is not None and ty != ast.INT:
            self.error(rule, f"{what} must be int, got {ty}",
                       getattr(expr, "span", NO_SPAN))
            return False
        return ty is not None

    # ------------------------------------------------------ statements

    def check_stmt(self, env: TypeEnv, stmt: ast.Statement):
        method = getattr(self, "_check_" + type(stmt).__name__, None)
        if method is None:
            raise TypeError(f"not a statement: {stmt!r}")
        method(env, stmt)

    def _check_Skip(self, env, stmt):
        pass

    def _check_Seq(self, env, stmt):
        for s in stmt.stmts:
            self.check_stmt(env, s)

    def _check_Assign(self, env, stmt: ast.Assign):
        target = stmt.target
        ty = env.lookup(target.name)
        if ty is None:
            self.error("T-AssVar", f"unbound variable {target.name}", stmt.span)
            return
        if target.is_cell:
            if not isinstance(ty, ast.IntArrayType):
                self.error("T-ArrElemAss",
                           f"{target.name} has type {ty}; assignable cells "
                           "need int[]", stmt.span)
                return
            self.expect_int(env, target.index, "T-ArrElemAss", "array index")
            banned = frozenset((target.name,)) | vars_of(target.index)
            overlap = banned & vars_of(stmt.expr)
            if overlap:
                self.error("T-ArrElemAss",
                           f"right-hand side references {', '.join(sorted(overlap))}",
                           stmt.span)
            self.expect_int(env, stmt.expr, "T-ArrElemAss", "right-hand side")
            return
        if ty != ast.INT:
            self.error("T-AssVar",
                       f"{target.name} has type {ty}; {stmt.op} needs int",
                       stmt.span)
            return
        if target.name in vars_of(stmt.expr):
            self.error("T-AssVar",
                       f"{target.name} occurs on its own right-hand side",
                       stmt.span)
        self.expect_int(env, stmt.expr, "T-AssVar", "right-hand side")

    def _lvalue_type(self, env, lv: ast.LValue, rule) -> ast.TypeName | None:
        ty = env.lookup(lv.name)
        if ty is None:
            self.error(rule, f"unbound variable {lv.name}", lv.span)
            return None
        if lv.is_cell:
            if not isinstance(ty, (ast.IntArrayType, ast.ClassArrayType)):
                self.error(rule, f"{lv.name} has type {ty}, not an array",
                           lv.span)
                return None
            self.expect_int(env, lv.index, rule, "array index")
            return array_type_of(ty)
        return ty

    def _check_Swap(self, env, stmt: ast.Swap):
        lt = self._lvalue_type(env, stmt.left, "T-SwpVar")
        rt = self._lvalue_type(env, stmt.right, "T-SwpVar")
        if lt is None or rt is None:
            return
        if lt == rt:
            return
        # a base-class array cell may exchange with a subclass variable
        if isinstance(lt, ast.ClassRef) and isinstance(rt, ast.ClassRef):
            if stmt.left.is_cell and self.assignable(rt, lt):
                return
            if stmt.right.is_cell and self.assignable(lt, rt):
                return
        self.error("T-SwpVar", f"cannot swap {lt} with {rt}", stmt.span)

    def _check_If(self, env, stmt: ast.If):
        self.expect_int(env, stmt.cond, "T-If", "if condition")
        self.check_stmt(env, stmt.then_body)
        self.check_stmt(env, stmt.else_body)
        self.expect_int(env, stmt.assertion, "T-If", "fi assertion")

    def _check_Loop(self, env, stmt: ast.Loop):
        self.expect_int(env, stmt.assertion, "T-Loop", "from assertion")
        self.check_stmt(env, stmt.do_body)
        self.check_stmt(env, stmt.loop_body)
        self.expect_int(env, stmt.cond, "T-Loop", "until condition")

    def _check_ObjectBlock(self, env, stmt: ast.ObjectBlock):
        if stmt.class_name not in self.class_map:
            self.error("T-ObjBlock", f"unknown class {stmt.class_name}",
                       stmt.span)
            return
        prior = env.lookup(stmt.var)
        if prior is not None and prior != ast.ClassRef(stmt.class_name):
            self.warnings.append(
                f"{stmt.span}: construct {stmt.class_name} {stmt.var} shadows "
                f"a {prior} variable")
        self.check_stmt(env.extend(stmt.var, ast.ClassRef(stmt.class_name)),
                        stmt.body)

    def _check_LocalBlock(self, env, stmt: ast.LocalBlock):
        ty = stmt.var_type
        if isinstance(ty, ast.ClassRef) and ty.name not in self.class_map:
            self.error("T-LocalBlock", f"unknown class {ty.name}", stmt.span)
            return
        if isinstance(ty, ast.ClassArrayType) and ty.name not in self.class_map:
            self.error("T-LocalBlock", f"unknown class {ty.name}", stmt.span)
            return
        for expr, what in ((stmt.entry, "local initializer"),
                           (stmt.exit, "delocal expression")):
            et = self.check_expr(env, expr, expected=ty)
            if et is not None and et != ty:
                self.error("T-LocalBlock",
                           f"{what} has type {et}, expected {ty}",
                           getattr(expr, "span", stmt.span))
        self.check_stmt(env.extend(stmt.var, ty), stmt.body)

    def _desc_type(self, env, desc: ast.AllocDesc, rule) -> ast.TypeName | None:
        if not desc.is_array:
            if desc.name not in self.class_map:
                self.error(rule, f"unknown class {desc.name}", desc.span)
                return None
            return ast.ClassRef(desc.name)
        if not desc.is_int_array and desc.name not in self.class_map:
            self.error(rule, f"unknown class {desc.name}", desc.span)
            return None
        self.expect_int(env, desc.length, rule, "array length")
        return desc.declared_type()

    def _check_new_delete(self, env, stmt, rule_obj, rule_arr):
        rule = rule_arr if stmt.desc.is_array else rule_obj
        want = self._desc_type(env, stmt.desc, rule)
        got = self._lvalue_type(env, stmt.target, rule)
        if want is None or got is None:
            return
        if got != want:
            self.error(rule, f"target has type {got}, descriptor says {want}",
                       stmt.span)

    def _check_New(self, env, stmt):
        self._check_new_delete(env, stmt, "T-ObjNew", "T-ArrNew")

    def _check_Delete(self, env, stmt):
        self._check_new_delete(env, stmt, "T-ObjDlt", "T-ArrDlt")

    def _check_copy_uncopy(self, env, stmt, rule):
        want = self._desc_type(env, stmt.desc, rule)
        st = self._lvalue_type(env, stmt.source, rule)
        tt = self._lvalue_type(env, stmt.target, rule)
        if want is None or st is None or tt is None:
            return
        # both operands must carry exactly the declared type
        if st != want or tt != want:
            self.error(rule,
                       f"operands have types {st} and {tt}, descriptor says {want}",
                       stmt.span)

    def _check_Copy(self, env, stmt):
        self._check_copy_uncopy(env, stmt, "T-Cp")

    def _check_Uncopy(self, env, stmt):
        self._check_copy_uncopy(env, stmt, "T-Ucp")

    def _check_call_args(self, env, stmt, mdecl, rule, forbid_fields):
        args = stmt.args
        if len(args) != len(mdecl.params):
            self.error(rule,
                       f"{stmt.method} takes {len(mdecl.params)} arguments, "
                       f"got {len(args)}", stmt.span)
            return
        if len(set(args)) != len(args):
            self.error(rule, "argument list must contain unique variables",
                       stmt.span)
        if forbid_fields:
            bad = [a for a in args if a in env.field_names]
            if bad:
                self.error(rule,
                           f"class fields cannot be passed to a local method: "
                           f"{', '.join(bad)}", stmt.span)
        for arg, (pty, pname) in zip(args, mdecl.params):
            aty = env.lookup(arg)
            if aty is None:
                self.error(rule, f"unbound argument {arg}", stmt.span)
                continue
            if not self.assignable(aty, pty):
                self.error(rule,
                           f"argument {arg} has type {aty}, parameter "
                           f"{pname} wants {pty}", stmt.span)

    def _check_local_call(self, env, stmt, rule):
        info = self.class_map[env.current_class]
        mdecl = info.methods.get(stmt.method)
        if mdecl is None:
            self.error(rule, f"class {env.current_class} has no method "
                       f"{stmt.method}", stmt.span)
            return
        self._check_call_args(env, stmt, mdecl, rule, forbid_fields=True)

    def _check_LocalCall(self, env, stmt):
        self._check_local_call(env, stmt, "T-Call")

    def _check_LocalUncall(self, env, stmt):
        self._check_local_call(env, stmt, "T-Uc")

    def _check_object_call(self, env, stmt, rule):
        cty = self._lvalue_type(env, stmt.callee, rule)
        if cty is None:
            return
        if not isinstance(cty, ast.ClassRef):
            self.error(rule, f"callee has type {cty}, not an object", stmt.span)
            return
        info = self.class_map[cty.name]
        mdecl = info.methods.get(stmt.method)
        if mdecl is None:
            self.error(rule, f"class {cty.name} has no method {stmt.method}",
                       stmt.span)
            return
        if not stmt.callee.is_cell and stmt.callee.name in stmt.args:
            self.error(rule, f"callee {stmt.callee.name} cannot also be an "
                       "argument", stmt.span)
        self._check_call_args(env, stmt, mdecl, rule, forbid_fields=False)

    def _check_ObjectCall(self, env, stmt):
        self._check_object_call(env, stmt, "T-CallO")

    def _check_ObjectUncall(self, env, stmt):
        self._check_object_call(env, stmt, "T-Uco")

    # --------------------------------------------------------- programs

    def check_method(self, class_name: str, mdecl: ast.MethodDecl):
        info = self.class_map[class_name]
        bindings = {fname: fty for fty, fname in info.fields}
        for pty, pname in mdecl.params:
            bindings[pname] = pty
        env = TypeEnv(bindings, class_name,
                      frozenset(fname for _, fname in info.fields))
        self.check_stmt(env, mdecl.body)


def check_program(program: ast.Program, class_map: ClassMap, warnings=None):
    """All type errors for a program (empty list means well-typed).

    Non-fatal findings (e.g. an object block shadowing a live variable of
    another type) are appended to `warnings` when a list is given.
    """
    checker = Checker(class_map)
    mains = [(cls.name, m) for cls in program.classes for m in cls.methods
             if m.name == "main"]
    nullary = [(c, m) for c, m in mains if not m.params]
    if not nullary:
        checker.error("T-Prog", "program has no nullary main method",
                      program.span)
    elif len(nullary) > 1:
        checker.error("T-Prog", "program has more than one main method",
                      nullary[1][1].span)
    for cls in program.classes:
        for mdecl in cls.methods:
            checker.check_method(cls.name, mdecl)
    if warnings is not None:
        warnings.extend(checker.warnings)
    return checker.errors


def main_class_of(program: ast.Program) -> str:
    """Name of the class declaring the nullary main method."""
    for cls in program.classes:
        for m in cls.methods:
            if m.name == "main" and not m.params:
                return cls.name
    raise ValueError("program has no nullary main method")

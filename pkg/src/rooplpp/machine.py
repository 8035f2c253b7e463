"""Direction-aware tree-walking interpreter.

Values are machine words; object values are the addresses of their
headers and 0 encodes nil.  An object at address a stores its class id at
a and a reference count at a+1, fields follow.  An array stores its
length at a and a reference count at a+1, cells follow.

Every environment binding maps a variable to the address of the word
holding its value, so parameter passing is call-by-reference and swaps
between locals, fields and array cells are uniform word exchanges.
Executing a statement backward is observationally identical to executing
its source-level inverse forward.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .classes import ClassMap
from .errors import ExecutionError, MemoryFault, RuntimeErrorKind, Span
from .heap import MemoryConfig, MemoryImage, init_memory
from .typecheck import main_class_of
from . import syntax as ast

E = RuntimeErrorKind

FORWARD = "forward"
BACKWARD = "backward"


def _flip(direction):
    return BACKWARD if direction == FORWARD else FORWARD


def apply_binop(op: str, v1: int, v2: int, word_bits: int = 32) -> int:
    """Binary operator table over two's-complement words.

    All comparisons return 1 when the relation holds.  Division truncates
    toward zero; the remainder takes the dividend's sign.  Arithmetic
    wraps at the word width.
    """
    mask = (1 << word_bits) - 1
    sign = 1 << (word_bits - 1)

    def signed(v):
        return v - (1 << word_bits) if v & sign else v

    if op == "+":
        return (v1 + v2) & mask
    if op == "-":
        return (v1 - v2) & mask
    if op == "*":
        return (v1 * v2) & mask
    if op == "^":
        return v1 ^ v2
    if op == "&":
        return v1 & v2
    if op == "|":
        return v1 | v2
    if op == "/":
        s1, s2 = signed(v1), signed(v2)
        if s2 == 0:
            raise ZeroDivisionError
        q = abs(s1) // abs(s2)
        if (s1 < 0) != (s2 < 0):
            q = -q
        return q & mask
    if op == "%":
        s1, s2 = signed(v1), signed(v2)
        if s2 == 0:
            raise ZeroDivisionError
        q = abs(s1) // abs(s2)
        if (s1 < 0) != (s2 < 0):
            q = -q
        return (s1 - q * s2) & mask
    if op == "&&":
        return 0 if v1 == 0 or v2 == 0 else 1
    if op == "||":
        return 0 if v1 == 0 and v2 == 0 else 1
    s1, s2 = signed(v1), signed(v2)
    if op == "<":
        return 1 if s1 < s2 else 0
    if op == ">":
        return 1 if s1 > s2 else 0
    if op == "<=":
        return 1 if s1 <= s2 else 0
    if op == ">=":
        return 1 if s1 >= s2 else 0
    if op == "=":
        return 1 if v1 == v2 else 0
    if op == "!=":
        return 1 if v1 != v2 else 0
    raise ValueError(f"unknown operator {op!r}")


@dataclass
class Env:
    """Variable -> (slot address, declared type); this_slot holds the
    address of the word containing the current object's address."""

    bindings: dict[str, tuple[int, ast.TypeName]]
    this_slot: int | None = None

    def slot(self, name) -> tuple[int, ast.TypeName]:
        return self.bindings[name]

    def bind(self, name, addr, ty) -> "Env":
        new = dict(self.bindings)
        new[name] = (addr, ty)
        return Env(new, self.this_slot)


class MachineState:
    def __init__(self, memory: MemoryImage, step_limit: int = 10_000_000):
        self.memory = memory
        self.frame_top = memory.stack_base
        self.steps = 0
        self.step_limit = step_limit
        self.live_slots: list[tuple[int, ast.TypeName]] = []
        self.tracer = None
        self._touched: list[int] = []

    def poke(self, addr, value):
        self.memory.write_word(addr, value)
        if self.tracer is not None:
            self._touched.append(addr)

    def signed(self, word):
        bits = self.memory.word_bits
        return word - (1 << bits) if word & (1 << (bits - 1)) else word

    def push_frame_word(self, span):
        if self.frame_top - 1 < self.memory.heap_max:
            raise ExecutionError(E.STACK_OVERFLOW,
                                 "frame region collided with the heap", span)
        self.frame_top -= 1
        return self.frame_top

    def pop_frame_word(self):
        self.frame_top += 1


@dataclass
class RunResult:
    fields: dict[str, int]
    steps: int
    state: MachineState
    main_address: int
    env: Env


class Interpreter:
    def __init__(self, class_map: ClassMap, state: MachineState):
        self.class_map = class_map
        self.state = state
        self.mem = state.memory
        self.call_spans: list[Span] = []

    # ----------------------------------------------------------- errors

    def fail(self, kind, message, span):
        raise ExecutionError(kind, message, span, trace=tuple(self.call_spans))

    def _wrap_fault(self, fault: MemoryFault, span):
        kind = {
            "NilFault": E.NIL_DEREFERENCE,
            "AddressFault": E.ADDRESS_FAULT,
            "OutOfMemory": E.OUT_OF_MEMORY,
            "CorruptFree": E.CORRUPT_FREE,
        }[fault.kind]
        self.fail(kind, fault.message, span)

    # ------------------------------------------------------ expressions

    def eval_expr(self, env: Env, expr: ast.Expression) -> int:
        if isinstance(expr, ast.Constant):
            return expr.value & self.mem.mask
        if isinstance(expr, ast.Nil):
            return 0
        if isinstance(expr, ast.Variable):
            addr, _ = env.slot(expr.name)
            return self.mem.read_word(addr)
        if isinstance(expr, ast.ArrayElement):
            cell = self.array_cell_addr(env, expr.name, expr.index, expr.span)
            return self.mem.read_word(cell)
        if isinstance(expr, ast.BinOp):
            v1 = self.eval_expr(env, expr.left)
            v2 = self.eval_expr(env, expr.right)
            try:
                return apply_binop(expr.op, v1, v2, self.mem.word_bits)
            except ZeroDivisionError:
                self.fail(E.DIVISION_BY_ZERO,
                          f"division by zero in {expr.op}", expr.span)
        raise TypeError(f"not an expression: {expr!r}")

    def array_cell_addr(self, env, name, index_expr, span) -> int:
        addr, _ = env.slot(name)
        base = self.mem.read_word(addr)
        if base == 0:
            self.fail(E.UNINITIALIZED_ARRAY,
                      f"array {name} has not been allocated", span)
        length = self.mem.read_word(base)
        idx = self.state.signed(self.eval_expr(env, index_expr))
        if not 0 <= idx < length:
            self.fail(E.INDEX_OUT_OF_BOUNDS,
                      f"index {idx} outside [0, {length}) of {name}", span)
        return base + 2 + idx

    def lvalue_addr(self, env, lv: ast.LValue) -> int:
        if lv.is_cell:
            return self.array_cell_addr(env, lv.name, lv.index, lv.span)
        addr, _ = env.slot(lv.name)
        return addr

    # ------------------------------------------------------- statements

    def exec_stmt(self, env: Env, stmt: ast.Statement, direction=FORWARD):
        if isinstance(stmt, ast.Seq):
            parts = stmt.stmts if direction == FORWARD else tuple(reversed(stmt.stmts))
            for s in parts:
                self.exec_stmt(env, s, direction)
            return
        self.state.steps += 1
        if self.state.steps > self.state.step_limit:
            self.fail(E.STEP_LIMIT_EXCEEDED,
                      f"exceeded {self.state.step_limit} steps", stmt.span)
        if self.state.tracer is not None:
            self.state._touched = []
        handler = getattr(self, "_exec_" + type(stmt).__name__)
        handler(env, stmt, direction)
        if self.state.tracer is not None:
            self.state.tracer({
                "span": [stmt.span.line, stmt.span.col,
                         stmt.span.end_line, stmt.span.end_col],
                "rule": type(stmt).__name__,
                "direction": direction,
                "touched": sorted(set(self.state._touched)),
            })

    def _exec_Skip(self, env, stmt, direction):
        pass

    def _exec_Assign(self, env, stmt: ast.Assign, direction):
        op = stmt.op if direction == FORWARD else {"+=": "-=", "-=": "+=",
                                                   "^=": "^="}[stmt.op]
        addr = self.lvalue_addr(env, stmt.target)
        value = self.eval_expr(env, stmt.expr)
        old = self.mem.read_word(addr)
        self.state.poke(addr, apply_binop(op[0], old, value, self.mem.word_bits))

    def _exec_Swap(self, env, stmt: ast.Swap, direction):
        left = self.lvalue_addr(env, stmt.left)
        right = self.lvalue_addr(env, stmt.right)
        lv, rv = self.mem.read_word(left), self.mem.read_word(right)
        self.state.poke(left, rv)
        self.state.poke(right, lv)

    def _exec_If(self, env, stmt: ast.If, direction):
        if direction == FORWARD:
            entry, exit_ = stmt.cond, stmt.assertion
        else:
            entry, exit_ = stmt.assertion, stmt.cond
        taken = self.eval_expr(env, entry) != 0
        body = stmt.then_body if taken else stmt.else_body
        self.exec_stmt(env, body, direction)
        after = self.eval_expr(env, exit_) != 0
        if after != taken:
            self.fail(E.ASSERTION_FAILED_IF,
                      f"exit assertion is {'true' if after else 'false'} after "
                      f"the {'then' if taken else 'else'} branch", stmt.span)

    def _exec_Loop(self, env, stmt: ast.Loop, direction):
        if direction == FORWARD:
            entry, exit_ = stmt.assertion, stmt.cond
        else:
            entry, exit_ = stmt.cond, stmt.assertion
        if self.eval_expr(env, entry) == 0:
            self.fail(E.ASSERTION_FAILED_LOOP_ENTRY,
                      "loop entry assertion is false", stmt.span)
        while True:
            self.exec_stmt(env, stmt.do_body, direction)
            if self.eval_expr(env, exit_) != 0:
                break
            self.exec_stmt(env, stmt.loop_body, direction)
            if self.eval_expr(env, entry) != 0:
                self.fail(E.ASSERTION_FAILED_LOOP,
                          "loop entry assertion became true again", stmt.span)

    def _exec_LocalBlock(self, env, stmt: ast.LocalBlock, direction):
        entry = stmt.entry if direction == FORWARD else stmt.exit
        exit_ = stmt.exit if direction == FORWARD else stmt.entry
        v1 = self.eval_expr(env, entry)
        slot = self.state.push_frame_word(stmt.span)
        self.state.poke(slot, v1)
        self._retain(stmt.var_type, v1)
        self.state.live_slots.append((slot, stmt.var_type))
        inner = env.bind(stmt.var, slot, stmt.var_type)
        self.exec_stmt(inner, stmt.body, direction)
        v2 = self.eval_expr(env, exit_)
        cur = self.mem.read_word(slot)
        if cur != v2:
            self.fail(E.DELOCAL_MISMATCH,
                      f"{stmt.var} holds {self.state.signed(cur)}, delocal "
                      f"expects {self.state.signed(v2)}", stmt.span)
        self._release(stmt.var_type, cur, stmt.span)
        self.state.live_slots.pop()
        self.state.poke(slot, 0)
        self.state.pop_frame_word()

    def _retain(self, ty, value):
        if value != 0 and not isinstance(ty, ast.IntType):
            self.state.poke(value + 1, self.mem.read_word(value + 1) + 1)

    def _release(self, ty, value, span):
        if value != 0 and not isinstance(ty, ast.IntType):
            rc = self.mem.read_word(value + 1)
            if rc < 2:
                self.fail(E.CORRUPT_FREE,
                          "reference count would drop below one", span)
            self.state.poke(value + 1, rc - 1)

    def _exec_ObjectBlock(self, env, stmt: ast.ObjectBlock, direction):
        # construct c x  s  destruct x   is the dynamic pair wrapped in a
        # local nil block: allocate at entry, deallocate at exit, in both
        # directions
        slot = self.state.push_frame_word(stmt.span)
        ty = ast.ClassRef(stmt.class_name)
        self.state.live_slots.append((slot, ty))
        inner = env.bind(stmt.var, slot, ty)
        target = ast.LValue(stmt.var, span=stmt.span)
        self._new_object(inner, stmt.class_name, target, stmt.span)
        self.exec_stmt(inner, stmt.body, direction)
        self._delete_object(inner, stmt.class_name, target, stmt.span)
        self.state.live_slots.pop()
        self.state.pop_frame_word()

    # ------------------------------------------------- new/delete/copy

    def _exec_New(self, env, stmt, direction):
        if direction == FORWARD:
            self._do_new(env, stmt.desc, stmt.target, stmt.span)
        else:
            self._do_delete(env, stmt.desc, stmt.target, stmt.span)

    def _exec_Delete(self, env, stmt, direction):
        if direction == FORWARD:
            self._do_delete(env, stmt.desc, stmt.target, stmt.span)
        else:
            self._do_new(env, stmt.desc, stmt.target, stmt.span)

    def _do_new(self, env, desc, target, span):
        if desc.is_array:
            self._new_array(env, desc, target, span)
        else:
            self._new_object(env, desc.name, target, span)

    def _do_delete(self, env, desc, target, span):
        if desc.is_array:
            self._delete_array(env, desc, target, span)
        else:
            self._delete_object(env, desc.name, target, span)

    def _new_object(self, env, class_name, target, span):
        slot = self.lvalue_addr(env, target)
        if self.mem.read_word(slot) != 0:
            self.fail(E.NEW_TARGET_NOT_NIL,
                      f"target of new {class_name} is not nil", span)
        info = self.class_map[class_name]
        try:
            addr = self.mem.malloc(info.alloc_words)
        except MemoryFault as fault:
            self._wrap_fault(fault, span)
        self.state.poke(addr, info.class_id)
        self.state.poke(addr + 1, 1)
        self.state.poke(slot, addr)

    def _delete_object(self, env, class_name, target, span):
        slot = self.lvalue_addr(env, target)
        addr = self.mem.read_word(slot)
        if addr == 0:
            self.fail(E.NIL_DEREFERENCE,
                      f"delete {class_name} on a nil reference", span)
        class_id = self.mem.read_word(addr)
        try:
            info = self.class_map.by_id(class_id)
        except KeyError:
            self.fail(E.CORRUPT_FREE,
                      f"word at {addr} is not an object header", span)
        if self.mem.read_word(addr + 1) != 1:
            self.fail(E.DANGLING_REFERENCE_ON_DELETE,
                      f"object still has {self.mem.read_word(addr + 1)} "
                      "references", span)
        for i in range(info.payload_words):
            if self.mem.read_word(addr + 2 + i) != 0:
                self.fail(E.NON_ZERO_FIELDS_ON_DELETE,
                          f"field {info.fields[i][1]} is not zero-cleared",
                          span)
        self.state.poke(addr, 0)
        self.state.poke(addr + 1, 0)
        try:
            self.mem.free(addr, info.alloc_words)
        except MemoryFault as fault:
            self._wrap_fault(fault, span)
        self.state.poke(slot, 0)

    def _array_length_of(self, env, desc, span) -> int:
        n = self.state.signed(self.eval_expr(env, desc.length))
        if n < 1:
            self.fail(E.INVALID_ARRAY_LENGTH,
                      f"array length {n} is not positive", span)
        return n

    def _new_array(self, env, desc, target, span):
        slot = self.lvalue_addr(env, target)
        if self.mem.read_word(slot) != 0:
            self.fail(E.NEW_TARGET_NOT_NIL, "target of new array is not nil",
                      span)
        n = self._array_length_of(env, desc, span)
        try:
            addr = self.mem.malloc(n + 2)
        except MemoryFault as fault:
            self._wrap_fault(fault, span)
        self.state.poke(addr, n)
        self.state.poke(addr + 1, 1)
        self.state.poke(slot, addr)

    def _delete_array(self, env, desc, target, span):
        slot = self.lvalue_addr(env, target)
        addr = self.mem.read_word(slot)
        if addr == 0:
            self.fail(E.NIL_DEREFERENCE, "delete of a nil array", span)
        n = self._array_length_of(env, desc, span)
        stored = self.mem.read_word(addr)
        if stored != n:
            self.fail(E.ARRAY_LENGTH_MISMATCH,
                      f"delete names length {n}, array was allocated with "
                      f"{stored}", span)
        if self.mem.read_word(addr + 1) != 1:
            self.fail(E.DANGLING_REFERENCE_ON_DELETE,
                      f"array still has {self.mem.read_word(addr + 1)} "
                      "references", span)
        for i in range(n):
            if self.mem.read_word(addr + 2 + i) != 0:
                self.fail(E.NON_ZERO_CELLS_ON_DELETE,
                          f"cell {i} is not zero-cleared", span)
        self.state.poke(addr, 0)
        self.state.poke(addr + 1, 0)
        try:
            self.mem.free(addr, n + 2)
        except MemoryFault as fault:
            self._wrap_fault(fault, span)
        self.state.poke(slot, 0)

    def _exec_Copy(self, env, stmt, direction):
        if direction == FORWARD:
            self._do_copy(env, stmt, stmt.span)
        else:
            self._do_uncopy(env, stmt, stmt.span)

    def _exec_Uncopy(self, env, stmt, direction):
        if direction == FORWARD:
            self._do_uncopy(env, stmt, stmt.span)
        else:
            self._do_copy(env, stmt, stmt.span)

    def _uninitialized_kind(self, desc):
        return E.UNINITIALIZED_ARRAY if desc.is_array else E.UNINITIALIZED_OBJECT

    def _do_copy(self, env, stmt, span):
        if stmt.desc.is_array:
            self.eval_expr(env, stmt.desc.length)
        src = self.lvalue_addr(env, stmt.source)
        dst = self.lvalue_addr(env, stmt.target)
        value = self.mem.read_word(src)
        if value == 0:
            self.fail(self._uninitialized_kind(stmt.desc),
                      "copy from a nil reference", span)
        if self.mem.read_word(dst) != 0:
            self.fail(E.COPY_TARGET_NOT_NIL, "copy target is not nil", span)
        self.state.poke(dst, value)
        self.state.poke(value + 1, self.mem.read_word(value + 1) + 1)

    def _do_uncopy(self, env, stmt, span):
        if stmt.desc.is_array:
            self.eval_expr(env, stmt.desc.length)
        src = self.lvalue_addr(env, stmt.source)
        dst = self.lvalue_addr(env, stmt.target)
        value = self.mem.read_word(src)
        copy = self.mem.read_word(dst)
        if value == 0:
            self.fail(self._uninitialized_kind(stmt.desc),
                      "uncopy from a nil reference", span)
        if copy != value:
            self.fail(E.UNCOPY_MISMATCH,
                      "uncopy operands reference different values", span)
        rc = self.mem.read_word(value + 1)
        if rc < 2:
            self.fail(E.UNCOPY_MISMATCH,
                      "reference count would drop below one", span)
        self.state.poke(value + 1, rc - 1)
        self.state.poke(dst, 0)

    # ------------------------------------------------------------ calls

    def _exec_LocalCall(self, env, stmt, direction):
        self._invoke(env, env.this_slot, stmt.method, stmt.args, direction,
                     stmt.span)

    def _exec_LocalUncall(self, env, stmt, direction):
        self._invoke(env, env.this_slot, stmt.method, stmt.args,
                     _flip(direction), stmt.span)

    def _exec_ObjectCall(self, env, stmt, direction):
        callee = self.lvalue_addr(env, stmt.callee)
        self._invoke(env, callee, stmt.method, stmt.args, direction, stmt.span)

    def _exec_ObjectUncall(self, env, stmt, direction):
        callee = self.lvalue_addr(env, stmt.callee)
        self._invoke(env, callee, stmt.method, stmt.args, _flip(direction),
                     stmt.span)

    def _invoke(self, env, callee_slot, method_name, args, direction, span):
        if callee_slot is None:
            self.fail(E.UNINITIALIZED_OBJECT, "no current object", span)
        obj = self.mem.read_word(callee_slot)
        if obj == 0:
            self.fail(E.UNINITIALIZED_OBJECT,
                      f"call of {method_name} on a nil reference", span)
        class_id = self.mem.read_word(obj)
        try:
            info = self.class_map.by_id(class_id)
        except KeyError:
            self.fail(E.CORRUPT_FREE,
                      f"word at {obj} is not an object header", span)
        mdecl = info.methods.get(method_name)
        if mdecl is None:
            self.fail(E.UNINITIALIZED_OBJECT,
                      f"class {info.name} has no method {method_name}", span)
        bindings = {}
        for i, (fty, fname) in enumerate(info.fields):
            bindings[fname] = (obj + 2 + i, fty)
        for arg, (pty, pname) in zip(args, mdecl.params):
            bindings[pname] = (env.slot(arg)[0], pty)
        callee_env = Env(bindings, this_slot=callee_slot)
        self.state.push_frame_word(span)
        self.call_spans.append(span)
        try:
            self.exec_stmt(callee_env, mdecl.body, direction)
        finally:
            self.call_spans.pop()
            self.state.pop_frame_word()


def run_program(program: ast.Program, class_map: ClassMap,
                config: MemoryConfig = MemoryConfig(),
                direction: str = FORWARD,
                step_limit: int = 10_000_000,
                tracer=None,
                state: MachineState | None = None) -> RunResult:
    """Instantiate the main object and execute its main method.

    A pre-built `state` (e.g. from a state file) resumes execution over
    existing memory; otherwise a fresh image is initialized and the main
    object is placed in the frame region.
    """
    main_cls = main_class_of(program)
    info = class_map[main_cls]
    size = 2 + len(info.fields)
    fresh = state is None
    if fresh:
        state = MachineState(init_memory(config), step_limit=step_limit)
    state.tracer = tracer
    obj_addr = state.memory.stack_base - size
    this_slot = obj_addr - 1
    if fresh:
        state.frame_top = this_slot
        state.memory.write_word(obj_addr, info.class_id)
        state.memory.write_word(obj_addr + 1, 1)
        state.memory.write_word(this_slot, obj_addr)
    bindings = {fname: (obj_addr + 2 + i, fty)
                for i, (fty, fname) in enumerate(info.fields)}
    env = Env(bindings, this_slot=this_slot)
    root = (this_slot, ast.ClassRef(main_cls))
    if root not in state.live_slots:
        state.live_slots.append(root)
    interp = Interpreter(class_map, state)
    mdecl = info.methods["main"]
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 100_000))
    try:
        interp.exec_stmt(env, mdecl.body, direction)
    except RecursionError:
        raise ExecutionError(E.STACK_OVERFLOW,
                             "call nesting exceeded the host limit",
                             mdecl.span)
    finally:
        sys.setrecursionlimit(old_limit)
    fields = {fname: state.signed(state.memory.read_word(obj_addr + 2 + i))
              for i, (fty, fname) in enumerate(info.fields)}
    return RunResult(fields, state.steps, state, obj_addr, env)


def check_refcounts(state: MachineState, class_map: ClassMap):
    """Debug sweep: reference counts of every object and array reachable
    from the live typed slots must equal the number of slots holding the
    address.  Returns (counts, kinds) keyed by address; raises on
    mismatch."""
    mem = state.memory
    counts: dict[int, int] = {}
    kinds: dict[int, ast.TypeName] = {}
    queue: list[tuple[int, ast.TypeName]] = []

    def visit_slot(addr, ty):
        if isinstance(ty, ast.IntType):
            return
        value = mem.read_word(addr)
        if value == 0:
            return
        counts[value] = counts.get(value, 0) + 1
        if value not in kinds:
            kinds[value] = ty
            queue.append((value, ty))

    for addr, ty in state.live_slots:
        visit_slot(addr, ty)
    while queue:
        addr, ty = queue.pop()
        if isinstance(ty, ast.ClassRef):
            info = class_map.by_id(mem.read_word(addr))
            for i, (fty, _) in enumerate(info.fields):
                visit_slot(addr + 2 + i, fty)
        elif isinstance(ty, ast.ClassArrayType):
            length = mem.read_word(addr)
            for i in range(length):
                visit_slot(addr + 2 + i, ast.ClassRef(ty.name))
    for addr, n in counts.items():
        stored = mem.read_word(addr + 1)
        if stored != n:
            raise AssertionError(
                f"object at {addr} has refcount {stored}, but {n} live "
                "bindings hold it")
    return counts, kinds


def live_heap_words(state: MachineState, class_map: ClassMap) -> int:
    """Total block words of live heap objects reachable from the roots."""
    from .classes import next_pow2
    mem = state.memory
    _, kinds = check_refcounts(state, class_map)
    total = 0
    for addr, ty in kinds.items():
        if not mem.hp <= addr < mem.heap_end:
            continue  # the main object lives in the frame region
        if isinstance(ty, ast.ClassRef):
            total += class_map.by_id(mem.read_word(addr)).alloc_words
        else:
            total += max(2, next_pow2(mem.read_word(addr) + 2))
    return total

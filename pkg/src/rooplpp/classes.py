"""Class analysis: inheritance resolution, subtyping and object layout.

Resolved field order is own fields first, then inherited ones; offsets are
internal, so the order only has to be deterministic.  Class ids are dense
integers in declaration order starting at 1; id 0 would collide with nil.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ClassError
from . import syntax as ast


def next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p <<= 1
    return p


@dataclass(frozen=True)
class ClassInfo:
    name: str
    class_id: int
    parent: str | None
    fields: tuple[tuple[ast.TypeName, str], ...]  # own-then-inherited
    methods: dict[str, ast.MethodDecl]  # overriding drops the base method
    own_methods: tuple[ast.MethodDecl, ...]

    @property
    def payload_words(self) -> int:
        return len(self.fields)

    @property
    def alloc_words(self) -> int:
        # header word + reference count + fields, rounded up to a power of two
        return max(2, next_pow2(self.payload_words + 2))

    def field_offset(self, name: str) -> int:
        for i, (_, fname) in enumerate(self.fields):
            if fname == name:
                return 2 + i
        raise KeyError(name)

    def field_type(self, name: str) -> ast.TypeName:
        for ty, fname in self.fields:
            if fname == name:
                return ty
        raise KeyError(name)


class ClassMap:
    """Finite map class name -> resolved fields/methods, plus subtyping."""

    def __init__(self, entries: dict[str, ClassInfo]):
        self.entries = entries
        self._by_id = {info.class_id: info for info in entries.values()}

    def __contains__(self, name):
        return name in self.entries

    def __getitem__(self, name) -> ClassInfo:
        try:
            return self.entries[name]
        except KeyError:
            raise ClassError("UnknownClass", f"no class named {name!r}") from None

    def by_id(self, class_id: int) -> ClassInfo:
        return self._by_id[class_id]

    def subtype_of(self, c1: str, c2: str) -> bool:
        """True iff c1 reaches c2 by zero or more inherits steps."""
        info = self[c1]
        self[c2]
        cur = info
        while cur is not None:
            if cur.name == c2:
                return True
            cur = self.entries[cur.parent] if cur.parent else None
        return False

    def allocation_words(self, name: str) -> int:
        return self[name].alloc_words


def array_type_of(ty: ast.TypeName) -> ast.TypeName:
    """Element type of an array type."""
    if isinstance(ty, ast.IntArrayType):
        return ast.INT
    if isinstance(ty, ast.ClassArrayType):
        return ast.ClassRef(ty.name)
    raise ClassError("NotAnArray", f"{ty} is not an array type")


def build_class_map(program: ast.Program) -> ClassMap:
    decls: dict[str, ast.ClassDecl] = {}
    order: list[str] = []
    for cls in program.classes:
        if cls.name in decls:
            raise ClassError("DuplicateClass",
                             f"class {cls.name} declared twice", cls.span)
        decls[cls.name] = cls
        order.append(cls.name)

    for cls in program.classes:
        if cls.parent is not None and cls.parent not in decls:
            raise ClassError("UnknownParent",
                             f"class {cls.name} inherits unknown {cls.parent}",
                             cls.span)
        seen = set()
        for m in cls.methods:
            if m.name in seen:
                raise ClassError("DuplicateMethod",
                                 f"method {m.name} declared twice in {cls.name}",
                                 m.span)
            seen.add(m.name)
            pnames = [p for _, p in m.params]
            if len(pnames) != len(set(pnames)):
                raise ClassError("DuplicateMethod",
                                 f"duplicate parameter name in {cls.name}.{m.name}",
                                 m.span)

    # cycle detection over the inherits graph
    for name in order:
        slow = name
        seen = set()
        while decls[slow].parent is not None:
            if slow in seen:
                raise ClassError("CycleError",
                                 f"inheritance cycle through {name}",
                                 decls[name].span)
            seen.add(slow)
            slow = decls[slow].parent

    resolved: dict[str, ClassInfo] = {}

    def resolve(name: str) -> ClassInfo:
        if name in resolved:
            return resolved[name]
        cls = decls[name]
        own_fields = list(cls.fields)
        own_names = set()
        for _, fname in own_fields:
            if fname in own_names:
                raise ClassError("DuplicateField",
                                 f"field {fname} declared twice in {name}",
                                 cls.span)
            own_names.add(fname)
        methods: dict[str, ast.MethodDecl] = {m.name: m for m in cls.methods}
        fields = own_fields
        if cls.parent is not None:
            parent = resolve(cls.parent)
            for ty, fname in parent.fields:
                if fname in own_names:
                    # shadowing an inherited field would make the merged
                    # field set ambiguous; reject outright
                    raise ClassError(
                        "DuplicateField",
                        f"field {fname} in {name} shadows {cls.parent}.{fname}",
                        cls.span)
                fields = fields + [(ty, fname)]
            for mname, mdecl in parent.methods.items():
                if mname not in methods:
                    methods[mname] = mdecl
        info = ClassInfo(name, order.index(name) + 1, cls.parent,
                         tuple(fields), methods, cls.methods)
        resolved[name] = info
        return info

    for name in order:
        resolve(name)

    cmap = ClassMap({name: resolved[name] for name in order})

    # overrides must keep the base signature or dispatch could change arity
    for name in order:
        cls = decls[name]
        if cls.parent is None:
            continue
        parent = cmap[cls.parent]
        for m in cls.methods:
            base = parent.methods.get(m.name)
            if base is not None:
                if tuple(ty for ty, _ in base.params) != tuple(ty for ty, _ in m.params):
                    raise ClassError(
                        "BadOverride",
                        f"{name}.{m.name} overrides {cls.parent}.{m.name} "
                        "with a different signature", m.span)

    # class reference fields/params must resolve
    def check_type(ty, where, span):
        if isinstance(ty, ast.ClassRef) and ty.name not in cmap:
            raise ClassError("UnknownClass",
                             f"{where} has unknown class type {ty.name}", span)
        if isinstance(ty, ast.ClassArrayType) and ty.name not in cmap:
            raise ClassError("UnknownClass",
                             f"{where} has unknown class array type {ty.name}[]",
                             span)

    for cls in program.classes:
        for ty, fname in cls.fields:
            check_type(ty, f"field {cls.name}.{fname}", cls.span)
        for m in cls.methods:
            for ty, pname in m.params:
                check_type(ty, f"parameter {pname} of {cls.name}.{m.name}", m.span)

    return cmap

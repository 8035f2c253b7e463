"""Tokenizer and recursive-descent parser for ROOPL++ source text.

Grammar sketch (statements juxtapose into sequences):

    prog  ::= cl+
    cl    ::= "class" C ("inherits" C)? (t x)* m+
    m     ::= "method" q "(" (t x ("," t x)*)? ")" s
    t     ::= "int" | C | "int[]" | C "[]"
    d     ::= C | C "[" e "]" | "int" "[" e "]"
    y     ::= x | x "[" e "]"

Precedence, loosest first: `||` < `&&` < `|` < `&` <
comparison (`< > <= >= = !=`) < additive (`+ - ^`) < `* / %`.
All operators associate left; parentheses group.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, Span
from . import syntax as ast

KEYWORDS = {
    "class", "inherits", "method", "call", "uncall", "construct", "destruct",
    "new", "delete", "copy", "uncopy", "local", "delocal", "if", "then",
    "else", "fi", "from", "do", "loop", "until", "skip", "int", "nil",
}

_SYMBOLS = [
    "<=>", "::", "+=", "-=", "^=", "&&", "||", "<=", ">=", "!=",
    "(", ")", "[", "]", ",", "+", "-", "^", "*", "/", "%", "&", "|",
    "<", ">", "=",
]

_STMT_FOLLOWERS = {
    "else", "fi", "loop", "until", "delocal", "destruct", "method", "class",
}


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'int', 'kw', 'sym', 'eof'
    text: str
    span: Span


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        start = Span(line, col, line, col)
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            tokens.append(Token("int", text, Span(line, col, line, col + len(text))))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, Span(line, col, line, col + len(text))))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("sym", sym, Span(line, col, line, col + len(sym))))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", start)
    tokens.append(Token("eof", "", Span(line, col, line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ---------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind, text=None):
        return self.cur.kind == kind and (text is None or self.cur.text == text)

    def at_kw(self, *words):
        return self.cur.kind == "kw" and self.cur.text in words

    def accept(self, kind, text=None):
        if self.at(kind, text):
            return self.advance()
        return None

    def expect(self, kind, text=None, what=None):
        tok = self.accept(kind, text)
        if tok is None:
            want = what or text or kind
            got = self.cur.text or "end of input"
            raise ParseError(f"got {got!r}", self.cur.span, expected=(str(want),))
        return tok

    def _span_from(self, start: Span) -> Span:
        prev = self.tokens[max(self.pos - 1, 0)].span
        return Span(start.line, start.col, prev.end_line, prev.end_col)

    # -- programs / classes ------------------------------------------

    def program(self) -> ast.Program:
        start = self.cur.span
        classes = []
        while not self.at("eof"):
            classes.append(self.class_decl())
        if not classes:
            raise ParseError("empty program", start, expected=("class",))
        return ast.Program(tuple(classes), span=self._span_from(start))

    def class_decl(self) -> ast.ClassDecl:
        start = self.expect("kw", "class").span
        name = self.expect("ident", what="class name").text
        parent = None
        if self.accept("kw", "inherits"):
            parent = self.expect("ident", what="parent class name").text
        fields = []
        while self.at_kw("int") or (self.at("ident") and self.peek().kind == "ident") \
                or (self.at("ident") and self.peek().text == "[" and self.peek(2).text == "]"):
            fields.append(self.typed_name("field"))
        methods = []
        while self.at_kw("method"):
            methods.append(self.method_decl())
        if not methods:
            raise ParseError(f"class {name} has no methods", self.cur.span,
                             expected=("method",))
        return ast.ClassDecl(name, parent, tuple(fields), tuple(methods),
                             span=self._span_from(start))

    def typed_name(self, what) -> tuple[ast.TypeName, str]:
        ty = self.type_name()
        name = self.expect("ident", what=f"{what} name").text
        return (ty, name)

    def type_name(self) -> ast.TypeName:
        if self.accept("kw", "int"):
            if self.accept("sym", "["):
                self.expect("sym", "]")
                return ast.INT_ARRAY
            return ast.INT
        name = self.expect("ident", what="type").text
        if self.at("sym", "[") and self.peek().text == "]":
            self.advance()
            self.advance()
            return ast.ClassArrayType(name)
        return ast.ClassRef(name)

    def method_decl(self) -> ast.MethodDecl:
        start = self.expect("kw", "method").span
        name = self.expect("ident", what="method name").text
        self.expect("sym", "(")
        params = []
        if not self.at("sym", ")"):
            params.append(self.typed_name("parameter"))
            while self.accept("sym", ","):
                params.append(self.typed_name("parameter"))
        self.expect("sym", ")")
        body = self.statement_seq()
        return ast.MethodDecl(name, tuple(params), body, span=self._span_from(start))

    # -- statements ----------------------------------------------------

    def statement_seq(self) -> ast.Statement:
        start = self.cur.span
        stmts = [self.statement()]
        while not self.at("eof") and not self.at_kw(*_STMT_FOLLOWERS):
            stmts.append(self.statement())
        return ast.seq(stmts, span=self._span_from(start))

    def statement(self) -> ast.Statement:
        tok = self.cur
        if tok.kind == "kw":
            handler = {
                "skip": self._skip, "if": self._if, "from": self._loop,
                "construct": self._construct, "local": self._local,
                "new": self._new_delete, "delete": self._new_delete,
                "copy": self._copy_uncopy, "uncopy": self._copy_uncopy,
                "call": self._call, "uncall": self._call,
            }.get(tok.text)
            if handler is None:
                raise ParseError(f"got keyword {tok.text!r}", tok.span,
                                 expected=("statement",))
            return handler()
        if tok.kind == "ident":
            return self._assign_or_swap()
        raise ParseError(f"got {tok.text or 'end of input'!r}", tok.span,
                         expected=("statement",))

    def _skip(self):
        tok = self.advance()
        return ast.Skip(span=tok.span)

    def _assign_or_swap(self):
        start = self.cur.span
        target = self.lvalue()
        if self.at("sym", "<=>"):
            self.advance()
            right = self.lvalue()
            return ast.Swap(target, right, span=self._span_from(start))
        for op in ast.MOD_OPS:
            if self.at("sym", op):
                self.advance()
                expr = self.expression()
                return ast.Assign(target, op, expr, span=self._span_from(start))
        raise ParseError(f"got {self.cur.text!r} after lvalue", self.cur.span,
                         expected=("+=", "-=", "^=", "<=>"))

    def lvalue(self) -> ast.LValue:
        tok = self.expect("ident", what="variable")
        if self.accept("sym", "["):
            index = self.expression()
            self.expect("sym", "]")
            return ast.LValue(tok.text, index, span=self._span_from(tok.span))
        return ast.LValue(tok.text, span=tok.span)

    def _if(self):
        start = self.expect("kw", "if").span
        cond = self.expression()
        self.expect("kw", "then")
        then_body = self.statement_seq()
        self.expect("kw", "else")
        else_body = self.statement_seq()
        self.expect("kw", "fi")
        assertion = self.expression()
        return ast.If(cond, then_body, else_body, assertion,
                      span=self._span_from(start))

    def _loop(self):
        start = self.expect("kw", "from").span
        assertion = self.expression()
        self.expect("kw", "do")
        do_body = self.statement_seq()
        self.expect("kw", "loop")
        loop_body = self.statement_seq()
        self.expect("kw", "until")
        cond = self.expression()
        return ast.Loop(assertion, do_body, loop_body, cond,
                        span=self._span_from(start))

    def _construct(self):
        start = self.expect("kw", "construct").span
        cname = self.expect("ident", what="class name").text
        var = self.expect("ident", what="variable").text
        body = self.statement_seq()
        self.expect("kw", "destruct")
        endvar = self.expect("ident", what="variable").text
        if endvar != var:
            raise ParseError(
                f"destruct names {endvar!r}, construct introduced {var!r}",
                self.tokens[self.pos - 1].span)
        return ast.ObjectBlock(cname, var, body, span=self._span_from(start))

    def _local(self):
        start = self.expect("kw", "local").span
        ty = self.type_name()
        var = self.expect("ident", what="variable").text
        self.expect("sym", "=")
        entry = self.expression()
        body = self.statement_seq()
        self.expect("kw", "delocal")
        ty2 = self.type_name()
        var2 = self.expect("ident", what="variable").text
        if var2 != var or ty2 != ty:
            raise ParseError(
                f"delocal {ty2} {var2!r} does not match local {ty} {var!r}",
                self.tokens[self.pos - 1].span)
        self.expect("sym", "=")
        exit_ = self.expression()
        return ast.LocalBlock(ty, var, entry, body, exit_,
                              span=self._span_from(start))

    def alloc_desc(self) -> ast.AllocDesc:
        start = self.cur.span
        if self.accept("kw", "int"):
            self.expect("sym", "[")
            length = self.expression()
            self.expect("sym", "]")
            return ast.AllocDesc(None, length, span=self._span_from(start))
        name = self.expect("ident", what="class name").text
        if self.accept("sym", "["):
            length = self.expression()
            self.expect("sym", "]")
            return ast.AllocDesc(name, length, span=self._span_from(start))
        return ast.AllocDesc(name, span=self._span_from(start))

    def _new_delete(self):
        tok = self.advance()
        desc = self.alloc_desc()
        target = self.lvalue()
        span = self._span_from(tok.span)
        cls = ast.New if tok.text == "new" else ast.Delete
        return cls(desc, target, span=span)

    def _copy_uncopy(self):
        tok = self.advance()
        desc = self.alloc_desc()
        source = self.lvalue()
        target = self.lvalue()
        span = self._span_from(tok.span)
        cls = ast.Copy if tok.text == "copy" else ast.Uncopy
        return cls(desc, source, target, span=span)

    def _call(self):
        tok = self.advance()
        uncall = tok.text == "uncall"
        first = self.lvalue()
        if self.accept("sym", "::"):
            method = self.expect("ident", what="method name").text
            args = self._arg_list()
            cls = ast.ObjectUncall if uncall else ast.ObjectCall
            return cls(first, method, args, span=self._span_from(tok.span))
        if first.is_cell:
            raise ParseError("array cell cannot name a local method",
                             first.span, expected=("::",))
        args = self._arg_list()
        cls = ast.LocalUncall if uncall else ast.LocalCall
        return cls(first.name, args, span=self._span_from(tok.span))

    def _arg_list(self) -> tuple[str, ...]:
        self.expect("sym", "(")
        args = []
        if not self.at("sym", ")"):
            args.append(self.expect("ident", what="argument").text)
            while self.accept("sym", ","):
                args.append(self.expect("ident", what="argument").text)
        self.expect("sym", ")")
        return tuple(args)

    # -- expressions ----------------------------------------------------

    _LEVELS = [
        ("||",),
        ("&&",),
        ("|",),
        ("&",),
        ("<", ">", "<=", ">=", "=", "!="),
        ("+", "-", "^"),
        ("*", "/", "%"),
    ]

    def expression(self) -> ast.Expression:
        return self._binary(0)

    def _binary(self, level) -> ast.Expression:
        if level == len(self._LEVELS):
            return self._atom()
        ops = self._LEVELS[level]
        start = self.cur.span
        expr = self._binary(level + 1)
        while self.cur.kind == "sym" and self.cur.text in ops:
            op = self.advance().text
            right = self._binary(level + 1)
            expr = ast.BinOp(op, expr, right, span=self._span_from(start))
        return expr

    def _atom(self) -> ast.Expression:
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return ast.Constant(int(tok.text), span=tok.span)
        if tok.kind == "kw" and tok.text == "nil":
            self.advance()
            return ast.Nil(span=tok.span)
        if tok.kind == "ident":
            self.advance()
            if self.accept("sym", "["):
                index = self.expression()
                self.expect("sym", "]")
                return ast.ArrayElement(tok.text, index,
                                        span=self._span_from(tok.span))
            return ast.Variable(tok.text, span=tok.span)
        if tok.kind == "sym" and tok.text == "(":
            self.advance()
            expr = self.expression()
            self.expect("sym", ")")
            return expr
        raise ParseError(f"got {tok.text or 'end of input'!r}", tok.span,
                         expected=("expression",))


def parse(source: str) -> ast.Program:
    """Parse ROOPL++ source text into a Program AST."""
    return _Parser(tokenize(source)).program()


def parse_statement(source: str) -> ast.Statement:
    """Parse a bare statement sequence (test helper)."""
    p = _Parser(tokenize(source))
    stmt = p.statement_seq()
    p.expect("eof")
    return stmt


def parse_expression(source: str) -> ast.Expression:
    """Parse a bare expression (test helper)."""
    p = _Parser(tokenize(source))
    expr = p.expression()
    p.expect("eof")
    return expr

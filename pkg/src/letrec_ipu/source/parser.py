"""Reader and printer for ``.rec`` files.

Grammar (lowest precedence first)::

    expr    ::= 'rec' def (',' def)* 'in' expr | '\\' x '.' expr
              | 'if' expr 'then' expr 'else' expr | or
    def     ::= x '=?' expr | x '=[' n ']' expr
    or      ::= and ('or' and)*          and ::= cmp ('and' cmp)*
    cmp     ::= add (('=' | '>') add)?   add ::= app (('+' | '-') app)*
    app     ::= postfix postfix*         postfix ::= atom ('.' X)*
    atom    ::= x | n | 'true' | 'false' | '{' (X '=' field),* '}' | '(' expr ')'
"""
from __future__ import annotations

from ..lexer import SyntaxErrorAt, TokenStream
from .syntax import (
    App, BoolLit, Def, Diagnostic, Expr, If, Lam, Letrec, NatLit, Prim, Record, Select,
    SourceError, Var, check_wellformed,
)


def parse_source(text: str, prims: bool = False, check: bool = True) -> Expr:
    """Parse and check a source program; raises :class:`SourceError`.

    ``check=False`` skips the well-formedness conditions (used before size
    inference, which may be what makes a program well-formed)."""
    try:
        p = _Parser(text, prims)
        e = p.expr()
        if not p.ts.at("eof"):
            raise p.ts.error(f"unexpected {p.ts.peek.text!r}")
    except SyntaxErrorAt as exc:
        raise SourceError([Diagnostic("SYNTAX", str(exc), (exc.line, exc.col))]) from None
    diags = check_wellformed(e, prims=None if prims else False) if check else []
    if diags:
        raise SourceError(diags)
    return e


class _Parser:
    def __init__(self, text: str, prims: bool):
        self.ts = TokenStream(text)
        self.prims = prims

    def _need_prims(self, what: str):
        if not self.prims:
            raise self.ts.error(f"{what} requires the prims extension (--prims)")

    def ident(self) -> str:
        t = self.ts.expect("ident")
        if t.text == "_":
            raise SyntaxErrorAt("'_' is not a source variable", t.line, t.col)
        return t.text

    def expr(self) -> Expr:
        ts = self.ts
        if ts.accept("keyword", "rec"):
            defs = [self.definition()]
            while ts.accept("punct", ","):
                defs.append(self.definition())
            ts.expect("keyword", "in")
            return Letrec(tuple(defs), self.expr())
        if ts.accept("lambda"):
            x = self.ident()
            ts.expect("punct", ".")
            return Lam(x, self.expr())
        if ts.at("keyword", "if"):
            self._need_prims("if")
            ts.next()
            c = self.expr()
            ts.expect("keyword", "then")
            t = self.expr()
            ts.expect("keyword", "else")
            return If(c, t, self.expr())
        return self.disj()

    def definition(self) -> Def:
        x = self.ident()
        t = self.ts.next()
        if t.kind == "unknown":
            size = None
        elif t.kind == "size":
            size = t.value
        else:
            raise SyntaxErrorAt("expected '=?' or '=[n]'", t.line, t.col)
        return Def(x, size, self.expr())

    def _binary(self, ops, sub, assoc=True):
        left = sub()
        while self.ts.peek.text in ops and self.ts.peek.kind in ("punct", "keyword"):
            self._need_prims(f"operator {self.ts.peek.text!r}")
            op = self.ts.next().text
            left = Prim(op, (left, sub()))
            if not assoc:
                break
        return left

    def disj(self):
        return self._binary({"or"}, self.conj)

    def conj(self):
        return self._binary({"and"}, self.cmp)

    def cmp(self):
        return self._binary({"=", ">"}, self.add, assoc=False)

    def add(self):
        return self._binary({"+", "-"}, self.app)

    def _starts_atom(self) -> bool:
        t = self.ts.peek
        return t.kind in ("ident", "num") or (t.kind == "punct" and t.text in "({") or (
            t.kind == "keyword" and t.text in ("true", "false")
        )

    def app(self):
        e = self.postfix()
        while self._starts_atom():
            e = App(e, self.postfix())
        return e

    def postfix(self):
        e = self.atom()
        while self.ts.accept("punct", "."):
            e = Select(e, self.ts.expect("ident").text)
        return e

    def atom(self):
        ts = self.ts
        t = ts.peek
        if t.kind == "ident":
            return Var(self.ident())
        if t.kind == "num":
            self._need_prims("numeric literal")
            return NatLit(ts.next().value)
        if t.kind == "keyword" and t.text in ("true", "false"):
            self._need_prims("boolean literal")
            return BoolLit(ts.next().text == "true")
        if ts.accept("punct", "("):
            e = self.expr()
            ts.expect("punct", ")")
            return e
        if ts.accept("punct", "{"):
            fields = []
            if not ts.at("punct", "}"):
                while True:
                    fields.append(self.field())
                    if not ts.accept("punct", ","):
                        break
            ts.expect("punct", "}")
            return Record(tuple(fields))
        raise ts.error(f"unexpected {t.text or t.kind!r}")

    def field(self):
        ts = self.ts
        name = ts.expect("ident").text
        ts.expect("punct", "=")
        t = ts.peek
        if t.kind == "ident":
            return name, Var(self.ident())
        if self.prims and t.kind == "num":
            return name, NatLit(ts.next().value)
        if self.prims and t.kind == "keyword" and t.text in ("true", "false"):
            return name, BoolLit(ts.next().text == "true")
        raise SyntaxErrorAt(f"record field {name} must be a variable", t.line, t.col)


# ---------------------------------------------------------------- printing

_PREC = {"or": 1, "and": 2, "=": 3, ">": 3, "+": 4, "-": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, (Letrec, Lam, If)):
        return 0
    if isinstance(e, Prim):
        return _PREC[e.op]
    if isinstance(e, App):
        return 5
    return 6


def show_size(size) -> str:
    return "=?" if size is None else f"=[{size}]"


def print_source(e: Expr, level: int = 0) -> str:
    s = _show(e)
    return f"({s})" if _prec(e) < level else s


def _show(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, NatLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Lam):
        return f"\\{e.param}. {print_source(e.body)}"
    if isinstance(e, App):
        return f"{print_source(e.fn, 5)} {print_source(e.arg, 6)}"
    if isinstance(e, Record):
        return "{" + ", ".join(f"{f} = {print_source(v)}" for f, v in e.fields) + "}"
    if isinstance(e, Select):
        return f"{print_source(e.subject, 6)}.{e.field}"
    if isinstance(e, Letrec):
        return f"rec {print_binding(e.defs)} in {print_source(e.body)}"
    if isinstance(e, Prim):
        p = _PREC[e.op]
        left, right = e.args
        lp = p if e.op not in ("=", ">") else p + 1
        return f"{print_source(left, lp)} {e.op} {print_source(right, p + 1)}"
    if isinstance(e, If):
        return f"if {print_source(e.cond)} then {print_source(e.then)} else {print_source(e.orelse)}"
    raise TypeError(f"not a source term: {e!r}")


def print_binding(defs) -> str:
    return ", ".join(f"{d.var} {show_size(d.size)} {print_source(d.rhs)}" for d in defs)

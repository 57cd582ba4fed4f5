"""In-place-update translation from the source calculus to the target calculus.

Each ``rec b in e`` becomes ``let Dum(b), Up(b) in [e]``: known-size
definitions get a dummy block up front and are overwritten by ``update``
as soon as their value exists; unknown-size definitions are plain lets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .source import syntax as s
from .source.syntax import SourceError, check_wellformed
from .target import syntax as t


def transl(e: s.Expr) -> t.Expr:
    if isinstance(e, s.Var):
        return t.Var(e.name)
    if isinstance(e, s.Lam):
        return t.Lam(e.param, transl(e.body))
    if isinstance(e, s.App):
        return t.App(transl(e.fn), transl(e.arg))
    if isinstance(e, s.Record):
        return t.Record(tuple((f, transl(v)) for f, v in e.fields))
    if isinstance(e, s.Select):
        return t.Select(transl(e.subject), e.field)
    if isinstance(e, s.Letrec):
        return t.Let(dum(e.defs) + up(e.defs), transl(e.body))
    if isinstance(e, s.NatLit):
        return t.Nat(e.value)
    if isinstance(e, s.BoolLit):
        return t.Bool(e.value)
    if isinstance(e, s.Prim):
        return t.Prim(e.op, tuple(transl(a) for a in e.args))
    if isinstance(e, s.If):
        return t.If(transl(e.cond), transl(e.then), transl(e.orelse))
    raise TypeError(f"not a source term: {e!r}")


def dum(defs: s.Binding) -> tuple:
    return tuple((d.var, t.alloc_block(d.size)) for d in defs if d.size is not None)


def up(defs: s.Binding) -> tuple:
    out = []
    for d in defs:
        if d.size is None:
            out.append((d.var, transl(d.rhs)))
        else:
            out.append((t.WILDCARD, t.App(t.App(t.UPDATE, t.Var(d.var)), transl(d.rhs))))
    return tuple(out)


@dataclass
class TranslationOutput:
    expr: t.Expr
    notes: list = field(default_factory=list)


def translate_checked(e: s.Expr) -> TranslationOutput:
    """Translate after checking well-formedness; notes record each pre-allocation."""
    diags = check_wellformed(e)
    if diags:
        raise SourceError(diags)
    notes = []
    for node in s.subterms(e):
        if isinstance(node, s.Letrec):
            for d in node.defs:
                how = f"alloc {d.size} then update" if d.size is not None else "plain let"
                notes.append((d.var, how))
    return TranslationOutput(transl(e), notes)


def translate_program(e: s.Expr) -> t.Config:
    """``<empty heap | [e]>`` for a closed well-formed program."""
    fv = s.free_vars(e)
    if fv:
        raise ValueError(f"program is open: free variables {sorted(fv)}")
    return t.Config({}, translate_checked(e).expr)

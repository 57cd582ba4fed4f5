"""Abstract syntax of the source calculus (call-by-value letrec with size indications).

Terms are immutable dataclasses.  A size indication is ``None`` for the
unknown size ``=?`` and a positive ``int`` for a known size ``=[n]``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field as _field
from typing import Iterable, Iterator, Mapping, Optional, Union



def _cache():
    # memoized free variables; invisible to equality, hashing and printing
    return _field(default=None, init=False, compare=False, hash=False, repr=False)


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Lam:
    param: str
    body: "Expr"
    _fv: Optional[frozenset] = _cache()


@dataclass(frozen=True, slots=True)
class App:
    fn: "Expr"
    arg: "Expr"
    _fv: Optional[frozenset] = _cache()


@dataclass(frozen=True, slots=True)
class Record:
    # (field, Var) pairs; literals are also allowed when prims are enabled
    fields: tuple[tuple[str, "Expr"], ...]
    _fv: Optional[frozenset] = _cache()

    def get(self, field: str) -> Optional["Expr"]:
        for f, v in self.fields:
            if f == field:
                return v
        return None


@dataclass(frozen=True, slots=True)
class Select:
    subject: "Expr"
    field: str
    _fv: Optional[frozenset] = _cache()


@dataclass(frozen=True, slots=True)
class Def:
    var: str
    size: Optional[int]
    rhs: "Expr"
    _respects: Optional[tuple] = _cache()  # (size model, verdict) memo for the evaluator


@dataclass(frozen=True, slots=True)
class Letrec:
    defs: tuple[Def, ...]
    body: "Expr"
    _fv: Optional[frozenset] = _cache()


# prims extension

@dataclass(frozen=True, slots=True)
class NatLit:
    value: int


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class Prim:
    op: str
    args: tuple["Expr", ...]
    _fv: Optional[frozenset] = _cache()


@dataclass(frozen=True, slots=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    _fv: Optional[frozenset] = _cache()


Expr = Union[Var, Lam, App, Record, Select, Letrec, NatLit, BoolLit, Prim, If]
Binding = tuple[Def, ...]

PRIM_OPS = {"+": 2, "-": 2, "=": 2, ">": 2, "and": 2, "or": 2}
SHORT_CIRCUIT = {"and", "or"}
LITERALS = (NatLit, BoolLit)


def is_value(e: Expr) -> bool:
    return isinstance(e, (Var, Lam, Record, NatLit, BoolLit))


def is_answer(e: Expr, size_ok) -> bool:
    """``v`` or ``rec bv in v``; ``size_ok(defn)`` decides size-respect."""
    if isinstance(e, Letrec):
        return all(is_value(d.rhs) and size_ok(d) for d in e.defs) and is_value(e.body)
    return is_value(e)


def uses_prims(e: Expr) -> bool:
    return any(isinstance(n, (NatLit, BoolLit, Prim, If)) for n in subterms(e))


def subterms(e: Expr) -> Iterator[Expr]:
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(children(n))


def children(e: Expr) -> list[Expr]:
    if isinstance(e, Lam):
        return [e.body]
    if isinstance(e, App):
        return [e.fn, e.arg]
    if isinstance(e, Record):
        return [v for _, v in e.fields]
    if isinstance(e, Select):
        return [e.subject]
    if isinstance(e, Letrec):
        return [d.rhs for d in e.defs] + [e.body]
    if isinstance(e, Prim):
        return list(e.args)
    if isinstance(e, If):
        return [e.cond, e.then, e.orelse]
    return []


def size_of_term(e: Expr) -> int:
    return sum(1 for _ in subterms(e))


# ---------------------------------------------------------------- free variables

_NO_FV: frozenset = frozenset()


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    cached = getattr(e, "_fv", _NO_FV)
    if cached is not None:
        return cached
    if isinstance(e, Lam):
        out = free_vars(e.body) - {e.param}
    elif isinstance(e, Letrec):
        out = (binding_free_vars(e.defs) | free_vars(e.body)) - binding_dom(e.defs)
    else:
        out = _NO_FV
        for c in children(e):
            out |= free_vars(c)
    object.__setattr__(e, "_fv", out)
    return out


def binding_dom(defs: Iterable[Def]) -> frozenset[str]:
    return frozenset(d.var for d in defs)


def binding_free_vars(defs: Iterable[Def]) -> frozenset[str]:
    # FV(b) includes the defined variables themselves
    out: set[str] = set()
    for d in defs:
        out.add(d.var)
        out |= free_vars(d.rhs)
    return frozenset(out)


def all_names(e: Expr) -> set[str]:
    out: set[str] = set()
    for n in subterms(e):
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Lam):
            out.add(n.param)
        elif isinstance(n, Letrec):
            out.update(d.var for d in n.defs)
    return out


# ---------------------------------------------------------------- fresh names

_SUFFIX = re.compile(r"'\d+$")


class FreshNames:
    """Per-run supply of names ``x'N``."""

    def __init__(self) -> None:
        self.counter = 0
        # names of the term a run started from; once set, every name in any
        # later term is either reserved or came from this supply
        self.reserved: Optional[set[str]] = None

    def reserve(self, e: "Expr") -> None:
        self.reserved = (self.reserved or set()) | all_names(e)

    def __call__(self, base: str, avoid) -> str:
        stem = _SUFFIX.sub("", base)
        while True:
            self.counter += 1
            name = f"{stem}'{self.counter}"
            if name not in avoid:
                return name


# ---------------------------------------------------------------- substitution

def substitute(sub: Mapping[str, Expr], e: Expr, fresh: Optional[FreshNames] = None) -> Expr:
    """Capture-avoiding simultaneous substitution."""
    sub = {k: v for k, v in sub.items() if not (isinstance(v, Var) and v.name == k)}
    if not sub:
        return e
    fresh = fresh or FreshNames()
    range_fv: set[str] = set()
    for v in sub.values():
        range_fv |= free_vars(v)
    avoid = LazyNames(lambda: all_names(e) | range_fv | set(sub))
    return _subst(sub, e, range_fv, avoid, fresh)


class LazyNames:
    """Name set computed only when a binder actually has to be renamed."""

    def __init__(self, make):
        self._make, self._names = make, None

    def _get(self) -> set:
        if self._names is None:
            self._names = self._make()
        return self._names

    def __contains__(self, x) -> bool:
        return x in self._get()

    def add(self, x) -> None:
        self._get().add(x)

    def update(self, xs) -> None:
        self._get().update(xs)


def _subst(sub, e, range_fv, avoid, fresh):
    if not sub or sub.keys().isdisjoint(free_vars(e)):
        return e
    if isinstance(e, Var):
        return sub.get(e.name, e)
    if isinstance(e, Lam):
        inner = {k: v for k, v in sub.items() if k != e.param}
        if not inner:
            return e
        param, body = e.param, e.body
        if param in range_fv:
            new = fresh(param, avoid)
            avoid.add(new)
            inner[param] = Var(new)
            param = new
        return Lam(param, _subst(inner, body, range_fv, avoid, fresh))
    if isinstance(e, Letrec):
        dom = binding_dom(e.defs)
        inner = {k: v for k, v in sub.items() if k not in dom}
        if not inner:
            return e
        renames = {}
        for x in dom:
            if x in range_fv:
                new = fresh(x, avoid)
                avoid.add(new)
                renames[x] = new
        inner.update({x: Var(n) for x, n in renames.items()})
        defs = tuple(
            Def(renames.get(d.var, d.var), d.size, _subst(inner, d.rhs, range_fv, avoid, fresh))
            for d in e.defs
        )
        return Letrec(defs, _subst(inner, e.body, range_fv, avoid, fresh))
    return map_children(e, lambda c: _subst(sub, c, range_fv, avoid, fresh))


def map_children(e: Expr, f) -> Expr:
    if isinstance(e, App):
        return App(f(e.fn), f(e.arg))
    if isinstance(e, Record):
        return Record(tuple((k, f(v)) for k, v in e.fields))
    if isinstance(e, Select):
        return Select(f(e.subject), e.field)
    if isinstance(e, Prim):
        return Prim(e.op, tuple(f(a) for a in e.args))
    if isinstance(e, If):
        return If(f(e.cond), f(e.then), f(e.orelse))
    if isinstance(e, Lam):
        return Lam(e.param, f(e.body))
    if isinstance(e, Letrec):
        return Letrec(tuple(Def(d.var, d.size, f(d.rhs)) for d in e.defs), f(e.body))
    return e


def rename_binding(defs: Binding, body: Optional[Expr], clash, fresh: FreshNames, avoid: set[str]):
    """Rename the variables of ``dom(defs)`` that belong to ``clash``.

    New names avoid ``avoid`` (which is extended with them).  Returns the
    renamed binding and body.
    """
    targets = [d.var for d in defs if d.var in clash]
    if not targets:
        return defs, body
    mapping = {}
    for x in targets:
        new = fresh(x, avoid)
        avoid.add(new)
        mapping[x] = Var(new)
    new_defs = tuple(
        Def(mapping[d.var].name if d.var in mapping else d.var, d.size, substitute(mapping, d.rhs, fresh))
        for d in defs
    )
    new_body = substitute(mapping, body, fresh) if body is not None else None
    return new_defs, new_body


# ---------------------------------------------------------------- alpha-equivalence

def alpha_equal(e1: Expr, e2: Expr) -> bool:
    return _aeq(e1, e2, {}, {}, 0)


def _aeq(a, b, env1, env2, depth) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        i, j = env1.get(a.name), env2.get(b.name)
        if i is None and j is None:
            return a.name == b.name
        return i == j
    if isinstance(a, Lam):
        return _aeq(a.body, b.body, {**env1, a.param: depth}, {**env2, b.param: depth}, depth + 1)
    if isinstance(a, App):
        return _aeq(a.fn, b.fn, env1, env2, depth) and _aeq(a.arg, b.arg, env1, env2, depth)
    if isinstance(a, Record):
        if [f for f, _ in a.fields] != [f for f, _ in b.fields]:
            return False
        return all(_aeq(x, y, env1, env2, depth) for (_, x), (_, y) in zip(a.fields, b.fields))
    if isinstance(a, Select):
        return a.field == b.field and _aeq(a.subject, b.subject, env1, env2, depth)
    if isinstance(a, Letrec):
        if len(a.defs) != len(b.defs):
            return False
        if any(d1.size != d2.size for d1, d2 in zip(a.defs, b.defs)):
            return False
        n1, n2 = dict(env1), dict(env2)
        for k, (d1, d2) in enumerate(zip(a.defs, b.defs)):
            n1[d1.var] = depth + k
            n2[d2.var] = depth + k
        depth += len(a.defs)
        return all(_aeq(d1.rhs, d2.rhs, n1, n2, depth) for d1, d2 in zip(a.defs, b.defs)) and _aeq(
            a.body, b.body, n1, n2, depth
        )
    if isinstance(a, (NatLit, BoolLit)):
        return a.value == b.value
    if isinstance(a, Prim):
        return a.op == b.op and len(a.args) == len(b.args) and all(
            _aeq(x, y, env1, env2, depth) for x, y in zip(a.args, b.args)
        )
    if isinstance(a, If):
        return all(_aeq(x, y, env1, env2, depth) for x, y in zip(children(a), children(b)))
    raise TypeError(f"not a source term: {a!r}")


# ---------------------------------------------------------------- well-formedness

@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    path: tuple = ()

    def __str__(self) -> str:
        where = "/".join(str(p) for p in self.path) or "<root>"
        return f"[{self.code}] {self.message} at {where}"


class SourceError(Exception):
    """Raised by the parser; carries the list of diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


def forward_references(defs: Binding) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` with ``i <= j`` and ``x_j`` free in the i-th right-hand side."""
    index = {d.var: j for j, d in enumerate(defs)}
    out = []
    for i, d in enumerate(defs):
        for x in free_vars(d.rhs):
            j = index.get(x)
            if j is not None and i <= j:
                out.append((i, j))
    return sorted(set(out))


def check_wellformed(e: Expr, prims: Optional[bool] = None) -> list[Diagnostic]:
    """Conditions 1 (fields), 2 (binders), 3 (forward references to unknown sizes).

    With ``prims=False`` any prims node is also reported; ``None`` accepts both.
    """
    out: list[Diagnostic] = []
    _check(e, (), prims, out)
    return out


def _check(e, path, prims, out):
    if isinstance(e, Record):
        seen = set()
        for f, v in e.fields:
            if f in seen:
                out.append(Diagnostic("C1", f"record row defines field {f} twice", path))
            seen.add(f)
            if not isinstance(v, Var) and not (prims is not False and isinstance(v, LITERALS)):
                out.append(Diagnostic("FIELD", f"record field {f} is not a variable", path))
    if isinstance(e, Letrec):
        seen = set()
        for d in e.defs:
            if d.var in seen:
                out.append(Diagnostic("C2", f"binding defines {d.var} twice", path))
            seen.add(d.var)
            if d.size is not None and d.size < 1:
                out.append(Diagnostic("SIZE", f"size indication of {d.var} must be positive", path))
        for i, j in forward_references(e.defs):
            if e.defs[j].size is None:
                out.append(
                    Diagnostic(
                        "C3",
                        f"forward reference from {e.defs[i].var} to {e.defs[j].var} of unknown size",
                        path + (f"def[{i}]",),
                    )
                )
        for i, d in enumerate(e.defs):
            _check(d.rhs, path + (f"def[{i}]",), prims, out)
        _check(e.body, path + ("body",), prims, out)
        return
    if prims is False and isinstance(e, (NatLit, BoolLit, Prim, If)):
        out.append(Diagnostic("PRIMS", "prims node present with the extension disabled", path))
    if isinstance(e, Prim) and (e.op not in PRIM_OPS or len(e.args) != PRIM_OPS[e.op]):
        out.append(Diagnostic("PRIMS", f"bad primitive {e.op}/{len(e.args)}", path))
    if isinstance(e, NatLit) and e.value < 0:
        out.append(Diagnostic("PRIMS", "negative literal", path))
    labels = {
        Lam: ("body",),
        App: ("fn", "arg"),
        Select: ("subject",),
        If: ("cond", "then", "else"),
    }
    if isinstance(e, Record):
        return
    if isinstance(e, Prim):
        for i, a in enumerate(e.args):
            _check(a, path + (f"arg[{i}]",), prims, out)
        return
    for label, c in zip(labels.get(type(e), ()), children(e)):
        _check(c, path + (label,), prims, out)

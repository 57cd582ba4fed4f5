"""Independent reference implementations used as test oracles.

Nothing here calls the evaluators under test.  The source oracle enumerates
*every* decomposition of a term into an evaluation context and a focus,
tries every rule at every one of them, and returns all results; the
implementation picks one decomposition directly.  The fault oracles test
each case of the stuck-term characterizations separately, again over all
decompositions.

Only the syntax modules (node classes, ``alpha_equal``) are shared.
"""
from __future__ import annotations

import itertools

from letrec_ipu.source import syntax as s
from letrec_ipu.target import syntax as t

FUNCTION_SIZE, RECORD_HEADER = 2, 1

# ---------------------------------------------------------------- source helpers


def o_is_value(e) -> bool:
    return isinstance(e, (s.Var, s.Lam, s.Record, s.NatLit, s.BoolLit))


def o_size(v):
    if isinstance(v, s.Lam):
        return FUNCTION_SIZE
    if isinstance(v, s.Record):
        return RECORD_HEADER + len(v.fields)
    return None


def o_respects(d: s.Def) -> bool:
    if not o_is_value(d.rhs):
        return False
    if d.size is None:
        return True
    return not isinstance(d.rhs, s.Var) and o_size(d.rhs) == d.size


_fresh = itertools.count()


def fresh_name() -> str:
    return f"ω{next(_fresh)}"


def rename(e, m: dict):
    """Rename free variables by ``m``; targets are assumed globally fresh."""
    if not m:
        return e
    if isinstance(e, s.Var):
        return s.Var(m.get(e.name, e.name))
    if isinstance(e, s.Lam):
        inner = {k: v for k, v in m.items() if k != e.param}
        return s.Lam(e.param, rename(e.body, inner))
    if isinstance(e, s.Letrec):
        dom = {d.var for d in e.defs}
        inner = {k: v for k, v in m.items() if k not in dom}
        return s.Letrec(tuple(s.Def(d.var, d.size, rename(d.rhs, inner)) for d in e.defs), rename(e.body, inner))
    if isinstance(e, s.App):
        return s.App(rename(e.fn, m), rename(e.arg, m))
    if isinstance(e, s.Record):
        return s.Record(tuple((f, rename(v, m)) for f, v in e.fields))
    if isinstance(e, s.Select):
        return s.Select(rename(e.subject, m), e.field)
    if isinstance(e, s.Prim):
        return s.Prim(e.op, tuple(rename(a, m) for a in e.args))
    if isinstance(e, s.If):
        return s.If(rename(e.cond, m), rename(e.then, m), rename(e.orelse, m))
    return e


def freshen_binding(defs, body):
    m = {d.var: fresh_name() for d in defs}
    return tuple(s.Def(m[d.var], d.size, rename(d.rhs, m)) for d in defs), rename(body, m)


# ---------------------------------------------------------------- source contexts
# frames are tuples, outermost first:
#   ("arg", fn)            fn []
#   ("fn", arg)            [] arg        (arg a value)
#   ("sel", X)             [].X
#   ("prim", op, args, i)  argument i of a primitive
#   ("if", then, else)     if [] then .. else ..


def _prim_positions(op, args):
    if op in s.SHORT_CIRCUIT:
        return [0]
    return [i for i in range(len(args)) if all(o_is_value(a) for a in args[i + 1:])]


def f_decomps(e):
    """All (frames, focus) with ``e = F[focus]``."""
    yield (), e
    if isinstance(e, s.App):
        for fr, f in f_decomps(e.arg):
            yield (("arg", e.fn),) + fr, f
        if o_is_value(e.arg):
            for fr, f in f_decomps(e.fn):
                yield (("fn", e.arg),) + fr, f
    elif isinstance(e, s.Select):
        for fr, f in f_decomps(e.subject):
            yield (("sel", e.field),) + fr, f
    elif isinstance(e, s.Prim):
        for i in _prim_positions(e.op, e.args):
            for fr, f in f_decomps(e.args[i]):
                yield (("prim", e.op, e.args, i),) + fr, f
    elif isinstance(e, s.If):
        for fr, f in f_decomps(e.cond):
            yield (("if", e.then, e.orelse),) + fr, f


def plug_frames(frames, e):
    for fr in reversed(frames):
        if fr[0] == "arg":
            e = s.App(fr[1], e)
        elif fr[0] == "fn":
            e = s.App(e, fr[1])
        elif fr[0] == "sel":
            e = s.Select(e, fr[1])
        elif fr[0] == "prim":
            args = list(fr[2])
            args[fr[3]] = e
            e = s.Prim(fr[1], tuple(args))
        else:
            e = s.If(e, fr[1], fr[2])
    return e


def source_decomps(e):
    """All (top, frames, focus) with ``e = E[focus]``.

    ``top`` is ``("none",)``, ``("under", bv)`` or
    ``("in", bv, x, size, rest, body)``.
    """
    if not isinstance(e, s.Letrec):
        for fr, f in f_decomps(e):
            yield ("none",), fr, f
        return
    defs = e.defs
    for i, d in enumerate(defs):
        for fr, f in f_decomps(d.rhs):
            yield ("in", defs[:i], d.var, d.size, defs[i + 1:], e.body), fr, f
        if not o_respects(d):
            return
    for fr, f in f_decomps(e.body):
        yield ("under", defs), fr, f


def plug_top(top, e):
    if top[0] == "none":
        return e
    if top[0] == "under":
        return s.Letrec(top[1], e)
    _, bv, x, size, rest, body = top
    return s.Letrec(bv + (s.Def(x, size, e),) + rest, body)


def is_deref_position(top, frames) -> bool:
    if not frames:
        return top[0] == "in" and top[3] is not None
    fr = frames[-1]
    if fr[0] in ("fn", "sel", "if"):
        return True
    if fr[0] == "prim":
        op, args, i = fr[1], fr[2], fr[3]
        if op in s.SHORT_CIRCUIT:
            return True
        return all(o_is_value(a) for a in args) and not any(isinstance(a, s.Var) for a in args[i + 1:])
    return False


def o_delta(e):
    if isinstance(e, s.If):
        c = e.cond
        return (e.then if c.value else e.orelse) if isinstance(c, s.BoolLit) else None
    op, a = e.op, e.args
    if op in s.SHORT_CIRCUIT:
        if not isinstance(a[0], s.BoolLit):
            return None
        if op == "and":
            return a[1] if a[0].value else s.BoolLit(False)
        return s.BoolLit(True) if a[0].value else a[1]
    x, y = a
    nats = isinstance(x, s.NatLit) and isinstance(y, s.NatLit)
    if op == "+" and nats:
        return s.NatLit(x.value + y.value)
    if op == "-" and nats:
        return s.NatLit(x.value - y.value if x.value >= y.value else 0)
    if op == ">" and nats:
        return s.BoolLit(x.value > y.value)
    if op == "=" and (nats or (isinstance(x, s.BoolLit) and isinstance(y, s.BoolLit))):
        return s.BoolLit(x.value == y.value)
    return None


def _delta_ready(e) -> bool:
    if isinstance(e, s.If):
        return o_is_value(e.cond) and not isinstance(e.cond, s.Var)
    if e.op in s.SHORT_CIRCUIT:
        return o_is_value(e.args[0]) and not isinstance(e.args[0], s.Var)
    return all(o_is_value(a) and not isinstance(a, s.Var) for a in e.args)


def _lift_parts(e):
    """(rebuild, inner letrec) when ``e`` is ``L[rec b in e']``."""
    if isinstance(e, s.App):
        if isinstance(e.arg, s.Letrec):
            return (lambda x: s.App(e.fn, x)), e.arg
        if isinstance(e.fn, s.Letrec) and o_is_value(e.arg):
            return (lambda x: s.App(x, e.arg)), e.fn
    if isinstance(e, s.Select) and isinstance(e.subject, s.Letrec):
        return (lambda x: s.Select(x, e.field)), e.subject
    if isinstance(e, s.Prim):
        for i in _prim_positions(e.op, e.args):
            if isinstance(e.args[i], s.Letrec):
                def rebuild(x, i=i):
                    args = list(e.args)
                    args[i] = x
                    return s.Prim(e.op, tuple(args))
                return rebuild, e.args[i]
    if isinstance(e, s.If) and isinstance(e.cond, s.Letrec):
        return (lambda x: s.If(x, e.then, e.orelse)), e.cond
    return None, None


def source_successors(e) -> list:
    """Every ``(rule, result)`` obtainable from ``e`` by one rule at one decomposition."""
    out = []
    for top, frames, f in source_decomps(e):
        whole = lambda x: plug_top(top, plug_frames(frames, x))  # noqa: E731
        # Context: Select, Beta, Lift, Delta at the focus
        if isinstance(f, s.Select) and isinstance(f.subject, s.Record):
            v = f.subject.get(f.field)
            if v is not None:
                out.append(("Select", whole(v)))
        if isinstance(f, s.App) and isinstance(f.fn, s.Lam) and o_is_value(f.arg):
            z = fresh_name()
            out.append(("Beta", whole(s.Letrec((s.Def(z, None, f.arg),), rename(f.fn.body, {f.fn.param: z})))))
        rebuild, inner = _lift_parts(f)
        if inner is not None:
            defs, body = freshen_binding(inner.defs, inner.body)
            out.append(("Lift", whole(s.Letrec(defs, rebuild(body)))))
        if isinstance(f, (s.Prim, s.If)) and _delta_ready(f):
            r = o_delta(f)
            if r is not None:
                out.append(("Delta", whole(r)))
        # IM and EM
        if isinstance(f, s.Letrec) and not frames and top[0] == "in":
            _, bv, x, size, rest, body = top
            b1, e1 = freshen_binding(f.defs, f.body)
            out.append(("IM", s.Letrec(bv + b1 + (s.Def(x, size, e1),) + rest, body)))
        if isinstance(f, s.Letrec) and not frames and top[0] == "under":
            b, body = freshen_binding(f.defs, f.body)
            out.append(("EM", s.Letrec(top[1] + b, body)))
        # Subst
        if isinstance(f, s.Var) and is_deref_position(top, frames):
            bv = () if top[0] == "none" else top[1]
            for d in bv:
                if d.var == f.name:
                    out.append(("Subst", whole(d.rhs)))
    return out


def distinct_modulo_alpha(results) -> list:
    uniq = []
    for rule, r in results:
        if not any(s.alpha_equal(r, u) for _, u in uniq):
            uniq.append((rule, r))
    return uniq


def is_source_answer(e) -> bool:
    if isinstance(e, s.Letrec):
        return all(o_respects(d) for d in e.defs) and o_is_value(e.body)
    return o_is_value(e)


def source_fault_kinds(e) -> set:
    """Cases of the stuck-term characterization that hold for ``e``."""
    kinds = set()
    for top, frames, f in source_decomps(e):
        if isinstance(f, s.Var) and is_deref_position(top, frames):
            bv = () if top[0] == "none" else top[1]
            if f.name not in {d.var for d in bv}:
                kinds.add("UndefinedVariableDeref")
        if (top[0] == "in" and not frames and top[3] is not None and o_is_value(f)
                and not isinstance(f, s.Var) and o_size(f) != top[3]):
            kinds.add("SizeMismatch")
        if isinstance(f, s.App) and o_is_value(f.arg):
            if isinstance(f.fn, s.Record):
                kinds.add("RecordApplied")
            elif isinstance(f.fn, (s.NatLit, s.BoolLit)):
                kinds.add("PrimTypeError")
        if isinstance(f, s.Select):
            if isinstance(f.subject, s.Record) and f.subject.get(f.field) is None:
                kinds.add("MissingField")
            elif isinstance(f.subject, s.Lam):
                kinds.add("FunctionSelected")
            elif isinstance(f.subject, (s.NatLit, s.BoolLit)):
                kinds.add("PrimTypeError")
        if isinstance(f, (s.Prim, s.If)) and _delta_ready(f) and o_delta(f) is None:
            kinds.add("PrimTypeError")
    return kinds


# ---------------------------------------------------------------- target

def t_is_value(e) -> bool:
    return isinstance(e, (t.Var, t.Nat, t.Bool))


def t_f_decomps(e):
    yield (), e
    if isinstance(e, t.App):
        for fr, f in t_f_decomps(e.arg):
            yield (("arg", e.fn),) + fr, f
        if t_is_value(e.arg):
            for fr, f in t_f_decomps(e.fn):
                yield (("fn", e.arg),) + fr, f
    elif isinstance(e, t.Select):
        for fr, f in t_f_decomps(e.subject):
            yield (("sel", e.field),) + fr, f
    elif isinstance(e, t.Prim):
        idx = [0] if e.op in s.SHORT_CIRCUIT else [
            i for i in range(len(e.args)) if all(t_is_value(a) for a in e.args[i + 1:])]
        for i in idx:
            for fr, f in t_f_decomps(e.args[i]):
                yield (("prim", i),) + fr, f
    elif isinstance(e, t.If):
        for fr, f in t_f_decomps(e.cond):
            yield (("if",),) + fr, f


def target_decomps(e):
    yield from t_f_decomps(e)
    if isinstance(e, t.Let) and e.defs:
        for fr, f in t_f_decomps(e.defs[0][1]):
            yield (("let",),) + fr, f


def _t_size(hv):
    if isinstance(hv, t.Lam):
        return FUNCTION_SIZE
    if isinstance(hv, t.Record):
        return RECORD_HEADER + len(hv.fields)
    return hv.arg.value  # alloc n


def _is_dummy(hv) -> bool:
    return isinstance(hv, t.App) and isinstance(hv.fn, t.Alloc)


def target_fault_kinds(c: t.Config) -> set:
    """Cases of the faulty-configuration characterization that hold for ``c``.

    The three ``update x y`` sub-cases may overlap; they are reported as one
    case, named after the first that holds (unbound, then sizes, then dummy).
    """
    heap, kinds = c.heap, set()
    for frames, f in target_decomps(c.expr):
        if isinstance(f, t.App) and t_is_value(f.arg):
            fn = f.fn
            if isinstance(fn, t.Var):
                if fn.name not in heap:
                    kinds.add("UnboundCall")
                elif not isinstance(heap[fn.name], t.Lam):
                    kinds.add("NonFunctionCall")
            elif isinstance(fn, t.Nat):
                kinds.add("NumberCalled")
            elif isinstance(fn, t.Bool):
                kinds.add("PrimTypeError")
            elif (isinstance(fn, t.App) and isinstance(fn.fn, t.Update)
                  and isinstance(fn.arg, t.Var) and isinstance(f.arg, t.Var)):
                x, y = fn.arg.name, f.arg.name
                if x not in heap or y not in heap:
                    kinds.add("UpdateUnbound")
                elif _t_size(heap[x]) != _t_size(heap[y]):
                    kinds.add("UpdateSizeMismatch")
                elif _is_dummy(heap[y]):
                    kinds.add("UpdateFromDummy")
        if isinstance(f, t.Select) and t_is_value(f.subject):
            sub = f.subject
            if isinstance(sub, t.Var):
                hv = heap.get(sub.name)
                if hv is None:
                    kinds.add("UnboundSelect")
                elif not (isinstance(hv, t.Record) and hv.get(f.field) is not None):
                    kinds.add("BadRecordSelect")
            elif isinstance(sub, t.Nat):
                kinds.add("NumberSelected")
            else:
                kinds.add("PrimTypeError")
        if isinstance(f, t.Alloc):
            if not (frames and frames[-1][0] == "fn" and isinstance(frames[-1][1], t.Nat)):
                kinds.add("BareAlloc")
        if isinstance(f, t.Update):
            ok = (len(frames) >= 2 and frames[-1][0] == "fn" and frames[-2][0] == "fn"
                  and isinstance(frames[-1][1], t.Var) and isinstance(frames[-2][1], t.Var))
            if not ok:
                kinds.add("BareUpdate")
        if isinstance(f, t.Prim):
            ready = t_is_value(f.args[0]) if f.op in s.SHORT_CIRCUIT else all(t_is_value(a) for a in f.args)
            if ready and _t_delta_undefined(f):
                kinds.add("PrimTypeError")
        if isinstance(f, t.If) and t_is_value(f.cond) and not isinstance(f.cond, t.Bool):
            kinds.add("PrimTypeError")
    return kinds


def _t_delta_undefined(e) -> bool:
    a = e.args
    if e.op in s.SHORT_CIRCUIT:
        return not isinstance(a[0], t.Bool)
    if e.op == "=":
        return not ((isinstance(a[0], t.Nat) and isinstance(a[1], t.Nat))
                    or (isinstance(a[0], t.Bool) and isinstance(a[1], t.Bool)))
    return not (isinstance(a[0], t.Nat) and isinstance(a[1], t.Nat))


def is_target_answer(c: t.Config) -> bool:
    return t_is_value(c.expr)

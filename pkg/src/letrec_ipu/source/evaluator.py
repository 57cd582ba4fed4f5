"""Small-step evaluator for the source calculus.

Evaluation only happens in the top-level binding; inner bindings are
lifted (``Lift``) and merged with it (``IM``, ``EM``).  Variables are
copied from the evaluated prefix of the top-level binding only when a
destructor needs them (``Subst``).  Applications evaluate right to left.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from ..sizing import DEFAULT_SIZES, SizeModel, respects_size
from .syntax import (
    App, BoolLit, Def, Expr, FreshNames, If, Lam, Letrec, NatLit, Prim, Record, Select,
    SHORT_CIRCUIT, Var, LazyNames, all_names, binding_free_vars, free_vars, is_value, rename_binding,
    substitute,
)

RULES = ("Beta", "Select", "Lift", "Context", "IM", "EM", "Subst", "Delta")

FAULT_KINDS = (
    "UndefinedVariableDeref",
    "SizeMismatch",
    "RecordApplied",
    "MissingField",
    "FunctionSelected",
)
# only reachable with the prims extension
EXT_FAULT_KINDS = ("PrimTypeError",)


# ---------------------------------------------------------------- contexts

@dataclass(frozen=True)
class AppArg:
    """``e □``"""
    fn: Expr

    def plug(self, e):
        return App(self.fn, e)

    def free_vars(self):
        return free_vars(self.fn)


@dataclass(frozen=True)
class AppFn:
    """``□ v``"""
    arg: Expr

    def plug(self, e):
        return App(e, self.arg)

    def free_vars(self):
        return free_vars(self.arg)


@dataclass(frozen=True)
class SelectOf:
    """``□.X``"""
    field: str

    def plug(self, e):
        return Select(e, self.field)

    def free_vars(self):
        return frozenset()


@dataclass(frozen=True)
class PrimArg:
    op: str
    args: tuple
    index: int

    def plug(self, e):
        args = list(self.args)
        args[self.index] = e
        return Prim(self.op, tuple(args))

    def free_vars(self):
        out = frozenset()
        for i, a in enumerate(self.args):
            if i != self.index:
                out |= free_vars(a)
        return out


@dataclass(frozen=True)
class IfCond:
    then: Expr
    orelse: Expr

    def plug(self, e):
        return If(e, self.then, self.orelse)

    def free_vars(self):
        return free_vars(self.then) | free_vars(self.orelse)


Frame = Union[AppArg, AppFn, SelectOf, PrimArg, IfCond]

NESTED, UNDER_BINDING, IN_BINDING = "nested", "under_binding", "in_binding"


@dataclass(frozen=True)
class SourceEvalContext:
    """``F``, ``rec bv in F`` or ``rec bv, x ι F, b in e``; frames run outermost first."""

    kind: str
    frames: tuple = ()
    bv: tuple = ()
    var: Optional[str] = None
    size: Optional[int] = None
    rest: tuple = ()
    body: Optional[Expr] = None

    def plug(self, e: Expr) -> Expr:
        for fr in reversed(self.frames):
            e = fr.plug(e)
        if self.kind == NESTED:
            return e
        if self.kind == UNDER_BINDING:
            return Letrec(self.bv, e)
        return Letrec(self.bv + (Def(self.var, self.size, e),) + self.rest, self.body)

    def binding(self) -> tuple:
        return self.bv

    def captured(self) -> frozenset:
        if self.kind == NESTED:
            return frozenset()
        dom = {d.var for d in self.bv}
        if self.kind == IN_BINDING:
            dom.add(self.var)
            dom.update(d.var for d in self.rest)
        return frozenset(dom)

    def is_dereferencing(self) -> bool:
        if self.frames:
            last = self.frames[-1]
            return isinstance(last, (AppFn, SelectOf, PrimArg, IfCond))
        return self.kind == IN_BINDING and self.size is not None


@dataclass(frozen=True)
class Decomposition:
    context: SourceEvalContext
    focus: Expr


def lookup_context(ctx: SourceEvalContext, x: str) -> Optional[Expr]:
    """Value of ``x`` in the evaluated prefix of ``ctx``; ``None`` when undefined."""
    for d in ctx.bv:
        if d.var == x:
            return d.rhs
    return None


def _descend(e: Expr, frames: list) -> tuple[list, Expr]:
    while True:
        if isinstance(e, App):
            if not is_value(e.arg):
                frames.append(AppArg(e.fn))
                e = e.arg
            elif not is_value(e.fn):
                frames.append(AppFn(e.arg))
                e = e.fn
            else:
                frames.append(AppFn(e.arg))
                return frames, e.fn
        elif isinstance(e, Select):
            frames.append(SelectOf(e.field))
            if is_value(e.subject):
                return frames, e.subject
            e = e.subject
        elif isinstance(e, Prim):
            order = (0,) if e.op in SHORT_CIRCUIT else range(len(e.args) - 1, -1, -1)
            pending = [i for i in order if not is_value(e.args[i])]
            if pending:
                frames.append(PrimArg(e.op, e.args, pending[0]))
                e = e.args[pending[0]]
                continue
            names = [i for i in order if isinstance(e.args[i], Var)]
            if names:
                frames.append(PrimArg(e.op, e.args, names[0]))
                return frames, e.args[names[0]]
            return frames, e
        elif isinstance(e, If):
            if is_value(e.cond) and not isinstance(e.cond, Var):
                return frames, e
            frames.append(IfCond(e.then, e.orelse))
            if isinstance(e.cond, Var):
                return frames, e.cond
            e = e.cond
        else:
            return frames, e


def decompose(e: Expr, model: SizeModel = DEFAULT_SIZES) -> Optional[Decomposition]:
    """Maximal decomposition of ``e``; ``None`` when ``e`` is an answer."""
    if isinstance(e, Letrec):
        defs = e.defs
        i = 0
        while i < len(defs) and respects_size(defs[i], model):
            i += 1
        if i < len(defs):
            d = defs[i]
            frames, focus = _descend(d.rhs, [])
            ctx = SourceEvalContext(IN_BINDING, tuple(frames), defs[:i], d.var, d.size, defs[i + 1:], e.body)
            return Decomposition(ctx, focus)
        if is_value(e.body):
            return None
        frames, focus = _descend(e.body, [])
        return Decomposition(SourceEvalContext(UNDER_BINDING, tuple(frames), defs), focus)
    if is_value(e):
        return None
    frames, focus = _descend(e, [])
    return Decomposition(SourceEvalContext(NESTED, tuple(frames)), focus)


# ---------------------------------------------------------------- rules

@dataclass(frozen=True)
class Stepped:
    term: Expr
    rule: str


@dataclass(frozen=True)
class AnswerReached:
    term: Expr


@dataclass(frozen=True)
class Stuck:
    kind: str
    witness: Expr


def subreduce(e: Expr, fresh: Optional[FreshNames] = None, avoid: Optional[set] = None):
    """One Select, Beta or Lift step at the root of ``e``; ``None`` if none applies."""
    fresh = fresh or FreshNames()
    if avoid is None:
        avoid = LazyNames(lambda: all_names(e))
    if isinstance(e, Select) and isinstance(e.subject, Record):
        return e.subject.get(e.field)
    if isinstance(e, App) and isinstance(e.fn, Lam) and is_value(e.arg):
        return _beta(e.fn, e.arg, fresh, avoid)
    frame, inner = _as_lift(e)
    if frame is not None:
        return _lift(frame, inner, fresh, avoid)
    return None


def _as_lift(e):
    if isinstance(e, App):
        if isinstance(e.arg, Letrec):
            return AppArg(e.fn), e.arg
        if isinstance(e.fn, Letrec) and is_value(e.arg):
            return AppFn(e.arg), e.fn
    if isinstance(e, Select) and isinstance(e.subject, Letrec):
        return SelectOf(e.field), e.subject
    if isinstance(e, Prim):
        order = (0,) if e.op in SHORT_CIRCUIT else range(len(e.args) - 1, -1, -1)
        for i in order:
            if isinstance(e.args[i], Letrec):
                return PrimArg(e.op, e.args, i), e.args[i]
            if not is_value(e.args[i]):
                break
    if isinstance(e, If) and isinstance(e.cond, Letrec):
        return IfCond(e.then, e.orelse), e.cond
    return None, None


def _beta(fn: Lam, arg: Expr, fresh, avoid) -> Expr:
    x, body = fn.param, fn.body
    if x in free_vars(arg):
        new = fresh(x, avoid)
        avoid.add(new)
        body = substitute({x: Var(new)}, body, fresh)
        x = new
    return Letrec((Def(x, None, arg),), body)


def _lift(frame, inner: Letrec, fresh, avoid) -> Expr:
    defs, body = rename_binding(inner.defs, inner.body, frame.free_vars(), fresh, avoid)
    return Letrec(defs, frame.plug(body))


def _delta(e: Expr):
    """Primitive and conditional reductions; ``None`` on a type error."""
    if isinstance(e, If):
        if isinstance(e.cond, BoolLit):
            return e.then if e.cond.value else e.orelse
        return None
    op, args = e.op, e.args
    if op in SHORT_CIRCUIT:
        left = args[0]
        if not isinstance(left, BoolLit):
            return None
        if op == "and":
            return args[1] if left.value else BoolLit(False)
        return BoolLit(True) if left.value else args[1]
    a, b = args
    if op == "=" and type(a) is type(b) and isinstance(a, (NatLit, BoolLit)):
        return BoolLit(a.value == b.value)
    if not (isinstance(a, NatLit) and isinstance(b, NatLit)):
        return None
    if op == "+":
        return NatLit(a.value + b.value)
    if op == "-":
        return NatLit(max(a.value - b.value, 0))
    if op == ">":
        return BoolLit(a.value > b.value)
    return None


def reduce_step(e: Expr, model: SizeModel = DEFAULT_SIZES, fresh: Optional[FreshNames] = None):
    """One reduction step: ``Stepped``, ``AnswerReached`` or ``Stuck``."""
    fresh = fresh or FreshNames()
    dec = decompose(e, model)
    if dec is None:
        return AnswerReached(e)
    ctx, focus = dec.context, dec.focus
    frames = ctx.frames
    avoid = fresh.reserved if fresh.reserved is not None else LazyNames(lambda: all_names(e))

    if isinstance(focus, (Prim, If)):
        out = _delta(focus)
        if out is None:
            return Stuck("PrimTypeError", e)
        return Stepped(ctx.plug(out), "Delta")

    if isinstance(focus, Letrec):
        if frames:
            outer = replace(ctx, frames=frames[:-1])
            return Stepped(outer.plug(_lift(frames[-1], focus, fresh, avoid)), "Lift")
        if ctx.kind == IN_BINDING:
            clash = {ctx.var} | binding_free_vars(ctx.bv + ctx.rest) | free_vars(ctx.body)
            b1, e1 = rename_binding(focus.defs, focus.body, clash, fresh, avoid)
            defs = ctx.bv + b1 + (Def(ctx.var, ctx.size, e1),) + ctx.rest
            return Stepped(Letrec(defs, ctx.body), "IM")
        if ctx.kind == UNDER_BINDING:
            b, body = rename_binding(focus.defs, focus.body, binding_free_vars(ctx.bv), fresh, avoid)
            return Stepped(Letrec(ctx.bv + b, body), "EM")
        raise AssertionError("top-level letrec always has a binding context")

    # the focus is a value sitting in a dereferencing position
    if isinstance(focus, Var):
        if not ctx.is_dereferencing():
            raise AssertionError("variable focus outside a dereferencing context")
        value = lookup_context(ctx, focus.name)
        if value is None:
            return Stuck("UndefinedVariableDeref", e)
        return Stepped(ctx.plug(value), "Subst")

    if not frames:
        # next definition of the top-level binding holds a badly sized value
        return Stuck("SizeMismatch", e)

    last, outer = frames[-1], replace(ctx, frames=frames[:-1])
    if isinstance(last, AppFn):
        if isinstance(focus, Lam):
            return Stepped(outer.plug(_beta(focus, last.arg, fresh, avoid)), "Beta")
        if isinstance(focus, Record):
            return Stuck("RecordApplied", e)
        return Stuck("PrimTypeError", e)
    if isinstance(last, SelectOf):
        if isinstance(focus, Record):
            v = focus.get(last.field)
            if v is None:
                return Stuck("MissingField", e)
            return Stepped(outer.plug(v), "Select")
        if isinstance(focus, Lam):
            return Stuck("FunctionSelected", e)
        return Stuck("PrimTypeError", e)
    raise AssertionError(f"unexpected focus {focus!r} under {last!r}")


def classify_stuck(e: Expr, model: SizeModel = DEFAULT_SIZES) -> str:
    r = reduce_step(e, model)
    if not isinstance(r, Stuck):
        raise ValueError("term is not stuck: it is an answer or reducible")
    return r.kind


# ---------------------------------------------------------------- driver

@dataclass(frozen=True)
class Answer:
    term: Expr


@dataclass(frozen=True)
class Faulty:
    kind: str
    witness: Expr


@dataclass(frozen=True)
class FuelExhausted:
    steps: int
    last: Expr


SourceOutcome = Union[Answer, Faulty, FuelExhausted]


@dataclass
class SourceRun:
    outcome: SourceOutcome
    steps: int
    trace: list = field(default_factory=list)


def iter_source(e: Expr, model: SizeModel = DEFAULT_SIZES):
    """Yield ``(rule, term)`` pairs until an answer or stuck term is reached."""
    fresh = FreshNames()
    fresh.reserve(e)
    while True:
        r = reduce_step(e, model, fresh)
        if not isinstance(r, Stepped):
            return
        e = r.term
        yield r.rule, e


def run_source(e: Expr, fuel: int = 100_000, model: SizeModel = DEFAULT_SIZES, keep_trace: bool = True) -> SourceRun:
    fresh = FreshNames()
    fresh.reserve(e)
    trace = []
    for steps in range(fuel + 1):
        r = reduce_step(e, model, fresh)
        if isinstance(r, AnswerReached):
            return SourceRun(Answer(e), steps, trace)
        if isinstance(r, Stuck):
            return SourceRun(Faulty(r.kind, e), steps, trace)
        if steps == fuel:
            break
        e = r.term
        if keep_trace:
            trace.append((r.rule, e))
    return SourceRun(FuelExhausted(fuel, e), fuel, trace)

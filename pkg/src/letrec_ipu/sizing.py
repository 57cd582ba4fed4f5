"""Block sizes for source values and stored values, and size-annotation inference.

Sizes depend only on the head constructor and the field count, so both
size functions are invariant under value-for-variable substitution.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .source import syntax as s
from .source.syntax import Diagnostic


@dataclass(frozen=True)
class SizeModel:
    function_size: int = 2
    record_header: int = 1

    def __post_init__(self):
        if self.function_size < 1:
            raise ValueError("function_size must be >= 1")
        if self.record_header < 0:
            raise ValueError("record_header must be >= 0")

    def record(self, n_fields: int) -> int:
        return self.record_header + n_fields

    @classmethod
    def from_file(cls, path) -> "SizeModel":
        """Read flat ``key = value`` lines (``#`` comments allowed)."""
        values = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line or line.startswith("["):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key = key.strip()
            if key not in ("function_size", "record_header"):
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = int(val.strip())
        return cls(**values)


DEFAULT_SIZES = SizeModel()


def size_source_value(v: s.Expr, model: SizeModel = DEFAULT_SIZES) -> Optional[int]:
    """Size of a source value; ``None`` for variables and immediate literals."""
    if isinstance(v, s.Lam):
        return model.function_size
    if isinstance(v, s.Record):
        return model.record(len(v.fields))
    if isinstance(v, (s.Var, s.NatLit, s.BoolLit)):
        return None
    raise ValueError(f"not a value: {v!r}")


def size_stored_value(hv, model: SizeModel = DEFAULT_SIZES) -> int:
    from .target import syntax as t

    if isinstance(hv, t.Lam):
        return model.function_size
    if isinstance(hv, t.Record):
        return model.record(len(hv.fields))
    n = t.alloc_size(hv)
    if n is not None:
        return n
    raise ValueError(f"not a stored value: {hv!r}")


def respects_size(d: s.Def, model: SizeModel = DEFAULT_SIZES) -> bool:
    """Whether an evaluated definition may belong to a size-respecting prefix."""
    memo = d._respects
    if memo is not None and memo[0] is model:
        return memo[1]
    if not s.is_value(d.rhs):
        ok = False
    elif d.size is None:
        ok = True
    else:
        ok = not isinstance(d.rhs, s.Var) and size_source_value(d.rhs, model) == d.size
    object.__setattr__(d, "_respects", (model, ok))
    return ok


def manifest_size(rhs: s.Expr, model: SizeModel = DEFAULT_SIZES) -> Optional[int]:
    if isinstance(rhs, (s.Lam, s.Record)):
        return size_source_value(rhs, model)
    return None


def infer_size_annotations(defs: s.Binding, model: SizeModel = DEFAULT_SIZES):
    """Annotate forward-referenced definitions with their manifest size.

    Returns ``(binding, diagnostics)``; diagnostics name every forward target
    whose right-hand side is neither an abstraction nor a record literal.
    """
    targets = {j for _, j in s.forward_references(defs)}
    out, diags = [], []
    for j, d in enumerate(defs):
        if j in targets and d.size is None:
            n = manifest_size(d.rhs, model)
            if n is None:
                diags.append(
                    Diagnostic(
                        "UnsizableForwardTarget",
                        f"{d.var} is forward-referenced but its size cannot be read off its definition",
                        (f"def[{j}]",),
                    )
                )
                out.append(d)
            else:
                out.append(s.Def(d.var, n, d.rhs))
        else:
            out.append(d)
    return tuple(out), diags


def infer_sizes(e: s.Expr, model: SizeModel = DEFAULT_SIZES):
    """Apply :func:`infer_size_annotations` to every binding of a term."""
    diags: list[Diagnostic] = []

    def go(t):
        if isinstance(t, s.Letrec):
            defs, ds = infer_size_annotations(
                tuple(s.Def(d.var, d.size, go(d.rhs)) for d in t.defs), model
            )
            diags.extend(ds)
            return s.Letrec(defs, go(t.body))
        return s.map_children(t, go)

    return go(e), diags


def check_annotation_consistency(e: s.Expr, model: SizeModel = DEFAULT_SIZES) -> list[Diagnostic]:
    """Warn about ``=[n]`` definitions whose manifest abstraction/record has another size."""
    out = []
    for node in s.subterms(e):
        if isinstance(node, s.Letrec):
            for d in node.defs:
                m = manifest_size(d.rhs, model)
                if d.size is not None and m is not None and m != d.size:
                    out.append(
                        Diagnostic("SizeAnnotation", f"{d.var} is annotated {d.size} but its value has size {m}")
                    )
    return out

from __future__ import annotations

import itertools

import oracles as O
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import programs, source_terms, violate_c1, violate_c2, violate_c3

from letrec_ipu.source import syntax as s
from letrec_ipu.source.parser import parse_source, print_source
from letrec_ipu.source.syntax import SourceError, alpha_equal, check_wellformed, free_vars, substitute

X, Y, Z = s.Var("x"), s.Var("y"), s.Var("z")


def p(text: str, **kw) -> s.Expr:
    return parse_source(text, **kw)


def codes(diags) -> set:
    return {d.code for d in diags}


# ---------------------------------------------------------------- parsing

def test_parse_letrec_unknown_size():
    e = p(r"rec x =? \y.y in x x")
    assert e == s.Letrec((s.Def("x", None, s.Lam("y", Y)),), s.App(X, X))


def test_parse_rejects_forward_ref_to_unknown_size():
    with pytest.raises(SourceError) as err:
        p("rec x =? y, y =? {} in x")
    assert codes(err.value.diagnostics) == {"C3"}


def test_parse_rejects_duplicate_field():
    with pytest.raises(SourceError) as err:
        p("{X = x, X = y}")
    assert "C1" in codes(err.value.diagnostics)


def test_parse_known_size_and_prims():
    e = p(r"rec f =[2] \n. if n = 0 then true else f (n - 1) in f 3", prims=True)
    assert e.defs[0].size == 2
    assert isinstance(e.defs[0].rhs.body, s.If)
    with pytest.raises(SourceError):
        p("1 + 2")  # the extension is off by default


def test_parse_reports_position():
    with pytest.raises(SourceError) as err:
        p("rec x =? in x")
    assert "1:" in str(err.value)


def test_application_is_left_associative_and_select_binds_tightest():
    assert p("f x y", check=False) == s.App(s.App(s.Var("f"), X), Y)
    assert p("f x.A", check=False) == s.App(s.Var("f"), s.Select(X, "A"))


# ---------------------------------------------------------------- free variables

@pytest.mark.parametrize("text, fv", [
    (r"\x. x", set()),
    ("rec x =? y in x", {"y"}),
    ("{X = x}", {"x"}),
    (r"rec x =[2] \z. y z, y =[2] \z. x z in x w", {"w"}),
])
def test_free_vars_examples(text, fv):
    assert free_vars(p(text, check=False)) == fv


# ---------------------------------------------------------------- alpha equivalence

@pytest.mark.parametrize("a, b, eq", [
    (r"\x. x", r"\y. y", True),
    ("{X = x}", "{Y = x}", False),
    (r"rec x =? \y. y in x", r"rec z =? \y. y in z", True),
    (r"\x. y", r"\y. y", False),
    ("rec x =[2] y in x", "rec x =[3] y in x", False),
    ("rec x =? {}, y =? {} in x", "rec y =? {}, x =? {} in y", True),
])
def test_alpha_equal_examples(a, b, eq):
    assert alpha_equal(p(a, check=False), p(b, check=False)) is eq


@given(source_terms(prims=True))
def test_alpha_equal_reflexive(e):
    assert alpha_equal(e, e)


@given(source_terms(), source_terms())
def test_alpha_equal_symmetric(a, b):
    assert alpha_equal(a, b) == alpha_equal(b, a)


@given(st.lists(source_terms(), min_size=3, max_size=3))
def test_alpha_equal_transitive(terms):
    # renamed copies make the antecedent hold often enough to be meaningful
    a, b, c = terms
    renamed = substitute({}, a)
    for x, y, z in itertools.permutations([a, renamed, b, c], 3):
        if alpha_equal(x, y) and alpha_equal(y, z):
            assert alpha_equal(x, z)


@given(source_terms())
def test_alpha_equal_invariant_under_bound_renaming(e):
    wrapped = s.Lam("q", e)
    renamed = s.Lam("q'9", substitute({"q": s.Var("q'9")}, e))
    assert alpha_equal(wrapped, renamed)


# ---------------------------------------------------------------- substitution

def test_substitute_examples():
    assert substitute({"x": Y}, s.App(X, Z)) == s.App(Y, Z)
    assert substitute({"x": Y}, s.Lam("x", X)) == s.Lam("x", X)
    out = substitute({"x": Y}, s.Lam("y", X))
    assert isinstance(out, s.Lam) and out.param != "y" and out.body == Y


def test_substitute_renames_letrec_binders_on_capture():
    e = p("rec y =? {} in x", check=False)
    out = substitute({"x": Y}, e)
    assert free_vars(out) == {"y"}
    assert alpha_equal(out, p("rec w =? {} in y", check=False))


@given(source_terms(prims=True), st.sampled_from(["x", "y", "f"]), source_terms())
def test_free_vars_of_substitution(e, x, v):
    out = substitute({x: v}, e)
    expected = free_vars(e) - {x}
    if x in free_vars(e):
        expected |= free_vars(v)
    assert free_vars(out) == expected


@given(source_terms(), source_terms())
def test_substitution_agrees_with_rename_then_replace(e, v):
    # independent route: make every binder fresh first, then substitution cannot capture
    out = substitute({"x": v}, e)
    assert alpha_equal(out, _replace_free(_freshen_all(e), "x", v))


def _freshen_all(e):
    if isinstance(e, s.Lam):
        n = O.fresh_name()
        return s.Lam(n, _freshen_all(O.rename(e.body, {e.param: n})))
    if isinstance(e, s.Letrec):
        defs, body = O.freshen_binding(e.defs, e.body)
        return s.Letrec(tuple(s.Def(d.var, d.size, _freshen_all(d.rhs)) for d in defs), _freshen_all(body))
    return s.map_children(e, lambda c: _freshen_all(c))


def _replace_free(e, x, v):
    # binders are all fresh, so nothing can be shadowed or captured
    if isinstance(e, s.Var):
        return v if e.name == x else e
    return s.map_children(e, lambda c: _replace_free(c, x, v))


# ---------------------------------------------------------------- printing

@given(source_terms(prims=True))
def test_print_parse_round_trip_any_term(e):
    assert p(print_source(e), prims=True, check=False) == e


@given(programs())
def test_print_parse_round_trip_programs(e):
    back = p(print_source(e), prims=s.uses_prims(e))
    assert alpha_equal(back, e)


# ---------------------------------------------------------------- well-formedness

@pytest.mark.parametrize("text, expected", [
    (r"rec z =? x x, x =[2] \y. y in z", set()),
    (r"rec x =? y, y =? \z. z in x", {"C3"}),
    (r"\x. x", set()),
    ("rec x =? {}, x =? {} in x", {"C2"}),
    (r"rec x =[2] \y. x y in x", set()),  # a self reference counts as forward, so it needs a known size
])
def test_check_wellformed_examples(text, expected):
    assert codes(check_wellformed(p(text, check=False))) == expected


def test_self_reference_of_unknown_size_is_rejected():
    assert codes(check_wellformed(p(r"rec x =? \y. x y in x", check=False))) == {"C3"}


@given(programs())
def test_generated_programs_are_wellformed_and_closed(e):
    assert check_wellformed(e) == []
    assert free_vars(e) == frozenset()


@pytest.mark.parametrize("mutate, code", [(violate_c1, "C1"), (violate_c2, "C2"), (violate_c3, "C3")])
@given(e=programs())
def test_mutations_are_rejected(mutate, code, e):
    assert code in codes(check_wellformed(mutate(e)))

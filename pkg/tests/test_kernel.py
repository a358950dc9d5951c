"""Kernel unit tests: checking, normalization, conversion, rewriting."""

from __future__ import annotations

import importlib.resources as res

import pytest

from sogat_forge import terms as T
from sogat_forge.kernel import FuelExhausted, KernelError
from sogat_forge.signature import (elaborate, parse_theory, print_theory,
                                   resolve_term, resolve_type)


def load_cat():
    text = (res.files("sogat_forge") / "theories" / "cat.sgt").read_text()
    return elaborate(parse_theory(text))


@pytest.fixture(scope="module")
def cat():
    return load_cat()


def t(cat, src, names):
    return resolve_term(parse_all_one(src), names, cat)


def ty(cat, src, names):
    return resolve_type(parse_all_one(src), names, cat)


def parse_all_one(src):
    from sogat_forge.sexpr import parse_all
    out = parse_all(src)
    assert len(out) == 1
    return out[0]


def test_cat_elaborates(cat):
    assert list(cat.sorts) == ["ob", "hom", "eqhom"]
    assert list(cat.ops) == ["iid", "comp", "irefl"]
    assert len(cat.eqs) == 5
    assert cat.sorts["ob"].boundary == ()
    assert len(cat.sorts["hom"].boundary) == 2
    assert "eqhom" in cat.prop_sorts
    assert cat.reflect["eqhom"] == (2, 3)



def test_check_type_examples(cat):
    ctx = (T.sort("ob"), T.sort("ob"))
    a = ty(cat, "(hom x y)", ["x", "y"])
    cat.check_type(ctx, a)
    cat.check_type((), T.unit())
    with pytest.raises(KernelError):
        cat.check_type((), T.sort("hom", (T.var(0), T.var(0))))  # unbound


def test_check_term_examples(cat):
    ctx = (T.sort("ob"),)
    good = t(cat, "(iid x)", ["x"])
    cat.check_term(ctx, good, ty(cat, "(hom x x)", ["x"]))
    cat.check_term(ctx, T.tt(), T.unit())
    with pytest.raises(KernelError) as ei:
        cat.check_term(ctx, good, T.sort("ob"))
    assert "mismatch" in str(ei.value)


def test_unit_laws_rewrite(cat):
    names = ["x", "y", "f"]
    ctx = tuple(ty(cat, s, names[:i]) for i, s in enumerate(["ob", "ob", "(hom x y)"]))
    lhs = t(cat, "(comp x y y f (iid y))", names)
    f = t(cat, "f", names)
    assert cat.normalize(ctx, lhs) is f
    assert cat.defeq(ctx, lhs, f, ty(cat, "(hom x y)", names))


def test_assoc_defeq(cat):
    names = ["w", "x", "y", "z", "f", "g", "h"]
    srcs = ["ob", "ob", "ob", "ob", "(hom w x)", "(hom x y)", "(hom y z)"]
    ctx = tuple(ty(cat, s, names[:i]) for i, s in enumerate(srcs))
    a = t(cat, "(comp w y z (comp w x y f g) h)", names)
    b = t(cat, "(comp w x z f (comp x y z g h))", names)
    assert cat.defeq(ctx, a, b, ty(cat, "(hom w z)", names))


def test_eta_pair(cat):
    ctx = (T.sigma(T.sort("ob"), T.sort("ob")),)
    p = T.var(0)
    assert cat.defeq(ctx, T.pair(T.fst(p), T.snd(p)), p,
                     T.sigma(T.sort("ob"), T.sort("ob")))


def test_eqhom_reflection_drives_defeq(cat):
    # ctx: x y : ob, f g : hom(x,y), e : eqhom(f,g)  =>  f == g definitionally
    names = ["x", "y", "f", "g", "e"]
    srcs = ["ob", "ob", "(hom x y)", "(hom x y)", "(eqhom x y f g)"]
    ctx = tuple(ty(cat, s, names[:i]) for i, s in enumerate(srcs))
    f = t(cat, "f", names)
    g = t(cat, "g", names)
    assert cat.defeq(ctx, f, g, ty(cat, "(hom x y)", names))


def test_reflection_through_composition_chains(cat):
    # inverse cancellation inside a composite, via ground completion
    names = ["x", "y", "f", "g", "p", "h"]
    srcs = ["ob", "ob", "(hom x y)", "(hom y x)",
            "(eqhom x x (comp x y x f g) (iid x))", "(hom x y)"]
    ctx = tuple(ty(cat, s, names[:i]) for i, s in enumerate(srcs))
    lhs = t(cat, "(comp x y y (comp x x y (comp x y x f g) h) (iid y))", names)
    rhs = t(cat, "h", names)
    assert cat.defeq(ctx, lhs, rhs, ty(cat, "(hom x y)", names))


def test_prop_sort_irrelevance(cat):
    names = ["x", "p", "q"]
    srcs = ["ob", "(eqhom x x (iid x) (iid x))", "(eqhom x x (iid x) (iid x))"]
    ctx = tuple(ty(cat, s, names[:i]) for i, s in enumerate(srcs))
    assert cat.defeq(ctx, t(cat, "p", names), t(cat, "q", names),
                     ty(cat, "(eqhom x x (iid x) (iid x))", names))


def test_beta_and_proj():
    cat = load_cat()
    body = T.var(0)
    u = T.op("iid", (T.var(0),))
    assert cat.normalize((T.sort("ob"),), T.app(T.lam(body), u)) is u
    assert cat.normalize((), T.fst(T.pair(T.tt(), T.tt()))) is T.tt()


def test_fuel_exhaustion_is_undecided():
    text = """(theory loopy
      (sort s ())
      (op a () s) (op b () s)
      (eq ab () a b s)
      (eq ba () b a s))"""
    th = elaborate(parse_theory(text))
    th.fuel = 16
    assert th.defeq_decide((), T.op("a"), T.op("b"), T.sort("s")) in (True, None)
    th2 = elaborate(parse_theory(text))
    th2.fuel = 0
    with pytest.raises(FuelExhausted):
        th2.defeq((), T.op("a"), T.op("b"), T.sort("s"))


def test_roundtrip_serialization(cat):
    text = print_theory(cat)
    cat2 = elaborate(parse_theory(text))
    assert print_theory(cat2) == text
    assert list(cat2.sorts) == list(cat.sorts)
    assert len(cat2.eqs) == len(cat.eqs)


def test_duplicate_name_rejected():
    with pytest.raises(Exception) as ei:
        elaborate(parse_theory("(theory bad (sort ob ()) (sort ob ()))"))
    assert "duplicate" in str(ei.value)


def test_empty_theory_is_legal():
    th = elaborate(parse_theory("(theory empty)"))
    assert not th.sorts and not th.ops


def test_type_level_equation_rejected(cat):
    text = """(theory bad2 (sort a ()) (sort b ())
      (eq nope () a b a))"""
    with pytest.raises(Exception) as ei:
        elaborate(parse_theory(text))
    assert "sort" in str(ei.value)


def test_subst_commutes_with_shift():
    e = T.sigma(T.sort("ob"), T.sort("hom", (T.var(0), T.var(1))))
    assert T.shift(T.shift(e, 1), 1) is T.shift(e, 2)
    assert T.sub1(T.shift(e, 1), T.var(0)) is e

"""Finite-model oracle: loading, evaluation, brute-force transport."""

from __future__ import annotations

import importlib.resources as res

import pytest

from sogat_forge import terms as T
from sogat_forge.oracle import (ModelError, brute_contractible, brute_transport,
                                eval_term, eval_type, load_model)
from sogat_forge.sexpr import parse_all
from sogat_forge.signature import elaborate, parse_theory, resolve_term, resolve_type


def load(name):
    return (res.files("sogat_forge") / "theories" / name).read_text()


@pytest.fixture(scope="module")
def cat():
    return elaborate(parse_theory(load("cat.sgt")))


@pytest.fixture(scope="module")
def g2(cat):
    return load_model(cat, load("groupoid2.model"))


def ty(th, src, names):
    (one,) = parse_all(src)
    return resolve_type(one, names, th)


def tm(th, src, names):
    (one,) = parse_all(src)
    return resolve_term(one, names, th)


def test_groupoid_loads(cat, g2):
    assert sorted(g2.carrier("ob", ())) == ["a", "b"]
    assert sorted(g2.carrier("hom", ("a", "b"))) == ["e", "f"]


def test_terminal_category_loads(cat):
    text = """(model cat
      (carrier ob (() o))
      (carrier hom ((o o) i))
      (carrier eqhom ((o o i i) r))
      (table iid ((o) i))
      (table comp ((o o o i i) i))
      (table irefl ((o o i) r)))"""
    m = load_model(cat, text)
    assert m.carrier("hom", ("o", "o")) == ["i"]


def test_broken_unit_law_rejected(cat):
    text = """(model cat
      (carrier ob (() o))
      (carrier hom ((o o) i j))
      (carrier eqhom ((o o i i) r) ((o o i j)) ((o o j i)) ((o o j j) r))
      (table iid ((o) i))
      (table comp ((o o o i i) i) ((o o o i j) j) ((o o o j i) i) ((o o o j j) j))
      (table irefl ((o o i) r) ((o o j) r)))"""
    with pytest.raises(ModelError) as ei:
        load_model(cat, text)
    assert "unit-r" in str(ei.value)


def test_eval_unit_and_sort(cat, g2):
    assert eval_type(g2, (), T.unit()) == [()]
    assert eval_type(g2, ("a",), ty(cat, "(hom x x)", ["x"])) == ["ia", "ta"]


def test_eval_iso_set_between_isomorphic_objects(cat, g2):
    iso = ty(cat, """(sigma ((u (hom x y)) (v (hom y x))
                            (p (eqhom x x (comp x y x u v) (iid x))))
                      (eqhom y y (comp y x y v u) (iid y)))""", ["x", "y"])
    # between a and b: (e,g), (f,h) are the two mutually inverse pairs
    vals = eval_type(g2, ("b", "a"), iso)  # env: var0=y=b, var1=x=a
    assert len(vals) == 2
    # iso(a, a): identity-parity pairs only
    vals_aa = eval_type(g2, ("a", "a"), iso)
    assert len(vals_aa) == 2


def test_eval_compositional(cat, g2):
    t = tm(cat, "(comp a b a e g)", ["a??"]) if False else None
    term = tm(cat, "(comp x y x u v)", ["x", "y", "u", "v"])
    # env innermost-first: v=g, u=e, y=b, x=a
    assert eval_term(g2, ("g", "e", "b", "a"), term) == "ia"


def test_brute_contractible(cat, g2):
    assert brute_contractible(g2, (), ty(cat, "(eqhom ?x)", []) if False else
                              ty(cat, "(unit)", []))
    hom_aa = ty(cat, "(hom x x)", ["x"])
    assert not brute_contractible(g2, ("a",), hom_aa)


def test_brute_transport_along_identity(cat, g2):
    # relation: eqhom(a, a, f0, y) picks out y = f0
    rel = ty(cat, "(eqhom x x u y)", ["x", "u", "y"])
    target = ty(cat, "(hom x x)", ["x", "u"])
    out = brute_transport(g2, ("ta", "a"), target, rel)
    assert out == "ta"


def test_brute_transport_conjugation(cat, g2):
    # transport f : hom(a,a) along e : a ~ b is e^-1 . f . e, i.e. the
    # hom(b,b) element related by eqhom(b,b, comp(g, comp(f, e)), y)
    rel = ty(cat, "(eqhom yb yb (comp yb xa yb ginv (comp xa xa yb u fwd)) y)",
             ["xa", "yb", "fwd", "ginv", "u", "y"])
    target = ty(cat, "(hom yb yb)", ["xa", "yb", "fwd", "ginv", "u"])
    # env innermost-first: u=ta, ginv=g, fwd=e, yb=b, xa=a
    out = brute_transport(g2, ("ta", "g", "e", "b", "a"), target, rel)
    assert out == "tb"
    out2 = brute_transport(g2, ("ia", "g", "e", "b", "a"), target, rel)
    assert out2 == "ib"


def test_transport_failure_modes(cat, g2):
    rel_empty = ty(cat, "(eqhom x x u y)", ["x", "u", "y"])
    target = ty(cat, "(hom q q)", ["q", "z"])
    with pytest.raises(ModelError):
        # relation across distinct morphisms of hom(b,b) vs hom(a,a) carrier:
        brute_transport(g2, ("e", "a"), ty(cat, "(hom x x)", ["x", "z"]),
                        ty(cat, "(eqhom x x y y)", ["x", "z", "y"]))

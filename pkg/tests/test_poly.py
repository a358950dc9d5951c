"""Polynomial normal form and iso round trips."""

from __future__ import annotations

import pytest

from sogat_forge import terms as T
from sogat_forge.poly import (check_poly, iso_roundtrip_ok, poly_as_type,
                              polynomialize, rep_telescope)
from sogat_forge.sexpr import parse_all
from sogat_forge.signature import elaborate, parse_theory, resolve_type

TID_SRC = """(theory tid
  (sort ity ())
  (rep-sort itm ((A ity)))
  (op iid2 ((A ity) (x (itm A)) (y (itm A))) ity))"""


@pytest.fixture(scope="module")
def tid():
    return elaborate(parse_theory(TID_SRC))


def ty(th, src, names):
    (one,) = parse_all(src)
    return resolve_type(one, names, th)


def run(th, ctx, a):
    monos, iso = polynomialize(th, ctx, a)
    check_poly(th, ctx, a, monos, iso)
    assert iso_roundtrip_ok(th, ctx, a, monos, iso)
    return monos, iso


def test_unit_is_empty(tid):
    monos, iso = run(tid, (), T.unit())
    assert monos == ()
    assert poly_as_type(monos) is T.unit()


def test_sort_is_single_monomial(tid):
    monos, _ = run(tid, (), T.sort("ity"))
    assert len(monos) == 1 and monos[0].params == ()


def test_sigma_reassociation(tid):
    # Sigma(Sigma(A,B),C) with A,B,C basic -> telescope [A,B,C]
    ctx = ()
    a = ty(tid, "(sigma ((p (sigma ((A ity) (B ity)) ity))) ity)", [])
    monos, iso = run(tid, ctx, a)
    assert len(monos) == 4
    assert all(m.params == () for m in monos)


def test_pi_distributes_over_sigma(tid):
    # over (A : ity):  Pi(x : itm A). Sigma(C : ity). itm C
    ctx = (T.sort("ity"),)
    a = ty(tid, "(pi ((x (itm A))) (sigma ((C ity)) (itm C)))", ["A"])
    monos, iso = run(tid, ctx, a)
    assert len(monos) == 2
    # first monomial: Pi(x : itm A). ity
    assert len(monos[0].params) == 1 and monos[0].head.args[0] == "ity"
    # second: Pi(x : itm A). itm(F x) where F is the first component
    assert len(monos[1].params) == 1 and monos[1].head.args[0] == "itm"
    head_arg = monos[1].head.args[1][0]
    assert head_arg.tag == T.APP


def test_nested_pi(tid):
    ctx = (T.sort("ity"), T.sort("ity"))
    a = ty(tid, "(pi ((x (itm A)) (y (itm B))) (sigma ((C ity)) ity))",
           ["A", "B"])
    monos, iso = run(tid, ctx, a)
    assert len(monos) == 2
    assert all(len(m.params) == 2 for m in monos)


def test_pi_over_compound_rep_domain(tid):
    # domain Sigma(x : itm A, y : itm A) flattens into two Pi parameters
    ctx = (T.sort("ity"),)
    a = ty(tid, "(pi ((p (sigma ((x (itm A))) (itm A)))) ity)", ["A"])
    monos, iso = run(tid, ctx, a)
    assert len(monos) == 1
    assert len(monos[0].params) == 2


def test_rep_telescope_rejects_pi(tid):
    ctx = (T.sort("ity"),)
    tele, iso = rep_telescope(tid, ctx, ty(tid, "(sigma ((x (itm A))) (itm A))", ["A"]))
    assert len(tele) == 2


def test_unit_inside_sigma_vanishes(tid):
    a = ty(tid, "(sigma ((u (unit)) (A ity)) (unit))", [])
    monos, iso = run(tid, (), a)
    assert len(monos) == 1


def test_spec_example_tid_shape(tid):
    # Pi over itm into a Sigma of a sort and a dependent itm, with a
    # boundary spine using the bound variable
    ctx = (T.sort("ity"),)
    a = ty(tid, "(pi ((x (itm A))) (sigma ((C ity)) (itm (iid2 A x x))))", ["A"])
    monos, iso = run(tid, ctx, a)
    assert len(monos) == 2
    assert monos[1].head.args[0] == "itm"

"""Polynomial normal forms of framework types.

Every type is isomorphic to a telescope of monomials (an iterated
first-order Pi over basic representable types into a sort application):
Sigmas reassociate and Pis distribute over Sigmas.  The flattening is
depth-first and left-to-right, the collapsed type is left-nested, and
the isomorphism is realized by a pair of terms whose round trips are
definitional (beta plus surjective pairing).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms as T
from .kernel import KernelError, Theory
from .terms import Expr


@dataclass(frozen=True)
class Mono:
    """A monomial: parameter telescope of basic representable types and a
    sort-application head scoped over the parameters.

    Within a polynomial (a telescope of monomials), the k-th monomial's
    components are additionally scoped over the k collapsed values of the
    earlier monomials.
    """
    params: tuple[Expr, ...]
    head: Expr

    def as_type(self) -> Expr:
        return T.pis(self.params, self.head)


@dataclass(frozen=True)
class Iso:
    """fwd is a term over ctx+(x : a) of the flattened type; bwd is a term
    over ctx+(y : flattened) of a; both round trips are definitional."""
    fwd: Expr
    bwd: Expr


def ltuple(parts: tuple[Expr, ...]) -> Expr:
    """Left-nested tuple; () is tt, a 1-tuple is its component."""
    if not parts:
        return T.tt()
    out = parts[0]
    for c in parts[1:]:
        out = T.pair(out, c)
    return out


def lproj(p: Expr, k: int, j: int) -> Expr:
    """Component j (0-based) of a left-nested k-tuple (k >= 1)."""
    assert 0 <= j < k
    for _ in range(k - 1 - j):
        p = T.fst(p)
    return T.snd(p) if j > 0 else p


def inst_block(e: Expr, sp: tuple[Expr, ...], new_depth: int, depth: int = 0) -> Expr:
    """Re-situate e from [amb | old-block(len sp) | depth binders] to
    [amb | new-block(new_depth) | depth binders]: old-block variables are
    replaced by the sp entries (innermost first, written over the target
    without the binders); ambient variables keep their identity."""
    return T.subst_spine(T.shift(e, new_depth, len(sp) + depth), sp, depth)


def poly_as_type(monos: tuple[Mono, ...]) -> Expr:
    """Collapse a polynomial to a single left-nested type."""
    if not monos:
        return T.unit()
    ty = monos[0].as_type()
    for k in range(1, len(monos)):
        mt = monos[k].as_type()
        # entry k is scoped over k earlier values; repackage them as
        # projections of one left-nested pair variable
        sp = tuple(lproj(T.var(0), k, k - 1 - j) for j in range(k))
        mt = inst_block(mt, sp, 1)
        ty = T.sigma(ty, mt)
    return ty


def polynomialize(th: Theory, ctx: tuple[Expr, ...], a: Expr) -> tuple[tuple[Mono, ...], Iso]:
    """Polynomial normal form of a type plus the realizing isomorphism."""
    monos, fwd, bwd = _poly(th, ctx, a)
    return tuple(monos), Iso(fwd, bwd)


def rep_telescope(th: Theory, ctx: tuple[Expr, ...], x: Expr) -> tuple[tuple[Expr, ...], Iso]:
    """Flatten a representable type to a telescope of basic representable
    types (the rep-level normal form)."""
    monos, fwd, bwd = _poly(th, ctx, x)
    tele = []
    for m in monos:
        if m.params:
            raise KernelError("representable type flattened to a Pi monomial")
        tele.append(m.head)
    return tuple(tele), Iso(fwd, bwd)


def _dvars(ka: int) -> tuple[Expr, ...]:
    """Variables of a ka-entry block, outermost first."""
    return tuple(T.var(ka - 1 - i) for i in range(ka))


def _poly(th: Theory, ctx: tuple[Expr, ...], a: Expr):
    tag = a.tag
    if tag == T.UNIT:
        return [], T.tt(), T.tt()
    if tag == T.SORT:
        m = Mono((), T.shift(a, 0))
        return [m], T.var(0), T.var(0)
    if tag == T.SIGMA:
        return _poly_sigma(th, ctx, a)
    if tag == T.PI:
        return _poly_pi(th, ctx, a)
    raise KernelError(f"not a type: {tag}")


def _poly_sigma(th: Theory, ctx: tuple[Expr, ...], a: Expr):
    A, B = a.args
    pa, fwdA, bwdA = _poly(th, ctx, A)
    ka = len(pa)
    tele_a = tuple(_entry_type(pa, k) for k in range(ka))
    # B over ctx+(x:A); re-express x through the collapsed values of pa
    x_val = inst_block(bwdA, (ltuple(_dvars(ka)),), ka)
    B2 = inst_block(B, (x_val,), ka)
    pb, fwdB, bwdB = _poly(th, ctx + tele_a, B2)
    kb = len(pb)
    monos = list(pa) + list(pb)

    # fwd : ctx+(p : Sigma(A,B)) |- collapsed
    p = T.var(0)
    va = inst_block(fwdA, (T.fst(p),), 1)
    spB = (T.snd(p),) + tuple(lproj(va, ka, ka - 1 - j) for j in range(ka))
    vb = inst_block(fwdB, spB, 1)
    if ka == 0:
        fwd = vb
    elif kb == 0:
        fwd = va
    else:
        acc = va
        for j in range(kb):
            acc = T.pair(acc, lproj(vb, kb, j))
        fwd = acc

    # bwd : ctx+(q : collapsed) |- Sigma(A,B)
    q = T.var(0)
    if kb == 0:
        qa, qb_parts = q, []
    elif ka == 0:
        qa, qb_parts = T.tt(), [lproj(q, kb, j) for j in range(kb)]
    else:
        qa = q
        for _ in range(kb):
            qa = T.fst(qa)
        qb_parts = [lproj(q, ka + kb, ka + j) for j in range(kb)]
    x_out = inst_block(bwdA, (qa,), 1)
    spB2 = (ltuple(tuple(qb_parts)),) + tuple(lproj(qa, ka, ka - 1 - j) for j in range(ka))
    y_out = inst_block(bwdB, spB2, 1)
    bwd = T.pair(x_out, y_out)
    return monos, fwd, bwd


def _entry_type(monos, k: int) -> Expr:
    """Type of the k-th telescope entry (the monomial collapsed), scoped
    over the ambient context plus the k earlier entries."""
    return monos[k].as_type()


def _poly_pi(th: Theory, ctx: tuple[Expr, ...], a: Expr):
    X, B = a.args
    rtele, riso = rep_telescope(th, ctx, X)
    ka = len(rtele)
    x_val = inst_block(riso.bwd, (ltuple(_dvars(ka)),), ka)
    B2 = inst_block(B, (x_val,), ka)
    pb, fwdB, bwdB = _poly(th, ctx + rtele, B2)
    k = len(pb)

    # Pi-lift each inner monomial: prefix the domain telescope; earlier
    # collapsed values b_t become applications of lifted functions F_t
    monos = []
    for j, m in enumerate(pb):
        sp = []
        for s in range(j):  # source b_{j-1-s}
            sp.append(T.apps(T.var(ka + s), *_dvars(ka)))
        for s in range(ka):  # D variables keep their relative position
            sp.append(T.var(s))
        spt = tuple(sp)
        new_params = [T.shift(rtele[i], j, i) for i in range(ka)]
        new_params += [inst_block(pt, spt, j + ka, depth=i)
                       for i, pt in enumerate(m.params)]
        new_head = inst_block(m.head, spt, j + ka, depth=len(m.params))
        monos.append(Mono(tuple(new_params), new_head))

    # fwd : ctx+(h : Pi(X,B)) |- collapsed
    # under ka lambdas the context is [ctx, h, D(ka)]
    x_from_d = inst_block(riso.bwd, (ltuple(_dvars(ka)),), ka + 1)
    xB_val = T.app(T.var(ka), x_from_d)
    spB = (xB_val,) + tuple(T.var(s) for s in range(ka))
    vB = inst_block(fwdB, spB, ka + 1)
    parts = tuple(T.lams(ka, lproj(vB, k, j)) for j in range(k))
    fwd = ltuple(parts)

    # bwd : ctx+(q : collapsed) |- Pi(X,B); inside the lambda: [ctx, q, x]
    dX = inst_block(riso.fwd, (T.var(0),), 2)
    d_parts = tuple(lproj(dX, ka, i) for i in range(ka))
    y_parts = tuple(T.apps(lproj(T.var(1), k, j), *d_parts) for j in range(k))
    spB2 = (ltuple(y_parts),) + tuple(d_parts[ka - 1 - i] for i in range(ka))
    body = inst_block(bwdB, spB2, 2)
    bwd = T.lam(body)
    return monos, fwd, bwd


def iso_roundtrip_ok(th: Theory, ctx: tuple[Expr, ...], a: Expr,
                     monos: tuple[Mono, ...], iso: Iso) -> bool:
    """defeq-check both round trips on a fresh variable."""
    la = poly_as_type(monos)
    rt1 = inst_block(iso.bwd, (iso.fwd,), 1)  # over ctx+(x:a)
    ok1 = th.defeq(ctx + (a,), rt1, T.var(0), T.shift(a, 1))
    rt2 = inst_block(iso.fwd, (iso.bwd,), 1)
    ok2 = th.defeq(ctx + (la,), rt2, T.var(0), T.shift(la, 1))
    return ok1 and ok2


def check_poly(th: Theory, ctx: tuple[Expr, ...], a: Expr,
               monos: tuple[Mono, ...], iso: Iso):
    """Typecheck the polynomial and both iso directions (debug aid)."""
    cur = ctx
    for k, m in enumerate(monos):
        th.check_telescope(cur, m.params, rep=True)
        th.check_type(cur + m.params, m.head)
        if m.head.tag != T.SORT:
            raise KernelError("monomial head is not a sort application")
        cur = cur + (m.as_type(),)
    la = poly_as_type(monos)
    th.check_type(ctx, la)
    th.check_term(ctx + (a,), iso.fwd, T.shift(la, 1))
    th.check_term(ctx + (la,), iso.bwd, T.shift(a, 1))

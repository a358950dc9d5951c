"""The external-univalence engine.

Builds contractibility witnesses by structural recursion on types,
derives reflexivity structures from congruence witnesses, synthesizes
centers and all-paths terms from the basic witness data, and assembles
the weakly stable identity-type structure (Id, refl, J, J-beta) plus
saturation and function-extensionality certificates.

Every goal the engine proves has the shape

    (y : A@value-leg) x REL(x, y)

where A is a type over some ambient context, an environment supplies
the ambient images (left leg, right leg, edge), REL is the edge
translation of A, and x is the fixed endpoint.  Unit goals are trivial,
sort goals are discharged by the basic witness clauses, Sigma goals
split into an interleaved pair, Pi goals reduce to the domain singleton
plus a family of codomain goals.  Transport, J-elimination and the
heterogeneous path composites are all instances of "prove a goal, take
its center or its all-paths term".
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms as T
from .graphmodel import MissingWitness, TEnv, Translator, _canon_env, _diag_of
from .kernel import FuelExhausted, KernelError, Theory
from .poly import lproj, ltuple, polynomialize
from .signature import Homotopy, RawWitness, resolve_term
from .terms import Expr


@dataclass(frozen=True)
class Obligation:
    kind: str    # missing-A1 | missing-A2 | missing-A3 | equation-mismatch |
                 # alignment-mismatch | undecided-defeq | ill-typed-witness
    name: str
    ctx: tuple = ()
    goal: Expr | None = None
    trail: tuple = ()

    def render(self) -> str:
        loc = f" [{' > '.join(map(str, self.trail))}]" if self.trail else ""
        g = f" : {T.to_sexpr(self.goal)}" if self.goal is not None else ""
        return f"{self.kind} {self.name}{g}{loc}"

    def sort_key(self):
        return (self.kind, self.name,
                T.to_sexpr(self.goal) if self.goal is not None else "")


class ObligationError(Exception):
    def __init__(self, ob: Obligation):
        super().__init__(ob.render())
        self.ob = ob


# -- contractibility witness tree ---------------------------------------------

@dataclass
class WUnit:
    ctx: tuple
    goal: Expr


@dataclass
class WBasic:
    ctx: tuple
    goal: Expr
    sort: str
    side: str          # l | r | sim
    fill_args: tuple   # terms instantiating the constructor context


@dataclass
class WSigma:
    ctx: tuple
    goal: Expr
    sub1: object
    sub2: object       # over ctx + (value, relation) of the first part
    srcB: Expr
    srcC: Expr
    env: TEnv
    x: Expr
    side: str
    flavor: str
    goal2_type: Expr   # sub2's goal over ctx + (bval, brel)


@dataclass
class WPi:
    ctx: tuple
    goal: Expr
    c_Y: object        # witness for the domain singleton (opposite side)
    inner: object      # witness over ctx + (xv, xo, xe)
    srcX: Expr
    srcC: Expr
    env: TEnv
    x: Expr
    side: str
    xv_ty: Expr        # domain at the value leg (over ctx)
    xo_ty: Expr        # domain at the endpoint leg (over ctx+1)
    xe_ty: Expr        # domain edge type (over ctx + xv + xo)


@dataclass(frozen=True)
class IntroCtx:
    ctx: tuple[Expr, ...]
    a: Expr            # type over ctx
    x: Expr            # term over ctx of type a


@dataclass(frozen=True)
class ElimCtx:
    delta: tuple[Expr, ...]
    gamma: tuple[Expr, ...]  # substitution delta -> intro ctx, telescope order
    motive: Expr             # type over delta + (y : a[gamma], p : Id)
    base: Expr               # term over delta of motive[y:=x, p:=refl]


class Engine:
    def __init__(self, th: Theory, hom: Homotopy, trans: Translator, raw: RawWitness):
        self.th = th
        self.hom = hom
        self.trans = trans
        self.raw = raw
        self.obligations: list[Obligation] = []
        self.cong: dict[str, tuple[Expr, Expr]] = {}
        self.center_cl: dict[tuple[str, str], Expr] = {}
        self.hpath_cl: dict[tuple[str, str], Expr] = {}
        self._refl_cache: dict = {}
        self._elaborate_witnesses()

    # ------------------------------------------------------------------ setup

    def _record(self, kind, name, ctx=(), goal=None, trail=()):
        ob = Obligation(kind, name, tuple(ctx), goal, tuple(trail))
        self.obligations.append(ob)
        return ob

    def _elaborate_witnesses(self):
        for kind, name, msg in self.trans.clause_errors:
            self._record("ill-typed-witness", f"{kind} {name}", trail=(msg,))
        for sname in self.th.sorts:
            if sname not in self.trans.sort_e and sname not in self.raw.sort_e:
                self._record("missing-A1", f"sort-E {sname}")
            if sname not in self.trans.sort_r and sname not in self.raw.sort_r:
                self._record("missing-A1", f"sort-R {sname}")
        for fname in self.th.ops:
            if fname not in self.trans.op_e and fname not in self.raw.op_e:
                goal = None
                try:
                    _, goal = self.trans.op_e_context_and_type(fname)
                except (MissingWitness, KernelError, FuelExhausted):
                    pass
                self._record("missing-A1", f"op-E {fname}", goal=goal)
            if fname not in self.trans.op_r and fname not in self.raw.op_r:
                self._record("missing-A1", f"op-R {fname}")
        for sname in self.th.sorts:
            raw = self.raw.cong_base.get(sname)
            if raw is None:
                continue
            namesE, bodyE, namesR, bodyR = raw
            try:
                ctx, apE_goal = self.cong_base_context_and_type(sname)
                if len(namesE) != len(ctx) or len(namesR) != len(ctx):
                    raise KernelError(
                        f"congruence {sname} expects {len(ctx)} binders")
                apE = resolve_term(bodyE, namesE, self.th, self.raw.macros)
                self.th.check_term(ctx, apE, apE_goal)
                apR_goal = self.cong_base_r_type(sname, apE)
                apR = resolve_term(bodyR, namesR, self.th, self.raw.macros)
                self.th.check_term(ctx, apR, apR_goal)
                self.cong[sname] = (apE, apR)
            except (KernelError, MissingWitness, FuelExhausted) as ex:
                self._record("ill-typed-witness", f"congruence {sname}", trail=(str(ex),))
        for (sname, side), (names, body) in self.raw.center.items():
            try:
                ctx, goal = self.constructor_context(sname, side)
                if len(names) != len(ctx):
                    raise KernelError(
                        f"basic-center {sname} {side} expects {len(ctx)} binders, "
                        f"got {len(names)}")
                t = resolve_term(body, names, self.th, self.raw.macros)
                self.th.check_term(ctx, t, goal)
                self.center_cl[(sname, side)] = t
            except (KernelError, MissingWitness, FuelExhausted) as ex:
                self._record("ill-typed-witness", f"basic-center {sname} {side}",
                             trail=(str(ex),))
        for (sname, side), (names, body) in self.raw.hpath.items():
            try:
                ctx, goal = self.hpath_context_and_type(sname, side)
                if len(names) != len(ctx):
                    raise KernelError(
                        f"basic-hpath {sname} {side} expects {len(ctx)} binders, "
                        f"got {len(names)}")
                t = resolve_term(body, names, self.th, self.raw.macros)
                self.th.check_term(ctx, t, goal)
                self.hpath_cl[(sname, side)] = t
            except (KernelError, MissingWitness, FuelExhausted) as ex:
                self._record("ill-typed-witness", f"basic-hpath {sname} {side}",
                             trail=(str(ex),))

    # ---------------------------------------------------- witness clause types

    def constructor_context(self, sname: str, side: str) -> tuple[tuple, Expr]:
        """Context of the basic contractibility constructor and the
        contracted Sigma-type over it."""
        tr = self.trans
        decl = self.th.sorts[sname]
        m = len(decl.boundary)
        generic = T.sort(sname, tuple(T.var(m - 1 - j) for j in range(m)))
        if side == "sim":
            ctx = decl.boundary + (generic,)
            spine1 = tuple(T.var(m - j) for j in range(m))
            goal = T.sigma(T.sort(sname, spine1), self.hom.rel[sname])
            return ctx, goal
        ew = tr.ew_telescope(decl.boundary)
        env = TEnv(tuple((T.var(2 * m + 2 + i), T.var(m + 2 + i), T.var(2 + i), 0)
                         for i in range(m)), 0)
        if side == "l":
            spine_l = tuple(T.var(3 * m - 1 - j) for j in range(m))
            ctx = ew + (T.sort(sname, spine_l),)
            spine_r = tuple(T.var(2 * m - j) for j in range(m))
            goal = T.sigma(T.sort(sname, spine_r),
                           tr.te(env, generic, T.var(1), T.var(0)))
            return ctx, goal
        spine_r0 = tuple(T.var(2 * m - 1 - j) for j in range(m))
        ctx = ew + (T.sort(sname, spine_r0),)
        spine_l = tuple(T.var(3 * m - j) for j in range(m))
        goal = T.sigma(T.sort(sname, spine_l),
                       tr.te(env, generic, T.var(0), T.var(1)))
        return ctx, goal

    def hpath_context_and_type(self, sname: str, side: str):
        ctx_c, goal_c = self.constructor_context(sname, side)
        n = len(ctx_c)
        rw = self.trans.rw_telescope(ctx_c)
        hctx = rw + (T.shift(goal_c, 2 * n), T.shift(goal_c, 2 * n + 1))
        env = TEnv(tuple((T.var(2 * n + 2 + i), T.var(2 * n + 2 + i),
                          T.var(n + 2 + i), 0) for i in range(n)), 0)
        hgoal = self.trans.te(env, goal_c, T.var(1), T.var(0))
        return hctx, hgoal

    def cong_base_context_and_type(self, sname: str):
        decl = self.th.sorts[sname]
        m = len(decl.boundary)
        rw = self.trans.rw_telescope(decl.boundary)
        spine_d = tuple(T.var(3 * m - 1 - j) for j in range(m))
        ctx = rw + (T.sort(sname, spine_d),)
        env = TEnv(tuple((T.var(2 * m + 1 + i), T.var(2 * m + 1 + i),
                          T.var(m + 1 + i), 0) for i in range(m)), 0)
        generic = T.sort(sname, tuple(T.var(m - 1 - j) for j in range(m)))
        goal = self.trans.te(env, generic, T.var(0), T.var(0))
        return ctx, goal

    def cong_base_r_type(self, sname: str, apE: Expr) -> Expr:
        decl = self.th.sorts[sname]
        m = len(decl.boundary)
        renv = TEnv(tuple((T.var(2 * m + 1 + i), T.var(m + 1 + i), T.var(1 + i), 0)
                          for i in range(m)), 0)
        generic = T.sort(sname, tuple(T.var(m - 1 - j) for j in range(m)))
        return self.trans.tr(renv, generic, T.var(0), apE)

    # ------------------------------------------------------- reflexivity

    def refl_et(self, renv: TEnv, a: Expr, val: Expr, trail=()) -> tuple[Expr, Expr]:
        """Reflexivity data (edge, loop) for a value of type a; renv carries
        (value, diagonal edge, loop) images for a's ambient variables."""
        tag = a.tag
        if tag == T.UNIT:
            return T.tt(), T.tt()
        if tag == T.SORT:
            name, spine = a.args
            cl = self.cong.get(name)
            if cl is None:
                goal = None
                try:
                    goal = self.trans.te(_diag_of(renv), a, val, val)
                except MissingWitness:
                    pass
                raise ObligationError(self._record(
                    "missing-A2", name, goal=goal, trail=tuple(trail) + ("refl",)))
            apE, apR = cl
            diag = _diag_of(renv)
            args = (tuple(self.trans._sub(renv, 0, s) for s in spine)
                    + tuple(self.trans.te_term(diag, s) for s in spine)
                    + tuple(self.trans.tr_term(renv, s) for s in spine)
                    + (val,))
            return T.fill(apE, args), T.fill(apR, args)
        if tag == T.PI:
            raise ObligationError(self._record(
                "missing-A2", f"pi-monomial {T.to_sexpr(a)}",
                trail=tuple(trail) + ("refl-pi",)))
        # Sigma (or unit-collapsed): polynomialize and recurse per monomial
        a_inst = self.trans._sub(renv, 0, a)
        n_amb = len(renv.entries)
        monos, iso = polynomialize(self.th, (), a_inst)
        v = T.sub1(T.shift(iso.fwd, 0, 1), val)
        K = len(monos)
        es, rs = [], []
        env2 = renv
        for k, m in enumerate(monos):
            vk = lproj(v, K, k) if K > 1 else v
            if m.params:
                raise ObligationError(self._record(
                    "missing-A2", f"pi-monomial {T.to_sexpr(m.as_type())}",
                    trail=tuple(trail) + ("refl-mono",)))
            ek, rk = self.refl_et(env2, m.head, vk, trail)
            es.append(ek)
            rs.append(rk)
            env2 = env2.extended(vk, ek, rk)
        e0 = ltuple(tuple(es))
        r0 = ltuple(tuple(rs))
        if iso.bwd is T.var(0):
            return e0, r0
        envE = _diag_of(renv).extended(v, v, e0)
        eA = self.trans.te_term(envE, iso.bwd)
        envR = renv.extended(v, e0, r0)
        rA = self.trans.tr_term(envR, iso.bwd)
        return eA, rA

    def refl_ctx(self, ctx: tuple[Expr, ...], trail=()):
        """Reflexivity data for every entry of a context.  Returns
        (edge terms, loop terms, diagonal E-env, R-env), all over ctx."""
        key = tuple(a.uid for a in ctx)
        hit = self._refl_cache.get(key)
        if hit is not None:
            return hit
        n = len(ctx)
        es: list[Expr] = []
        rs: list[Expr] = []
        for i, a in enumerate(ctx):
            a_full = T.shift(a, n - i)
            entries = []
            for v in range(n):
                k = n - 1 - v
                if k < i:
                    entries.append((T.var(v), es[k], rs[k], 0))
                else:  # not in scope for a_full; never consulted
                    entries.append((T.var(v), T.tt(), T.tt(), 0))
            renv = TEnv(tuple(entries), 0)
            val = T.var(n - 1 - i)
            e, r = self.refl_et(renv, a_full, val, tuple(trail) + (f"refl-ctx[{i}]",))
            es.append(e)
            rs.append(r)
        entries = tuple((T.var(v), es[n - 1 - v], rs[n - 1 - v], 0)
                        for v in range(n))
        renv = TEnv(entries, 0)
        env = _diag_of(renv)
        out = (tuple(es), tuple(rs), env, renv)
        self._refl_cache[key] = out
        return out

    # ------------------------------------------------------- goal proving

    def prove_goal(self, ctx: tuple, src: Expr, env: TEnv, x: Expr, side: str,
                   flavor: str = "full", trail=()):
        """Witness that (y : src@value-leg) x REL(x vs y) is contractible."""
        tag = src.tag
        value_leg = 1 if side == "l" else 0
        if tag == T.UNIT:
            return WUnit(ctx, T.sigma(T.unit(), T.unit()))
        if tag == T.SORT:
            name, _ = src.args
            goal = self._goal_type(ctx, src, env, x, side)
            if (name, side) not in self.center_cl:
                raise ObligationError(self._record(
                    "missing-A3", f"basic-center {name} {side}", ctx, goal, trail))
            fill_args = self._leaf_fill_args(env, src, x, side)
            return WBasic(ctx, goal, name, side, fill_args)
        if side == "sim":
            raise ObligationError(self._record(
                "missing-A3", f"sim goal on compound type {T.to_sexpr(src)}",
                ctx, None, trail))
        if tag == T.SIGMA:
            B, C = src.args
            sub1 = self.prove_goal(ctx, B, env, T.fst(x), side, flavor,
                                   tuple(trail) + ("sigma-fst",))
            bval_ty = self.trans._sub(env, value_leg, B)
            if side == "l":
                brel_ty = self.trans.te(env.shifted(1), B,
                                        T.fst(T.shift(x, 1)), T.var(0))
                env2 = env.shifted(2).extended(T.fst(T.shift(x, 2)), T.var(1), T.var(0))
            else:
                brel_ty = self.trans.te(env.shifted(1), B,
                                        T.var(0), T.fst(T.shift(x, 1)))
                env2 = env.shifted(2).extended(T.var(1), T.fst(T.shift(x, 2)), T.var(0))
            ctx2 = ctx + (bval_ty, brel_ty)
            sub2 = self.prove_goal(ctx2, C, env2, T.snd(T.shift(x, 2)), side, flavor,
                                   tuple(trail) + ("sigma-snd",))
            goal = self._goal_type(ctx, src, env, x, side)
            return WSigma(ctx, goal, sub1, sub2, B, C, env, x, side, flavor, sub2.goal)
        if tag == T.PI:
            if flavor == "rep":
                raise ObligationError(self._record(
                    "missing-A3", "Pi goal at representable flavor", ctx, None, trail))
            return self._prove_pi(ctx, src, env, x, side, trail)
        raise KernelError(f"not a type: {tag}")

    def _rel_of(self, env: TEnv, src: Expr, x: Expr, side: str) -> Expr:
        if side == "l":
            return self.trans.te(env.shifted(1), src, T.shift(x, 1), T.var(0))
        return self.trans.te(env.shifted(1), src, T.var(0), T.shift(x, 1))

    def _goal_type(self, ctx, src, env, x, side) -> Expr:
        if side == "sim":
            name, spine = src.args
            vspine = tuple(self.trans._sub(env, 0, s) for s in spine)
            val_ty = T.sort(name, vspine)
            rel = self.hom.rel[name]
            sp = (x,) + tuple(reversed(vspine))
            return T.sigma(val_ty, T.subst_spine(rel, sp, 1))
        value_leg = 1 if side == "l" else 0
        val_ty = self.trans._sub(env, value_leg, src)
        return T.sigma(val_ty, self._rel_of(env, src, x, side))

    def _leaf_fill_args(self, env: TEnv, src: Expr, x: Expr, side: str) -> tuple:
        _, spine = src.args
        if side == "sim":
            return tuple(self.trans._sub(env, 0, s) for s in spine) + (x,)
        return (tuple(self.trans._sub(env, 0, s) for s in spine)
                + tuple(self.trans._sub(env, 1, s) for s in spine)
                + tuple(self.trans.te_term(env, s) for s in spine)
                + (x,))

    def _prove_pi(self, ctx, src, env, x, side, trail):
        X, C = src.args
        value_leg = 1 if side == "l" else 0
        other_leg = 1 - value_leg
        xv_ty = self.trans._sub(env, value_leg, X)
        xo_ty = self.trans._sub(env.shifted(1), other_leg, X)
        if side == "l":
            xe_ty = self.trans.te(env.shifted(2), X, T.var(0), T.var(1))
        else:
            xe_ty = self.trans.te(env.shifted(2), X, T.var(1), T.var(0))
        opp = "r" if side == "l" else "l"
        c_Y = self.prove_goal(ctx + (xv_ty,), X, env.shifted(1), T.var(0), opp,
                              "rep", tuple(trail) + ("pi-domain",))
        if side == "l":
            env3 = env.shifted(3).extended(T.var(1), T.var(2), T.var(0))
        else:
            env3 = env.shifted(3).extended(T.var(2), T.var(1), T.var(0))
        inner = self.prove_goal(ctx + (xv_ty, xo_ty, xe_ty), C, env3,
                                T.app(T.shift(x, 3), T.var(1)), side, "full",
                                tuple(trail) + ("pi-codomain",))
        goal = self._goal_type(ctx, src, env, x, side)
        return WPi(ctx, goal, c_Y, inner, X, C, env, x, side, xv_ty, xo_ty, xe_ty)

    # ------------------------------------------------------------- centers

    def center(self, w, renv: TEnv | None = None) -> Expr:
        if isinstance(w, WUnit):
            return T.pair(T.tt(), T.tt())
        if isinstance(w, WBasic):
            return T.fill(self.center_cl[(w.sort, w.side)], w.fill_args)
        if isinstance(w, WSigma):
            c1 = self.center(w.sub1, renv)
            a, ra = T.fst(c1), T.snd(c1)
            c2 = T.subst_spine(self.center(w.sub2, _shift_renv(renv, 2)), (ra, a))
            return T.pair(T.pair(a, T.fst(c2)), T.pair(ra, T.snd(c2)))
        if isinstance(w, WPi):
            return self._center_pi(w, renv)
        raise TypeError(f"not a witness node: {w!r}")

    # ---------------------------------------------------------- all-paths

    def hpath(self, w, u: Expr, v: Expr, renv: TEnv) -> Expr:
        """Homogeneous all-paths: an element of TE(goal)(refl-env, u, v);
        renv carries the ambient reflexivity data."""
        if isinstance(w, WUnit):
            return T.pair(T.tt(), T.tt())
        if isinstance(w, WBasic):
            cl = self.hpath_cl.get((w.sort, w.side))
            if cl is None:
                raise ObligationError(self._record(
                    "missing-A3", f"basic-hpath {w.sort} {w.side}", w.ctx, w.goal))
            diag = _diag_of(renv)
            e_args = tuple(self.trans.te_term(diag, t) for t in w.fill_args)
            r_args = tuple(self.trans.tr_term(renv, t) for t in w.fill_args)
            return T.fill(cl, w.fill_args + e_args + r_args + (u, v))
        if isinstance(w, WSigma):
            u1 = T.pair(T.fst(T.fst(u)), T.fst(T.snd(u)))
            v1 = T.pair(T.fst(T.fst(v)), T.fst(T.snd(v)))
            hp1 = self.hpath(w.sub1, u1, v1, renv)
            u2 = T.pair(T.snd(T.fst(u)), T.snd(T.snd(u)))
            v2 = T.pair(T.snd(T.fst(v)), T.snd(T.snd(v)))
            het = self.hetpath_sigma(w, u, v, hp1, u2, v2, renv)
            return T.pair(T.pair(T.fst(hp1), T.fst(het)),
                          T.pair(T.snd(hp1), T.snd(het)))
        if isinstance(w, WPi):
            return self._hpath_pi(w, u, v, renv)
        raise TypeError(f"not a witness node: {w!r}")

    def hetpath_sigma(self, w: WSigma, u, v, ab_e, u2, v2, renv: TEnv) -> Expr:
        """Heterogeneous path for the second component over the first-part
        path ab_e: transport v2 backward along ab_e, connect to u2 inside
        the u-fiber, then push the connection across."""
        ctx = w.ctx
        a_u, ra_u = T.fst(T.fst(u)), T.fst(T.snd(u))
        a_v, ra_v = T.fst(T.fst(v)), T.fst(T.snd(v))
        G2 = w.goal2_type
        base = _diag_of(renv)
        envT = base.extended(a_u, a_v, T.fst(ab_e)).extended(ra_u, ra_v, T.snd(ab_e))
        bw = self.prove_goal(ctx, G2, envT, v2, "r", w.flavor, ("het-transport",))
        cbw = self.center(bw, renv)
        w0, tau0 = T.fst(cbw), T.snd(cbw)
        # homogeneous path inside the u-fiber
        env_u = (w.env.extended(T.fst(w.x), a_u, ra_u) if w.side == "l"
                 else w.env.extended(a_u, T.fst(w.x), ra_u))
        w2u = self.prove_goal(ctx, w.srcC, env_u, T.snd(w.x), w.side, w.flavor,
                              ("het-fiber",))
        path2 = self.hpath(w2u, u2, w0, renv)
        # push tau0 across path2 through the family IB(b) = TE(G2)(ab_e)(b, v2)
        envT1 = envT.shifted(1)
        IB = self.trans.te(envT1, G2, T.var(0), T.shift(v2, 1))
        envI = base.extended(u2, w0, path2)
        bw2 = self.prove_goal(ctx, IB, envI, tau0, "r", w.flavor, ("het-compose",))
        c2 = self.center(bw2, renv)
        return T.fst(c2)

    def _center_pi(self, w: WPi, renv: TEnv | None) -> Expr:
        """Center of a Pi goal: the pointwise center of the codomain goal at
        the domain singleton's center, with its relation part transported to
        the generic domain pair along the singleton's all-paths term."""
        if renv is None:
            raise ObligationError(self._record(
                "missing-A3", "Pi center needs ambient reflexivity data",
                w.ctx, w.goal, ("pi-center",)))
        # function part, over ctx + (xv)
        y0 = self.center(w.c_Y, renv.pushed(1))
        ci = self.center(w.inner, renv.pushed(3))
        ci0 = T.subst_spine(ci, (T.snd(y0), T.fst(y0)))
        a0, b0 = T.fst(ci0), T.snd(ci0)
        F = T.lam(a0)
        # relation part, over Gctx = ctx + (x_l, x_r, x_e)
        gctx = self._pi_gctx(w)
        renvG = self.refl_ctx(gctx, ("pi-gctx",))[3]
        xv_img = T.var(1) if w.side == "l" else T.var(2)
        y0G = T.subst_spine(T.shift(y0, 3, 1), (xv_img,))
        a0G = T.subst_spine(T.shift(a0, 3, 1), (xv_img,))
        b0G = T.subst_spine(T.shift(b0, 3, 1), (xv_img,))
        opp = "r" if w.side == "l" else "l"
        cYG = self.prove_goal(gctx, w.srcX, w.env.shifted(3), xv_img, opp,
                              "rep", ("pi-center-Y",))
        ypair = (T.pair(T.var(2), T.var(0)) if w.side == "l"
                 else T.pair(T.var(1), T.var(0)))
        pY = self.hpath(cYG, y0G, ypair, renvG)
        # transport the relation through the codomain family along pY
        if w.side == "l":
            envC = w.env.shifted(4).extended(T.fst(T.var(0)), T.var(2), T.snd(T.var(0)))
            Bfam = self.trans.te(envC, w.srcC,
                                 T.app(T.shift(w.x, 4), T.fst(T.var(0))),
                                 T.shift(a0G, 1))
        else:
            envC = w.env.shifted(4).extended(T.var(3), T.fst(T.var(0)), T.snd(T.var(0)))
            Bfam = self.trans.te(envC, w.srcC, T.shift(a0G, 1),
                                 T.app(T.shift(w.x, 4), T.fst(T.var(0))))
        envTB = _diag_of(renvG).extended(y0G, ypair, pY)
        wB = self.prove_goal(gctx, Bfam, envTB, b0G, "l", "full",
                             ("pi-center-transport",))
        t = T.fst(self.center(wB, renvG))
        return T.pair(F, T.lams(3, t))

    def _pi_gctx(self, w: WPi) -> tuple:
        """ctx extended by the relation part's binders (x_l, x_r, x_e)."""
        return w.ctx + (self.trans._sub(w.env, 0, w.srcX),
                        self.trans._sub(w.env.shifted(1), 1, w.srcX),
                        self.trans.te(w.env.shifted(2), w.srcX,
                                      T.var(1), T.var(0)))

    def _hpath_pi(self, w: WPi, u, v, renv: TEnv) -> Expr:
        """All-paths of a Pi goal needs square fillers over the relation
        component (paths between paths); Pi all-paths synthesis beyond the
        function direction is not derivable from the first-order witness
        clauses and is reported as an obligation."""
        raise ObligationError(self._record(
            "missing-A3",
            "second-order square synthesis (Pi all-paths relation component)",
            w.ctx, w.goal, ("pi-hpath",)))

    # ------------------------------------------------------- identity types

    def id_type(self, ctx: tuple, a: Expr) -> Expr:
        """Id over ctx + (x : a, y : a)."""
        _, _, env, _ = self.refl_ctx(ctx)
        return self.trans.te(env.shifted(2), a, T.var(1), T.var(0))

    def refl_term(self, ctx: tuple, a: Expr, x: Expr) -> Expr:
        _, _, _, renv = self.refl_ctx(ctx)
        return self.refl_et(renv, a, x)[0]

    def _gamma_env(self, intro: IntroCtx, elim: ElimCtx):
        """E/R environments over delta for the intro context's variables,
        with edges given by the substituted reflexivity structure."""
        n = len(intro.ctx)
        es, rs, _, _ = self.refl_ctx(intro.ctx, ("intro",))
        g = elim.gamma
        entries_e = []
        entries_r = []
        for i in range(n):  # var i of intro.ctx is entry n-1-i
            k = n - 1 - i
            val = g[k]
            e_img = T.fill(es[k], g)
            r_img = T.fill(rs[k], g)
            entries_e.append((val, val, e_img, 0))
            entries_r.append((val, e_img, r_img, 0))
        return TEnv(tuple(entries_e), 0), TEnv(tuple(entries_r), 0)

    def synthesize_j(self, intro: IntroCtx, elim: ElimCtx):
        """Returns a dict with the Id type, refl, J and J-beta terms for the
        given introduction and elimination contexts, each kernel-checked."""
        th = self.th
        delta = elim.delta
        envG, renvG = self._gamma_env(intro, elim)
        _, _, envD, renvD = self.refl_ctx(delta, ("elim",))
        a_g = T.subst_spine(intro.a, envG.spine(0))
        x_g = T.fill(intro.x, elim.gamma)
        e_x, _r_x = self.refl_et(renvG, intro.a, x_g, ("refl-x",))
        id_y = self.trans.te(envG.shifted(1), intro.a, T.shift(x_g, 1), T.var(0))

        wS = self.prove_goal(delta, intro.a, envG, x_g, "l", "full", ("singleton",))
        a_pair = T.pair(x_g, e_x)
        hp_aa = self.hpath(wS, a_pair, a_pair, renvD)

        # backward transport of the base across T(a,a)
        envP_back = (envD.extended(x_g, x_g, T.fst(hp_aa))
                     .extended(e_x, e_x, T.snd(hp_aa)))
        wd = self.prove_goal(delta, elim.motive, envP_back, elim.base, "r",
                             "full", ("j-backward",))
        cbw = self.center(wd, renvD)
        d_prime = T.fst(cbw)

        # forward transport to the generic fiber, over delta + (y, p)
        wS2 = _shift_node(wS, 2)
        hp_ay = self.hpath(wS2, T.shift(a_pair, 2), T.pair(T.var(1), T.var(0)),
                           _shift_renv(renvD, 2))
        envP_fwd = (envD.shifted(2)
                    .extended(T.shift(x_g, 2), T.var(1), T.fst(hp_ay))
                    .extended(T.shift(e_x, 2), T.var(0), T.snd(hp_ay)))
        wj = self.prove_goal(delta + (a_g, id_y), elim.motive, envP_fwd,
                             T.shift(d_prime, 2), "l", "full", ("j-forward",))
        j_term = T.fst(self.center(wj, _shift_renv(renvD, 2)))

        # J-beta: all-paths of the forward goal at the diagonal fiber
        wja = self.prove_goal(delta, elim.motive, envP_back, d_prime, "l",
                              "full", ("jbeta",))
        c_a = self.center(wja, renvD)
        u1 = T.pair(elim.base, T.snd(cbw))
        jb = self.hpath(wja, c_a, u1, renvD)
        jbeta_term = T.fst(jb)

        # the motive at the reflexivity fiber, and every kernel check
        # (the universal postcondition: emitted terms typecheck)
        p_a = T.subst_spine(elim.motive, (e_x, x_g))
        id_pa = self.id_type(delta, p_a)
        th.check_type(delta + (a_g,), id_y)
        th.check_term(delta, e_x, T.sub1(id_y, x_g))
        th.check_type(delta + (a_g, id_y), elim.motive)
        th.check_term(delta + (a_g, id_y), j_term, elim.motive)
        j_at_a = T.subst_spine(j_term, (e_x, x_g))
        jb_ty = T.subst_spine(id_pa, (elim.base, j_at_a))
        th.check_term(delta, jbeta_term, jb_ty)
        return {
            "id": id_y,
            "refl": e_x,
            "j": j_term,
            "jbeta": jbeta_term,
            "motive_at_refl": p_a,
        }

    def id_type_over(self, ctx: tuple, a: Expr) -> Expr:
        """Id of a over ctx, as a type over ctx + (x, y)."""
        return self.id_type(ctx, a)

    # ------------------------------------------------------------ transport

    def transport(self, ctx: tuple, a: Expr, fam: Expr, x: Expr, y: Expr,
                  e: Expr, u: Expr):
        """fam is a type over ctx + (v : a); e relates x and y at the
        identity type of a; returns (transported term, path, its type)."""
        _, _, envD, renvD = self.refl_ctx(ctx, ("transport",))
        envF = envD.extended(x, y, e)
        w = self.prove_goal(ctx, fam, envF, u, "l", "full", ("transport",))
        c = self.center(w, renvD)
        out = T.fst(c)
        fam_y = T.sub1(fam, y)
        self.th.check_term(ctx, out, fam_y)
        return out, T.snd(c), fam_y

    # ------------------------------------------------------------ reports

    def check_equations(self):
        tr = self.trans
        for eq in self.th.eqs:
            n = len(eq.ctx)
            env = _canon_env(n)
            try:
                lhs_e = tr.te_term(env, eq.lhs)
                rhs_e = tr.te_term(env, eq.rhs)
                ew = tr.ew_telescope(eq.ctx)
                ty_e = tr.te(env, eq.ty, tr._sub(env, 0, eq.lhs),
                             tr._sub(env, 1, eq.lhs))
                if not self.th.defeq(ew, lhs_e, rhs_e, ty_e):
                    self._record("equation-mismatch", f"{eq.name} (edge)", ew, ty_e)
            except MissingWitness:
                pass
            except FuelExhausted:
                self._record("undecided-defeq", f"{eq.name} (edge)")
            try:
                envr = _canon_env(n)
                lhs_r = tr.tr_term(envr, eq.lhs)
                rhs_r = tr.tr_term(envr, eq.rhs)
                rw = tr.rw_telescope(eq.ctx)
                ty_r = tr.tr(envr, eq.ty, tr._sub(envr, 0, eq.lhs),
                             tr.te_term(_diag_of(envr), eq.lhs))
                if not self.th.defeq(rw, lhs_r, rhs_r, ty_r):
                    self._record("equation-mismatch", f"{eq.name} (loop)", rw, ty_r)
            except MissingWitness:
                pass
            except FuelExhausted:
                self._record("undecided-defeq", f"{eq.name} (loop)")

    def check_alignment(self):
        """The edge component of each sort at the reflexive diagonal must be
        definitionally the declared homotopy relation."""
        for sname, decl in self.th.sorts.items():
            if sname not in self.hom.rel or sname not in self.trans.sort_e:
                continue
            m = len(decl.boundary)
            generic = T.sort(sname, tuple(T.var(m - 1 - j) for j in range(m)))
            ctx = decl.boundary + (generic, T.shift(generic, 1))
            try:
                es, _, _, _ = self.refl_ctx(decl.boundary, ("alignment", sname))
            except ObligationError:
                continue
            # edge image of boundary var i: the reflexivity edge of entry
            # m-1-i, moved from the boundary into boundary+(x,y)
            entries = []
            for i in range(m):
                e_full = es[m - 1 - i]  # already over the full boundary
                entries.append((T.var(2 + i), T.var(2 + i), T.shift(e_full, 2), 0))
            env = TEnv(tuple(entries), 0)
            try:
                lhs = self.trans.te(env, generic, T.var(1), T.var(0))
            except MissingWitness:
                continue
            try:
                if not self.th.defeq_type(ctx, lhs, self.hom.rel[sname]):
                    self._record("alignment-mismatch", sname, ctx, lhs)
            except FuelExhausted:
                self._record("undecided-defeq", f"alignment {sname}")

    def check_saturation(self):
        """For every sort: the singleton at the declared relation is
        contractible, with typechecking center and all-paths terms."""
        results = {}
        for sname, decl in self.th.sorts.items():
            m = len(decl.boundary)
            generic = T.sort(sname, tuple(T.var(m - 1 - j) for j in range(m)))
            ctx = decl.boundary + (generic,)
            try:
                _, _, env, renv = self.refl_ctx(ctx, ("saturation", sname))
                w = self.prove_goal(ctx, T.shift(generic, 1), env, T.var(0),
                                    "sim", "full", ("saturation", sname))
                c = self.center(w, renv)
                self.th.check_term(ctx, c, w.goal)
                hctx = ctx + (w.goal, T.shift(w.goal, 1))
                w2 = _shift_node(w, 2)
                hp = self.hpath(w2, T.var(1), T.var(0), _shift_renv(renv, 2))
                ghty = self.trans.te(env.shifted(2), w.goal, T.var(1), T.var(0))
                self.th.check_term(hctx, hp, ghty)
                results[sname] = True
            except (ObligationError, MissingWitness):
                results[sname] = False
            except (KernelError, FuelExhausted) as ex:
                self._record("ill-typed-witness", f"saturation {sname}",
                             trail=(str(ex),))
                results[sname] = False
        return results


def _shift_renv(env: TEnv, d: int) -> TEnv:
    """Environment matching a witness tree shifted by d (see _shift_node)."""
    return env.pushed(d)


def _shift_node(w, d: int):
    """Shift a witness tree into a context extended below by d entries."""
    if isinstance(w, WUnit):
        return WUnit(w.ctx, w.goal)
    if isinstance(w, WBasic):
        return WBasic(w.ctx, T.shift(w.goal, d), w.sort, w.side,
                      tuple(T.shift(t, d) for t in w.fill_args))
    if isinstance(w, WSigma):
        return WSigma(w.ctx, T.shift(w.goal, d),
                      _shift_node(w.sub1, d), _shift_node(w.sub2, d),
                      w.srcB, w.srcC, w.env.shifted(d), T.shift(w.x, d),
                      w.side, w.flavor, T.shift(w.goal2_type, d, 2))
    if isinstance(w, WPi):
        return WPi(w.ctx, T.shift(w.goal, d),
                   _shift_node(w.c_Y, d), _shift_node(w.inner, d),
                   w.srcX, w.srcC, w.env.shifted(d), T.shift(w.x, d), w.side,
                   T.shift(w.xv_ty, d), T.shift(w.xo_ty, d, 1),
                   T.shift(w.xe_ty, d, 2))
    raise TypeError(f"not a witness node: {w!r}")

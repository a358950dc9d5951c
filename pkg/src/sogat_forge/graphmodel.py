"""The pre-reflexive-graph translation.

Every context, type and term of a theory gets three components:

* V -- the thing itself;
* E -- its edge (relatedness) component, living over a doubled context
  plus edge data for every entry;
* R -- its reflexive-loop component, living over the diagonal context
  plus diagonal edge data and loop data for every entry.

Canonical contexts (n = len(ctx)):

  EW(ctx) = ctx_l ++ ctx_r ++ [E_0..E_{n-1}]          (3n entries)
  RW(ctx) = ctx   ++ [Ediag_0..]  ++ [R_0..R_{n-1}]   (3n entries)

The E-component of a type A over ctx lives over EW(ctx)+(a_l, a_r); the
R-component over RW(ctx)+(a, a_e).  E/R components of terms live over
EW(ctx) / RW(ctx).  Unit, Sigma and Pi translate structurally; sort
applications and operations are interpreted by user-supplied witness
clauses, whose absence degrades to recorded obligations rather than
failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import terms as T
from .kernel import KernelError, Theory
from .signature import Homotopy, RawWitness, resolve_term, resolve_type
from .terms import Expr


class MissingWitness(Exception):
    def __init__(self, kind: str, name: str):
        super().__init__(f"missing witness clause {kind} for '{name}'")
        self.kind = kind
        self.name = name


@dataclass(frozen=True)
class ReedyTriple:
    """The (V, E, R) assignment of the translation; `kind` is one of
    "ctx" (telescope components), "type" or "term"."""
    kind: str
    V: object
    E: object
    R: object


class TEnv:
    """Images of the ambient variables in the current target context.

    Entry i (for var(i)) holds three image terms; for the E-translation
    they are (left copy, right copy, edge), for the R-translation
    (diagonal value, diagonal edge, loop).  Each entry remembers the
    depth it was written at; lookups shift by the difference.
    """

    __slots__ = ("entries", "depth", "_key")

    def __init__(self, entries: tuple, depth: int):
        self.entries = entries
        self.depth = depth
        self._key = (depth,) + tuple((a.uid, b.uid, c.uid, d) for a, b, c, d in entries)

    @property
    def key(self):
        return self._key

    def shifted(self, k: int) -> "TEnv":
        return TEnv(self.entries, self.depth + k)

    def extended(self, a: Expr, b: Expr, c: Expr) -> "TEnv":
        return TEnv(((a, b, c, self.depth),) + self.entries, self.depth)

    def pushed(self, k: int) -> "TEnv":
        """Domain shift: source terms were shifted up by k, so var(i+k) now
        looks up the old entry i; the k fresh slots must never be consulted."""
        poison = (T.tt(), T.tt(), T.tt(), 0)
        return TEnv((poison,) * k + self.entries, self.depth + k)

    def img(self, which: int, i: int) -> Expr:
        e = self.entries[i]
        return T.shift(e[which], self.depth - e[3])

    def spine(self, which: int) -> tuple[Expr, ...]:
        return tuple(T.shift(e[which], self.depth - e[3]) for e in self.entries)


def _canon_env(n: int) -> TEnv:
    entries = tuple((T.var(2 * n + i), T.var(n + i), T.var(i), 0) for i in range(n))
    return TEnv(entries, 0)


def _diag_of(env: TEnv) -> TEnv:
    """Entries of an R-env are (value, diagonal edge, loop); the matching
    diagonal E-env is (value, value, diagonal edge)."""
    return TEnv(tuple((a, a, b, d) for a, b, _c, d in env.entries), env.depth)


class Translator:
    """Elaborates witness clauses and performs the translation."""

    def __init__(self, th: Theory, hom: Homotopy, raw: RawWitness | None = None):
        self.th = th
        self.hom = hom
        self.raw = raw
        self.sort_e: dict[str, Expr] = {}
        self.sort_r: dict[str, Expr] = {}
        self.op_e: dict[str, Expr] = {}
        self.op_r: dict[str, Expr] = {}
        self.clause_errors: list[tuple[str, str, str]] = []  # (kind, name, message)
        self._te_cache: dict = {}
        self._tr_cache: dict = {}
        self._tet_cache: dict = {}
        self._trt_cache: dict = {}
        self._sub_cache: dict = {}
        if raw is not None:
            self._elaborate_clauses()

    # -- substitution along one leg --------------------------------------

    def _sub(self, env: TEnv, which: int, e: Expr) -> Expr:
        key = (env.key, which, e.uid)
        hit = self._sub_cache.get(key)
        if hit is None:
            hit = T.subst_spine(e, env.spine(which))
            self._sub_cache[key] = hit
        return hit

    # -- E-translation ----------------------------------------------------

    def te(self, env: TEnv, a: Expr, al: Expr, ar: Expr) -> Expr:
        key = (env.key, a.uid, al.uid, ar.uid)
        hit = self._te_cache.get(key)
        if hit is not None:
            return hit
        tag = a.tag
        if tag == T.UNIT:
            out = T.unit()
        elif tag == T.SORT:
            name, spine = a.args
            clause = self.sort_e.get(name)
            if clause is None:
                raise MissingWitness("sort-E", name)
            args = (tuple(self._sub(env, 0, s) for s in spine)
                    + tuple(self._sub(env, 1, s) for s in spine)
                    + tuple(self.te_term(env, s) for s in spine)
                    + (al, ar))
            out = T.fill(clause, args)
        elif tag == T.SIGMA:
            B, C = a.args
            tb = self.te(env, B, T.fst(al), T.fst(ar))
            env1 = env.shifted(1).extended(T.fst(T.shift(al, 1)), T.fst(T.shift(ar, 1)), T.var(0))
            tc = self.te(env1, C, T.snd(T.shift(al, 1)), T.snd(T.shift(ar, 1)))
            out = T.sigma(tb, tc)
        elif tag == T.PI:
            X, C = a.args
            dom_l = self._sub(env, 0, X)
            dom_r = self._sub(env.shifted(1), 1, X)
            dom_e = self.te(env.shifted(2), X, T.var(1), T.var(0))
            env3 = env.shifted(3).extended(T.var(2), T.var(1), T.var(0))
            body = self.te(env3, C, T.app(T.shift(al, 3), T.var(2)),
                           T.app(T.shift(ar, 3), T.var(1)))
            out = T.pi(dom_l, T.pi(dom_r, T.pi(dom_e, body)))
        else:
            raise KernelError(f"not a type: {tag}")
        self._te_cache[key] = out
        return out

    def te_term(self, env: TEnv, t: Expr) -> Expr:
        key = (env.key, t.uid)
        hit = self._tet_cache.get(key)
        if hit is not None:
            return hit
        tag = t.tag
        if tag == T.VAR:
            out = env.img(2, t.args[0])
        elif tag == T.OP:
            name, spine = t.args
            clause = self.op_e.get(name)
            if clause is None:
                raise MissingWitness("op-E", name)
            args = (tuple(self._sub(env, 0, s) for s in spine)
                    + tuple(self._sub(env, 1, s) for s in spine)
                    + tuple(self.te_term(env, s) for s in spine))
            out = T.fill(clause, args)
        elif tag == T.LAM:
            env3 = env.shifted(3).extended(T.var(2), T.var(1), T.var(0))
            out = T.lams(3, self.te_term(env3, t.args[0]))
        elif tag == T.APP:
            f, u = t.args
            out = T.apps(self.te_term(env, f), self._sub(env, 0, u),
                         self._sub(env, 1, u), self.te_term(env, u))
        elif tag == T.PAIR:
            out = T.pair(self.te_term(env, t.args[0]), self.te_term(env, t.args[1]))
        elif tag == T.FST:
            out = T.fst(self.te_term(env, t.args[0]))
        elif tag == T.SND:
            out = T.snd(self.te_term(env, t.args[0]))
        elif tag == T.TT:
            out = T.tt()
        else:
            raise KernelError(f"not a term: {tag}")
        self._tet_cache[key] = out
        return out

    # -- R-translation ----------------------------------------------------

    def tr(self, env: TEnv, a: Expr, av: Expr, ae: Expr) -> Expr:
        key = (env.key, a.uid, av.uid, ae.uid)
        hit = self._tr_cache.get(key)
        if hit is not None:
            return hit
        tag = a.tag
        if tag == T.UNIT:
            out = T.unit()
        elif tag == T.SORT:
            name, spine = a.args
            clause = self.sort_r.get(name)
            if clause is None:
                raise MissingWitness("sort-R", name)
            diag = _diag_of(env)
            args = (tuple(self._sub(env, 0, s) for s in spine)
                    + tuple(self.te_term(diag, s) for s in spine)
                    + tuple(self.tr_term(env, s) for s in spine)
                    + (av, ae))
            out = T.fill(clause, args)
        elif tag == T.SIGMA:
            B, C = a.args
            tb = self.tr(env, B, T.fst(av), T.fst(ae))
            env1 = env.shifted(1).extended(T.fst(T.shift(av, 1)), T.fst(T.shift(ae, 1)), T.var(0))
            tc = self.tr(env1, C, T.snd(T.shift(av, 1)), T.snd(T.shift(ae, 1)))
            out = T.sigma(tb, tc)
        elif tag == T.PI:
            X, C = a.args
            dom_v = self._sub(env, 0, X)
            dom_e = self.te(_diag_of(env).shifted(1), X, T.var(0), T.var(0))
            dom_r = self.tr(env.shifted(2), X, T.var(1), T.var(0))
            env3 = env.shifted(3).extended(T.var(2), T.var(1), T.var(0))
            body = self.tr(env3, C, T.app(T.shift(av, 3), T.var(2)),
                           T.apps(T.shift(ae, 3), T.var(2), T.var(2), T.var(1)))
            out = T.pi(dom_v, T.pi(dom_e, T.pi(dom_r, body)))
        else:
            raise KernelError(f"not a type: {tag}")
        self._tr_cache[key] = out
        return out

    def tr_term(self, env: TEnv, t: Expr) -> Expr:
        key = (env.key, t.uid)
        hit = self._trt_cache.get(key)
        if hit is not None:
            return hit
        tag = t.tag
        if tag == T.VAR:
            out = env.img(2, t.args[0])
        elif tag == T.OP:
            name, spine = t.args
            clause = self.op_r.get(name)
            if clause is None:
                raise MissingWitness("op-R", name)
            diag = _diag_of(env)
            args = (tuple(self._sub(env, 0, s) for s in spine)
                    + tuple(self.te_term(diag, s) for s in spine)
                    + tuple(self.tr_term(env, s) for s in spine))
            out = T.fill(clause, args)
        elif tag == T.LAM:
            env3 = env.shifted(3).extended(T.var(2), T.var(1), T.var(0))
            out = T.lams(3, self.tr_term(env3, t.args[0]))
        elif tag == T.APP:
            f, u = t.args
            diag = _diag_of(env)
            out = T.apps(self.tr_term(env, f), self._sub(env, 0, u),
                         self.te_term(diag, u), self.tr_term(env, u))
        elif tag == T.PAIR:
            out = T.pair(self.tr_term(env, t.args[0]), self.tr_term(env, t.args[1]))
        elif tag == T.FST:
            out = T.fst(self.tr_term(env, t.args[0]))
        elif tag == T.SND:
            out = T.snd(self.tr_term(env, t.args[0]))
        elif tag == T.TT:
            out = T.tt()
        else:
            raise KernelError(f"not a term: {tag}")
        self._trt_cache[key] = out
        return out

    # -- canonical contexts ------------------------------------------------

    def ew_telescope(self, ctx: tuple[Expr, ...]) -> tuple[Expr, ...]:
        """ctx_l ++ ctx_r ++ edge entries."""
        n = len(ctx)
        env = _canon_env(n)
        out = list(ctx) + list(ctx)
        for i, a in enumerate(ctx):
            out.append(self.te(env, a, T.var(2 * n - 1), T.var(n - 1)))
        return tuple(out)

    def rw_telescope(self, ctx: tuple[Expr, ...]) -> tuple[Expr, ...]:
        """ctx ++ diagonal edge entries ++ loop entries."""
        n = len(ctx)
        diag_env = TEnv(tuple((T.var(n + i), T.var(n + i), T.var(i), 0)
                              for i in range(n)), 0)
        env = _canon_env(n)
        out = list(ctx)
        for i, a in enumerate(ctx):
            out.append(self.te(diag_env, a, T.var(n - 1), T.var(n - 1)))
        for i, a in enumerate(ctx):
            out.append(self.tr(env, a, T.var(2 * n - 1), T.var(n - 1)))
        return tuple(out)

    def translate_ctx(self, ctx: tuple[Expr, ...]) -> ReedyTriple:
        n = len(ctx)
        return ReedyTriple("ctx", tuple(ctx),
                           self.ew_telescope(ctx)[2 * n:],
                           self.rw_telescope(ctx)[2 * n:])

    def translate_type(self, ctx: tuple[Expr, ...], a: Expr) -> ReedyTriple:
        n = len(ctx)
        env = _canon_env(n)
        e = self.te(env.shifted(2), a, T.var(1), T.var(0))
        r = self.tr(env.shifted(2), a, T.var(1), T.var(0))
        return ReedyTriple("type", a, e, r)

    def translate_term(self, ctx: tuple[Expr, ...], t: Expr) -> ReedyTriple:
        n = len(ctx)
        env = _canon_env(n)
        return ReedyTriple("term", t, self.te_term(env, t), self.tr_term(env, t))

    # -- expected contexts and types of witness clauses ---------------------

    def sort_e_context(self, sname: str) -> tuple[Expr, ...]:
        decl = self.th.sorts[sname]
        m = len(decl.boundary)
        ew = self.ew_telescope(decl.boundary)
        spine_l = tuple(T.var(3 * m - 1 - j) for j in range(m))
        spine_r = tuple(T.var(2 * m - j) for j in range(m))
        xl = T.sort(sname, spine_l)
        xr = T.sort(sname, spine_r)
        return ew + (xl, xr)

    def sort_r_context(self, sname: str) -> tuple[Expr, ...]:
        decl = self.th.sorts[sname]
        m = len(decl.boundary)
        rw = self.rw_telescope(decl.boundary)
        spine_d = tuple(T.var(3 * m - 1 - j) for j in range(m))
        xv = T.sort(sname, spine_d)
        # the edge entry's type lives over rw + (xv): values at 2m+1+i,
        # diagonal edges at m+1+i (counting from the inside)
        diag_env = TEnv(tuple((T.var(2 * m + 1 + i), T.var(2 * m + 1 + i),
                               T.var(m + 1 + i), 0) for i in range(m)), 0)
        xe = self.te(diag_env, T.sort(sname, tuple(T.var(m - 1 - j) for j in range(m))),
                     T.var(0), T.var(0))
        return rw + (xv, xe)

    def op_e_context_and_type(self, fname: str) -> tuple[tuple[Expr, ...], Expr]:
        decl = self.th.ops[fname]
        p = len(decl.params)
        ew = self.ew_telescope(decl.params)
        env = _canon_env(p)
        vars_ = tuple(T.var(p - 1 - j) for j in range(p))
        al = self._sub(env, 0, T.op(fname, vars_))
        ar = self._sub(env, 1, T.op(fname, vars_))
        goal = self.te(env, decl.result, al, ar)
        return ew, goal

    def op_r_context_and_type(self, fname: str) -> tuple[tuple[Expr, ...], Expr]:
        decl = self.th.ops[fname]
        p = len(decl.params)
        rw = self.rw_telescope(decl.params)
        env = _canon_env(p)
        vars_ = tuple(T.var(p - 1 - j) for j in range(p))
        av = self._sub(env, 0, T.op(fname, vars_))
        ae = self.te_term(_diag_of(env), T.op(fname, vars_))
        goal = self.tr(env, decl.result, av, ae)
        return rw, goal

    # -- clause elaboration --------------------------------------------------

    def _elaborate_clauses(self):
        th, raw = self.th, self.raw
        for sname, decl in th.sorts.items():
            m = len(decl.boundary)
            if sname in raw.sort_e:
                names, body = raw.sort_e[sname]
                try:
                    ctx = self.sort_e_context(sname)
                    if len(names) != len(ctx):
                        raise KernelError(
                            f"sort-E {sname} expects {len(ctx)} binders, got {len(names)}")
                    e = resolve_type(body, names, th, raw.macros)
                    th.check_type(ctx, e, rep=decl.rep)
                    self.sort_e[sname] = e
                except (KernelError, MissingWitness) as ex:
                    self.clause_errors.append(("sort-E", sname, str(ex)))
            if sname in raw.sort_r:
                names, body = raw.sort_r[sname]
                try:
                    ctx = self.sort_r_context(sname)
                    if len(names) != len(ctx):
                        raise KernelError(
                            f"sort-R {sname} expects {len(ctx)} binders, got {len(names)}")
                    r = resolve_type(body, names, th, raw.macros)
                    th.check_type(ctx, r, rep=decl.rep)
                    self.sort_r[sname] = r
                except (KernelError, MissingWitness) as ex:
                    self.clause_errors.append(("sort-R", sname, str(ex)))
        for fname in th.ops:
            if fname in raw.op_e:
                names, body = raw.op_e[fname]
                try:
                    ctx, goal = self.op_e_context_and_type(fname)
                    if len(names) != len(ctx):
                        raise KernelError(
                            f"op-E {fname} expects {len(ctx)} binders, got {len(names)}")
                    e = resolve_term(body, names, th, raw.macros)
                    th.check_term(ctx, e, goal)
                    self.op_e[fname] = e
                except (KernelError, MissingWitness) as ex:
                    self.clause_errors.append(("op-E", fname, str(ex)))
        for fname in th.ops:
            if fname in raw.op_r:
                names, body = raw.op_r[fname]
                try:
                    ctx, goal = self.op_r_context_and_type(fname)
                    if len(names) != len(ctx):
                        raise KernelError(
                            f"op-R {fname} expects {len(ctx)} binders, got {len(names)}")
                    r = resolve_term(body, names, th, raw.macros)
                    th.check_term(ctx, r, goal)
                    self.op_r[fname] = r
                except (KernelError, MissingWitness) as ex:
                    self.clause_errors.append(("op-R", fname, str(ex)))

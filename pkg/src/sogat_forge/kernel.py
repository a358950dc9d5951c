"""Typechecking and definitional equality for the logical framework.

The framework has exactly the type formers unit, Sigma and first-order
Pi (domains restricted to representable types), over the generating
sorts and operations of an elaborated theory.  Definitional equality is
beta for application, surjective pairing and unit eta (type-directed),
plus the theory's term equations oriented left-to-right as rewrite
rules.  Rewriting is fuel-bounded; running out of fuel is an explicit
"undecided" outcome (FuelExhausted), distinct from inequality.

Two degenerate equation shapes get dedicated handling instead of a
naive rewrite rule (a bare-variable left-hand side matches everything):

* irrelevance equations (two variables of the same sort equated) mark
  the sort propositional: any two terms of it are definitionally equal;
* reflection equations (two variables equated under a hypothesis of
  some sort relating them) turn matching hypotheses in the ambient
  context into ground rewrite rules, closed under a small ground
  completion so that chains of hypotheses decide equality regardless of
  association order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import terms as T
from .terms import Expr


class KernelError(Exception):
    """Typechecking failure; carries a path into the offending expression."""

    def __init__(self, msg: str, path: tuple = ()):
        super().__init__(msg)
        self.msg = msg
        self.path = path

    def at(self, step) -> "KernelError":
        return KernelError(self.msg, (step,) + self.path)

    def __str__(self):
        if self.path:
            return f"{self.msg} [at {'.'.join(map(str, self.path))}]"
        return self.msg


class FuelExhausted(Exception):
    """Rewrite fuel ran out: equality is undecided, not false."""


@dataclass(frozen=True)
class SortDecl:
    name: str
    boundary: tuple[Expr, ...]  # telescope
    rep: bool
    index: int


@dataclass(frozen=True)
class OpDecl:
    name: str
    params: tuple[Expr, ...]  # telescope of first-order types
    result: Expr  # a sort application over params
    index: int


@dataclass(frozen=True)
class EqDecl:
    name: str
    ctx: tuple[Expr, ...]
    lhs: Expr
    rhs: Expr
    ty: Expr


@dataclass(frozen=True)
class Rule:
    """Rewrite rule; pattern variables are indices < nvars, larger indices
    match ambient variables literally (shifted down by nvars)."""
    nvars: int
    lhs: Expr
    rhs: Expr


@dataclass
class Report:
    ok: bool
    errors: list = field(default_factory=list)

    @classmethod
    def success(cls):
        return cls(True, [])

    @classmethod
    def failure(cls, err: KernelError):
        return cls(False, [(".".join(map(str, err.path)), err.msg)])


_size_cache: dict[int, int] = {}


def size(e: Expr) -> int:
    s = _size_cache.get(e.uid)
    if s is not None:
        return s
    if e.tag in (T.OP, T.SORT):
        s = 1 + sum(size(a) for a in e.args[1])
    else:
        s = 1 + sum(size(a) for a in e.args if isinstance(a, Expr))
    _size_cache[e.uid] = s
    return s


class Theory:
    """An elaborated signature with its derived rewrite system."""

    def __init__(self, name: str = ""):
        self.name = name
        self.sorts: dict[str, SortDecl] = {}
        self.ops: dict[str, OpDecl] = {}
        self.eqs: list[EqDecl] = []
        self.decl_order: list[tuple[str, str]] = []
        self.rules: list[Rule] = []
        self.prop_sorts: set[str] = set()
        # sort -> (spine position of lhs, spine position of rhs)
        self.reflect: dict[str, tuple[int, int]] = {}
        self.fuel: int = 1000
        self._nf_cache: dict[tuple[int, int], Expr] = {}
        self._ruleset_ids: dict[tuple, int] = {}
        self._local_rules_cache: dict[tuple, tuple[Rule, ...]] = {}

    # -- signature construction (used by the elaborator) ----------------

    def add_sort(self, name: str, boundary: tuple[Expr, ...], rep: bool):
        self.sorts[name] = SortDecl(name, boundary, rep, len(self.sorts))
        self.decl_order.append(("sort", name))

    def add_op(self, name: str, params: tuple[Expr, ...], result: Expr):
        self.ops[name] = OpDecl(name, params, result, len(self.ops))
        self.decl_order.append(("op", name))

    def add_equation(self, eq: EqDecl):
        self.eqs.append(eq)
        self.decl_order.append(("eq", eq.name))
        n = len(eq.ctx)
        kind = self._classify_equation(eq)
        if kind == "prop":
            self.prop_sorts.add(eq.ty.args[0])
        elif kind is not None and kind[0] == "reflect":
            _, sname, pl, pr = kind
            self.reflect[sname] = (pl, pr)
        else:
            self.rules.append(Rule(n, eq.lhs, eq.rhs))

    def _classify_equation(self, eq: EqDecl):
        if eq.lhs.tag != T.VAR or eq.rhs.tag != T.VAR or eq.lhs is eq.rhs:
            return None
        n = len(eq.ctx)
        li, ri = eq.lhs.args[0], eq.rhs.args[0]
        # reflection: some hypothesis variable's sort mentions both sides
        # as distinct spine entries
        for k, ty in enumerate(eq.ctx):
            tyk = T.shift(ty, n - k)
            if tyk.tag == T.SORT:
                spine = tyk.args[1]
                pl = pr = None
                for p, s in enumerate(spine):
                    if s is eq.lhs:
                        pl = p
                    elif s is eq.rhs:
                        pr = p
                if pl is not None and pr is not None:
                    return ("reflect", tyk.args[0], pl, pr)
        # irrelevance: both sides are variables whose declared type is the
        # equation type itself (a sort application)
        if eq.ty.tag == T.SORT:
            tl = T.shift(eq.ctx[n - 1 - li], li + 1)
            tr = T.shift(eq.ctx[n - 1 - ri], ri + 1)
            if tl is eq.ty and tr is eq.ty:
                return "prop"
        return None


    # -- rewriting -------------------------------------------------------

    def _ruleset_id(self, rules: tuple[Rule, ...]) -> int:
        key = tuple((r.nvars, r.lhs.uid, r.rhs.uid) for r in rules)
        rid = self._ruleset_ids.get(key)
        if rid is None:
            rid = len(self._ruleset_ids) + 1
            self._ruleset_ids[key] = rid
        return rid

    def _match(self, pat: Expr, subj: Expr, depth: int, nvars: int, binds: list):
        tag = pat.tag
        if tag == T.VAR:
            i = pat.args[0]
            if i < depth:
                return subj.tag == T.VAR and subj.args[0] == i
            k = i - depth
            if k < nvars:
                s = T.strengthen(subj, depth)
                if s is None:
                    return False
                if binds[k] is None:
                    binds[k] = s
                    return True
                return binds[k] is s
            return subj.tag == T.VAR and subj.args[0] == k - nvars + depth
        if tag != subj.tag:
            return False
        if tag in (T.OP, T.SORT):
            if pat.args[0] != subj.args[0] or len(pat.args[1]) != len(subj.args[1]):
                return False
            return all(self._match(p, s, depth, nvars, binds)
                       for p, s in zip(pat.args[1], subj.args[1]))
        if tag == T.LAM:
            return self._match(pat.args[0], subj.args[0], depth + 1, nvars, binds)
        if tag in (T.SIGMA, T.PI):
            return (self._match(pat.args[0], subj.args[0], depth, nvars, binds)
                    and self._match(pat.args[1], subj.args[1], depth + 1, nvars, binds))
        if tag in (T.TT, T.UNIT):
            return True
        return all(self._match(p, s, depth, nvars, binds)
                   for p, s in zip(pat.args, subj.args))

    def _try_rules(self, t: Expr, rules: tuple[Rule, ...]) -> Expr | None:
        for r in rules:
            binds: list = [None] * r.nvars
            if self._match(r.lhs, t, 0, r.nvars, binds):
                if any(b is None for b in binds):
                    continue  # non-left-linear gap: refuse
                return T.subst_spine(r.rhs, tuple(binds))
        return None

    def _head_step(self, t: Expr, rules: tuple[Rule, ...], fuel: list) -> Expr | None:
        tag = t.tag
        if tag == T.APP and t.args[0].tag == T.LAM:
            return T.sub1(t.args[0].args[0], t.args[1])
        if tag == T.FST and t.args[0].tag == T.PAIR:
            return t.args[0].args[0]
        if tag == T.SND and t.args[0].tag == T.PAIR:
            return t.args[0].args[1]
        if tag == T.LAM:
            b = t.args[0]
            if b.tag == T.APP and b.args[1].tag == T.VAR and b.args[1].args[0] == 0:
                f = T.strengthen(b.args[0], 1)
                if f is not None:
                    return f
        if tag == T.PAIR:
            a, b = t.args
            if (a.tag == T.FST and b.tag == T.SND and a.args[0] is b.args[0]):
                return a.args[0]
        if tag not in (T.TT, T.UNIT, T.SORT):
            r = self._try_rules(t, rules)
            if r is not None:
                if fuel[0] <= 0:
                    raise FuelExhausted()
                fuel[0] -= 1
                return r
        return None

    def _nf(self, t: Expr, rules: tuple[Rule, ...], rid: int, fuel: list) -> Expr:
        key = (t.uid, rid)
        hit = self._nf_cache.get(key)
        if hit is not None:
            return hit
        cur = t
        while True:
            tag = cur.tag
            if tag in (T.VAR, T.TT, T.UNIT):
                nxt = cur
            elif tag in (T.OP, T.SORT):
                nxt = T._mk(tag, cur.args[0],
                            tuple(self._nf(a, rules, rid, fuel) for a in cur.args[1]))
            elif tag == T.LAM:
                nxt = T.lam(self._nf(cur.args[0], rules, rid, fuel))
            elif tag in (T.SIGMA, T.PI):
                nxt = T._mk(tag, self._nf(cur.args[0], rules, rid, fuel),
                            self._nf(cur.args[1], rules, rid, fuel))
            else:
                nxt = T._mk(tag, *[self._nf(a, rules, rid, fuel) for a in cur.args])
            stepped = self._head_step(nxt, rules, fuel)
            if stepped is None:
                self._nf_cache[key] = nxt
                return nxt
            cur = stepped

    def whnf(self, t: Expr, ctx: tuple[Expr, ...] = (), fuel: list | None = None) -> Expr:
        rules = self.rules_for_ctx(ctx)
        rid = self._ruleset_id(rules)
        fuel = fuel if fuel is not None else [self.fuel]
        cur = t
        while True:
            stepped = self._head_step(cur, rules, fuel)
            if stepped is None:
                # head position may only be unlocked after reducing the head
                if cur.tag in (T.APP, T.FST, T.SND):
                    h = self.whnf(cur.args[0], ctx, fuel)
                    if h is not cur.args[0]:
                        cur = T._mk(cur.tag, h, *cur.args[1:])
                        continue
                return cur
            cur = stepped

    def normalize(self, ctx: tuple[Expr, ...], t: Expr, fuel: int | None = None) -> Expr:
        """Full normal form of a term or type under ctx's local rules."""
        rules = self.rules_for_ctx(ctx)
        rid = self._ruleset_id(rules)
        return self._nf(t, rules, rid, [fuel if fuel is not None else self.fuel])

    # -- local ground rules from hypotheses ------------------------------

    def rules_for_ctx(self, ctx: tuple[Expr, ...]) -> tuple[Rule, ...]:
        if not ctx or not self.reflect:
            return tuple(self.rules)
        key = tuple(a.uid for a in ctx)
        hit = self._local_rules_cache.get(key)
        if hit is not None:
            return hit
        eqs = self._ground_equations(ctx)
        local = self._complete(eqs)
        out = tuple(self.rules) + local
        self._local_rules_cache[key] = out
        return out

    def _ground_equations(self, ctx: tuple[Expr, ...]) -> list[tuple[Expr, Expr]]:
        eqs = []
        n = len(ctx)
        stack = []
        for k, ty in enumerate(ctx):
            stack.append((T.var(n - 1 - k), T.shift(ty, n - k)))
        while stack:
            h, ty = stack.pop()
            if ty.tag == T.SIGMA:
                stack.append((T.fst(h), ty.args[0]))
                stack.append((T.snd(h), T.sub1(ty.args[1], T.fst(h))))
            elif ty.tag == T.SORT:
                pos = self.reflect.get(ty.args[0])
                if pos is not None:
                    spine = ty.args[1]
                    eqs.append((spine[pos[0]], spine[pos[1]]))
        eqs.reverse()
        return eqs

    def _orient(self, a: Expr, b: Expr) -> tuple[Expr, Expr]:
        ka = (size(a), T.to_sexpr(a))
        kb = (size(b), T.to_sexpr(b))
        return (a, b) if ka > kb else (b, a)

    def _with_extension(self, lhs: Expr, rhs: Expr, budget: list) -> list[Rule]:
        """A ground rule plus its critical pairs with the global rules.

        When lhs unifies with a proper subterm of a global rule's pattern
        (e.g. the inner composite of an associativity law), the two reducts
        of the overlapped term are joined by an extra pattern rule; this
        makes ground completion decide chains regardless of association.
        Reducts are normalized with the global rules before orientation so
        the pattern sides live in normal form.
        """
        out = [Rule(0, lhs, rhs)]
        if lhs.tag != T.OP:
            return out
        base = tuple(self.rules)
        rid = self._ruleset_id(base)
        for rg in self.rules:
            if rg.lhs.tag != T.OP:
                continue
            spine = rg.lhs.args[1]
            for p, sub in enumerate(spine):
                if sub.tag != T.OP or sub.args[0] != lhs.args[0]:
                    continue
                binds: list = [None] * rg.nvars
                if not self._match(sub, lhs, 0, rg.nvars, binds):
                    continue
                fresh = [i for i, b in enumerate(binds) if b is None]
                nfresh = len(fresh)
                full: list[Expr] = []
                for i, b in enumerate(binds):
                    if b is None:
                        full.append(T.var(fresh.index(i)))
                    else:
                        full.append(T.shift(b, nfresh))
                outer = T.subst_spine(rg.lhs, tuple(full))
                new_spine = list(outer.args[1])
                new_spine[p] = T.shift(rhs, nfresh)
                try:
                    reduct1 = self._nf(T.subst_spine(rg.rhs, tuple(full)),
                                       base, rid, budget)
                    reduct2 = self._nf(T.op(outer.args[0], tuple(new_spine)),
                                       base, rid, budget)
                except FuelExhausted:
                    continue
                if reduct1 is reduct2:
                    continue
                l2, r2 = self._orient(reduct1, reduct2)
                out.append(Rule(nfresh, l2, r2))
        return out

    def _subterms(self, t: Expr, acc: list):
        if t.tag in (T.OP, T.APP, T.FST, T.SND):
            acc.append(t)
        if t.tag in (T.OP, T.SORT):
            for a in t.args[1]:
                self._subterms(a, acc)
        elif t.tag in (T.APP, T.PAIR, T.FST, T.SND):
            for a in t.args:
                self._subterms(a, acc)

    def _ground_overlaps(self, ground: Rule, pat: Rule) -> list[tuple[Expr, Expr]]:
        """Fully-grounding critical pairs of a ground rule against the
        non-variable subterms of a pattern rule's left-hand side."""
        out = []
        subs: list[Expr] = []
        self._subterms(pat.lhs, subs)
        for s in subs:
            if s is pat.lhs:
                continue
            binds: list = [None] * pat.nvars
            if not self._match(s, ground.lhs, 0, pat.nvars, binds):
                continue
            if any(b is None for b in binds):
                continue
            full = tuple(binds)
            inst_lhs = T.subst_spine(pat.lhs, full)
            reduct1 = T.subst_spine(pat.rhs, full)
            reduct2 = self._rewrite_once(inst_lhs, ground)
            if reduct2 is not None and reduct1 is not reduct2:
                out.append((reduct1, reduct2))
        return out

    def _rewrite_once(self, t: Expr, rule: Rule) -> Expr | None:
        """Rewrite the first matching subterm occurrence with one rule."""
        binds: list = [None] * rule.nvars
        if self._match(rule.lhs, t, 0, rule.nvars, binds) and not any(b is None for b in binds):
            return T.subst_spine(rule.rhs, tuple(binds))
        if t.tag in (T.OP, T.SORT):
            for k, a in enumerate(t.args[1]):
                r = self._rewrite_once(a, rule)
                if r is not None:
                    sp = list(t.args[1])
                    sp[k] = r
                    return T._mk(t.tag, t.args[0], tuple(sp))
            return None
        if t.tag in (T.APP, T.PAIR, T.FST, T.SND):
            for k, a in enumerate(t.args):
                r = self._rewrite_once(a, rule)
                if r is not None:
                    args = list(t.args)
                    args[k] = r
                    return T._mk(t.tag, *args)
        return None

    def _complete(self, eqs: list[tuple[Expr, Expr]]) -> tuple[Rule, ...]:
        base = tuple(self.rules)
        local: list[Rule] = []
        queue = deque(eqs)
        seen: set[tuple[int, int]] = set()
        budget = [self.fuel]
        guard = 16 * (len(eqs) + 4) * (len(eqs) + 4)
        while queue and guard > 0:
            guard -= 1
            a, b = queue.popleft()
            rules = base + tuple(local)
            rid = self._ruleset_id(rules)
            try:
                a = self._nf(a, rules, rid, budget)
                b = self._nf(b, rules, rid, budget)
            except FuelExhausted:
                break
            if a is b:
                continue
            key = (min(a.uid, b.uid), max(a.uid, b.uid))
            if key in seen:
                continue
            seen.add(key)
            lhs, rhs = self._orient(a, b)
            new = self._with_extension(lhs, rhs, budget)
            # interreduce: requeue ground rules the new ones can rewrite
            kept = []
            for r in local:
                if r.nvars == 0 and (self._reducible(r.lhs, new) or self._reducible(r.rhs, new)):
                    queue.append((r.lhs, r.rhs))
                else:
                    kept.append(r)
            local = kept + new
            # critical pairs between ground and pattern rules, both ways
            grounds = [r for r in local if r.nvars == 0]
            pats = [r for r in local if r.nvars > 0] + list(base)
            for g in (r for r in new if r.nvars == 0):
                for p in pats:
                    queue.extend(self._ground_overlaps(g, p))
            for p in (r for r in new if r.nvars > 0):
                for g in grounds:
                    queue.extend(self._ground_overlaps(g, p))
        return tuple(local)

    def _reducible(self, t: Expr, rules: list[Rule]) -> bool:
        if self._try_rules(t, tuple(rules)) is not None:
            return True
        if t.tag in (T.OP, T.SORT):
            return any(self._reducible(a, rules) for a in t.args[1])
        if t.tag in (T.TT, T.UNIT, T.VAR):
            return False
        return any(self._reducible(a, rules) for a in t.args if isinstance(a, Expr))

    # -- typechecking -----------------------------------------------------

    def ctx_var_type(self, ctx: tuple[Expr, ...], i: int) -> Expr:
        n = len(ctx)
        if i >= n:
            raise KernelError(f"unbound variable !{i} in context of length {n}")
        return T.shift(ctx[n - 1 - i], i + 1)

    def check_type(self, ctx: tuple[Expr, ...], a: Expr, rep: bool = False, path: tuple = ()):
        tag = a.tag
        if tag == T.SORT:
            name, spine = a.args
            decl = self.sorts.get(name)
            if decl is None:
                raise KernelError(f"unknown sort '{name}'", path)
            if rep and not decl.rep:
                raise KernelError(f"non-representable sort '{name}' in representable position", path)
            if len(spine) != len(decl.boundary):
                raise KernelError(
                    f"arity mismatch: sort '{name}' expects {len(decl.boundary)} "
                    f"arguments, got {len(spine)}", path)
            for k, t in enumerate(spine):
                expect = T.fill(decl.boundary[k], spine[:k])
                self.check_term(ctx, t, expect, path + (f"arg{k}",))
        elif tag == T.UNIT:
            return
        elif tag == T.SIGMA:
            self.check_type(ctx, a.args[0], rep, path + ("fst",))
            self.check_type(ctx + (a.args[0],), a.args[1], rep, path + ("snd",))
        elif tag == T.PI:
            if rep:
                raise KernelError("Pi is not a representable type", path)
            try:
                self.check_type(ctx, a.args[0], rep=True, path=path + ("dom",))
            except KernelError as e:
                raise KernelError(f"non-representable Pi domain: {e.msg}", e.path)
            self.check_type(ctx + (a.args[0],), a.args[1], rep, path + ("cod",))
        else:
            raise KernelError(f"expected a type, found {tag}", path)

    def is_rep_type(self, ctx: tuple[Expr, ...], a: Expr) -> bool:
        try:
            self.check_type(ctx, a, rep=True)
            return True
        except KernelError:
            return False

    @staticmethod
    def _pure_whnf(t: Expr) -> Expr:
        """Beta/projection head reduction only: no rules, no fuel."""
        while True:
            tag = t.tag
            if tag == T.APP and t.args[0].tag == T.LAM:
                t = T.sub1(t.args[0].args[0], t.args[1])
            elif tag == T.FST and t.args[0].tag == T.PAIR:
                t = t.args[0].args[0]
            elif tag == T.SND and t.args[0].tag == T.PAIR:
                t = t.args[0].args[1]
            elif tag in (T.APP, T.FST, T.SND):
                h = Theory._pure_whnf(t.args[0])
                if h is t.args[0]:
                    return t
                t = T._mk(tag, h, *t.args[1:])
            else:
                return t

    def infer(self, ctx: tuple[Expr, ...], t: Expr, path: tuple = ()) -> Expr:
        t = self._pure_whnf(t)
        tag = t.tag
        if tag == T.VAR:
            try:
                return self.ctx_var_type(ctx, t.args[0])
            except KernelError as e:
                raise KernelError(e.msg, path)
        if tag == T.OP:
            name, spine = t.args
            decl = self.ops.get(name)
            if decl is None:
                raise KernelError(f"unknown operation '{name}'", path)
            if len(spine) != len(decl.params):
                raise KernelError(
                    f"arity mismatch: operation '{name}' expects {len(decl.params)} "
                    f"arguments, got {len(spine)}", path)
            for k, u in enumerate(spine):
                expect = T.fill(decl.params[k], spine[:k])
                self.check_term(ctx, u, expect, path + (f"arg{k}",))
            return T.fill(decl.result, spine)
        if tag == T.APP:
            ft = self.infer(ctx, t.args[0], path + ("fun",))
            if ft.tag != T.PI:
                raise KernelError(f"application of a non-function (type {ft.tag})", path)
            self.check_term(ctx, t.args[1], ft.args[0], path + ("arg",))
            return T.sub1(ft.args[1], t.args[1])
        if tag == T.FST:
            pt = self.infer(ctx, t.args[0], path + ("pair",))
            if pt.tag != T.SIGMA:
                raise KernelError(f"fst of a non-pair (type {pt.tag})", path)
            return pt.args[0]
        if tag == T.SND:
            pt = self.infer(ctx, t.args[0], path + ("pair",))
            if pt.tag != T.SIGMA:
                raise KernelError(f"snd of a non-pair (type {pt.tag})", path)
            return T.sub1(pt.args[1], T.fst(t.args[0]))
        if tag == T.TT:
            return T.unit()
        raise KernelError(f"cannot infer the type of a {tag}; annotate via checking", path)

    def check_term(self, ctx: tuple[Expr, ...], t: Expr, a: Expr, path: tuple = ()):
        t = self._pure_whnf(t)
        tag = t.tag
        if tag == T.LAM:
            if a.tag != T.PI:
                raise KernelError(f"lambda checked against non-Pi type {a.tag}", path)
            self.check_term(ctx + (a.args[0],), t.args[0], a.args[1], path + ("body",))
            return
        if tag == T.PAIR:
            if a.tag != T.SIGMA:
                raise KernelError(f"pair checked against non-Sigma type {a.tag}", path)
            self.check_term(ctx, t.args[0], a.args[0], path + ("fst",))
            self.check_term(ctx, t.args[1], T.sub1(a.args[1], t.args[0]), path + ("snd",))
            return
        if tag == T.TT and a.tag == T.UNIT:
            return
        it = self.infer(ctx, t, path)
        if not self.defeq_type(ctx, it, a):
            rules = self.rules_for_ctx(ctx)
            rid = self._ruleset_id(rules)
            f = [self.fuel]
            raise KernelError(
                "type mismatch: expected "
                f"{T.to_sexpr(self._nf(a, rules, rid, f))}, inferred "
                f"{T.to_sexpr(self._nf(it, rules, rid, f))}", path)

    # -- definitional equality -------------------------------------------

    def defeq(self, ctx: tuple[Expr, ...], t: Expr, u: Expr, a: Expr,
              fuel: list | None = None) -> bool:
        """Type-directed conversion; True iff t and u are equal at type a."""
        if fuel is None:
            fuel = [self.fuel]
        if t is u:
            return True
        tag = a.tag
        if tag == T.UNIT:
            return True
        if tag == T.PI:
            x = T.var(0)
            return self.defeq(ctx + (a.args[0],),
                              T.app(T.shift(t, 1), x), T.app(T.shift(u, 1), x),
                              a.args[1], fuel)
        if tag == T.SIGMA:
            if not self.defeq(ctx, T.fst(t), T.fst(u), a.args[0], fuel):
                return False
            return self.defeq(ctx, T.snd(t), T.snd(u),
                              T.sub1(a.args[1], T.fst(t)), fuel)
        if tag == T.SORT and a.args[0] in self.prop_sorts:
            return True
        rules = self.rules_for_ctx(ctx)
        rid = self._ruleset_id(rules)
        return self._nf(t, rules, rid, fuel) is self._nf(u, rules, rid, fuel)

    def defeq_type(self, ctx: tuple[Expr, ...], a: Expr, b: Expr,
                   fuel: list | None = None) -> bool:
        if fuel is None:
            fuel = [self.fuel]
        if a is b:
            return True
        if a.tag != b.tag:
            return False
        if a.tag == T.UNIT:
            return True
        if a.tag == T.SORT:
            if a.args[0] != b.args[0]:
                return False
            decl = self.sorts[a.args[0]]
            for k, (x, y) in enumerate(zip(a.args[1], b.args[1])):
                ty = T.fill(decl.boundary[k], a.args[1][:k])
                if not self.defeq(ctx, x, y, ty, fuel):
                    return False
            return True
        # Sigma / Pi
        if not self.defeq_type(ctx, a.args[0], b.args[0], fuel):
            return False
        return self.defeq_type(ctx + (a.args[0],), a.args[1], b.args[1], fuel)

    def defeq_decide(self, ctx, t, u, a) -> bool | None:
        """Tri-state wrapper: True / False / None (fuel ran out)."""
        try:
            return self.defeq(ctx, t, u, a)
        except FuelExhausted:
            return None

    # -- telescopes -------------------------------------------------------

    def check_telescope(self, ctx: tuple[Expr, ...], tele: tuple[Expr, ...],
                        rep: bool = False, path: tuple = ()):
        cur = ctx
        for k, a in enumerate(tele):
            self.check_type(cur, a, rep, path + (k,))
            cur = cur + (a,)

    # -- report wrappers ---------------------------------------------------

    def check_type_report(self, ctx, a) -> Report:
        try:
            self.check_type(ctx, a)
            return Report.success()
        except KernelError as e:
            return Report.failure(e)

    def check_term_report(self, ctx, t, a) -> Report:
        try:
            self.check_type(ctx, a)
            self.check_term(ctx, t, a)
            return Report.success()
        except KernelError as e:
            return Report.failure(e)


def telescope_concat(g: tuple[Expr, ...], d: tuple[Expr, ...]) -> tuple[Expr, ...]:
    """Concatenate telescopes; d must already be scoped over g."""
    return tuple(g) + tuple(d)

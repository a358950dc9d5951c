"""Parsing and elaboration of theory presentations.

The on-disk DSL is s-expressions:

  (theory NAME decl...)
    decl := (sort NAME ((x TYPE)...))
          | (rep-sort NAME ((x TYPE)...))
          | (op NAME ((x TYPE)...) TYPE)        ; result must be a sort
          | (eq NAME ((x TYPE)...) TERM TERM TYPE)
          | (define NAME (params...) BODY)      ; syntactic macro
          | (level-template (i) decl...)        ; see sexpr module

  TYPE := NAME | (NAME ARG...) | (unit)
        | (sigma ((x TYPE)...) TYPE) | (pi ((x TYPE)...) TYPE)
  TERM := NAME | (NAME ARG...) | (lam (x...) TERM) | (app TERM TERM...)
        | (pair TERM TERM) | (fst TERM) | (snd TERM) | (tt)

  (homotopy THEORY (rel SORT (binders...) TYPE)
                   (refl SORT (binders...) TERM) ...)

Equations carry explicit contexts; there is no implicit generalization.
Surface names resolve to de Bruijn indices at parse time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import terms as T
from .kernel import EqDecl, KernelError, Theory
from .sexpr import ParseError, SList, Sym, expand_level_templates, parse_all, print_sexpr

RESERVED = {"unit", "sigma", "pi", "lam", "app", "pair", "fst", "snd", "tt",
            "sort", "rep-sort", "op", "eq", "theory", "define", "rel", "refl",
            "level-template"}


def _err(msg: str, node) -> ParseError:
    line = getattr(node, "line", 0)
    col = getattr(node, "col", 0)
    return ParseError(msg, line, col)


def _sym(node, what: str) -> str:
    if not isinstance(node, Sym):
        raise _err(f"expected {what}", node)
    return node.name


@dataclass
class Macros:
    defs: dict[str, tuple[list[str], object]] = field(default_factory=dict)

    def add(self, form):
        name = _sym(form[1], "macro name")
        if not isinstance(form[2], SList):
            raise _err("macro parameters must be a list", form)
        params = [_sym(p, "macro parameter") for p in form[2]]
        if len(form) != 4:
            raise _err("define expects (define NAME (params) BODY)", form)
        self.defs[name] = (params, form[3])

    def expand(self, sx, depth=0):
        if depth > 200:
            raise _err("macro expansion too deep", sx)
        if isinstance(sx, Sym):
            m = self.defs.get(sx.name)
            if m is not None and not m[0]:
                return self.expand(m[1], depth + 1)
            return sx
        if isinstance(sx, (SList, list)):
            if sx and isinstance(sx[0], Sym) and sx[0].name in self.defs:
                params, body = self.defs[sx[0].name]
                if params:
                    if len(sx) != len(params) + 1:
                        raise _err(f"macro '{sx[0].name}' expects {len(params)} arguments", sx)
                    args = {p: self.expand(a, depth + 1) for p, a in zip(params, sx[1:])}
                    return self.expand(_substitute(body, args), depth + 1)
            out = SList([self.expand(y, depth) for y in sx],
                        getattr(sx, "line", 0), getattr(sx, "col", 0))
            return out
        return sx


def _substitute(sx, args: dict):
    if isinstance(sx, Sym):
        return args.get(sx.name, sx)
    if isinstance(sx, (SList, list)):
        return SList([_substitute(y, args) for y in sx],
                     getattr(sx, "line", 0), getattr(sx, "col", 0))
    return sx


# -- resolution ---------------------------------------------------------------

def resolve_type(sx, names: list[str], th: Theory, macros: Macros | None = None) -> T.Expr:
    if macros is not None:
        sx = macros.expand(sx)
    return _res_type(sx, names, th)


def resolve_term(sx, names: list[str], th: Theory, macros: Macros | None = None) -> T.Expr:
    if macros is not None:
        sx = macros.expand(sx)
    return _res_term(sx, names, th)


def _lookup(name: str, names: list[str]) -> int | None:
    for i, nm in enumerate(reversed(names)):
        if nm == name:
            return i
    return None


def _res_type(sx, names, th) -> T.Expr:
    if isinstance(sx, Sym):
        if sx.name in th.sorts:
            if th.sorts[sx.name].boundary:
                raise _err(f"sort '{sx.name}' expects arguments", sx)
            return T.sort(sx.name, ())
        if _lookup(sx.name, names) is not None:
            raise _err(f"'{sx.name}' is a term variable, not a type", sx)
        raise _err(f"unknown sort '{sx.name}'", sx)
    if not isinstance(sx, (SList, list)) or not sx:
        raise _err("expected a type", sx)
    head = sx[0]
    if isinstance(head, Sym):
        h = head.name
        if h == "unit":
            return T.unit()
        if h in ("sigma", "pi"):
            if len(sx) != 3 or not isinstance(sx[1], SList):
                raise _err(f"({h} ((x TYPE)...) TYPE) expected", sx)
            binders = []
            inner = list(names)
            for b in sx[1]:
                if not isinstance(b, SList) or len(b) != 2:
                    raise _err("binder must be (name TYPE)", b)
                bn = _sym(b[0], "binder name")
                binders.append((bn, _res_type(b[1], inner, th)))
                inner.append(bn)
            body = _res_type(sx[2], inner, th)
            out = body
            for bn, bt in reversed(binders):
                out = T.sigma(bt, out) if h == "sigma" else T.pi(bt, out)
            return out
        if h in th.sorts:
            spine = tuple(_res_term(a, names, th) for a in sx[1:])
            return T.sort(h, spine)
        raise _err(f"unknown sort '{h}'", sx)
    raise _err("expected a type", sx)


def _res_term(sx, names, th) -> T.Expr:
    if isinstance(sx, Sym):
        i = _lookup(sx.name, names)
        if i is not None:
            return T.var(i)
        if sx.name in th.ops:
            if th.ops[sx.name].params:
                raise _err(f"operation '{sx.name}' expects arguments", sx)
            return T.op(sx.name, ())
        if sx.name in th.sorts:
            raise _err(f"'{sx.name}' is a sort; type-level equations and "
                       "sorts in term position are not allowed", sx)
        raise _err(f"unknown name '{sx.name}'", sx)
    if not isinstance(sx, (SList, list)) or not sx:
        raise _err("expected a term", sx)
    head = sx[0]
    if isinstance(head, Sym):
        h = head.name
        if h == "lam":
            if len(sx) != 3 or not isinstance(sx[1], SList):
                raise _err("(lam (x...) TERM) expected", sx)
            inner = list(names) + [_sym(x, "binder") for x in sx[1]]
            body = _res_term(sx[2], inner, th)
            return T.lams(len(sx[1]), body)
        if h == "app":
            if len(sx) < 3:
                raise _err("(app TERM TERM...) expected", sx)
            f = _res_term(sx[1], names, th)
            for a in sx[2:]:
                f = T.app(f, _res_term(a, names, th))
            return f
        if h == "pair":
            if len(sx) != 3:
                raise _err("(pair TERM TERM) expected", sx)
            return T.pair(_res_term(sx[1], names, th), _res_term(sx[2], names, th))
        if h == "fst":
            return T.fst(_res_term(sx[1], names, th))
        if h == "snd":
            return T.snd(_res_term(sx[1], names, th))
        if h == "tt":
            return T.tt()
        i = _lookup(h, names)
        if i is not None:
            f = T.var(i)
            for a in sx[1:]:
                f = T.app(f, _res_term(a, names, th))
            return f
        if h in th.ops:
            decl = th.ops[h]
            n = len(decl.params)
            args = [_res_term(a, names, th) for a in sx[1:]]
            if len(args) < n:
                raise _err(f"operation '{h}' expects {n} arguments, got {len(args)}", sx)
            f: T.Expr = T.op(h, tuple(args[:n]))
            for a in args[n:]:
                f = T.app(f, a)
            return f
        if h in th.sorts:
            raise _err(f"'{h}' is a sort; type-level equations and sorts "
                       "in term position are not allowed", sx)
        raise _err(f"unknown operation '{h}'", sx)
    raise _err("expected a term", sx)


def _res_telescope(sx, names: list[str], th: Theory) -> tuple[tuple[T.Expr, ...], list[str]]:
    if not isinstance(sx, SList):
        raise _err("expected a binder list ((x TYPE)...)", sx)
    tele = []
    inner = list(names)
    for b in sx:
        if not isinstance(b, SList) or len(b) != 2:
            raise _err("binder must be (name TYPE)", b)
        bn = _sym(b[0], "binder name")
        tele.append(_res_type(b[1], inner, th))
        inner.append(bn)
    return tuple(tele), inner


# -- theory elaboration -------------------------------------------------------

def parse_theory(text: str):
    """Parse a theory file; returns the raw (theory NAME decl...) form."""
    forms = parse_all(text)
    if len(forms) != 1 or not isinstance(forms[0], SList):
        raise ParseError("a theory file holds exactly one (theory ...) form", 1, 1)
    form = forms[0]
    if not form or _sym(form[0], "keyword") != "theory":
        raise _err("expected (theory NAME decl...)", form)
    _sym(form[1], "theory name")
    return form


def elaborate(raw, level_bound: int = 3) -> Theory:
    name = _sym(raw[1], "theory name")
    th = Theory(name)
    macros = Macros()
    decls = expand_level_templates(list(raw[2:]), level_bound)
    seen: set[str] = set()
    for d in decls:
        if not isinstance(d, SList) or not d or not isinstance(d[0], Sym):
            raise _err("expected a declaration", d)
        kind = d[0].name
        try:
            if kind == "define":
                macros.add(d)
            elif kind in ("sort", "rep-sort"):
                nm = _sym(d[1], "sort name")
                if nm in seen:
                    raise _err(f"duplicate name '{nm}'", d)
                if len(d) != 3:
                    raise _err("(sort NAME ((x TYPE)...)) expected", d)
                tele, _ = _res_telescope(macros.expand(d[2]), [], th)
                th.check_telescope((), tele)
                th.add_sort(nm, tele, rep=(kind == "rep-sort"))
                seen.add(nm)
            elif kind == "op":
                nm = _sym(d[1], "operation name")
                if nm in seen:
                    raise _err(f"duplicate name '{nm}'", d)
                if len(d) != 4:
                    raise _err("(op NAME ((x TYPE)...) TYPE) expected", d)
                tele, names = _res_telescope(macros.expand(d[2]), [], th)
                th.check_telescope((), tele)
                result = resolve_type(d[3], names, th, macros)
                if result.tag != T.SORT:
                    raise _err(f"operation '{nm}' must land in a sort application", d)
                th.check_type(tele, result)
                th.add_op(nm, tele, result)
                seen.add(nm)
            elif kind == "eq":
                nm = _sym(d[1], "equation name")
                if len(d) != 6:
                    raise _err("(eq NAME ((x TYPE)...) TERM TERM TYPE) expected", d)
                tele, names = _res_telescope(macros.expand(d[2]), [], th)
                th.check_telescope((), tele)
                ty = resolve_type(d[5], names, th, macros)
                th.check_type(tele, ty)
                lhs = resolve_term(d[3], names, th, macros)
                rhs = resolve_term(d[4], names, th, macros)
                th.check_term(tele, lhs, ty)
                th.check_term(tele, rhs, ty)
                th.add_equation(EqDecl(nm, tele, lhs, rhs, ty))
            else:
                raise _err(f"unknown declaration kind '{kind}'", d)
        except KernelError as e:
            raise ParseError(f"in declaration '{kind} {d[1] if len(d) > 1 else ''}': {e}",
                             d.line, d.col) from e
    return th


def print_theory(th: Theory) -> str:
    """Canonical serialized form; re-elaborating it is the identity."""
    out = [f"(theory {th.name}"]
    eq_by_name = {}
    for eq in th.eqs:
        eq_by_name.setdefault(eq.name, []).append(eq)

    def binders_of(tele, names):
        return " ".join(f"({names[i]} {T.to_sexpr(tele[i], names[:i])})"
                        for i in range(len(tele)))

    for kind, name in th.decl_order:
        if kind == "sort":
            s = th.sorts[name]
            names = [f"x{i}" for i in range(len(s.boundary))]
            kw = "rep-sort" if s.rep else "sort"
            out.append(f"  ({kw} {s.name} ({binders_of(s.boundary, names)}))")
        elif kind == "op":
            o = th.ops[name]
            names = [f"x{i}" for i in range(len(o.params))]
            out.append(f"  (op {o.name} ({binders_of(o.params, names)}) "
                       f"{T.to_sexpr(o.result, names)})")
        else:
            eq = eq_by_name[name].pop(0)
            names = [f"x{i}" for i in range(len(eq.ctx))]
            out.append(f"  (eq {eq.name} ({binders_of(eq.ctx, names)}) "
                       f"{T.to_sexpr(eq.lhs, names)} {T.to_sexpr(eq.rhs, names)} "
                       f"{T.to_sexpr(eq.ty, names)})")
    return "\n".join(out) + ")\n"


# -- homotopy relations -------------------------------------------------------

@dataclass
class Homotopy:
    """Per generating sort: the relation clause and its reflexivity clause.

    rel[S]  is a type over  boundary(S) + (x : S, y : S);
    refl[S] is a term over  boundary(S) + (x : S)  of type rel[S][y := x].
    """
    rel: dict[str, T.Expr] = field(default_factory=dict)
    refl: dict[str, T.Expr] = field(default_factory=dict)

    def refl_type(self, S: str) -> T.Expr:
        return T.sub1(self.rel[S], T.var(0))


def parse_homotopy(text: str):
    forms = parse_all(text)
    if len(forms) != 1 or not isinstance(forms[0], SList):
        raise ParseError("a homotopy file holds exactly one (homotopy ...) form", 1, 1)
    form = forms[0]
    if not form or _sym(form[0], "keyword") != "homotopy":
        raise _err("expected (homotopy THEORY clause...)", form)
    return form


def elaborate_homotopy(raw, th: Theory, level_bound: int = 3) -> Homotopy:
    hom = Homotopy()
    macros = Macros()
    clauses = expand_level_templates(list(raw[2:]), level_bound)
    for c in clauses:
        if not isinstance(c, SList) or not c:
            raise _err("expected (rel ...) or (refl ...)", c)
        kind = _sym(c[0], "clause keyword")
        if kind == "define":
            macros.add(c)
            continue
        if kind not in ("rel", "refl"):
            raise _err(f"unknown homotopy clause '{kind}'", c)
        sname = _sym(c[1], "sort name")
        decl = th.sorts.get(sname)
        if decl is None:
            raise _err(f"unknown sort '{sname}'", c)
        if not isinstance(c[2], SList):
            raise _err("expected binder name list", c)
        names = [_sym(x, "binder name") for x in c[2]]
        nb = len(decl.boundary)
        want = nb + (2 if kind == "rel" else 1)
        if len(names) != want:
            raise _err(f"'{kind} {sname}' expects {want} binder names "
                       f"(boundary plus endpoints), got {len(names)}", c)
        sigma_spine = tuple(T.var(nb - 1 - j) for j in range(nb))
        if kind == "rel":
            ctx = decl.boundary + (T.sort(sname, sigma_spine),
                                   T.shift(T.sort(sname, sigma_spine), 1))
            body = resolve_type(c[3], names, th, macros)
            try:
                th.check_type(ctx, body, rep=decl.rep)
            except KernelError as e:
                raise ParseError(f"ill-typed relation for '{sname}': {e}", c.line, c.col)
            if sname in hom.rel:
                raise _err(f"duplicate relation for '{sname}'", c)
            hom.rel[sname] = body
        else:
            if sname not in hom.rel:
                raise _err(f"refl for '{sname}' must follow its rel clause", c)
            ctx = decl.boundary + (T.sort(sname, sigma_spine),)
            body = resolve_term(c[3], names, th, macros)
            expect = hom.refl_type(sname)
            try:
                th.check_term(ctx, body, expect)
            except KernelError as e:
                raise ParseError(
                    f"reflexivity clause for '{sname}' does not have type "
                    f"rel[y:=x]: {e}", c.line, c.col)
            hom.refl[sname] = body
    missing = [s for s in th.sorts if s not in hom.rel or s not in hom.refl]
    if missing:
        raise ParseError(f"missing homotopy clauses for sorts: {', '.join(missing)}", 1, 1)
    return hom


# -- witness files ------------------------------------------------------------

@dataclass
class RawWitness:
    """Parsed but unresolved witness clauses (resolution needs translated
    contexts, so it happens in the graph model / derivation layers)."""
    theory: str
    macros: Macros
    sort_e: dict[str, tuple[list[str], object]] = field(default_factory=dict)
    sort_r: dict[str, tuple[list[str], object]] = field(default_factory=dict)
    op_e: dict[str, tuple[list[str], object]] = field(default_factory=dict)
    op_r: dict[str, tuple[list[str], object]] = field(default_factory=dict)
    # sort -> (binders, apE body, binders, apR body)
    cong_base: dict[str, tuple] = field(default_factory=dict)
    # sort -> (binders, apE, apR) for one-step telescope extension
    cong_step: dict[str, tuple] = field(default_factory=dict)
    # (sort, variant) -> (binders, body)
    center: dict[tuple[str, str], tuple] = field(default_factory=dict)
    hpath: dict[tuple[str, str], tuple] = field(default_factory=dict)


def parse_witness(text: str, level_bound: int = 3) -> RawWitness:
    forms = parse_all(text)
    if len(forms) != 1 or not isinstance(forms[0], SList):
        raise ParseError("a witness file holds exactly one (witness ...) form", 1, 1)
    form = forms[0]
    if not form or _sym(form[0], "keyword") != "witness":
        raise _err("expected (witness THEORY clause...)", form)
    w = RawWitness(_sym(form[1], "theory name"), Macros())
    clauses = expand_level_templates(list(form[2:]), level_bound)
    for c in clauses:
        if not isinstance(c, SList) or not c:
            raise _err("expected a witness clause", c)
        kind = _sym(c[0], "clause keyword")
        if kind == "define":
            w.macros.add(c)
            continue
        if kind in ("sort-E", "sort-R", "op-E", "op-R"):
            nm = _sym(c[1], "name")
            if len(c) != 4 or not isinstance(c[2], SList):
                raise _err(f"({kind} NAME (binders) BODY) expected", c)
            names = [_sym(x, "binder") for x in c[2]]
            target = {"sort-E": w.sort_e, "sort-R": w.sort_r,
                      "op-E": w.op_e, "op-R": w.op_r}[kind]
            if nm in target:
                raise _err(f"duplicate {kind} clause for '{nm}'", c)
            target[nm] = (names, c[3])
        elif kind == "congruence":
            nm = _sym(c[1], "sort name")
            mode = _sym(c[2], "congruence mode")
            if mode == "exact":
                # (congruence S exact () (binders) APE (binders) APR)
                if len(c) != 8 or not isinstance(c[3], SList) or len(c[3]) != 0:
                    raise _err("(congruence S exact () (binders) APE (binders) APR)"
                               " expected; only the empty shape is exact", c)
                w.cong_base[nm] = ([_sym(x, "binder") for x in c[4]], c[5],
                                   [_sym(x, "binder") for x in c[6]], c[7])
            elif mode == "telescope":
                # (congruence S telescope (step (binders) APE APR))
                if len(c) != 4 or not isinstance(c[3], SList) or \
                        _sym(c[3][0], "step") != "step" or len(c[3]) != 4:
                    raise _err("(congruence S telescope (step (binders) APE APR)) expected", c)
                w.cong_step[nm] = ([_sym(x, "binder") for x in c[3][1]], c[3][2], c[3][3])
            else:
                raise _err(f"unknown congruence mode '{mode}'", c)
        elif kind in ("basic-center", "basic-hpath"):
            nm = _sym(c[1], "sort name")
            variant = _sym(c[2], "variant")
            if variant not in ("l", "r", "sim"):
                raise _err("variant must be one of l, r, sim", c)
            if len(c) != 5 or not isinstance(c[3], SList):
                raise _err(f"({kind} SORT VARIANT (binders) TERM) expected", c)
            names = [_sym(x, "binder") for x in c[3]]
            target = w.center if kind == "basic-center" else w.hpath
            if (nm, variant) in target:
                raise _err(f"duplicate {kind} for '{nm}' variant {variant}", c)
            target[(nm, variant)] = (names, c[4])
        else:
            raise _err(f"unknown witness clause '{kind}'", c)
    return w

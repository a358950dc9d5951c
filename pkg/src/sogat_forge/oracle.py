"""Finite-model evaluator for first-order theories.

A model assigns each generating sort a finite carrier per boundary
tuple and each operation a total lookup table.  Loading validates the
boundaries and brute-checks every declared equation pointwise, so a
loaded model is an honest semantic oracle: acceptance tests evaluate
synthesized transports and paths in it and compare against brute force.

Values are element names for sorts, () for the unit value, and pairs
for dependent sums.  Second-order types (Pi) are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from . import terms as T
from .kernel import Theory
from .sexpr import SList, Sym, parse_all
from .terms import Expr


class ModelError(Exception):
    pass


@dataclass
class FiniteModel:
    theory: Theory
    carriers: dict[str, dict[tuple, list]] = field(default_factory=dict)
    tables: dict[str, dict[tuple, object]] = field(default_factory=dict)

    def carrier(self, sort: str, boundary: tuple) -> list:
        fam = self.carriers.get(sort)
        if fam is None:
            raise ModelError(f"no carrier for sort '{sort}'")
        if boundary not in fam:
            raise ModelError(f"no carrier for {sort} at {boundary!r}")
        return fam[boundary]


def _parse_value(x):
    if isinstance(x, Sym):
        return x.name
    if isinstance(x, SList):
        if x and isinstance(x[0], Sym) and x[0].name == "pair" and len(x) == 3:
            return (_parse_value(x[1]), _parse_value(x[2]))
        if x and isinstance(x[0], Sym) and x[0].name == "tt" and len(x) == 1:
            return ()
        if len(x) == 0:
            return ()
    raise ModelError(f"bad model value: {x!r}")


def render_value(v) -> str:
    if v == ():
        return "(tt)"
    if isinstance(v, tuple):
        return f"(pair {render_value(v[0])} {render_value(v[1])})"
    return str(v)


def load_model(th: Theory, text: str) -> FiniteModel:
    forms = parse_all(text)
    if len(forms) != 1 or not isinstance(forms[0], SList):
        raise ModelError("a model file holds exactly one (model ...) form")
    form = forms[0]
    if not form or not isinstance(form[0], Sym) or form[0].name != "model":
        raise ModelError("expected (model THEORY clause...)")
    m = FiniteModel(th)
    for c in form[2:]:
        if not isinstance(c, SList) or not c or not isinstance(c[0], Sym):
            raise ModelError("expected (carrier ...) or (table ...)")
        kind = c[0].name
        name = c[1].name if isinstance(c[1], Sym) else None
        if kind == "carrier":
            if name not in th.sorts:
                raise ModelError(f"unknown sort '{name}'")
            fam = m.carriers.setdefault(name, {})
            for row in c[2:]:
                if not isinstance(row, SList) or not row:
                    raise ModelError(f"bad carrier row for {name}")
                key = tuple(_parse_value(v) for v in row[0])
                fam[key] = [_parse_value(v) for v in row[1:]]
        elif kind == "table":
            if name not in th.ops:
                raise ModelError(f"unknown operation '{name}'")
            tab = m.tables.setdefault(name, {})
            for row in c[2:]:
                if not isinstance(row, SList) or len(row) != 2:
                    raise ModelError(f"bad table row for {name}")
                tab[tuple(_parse_value(v) for v in row[0])] = _parse_value(row[1])
        else:
            raise ModelError(f"unknown model clause '{kind}'")
    _validate(m)
    return m


def eval_type(m: FiniteModel, env: tuple, a: Expr) -> list:
    """All values of a first-order type; env[i] is the value of var(i)."""
    tag = a.tag
    if tag == T.UNIT:
        return [()]
    if tag == T.SORT:
        key = tuple(eval_term(m, env, s) for s in a.args[1])
        return list(m.carrier(a.args[0], key))
    if tag == T.SIGMA:
        out = []
        for v in eval_type(m, env, a.args[0]):
            for w in eval_type(m, (v,) + env, a.args[1]):
                out.append((v, w))
        return out
    raise ModelError(f"cannot evaluate a {tag} type in a finite model")


def eval_term(m: FiniteModel, env: tuple, t: Expr):
    tag = t.tag
    if tag == T.VAR:
        i = t.args[0]
        if i >= len(env):
            raise ModelError(f"unbound variable !{i} in evaluation environment")
        return env[i]
    if tag == T.OP:
        key = tuple(eval_term(m, env, s) for s in t.args[1])
        tab = m.tables.get(t.args[0])
        if tab is None or key not in tab:
            raise ModelError(f"no table entry for {t.args[0]} at {key!r}")
        return tab[key]
    if tag == T.PAIR:
        return (eval_term(m, env, t.args[0]), eval_term(m, env, t.args[1]))
    if tag == T.FST:
        return eval_term(m, env, t.args[0])[0]
    if tag == T.SND:
        return eval_term(m, env, t.args[0])[1]
    if tag == T.TT:
        return ()
    raise ModelError(f"cannot evaluate a {tag} term in a finite model")


def _enumerate_envs(m: FiniteModel, tele: tuple[Expr, ...]):
    """All evaluation environments for a telescope (innermost value first)."""
    envs = [()]
    for a in tele:
        out = []
        for env in envs:
            for v in eval_type(m, env, a):
                out.append((v,) + env)
        envs = out
    return envs


def _validate(m: FiniteModel):
    th = m.theory
    for sname, decl in th.sorts.items():
        if sname not in m.carriers:
            raise ModelError(f"missing carrier for sort '{sname}'")
        for key in m.carriers[sname]:
            if len(key) != len(decl.boundary):
                raise ModelError(f"carrier key arity mismatch for '{sname}'")
    for fname, decl in th.ops.items():
        tab = m.tables.get(fname, {})
        for env in _enumerate_envs(m, decl.params):
            key = tuple(env[len(decl.params) - 1 - k] for k in range(len(decl.params)))
            if key not in tab:
                raise ModelError(f"table for '{fname}' is missing entry {key!r}")
            res = tab[key]
            want = eval_type(m, env, decl.result)
            if res not in want:
                raise ModelError(
                    f"table entry {fname}{key!r} = {res!r} lands outside its sort")
    for eq in th.eqs:
        for env in _enumerate_envs(m, eq.ctx):
            lv = eval_term(m, env, eq.lhs)
            rv = eval_term(m, env, eq.rhs)
            if lv != rv:
                raise ModelError(
                    f"equation '{eq.name}' fails at {tuple(reversed(env))!r}: "
                    f"{lv!r} != {rv!r}")


def brute_contractible(m: FiniteModel, env: tuple, a: Expr) -> bool:
    return len(eval_type(m, env, a)) == 1


def brute_transport(m: FiniteModel, env: tuple, target: Expr, rel: Expr):
    """The unique target value whose relation instance is inhabited.

    rel is a type over the evaluation context extended by the target
    variable; empty and non-unique results raise distinct errors.
    """
    hits = []
    for y in eval_type(m, env, target):
        if eval_type(m, (y,) + env, rel):
            hits.append(y)
    if not hits:
        raise ModelError("no related element (relation empty)")
    if len(hits) > 1:
        raise ModelError(f"related element not unique: {hits!r}")
    return hits[0]

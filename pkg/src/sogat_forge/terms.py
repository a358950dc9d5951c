"""Syntax trees for the logical framework.

Terms and types are immutable, hash-consed nodes.  Two structurally equal
expressions are always the same object, so `is` / `==` / `hash` are O(1)
and every cache in the package can key on `id(expr)`.

Variables are de Bruijn indices: `var(0)` is the innermost binder.  A
context (telescope) is a tuple of types listed outermost-first, so the
type of `var(i)` in a context `ctx` is `shift(ctx[len(ctx)-1-i], i+1)`.
"""

from __future__ import annotations

from typing import Iterator

# Term tags
VAR = "var"
OP = "op"
LAM = "lam"
APP = "app"
PAIR = "pair"
FST = "fst"
SND = "snd"
TT = "tt"
# Type tags
SORT = "sort"
UNIT = "unit"
SIGMA = "sigma"
PI = "pi"

TERM_TAGS = frozenset((VAR, OP, LAM, APP, PAIR, FST, SND, TT))
TYPE_TAGS = frozenset((SORT, UNIT, SIGMA, PI))

# tags whose second arg is scoped under one extra binder
_BINDER_TAGS = frozenset((SIGMA, PI))


class Expr:
    __slots__ = ("tag", "args", "uid", "__weakref__")

    def __init__(self, tag: str, args: tuple):
        self.tag = tag
        self.args = args
        self.uid = 0  # patched by intern table

    def __repr__(self) -> str:
        return to_sexpr(self)

    def __iter__(self) -> Iterator:
        return iter(self.args)


_intern: dict[tuple, Expr] = {}
_next_uid = 0


def _mk(tag: str, *args) -> Expr:
    global _next_uid
    key = (tag,) + tuple(a.uid if isinstance(a, Expr) else a for a in args)
    hit = _intern.get(key)
    if hit is not None:
        return hit
    node = Expr(tag, args)
    _next_uid += 1
    node.uid = _next_uid
    _intern[key] = node
    return node


# -- constructors ------------------------------------------------------------

def var(i: int) -> Expr:
    assert i >= 0
    return _mk(VAR, i)


def op(name: str, spine: tuple[Expr, ...] = ()) -> Expr:
    return _mk(OP, name, tuple(spine))


def lam(body: Expr) -> Expr:
    return _mk(LAM, body)


def app(f: Expr, a: Expr) -> Expr:
    return _mk(APP, f, a)


def apps(f: Expr, *args: Expr) -> Expr:
    for a in args:
        f = app(f, a)
    return f


def lams(n: int, body: Expr) -> Expr:
    for _ in range(n):
        body = lam(body)
    return body


def pair(a: Expr, b: Expr) -> Expr:
    return _mk(PAIR, a, b)


def fst(p: Expr) -> Expr:
    return _mk(FST, p)


def snd(p: Expr) -> Expr:
    return _mk(SND, p)


TT_E = _mk(TT)


def tt() -> Expr:
    return TT_E


def sort(name: str, spine: tuple[Expr, ...] = ()) -> Expr:
    return _mk(SORT, name, tuple(spine))


UNIT_E = _mk(UNIT)


def unit() -> Expr:
    return UNIT_E


def sigma(a: Expr, b: Expr) -> Expr:
    return _mk(SIGMA, a, b)


def pi(a: Expr, b: Expr) -> Expr:
    return _mk(PI, a, b)


def is_type(e: Expr) -> bool:
    return e.tag in TYPE_TAGS


def is_term(e: Expr) -> bool:
    return e.tag in TERM_TAGS


def sigmas(entries: tuple[Expr, ...], body: Expr) -> Expr:
    """Right-nested Sigma over a telescope of entries, ending in body."""
    out = body
    for a in reversed(entries):
        out = sigma(a, out)
    return out


def pis(entries: tuple[Expr, ...], body: Expr) -> Expr:
    out = body
    for a in reversed(entries):
        out = pi(a, out)
    return out


def proj_tuple(p: Expr, n: int, i: int) -> Expr:
    """Project component i (0-based) out of a right-nested n-tuple term."""
    assert 0 <= i < n
    for _ in range(i):
        p = snd(p)
    return p if i == n - 1 else fst(p)


def tuple_term(parts: tuple[Expr, ...]) -> Expr:
    """Right-nested pair of parts; a 0-tuple is tt."""
    if not parts:
        return tt()
    out = parts[-1]
    for a in reversed(parts[:-1]):
        out = pair(a, out)
    return out


# -- de Bruijn machinery -----------------------------------------------------

_shift_cache: dict[tuple[int, int, int], Expr] = {}


def shift(e: Expr, d: int, cutoff: int = 0) -> Expr:
    """Add d to every variable index >= cutoff."""
    if d == 0:
        return e
    key = (e.uid, d, cutoff)
    hit = _shift_cache.get(key)
    if hit is not None:
        return hit
    tag = e.tag
    if tag == VAR:
        i = e.args[0]
        out = var(i + d) if i >= cutoff else e
    elif tag in (OP, SORT):
        out = _mk(tag, e.args[0], tuple(shift(a, d, cutoff) for a in e.args[1]))
    elif tag == LAM:
        out = lam(shift(e.args[0], d, cutoff + 1))
    elif tag in _BINDER_TAGS:
        out = _mk(tag, shift(e.args[0], d, cutoff), shift(e.args[1], d, cutoff + 1))
    elif tag in (TT, UNIT):
        out = e
    else:
        out = _mk(tag, *[shift(a, d, cutoff) for a in e.args])
    _shift_cache[key] = out
    return out


_subst_cache: dict[tuple, Expr] = {}


def subst_spine(e: Expr, sp: tuple[Expr, ...], depth: int = 0) -> Expr:
    """Simultaneously replace var(depth+k) by shift(sp[k], depth) and
    renumber var(i) to var(i - len(sp)) for i >= depth + len(sp).

    sp[0] substitutes the *innermost* of the replaced variables.
    """
    if not sp:
        return e
    key = (e.uid, depth) + tuple(t.uid for t in sp)
    hit = _subst_cache.get(key)
    if hit is not None:
        return hit
    tag = e.tag
    if tag == VAR:
        i = e.args[0]
        if i < depth:
            out = e
        elif i - depth < len(sp):
            out = shift(sp[i - depth], depth)
        else:
            out = var(i - len(sp))
    elif tag in (OP, SORT):
        out = _mk(tag, e.args[0], tuple(subst_spine(a, sp, depth) for a in e.args[1]))
    elif tag == LAM:
        out = lam(subst_spine(e.args[0], sp, depth + 1))
    elif tag in _BINDER_TAGS:
        out = _mk(tag, subst_spine(e.args[0], sp, depth),
                  subst_spine(e.args[1], sp, depth + 1))
    elif tag in (TT, UNIT):
        out = e
    else:
        out = _mk(tag, *[subst_spine(a, sp, depth) for a in e.args])
    _subst_cache[key] = out
    return out


def sub1(e: Expr, t: Expr) -> Expr:
    """Replace var(0) by t, renumbering the rest (beta-substitution)."""
    return subst_spine(e, (t,))


def fill(e: Expr, args: tuple[Expr, ...]) -> Expr:
    """Instantiate the first len(args) free variables of e, with args given
    in telescope order (args[0] is the *outermost* variable)."""
    return subst_spine(e, tuple(reversed(args)))


def rename(e: Expr, mapping: tuple[int, ...]) -> Expr:
    """Apply a variable renaming: var(i) -> var(mapping[i]).

    mapping must cover every free variable of e.
    """
    return subst_spine(e, tuple(var(j) for j in mapping))


def max_free(e: Expr, depth: int = 0) -> int:
    """Largest free index relative to depth, or -1 if closed."""
    tag = e.tag
    if tag == VAR:
        i = e.args[0]
        return i - depth if i >= depth else -1
    if tag in (OP, SORT):
        m = -1
        for a in e.args[1]:
            m = max(m, max_free(a, depth))
        return m
    if tag == LAM:
        return max_free(e.args[0], depth + 1)
    if tag in _BINDER_TAGS:
        return max(max_free(e.args[0], depth), max_free(e.args[1], depth + 1))
    if tag in (TT, UNIT):
        return -1
    m = -1
    for a in e.args:
        m = max(m, max_free(a, depth))
    return m


def strengthen(e: Expr, d: int, cutoff: int = 0) -> Expr | None:
    """Inverse of shift: lower indices >= cutoff+d by d; None if any
    variable in [cutoff, cutoff+d) occurs."""
    tag = e.tag
    if tag == VAR:
        i = e.args[0]
        if i < cutoff:
            return e
        if i < cutoff + d:
            return None
        return var(i - d)
    if tag in (OP, SORT):
        out = []
        for a in e.args[1]:
            r = strengthen(a, d, cutoff)
            if r is None:
                return None
            out.append(r)
        return _mk(tag, e.args[0], tuple(out))
    if tag == LAM:
        r = strengthen(e.args[0], d, cutoff + 1)
        return None if r is None else lam(r)
    if tag in _BINDER_TAGS:
        a = strengthen(e.args[0], d, cutoff)
        if a is None:
            return None
        b = strengthen(e.args[1], d, cutoff + 1)
        return None if b is None else _mk(tag, a, b)
    if tag in (TT, UNIT):
        return e
    out = []
    for a in e.args:
        r = strengthen(a, d, cutoff)
        if r is None:
            return None
        out.append(r)
    return _mk(tag, *out)


# -- serialization -----------------------------------------------------------

def _name_for(depth: int, index: int, names: list[str] | None) -> str:
    if names is not None and index < len(names):
        return names[len(names) - 1 - index]
    return f"!{index}"


def to_sexpr(e: Expr, names: list[str] | None = None) -> str:
    """Canonical s-expression form.  With names=None variables print as !i."""
    tag = e.tag
    if tag == VAR:
        i = e.args[0]
        if names is not None and i < len(names):
            return names[len(names) - 1 - i]
        return f"!{i}"
    if tag in (OP, SORT):
        name, spine = e.args
        if not spine:
            return name
        return "(" + " ".join([name] + [to_sexpr(a, names) for a in spine]) + ")"
    if tag == LAM:
        nm = _fresh(names)
        inner = None if names is None else names + [nm]
        return f"(lam ({nm}) {to_sexpr(e.args[0], inner)})"
    if tag == APP:
        return f"(app {to_sexpr(e.args[0], names)} {to_sexpr(e.args[1], names)})"
    if tag == PAIR:
        return f"(pair {to_sexpr(e.args[0], names)} {to_sexpr(e.args[1], names)})"
    if tag == FST:
        return f"(fst {to_sexpr(e.args[0], names)})"
    if tag == SND:
        return f"(snd {to_sexpr(e.args[0], names)})"
    if tag == TT:
        return "(tt)"
    if tag == UNIT:
        return "(unit)"
    if tag == SIGMA:
        nm = _fresh(names)
        inner = None if names is None else names + [nm]
        return f"(sigma (({nm} {to_sexpr(e.args[0], names)})) {to_sexpr(e.args[1], inner)})"
    if tag == PI:
        nm = _fresh(names)
        inner = None if names is None else names + [nm]
        return f"(pi (({nm} {to_sexpr(e.args[0], names)})) {to_sexpr(e.args[1], inner)})"
    raise ValueError(f"unknown tag {tag}")


def _fresh(names: list[str] | None) -> str:
    if names is None:
        return "_"
    base = "v"
    k = len(names)
    nm = f"{base}{k}"
    while nm in names:
        k += 1
        nm = f"{base}{k}"
    return nm


def to_json(e: Expr):
    """JSON tree form: {"kind": tag, "args": [...]}."""
    tag = e.tag
    if tag == VAR:
        return {"kind": "var", "args": [e.args[0]]}
    if tag in (OP, SORT):
        return {"kind": tag, "args": [e.args[0]] + [to_json(a) for a in e.args[1]]}
    return {"kind": tag, "args": [to_json(a) for a in e.args]}


def from_json(d) -> Expr:
    kind = d["kind"]
    args = d["args"]
    if kind == VAR:
        return var(args[0])
    if kind in (OP, SORT):
        return _mk(kind, args[0], tuple(from_json(a) for a in args[1:]))
    if kind == TT:
        return tt()
    if kind == UNIT:
        return unit()
    return _mk(kind, *[from_json(a) for a in args])

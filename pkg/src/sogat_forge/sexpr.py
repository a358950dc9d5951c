"""S-expression reader/printer with source positions.

Also provides the level-template expansion used by the theory DSL for
families of declarations indexed by a universe level: inside a
``(level-template (i) FORM...)`` block, symbols may embed level
arithmetic as ``name@i``, ``name@i+1``, ...; the block is expanded for
each level 0..bound-1 for which every offset stays below the bound.
Concrete symbols like ``ity@2`` are valid anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (at {line}:{col})")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Sym:
    name: str
    line: int = 0
    col: int = 0

    def __repr__(self):
        return self.name


class SList(list):
    """A parenthesized list; carries its opening position."""

    def __init__(self, items=(), line=0, col=0):
        super().__init__(items)
        self.line = line
        self.col = col


_DELIMS = "()"


def parse_all(text: str) -> list:
    """Parse a sequence of s-expressions."""
    items, i = _parse_seq(text, 0, 1, 1, top=True)
    return items


def _parse_seq(text: str, i: int, line: int, col: int, top: bool):
    out = SList([], line, col)
    n = len(text)
    while True:
        # skip whitespace/comments
        while i < n:
            c = text[i]
            if c == ";":
                while i < n and text[i] != "\n":
                    i += 1
            elif c in " \t\r":
                i += 1
                col += 1
            elif c == "\n":
                i += 1
                line += 1
                col = 1
            else:
                break
        if i >= n:
            if not top:
                raise ParseError("unexpected end of input, missing )", line, col)
            return out, i
        c = text[i]
        if c == "(":
            sub, j = _parse_seq2(text, i + 1, line, col + 1)
            sub.line, sub.col = line, col
            # recompute position
            consumed = text[i:j]
            line += consumed.count("\n")
            col = (len(consumed) - consumed.rfind("\n")) if "\n" in consumed else col + len(consumed)
            out.append(sub)
            i = j
        elif c == ")":
            if top:
                raise ParseError("unbalanced )", line, col)
            return out, i + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            out.append(Sym(text[i:j], line, col))
            col += j - i
            i = j


def _parse_seq2(text: str, i: int, line: int, col: int):
    """Parse items until a closing paren; returns (SList, index-after-paren)."""
    out = SList([], line, col)
    n = len(text)
    while True:
        while i < n:
            c = text[i]
            if c == ";":
                while i < n and text[i] != "\n":
                    i += 1
            elif c in " \t\r":
                i += 1
                col += 1
            elif c == "\n":
                i += 1
                line += 1
                col = 1
            else:
                break
        if i >= n:
            raise ParseError("unexpected end of input, missing )", line, col)
        c = text[i]
        if c == "(":
            sub, j = _parse_seq2(text, i + 1, line, col + 1)
            sub.line, sub.col = line, col
            consumed = text[i:j]
            line += consumed.count("\n")
            col = (len(consumed) - consumed.rfind("\n")) if "\n" in consumed else col + len(consumed)
            out.append(sub)
            i = j
        elif c == ")":
            return out, i + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            out.append(Sym(text[i:j], line, col))
            col += j - i
            i = j


def print_sexpr(x) -> str:
    if isinstance(x, Sym):
        return x.name
    if isinstance(x, (SList, list)):
        return "(" + " ".join(print_sexpr(y) for y in x) + ")"
    return str(x)


# -- level templates ----------------------------------------------------------

def _subst_level(x, ivar: str, value: int, bound: int):
    """Substitute the level variable; returns None if any offset >= bound."""
    if isinstance(x, Sym):
        if "@" in x.name:
            base, expr = x.name.rsplit("@", 1)
            lvl = _eval_level(expr, ivar, value)
            if lvl is None:
                return x
            if lvl >= bound or lvl < 0:
                return None
            return Sym(f"{base}@{lvl}", x.line, x.col)
        return x
    if isinstance(x, (SList, list)):
        out = SList([], getattr(x, "line", 0), getattr(x, "col", 0))
        for y in x:
            r = _subst_level(y, ivar, value, bound)
            if r is None:
                return None
            out.append(r)
        return out
    return x


def _eval_level(expr: str, ivar: str, value: int) -> int | None:
    expr = expr.strip()
    if expr.isdigit():
        return int(expr)
    if expr == ivar:
        return value
    if "+" in expr:
        a, b = expr.split("+", 1)
        if a.strip() == ivar and b.strip().isdigit():
            return value + int(b)
    return None  # not a templated symbol; leave as-is


def expand_level_templates(forms: list, bound: int) -> list:
    """Expand (level-template (i) FORM...) blocks for levels 0..bound-1.

    An instantiation is dropped whenever a symbol's level offset falls
    outside [0, bound).
    """
    out = []
    for form in forms:
        if (isinstance(form, SList) and form and isinstance(form[0], Sym)
                and form[0].name == "level-template"):
            if len(form) < 2 or not isinstance(form[1], SList) or len(form[1]) != 1:
                raise ParseError("level-template expects (i) parameter list",
                                 form.line, form.col)
            ivar = form[1][0].name
            for lvl in range(bound):
                ok = True
                inst = []
                for body in form[2:]:
                    r = _subst_level(body, ivar, lvl, bound)
                    if r is None:
                        ok = False
                        break
                    inst.append(r)
                if ok:
                    out.extend(expand_level_templates(inst, bound))
        else:
            out.append(form)
    return out

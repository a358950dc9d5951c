"""Command-line front end: parse -> elaborate -> translate -> derive.

Exit codes: 0 success, 1 type error, 2 unresolved obligations, 3 parse
error.  Output is deterministic: obligations are sorted by kind, name
and goal; JSON is emitted with sorted keys.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import terms as T
from .derive import ElimCtx, Engine, IntroCtx, Obligation, ObligationError
from .graphmodel import MissingWitness, Translator
from .kernel import FuelExhausted, KernelError, Theory
from .oracle import ModelError, brute_transport, eval_term, eval_type, load_model, render_value
from .sexpr import ParseError, parse_all
from .signature import (Homotopy, RawWitness, elaborate, elaborate_homotopy,
                        parse_homotopy, parse_theory, parse_witness,
                        resolve_term, resolve_type)

EXIT_OK = 0
EXIT_TYPE = 1
EXIT_OBLIGATIONS = 2
EXIT_PARSE = 3


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _load_setting(args):
    th = elaborate(parse_theory(_read(args.theory)), args.level_bound)
    if args.fuel is not None:
        th.fuel = args.fuel
    hom = None
    if getattr(args, "homotopy", None):
        hom = elaborate_homotopy(parse_homotopy(_read(args.homotopy)), th,
                                 args.level_bound)
    raw = None
    for path in getattr(args, "witness", None) or []:
        w = parse_witness(_read(path), args.level_bound)
        if raw is None:
            raw = w
        else:
            _merge_witness(raw, w)
    return th, hom, raw


def _merge_witness(into: RawWitness, new: RawWitness):
    for attr in ("sort_e", "sort_r", "op_e", "op_r", "cong_base", "cong_step",
                 "center", "hpath"):
        getattr(into, attr).update(getattr(new, attr))
    into.macros.defs.update(new.macros.defs)


def _engine(args):
    th, hom, raw = _load_setting(args)
    if hom is None:
        raise ParseError("a homotopy file is required", 0, 0)
    if raw is None:
        raise ParseError("at least one witness file is required", 0, 0)
    trans = Translator(th, hom, raw)
    eng = Engine(th, hom, trans, raw)
    return th, hom, eng


def _check_a3_presence(eng: Engine):
    for sname in eng.th.sorts:
        for side in ("l", "r", "sim"):
            if (sname, side) not in eng.center_cl and \
                    (sname, side) not in {k for k, _ in
                                          [(kk, 0) for kk in eng.raw.center]}:
                pass
    for sname in eng.th.sorts:
        for side in ("l", "r", "sim"):
            if (sname, side) not in eng.raw.center:
                eng._record("missing-A3", f"basic-center {sname} {side}")
            if (sname, side) not in eng.raw.hpath:
                eng._record("missing-A3", f"basic-hpath {sname} {side}")


def _obligation_lines(eng: Engine) -> list[str]:
    seen = set()
    out = []
    for ob in sorted(eng.obligations, key=Obligation.sort_key):
        line = ob.render()
        if line not in seen:
            seen.add(line)
            out.append(line)
    return out


def _run_checks(eng: Engine, jobs: int = 1):
    tasks = [eng.check_equations, eng.check_alignment]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            list(ex.map(lambda f: f(), tasks))
    else:
        for t in tasks:
            t()
    _check_a3_presence(eng)
    eng.check_saturation()


def cmd_check(args) -> int:
    th, hom, eng = _engine(args)
    _run_checks(eng, args.jobs)
    lines = _obligation_lines(eng)
    for line in lines:
        print(f"obligation: {line}")
    print(f"obligations: {len(lines)}")
    return EXIT_OK if not lines else EXIT_OBLIGATIONS


def cmd_obligations(args) -> int:
    th, hom, eng = _engine(args)
    _run_checks(eng, args.jobs)
    obs = []
    seen = set()
    for ob in sorted(eng.obligations, key=Obligation.sort_key):
        key = ob.render()
        if key in seen:
            continue
        seen.add(key)
        obs.append({
            "kind": ob.kind,
            "name": ob.name,
            "goal": T.to_sexpr(ob.goal) if ob.goal is not None else None,
            "trail": list(ob.trail),
        })
    print(json.dumps(obs, sort_keys=True, indent=2))
    return EXIT_OK if not obs else EXIT_OBLIGATIONS


def _parse_context(th: Theory, src: str):
    (form,) = parse_all(src)
    names: list[str] = []
    ctx: list[T.Expr] = []
    for b in form:
        nm = b[0].name
        ctx.append(resolve_type(b[1], names, th))
        names.append(nm)
    return tuple(ctx), names


def cmd_translate(args) -> int:
    th, hom, raw = _load_setting(args)
    trans = Translator(th, hom, raw) if raw is not None else Translator(
        th, hom or Homotopy(), None)
    ctx, names = _parse_context(th, args.context)
    (form,) = parse_all(args.expr)
    try:
        if args.kind == "type":
            e = resolve_type(form, names, th)
            th.check_type(ctx, e)
            triple = trans.translate_type(ctx, e)
        else:
            e = resolve_term(form, names, th)
            th.infer(ctx, e)
            triple = trans.translate_term(ctx, e)
    except MissingWitness as ex:
        print(f"obligation: missing-A1 {ex.kind} {ex.name}")
        return EXIT_OBLIGATIONS
    if args.format == "json":
        print(json.dumps({"v": T.to_json(triple.V), "e": T.to_json(triple.E),
                          "r": T.to_json(triple.R)}, sort_keys=True))
    else:
        print(f"(triple\n  (v {T.to_sexpr(triple.V)})\n"
              f"  (e {T.to_sexpr(triple.E)})\n  (r {T.to_sexpr(triple.R)}))")
    return EXIT_OK


def _derive_bundle(eng: Engine) -> dict:
    th = eng.th
    bundle: dict = {"id": {}, "refl": {}, "saturation": {}, "funext": {}}
    for sname, decl in sorted(th.sorts.items()):
        m = len(decl.boundary)
        generic = T.sort(sname, tuple(T.var(m - 1 - j) for j in range(m)))
        try:
            idt = eng.id_type(decl.boundary, generic)
            bundle["id"][sname] = T.to_sexpr(idt)
            ctx = decl.boundary + (generic,)
            r = eng.refl_term(ctx, T.shift(generic, 1), T.var(0))
            bundle["refl"][sname] = T.to_sexpr(r)
        except (ObligationError, MissingWitness, KernelError, FuelExhausted) as ex:
            bundle["id"][sname] = f"obligation: {ex}"
    sat = eng.check_saturation()
    bundle["saturation"] = {k: bool(v) for k, v in sorted(sat.items())}
    fx = eng.check_funext()
    bundle["funext"] = fx
    return bundle


def cmd_derive(args) -> int:
    th, hom, eng = _engine(args)
    bundle = _derive_bundle(eng)
    if args.elim:
        bundle["j"] = {}
        bundle["jbeta"] = {}
        (forms,) = [parse_all(_read(args.elim))]
        for k, form in enumerate(forms):
            intro, elim = _parse_elim(th, form)
            out = eng.synthesize_j(intro, elim)
            bundle["j"][str(k)] = T.to_sexpr(out["j"])
            bundle["jbeta"][str(k)] = T.to_sexpr(out["jbeta"])
    lines = _obligation_lines(eng)
    bundle["obligations"] = lines
    print(json.dumps(bundle, sort_keys=True, indent=2))
    return EXIT_OK if not lines else EXIT_OBLIGATIONS


def _parse_elim(th: Theory, form):
    """(elim (intro ((x TYPE)...) TYPE TERM)
             (ctx ((a TYPE)...)) (gamma TERM...) (motive TYPE) (base TERM))"""
    parts = {f[0].name: f for f in form[1:]}
    ictx, inames = _ctx_of(th, parts["intro"][1])
    a = resolve_type(parts["intro"][2], inames, th)
    x = resolve_term(parts["intro"][3], inames, th)
    dctx, dnames = _ctx_of(th, parts["ctx"][1])
    gamma = tuple(resolve_term(g, dnames, th) for g in parts["gamma"][1:])
    mnames = dnames + ["y*", "p*"]
    motive = resolve_type(parts["motive"][1], mnames, th)
    base = resolve_term(parts["base"][1], dnames, th)
    return IntroCtx(ictx, a, x), ElimCtx(dctx, gamma, motive, base)


def _ctx_of(th, form):
    names: list[str] = []
    ctx: list[T.Expr] = []
    for b in form:
        ctx.append(resolve_type(b[1], names, th))
        names.append(b[0].name)
    return tuple(ctx), names


def cmd_transport(args) -> int:
    th, hom, eng = _engine(args)
    ctx, names = _parse_context(th, args.context)
    (aform,) = parse_all(args.via_type)
    a = resolve_type(aform, names, th)
    (fform,) = parse_all(args.family)
    fam = resolve_type(fform, names + [args.var], th)
    x = resolve_term(parse_all(args.source)[0], names, th)
    y = resolve_term(parse_all(args.target)[0], names, th)
    e = resolve_term(parse_all(args.path)[0], names, th)
    u = resolve_term(parse_all(args.element)[0], names, th)
    out, path, fam_y = eng.transport(ctx, a, fam, x, y, e, u)
    print(f"(transported {T.to_sexpr(th.normalize(ctx, out))})")
    print(f"(path {T.to_sexpr(th.normalize(ctx, path))})")
    if args.model:
        m = load_model(th, _read(args.model))
        env = tuple(reversed([_value_of(v) for v in parse_all(args.env)[0]])) \
            if args.env else ()
        val = eval_term(m, env, out)
        print(f"(evaluated {render_value(val)})")
    return EXIT_OK


def _value_of(x):
    from .oracle import _parse_value
    return _parse_value(x)


def cmd_eval(args) -> int:
    th, _, _ = _load_setting(args)
    m = load_model(th, _read(args.model))
    ctx_env = ()
    names: list[str] = []
    if args.env:
        (pairs,) = parse_all(args.env)
        vals = []
        for b in pairs:
            names.append(b[0].name)
            vals.append(_value_of(b[1]))
        ctx_env = tuple(reversed(vals))
    (form,) = parse_all(args.expr)
    if args.kind == "type":
        a = resolve_type(form, names, th)
        vals = eval_type(m, ctx_env, a)
        print("(" + " ".join(render_value(v) for v in vals) + ")")
    else:
        t = resolve_term(form, names, th)
        print(render_value(eval_term(m, ctx_env, t)))
    return EXIT_OK


def cmd_normalize(args) -> int:
    th, hom, raw = _load_setting(args)
    ctx, names = _parse_context(th, args.context)
    (form,) = parse_all(args.expr)
    t = resolve_term(form, names, th)
    try:
        nf = th.normalize(ctx, t)
    except FuelExhausted:
        print("undecided: rewrite fuel exhausted")
        return EXIT_TYPE
    if args.format == "json":
        print(json.dumps(T.to_json(nf), sort_keys=True))
    else:
        print(T.to_sexpr(nf, names if all(n for n in names) else None))
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="sogat-forge",
        description="Check the syntactic external-univalence conditions of a "
                    "second-order generalized algebraic theory and synthesize "
                    "its weakly stable identity types.")
    ap.add_argument("--fuel", type=int, default=None,
                    help="rewrite step budget (default 1000; env SOGAT_FUEL)")
    ap.add_argument("--level-bound", type=int, default=3,
                    help="instantiation bound for level templates")
    ap.add_argument("--format", choices=("sexpr", "json"), default="sexpr")
    ap.add_argument("--jobs", type=int, default=1,
                    help="parallel goal discharge (output is merged "
                         "deterministically)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, witness=True):
        p.add_argument("--theory", required=True)
        p.add_argument("--homotopy")
        if witness:
            p.add_argument("--witness", action="append")

    p = sub.add_parser("check", help="check assumptions A1-A3 as typechecking obligations")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("obligations", help="emit the obligation list as JSON")
    common(p)
    p.set_defaults(fn=cmd_obligations)

    p = sub.add_parser("translate", help="print the (V,E,R) triple of a type or term")
    common(p)
    p.add_argument("--context", default="()")
    p.add_argument("--kind", choices=("type", "term"), default="type")
    p.add_argument("expr")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("derive", help="emit the identity-type bundle as JSON")
    common(p)
    p.add_argument("--elim", help="file of (elim ...) contexts for J synthesis")
    p.set_defaults(fn=cmd_derive)

    p = sub.add_parser("transport", help="transport an element along a homotopy")
    common(p)
    p.add_argument("--context", required=True)
    p.add_argument("--via-type", required=True, help="the type the path lives over")
    p.add_argument("--var", default="v", help="name of the family's variable")
    p.add_argument("--family", required=True, help="type over context + variable")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--element", required=True)
    p.add_argument("--model", help="finite model to evaluate the result in")
    p.add_argument("--env", help="values for the context variables")
    p.set_defaults(fn=cmd_transport)

    p = sub.add_parser("eval", help="evaluate a closed expression in a finite model")
    p.add_argument("--theory", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--env", help="((name VALUE)...) bindings")
    p.add_argument("--kind", choices=("type", "term"), default="term")
    p.add_argument("expr")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("normalize", help="print the normal form of a term")
    p.add_argument("--theory", required=True)
    p.add_argument("--context", default="()")
    p.add_argument("expr")
    p.set_defaults(fn=cmd_normalize)

    args = ap.parse_args(argv)
    if args.fuel is None and os.environ.get("SOGAT_FUEL"):
        args.fuel = int(os.environ["SOGAT_FUEL"])
    try:
        return args.fn(args)
    except ParseError as ex:
        print(f"parse error: {ex}", file=sys.stderr)
        return EXIT_PARSE
    except (KernelError, ModelError) as ex:
        print(f"type error: {ex}", file=sys.stderr)
        return EXIT_TYPE
    except ObligationError as ex:
        print(f"obligation: {ex}", file=sys.stderr)
        return EXIT_OBLIGATIONS
    except FuelExhausted:
        print("undecided: rewrite fuel exhausted", file=sys.stderr)
        return EXIT_TYPE


if __name__ == "__main__":
    sys.exit(main())

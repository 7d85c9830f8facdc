"""Normalization by evaluation.

Terms are evaluated into a semantic domain (numbers and code as normal
forms, functions as closures or reflected neutrals) and read back
type-directedly.  Evaluation is layered: at layer 0 the global part of the
environment is a weakening and global variables stay neutral; at layer 1 it
is a syntactic global substitution and looking up a global variable drops
back to layer-0 evaluation of the stored code, bringing its dynamics alive.
Box, letbox, match and the Nat recursor follow the same discipline: a box
splices the global substitution into its code; the eliminators either find
code and continue, or get blocked and rebuild a reified neutral.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import typecheck as tc
from .subst import (
    gsubst_apply, p_id, wk_apply, wk_compose, wk_gsubst, wk_id, wk_var,
)
from .syntax import (
    App, Arr, Box, Branch, BranchSet, CBox, Exp, GSubst, GVar, GWk,
    GlobalCtx, LSubst, LVar, Lam, LetBox, LocalCtx, Match, Nat, Opq, PApp,
    PLam, PRec, PSuc, PVar, PZero, Rec, Suc, Typ, Wk, Zero, alpha_eq,
    id_gsubst, id_lsubst, map_typs, max_opq, replace_body,
)


# ---------------------------------------------------------------------------
# Semantic domain


@dataclass(frozen=True)
class Value:
    pass


@dataclass(frozen=True)
class VNat(Value):
    """A normal form at Nat (or at an opaque base type): a zero/suc chain
    over an optional neutral tip."""

    nf: Exp


@dataclass(frozen=True)
class VBox(Value):
    """A normal form at a code type: a box of core code, or a neutral."""

    nf: Exp


@dataclass(frozen=True)
class FunVal:
    pass


@dataclass(frozen=True)
class VFun(Value):
    fn: FunVal


@dataclass(frozen=True)
class Closure(FunVal):
    layer: int
    env: Env
    ann: Typ
    body: Exp
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class Reflected(FunVal):
    ty: Arr
    neutral: Exp


@dataclass(frozen=True)
class GW:
    """Layer-0 global part: a weakening into the ambient global context."""

    g: GWk


@dataclass(frozen=True)
class GS:
    """Layer-1 global part: a syntactic global substitution."""

    s: GSubst


@dataclass(frozen=True)
class Env:
    """Evaluation environment, carrying the ambient contexts its values
    live in (fresh-variable generation needs them)."""

    psi: GlobalCtx
    gamma: LocalCtx
    gpart: GW | GS
    lpart: tuple[Value, ...]
    opq: itertools.count = field(default_factory=itertools.count,
                                 compare=False, repr=False)


def _ann(e: Exp) -> tuple[LocalCtx, Typ, Typ]:
    assert e.ctx is not None and e.ty is not None and e.ret is not None, \
        "evaluation requires elaborated terms"
    return e.ctx, e.ty, e.ret


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(layer: int, e: Exp, env: Env) -> Value:
    match e:
        case LVar(idx=i):
            return env.lpart[len(env.lpart) - 1 - i]
        case GVar(idx=i, subst=d):
            assert d is not None, "evaluation requires elaborated terms"
            if layer == 0:
                g = env.gpart.g
                j = wk_var(g, i)
                entry = env.psi.lookup(j)
                rho = eval_lsubst(0, d, env)
                theta = reify_lenv(env.psi, env.gamma, entry.ctx, rho)
                return reflect(entry.typ, GVar(j, theta))
            code = env.gpart.s.lookup(i)
            rho = eval_lsubst(1, d, env)
            env0 = Env(env.psi, env.gamma, GW(wk_id(len(env.psi))), rho,
                       env.opq)
            return evaluate(0, code, env0)
        case Zero():
            return VNat(e)
        case Suc(pred=p):
            return VNat(Suc(evaluate(layer, p, env).nf))
        case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
            return rec_sem(layer, m, b, s, evaluate(layer, t, env), env,
                           hx, hy)
        case Lam(ann=a, body=b, hint=h):
            return VFun(Closure(layer, env, a, b, h))
        case App(fn=f, arg=a):
            w = Wk(wk_id(len(env.psi)), wk_id(len(env.gamma)))
            return apply_fun(evaluate(layer, f, env), w,
                             evaluate(layer, a, env), env.psi, env.gamma)
        case Box(ctx=c, body=b):
            return VBox(Box(c, gsubst_apply(b, env.gpart.s)))
        case LetBox(scrut=sc, body=b, hint=h):
            ctx, ty, ret = _ann(e)
            sv = evaluate(1, sc, env)
            if isinstance(sv.nf, Box):
                s2 = GS(GSubst(env.gpart.s.terms + (sv.nf.body,)))
                return evaluate(1, b, Env(env.psi, env.gamma, s2, env.lpart,
                                          env.opq))
            # blocked: evaluate the body one global variable up and reify
            psi2 = env.psi.extend(ctx, ty, h)
            w = Wk(p_id(len(env.psi)), wk_id(len(env.gamma)))
            env2 = env_wk(env, w, psi2, env.gamma)
            s2 = GS(GSubst(env2.gpart.s.terms + (GVar(0, id_lsubst(ctx)),)))
            bv = evaluate(1, b, Env(psi2, env.gamma, s2, env2.lpart, env.opq))
            w_nf = reify(psi2, env.gamma, ret, bv)
            return reflect(ret, LetBox(sv.nf, w_nf, ctx, ty, ret, h))
        case Match(scrut=sc, branches=bs):
            ctx, ty, ret = _ann(e)
            sv = evaluate(1, sc, env)
            if isinstance(sv.nf, Box):
                return match_sem(sv.nf.body, bs, env, ctx, ty, ret)
            rbs = BranchSet.of([nfbranch_sem(b, env, ctx, ty, ret)
                                for b in bs])
            return reflect(ret, Match(sv.nf, rbs, ctx, ty, ret))
    raise TypeError(f"not a term: {e!r}")


def eval_lsubst(layer: int, d: LSubst, env: Env) -> tuple[Value, ...]:
    return tuple(evaluate(layer, t, env) for t in d.terms)


def apply_fun(f: Value, w: Wk, arg: Value, psi: GlobalCtx,
              gamma: LocalCtx) -> Value:
    """Apply a function value under a weakening into (psi, gamma), where
    `arg` lives."""
    assert isinstance(f, VFun), f"applying a non-function value: {f!r}"
    fn = f.fn
    if isinstance(fn, Closure):
        env = env_wk(fn.env, w, psi, gamma)
        env = Env(psi, gamma, env.gpart, env.lpart + (arg,), env.opq)
        return evaluate(fn.layer, fn.body, env)
    arg_nf = reify(psi, gamma, fn.ty.dom, arg)
    return reflect(fn.ty.cod, App(wk_apply(fn.neutral, w), arg_nf))


def value_wk(v: Value, w: Wk, psi: GlobalCtx, gamma: LocalCtx) -> Value:
    match v:
        case VNat(nf=nf):
            return VNat(wk_apply(nf, w))
        case VBox(nf=nf):
            return VBox(wk_apply(nf, w))
        case VFun(fn=Closure() as c):
            return VFun(Closure(c.layer, env_wk(c.env, w, psi, gamma),
                                c.ann, c.body, c.hint))
        case VFun(fn=Reflected() as r):
            return VFun(Reflected(r.ty, wk_apply(r.neutral, w)))
    raise TypeError(f"not a value: {v!r}")


def env_wk(env: Env, w: Wk, psi: GlobalCtx, gamma: LocalCtx) -> Env:
    """Functorial action of a weakening on an environment.  The local part
    of the weakening has no effect on the global part."""
    if isinstance(env.gpart, GW):
        gpart: GW | GS = GW(wk_compose(env.gpart.g, w.g))
    else:
        gpart = GS(wk_gsubst(env.gpart.s, w.g))
    lpart = tuple(value_wk(v, w, psi, gamma) for v in env.lpart)
    return Env(psi, gamma, gpart, lpart, env.opq)


# ---------------------------------------------------------------------------
# Reflection and reification


def reflect(t: Typ, v: Exp) -> Value:
    match t:
        case Nat() | Opq():
            return VNat(v)
        case CBox():
            return VBox(v)
        case Arr():
            return VFun(Reflected(t, v))
    raise TypeError(f"not a type: {t!r}")


def reify(psi: GlobalCtx, gamma: LocalCtx, t: Typ, v: Value) -> Exp:
    match t:
        case Nat() | Opq() | CBox():
            return v.nf
        case Arr(dom=dom, cod=cod):
            hint = v.fn.hint if isinstance(v.fn, Closure) else "x"
            gamma2 = gamma.extend(dom, hint)
            w = Wk(wk_id(len(psi)), p_id(len(gamma)))
            body = apply_fun(v, w, reflect(dom, LVar(0)), psi, gamma2)
            return Lam(dom, reify(psi, gamma2, cod, body), hint)
    raise TypeError(f"not a type: {t!r}")


def reify_lenv(psi: GlobalCtx, gamma: LocalCtx, d: LocalCtx,
               rho: tuple[Value, ...]) -> LSubst:
    """Pointwise reification of a local environment; the result is a normal
    local substitution."""
    assert len(rho) == len(d)
    return LSubst(tuple(reify(psi, gamma, entry.typ, v)
                        for entry, v in zip(d.entries, rho)))


# ---------------------------------------------------------------------------
# Semantic match, branches and recursor


def match_sem(code: Exp, bs: BranchSet, env: Env, scrut_ctx: LocalCtx,
              scrut_ty: Typ, ret: Typ) -> Value:
    """Dispatch on the head of a piece of code; a global-variable head is
    blocked and rebuilds a neutral match on the boxed variable."""

    def with_codes(body: Exp, codes: tuple[Exp, ...]) -> Value:
        s2 = GS(GSubst(env.gpart.s.terms + codes))
        return evaluate(1, body, Env(env.psi, env.gamma, s2, env.lpart,
                                     env.opq))

    match code:
        case LVar(idx=i):
            b = bs.get(("var", len(scrut_ctx) - 1 - i))
            return evaluate(1, b.body, env)
        case Zero():
            return evaluate(1, bs.get(("zero",)).body, env)
        case Suc(pred=p):
            return with_codes(bs.get(("suc",)).body, (p,))
        case Lam(body=b):
            return with_codes(bs.get(("lam",)).body, (b,))
        case App(fn=f, arg=a):
            return with_codes(bs.get(("app",)).body, (f, a))
        case Rec(base=b, step=s, scrut=t):
            return with_codes(bs.get(("rec",)).body, (b, s, t))
        case GVar():
            rbs = BranchSet.of([nfbranch_sem(b, env, scrut_ctx, scrut_ty, ret)
                                for b in bs])
            neutral = Match(Box(scrut_ctx, code), rbs, scrut_ctx, scrut_ty,
                            ret)
            return reflect(ret, neutral)
    raise TypeError(f"not a core term: {code!r}")


def nfbranch_sem(b: Branch, env: Env, scrut_ctx: LocalCtx, scrut_ty: Typ,
                 ret: Typ) -> Branch:
    """Normalize one branch body under fresh global variables for its
    pattern, reifying at the match return type."""
    match b:
        case PVar() | PZero():
            nf = reify(env.psi, env.gamma, ret, evaluate(1, b.body, env))
            return replace_body(b, nf)
        case PSuc(hint=h):
            entries = ((scrut_ctx, Nat(), h),)
        case PLam(hint_x=hx, hint=h):
            assert isinstance(scrut_ty, Arr)
            entries = ((scrut_ctx.extend(scrut_ty.dom, hx), scrut_ty.cod, h),)
        case PApp(hint_f=hf, hint_a=ha):
            opq = Opq(next(env.opq))
            entries = ((scrut_ctx, Arr(opq, scrut_ty), hf),
                       (scrut_ctx, opq, ha))
        case PRec(hint_b=hb, hint_x=hx, hint_y=hy, hint_s=hs, hint_n=hn):
            step_ctx = scrut_ctx.extend(Nat(), hx).extend(scrut_ty, hy)
            entries = ((scrut_ctx, scrut_ty, hb), (step_ctx, scrut_ty, hs),
                       (scrut_ctx, Nat(), hn))
        case _:
            raise TypeError(f"unexpected branch: {b!r}")
    psi2 = env.psi
    for ctx, ty, h in entries:
        psi2 = psi2.extend(ctx, ty, h)
    k = len(entries)
    w = Wk(p_id(len(env.psi), k), wk_id(len(env.gamma)))
    env2 = env_wk(env, w, psi2, env.gamma)
    idents = tuple(GVar(k - 1 - j, id_lsubst(entries[j][0]))
                   for j in range(k))
    s2 = GS(GSubst(env2.gpart.s.terms + idents))
    bv = evaluate(1, b.body, Env(psi2, env.gamma, s2, env2.lpart, env.opq))
    return replace_body(b, reify(psi2, env.gamma, ret, bv))


def rec_sem(layer: int, motive: Typ, base: Exp, step: Exp, scrut: Value,
            env: Env, hint_x: str = "x", hint_y: str = "y") -> Value:
    assert isinstance(scrut, VNat)
    nf = scrut.nf
    if isinstance(nf, Zero):
        return evaluate(layer, base, env)
    if isinstance(nf, Suc):
        pred = VNat(nf.pred)
        prev = rec_sem(layer, motive, base, step, pred, env, hint_x, hint_y)
        env2 = Env(env.psi, env.gamma, env.gpart,
                   env.lpart + (pred, prev), env.opq)
        return evaluate(layer, step, env2)
    # neutral scrutinee: compose a neutral recursor from reified parts
    base_nf = reify(env.psi, env.gamma, motive,
                    evaluate(layer, base, env))
    gamma2 = env.gamma.extend(Nat(), hint_x).extend(motive, hint_y)
    w = Wk(wk_id(len(env.psi)), p_id(len(env.gamma), 2))
    env2 = env_wk(env, w, env.psi, gamma2)
    lpart = env2.lpart + (reflect(Nat(), LVar(1)), reflect(motive, LVar(0)))
    step_v = evaluate(layer, step,
                      Env(env.psi, gamma2, env2.gpart, lpart, env.opq))
    step_nf = reify(env.psi, gamma2, motive, step_v)
    return reflect(motive, Rec(motive, base_nf, step_nf, nf, hint_x, hint_y))


# ---------------------------------------------------------------------------
# Identity environment, nbe and equivalence


def id_env(psi: GlobalCtx, gamma: LocalCtx, opq_start: int = 0) -> Env:
    n = len(gamma)
    lpart = tuple(reflect(entry.typ, LVar(n - 1 - k))
                  for k, entry in enumerate(gamma.entries))
    return Env(psi, gamma, GS(id_gsubst(psi)), lpart,
               itertools.count(opq_start))


def _canon_opq(e: Exp) -> Exp:
    """Renumber opaque ids in first-occurrence order so normal forms do not
    depend on how many ids evaluation consumed."""
    mapping: dict[int, int] = {}

    def typ(t: Typ) -> Typ:
        match t:
            case Opq(id=i):
                if i not in mapping:
                    mapping[i] = len(mapping)
                return Opq(mapping[i])
            case Arr(dom=d, cod=c):
                return Arr(typ(d), typ(c))
            case CBox(ctx=ctx, body=b):
                new = LocalCtx(tuple(
                    type(en)(typ(en.typ), en.hint) for en in ctx.entries))
                return CBox(new, typ(b))
            case _:
                return t

    return map_typs(e, typ)


def nbe(psi: GlobalCtx, gamma: LocalCtx, e: Exp, t: Typ) -> Exp:
    """Normal form of a layer-1 term: evaluate in the identity environment
    and read back at the given type."""
    et, e2 = tc.elab(psi, gamma, 1, e)
    if et != t:
        raise tc.TypingError("Mismatch", f"nbe called at {t} on a term of {et}",
                             expected=t, got=et)
    env = id_env(psi, gamma, max_opq(e2, psi, gamma, t) + 1)
    nf = reify(psi, gamma, t, evaluate(1, e2, env))
    return _canon_opq(nf)


def equiv(psi: GlobalCtx, gamma: LocalCtx, layer: int, a: Exp, b: Exp,
          t: Typ) -> bool:
    """Definitional equivalence: syntactic identity at layer 0, equal normal
    forms at layer 1."""
    at, a2 = tc.elab(psi, gamma, layer, a)
    bt, b2 = tc.elab(psi, gamma, layer, b)
    for side, ty in (("left", at), ("right", bt)):
        if ty != t:
            raise tc.TypingError("Mismatch",
                                 f"{side} operand has type {ty}, expected {t}",
                                 expected=t, got=ty)
    if layer == 0:
        return alpha_eq(a2, b2)
    return alpha_eq(nbe(psi, gamma, a2, t), nbe(psi, gamma, b2, t))

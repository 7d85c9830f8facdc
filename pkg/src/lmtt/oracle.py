"""Independent declarative reducer used to cross-check the evaluator.

`step` contracts the leftmost-outermost redex of a well-typed layer-1 term,
applying the equational rules directly over the syntax; it never looks under
box.  It exists purely as a test oracle and shares no code path with the
semantic evaluator.
"""

from __future__ import annotations

from . import typecheck as tc
from .subst import shift
from .syntax import (
    App, Arr, Box, BranchSet, Exp, GSubst, GVar, GlobalCtx, LSubst, LVar,
    Lam, LetBox, LocalCtx, Match, Nat, Rec, Suc, Typ, Zero, id_gsubst,
    replace_body,
)
from .subst import gsubst_apply, lsubst_apply, pattern_ctxs


class FuelExhausted(Exception):
    """Raised when `beta_normalize` hits its step bound; on well-typed input
    this signals a non-termination bug."""


def _subst_locals(body: Exp, gamma_len: int, args: tuple[Exp, ...]) -> Exp:
    """Substitute `args` for the innermost binders of `body` above a local
    context of length `gamma_len`."""
    n = gamma_len
    idents = tuple(LVar(n - 1 - k) for k in range(n))
    return lsubst_apply(body, LSubst(idents + args))

def _splice_globals(body: Exp, psi: GlobalCtx, codes: tuple[Exp, ...]) -> Exp:
    return gsubst_apply(body, GSubst(id_gsubst(psi).terms + codes))


def _contract(psi: GlobalCtx, gamma_len: int, e: Exp) -> Exp | None:
    """The redex at the root, if any."""
    match e:
        case App(fn=Lam(body=b), arg=a):
            return _subst_locals(b, gamma_len, (a,))
        case LetBox(scrut=Box(body=code), body=b):
            return _splice_globals(b, psi, (code,))
        case Match(scrut=Box(body=code), branches=bs, ctx=c):
            if isinstance(code, GVar):
                return None  # blocked: waiting for a global substitution
            b = tc.branch_lookup(bs, code, len(c))
            match code:
                case LVar() | Zero():
                    return b.body
                case Suc(pred=p):
                    return _splice_globals(b.body, psi, (p,))
                case Lam(body=lb):
                    return _splice_globals(b.body, psi, (lb,))
                case App(fn=f, arg=a):
                    return _splice_globals(b.body, psi, (f, a))
                case Rec(base=rb, step=rs, scrut=rt):
                    return _splice_globals(b.body, psi, (rb, rs, rt))
        case Rec(scrut=Zero(), base=b):
            return b
        case Rec(motive=m, base=b, step=s, scrut=Suc(pred=p),
                 hint_x=hx, hint_y=hy):
            rec_p = Rec(m, b, s, p, hx, hy)
            return _subst_locals(s, gamma_len, (p, rec_p))
    return None


def _step(psi: GlobalCtx, gamma_len: int, e: Exp) -> Exp | None:
    contracted = _contract(psi, gamma_len, e)
    if contracted is not None:
        return contracted
    match e:
        case LVar() | Zero() | Box():
            return None  # step never fires under box
        case GVar(idx=i, subst=d):
            for k, t in enumerate(d.terms):
                t2 = _step(psi, gamma_len, t)
                if t2 is not None:
                    terms = d.terms[:k] + (t2,) + d.terms[k + 1:]
                    return GVar(i, LSubst(terms))
            return None
        case Suc(pred=p):
            p2 = _step(psi, gamma_len, p)
            return Suc(p2) if p2 is not None else None
        case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
            b2 = _step(psi, gamma_len, b)
            if b2 is not None:
                return Rec(m, b2, s, t, hx, hy)
            s2 = _step(psi, gamma_len + 2, s)
            if s2 is not None:
                return Rec(m, b, s2, t, hx, hy)
            t2 = _step(psi, gamma_len, t)
            return Rec(m, b, s, t2, hx, hy) if t2 is not None else None
        case Lam(ann=a, body=b, hint=h):
            b2 = _step(psi, gamma_len + 1, b)
            return Lam(a, b2, h) if b2 is not None else None
        case App(fn=f, arg=a):
            f2 = _step(psi, gamma_len, f)
            if f2 is not None:
                return App(f2, a)
            a2 = _step(psi, gamma_len, a)
            return App(f, a2) if a2 is not None else None
        case LetBox(scrut=sc, body=b, ctx=c, ty=ty, ret=r, hint=h):
            sc2 = _step(psi, gamma_len, sc)
            if sc2 is not None:
                return LetBox(sc2, b, c, ty, r, h)
            b2 = _step(psi.extend(c, ty, h), gamma_len, b)
            return LetBox(sc, b2, c, ty, r, h) if b2 is not None else None
        case Match(scrut=sc, branches=bs, ctx=c, ty=ty, ret=r):
            sc2 = _step(psi, gamma_len, sc)
            if sc2 is not None:
                return Match(sc2, bs, c, ty, r)
            for b in bs:
                psi2 = psi
                for k, ctx_k in enumerate(pattern_ctxs(b, c, ty)):
                    psi2 = psi2.extend(ctx_k, _pattern_typ(b, k, ty))
                b2 = _step(psi2, gamma_len, b.body)
                if b2 is not None:
                    new = [replace_body(x, b2) if x is b else x for x in bs]
                    return Match(sc, BranchSet.of(new), c, ty, r)
            return None
    raise TypeError(f"not a term: {e!r}")


def _pattern_typ(b, k: int, scrut_ty: Typ) -> Typ:
    """Entry types for the globals a pattern binds.  The application pattern
    gets a placeholder opaque argument type; bodies cannot depend on it."""
    from .syntax import Opq, PApp, PLam, PSuc
    if isinstance(b, PApp):
        return Arr(Opq(0), scrut_ty) if k == 0 else Opq(0)
    if isinstance(b, PSuc):
        return Nat()
    if isinstance(b, PLam):
        return scrut_ty.cod
    return scrut_ty if k in (0, 1) else Nat()


def step(psi: GlobalCtx, gamma: LocalCtx, e: Exp) -> Exp | None:
    """One leftmost-outermost reduction step, or None in normal form.

    Expects an elaborated, well-typed layer-1 term.
    """
    return _step(psi, len(gamma), e)


def beta_normalize(psi: GlobalCtx, gamma: LocalCtx, e: Exp,
                   fuel: int = 100000) -> Exp:
    for _ in range(fuel):
        e2 = step(psi, gamma, e)
        if e2 is None:
            return e
        e = e2
    raise FuelExhausted(f"no normal form within {fuel} steps")


def trace(psi: GlobalCtx, gamma: LocalCtx, e: Exp,
          fuel: int = 100000) -> list[Exp]:
    """The full reduction sequence starting at `e` (inclusive)."""
    out = [e]
    for _ in range(fuel):
        e2 = step(psi, gamma, e)
        if e2 is None:
            return out
        out.append(e2)
        e = e2
    raise FuelExhausted(f"no normal form within {fuel} steps")


# ---------------------------------------------------------------------------
# Eta expansion of beta-normal forms


def eta_long(psi: GlobalCtx, gamma: LocalCtx, e: Exp, t: Typ) -> Exp:
    """Type-directed eta expansion at arrow types, everywhere a non-lambda
    sits at arrow type.  `e` must be beta-normal at `t`."""
    if isinstance(t, Arr):
        if isinstance(e, Lam):
            body = eta_long(psi, gamma.extend(t.dom, e.hint), e.body, t.cod)
            return Lam(t.dom, body, e.hint)
        hint = "x"
        gamma2 = gamma.extend(t.dom, hint)
        body = eta_long(psi, gamma2, App(shift(e, 0, 1), LVar(0)), t.cod)
        return Lam(t.dom, body, hint)
    match e:
        case Zero():
            return e
        case Suc(pred=p):
            return Suc(eta_long(psi, gamma, p, Nat()))
        case Box():
            return e  # code is rigid
        case App(fn=Lam(body=b), arg=a):
            raise ValueError("eta_long applied to a non-beta-normal term")
        case _:
            return _eta_ne(psi, gamma, e)


def _eta_ne(psi: GlobalCtx, gamma: LocalCtx, e: Exp) -> Exp:
    match e:
        case LVar():
            return e
        case GVar(idx=i, subst=d):
            entry = psi.lookup(i)
            terms = tuple(eta_long(psi, gamma, t, en.typ)
                          for t, en in zip(d.terms, entry.ctx.entries))
            return GVar(i, LSubst(terms))
        case App(fn=f, arg=a):
            ft = tc.infer(psi, gamma, 1, f)
            return App(_eta_ne(psi, gamma, f),
                       eta_long(psi, gamma, a, ft.dom))
        case LetBox(scrut=sc, body=b, ctx=c, ty=ty, ret=r, hint=h):
            sc2 = _eta_ne(psi, gamma, sc)
            b2 = eta_long(psi.extend(c, ty, h), gamma, b, r)
            return LetBox(sc2, b2, c, ty, r, h)
        case Match(scrut=sc, branches=bs, ctx=c, ty=ty, ret=r):
            sc2 = sc if isinstance(sc, Box) else _eta_ne(psi, gamma, sc)
            new = []
            for b in bs:
                psi2 = psi
                for k, ctx_k in enumerate(pattern_ctxs(b, c, ty)):
                    psi2 = psi2.extend(ctx_k, _pattern_typ(b, k, ty))
                new.append(replace_body(b, eta_long(psi2, gamma, b.body, r)))
            return Match(sc2, BranchSet.of(new), c, ty, r)
        case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
            b2 = eta_long(psi, gamma, b, m)
            step_ctx = gamma.extend(Nat(), hx).extend(m, hy)
            s2 = eta_long(psi, step_ctx, s, m)
            return Rec(m, b2, s2, _eta_ne(psi, gamma, t), hx, hy)
    raise TypeError(f"unexpected neutral: {e!r}")

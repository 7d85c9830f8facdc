"""Application and composition of substitutions and weakenings.

All operations expect elaborated terms: GVar substitutions materialized and
Match/LetBox annotations filled in (the annotations supply the arities needed
to extend a global substitution under binders).
"""

from __future__ import annotations

from .syntax import (
    App, Arr, Box, Branch, BranchSet, Exp, GSubst, GVar, GWk, LSubst, LVar,
    Lam, LetBox, LocalCtx, LWk, Match, Nat, PApp, PLam, PRec, PSuc, PVar,
    PZero, Rec, Suc, Wk, Zero, branch_arity, id_lsubst, replace_body,
)


# ---------------------------------------------------------------------------
# Weakenings


def wk_id(n: int) -> tuple[bool, ...]:
    return (True,) * n


def wk_keep(w: tuple[bool, ...]) -> tuple[bool, ...]:
    """q(w): keep the newly bound rightmost entry."""
    return w + (True,)


def wk_drop(w: tuple[bool, ...]) -> tuple[bool, ...]:
    """p(w): drop the newly bound rightmost entry."""
    return w + (False,)


def p_id(n: int, k: int = 1) -> tuple[bool, ...]:
    """Weakening from a context of length n extended by k entries back to
    the original n entries."""
    return (True,) * n + (False,) * k


def wk_var(w: tuple[bool, ...] | None, idx: int) -> int:
    """Rename a target-context de Bruijn index through the weakening."""
    if w is None:
        return idx
    kept = [p for p, keep in enumerate(w) if keep]
    pos = len(kept) - 1 - idx
    return len(w) - 1 - kept[pos]


def wk_compose(w2, w1):
    """Composition such that applying the result equals applying w2 first,
    then w1.  Identity laws and associativity hold."""
    if w2 is None:
        return w1
    if w1 is None:
        return w2
    out = []
    i = 0
    for keep in w1:
        if keep:
            out.append(w2[i])
            i += 1
        else:
            out.append(False)
    assert i == len(w2), "weakening lengths do not line up"
    return tuple(out)


def _wk(e: Exp, g, l) -> Exp:
    """Apply a global and a local renaming; None means identity."""
    match e:
        case LVar(idx=i):
            return LVar(wk_var(l, i)) if l is not None else e
        case GVar(idx=i, subst=d):
            assert d is not None, "weakening requires elaborated terms"
            return GVar(wk_var(g, i),
                        LSubst(tuple(_wk(t, g, l) for t in d.terms)))
        case Zero():
            return e
        case Suc(pred=p):
            return Suc(_wk(p, g, l))
        case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
            l2 = wk_keep(wk_keep(l)) if l is not None else None
            return Rec(m, _wk(b, g, l), _wk(s, g, l2), _wk(t, g, l), hx, hy)
        case Lam(ann=a, body=b, hint=h):
            l1 = wk_keep(l) if l is not None else None
            return Lam(a, _wk(b, g, l1), h)
        case App(fn=f, arg=a):
            return App(_wk(f, g, l), _wk(a, g, l))
        case Box(ctx=c, body=b):
            return Box(c, _wk(b, g, None))
        case LetBox(scrut=s, body=b, ctx=c, ty=ty, ret=r, hint=h):
            g1 = wk_keep(g) if g is not None else None
            return LetBox(_wk(s, g, l), _wk(b, g1, l), c, ty, r, h)
        case Match(scrut=s, branches=bs, ctx=c, ty=ty, ret=r):
            return Match(_wk(s, g, l), _wk_branches(bs, g, l), c, ty, r)
    raise TypeError(f"not a term: {e!r}")


def _wk_branches(bs: BranchSet, g, l) -> BranchSet:
    out = []
    for b in bs:
        gb = g
        if g is not None:
            for _ in range(branch_arity(b)):
                gb = wk_keep(gb)
        out.append(replace_body(b, _wk(b.body, gb, l)))
    return BranchSet.of(out)


def wk_apply(e: Exp, w: Wk) -> Exp:
    """Rename indices through a dual-context weakening; never changes
    structure."""
    return _wk(e, w.g, w.l)


def gwk_apply(e: Exp, g: GWk) -> Exp:
    return _wk(e, g, None)


def lwk_apply(e: Exp, l: LWk) -> Exp:
    return _wk(e, None, l)


def wk_lsubst(d: LSubst, w: Wk) -> LSubst:
    return LSubst(tuple(_wk(t, w.g, w.l) for t in d.terms))


def wk_gsubst(s: GSubst, g: GWk) -> GSubst:
    """Only the global part acts on a global substitution: its entries live
    in their own local contexts."""
    return GSubst(tuple(_wk(t, g, None) for t in s.terms))


def wk_branch(b: Branch, w: Wk) -> Branch:
    gb = w.g
    for _ in range(branch_arity(b)):
        gb = wk_keep(gb)
    return replace_body(b, _wk(b.body, gb, w.l))


# ---------------------------------------------------------------------------
# De Bruijn shifts (weakening by appended entries, without materializing
# keep/drop sequences; used to push substitutions under binders)


def shift(e: Exp, dg: int, dl: int, g_depth: int = 0, l_depth: int = 0) -> Exp:
    if dg == 0 and dl == 0:
        return e
    match e:
        case LVar(idx=i):
            return LVar(i + dl) if i >= l_depth else e
        case GVar(idx=i, subst=d):
            assert d is not None, "shift requires elaborated terms"
            j = i + dg if i >= g_depth else i
            return GVar(j, LSubst(tuple(
                shift(t, dg, dl, g_depth, l_depth) for t in d.terms)))
        case Zero():
            return e
        case Suc(pred=p):
            return Suc(shift(p, dg, dl, g_depth, l_depth))
        case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
            return Rec(m, shift(b, dg, dl, g_depth, l_depth),
                       shift(s, dg, dl, g_depth, l_depth + 2),
                       shift(t, dg, dl, g_depth, l_depth), hx, hy)
        case Lam(ann=a, body=b, hint=h):
            return Lam(a, shift(b, dg, dl, g_depth, l_depth + 1), h)
        case App(fn=f, arg=a):
            return App(shift(f, dg, dl, g_depth, l_depth),
                       shift(a, dg, dl, g_depth, l_depth))
        case Box(ctx=c, body=b):
            # box resets the local scope, so only global shifts propagate
            return Box(c, shift(b, dg, 0, g_depth, 0))
        case LetBox(scrut=s, body=b, ctx=c, ty=ty, ret=r, hint=h):
            return LetBox(shift(s, dg, dl, g_depth, l_depth),
                          shift(b, dg, dl, g_depth + 1, l_depth),
                          c, ty, r, h)
        case Match(scrut=s, branches=bs, ctx=c, ty=ty, ret=r):
            new = [replace_body(b, shift(b.body, dg, dl,
                                         g_depth + branch_arity(b), l_depth))
                   for b in bs]
            return Match(shift(s, dg, dl, g_depth, l_depth),
                         BranchSet.of(new), c, ty, r)
    raise TypeError(f"not a term: {e!r}")


# ---------------------------------------------------------------------------
# Local substitutions


def _lsubst_ext(d: LSubst, k: int) -> LSubst:
    """Extend under k new local binders, mapping each new variable to
    itself."""
    shifted = tuple(shift(t, 0, k) for t in d.terms)
    return LSubst(shifted + tuple(LVar(k - 1 - j) for j in range(k)))


def _lsubst_gshift(d: LSubst, k: int) -> LSubst:
    return LSubst(tuple(shift(t, k, 0) for t in d.terms))


def lsubst_apply(e: Exp, d: LSubst) -> Exp:
    match e:
        case LVar(idx=i):
            return d.lookup(i)
        case GVar(idx=i, subst=dd):
            assert dd is not None, "substitution requires elaborated terms"
            return GVar(i, lsubst_compose(dd, d))
        case Zero():
            return e
        case Suc(pred=p):
            return Suc(lsubst_apply(p, d))
        case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
            return Rec(m, lsubst_apply(b, d), lsubst_apply(s, _lsubst_ext(d, 2)),
                       lsubst_apply(t, d), hx, hy)
        case Lam(ann=a, body=b, hint=h):
            return Lam(a, lsubst_apply(b, _lsubst_ext(d, 1)), h)
        case App(fn=f, arg=a):
            return App(lsubst_apply(f, d), lsubst_apply(a, d))
        case Box():
            # local substitutions do not propagate under box
            return e
        case LetBox(scrut=s, body=b, ctx=c, ty=ty, ret=r, hint=h):
            return LetBox(lsubst_apply(s, d),
                          lsubst_apply(b, _lsubst_gshift(d, 1)),
                          c, ty, r, h)
        case Match(scrut=s, branches=bs, ctx=c, ty=ty, ret=r):
            return Match(lsubst_apply(s, d),
                         lsubst_branchset(bs, d), c, ty, r)
    raise TypeError(f"not a term: {e!r}")


def lsubst_branch(b: Branch, d: LSubst) -> Branch:
    """Branch bodies receive the substitution unchanged locally; pattern
    variables are global, so only the global indices in `d` shift."""
    return replace_body(b, lsubst_apply(b.body, _lsubst_gshift(d, branch_arity(b))))


def lsubst_branchset(bs: BranchSet, d: LSubst) -> BranchSet:
    return BranchSet.of([lsubst_branch(b, d) for b in bs])


def lsubst_compose(d2: LSubst, d1: LSubst) -> LSubst:
    return LSubst(tuple(lsubst_apply(t, d1) for t in d2.terms))


# ---------------------------------------------------------------------------
# Global substitutions


def _gsubst_ext(s: GSubst, ctxs: tuple[LocalCtx, ...]) -> GSubst:
    """Weaken past k new global binders and append their identity entries."""
    k = len(ctxs)
    shifted = tuple(shift(t, k, 0) for t in s.terms)
    idents = tuple(GVar(k - 1 - j, id_lsubst(ctxs[j])) for j in range(k))
    return GSubst(shifted + idents)


def gsubst_apply(e: Exp, s: GSubst) -> Exp:
    match e:
        case LVar():
            return e
        case GVar(idx=i, subst=d):
            assert d is not None, "substitution requires elaborated terms"
            return lsubst_apply(s.lookup(i), gsubst_lsubst(d, s))
        case Zero():
            return e
        case Suc(pred=p):
            return Suc(gsubst_apply(p, s))
        case Rec(motive=m, base=b, step=st, scrut=t, hint_x=hx, hint_y=hy):
            return Rec(m, gsubst_apply(b, s), gsubst_apply(st, s),
                       gsubst_apply(t, s), hx, hy)
        case Lam(ann=a, body=b, hint=h):
            return Lam(a, gsubst_apply(b, s), h)
        case App(fn=f, arg=a):
            return App(gsubst_apply(f, s), gsubst_apply(a, s))
        case Box(ctx=c, body=b):
            # global substitutions splice code under box
            return Box(c, gsubst_apply(b, s))
        case LetBox(scrut=sc, body=b, ctx=c, ty=ty, ret=r, hint=h):
            assert c is not None, "substitution requires elaborated terms"
            return LetBox(gsubst_apply(sc, s),
                          gsubst_apply(b, _gsubst_ext(s, (c,))),
                          c, ty, r, h)
        case Match(scrut=sc, branches=bs, ctx=c, ty=ty, ret=r):
            assert c is not None and ty is not None
            return Match(gsubst_apply(sc, s),
                         gsubst_branchset(bs, s, c, ty), c, ty, r)
    raise TypeError(f"not a term: {e!r}")


def pattern_ctxs(b: Branch, scrut_ctx: LocalCtx, scrut_ty) -> tuple[LocalCtx, ...]:
    """Declared local contexts of the globals a pattern binds, in binding
    order."""
    match b:
        case PVar() | PZero():
            return ()
        case PSuc():
            return (scrut_ctx,)
        case PLam(hint_x=hx):
            assert isinstance(scrut_ty, Arr)
            return (scrut_ctx.extend(scrut_ty.dom, hx),)
        case PApp():
            return (scrut_ctx, scrut_ctx)
        case PRec(hint_x=hx, hint_y=hy):
            step_ctx = scrut_ctx.extend(Nat(), hx).extend(scrut_ty, hy)
            return (scrut_ctx, step_ctx, scrut_ctx)
    raise TypeError(f"unexpected branch in elaborated term: {b!r}")


def gsubst_branch(b: Branch, s: GSubst, scrut_ctx: LocalCtx, scrut_ty) -> Branch:
    ctxs = pattern_ctxs(b, scrut_ctx, scrut_ty)
    return replace_body(b, gsubst_apply(b.body, _gsubst_ext(s, ctxs)))


def gsubst_branchset(bs: BranchSet, s: GSubst, scrut_ctx: LocalCtx,
                     scrut_ty) -> BranchSet:
    return BranchSet.of([gsubst_branch(b, s, scrut_ctx, scrut_ty)
                         for b in bs])


def gsubst_lsubst(d: LSubst, s: GSubst) -> LSubst:
    return LSubst(tuple(gsubst_apply(t, s) for t in d.terms))


def gsubst_compose(s2: GSubst, s1: GSubst) -> GSubst:
    return GSubst(tuple(gsubst_apply(t, s1) for t in s2.terms))

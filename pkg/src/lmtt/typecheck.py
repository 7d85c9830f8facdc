"""Layered typechecker: synthesis, local-substitution checking, branch typing
and the covering judgment for match.

All rules are syntax-directed thanks to the annotations carried by Lam, Box,
Rec and (after elaboration) Match and LetBox.  `elab` both checks a term and
returns it with annotations and identity-substitution sugar filled in;
`infer` exposes the type alone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import wellformed as wf
from .subst import shift
from .syntax import (
    App, Arr, Box, Branch, BranchSet, CBox, Exp, GEntry, GVar, GlobalCtx,
    LSubst, LVar, Lam, LetBox, LocalCtx, Match, Nat, Opq, PApp, PLam, PRec,
    PSuc, PVar, PVarName, PWild, PZero, Rec, Suc, Typ, Zero, branch_key,
    id_lsubst, max_opq, replace_body, _key_rank,
)


class TypingError(Exception):
    """Typing failure with a stable kind tag.

    Kinds: UnboundVar, LayerViolation, NotCore, Mismatch, NonCovering,
    DuplicateBranch, BadScrutinee, BadAnnotation.
    """

    def __init__(self, kind: str, msg: str, *, expected=None, got=None,
                 missing=None):
        super().__init__(f"{kind}: {msg}")
        self.kind = kind
        self.msg = msg
        self.expected = expected
        self.got = got
        self.missing = missing


def _mismatch(expected, got, what: str = "term") -> TypingError:
    return TypingError("Mismatch", f"{what} has type {got}, expected {expected}",
                       expected=expected, got=got)


def _checkable_typ(t: Typ | None) -> bool:
    """Stored annotations are enforced only when they mention no opaque
    type.  Opaque ids are private to one checking run, so annotations
    carrying them (reachable only through machine-built terms, never from
    the surface syntax) are recomputed instead of compared."""
    return t is not None and max_opq(t) < 0


def _checkable_ann(c: LocalCtx | None, ty: Typ | None) -> bool:
    return c is not None and ty is not None and max_opq(c, ty) < 0


_HEAD_NAMES = {"var": "var", "zero": "zero", "suc": "suc", "lam": "lam",
               "app": "app", "rec": "rec"}


def head_name(key) -> str:
    if key[0] == "var":
        return f"var#{key[1]}"
    return _HEAD_NAMES[key[0]]


def required_heads(scrut_ctx: LocalCtx, scrut_ty: Typ) -> set:
    """Pattern heads the covering judgment demands for a scrutinee of type
    `[scrut_ctx |- scrut_ty]`."""
    if isinstance(scrut_ty, Nat):
        heads = {("zero",), ("suc",), ("rec",), ("app",)}
    elif isinstance(scrut_ty, Arr):
        heads = {("lam",), ("rec",), ("app",)}
    else:
        raise TypingError("BadScrutinee",
                          f"cannot match on code of type {scrut_ty}")
    for pos, entry in enumerate(scrut_ctx.entries):
        if entry.typ == scrut_ty:
            heads.add(("var", pos))
    return heads


@dataclass
class _Checker:
    """One checking run; opaque type ids are drawn from a counter threaded
    through the run so results are deterministic."""

    fresh_opq: itertools.count = field(default_factory=itertools.count)

    # -- terms --------------------------------------------------------------

    def exp(self, psi: GlobalCtx, gamma: LocalCtx, layer: int,
            e: Exp) -> tuple[Typ, Exp]:
        match e:
            case LVar(idx=i):
                if not 0 <= i < len(gamma):
                    raise TypingError("UnboundVar", f"local index {i} out of range")
                return gamma.lookup(i), e
            case GVar(idx=i, subst=d):
                if not 0 <= i < len(psi):
                    raise TypingError("UnboundVar", f"global index {i} out of range")
                entry = psi.lookup(i)
                if d is None:
                    d = id_lsubst(entry.ctx)
                d2 = self.lsubst(psi, gamma, layer, d, entry.ctx)
                return entry.typ, GVar(i, d2)
            case Zero():
                return Nat(), e
            case Suc(pred=p):
                pt, p2 = self.exp(psi, gamma, layer, p)
                if pt != Nat():
                    raise _mismatch(Nat(), pt, "suc argument")
                return Nat(), Suc(p2)
            case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
                if not wf.wf_typ(layer, m):
                    raise TypingError("NotCore",
                                      f"rec motive {m} is not valid at layer {layer}")
                bt, b2 = self.exp(psi, gamma, layer, b)
                if bt != m:
                    raise _mismatch(m, bt, "rec base")
                step_ctx = gamma.extend(Nat(), hx).extend(m, hy)
                st, s2 = self.exp(psi, step_ctx, layer, s)
                if st != m:
                    raise _mismatch(m, st, "rec step")
                tt, t2 = self.exp(psi, gamma, layer, t)
                if tt != Nat():
                    raise _mismatch(Nat(), tt, "rec scrutinee")
                return m, Rec(m, b2, s2, t2, hx, hy)
            case Lam(ann=a, body=b, hint=h):
                if not wf.wf_typ(layer, a):
                    raise TypingError("NotCore",
                                      f"annotation {a} is not valid at layer {layer}")
                bt, b2 = self.exp(psi, gamma.extend(a, h), layer, b)
                return Arr(a, bt), Lam(a, b2, h)
            case App(fn=f, arg=a):
                ft, f2 = self.exp(psi, gamma, layer, f)
                if not isinstance(ft, Arr):
                    raise _mismatch("a function type", ft, "application head")
                at, a2 = self.exp(psi, gamma, layer, a)
                if at != ft.dom:
                    raise _mismatch(ft.dom, at, "application argument")
                return ft.cod, App(f2, a2)
            case Box(ctx=c, body=b):
                if layer != 1:
                    raise TypingError("LayerViolation", "box only lives at layer 1")
                if not wf.wf_ctx(0, c):
                    raise TypingError("NotCore", "box context must be core")
                bt, b2 = self.exp(psi, c, 0, b)
                return CBox(c, bt), Box(c, b2)
            case LetBox(scrut=sc, body=b, ctx=c, ty=ty, ret=r, hint=h):
                if layer != 1:
                    raise TypingError("LayerViolation", "letbox only lives at layer 1")
                st, sc2 = self.exp(psi, gamma, 1, sc)
                if not isinstance(st, CBox):
                    raise TypingError("BadScrutinee",
                                      f"letbox scrutinee has type {st}, not a code type")
                if _checkable_ann(c, ty) and CBox(c, ty) != st:
                    raise _mismatch(CBox(c, ty), st, "letbox scrutinee")
                psi2 = psi.extend(st.ctx, st.body, h)
                rt, b2 = self.exp(psi2, gamma, 1, b)
                if _checkable_typ(r) and r != rt:
                    raise _mismatch(r, rt, "letbox body")
                return rt, LetBox(sc2, b2, st.ctx, st.body, rt, h)
            case Match(scrut=sc, branches=bs, ctx=c, ty=ty, ret=r):
                if layer != 1:
                    raise TypingError("LayerViolation", "match only lives at layer 1")
                st, sc2 = self.exp(psi, gamma, 1, sc)
                if not isinstance(st, CBox):
                    raise TypingError("BadScrutinee",
                                      f"match scrutinee has type {st}, not a code type")
                if _checkable_ann(c, ty) and CBox(c, ty) != st:
                    raise _mismatch(CBox(c, ty), st, "match scrutinee")
                want = r if _checkable_typ(r) else None
                rt, bs2 = self.branches(psi, gamma, st.ctx, st.body, want, bs)
                return rt, Match(sc2, bs2, st.ctx, st.body, rt)
        raise TypeError(f"not a term: {e!r}")

    # -- local substitutions --------------------------------------------------

    def lsubst(self, psi: GlobalCtx, gamma: LocalCtx, layer: int,
               d: LSubst, target: LocalCtx) -> LSubst:
        if len(d) != len(target):
            raise TypingError(
                "BadScrutinee",
                f"substitution supplies {len(d)} terms for a context of "
                f"length {len(target)}")
        out = []
        for term, entry in zip(d.terms, target.entries):
            tt, t2 = self.exp(psi, gamma, layer, term)
            if tt != entry.typ:
                raise _mismatch(entry.typ, tt, "substitution entry")
            out.append(t2)
        return LSubst(tuple(out))

    # -- branches and covering ------------------------------------------------

    def branches(self, psi: GlobalCtx, gamma: LocalCtx, scrut_ctx: LocalCtx,
                 scrut_ty: Typ, ret: Typ | None,
                 bs: BranchSet) -> tuple[Typ, BranchSet]:
        required = required_heads(scrut_ctx, scrut_ty)
        resolved = self._resolve_heads(bs, scrut_ctx, required)
        keys = resolved.keys()
        missing = required - keys
        if missing:
            names = sorted(head_name(k) for k in missing)
            raise TypingError("NonCovering",
                              f"match is missing branches: {', '.join(names)}",
                              missing=names)
        extra = keys - required
        if extra:
            names = sorted(head_name(k) for k in extra)
            raise TypingError(
                "BadScrutinee",
                f"branches incompatible with scrutinee type {scrut_ty}: "
                f"{', '.join(names)}")
        out = []
        for b in resolved:
            bt, b2 = self._branch(psi, gamma, scrut_ctx, scrut_ty, b)
            if ret is None:
                ret = bt
            elif bt != ret:
                raise _mismatch(ret, bt, f"{head_name(branch_key(b))} branch body")
            out.append(b2)
        return ret, BranchSet.of(out)

    def _resolve_heads(self, bs: BranchSet, scrut_ctx: LocalCtx,
                       required: set) -> BranchSet:
        """Resolve surface var patterns to positions and expand wildcards."""
        out = []
        for b in bs:
            if isinstance(b, PVarName):
                positions = [pos for pos, entry in enumerate(scrut_ctx.entries)
                             if entry.hint == b.name]
                if not positions:
                    raise TypingError(
                        "UnboundVar",
                        f"var pattern {b.name!r} names no scrutinee-context "
                        f"variable")
                if len(positions) > 1:
                    raise TypingError(
                        "BadAnnotation",
                        f"var pattern {b.name!r} is ambiguous in the "
                        f"scrutinee context")
                out.append(PVar(b.body, positions[0]))
            elif not isinstance(b, PWild):
                out.append(b)
        wilds = [b for b in bs if isinstance(b, PWild)]
        if wilds:
            wild = wilds[0]
            present = {branch_key(b) for b in out}
            for key in sorted(required - present, key=_key_rank):
                out.append(self._wild_branch(key, wild.body))
        try:
            return BranchSet.of(out)
        except ValueError as exc:
            raise TypingError("DuplicateBranch", str(exc)) from None

    @staticmethod
    def _wild_branch(key, body: Exp) -> Branch:
        arity = {"var": 0, "zero": 0, "suc": 1, "lam": 1, "app": 2, "rec": 3}[key[0]]
        body = shift(body, arity, 0)
        match key[0]:
            case "var":
                return PVar(body, key[1])
            case "zero":
                return PZero(body)
            case "suc":
                return PSuc(body)
            case "lam":
                return PLam(body)
            case "app":
                return PApp(body)
            case "rec":
                return PRec(body)
        raise AssertionError(key)

    def _branch(self, psi: GlobalCtx, gamma: LocalCtx, scrut_ctx: LocalCtx,
                scrut_ty: Typ, b: Branch) -> tuple[Typ, Branch]:
        match b:
            case PVar() | PZero():
                entries: tuple[GEntry, ...] = ()
            case PSuc(hint=h):
                entries = (GEntry(scrut_ctx, Nat(), h),)
            case PLam(hint_x=hx, hint=h):
                assert isinstance(scrut_ty, Arr)
                entries = (GEntry(scrut_ctx.extend(scrut_ty.dom, hx),
                                  scrut_ty.cod, h),)
            case PApp(hint_f=hf, hint_a=ha):
                # one opaque instance witnesses every core argument type
                opq = Opq(next(self.fresh_opq))
                entries = (GEntry(scrut_ctx, Arr(opq, scrut_ty), hf),
                           GEntry(scrut_ctx, opq, ha))
            case PRec(hint_b=hb, hint_x=hx, hint_y=hy, hint_s=hs, hint_n=hn):
                step_ctx = scrut_ctx.extend(Nat(), hx).extend(scrut_ty, hy)
                entries = (GEntry(scrut_ctx, scrut_ty, hb),
                           GEntry(step_ctx, scrut_ty, hs),
                           GEntry(scrut_ctx, Nat(), hn))
            case _:
                raise AssertionError(f"unresolved branch: {b!r}")
        bt, body2 = self.exp(psi.extend_all(entries), gamma, 1, b.body)
        return bt, replace_body(b, body2)


def _entry_checker(psi, gamma, *extra) -> _Checker:
    start = max_opq(psi, gamma, *extra) + 1
    return _Checker(itertools.count(start))


def _check_preconditions(psi: GlobalCtx, gamma: LocalCtx, layer: int) -> None:
    if not wf.wf_gctx(psi):
        raise TypingError("NotCore", "global context is not core")
    if not wf.wf_ctx(layer, gamma):
        raise TypingError("NotCore",
                          f"local context is not valid at layer {layer}")


def elab(psi: GlobalCtx, gamma: LocalCtx, layer: int,
         e: Exp) -> tuple[Typ, Exp]:
    """Synthesize a type and return the term with annotations and identity
    substitutions materialized."""
    _check_preconditions(psi, gamma, layer)
    return _entry_checker(psi, gamma, e).exp(psi, gamma, layer, e)


def infer(psi: GlobalCtx, gamma: LocalCtx, layer: int, e: Exp) -> Typ:
    return elab(psi, gamma, layer, e)[0]


def check_lsubst(psi: GlobalCtx, gamma: LocalCtx, layer: int, d: LSubst,
                 target: LocalCtx) -> None:
    """Raise unless `d` supplies one well-typed term per entry of `target`."""
    elab_lsubst(psi, gamma, layer, d, target)


def elab_lsubst(psi: GlobalCtx, gamma: LocalCtx, layer: int, d: LSubst,
                target: LocalCtx) -> LSubst:
    _check_preconditions(psi, gamma, layer)
    checker = _entry_checker(psi, gamma, target, *d.terms)
    return checker.lsubst(psi, gamma, layer, d, target)


def elab_gsubst(psi: GlobalCtx, s, target: GlobalCtx):
    """Check and elaborate a global substitution into `target`: one code
    term per entry, each at layer 0 in its declared context."""
    from .syntax import GSubst
    if len(s) != len(target):
        raise TypingError(
            "BadScrutinee",
            f"substitution supplies {len(s)} terms for a global context of "
            f"length {len(target)}")
    out = []
    for term, entry in zip(s.terms, target.entries):
        got, t2 = elab(psi, entry.ctx, 0, term)
        if got != entry.typ:
            raise _mismatch(entry.typ, got, "global substitution entry")
        out.append(t2)
    return GSubst(tuple(out))


def check_branches(psi: GlobalCtx, gamma: LocalCtx, scrut_ctx: LocalCtx,
                   scrut_ty: Typ, ret_ty: Typ, bs: BranchSet) -> None:
    """The covering judgment: `bs` must contain exactly the required heads
    and every body must check at `ret_ty`."""
    _check_preconditions(psi, gamma, 1)
    checker = _entry_checker(psi, gamma, ret_ty, scrut_ctx, scrut_ty,
                             *(b.body for b in bs))
    checker.branches(psi, gamma, scrut_ctx, scrut_ty, ret_ty, bs)


def branch_lookup(bs: BranchSet, tc: Exp, ctx_len: int | None = None) -> Branch | None:
    """The branch whose pattern head matches the outermost constructor of the
    core term `tc`; None for a global-variable head (the neutral case).

    `ctx_len` is the scrutinee-context length, needed only for variable
    heads.
    """
    match tc:
        case GVar():
            return None
        case LVar(idx=i):
            assert ctx_len is not None, "variable heads need the context length"
            return bs.get(("var", ctx_len - 1 - i))
        case Zero():
            return bs.get(("zero",))
        case Suc():
            return bs.get(("suc",))
        case Lam():
            return bs.get(("lam",))
        case App():
            return bs.get(("app",))
        case Rec():
            return bs.get(("rec",))
    raise TypeError(f"not a core term: {tc!r}")

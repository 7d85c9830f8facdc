"""Nameless core syntax: types, contexts, terms, branches, substitutions, weakenings.

Variables are de Bruijn indices counted from the right end of their context
(index 0 is the most recently bound entry).  Binders keep a printing hint;
hints are excluded from equality and hashing, so dataclass equality *is*
alpha-equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Typ:
    pass


@dataclass(frozen=True)
class Nat(Typ):
    def __str__(self):
        return "Nat"


@dataclass(frozen=True)
class Arr(Typ):
    dom: Typ
    cod: Typ

    def __str__(self):
        dom = f"({self.dom})" if isinstance(self.dom, Arr) else str(self.dom)
        return f"{dom} -> {self.cod}"


@dataclass(frozen=True)
class CBox(Typ):
    """Contextual code type: code of type `body` open in local context `ctx`."""

    ctx: LocalCtx
    body: Typ

    def __str__(self):
        inner = ", ".join(f"{en.hint} : {en.typ}" for en in self.ctx.entries)
        return f"[{inner}{' ' if inner else ''}|- {self.body}]"


@dataclass(frozen=True)
class Opq(Typ):
    """Opaque base type, generated only inside the typechecker.

    Stands for an arbitrary core argument type when checking the body of an
    application pattern; equal only to an Opq with the same id.
    """

    id: int

    def __str__(self):
        return f"#opaque{self.id}"


# ---------------------------------------------------------------------------
# Contexts


@dataclass(frozen=True)
class CtxEntry:
    typ: Typ
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class LocalCtx:
    entries: tuple[CtxEntry, ...] = ()

    @staticmethod
    def of(*pairs: tuple[str, Typ]) -> LocalCtx:
        return LocalCtx(tuple(CtxEntry(t, h) for h, t in pairs))

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, idx: int) -> Typ:
        """Type of the variable with de Bruijn index `idx`."""
        return self.entries[len(self.entries) - 1 - idx].typ

    def extend(self, typ: Typ, hint: str = "x") -> LocalCtx:
        return LocalCtx(self.entries + (CtxEntry(typ, hint),))


@dataclass(frozen=True)
class GEntry:
    ctx: LocalCtx
    typ: Typ
    hint: str = field(default="u", compare=False)


@dataclass(frozen=True)
class GlobalCtx:
    entries: tuple[GEntry, ...] = ()

    @staticmethod
    def of(*triples: tuple[str, LocalCtx, Typ]) -> GlobalCtx:
        return GlobalCtx(tuple(GEntry(c, t, h) for h, c, t in triples))

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, idx: int) -> GEntry:
        return self.entries[len(self.entries) - 1 - idx]

    def extend(self, ctx: LocalCtx, typ: Typ, hint: str = "u") -> GlobalCtx:
        return GlobalCtx(self.entries + (GEntry(ctx, typ, hint),))

    def extend_all(self, new: tuple[GEntry, ...]) -> GlobalCtx:
        return GlobalCtx(self.entries + new)


# ---------------------------------------------------------------------------
# Terms
#
# Match and LetBox carry the scrutinee's contextual type and the result type.
# The surface parser leaves them as None; the typechecker elaborates them.
# Substitution and evaluation require elaborated terms.


@dataclass(frozen=True)
class Exp:
    pass


@dataclass(frozen=True)
class LVar(Exp):
    idx: int


@dataclass(frozen=True)
class GVar(Exp):
    """Global (code) variable applied to an explicit local substitution.

    `subst is None` is the surface identity sugar; the typechecker
    materializes it as the identity substitution over the declared context.
    """

    idx: int
    subst: LSubst | None = None


@dataclass(frozen=True)
class Zero(Exp):
    pass


@dataclass(frozen=True)
class Suc(Exp):
    pred: Exp


@dataclass(frozen=True)
class Rec(Exp):
    """Nat recursor; `step` binds two locals: the predecessor and the
    recursive result."""

    motive: Typ
    base: Exp
    step: Exp
    scrut: Exp
    hint_x: str = field(default="x", compare=False)
    hint_y: str = field(default="y", compare=False)


@dataclass(frozen=True)
class Lam(Exp):
    ann: Typ
    body: Exp
    hint: str = field(default="x", compare=False)


@dataclass(frozen=True)
class App(Exp):
    fn: Exp
    arg: Exp


@dataclass(frozen=True)
class Box(Exp):
    """Code literal; `body` lives at layer 0 in local context `ctx` only."""

    ctx: LocalCtx
    body: Exp


@dataclass(frozen=True)
class LetBox(Exp):
    """Code elimination binding one global variable in `body`.

    `ctx`/`ty` annotate the scrutinee's contextual type, `ret` the type of
    the whole expression.
    """

    scrut: Exp
    body: Exp
    ctx: LocalCtx | None = None
    ty: Typ | None = None
    ret: Typ | None = None
    hint: str = field(default="u", compare=False)


@dataclass(frozen=True)
class Match(Exp):
    scrut: Exp
    branches: BranchSet
    ctx: LocalCtx | None = None
    ty: Typ | None = None
    ret: Typ | None = None


# ---------------------------------------------------------------------------
# Branches


@dataclass(frozen=True)
class Branch:
    body: Exp


@dataclass(frozen=True)
class PVar(Branch):
    """Matches a specific variable of the scrutinee context, keyed by its
    position from the left."""

    pos: int = 0


@dataclass(frozen=True)
class PVarName(Branch):
    """Surface-only variable pattern; the typechecker resolves the name to a
    context position."""

    name: str = "x"


@dataclass(frozen=True)
class PZero(Branch):
    pass


@dataclass(frozen=True)
class PSuc(Branch):
    """Binds one global: the predecessor code."""

    hint: str = field(default="u", compare=False)


@dataclass(frozen=True)
class PLam(Branch):
    """Binds one global: the function body code."""

    hint_x: str = field(default="x", compare=False)
    hint: str = field(default="u", compare=False)


@dataclass(frozen=True)
class PApp(Branch):
    """Binds two globals: function code, then argument code."""

    hint_f: str = field(default="u", compare=False)
    hint_a: str = field(default="u'", compare=False)


@dataclass(frozen=True)
class PRec(Branch):
    """Binds three globals: base code, step code, scrutinee code."""

    hint_b: str = field(default="u", compare=False)
    hint_x: str = field(default="x", compare=False)
    hint_y: str = field(default="y", compare=False)
    hint_s: str = field(default="u'", compare=False)
    hint_n: str = field(default="u''", compare=False)


@dataclass(frozen=True)
class PWild(Branch):
    """Surface-only wildcard; expands to every missing required branch."""


def branch_key(b: Branch):
    match b:
        case PVar(pos=p):
            return ("var", p)
        case PZero():
            return ("zero",)
        case PSuc():
            return ("suc",)
        case PLam():
            return ("lam",)
        case PApp():
            return ("app",)
        case PRec():
            return ("rec",)
        case PVarName(name=n):
            return ("varname", n)
        case PWild():
            return ("wild",)
    raise TypeError(f"not a branch: {b!r}")


_KEY_RANK = {"var": 0, "zero": 1, "suc": 2, "lam": 3, "app": 4, "rec": 5,
             "varname": 6, "wild": 7}


def _key_rank(key) -> tuple:
    return (_KEY_RANK[key[0]],) + key[1:]


def branch_arity(b: Branch) -> int:
    """Number of global variables the pattern binds in its body."""
    match b:
        case PSuc() | PLam():
            return 1
        case PApp():
            return 2
        case PRec():
            return 3
        case _:
            return 0


@dataclass(frozen=True)
class BranchSet:
    """Finite map from pattern head to branch, stored canonically ordered."""

    entries: tuple[Branch, ...] = ()

    @staticmethod
    def of(branches) -> BranchSet:
        branches = sorted(branches, key=lambda b: _key_rank(branch_key(b)))
        keys = [branch_key(b) for b in branches]
        if len(set(keys)) != len(keys):
            dups = sorted({k for k in keys if keys.count(k) > 1})
            raise ValueError(f"duplicate branch heads: {dups}")
        return BranchSet(tuple(branches))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, key) -> Branch | None:
        for b in self.entries:
            if branch_key(b) == key:
                return b
        return None

    def keys(self) -> set:
        return {branch_key(b) for b in self.entries}


# ---------------------------------------------------------------------------
# Substitutions and weakenings


@dataclass(frozen=True)
class LSubst:
    """Simultaneous local substitution: one term per target context entry,
    in context order."""

    terms: tuple[Exp, ...] = ()

    def __len__(self) -> int:
        return len(self.terms)

    def lookup(self, idx: int) -> Exp:
        return self.terms[len(self.terms) - 1 - idx]


@dataclass(frozen=True)
class GSubst:
    """Simultaneous global substitution: one code term per target global
    entry, in context order."""

    terms: tuple[Exp, ...] = ()

    def __len__(self) -> int:
        return len(self.terms)

    def lookup(self, idx: int) -> Exp:
        return self.terms[len(self.terms) - 1 - idx]


# A weakening from a source context to a subsequence of it, as one boolean
# per source entry: True keeps the entry, False drops it.  Identity is
# all-keep.
GWk = tuple[bool, ...]
LWk = tuple[bool, ...]


@dataclass(frozen=True)
class Wk:
    g: GWk
    l: LWk


def id_lsubst(ctx: LocalCtx) -> LSubst:
    n = len(ctx)
    return LSubst(tuple(LVar(n - 1 - k) for k in range(n)))


def id_gsubst(psi: GlobalCtx) -> GSubst:
    n = len(psi)
    return GSubst(tuple(
        GVar(n - 1 - k, id_lsubst(psi.entries[k].ctx)) for k in range(n)))


def numeral(n: int) -> Exp:
    e: Exp = Zero()
    for _ in range(n):
        e = Suc(e)
    return e


def as_numeral(e: Exp) -> int | None:
    n = 0
    while isinstance(e, Suc):
        e = e.pred
        n += 1
    return n if isinstance(e, Zero) else None


# ---------------------------------------------------------------------------
# Alpha-equivalence and normal-form classification


def alpha_eq(a, b) -> bool:
    """Structural identity up to name hints (hints are compare=False)."""
    return a == b


def typ_is_core(t: Typ) -> bool:
    """True iff `t` mentions no contextual box type.  Opq counts as core."""
    match t:
        case Nat() | Opq():
            return True
        case Arr(dom=d, cod=c):
            return typ_is_core(d) and typ_is_core(c)
        case CBox():
            return False
    raise TypeError(f"not a type: {t!r}")


def is_core(e: Exp) -> bool:
    """True iff `e` fits the core-term grammar (no box, letbox or match)."""
    match e:
        case LVar() | Zero():
            return True
        case GVar(subst=d):
            return d is not None and all(is_core(t) for t in d.terms)
        case Suc(pred=p):
            return is_core(p)
        case Rec(motive=m, base=b, step=s, scrut=t):
            return (typ_is_core(m) and is_core(b) and is_core(s)
                    and is_core(t))
        case Lam(ann=a, body=b):
            return typ_is_core(a) and is_core(b)
        case App(fn=f, arg=a):
            return is_core(f) and is_core(a)
        case _:
            return False


def is_nf(e: Exp) -> bool:
    match e:
        case Zero():
            return True
        case Suc(pred=p):
            return is_nf(p)
        case Box(body=b):
            return is_core(b)
        case Lam(body=b):
            return is_nf(b)
        case _:
            return is_ne(e)


def is_ne(e: Exp) -> bool:
    match e:
        case LVar():
            return True
        case GVar(subst=d):
            return d is not None and all(is_nf(t) for t in d.terms)
        case App(fn=f, arg=a):
            return is_ne(f) and is_nf(a)
        case LetBox(scrut=s, body=b):
            return is_ne(s) and is_nf(b)
        case Match(scrut=s, branches=bs):
            scrut_ok = is_ne(s) or (isinstance(s, Box)
                                    and isinstance(s.body, GVar)
                                    and is_core(s.body))
            return scrut_ok and all(is_nf(b.body) for b in bs)
        case Rec(base=b, step=s, scrut=t):
            return is_nf(b) and is_nf(s) and is_ne(t)
        case _:
            return False


def classify_nf(e: Exp) -> Exp | None:
    """The normal-form view of `e`, or None if it is not a normal form.

    Nf/Ne are refinements of Exp, so the view is the term itself; embedding
    it back is the identity.
    """
    return e if is_nf(e) else None


def classify_ne(e: Exp) -> Exp | None:
    return e if is_ne(e) else None


def is_nf_lsubst(d: LSubst) -> bool:
    return all(is_nf(t) for t in d.terms)


def is_nf_branch(b: Branch) -> bool:
    return is_nf(b.body)


# ---------------------------------------------------------------------------
# Generic type traversal (used for opaque-id bookkeeping)


def _typs_in_typ(t: Typ):
    yield t
    match t:
        case Arr(dom=d, cod=c):
            yield from _typs_in_typ(d)
            yield from _typs_in_typ(c)
        case CBox(ctx=ctx, body=b):
            for entry in ctx.entries:
                yield from _typs_in_typ(entry.typ)
            yield from _typs_in_typ(b)


def typs_in_exp(e: Exp):
    """Every type annotation occurring in `e`, outermost first."""
    match e:
        case GVar(subst=d):
            if d is not None:
                for t in d.terms:
                    yield from typs_in_exp(t)
        case Suc(pred=p):
            yield from typs_in_exp(p)
        case Rec(motive=m, base=b, step=s, scrut=t):
            yield from _typs_in_typ(m)
            for sub in (b, s, t):
                yield from typs_in_exp(sub)
        case Lam(ann=a, body=b):
            yield from _typs_in_typ(a)
            yield from typs_in_exp(b)
        case App(fn=f, arg=a):
            yield from typs_in_exp(f)
            yield from typs_in_exp(a)
        case Box(ctx=ctx, body=b):
            for entry in ctx.entries:
                yield from _typs_in_typ(entry.typ)
            yield from typs_in_exp(b)
        case LetBox(scrut=s, body=b, ctx=ctx, ty=ty, ret=ret):
            for t in (ty, ret):
                if t is not None:
                    yield from _typs_in_typ(t)
            if ctx is not None:
                for entry in ctx.entries:
                    yield from _typs_in_typ(entry.typ)
            yield from typs_in_exp(s)
            yield from typs_in_exp(b)
        case Match(scrut=s, branches=bs, ctx=ctx, ty=ty, ret=ret):
            for t in (ty, ret):
                if t is not None:
                    yield from _typs_in_typ(t)
            if ctx is not None:
                for entry in ctx.entries:
                    yield from _typs_in_typ(entry.typ)
            yield from typs_in_exp(s)
            for b in bs:
                yield from typs_in_exp(b.body)


def map_typs(e: Exp, fn) -> Exp:
    """Rebuild `e` with `fn` applied to every complete type annotation."""

    def ctx(c: LocalCtx | None):
        if c is None:
            return None
        return LocalCtx(tuple(CtxEntry(fn(en.typ), en.hint)
                              for en in c.entries))

    def opt(t: Typ | None):
        return None if t is None else fn(t)

    match e:
        case LVar() | Zero():
            return e
        case GVar(idx=i, subst=d):
            if d is None:
                return e
            return GVar(i, LSubst(tuple(map_typs(t, fn) for t in d.terms)))
        case Suc(pred=p):
            return Suc(map_typs(p, fn))
        case Rec(motive=m, base=b, step=s, scrut=t,
                 hint_x=hx, hint_y=hy):
            return Rec(fn(m), map_typs(b, fn), map_typs(s, fn),
                       map_typs(t, fn), hx, hy)
        case Lam(ann=a, body=b, hint=h):
            return Lam(fn(a), map_typs(b, fn), h)
        case App(fn=f, arg=a):
            return App(map_typs(f, fn), map_typs(a, fn))
        case Box(ctx=c, body=b):
            return Box(ctx(c), map_typs(b, fn))
        case LetBox(scrut=s, body=b, ctx=c, ty=ty, ret=r, hint=h):
            return LetBox(map_typs(s, fn), map_typs(b, fn),
                          ctx(c), opt(ty), opt(r), h)
        case Match(scrut=s, branches=bs, ctx=c, ty=ty, ret=r):
            new = [replace_body(b, map_typs(b.body, fn)) for b in bs]
            return Match(map_typs(s, fn), BranchSet.of(new),
                         ctx(c), opt(ty), opt(r))
    raise TypeError(f"not a term: {e!r}")


def replace_body(b: Branch, body: Exp) -> Branch:
    """The same branch with a new body."""
    match b:
        case PVar(pos=p):
            return PVar(body, p)
        case PVarName(name=n):
            return PVarName(body, n)
        case PZero():
            return PZero(body)
        case PSuc(hint=h):
            return PSuc(body, h)
        case PLam(hint_x=hx, hint=h):
            return PLam(body, hx, h)
        case PApp(hint_f=hf, hint_a=ha):
            return PApp(body, hf, ha)
        case PRec(hint_b=hb, hint_x=hx, hint_y=hy, hint_s=hs, hint_n=hn):
            return PRec(body, hb, hx, hy, hs, hn)
        case PWild():
            return PWild(body)
    raise TypeError(f"not a branch: {b!r}")


def max_opq(*items) -> int:
    """Largest Opq id occurring in the given terms, types and contexts;
    -1 if none."""
    best = -1

    def scan_typ(t: Typ):
        nonlocal best
        for sub in _typs_in_typ(t):
            if isinstance(sub, Opq):
                best = max(best, sub.id)

    for item in items:
        if isinstance(item, Typ):
            scan_typ(item)
        elif isinstance(item, Exp):
            for t in typs_in_exp(item):
                if isinstance(t, Opq):
                    best = max(best, t.id)
        elif isinstance(item, LocalCtx):
            for entry in item.entries:
                scan_typ(entry.typ)
        elif isinstance(item, GlobalCtx):
            for entry in item.entries:
                scan_typ(entry.typ)
                for ce in entry.ctx.entries:
                    scan_typ(ce.typ)
    return best

"""Seeded generation of well-typed terms, contexts, substitutions and
weakenings for the property suites.

Generation is type- and layer-directed: every produced term synthesizes
exactly the requested type at the requested layer.  Redexes (beta, letbox,
match-on-box, rec-on-numeral) are produced deliberately so reduction traces
are non-trivial.
"""

import random

from lmtt.syntax import (
    App, Arr, Box, CBox, GEntry, GSubst, GVar, GlobalCtx, LSubst, LVar, Lam,
    LetBox, LocalCtx, Match, Nat, Opq, PApp, PLam, PRec, PSuc, PVar, PZero,
    Rec, Suc, Wk, Zero, BranchSet,
)
from lmtt.typecheck import required_heads

_NAMES = "abcdefghij"


class Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self._opq = 1_000_000  # private placeholder ids, never user-visible

    # -- types and contexts ---------------------------------------------------

    def core_typ(self, depth: int):
        if depth <= 0 or self.rng.random() < 0.55:
            return Nat()
        return Arr(self.core_typ(depth - 1), self.core_typ(depth - 1))

    def typ(self, layer: int, depth: int):
        if layer == 0:
            return self.core_typ(depth)
        r = self.rng.random()
        if depth > 0 and r < 0.25:
            return CBox(self.core_ctx(1), self.core_typ(1))
        if depth > 0 and r < 0.5:
            return Arr(self.typ(1, depth - 1), self.typ(1, depth - 1))
        return Nat()

    def core_ctx(self, max_len: int) -> LocalCtx:
        n = self.rng.randint(0, max_len)
        return LocalCtx.of(*((_NAMES[k], self.core_typ(1)) for k in range(n)))

    def ctx(self, layer: int, max_len: int) -> LocalCtx:
        n = self.rng.randint(0, max_len)
        return LocalCtx.of(*((_NAMES[k], self.typ(layer, 2))
                             for k in range(n)))

    def gctx(self, max_len: int) -> GlobalCtx:
        n = self.rng.randint(0, max_len)
        return GlobalCtx.of(*((f"g{k}", self.core_ctx(1), self.core_typ(1))
                              for k in range(n)))

    # -- terms -----------------------------------------------------------------

    def _canonical(self, psi: GlobalCtx, gamma: LocalCtx, layer: int, ty):
        """A smallest inhabitant, used when the depth budget runs out."""
        match ty:
            case Nat():
                return Zero()
            case Arr(dom=d, cod=c):
                return Lam(d, self._canonical(psi, gamma.extend(d, "v"),
                                              layer, c), "v")
            case CBox(ctx=ctx, body=b):
                return Box(ctx, self._canonical(psi, ctx, 0, b))
            case Opq():
                for i in range(len(gamma)):
                    if gamma.lookup(i) == ty:
                        return LVar(i)
                for i in range(len(psi)):
                    entry = psi.lookup(i)
                    if entry.typ == ty and len(entry.ctx) == 0:
                        return GVar(i, LSubst(()))
        raise AssertionError(f"no canonical inhabitant of {ty}")

    def term(self, psi: GlobalCtx, gamma: LocalCtx, layer: int, ty,
             depth: int):
        if depth <= 0:
            opts = [(1.0, lambda: self._canonical(psi, gamma, layer, ty))]
            for i in range(len(gamma)):
                if gamma.lookup(i) == ty:
                    opts.append((2.0, lambda i=i: LVar(i)))
            weights = [w for w, _ in opts]
            return self.rng.choices([f for _, f in opts], weights)[0]()

        opts = []
        for i in range(len(gamma)):
            if gamma.lookup(i) == ty:
                opts.append((3.0, lambda i=i: LVar(i)))
        for i in range(len(psi)):
            entry = psi.lookup(i)
            if entry.typ == ty:
                opts.append((2.0, lambda i=i, e=entry:
                             GVar(i, self._lsubst_for(psi, gamma, layer, e.ctx,
                                                      depth - 1))))

        if depth > 0:
            for i in range(len(gamma)):
                t = gamma.lookup(i)
                if isinstance(t, Arr) and t.cod == ty and \
                        self._inhabitable(psi, gamma, t.dom):
                    opts.append((1.5, lambda i=i, t=t: App(
                        LVar(i),
                        self.term(psi, gamma, layer, t.dom, depth - 1))))
            for i in range(len(psi)):
                entry = psi.lookup(i)
                t = entry.typ
                if isinstance(t, Arr) and t.cod == ty and \
                        self._inhabitable(psi, gamma, t.dom):
                    opts.append((1.5, lambda i=i, e=entry, t=t: App(
                        GVar(i, self._lsubst_for(psi, gamma, layer, e.ctx,
                                                 depth - 1)),
                        self.term(psi, gamma, layer, t.dom, depth - 1))))

        if isinstance(ty, Nat):
            opts.append((2.0, lambda: Zero()))
            if depth > 0:
                opts.append((2.0, lambda: Suc(
                    self.term(psi, gamma, layer, Nat(), depth - 1))))
        elif isinstance(ty, Arr):
            opts.append((3.0, lambda: Lam(
                ty.dom,
                self.term(psi, gamma.extend(ty.dom, "v"), layer, ty.cod,
                          max(depth - 1, 0)),
                "v")))
        elif isinstance(ty, CBox):
            if layer == 1:
                opts.append((3.0, lambda: Box(
                    ty.ctx, self.term(psi, ty.ctx, 0, ty.body,
                                      max(depth - 1, 0)))))

        if depth > 0:
            opts.append((1.5, lambda: self._beta_redex(psi, gamma, layer, ty,
                                                       depth)))
            if not isinstance(ty, Opq):
                # a rec motive is real syntax, so it must never carry one of
                # the generator's placeholder opaque ids
                opts.append((0.7, lambda: Rec(
                    ty,
                    self.term(psi, gamma, layer, ty, depth - 1),
                    self.term(psi, gamma.extend(Nat(), "p").extend(ty, "r"),
                              layer, ty, depth - 1),
                    self.term(psi, gamma, layer, Nat(), depth - 1),
                    "p", "r")))
            if layer == 1:
                opts.append((1.2, lambda: self._letbox(psi, gamma, ty, depth)))
                if depth > 1:
                    opts.append((1.0, lambda: self._match(psi, gamma, ty,
                                                          depth)))

        if not opts:
            raise AssertionError(f"no way to inhabit {ty} in this scope")
        weights = [w for w, _ in opts]
        thunk = self.rng.choices([f for _, f in opts], weights)[0]
        return thunk()

    def _inhabitable(self, psi, gamma, ty) -> bool:
        if not isinstance(ty, Opq):
            return True
        return (any(gamma.lookup(i) == ty for i in range(len(gamma)))
                or any(psi.lookup(i).typ == ty and len(psi.lookup(i).ctx) == 0
                       for i in range(len(psi))))

    def _lsubst_for(self, psi, gamma, layer, target: LocalCtx, depth: int):
        d = min(depth, 2)
        return LSubst(tuple(self.term(psi, gamma, layer, entry.typ, d)
                            for entry in target.entries))

    def _beta_redex(self, psi, gamma, layer, ty, depth: int):
        dom = self.typ(layer, 1)
        body = self.term(psi, gamma.extend(dom, "w"), layer, ty, depth - 1)
        arg = self.term(psi, gamma, layer, dom, depth - 1)
        return App(Lam(dom, body, "w"), arg)

    def _letbox(self, psi, gamma, ty, depth: int):
        ctx = self.core_ctx(1)
        code_ty = self.core_typ(1)
        scrut = self.term(psi, gamma, 1, CBox(ctx, code_ty), depth - 1)
        body = self.term(psi.extend(ctx, code_ty, "u"), gamma, 1, ty,
                         depth - 1)
        return LetBox(scrut, body, hint="u")

    def _match(self, psi, gamma, ty, depth: int):
        ctx = self.core_ctx(1)
        scrut_ty = self.rng.choice([Nat(), Arr(Nat(), Nat())])
        scrut = self.term(psi, gamma, 1, CBox(ctx, scrut_ty), depth - 1)
        branches = []
        for key in sorted(required_heads(ctx, scrut_ty)):
            branches.append(self._branch(psi, gamma, ctx, scrut_ty, ty, key,
                                         depth - 2))
        return Match(scrut, BranchSet.of(branches))

    def _branch(self, psi, gamma, ctx, scrut_ty, ret, key, depth: int):
        def body(*entries):
            psi2 = psi.extend_all(tuple(GEntry(c, t, h) for h, c, t in entries))
            return self.term(psi2, gamma, 1, ret, max(depth, 0))

        if key[0] == "var":
            return PVar(body(), key[1])
        if key[0] == "zero":
            return PZero(body())
        if key[0] == "suc":
            return PSuc(body(("u", ctx, Nat())))
        if key[0] == "lam":
            inner = ctx.extend(scrut_ty.dom, "x")
            return PLam(body(("u", inner, scrut_ty.cod)))
        if key[0] == "app":
            self._opq += 1
            opq = Opq(self._opq)
            return PApp(body(("u", ctx, Arr(opq, scrut_ty)), ("u'", ctx, opq)))
        if key[0] == "rec":
            step_ctx = ctx.extend(Nat(), "x").extend(scrut_ty, "y")
            return PRec(body(("u", ctx, scrut_ty), ("u'", step_ctx, scrut_ty),
                             ("u''", ctx, Nat())))
        raise AssertionError(key)

    # -- substitutions and weakenings -------------------------------------------

    def lsubst(self, psi, gamma_src, layer, target: LocalCtx) -> LSubst:
        return LSubst(tuple(self.term(psi, gamma_src, layer, entry.typ, 2)
                            for entry in target.entries))

    def gsubst(self, psi_src, target: GlobalCtx) -> GSubst:
        return GSubst(tuple(self.term(psi_src, entry.ctx, 0, entry.typ, 2)
                            for entry in target.entries))

    def grow_local(self, gamma: LocalCtx, layer: int, extra: int):
        """A larger context plus the weakening from it back onto `gamma`."""
        marks = [True] * len(gamma) + [False] * extra
        self.rng.shuffle(marks)
        entries = []
        it = iter(gamma.entries)
        for keep in marks:
            entries.append(next(it) if keep
                           else LocalCtx.of(("n", self.typ(layer, 1))).entries[0])
        return LocalCtx(tuple(entries)), tuple(marks)

    def grow_global(self, psi: GlobalCtx, extra: int):
        marks = [True] * len(psi) + [False] * extra
        self.rng.shuffle(marks)
        entries = []
        it = iter(psi.entries)
        for keep in marks:
            entries.append(next(it) if keep
                           else GEntry(self.core_ctx(1), self.core_typ(1), "n"))
        return GlobalCtx(tuple(entries)), tuple(marks)

    def weakening(self, psi, gamma, layer: int = 1):
        psi2, g = self.grow_global(psi, self.rng.randint(0, 2))
        gamma2, l = self.grow_local(gamma, layer, self.rng.randint(0, 2))
        return psi2, gamma2, Wk(g, l)


def population(n: int, seed: int, layer: int, depth: int = 6):
    """n tuples (psi, gamma, ty, term), deterministically from the seed."""
    gen = Gen(random.Random(seed))
    out = []
    for _ in range(n):
        psi = gen.gctx(2)
        gamma = gen.ctx(layer, 2)
        ty = gen.typ(layer, 2)
        out.append((psi, gamma, ty, gen.term(psi, gamma, layer, ty, depth)))
    return out

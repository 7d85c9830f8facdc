"""Core syntax: alpha-equivalence, normal-form classification, numerals."""

import random

import pytest

from gen_terms import population
from lmtt.syntax import (
    App, Arr, Box, BranchSet, CBox, GVar, LSubst, LVar, Lam, LocalCtx, Match,
    Nat, PApp, PLam, PRec, PSuc, PVar, PZero, Rec, Suc, Zero, alpha_eq,
    as_numeral, classify_ne, classify_nf, is_core, is_ne, is_nf, numeral,
)


def lam(ann, body, hint="x"):
    return Lam(ann, body, hint)


class TestAlphaEq:
    def test_hints_irrelevant(self):
        a = Lam(Nat(), LVar(0), "x")
        b = Lam(Nat(), LVar(0), "y")
        assert alpha_eq(a, b)

    def test_distinct_terms(self):
        assert not alpha_eq(Zero(), Suc(Zero()))

    def test_box_bodies_compared_syntactically(self):
        ctx = LocalCtx.of(("x", Nat()))
        assert not alpha_eq(Box(ctx, LVar(0)), Box(ctx, Zero()))

    def test_ctx_hints_irrelevant(self):
        a = Box(LocalCtx.of(("x", Nat())), LVar(0))
        b = Box(LocalCtx.of(("y", Nat())), LVar(0))
        assert alpha_eq(a, b)

    def test_equivalence_relation_on_random_terms(self):
        rng = random.Random(5)
        pop = population(60, seed=5, layer=1, depth=4)
        terms = [e for (_, _, _, e) in pop]
        for e in terms:
            assert alpha_eq(e, e)
        for a, b in zip(terms, terms[1:]):
            assert alpha_eq(a, b) == alpha_eq(b, a)
        for a, b, c in zip(terms, terms[1:], terms[2:]):
            if alpha_eq(a, b) and alpha_eq(b, c):
                assert alpha_eq(a, c)
        # renaming binder hints preserves equivalence
        for e in terms[:20]:
            renamed = _shuffle_hints(e, rng)
            assert alpha_eq(e, renamed)


def _shuffle_hints(e, rng):
    from dataclasses import fields, replace
    new = {}
    for f in fields(e):
        v = getattr(e, f.name)
        if f.name.startswith("hint"):
            new[f.name] = f"h{rng.randint(0, 999)}"
        elif isinstance(v, type(e).__mro__[-2]) or hasattr(v, "__dataclass_fields__"):
            pass
    # only rename the outermost binder; enough to exercise compare=False
    return replace(e, **new) if new else e


class TestClassify:
    def test_numeral_is_nf(self):
        assert classify_nf(Suc(Zero())) is not None

    def test_beta_redex_is_not_nf(self):
        e = App(lam(Nat(), LVar(0)), Zero())
        assert classify_nf(e) is None

    def test_match_on_boxed_gvar_is_neutral(self):
        # match box(. u^[]) with normalized branches is blocked, hence normal
        bs = BranchSet.of([
            PZero(Zero()),
            PSuc(Zero()),
            PApp(Zero()),
            PRec(Zero()),
        ])
        scrut = Box(LocalCtx(), GVar(0, LSubst(())))
        m = Match(scrut, bs, LocalCtx(), Nat(), Nat())
        assert classify_ne(m) is not None
        assert classify_nf(m) is not None

    def test_match_on_plain_box_is_a_redex(self):
        bs = BranchSet.of([PZero(Zero()), PSuc(Zero()), PApp(Zero()),
                           PRec(Zero())])
        m = Match(Box(LocalCtx(), Zero()), bs, LocalCtx(), Nat(), Nat())
        assert classify_nf(m) is None

    def test_box_of_core_is_nf_even_with_redex_inside(self):
        code = App(lam(Nat(), LVar(0)), Zero())
        assert is_core(code)
        assert is_nf(Box(LocalCtx(), code))

    def test_box_of_non_core_rejected(self):
        assert not is_core(Box(LocalCtx(), Zero()))

    def test_eta_short_neutral_is_nf(self):
        # normal forms are not forced eta-long by the grammar
        assert is_ne(LVar(0))
        assert is_nf(App(LVar(0), Zero()))

    def test_roundtrip_on_success_set(self, layer1_population):
        from lmtt.nbe import nbe
        for psi, gamma, ty, e in layer1_population[:40]:
            nf = nbe(psi, gamma, e, ty)
            view = classify_nf(nf)
            assert view is nf  # the view is the term itself


class TestNumerals:
    def test_numeral_roundtrip(self):
        for n in (0, 1, 5):
            assert as_numeral(numeral(n)) == n

    def test_non_numeral(self):
        assert as_numeral(Suc(LVar(0))) is None


class TestBranchSet:
    def test_duplicate_heads_rejected(self):
        with pytest.raises(ValueError):
            BranchSet.of([PZero(Zero()), PZero(Suc(Zero()))])

    def test_canonical_order(self):
        bs = BranchSet.of([PRec(Zero()), PZero(Zero()), PVar(Zero(), 1),
                           PVar(Zero(), 0), PSuc(Zero()), PApp(Zero())])
        keys = [type(b).__name__ for b in bs]
        assert keys == ["PVar", "PVar", "PZero", "PSuc", "PApp", "PRec"]
        assert [b.pos for b in bs if isinstance(b, PVar)] == [0, 1]

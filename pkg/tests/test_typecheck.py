"""The layered typechecker: synthesis, substitution checking, covering."""

import pytest

from conftest import EMPTY_G, EMPTY_L
from lmtt.surface import parse_exp_text, parse_typ_text, resolve_exp
from lmtt.syntax import (
    App, Arr, Box, BranchSet, CBox, GSubst, GVar, GlobalCtx, LSubst, LVar,
    Lam, LocalCtx, Match, Nat, Opq, PApp, PRec, PSuc, PVar, PZero, Rec, Suc,
    Zero, alpha_eq,
)
from lmtt.typecheck import (
    TypingError, branch_lookup, check_branches, check_lsubst, elab, infer,
)

NN = Arr(Nat(), Nat())


def term(src, globals_=(), defs=None):
    return resolve_exp(parse_exp_text(src), [], list(globals_), defs or {})


def typ(src):
    return parse_typ_text(src)


class TestInfer:
    def test_axiom_k(self):
        e = term(r"\(f : [|- Nat -> Nat -> Nat]). \(x : [|- Nat])."
                 r" letbox u = f in letbox u' = x in box(. u^[] u'^[])")
        want = typ("[|- Nat -> Nat -> Nat] -> [|- Nat] -> [|- Nat -> Nat]")
        assert infer(EMPTY_G, EMPTY_L, 1, e) == want

    def test_axiom_t(self):
        e = term(r"\(x : [|- Nat]). letbox u = x in u^[]")
        assert infer(EMPTY_G, EMPTY_L, 1, e) == typ("[|- Nat] -> Nat")

    def test_box_rejected_at_layer_0(self):
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 0, Box(LocalCtx(), Zero()))
        assert exc.value.kind == "LayerViolation"

    def test_letbox_and_match_rejected_at_layer_0(self):
        e = term("letbox u = box(. zero) in zero")
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 0, e)
        assert exc.value.kind == "LayerViolation"

    def test_full_match_over_open_code(self):
        psi = GlobalCtx.of(("u", LocalCtx.of(("x", Nat())), Nat()))
        e = term("match box(x : Nat. suc x) { zero => zero | suc ?u => u^[zero]"
                 " | rec ?a (x y. ?b) ?c => zero | ?f ?g => zero"
                 " | var x => zero }", globals_=["u"])
        assert infer(psi, EMPTY_L, 1, e) == Nat()

    def test_determinism(self):
        e = term("match box(. zero) { zero => zero | suc ?u => zero"
                 " | rec ?a (x y. ?b) ?c => zero | ?f ?g => f^[] g^[] }")
        a = elab(EMPTY_G, EMPTY_L, 1, e)
        b = elab(EMPTY_G, EMPTY_L, 1, e)
        assert a == b

    def test_elaboration_idempotent(self):
        e = term("letbox u = box(. suc zero) in"
                 " match box(. u^[]) { zero => zero | suc ?w => w^[]"
                 " | rec ?a (x y. ?b) ?c => zero | ?f ?g => zero }")
        t1, e1 = elab(EMPTY_G, EMPTY_L, 1, e)
        t2, e2 = elab(EMPTY_G, EMPTY_L, 1, e1)
        assert t1 == t2 and e1 == e2

    def test_unbound_variables(self):
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 1, LVar(0))
        assert exc.value.kind == "UnboundVar"

    def test_application_mismatch(self):
        e = App(Lam(Nat(), LVar(0)), Box(LocalCtx(), Zero()))
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 1, e)
        assert exc.value.kind == "Mismatch"

    def test_bad_lam_annotation(self):
        bad = CBox(LocalCtx(), CBox(LocalCtx(), Nat()))
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 1, Lam(bad, LVar(0)))
        assert exc.value.kind == "NotCore"

    def test_validity_of_result(self, layer1_population):
        from lmtt.wellformed import wf_typ
        for psi, gamma, ty, e in layer1_population[:80]:
            assert wf_typ(1, infer(psi, gamma, 1, e))


class TestCheckLsubst:
    def test_empty(self):
        check_lsubst(EMPTY_G, EMPTY_L, 1, LSubst(()), LocalCtx())

    def test_single_entry(self):
        gamma = LocalCtx.of(("y", Nat()))
        check_lsubst(EMPTY_G, gamma, 1, LSubst((Suc(LVar(0)),)),
                     LocalCtx.of(("x", Nat())))

    def test_layer0_forbids_box(self):
        target = LocalCtx.of(("x", CBox(LocalCtx(), Nat())))
        with pytest.raises(TypingError):
            check_lsubst(EMPTY_G, EMPTY_L, 0, LSubst((Box(LocalCtx(), Zero()),)),
                         target)

    def test_arity_mismatch(self):
        with pytest.raises(TypingError) as exc:
            check_lsubst(EMPTY_G, EMPTY_L, 1, LSubst(()),
                         LocalCtx.of(("x", Nat())))
        assert exc.value.kind == "BadScrutinee"


class TestCovering:
    def test_missing_rec_branch(self):
        bs = BranchSet.of([PZero(Zero()), PSuc(Zero()), PApp(Zero())])
        with pytest.raises(TypingError) as exc:
            check_branches(EMPTY_G, EMPTY_L, LocalCtx(), Nat(), Nat(), bs)
        assert exc.value.kind == "NonCovering"
        assert exc.value.missing == ["rec"]

    def test_arrow_scrutinee_full_set(self):
        zero_fn = Lam(Nat(), Zero())
        bs_src = ("match box(. \\(x : Nat). x) { \\x. ?u => zero"
                  " | rec ?a (x y. ?b) ?c => zero | ?f ?g => zero }")
        e = term(bs_src)
        assert infer(EMPTY_G, EMPTY_L, 1, e) == Nat()

    def test_incompatible_branch_rejected(self):
        e = term("match box(. \\(x : Nat). x) { zero => zero | \\x. ?u => zero"
                 " | rec ?a (x y. ?b) ?c => zero | ?f ?g => zero }")
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 1, e)
        assert exc.value.kind == "BadScrutinee"

    def test_duplicate_branch(self):
        with pytest.raises(TypingError) as exc:
            term("match box(. zero) { zero => zero | zero => suc zero }")
        assert exc.value.kind == "DuplicateBranch"

    def test_opaque_argument_used_at_concrete_type_rejected(self):
        # the captured argument code has an opaque type; treating it as Nat
        # must fail while the application u g is fine
        bad = term("match box(. (\\(x : Nat). x) zero) { zero => zero"
                   " | suc ?u => zero | rec ?a (x y. ?b) ?c => zero"
                   " | ?f ?g => suc g^[] }")
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 1, bad)
        assert exc.value.kind == "Mismatch"

        good = term("match box(. (\\(x : Nat). x) zero) { zero => zero"
                    " | suc ?u => zero | rec ?a (x y. ?b) ?c => zero"
                    " | ?f ?g => f^[] g^[] }")
        assert infer(EMPTY_G, EMPTY_L, 1, good) == Nat()

    def test_cannot_match_opaque_scrutinee(self):
        # inside an application branch, matching on code of the opaque
        # argument type is impossible
        bad = term("match box(. (\\(x : Nat). x) zero) { zero => zero"
                   " | suc ?u => zero | rec ?a (x y. ?b) ?c => zero"
                   " | ?f ?g => match box(. g^[]) { _ => zero } }")
        with pytest.raises(TypingError) as exc:
            infer(EMPTY_G, EMPTY_L, 1, bad)
        assert exc.value.kind == "BadScrutinee"

    def test_var_branches_keyed_by_position(self):
        psi = EMPTY_G
        e = term("match box(n : Nat, f : Nat -> Nat, m : Nat. n)"
                 " { var n => zero | var m => suc zero | zero => zero"
                 " | suc ?u => zero | rec ?a (x y. ?b) ?c => zero"
                 " | ?f ?g => zero }")
        t, e2 = elab(psi, EMPTY_L, 1, e)
        positions = sorted(b.pos for b in e2.branches if isinstance(b, PVar))
        assert positions == [0, 2]

    def test_wildcard_expands_to_missing_heads(self):
        e = term("match box(. zero) { zero => suc zero | _ => zero }")
        t, e2 = elab(EMPTY_G, EMPTY_L, 1, e)
        keys = {type(b).__name__ for b in e2.branches}
        assert keys == {"PZero", "PSuc", "PApp", "PRec"}

    def test_wildcard_body_shifted_under_pattern_binders(self):
        # wildcard body mentioning an outer global must stay well-typed
        # after expansion into binding branches
        psi = GlobalCtx.of(("w", LocalCtx(), Nat()))
        e = term("match box(. zero) { _ => w^[] }", globals_=["w"])
        assert infer(psi, EMPTY_L, 1, e) == Nat()


class TestBranchLookup:
    BS = BranchSet.of([PZero(Zero()), PSuc(Suc(Zero())), PApp(Zero()),
                       PRec(Zero()), PVar(Zero(), 0)])

    def test_suc_head(self):
        assert branch_lookup(self.BS, Suc(Zero())) == PSuc(Suc(Zero()))

    def test_gvar_head_is_none(self):
        assert branch_lookup(self.BS, GVar(0, LSubst(()))) is None

    def test_rec_head(self):
        code = Rec(Nat(), Zero(), Suc(LVar(0)), LVar(0))
        got = branch_lookup(self.BS, code, ctx_len=1)
        assert isinstance(got, PRec)

    def test_var_head_uses_position(self):
        got = branch_lookup(self.BS, LVar(0), ctx_len=1)
        assert isinstance(got, PVar) and got.pos == 0


class TestLifting:
    def test_layer0_terms_lift(self, layer0_population):
        for psi, gamma, ty, e in layer0_population[:60]:
            assert infer(psi, gamma, 0, e) == ty
            assert infer(psi, gamma, 1, e) == ty

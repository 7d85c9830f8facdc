"""Two-layer modal lambda calculus with contextual code types: typechecking,
pattern matching on code with covering, and normalization by evaluation."""

from .syntax import (
    App, Arr, Box, Branch, BranchSet, CBox, CtxEntry, Exp, GEntry, GSubst,
    GVar, GlobalCtx, LSubst, LVar, Lam, LetBox, LocalCtx, Match, Nat, Opq,
    PApp, PLam, PRec, PSuc, PVar, PVarName, PWild, PZero, Rec, Suc, Typ, Wk,
    Zero, alpha_eq, classify_ne, classify_nf, id_gsubst, id_lsubst, is_core,
    is_ne, is_nf, numeral, as_numeral,
)
from .wellformed import wf_ctx, wf_gctx, wf_typ
from .subst import (
    gsubst_apply, gsubst_compose, lsubst_apply, lsubst_compose, wk_apply,
    wk_compose, wk_id, p_id,
)
from .typecheck import (
    TypingError, branch_lookup, check_branches, check_lsubst, elab, infer,
)
from .nbe import equiv, id_env, nbe
from .oracle import beta_normalize, eta_long, step
from .surface import (
    ParseError, Program, ResolveError, parse_program, print_exp, print_typ,
    resolve,
)

__all__ = [name for name in dir() if not name.startswith("_")]

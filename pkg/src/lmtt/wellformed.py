"""Layered type and context validity predicates.

Layer 0 admits exactly the core types (no contextual box anywhere); layer 1
additionally admits one outer level of contextual box over core material, so
code types never nest.
"""

from __future__ import annotations

from .syntax import Arr, CBox, GlobalCtx, LocalCtx, Nat, Opq, Typ, typ_is_core


def wf_typ(layer: int, t: Typ) -> bool:
    if layer == 0:
        return typ_is_core(t)
    match t:
        case Nat() | Opq():
            return True
        case Arr(dom=d, cod=c):
            return wf_typ(1, d) and wf_typ(1, c)
        case CBox(ctx=ctx, body=b):
            return wf_ctx(0, ctx) and typ_is_core(b)
    raise TypeError(f"not a type: {t!r}")


def wf_ctx(layer: int, g: LocalCtx) -> bool:
    return all(wf_typ(layer, entry.typ) for entry in g.entries)


def wf_gctx(p: GlobalCtx) -> bool:
    return all(wf_ctx(0, entry.ctx) and typ_is_core(entry.typ)
               for entry in p.entries)

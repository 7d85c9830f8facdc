"""Concrete syntax: lexer, parser, name resolution and pretty-printer.

Programs are sequences of `def name : typ := exp;` items.  Types contain no
variables and parse directly into core types; expressions parse into a small
surface tree that `resolve` turns into the nameless core, inlining earlier
definitions.  The printer round-trips modulo whitespace on resolved terms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    App, Arr, Box, BranchSet, CBox, Exp, GVar, LSubst, LVar, Lam, LetBox,
    LocalCtx, Match, Nat, PApp, PLam, PRec, PSuc, PVar, PVarName, PWild,
    PZero, Rec, Suc, Typ, Zero,
)


class ParseError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class ResolveError(Exception):
    def __init__(self, message: str, line: int | None = None,
                 col: int | None = None):
        pos = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{pos}{message}")
        self.line = line
        self.col = col
        self.message = message


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {"def", "Nat", "zero", "suc", "rec", "box", "letbox", "in",
            "match", "var"}

_PUNCT = ["->", "|-", ":=", "=>", "^[", "(", ")", "[", "]", "{", "}",
          "\\", ".", ",", ":", ";", "=", "|", "?"]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


@dataclass(frozen=True)
class Tok:
    kind: str  # punctuation text, "ident", keyword text or "eof"
    text: str
    line: int
    col: int


def _lex(src: str) -> list[Tok]:
    toks = []
    line, col = 1, 1
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("--", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        m = _IDENT.match(src, i)
        if m:
            text = m.group()
            kind = text if text in KEYWORDS else "ident"
            toks.append(Tok(kind, text, line, col))
            col += len(text)
            i = m.end()
            continue
        for p in _PUNCT:
            if src.startswith(p, i):
                toks.append(Tok(p, p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise ParseError(line, col, f"unexpected character {c!r}")
    toks.append(Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Surface trees


@dataclass(frozen=True)
class SExp:
    line: int
    col: int


@dataclass(frozen=True)
class SVar(SExp):
    name: str
    subst: tuple[SExp, ...] | None = None


@dataclass(frozen=True)
class SZero(SExp):
    pass


@dataclass(frozen=True)
class SSuc(SExp):
    arg: SExp = None


@dataclass(frozen=True)
class SRec(SExp):
    motive: Typ = None
    base: SExp = None
    hint_x: str = "x"
    hint_y: str = "y"
    step: SExp = None
    scrut: SExp = None


@dataclass(frozen=True)
class SLam(SExp):
    name: str = "x"
    ann: Typ = None
    body: SExp = None


@dataclass(frozen=True)
class SApp(SExp):
    fn: SExp = None
    arg: SExp = None


@dataclass(frozen=True)
class SBox(SExp):
    ctx: tuple[tuple[str, Typ], ...] = ()
    body: SExp = None


@dataclass(frozen=True)
class SLetBox(SExp):
    name: str = "u"
    scrut: SExp = None
    body: SExp = None


@dataclass(frozen=True)
class SMatch(SExp):
    scrut: SExp = None
    branches: tuple[tuple, ...] = ()


@dataclass(frozen=True)
class Def:
    name: str
    typ: Typ
    body: SExp
    line: int
    col: int


@dataclass(frozen=True)
class Program:
    defs: tuple[Def, ...]


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> Tok:
        return self.toks[self.pos]

    def next(self) -> Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str) -> Tok:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(t.line, t.col,
                             f"expected {kind!r}, found {t.text or 'end of input'!r}")
        return self.next()

    def ident(self) -> str:
        return self.expect("ident").text

    # -- types ---------------------------------------------------------------

    def typ(self) -> Typ:
        left = self.typ_atom()
        if self.peek().kind == "->":
            self.next()
            return Arr(left, self.typ())
        return left

    def typ_atom(self) -> Typ:
        t = self.peek()
        if t.kind == "Nat":
            self.next()
            return Nat()
        if t.kind == "(":
            self.next()
            inner = self.typ()
            self.expect(")")
            return inner
        if t.kind == "[":
            self.next()
            ctx = self.local_ctx(stop="|-")
            self.expect("|-")
            body = self.typ()
            self.expect("]")
            return CBox(ctx, body)
        raise ParseError(t.line, t.col, f"expected a type, found {t.text!r}")

    def local_ctx(self, stop: str) -> LocalCtx:
        entries: list[tuple[str, Typ]] = []
        if self.peek().kind != stop:
            while True:
                name = self.ident()
                self.expect(":")
                entries.append((name, self.typ()))
                if self.peek().kind != ",":
                    break
                self.next()
        return LocalCtx.of(*entries)

    # -- expressions ----------------------------------------------------------

    def exp(self) -> SExp:
        t = self.peek()
        if t.kind == "\\":
            self.next()
            self.expect("(")
            name = self.ident()
            self.expect(":")
            ann = self.typ()
            self.expect(")")
            self.expect(".")
            return SLam(t.line, t.col, name, ann, self.exp())
        if t.kind == "letbox":
            self.next()
            name = self.ident()
            self.expect("=")
            scrut = self.exp()
            self.expect("in")
            return SLetBox(t.line, t.col, name, scrut, self.exp())
        return self.app()

    _ATOM_START = {"ident", "zero", "suc", "rec", "box", "match", "("}

    def app(self) -> SExp:
        e = self.atom()
        while self.peek().kind in self._ATOM_START:
            arg = self.atom()
            e = SApp(e.line, e.col, e, arg)
        return e

    def atom(self) -> SExp:
        t = self.peek()
        match t.kind:
            case "zero":
                self.next()
                return SZero(t.line, t.col)
            case "suc":
                self.next()
                return SSuc(t.line, t.col, self.atom())
            case "ident":
                self.next()
                subst = None
                if self.peek().kind == "^[":
                    self.next()
                    args: list[SExp] = []
                    if self.peek().kind != "]":
                        args.append(self.exp())
                        while self.peek().kind == ",":
                            self.next()
                            args.append(self.exp())
                    self.expect("]")
                    subst = tuple(args)
                return SVar(t.line, t.col, t.text, subst)
            case "rec":
                self.next()
                self.expect("[")
                motive = self.typ()
                self.expect("]")
                base = self.atom()
                self.expect("(")
                hx = self.ident()
                hy = self.ident()
                self.expect(".")
                step = self.exp()
                self.expect(")")
                scrut = self.atom()
                return SRec(t.line, t.col, motive, base, hx, hy, step, scrut)
            case "box":
                self.next()
                self.expect("(")
                ctx = self.local_ctx(stop=".")
                self.expect(".")
                body = self.exp()
                self.expect(")")
                pairs = tuple((e.hint, e.typ) for e in ctx.entries)
                return SBox(t.line, t.col, pairs, body)
            case "match":
                self.next()
                scrut = self.exp()
                self.expect("{")
                branches = [self.branch()]
                while self.peek().kind == "|":
                    self.next()
                    branches.append(self.branch())
                self.expect("}")
                return SMatch(t.line, t.col, scrut, tuple(branches))
            case "(":
                self.next()
                e = self.exp()
                self.expect(")")
                return e
        raise ParseError(t.line, t.col,
                         f"expected an expression, found {t.text or 'end of input'!r}")

    def branch(self) -> tuple:
        t = self.peek()
        match t.kind:
            case "var":
                self.next()
                name = self.ident()
                self.expect("=>")
                return ("var", name, self.exp())
            case "zero":
                self.next()
                self.expect("=>")
                return ("zero", self.exp())
            case "suc":
                self.next()
                u = self.pattern_var()
                self.expect("=>")
                return ("suc", u, self.exp())
            case "\\":
                self.next()
                x = self.ident()
                self.expect(".")
                u = self.pattern_var()
                self.expect("=>")
                return ("lam", x, u, self.exp())
            case "?":
                u = self.pattern_var()
                u2 = self.pattern_var()
                self.expect("=>")
                return ("app", u, u2, self.exp())
            case "rec":
                self.next()
                u = self.pattern_var()
                self.expect("(")
                x = self.ident()
                y = self.ident()
                self.expect(".")
                u2 = self.pattern_var()
                self.expect(")")
                u3 = self.pattern_var()
                self.expect("=>")
                return ("rec", u, x, y, u2, u3, self.exp())
            case "ident" if t.text == "_":
                self.next()
                self.expect("=>")
                return ("wild", self.exp())
        raise ParseError(t.line, t.col,
                         f"expected a branch pattern, found {t.text!r}")

    def pattern_var(self) -> str:
        self.expect("?")
        return self.ident()


def parse_program(src: str) -> Program:
    p = _Parser(_lex(src))
    defs = []
    while p.peek().kind != "eof":
        t = p.expect("def")
        name = p.ident()
        p.expect(":")
        typ = p.typ()
        p.expect(":=")
        body = p.exp()
        p.expect(";")
        defs.append(Def(name, typ, body, t.line, t.col))
    return Program(tuple(defs))


def parse_typ_text(src: str) -> Typ:
    p = _Parser(_lex(src))
    t = p.typ()
    p.expect("eof")
    return t


def parse_exp_text(src: str) -> SExp:
    p = _Parser(_lex(src))
    e = p.exp()
    p.expect("eof")
    return e


# ---------------------------------------------------------------------------
# Resolution


def resolve_exp(e: SExp, locals_: list[str], globals_: list[str],
                defs: dict[str, Exp]) -> Exp:
    match e:
        case SVar(line=ln, col=co, name=name, subst=subst):
            sub = None
            if subst is not None:
                sub = LSubst(tuple(resolve_exp(s, locals_, globals_, defs)
                                   for s in subst))
                for pos in range(len(globals_) - 1, -1, -1):
                    if globals_[pos] == name:
                        return GVar(len(globals_) - 1 - pos, sub)
                raise ResolveError(f"unbound global variable {name!r}", ln, co)
            for pos in range(len(locals_) - 1, -1, -1):
                if locals_[pos] == name:
                    return LVar(len(locals_) - 1 - pos)
            for pos in range(len(globals_) - 1, -1, -1):
                if globals_[pos] == name:
                    return GVar(len(globals_) - 1 - pos, None)
            if name in defs:
                return defs[name]
            raise ResolveError(f"unbound name {name!r}", ln, co)
        case SZero():
            return Zero()
        case SSuc(arg=a):
            return Suc(resolve_exp(a, locals_, globals_, defs))
        case SRec(motive=m, base=b, hint_x=hx, hint_y=hy, step=s, scrut=t):
            return Rec(m,
                       resolve_exp(b, locals_, globals_, defs),
                       resolve_exp(s, locals_ + [hx, hy], globals_, defs),
                       resolve_exp(t, locals_, globals_, defs),
                       hx, hy)
        case SLam(name=x, ann=a, body=b):
            return Lam(a, resolve_exp(b, locals_ + [x], globals_, defs), x)
        case SApp(fn=f, arg=a):
            return App(resolve_exp(f, locals_, globals_, defs),
                       resolve_exp(a, locals_, globals_, defs))
        case SBox(ctx=pairs, body=b):
            names = [nm for nm, _ in pairs]
            return Box(LocalCtx.of(*pairs),
                       resolve_exp(b, names, globals_, defs))
        case SLetBox(name=u, scrut=s, body=b):
            return LetBox(resolve_exp(s, locals_, globals_, defs),
                          resolve_exp(b, locals_, globals_ + [u], defs),
                          hint=u)
        case SMatch(line=ln, col=co, scrut=s, branches=brs):
            out = []
            for br in brs:
                body = br[-1]

                def res(extra):
                    return resolve_exp(body, locals_, globals_ + extra, defs)

                match br[0]:
                    case "var":
                        out.append(PVarName(res([]), br[1]))
                    case "zero":
                        out.append(PZero(res([])))
                    case "suc":
                        out.append(PSuc(res([br[1]]), br[1]))
                    case "lam":
                        out.append(PLam(res([br[2]]), br[1], br[2]))
                    case "app":
                        out.append(PApp(res([br[1], br[2]]), br[1], br[2]))
                    case "rec":
                        _, u, x, y, u2, u3, _ = br
                        out.append(PRec(res([u, u2, u3]), u, x, y, u2, u3))
                    case "wild":
                        out.append(PWild(res([])))
            try:
                bs = BranchSet.of(out)
            except ValueError as exc:
                from .typecheck import TypingError
                raise TypingError("DuplicateBranch", str(exc)) from None
            return Match(resolve_exp(s, locals_, globals_, defs), bs)
    raise TypeError(f"not a surface expression: {e!r}")


def resolve(p: Program) -> list[tuple[str, Typ, Exp]]:
    """Turn names into indices; earlier definitions inline into later
    bodies."""
    defs: dict[str, Exp] = {}
    out = []
    for d in p.defs:
        if d.name in defs:
            raise ResolveError(f"duplicate definition {d.name!r}", d.line, d.col)
        body = resolve_exp(d.body, [], [], defs)
        defs[d.name] = body
        out.append((d.name, d.typ, body))
    return out


# ---------------------------------------------------------------------------
# Printer

_LOW, _APP, _ATOM = 0, 1, 2


def print_typ(t: Typ) -> str:
    if not isinstance(t, Typ):
        raise TypeError(f"not a type: {t!r}")
    return str(t)


def _fresh(hint: str, used: set[str]) -> str:
    if hint and hint not in used and hint not in KEYWORDS and hint != "_":
        return hint
    base = hint or "x"
    n = 1
    while f"{base}{n}" in used:
        n += 1
    return f"{base}{n}"


class _Printer:
    def __init__(self, lenv: list[str], genv: list[str]):
        self.lenv = lenv
        self.genv = genv

    def scope(self) -> set[str]:
        return set(self.lenv) | set(self.genv)

    def exp(self, e: Exp, prec: int) -> str:
        match e:
            case LVar(idx=i):
                return self.lenv[len(self.lenv) - 1 - i]
            case GVar(idx=i, subst=d):
                name = self.genv[len(self.genv) - 1 - i]
                if d is None:
                    return name
                inner = ", ".join(self.exp(t, _LOW) for t in d.terms)
                return f"{name}^[{inner}]"
            case Zero():
                return "zero"
            case Suc(pred=p):
                return self.wrap(f"suc {self.exp(p, _ATOM)}", _APP, prec)
            case Rec(motive=m, base=b, step=s, scrut=t, hint_x=hx, hint_y=hy):
                x = _fresh(hx, self.scope())
                y = _fresh(hy, self.scope() | {x})
                sub = _Printer(self.lenv + [x, y], self.genv)
                text = (f"rec[{print_typ(m)}] {self.exp(b, _ATOM)} "
                        f"({x} {y}. {sub.exp(s, _LOW)}) {self.exp(t, _ATOM)}")
                return self.wrap(text, _APP, prec)
            case Lam(ann=a, body=b, hint=h):
                x = _fresh(h, self.scope())
                sub = _Printer(self.lenv + [x], self.genv)
                text = f"\\({x} : {print_typ(a)}). {sub.exp(b, _LOW)}"
                return self.wrap(text, _LOW, prec)
            case App(fn=f, arg=a):
                text = f"{self.exp(f, _APP)} {self.exp(a, _ATOM)}"
                return self.wrap(text, _APP, prec)
            case Box(ctx=ctx, body=b):
                names = [en.hint for en in ctx.entries]
                inner = ", ".join(f"{en.hint} : {print_typ(en.typ)}"
                                  for en in ctx.entries)
                sub = _Printer(names, self.genv)
                return f"box({inner}. {sub.exp(b, _LOW)})"
            case LetBox(scrut=s, body=b, hint=h):
                u = _fresh(h, self.scope())
                sub = _Printer(self.lenv, self.genv + [u])
                text = (f"letbox {u} = {self.exp(s, _APP)} "
                        f"in {sub.exp(b, _LOW)}")
                return self.wrap(text, _LOW, prec)
            case Match(scrut=s, branches=bs, ctx=ctx):
                parts = [self.branch(b, ctx) for b in bs]
                text = f"match {self.exp(s, _APP)} {{ {' | '.join(parts)} }}"
                return self.wrap(text, _APP, prec)
        raise TypeError(f"not a term: {e!r}")

    def branch(self, b, ctx: LocalCtx | None) -> str:
        match b:
            case PVar(pos=pos):
                name = ctx.entries[pos].hint if ctx is not None else f"#{pos}"
                return f"var {name} => {self.exp(b.body, _LOW)}"
            case PVarName(name=name):
                return f"var {name} => {self.exp(b.body, _LOW)}"
            case PZero():
                return f"zero => {self.exp(b.body, _LOW)}"
            case PSuc(hint=h):
                u = _fresh(h, self.scope())
                sub = _Printer(self.lenv, self.genv + [u])
                return f"suc ?{u} => {sub.exp(b.body, _LOW)}"
            case PLam(hint_x=hx, hint=h):
                u = _fresh(h, self.scope())
                sub = _Printer(self.lenv, self.genv + [u])
                return f"\\{hx}. ?{u} => {sub.exp(b.body, _LOW)}"
            case PApp(hint_f=hf, hint_a=ha):
                u = _fresh(hf, self.scope())
                u2 = _fresh(ha, self.scope() | {u})
                sub = _Printer(self.lenv, self.genv + [u, u2])
                return f"?{u} ?{u2} => {sub.exp(b.body, _LOW)}"
            case PRec(hint_b=hb, hint_x=hx, hint_y=hy, hint_s=hs, hint_n=hn):
                u = _fresh(hb, self.scope())
                u2 = _fresh(hs, self.scope() | {u})
                u3 = _fresh(hn, self.scope() | {u, u2})
                sub = _Printer(self.lenv, self.genv + [u, u2, u3])
                return (f"rec ?{u} ({hx} {hy}. ?{u2}) ?{u3} "
                        f"=> {sub.exp(b.body, _LOW)}")
            case PWild():
                return f"_ => {self.exp(b.body, _LOW)}"
        raise TypeError(f"not a branch: {b!r}")

    @staticmethod
    def wrap(text: str, level: int, prec: int) -> str:
        return f"({text})" if level < prec else text


def print_exp(e: Exp, lenv: list[str] | None = None,
              genv: list[str] | None = None) -> str:
    """Render a resolved term; free variables take their names from the
    supplied environments (hints, innermost last)."""
    return _Printer(lenv or [], genv or []).exp(e, _LOW)

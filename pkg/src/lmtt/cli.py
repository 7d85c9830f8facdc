"""Command-line driver: check, nbe, equiv and corpus subcommands.

Exit codes: 0 success, 1 semantic "no" (inequivalence or failed corpus
expectation), 2 parse/type/usage errors.  Diagnostics go to stderr and
include source positions where available.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from . import oracle
from .nbe import equiv as nbe_equiv
from .nbe import nbe
from .syntax import (
    App, Box, Exp, GlobalCtx, Lam, LetBox, LocalCtx, LVar, Match, Rec, Suc,
    Typ, Zero, GVar, alpha_eq,
)
from .surface import (
    ParseError, ResolveError, parse_exp_text, parse_program, parse_typ_text,
    print_exp, print_typ, resolve, resolve_exp,
)
from .typecheck import TypingError, elab

EMPTY_G = GlobalCtx()
EMPTY_L = LocalCtx()


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_defs(path: Path) -> list[tuple[str, Typ, Exp]]:
    """Parse, resolve and typecheck every definition in a file; each body
    must synthesize exactly its declared type."""
    try:
        src = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _Failure(2, f"{path}: {exc}") from None
    program = parse_program(src)
    out = []
    for d, (name, typ, body) in zip(program.defs, resolve(program)):
        try:
            got, body2 = elab(EMPTY_G, EMPTY_L, 1, body)
        except TypingError as exc:
            raise _Failure(2, f"{path}:{d.line}:{d.col}: in {name}: {exc}") \
                from None
        if got != typ:
            raise _Failure(
                2, f"{path}:{d.line}:{d.col}: {name} declared "
                f"{print_typ(typ)} but has type {print_typ(got)}")
        out.append((name, typ, body2))
    return out


def _pick(defs, name: str, path: Path):
    for d in defs:
        if d[0] == name:
            return d
    raise _Failure(2, f"{path}: no definition named {name!r}")


def cmd_check(args) -> int:
    defs = _load_defs(Path(args.file))
    if not args.quiet:
        for name, typ, _ in defs:
            print(f"{name} : {print_typ(typ)}")
    return 0


def cmd_nbe(args) -> int:
    path = Path(args.file)
    defs = _load_defs(path)
    if args.defname is not None:
        defs = [_pick(defs, args.defname, path)]
    for name, typ, body in defs:
        nf = nbe(EMPTY_G, EMPTY_L, body, typ)
        print(f"{name} = {print_exp(nf)}")
    return 0


def cmd_equiv(args) -> int:
    path = Path(args.file)
    defs = _load_defs(path)
    _, t1, b1 = _pick(defs, args.name1, path)
    _, t2, b2 = _pick(defs, args.name2, path)
    if t1 != t2:
        raise _Failure(2, f"{path}: {args.name1} and {args.name2} have "
                       f"different declared types")
    same = nbe_equiv(EMPTY_G, EMPTY_L, 1, b1, b2, t1)
    if not args.quiet:
        print("equivalent" if same else "not equivalent")
    return 0 if same else 1


# ---------------------------------------------------------------------------
# Corpus runner

_DIRECTIVE = re.compile(r"--\s*EXPECT-(TYPE|NF|EQUIV|REJECT):?(.*)")


def _parse_directives(src: str):
    for lineno, line in enumerate(src.splitlines(), start=1):
        m = _DIRECTIVE.search(line)
        if m:
            yield lineno, m.group(1), m.group(2).strip()


def _is_plain(e: Exp) -> bool:
    """True for terms in the pure function/Nat fragment, where the
    declarative reducer is a complete oracle for the evaluator."""
    match e:
        case LVar() | Zero():
            return True
        case Suc(pred=p):
            return _is_plain(p)
        case Lam(body=b):
            return _is_plain(b)
        case App(fn=f, arg=a):
            return _is_plain(f) and _is_plain(a)
        case Rec(base=b, step=s, scrut=t):
            return _is_plain(b) and _is_plain(s) and _is_plain(t)
        case Box() | LetBox() | Match() | GVar():
            return False
    return False


def _run_corpus_file(path: Path, fuel: int, quiet: bool) -> list[str]:
    """Run one corpus file; returns failure messages (empty = all passed)."""
    src = path.read_text(encoding="utf-8")
    directives = list(_parse_directives(src))
    rejects = [(ln, arg) for ln, kind, arg in directives if kind == "REJECT"]

    if rejects:
        lineno, want_kind = rejects[0]
        try:
            _load_defs(path)
        except (_Failure, ParseError, ResolveError, TypingError) as exc:
            if want_kind and want_kind not in str(exc):
                return [f"{path}:{lineno}: expected rejection with "
                        f"{want_kind}, got: {exc}"]
            return []
        return [f"{path}:{lineno}: expected the file to be rejected"]

    defs = _load_defs(path)
    by_name = {name: (typ, body) for name, typ, body in defs}
    scope = {name: body for name, _, body in defs}
    failures = []

    def normal_form(name: str) -> Exp:
        typ, body = by_name[name]
        return nbe(EMPTY_G, EMPTY_L, body, typ)

    for lineno, kind, arg in directives:
        where = f"{path}:{lineno}"
        try:
            if kind == "TYPE":
                name, typtext = (s.strip() for s in arg.split(":", 1))
                want = parse_typ_text(typtext)
                got = by_name[name][0]
                if got != want:
                    failures.append(f"{where}: {name} : {print_typ(got)}, "
                                    f"expected {print_typ(want)}")
            elif kind == "NF":
                name, exptext = (s.strip() for s in arg.split("=", 1))
                typ, _ = by_name[name]
                expected = resolve_exp(parse_exp_text(exptext), [], [], scope)
                want_t, expected2 = elab(EMPTY_G, EMPTY_L, 1, expected)
                if want_t != typ:
                    failures.append(f"{where}: expected form has type "
                                    f"{print_typ(want_t)}, not {print_typ(typ)}")
                    continue
                got = normal_form(name)
                if not alpha_eq(got, expected2):
                    failures.append(f"{where}: {name} normalizes to "
                                    f"{print_exp(got)}")
            elif kind == "EQUIV":
                if "!=" in arg:
                    n1, n2 = (s.strip() for s in arg.split("!=", 1))
                    want = False
                else:
                    n1, n2 = (s.strip() for s in arg.split("==", 1))
                    want = True
                t1, b1 = by_name[n1]
                t2, b2 = by_name[n2]
                if t1 != t2:
                    failures.append(f"{where}: {n1} and {n2} have different "
                                    f"declared types")
                    continue
                got = nbe_equiv(EMPTY_G, EMPTY_L, 1, b1, b2, t1)
                if got != want:
                    failures.append(f"{where}: {n1} and {n2} are "
                                    f"{'' if got else 'not '}equivalent, "
                                    f"expected the opposite")
        except KeyError as exc:
            failures.append(f"{where}: no definition named {exc.args[0]!r}")
        except (_Failure, ParseError, ResolveError, TypingError) as exc:
            failures.append(f"{where}: {exc}")

    # cross-check the evaluator against the declarative reducer on the
    # fragment where eta-expanded beta-normal forms are canonical
    for name, typ, body in defs:
        if not _is_plain(body):
            continue
        try:
            red = oracle.beta_normalize(EMPTY_G, EMPTY_L, body, fuel)
            expanded = oracle.eta_long(EMPTY_G, EMPTY_L, red, typ)
        except oracle.FuelExhausted as exc:
            failures.append(f"{path}: {name}: {exc}")
            continue
        if not alpha_eq(expanded, normal_form(name)):
            failures.append(f"{path}: {name}: reducer and evaluator disagree")
    return failures


def cmd_corpus(args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        raise _Failure(2, f"{root}: not a directory")
    files = sorted(root.rglob("*.lmtt"))
    if not files:
        raise _Failure(2, f"{root}: no .lmtt files")
    total_failures = []
    for path in files:
        try:
            failures = _run_corpus_file(path, args.fuel, args.quiet)
        except (_Failure, ParseError, ResolveError, TypingError) as exc:
            failures = [f"{path}: {exc}"]
        total_failures.extend(failures)
        if not args.quiet:
            status = "ok" if not failures else "FAIL"
            print(f"{path.name}: {status}")
    for msg in total_failures:
        print(msg, file=sys.stderr)
    if not args.quiet:
        print(f"{len(files)} files, {len(total_failures)} failures")
    return 1 if total_failures else 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lmtt",
        description="Check, normalize and compare layered modal programs")
    ap.add_argument("--fuel", type=int, default=100000,
                    help="step bound for the declarative reducer")
    ap.add_argument("--quiet", action="store_true",
                    help="suppress success output")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="typecheck all definitions in a file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("nbe", help="print normal forms of definitions")
    p.add_argument("file")
    p.add_argument("--def", dest="defname", default=None,
                   help="normalize only this definition")
    p.set_defaults(fn=cmd_nbe)

    p = sub.add_parser("equiv",
                       help="decide equivalence of two definitions")
    p.add_argument("file")
    p.add_argument("name1")
    p.add_argument("name2")
    p.set_defaults(fn=cmd_equiv)

    p = sub.add_parser("corpus",
                       help="run every .lmtt file with EXPECT directives")
    p.add_argument("dir")
    p.set_defaults(fn=cmd_corpus)
    return ap


def run(argv: list[str]) -> int:
    sys.setrecursionlimit(20000)
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except _Failure as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except (ParseError, ResolveError, TypingError) as exc:
        print(exc, file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""Render ASTs back to surface syntax that the parser accepts."""
from __future__ import annotations

from .syntax import (
    App,
    BoxIntro,
    Case,
    Ctor,
    DataDecl,
    Endorse,
    FunDecl,
    IntLit,
    Lam,
    LetBox,
    PBox,
    PCtor,
    PInt,
    PrimOp,
    Program,
    PVar,
    PWild,
    Reveal,
    StrLit,
    TBox,
    TFun,
    TrustIntro,
    TStar,
    Var,
)

# precedence levels
TERM, ADD, MUL, APP, ATOM = range(5)

_OP_LEVEL = {"+": ADD, "-": ADD, "++": ADD, "==": ADD, "*": MUL, "/": MUL}


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def format_type(t) -> str:
    return str(t)


def _atype(t) -> str:
    s = str(t)
    return f"({s})" if isinstance(t, (TFun, TBox, TStar)) else s


def _level(t) -> int:
    match t:
        case Lam() | LetBox() | Endorse() | Case() | Reveal() | TrustIntro():
            return TERM
        case PrimOp(op):
            return _OP_LEVEL[op]
        case App():
            return APP
        case Ctor(_, args):
            return APP if args else ATOM
        case IntLit(n):
            return APP if n < 0 else ATOM
    return ATOM


def _open_ended(t) -> bool:
    return isinstance(t, (Lam, LetBox, Endorse, Case))


def format_term(t, level: int = TERM) -> str:
    s = _format(t)
    return f"({s})" if _level(t) < level else s


def _format(t) -> str:
    match t:
        case Var(name):
            return name
        case IntLit(n):
            return str(n)
        case StrLit(s):
            return quote(s)
        case Lam(param, body):
            return f"\\{param} -> {format_term(body)}"
        case App(f, a):
            # a constructor head would absorb the argument
            head = f"({_format(f)})" if isinstance(f, Ctor) else format_term(f, APP)
            return f"{head} {format_term(a, ATOM)}"
        case BoxIntro(body):
            return f"[{format_term(body)}]"
        case TrustIntro(body):
            return f"trust {format_term(body, ATOM)}"
        case Reveal(body):
            return f"reveal {format_term(body, ATOM)}"
        case LetBox(x, bound, body):
            return f"let [{x}] = {format_term(bound)} in {format_term(body)}"
        case Endorse(bound, x, body):
            return f"endorse {format_term(bound)} as {x} in {format_term(body)}"
        case Case(scrut, alts):
            parts = [f"case {format_term(scrut)} of"]
            for i, (pat, rhs) in enumerate(alts):
                last = i == len(alts) - 1
                body = format_term(rhs)
                if not last and _open_ended(rhs):
                    body = f"({body})"
                parts.append(f"| {format_pattern(pat)} -> {body}")
            return " ".join(parts)
        case Ctor(name, args):
            return " ".join([name] + [format_term(a, ATOM) for a in args])
        case PrimOp(op, left, right):
            lvl = _OP_LEVEL[op]
            return f"{format_term(left, lvl)} {op} {format_term(right, lvl + 1)}"
    raise TypeError(f"not a term: {t!r}")


def format_pattern(p, atomic: bool = False) -> str:
    match p:
        case PVar(name):
            return name
        case PWild():
            return "_"
        case PInt(n):
            return str(n)
        case PBox(inner):
            return f"[{format_pattern(inner, atomic=True)}]"
        case PCtor(name, args):
            if not args:
                return name
            s = " ".join([name] + [format_pattern(a, atomic=True) for a in args])
            return f"({s})" if atomic else s
    raise TypeError(f"not a pattern: {p!r}")


def format_decl(d) -> str:
    if isinstance(d, DataDecl):
        lines = [f"data {d.name} where"]
        for cname, fields in d.constructors:
            lines.append("  " + " ".join([cname] + [_atype(f) for f in fields]) + ";")
        return "\n".join(lines)
    if isinstance(d, FunDecl):
        head = " ".join([d.name] + [format_pattern(p, atomic=True) for p in d.params])
        return f"{d.name} : {format_type(d.signature)}\n{head} = {format_term(d.body)}"
    raise TypeError(f"not a declaration: {d!r}")


def format_program(p: Program) -> str:
    return "\n\n".join(format_decl(d) for d in p.decls) + "\n"

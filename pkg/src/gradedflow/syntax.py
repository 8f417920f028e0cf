"""Abstract syntax of types, terms, patterns and declarations.

Every node carries an optional source span that is ignored by equality, so
ASTs produced by parsing compare equal to hand-built ones.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .semiring import Grade


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.start_line}:{self.start_col}"


def _span():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- types


class Trusted:
    """The only grade the star modality carries."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Trusted"


TRUSTED = Trusted()


@dataclass(frozen=True)
class TInt:
    def __str__(self) -> str:
        return "Int"


@dataclass(frozen=True)
class TString:
    def __str__(self) -> str:
        return "String"


@dataclass(frozen=True)
class TData:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TFun:
    domain: Type
    codomain: Type

    def __str__(self) -> str:
        dom = f"({self.domain})" if isinstance(self.domain, TFun) else str(self.domain)
        return f"{dom} -> {self.codomain}"


@dataclass(frozen=True)
class TBox:
    grade: Grade
    payload: Type

    def __str__(self) -> str:
        return f"{_modal_operand(self.payload)} [{self.grade}]"


@dataclass(frozen=True)
class TStar:
    payload: Type

    @property
    def grade(self) -> Trusted:
        return TRUSTED

    def __str__(self) -> str:
        return f"{_modal_operand(self.payload)} *{{Trusted}}"


def _modal_operand(t: Type) -> str:
    return f"({t})" if isinstance(t, TFun) else str(t)


Type = Union[TInt, TString, TData, TFun, TBox, TStar]

INT = TInt()
STRING = TString()


# ---------------------------------------------------------------- patterns


@dataclass(frozen=True)
class PVar:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PWild:
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PInt:
    value: int
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PCtor:
    name: str
    args: tuple[Pattern, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class PBox:
    inner: Pattern
    span: Optional[SourceSpan] = _span()


Pattern = Union[PVar, PWild, PInt, PCtor, PBox]


def pattern_vars(p: Pattern) -> list[str]:
    match p:
        case PVar(name):
            return [name]
        case PCtor(_, args):
            return [v for a in args for v in pattern_vars(a)]
        case PBox(inner):
            return pattern_vars(inner)
        case _:
            return []


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class StrLit:
    value: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Lam:
    param: str
    body: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class App:
    fun: Term
    arg: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class BoxIntro:
    body: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class TrustIntro:
    body: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class LetBox:
    var: str
    bound: Term
    body: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Reveal:
    body: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Endorse:
    bound: Term
    var: str
    body: Term
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Case:
    scrutinee: Term
    alts: tuple[tuple[Pattern, Term], ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Ctor:
    name: str
    args: tuple[Term, ...] = ()
    span: Optional[SourceSpan] = _span()


INT_OPS = frozenset({"+", "-", "*", "/", "=="})
STRING_OPS = frozenset({"++"})


@dataclass(frozen=True)
class PrimOp:
    op: str
    left: Term
    right: Term
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if self.op not in INT_OPS | STRING_OPS:
            raise ValueError(f"unknown operator {self.op!r}")


Term = Union[Var, IntLit, StrLit, Lam, App, BoxIntro, TrustIntro, LetBox, Reveal, Endorse, Case, Ctor, PrimOp]


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class DataDecl:
    name: str
    constructors: tuple[tuple[str, tuple[Type, ...]], ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FunDecl:
    name: str
    signature: Type
    params: tuple[Pattern, ...]
    body: Term
    span: Optional[SourceSpan] = _span()


Decl = Union[DataDecl, FunDecl]


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]

    def function(self, name: str) -> Optional[FunDecl]:
        for d in self.decls:
            if isinstance(d, FunDecl) and d.name == name:
                return d
        return None

    @property
    def functions(self) -> list[FunDecl]:
        return [d for d in self.decls if isinstance(d, FunDecl)]

    @property
    def datatypes(self) -> list[DataDecl]:
        return [d for d in self.decls if isinstance(d, DataDecl)]


# ---------------------------------------------------------------- free variables and substitution


def free_vars(t: Term) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case IntLit() | StrLit():
            return set()
        case Lam(param, body):
            return free_vars(body) - {param}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case BoxIntro(body) | TrustIntro(body) | Reveal(body):
            return free_vars(body)
        case LetBox(x, bound, body):
            return free_vars(bound) | (free_vars(body) - {x})
        case Endorse(bound, x, body):
            return free_vars(bound) | (free_vars(body) - {x})
        case Case(scrut, alts):
            fv = free_vars(scrut)
            for pat, rhs in alts:
                fv |= free_vars(rhs) - set(pattern_vars(pat))
            return fv
        case Ctor(_, args):
            return set().union(*(free_vars(a) for a in args))
        case PrimOp(_, left, right):
            return free_vars(left) | free_vars(right)
    raise TypeError(f"not a term: {t!r}")


def subst(t: Term, x: str, s: Term) -> Term:
    """Replace free occurrences of ``x`` in ``t`` by the closed term ``s``."""
    match t:
        case Var(name):
            return s if name == x else t
        case IntLit() | StrLit():
            return t
        case Lam(param, body):
            return t if param == x else replace(t, body=subst(body, x, s))
        case App(f, a):
            return replace(t, fun=subst(f, x, s), arg=subst(a, x, s))
        case BoxIntro(body) | TrustIntro(body) | Reveal(body):
            return replace(t, body=subst(body, x, s))
        case LetBox(var, bound, body) | Endorse(bound, var, body):
            new_body = body if var == x else subst(body, x, s)
            return replace(t, bound=subst(bound, x, s), body=new_body)
        case Case(scrut, alts):
            new_alts = tuple(
                (pat, rhs if x in pattern_vars(pat) else subst(rhs, x, s)) for pat, rhs in alts
            )
            return replace(t, scrutinee=subst(scrut, x, s), alts=new_alts)
        case Ctor(_, args):
            return replace(t, args=tuple(subst(a, x, s) for a in args))
        case PrimOp(_, left, right):
            return replace(t, left=subst(left, x, s), right=subst(right, x, s))
    raise TypeError(f"not a term: {t!r}")

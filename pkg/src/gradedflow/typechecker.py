"""Bidirectional type checking with usage synthesis.

Checking a term produces a *usage context*: a map from local variable names
to how much of them the term demands. Linear binders carry plain ``int``
counts (exactly one use required); graded binders, introduced by box
patterns, carry a :data:`~gradedflow.semiring.Grade` that must approximate
the grade they were unboxed at. Names absent from a usage context are unused.

Promotion (``[t]``) and lambdas are check-only. In inference position a
promotion defaults to the Security unit ``Public``, which is the grade the
endorse rule demands of its first premise anyway.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import semiring
from .semiring import PUBLIC, Grade, SemiringTag, TagMismatch
from .syntax import (
    INT,
    STRING,
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
    SourceSpan,
    StrLit,
    TBox,
    TData,
    TFun,
    TrustIntro,
    TStar,
    Type,
    Var,
    free_vars,
    pattern_vars,
)

UsageEntry = Union[int, Grade]
UsageContext = dict[str, UsageEntry]

CODES = {
    "E001": "malformed program",
    "E101": "unbound name",
    "E102": "type mismatch",
    "E103": "linearity violation",
    "E104": "grade violation",
    "E105": "trust of a term with local dependencies",
    "E106": "cross-semiring promotion",
    "E107": "branch usage mismatch",
    "E108": "semiring tag mismatch",
}


class TypeCheckError(Exception):
    """A type error with a diagnostic code and source span."""

    def __init__(self, code: str, message: str, span: Optional[SourceSpan] = None, expected=None, actual=None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.span = span
        self.expected = expected
        self.actual = actual

    def diagnostic(self) -> str:
        where = str(self.span) if self.span is not None else "<unknown>:0:0"
        return f"{where}: error[{self.code}]: {self.message}"


# ---------------------------------------------------------------- bindings


@dataclass(frozen=True)
class LinearBind:
    type: Type


@dataclass(frozen=True)
class GradedBind:
    type: Type
    grade: Grade

    @property
    def tag(self) -> SemiringTag:
        return semiring.tag(self.grade)


@dataclass(frozen=True)
class GlobalBind:
    type: Type


Binding = Union[LinearBind, GradedBind, GlobalBind]
Context = dict[str, Binding]


# ---------------------------------------------------------------- usage algebra


def _is_zero(e: UsageEntry) -> bool:
    if isinstance(e, int):
        return e == 0
    return e == semiring.zero(semiring.tag(e))


def normalize(u: UsageContext) -> UsageContext:
    return {k: v for k, v in u.items() if not _is_zero(v)}


def usage_add(u1: UsageContext, u2: UsageContext, span: Optional[SourceSpan] = None) -> UsageContext:
    out = dict(u1)
    for name, e2 in u2.items():
        if name not in out:
            out[name] = e2
            continue
        e1 = out[name]
        if isinstance(e1, int) and isinstance(e2, int):
            out[name] = e1 + e2
        elif not isinstance(e1, int) and not isinstance(e2, int):
            try:
                out[name] = semiring.add(e1, e2)
            except TagMismatch as exc:
                raise TypeCheckError("E108", f"usages of '{name}' mix semirings: {exc}", span) from None
        else:
            raise TypeCheckError("E108", f"'{name}' is used both linearly and as a graded variable", span)
    return out


def usage_scale(r: Grade, u: UsageContext, span: Optional[SourceSpan] = None) -> UsageContext:
    out = {}
    for name, e in u.items():
        if isinstance(e, int):
            if e > 0:
                raise TypeCheckError("E103", f"linear variable '{name}' cannot be used inside a promotion", span)
            continue
        if semiring.tag(e) is not semiring.tag(r):
            raise TypeCheckError(
                "E106",
                f"graded variable '{name}' ({semiring.tag(e).value}) used under a "
                f"{semiring.tag(r).value} promotion [{r}]",
                span,
            )
        out[name] = semiring.mul(r, e)
    return out


def type_leq(actual: Type, expected: Type) -> bool:
    """Subtyping induced by grade approximation."""
    match actual, expected:
        case TBox(s, a), TBox(r, b):
            try:
                return semiring.leq(r, s) and type_leq(a, b)
            except TagMismatch:
                return False
        case TFun(a1, b1), TFun(a2, b2):
            return type_leq(a2, a1) and type_leq(b1, b2)
        case TStar(a), TStar(b):
            return a == b
    return actual == expected


# ---------------------------------------------------------------- checker


def _find_var(t, name: str) -> Optional[SourceSpan]:
    """Span of the first free occurrence of ``name`` in ``t``."""
    match t:
        case Var(n, span=span):
            return span if n == name else None
        case Lam(p, body):
            return None if p == name else _find_var(body, name)
        case LetBox(x, bound, body) | Endorse(bound, x, body):
            return _find_var(bound, name) or (None if x == name else _find_var(body, name))
        case App(f, a):
            return _find_var(f, name) or _find_var(a, name)
        case BoxIntro(b) | TrustIntro(b) | Reveal(b):
            return _find_var(b, name)
        case Case(s, alts):
            found = _find_var(s, name)
            for pat, rhs in alts:
                if found:
                    break
                if name not in pattern_vars(pat):
                    found = _find_var(rhs, name)
            return found
        case Ctor(_, args):
            for a in args:
                if found := _find_var(a, name):
                    return found
            return None
        case PrimOp(_, l, r):
            return _find_var(l, name) or _find_var(r, name)
    return None


@dataclass
class _PatBinding:
    name: str
    binding: Binding
    span: Optional[SourceSpan]


class Checker:
    """Holds the declaration tables for one program."""

    def __init__(self):
        self.datatypes: dict[str, DataDecl] = {}
        self.constructors: dict[str, tuple[str, tuple[Type, ...]]] = {}
        self.globals: dict[str, Type] = {}

    # -- declarations

    def check_program(self, program: Program) -> dict[str, Type]:
        for decl in program.decls:
            if isinstance(decl, DataDecl):
                self._add_datatype(decl)
            else:
                self._check_fundecl(decl)
        return dict(self.globals)

    def _add_datatype(self, decl: DataDecl):
        if decl.name in self.datatypes or decl.name in ("Int", "String"):
            raise TypeCheckError("E001", f"data type '{decl.name}' is declared twice", decl.span)
        self.datatypes[decl.name] = decl
        for cname, fields in decl.constructors:
            if cname in self.constructors:
                raise TypeCheckError("E001", f"constructor '{cname}' is declared twice", decl.span)
            for f in fields:
                self._check_type_wf(f, decl.span)
            self.constructors[cname] = (decl.name, fields)

    def _check_type_wf(self, t: Type, span):
        match t:
            case TData(name):
                if name not in self.datatypes:
                    raise TypeCheckError("E101", f"unknown type '{name}'", span)
            case TFun(a, b):
                self._check_type_wf(a, span)
                self._check_type_wf(b, span)
            case TBox(_, a) | TStar(a):
                self._check_type_wf(a, span)

    def _check_fundecl(self, decl: FunDecl):
        if decl.name in self.globals:
            raise TypeCheckError("E001", f"function '{decl.name}' is defined twice", decl.span)
        self._check_type_wf(decl.signature, decl.span)
        # visible to its own body for recursion
        self.globals[decl.name] = decl.signature
        ctx: Context = {}
        bound: list[_PatBinding] = []
        t = decl.signature
        for p in decl.params:
            if not isinstance(t, TFun):
                raise TypeCheckError(
                    "E102", f"'{decl.name}' has more parameters than its type {decl.signature} allows", p.span
                )
            bound.extend(self.bind_pattern(p, t.domain, None))
            t = t.codomain
        self._extend(ctx, bound)
        usage = self.check(ctx, decl.body, t)
        self._discharge(bound, usage, decl.body)

    # -- patterns

    def bind_pattern(self, p, ty: Type, mode: Optional[Grade]) -> list[_PatBinding]:
        """Bindings introduced by matching ``p`` against ``ty``.

        ``mode`` is None outside any box pattern, otherwise the product of
        the grades of the enclosing boxes.
        """
        match p:
            case PVar(name, span=span):
                b = LinearBind(ty) if mode is None else GradedBind(ty, mode)
                return [_PatBinding(name, b, span)]
            case PWild(span=span):
                if mode is None:
                    raise TypeCheckError("E103", f"a linear value of type {ty} cannot be discarded", span)
                z = semiring.zero(semiring.tag(mode))
                if not semiring.leq(z, mode):
                    raise TypeCheckError("E104", f"a value at grade [{mode}] cannot be discarded", span)
                return []
            case PInt(_, span=span):
                if ty != INT:
                    raise TypeCheckError("E102", f"integer pattern against type {ty}", span, expected=ty, actual=INT)
                self._check_inspect(mode, span)
                return []
            case PBox(inner, span=span):
                if not isinstance(ty, TBox):
                    raise TypeCheckError("E102", f"box pattern against non-box type {ty}", span, expected=ty)
                if mode is None:
                    inner_mode = ty.grade
                else:
                    try:
                        inner_mode = semiring.mul(mode, ty.grade)
                    except TagMismatch:
                        raise TypeCheckError(
                            "E106", f"nested box pattern mixes grades [{mode}] and [{ty.grade}]", span
                        ) from None
                return self.bind_pattern(inner, ty.payload, inner_mode)
            case PCtor(name, args, span=span):
                if name not in self.constructors:
                    raise TypeCheckError("E101", f"unknown constructor '{name}'", span)
                dname, fields = self.constructors[name]
                if ty != TData(dname):
                    raise TypeCheckError(
                        "E102", f"constructor '{name}' of {dname} matched against type {ty}", span,
                        expected=ty, actual=TData(dname),
                    )
                if len(args) != len(fields):
                    raise TypeCheckError(
                        "E102", f"constructor '{name}' expects {len(fields)} arguments, pattern has {len(args)}", span
                    )
                self._check_inspect(mode, span)
                out = []
                for sub, fty in zip(args, fields):
                    out.extend(self.bind_pattern(sub, fty, mode))
                return out
        raise TypeError(f"not a pattern: {p!r}")

    def _check_inspect(self, mode: Optional[Grade], span):
        # inspecting a value under a box consumes it at grade 1
        if mode is not None and not semiring.leq(semiring.one(semiring.tag(mode)), mode):
            raise TypeCheckError("E104", f"cannot inspect a value at grade [{mode}]", span)

    @staticmethod
    def _extend(ctx: Context, bindings: list[_PatBinding]):
        seen = set()
        for b in bindings:
            if b.name in seen:
                raise TypeCheckError("E001", f"'{b.name}' is bound twice in one pattern", b.span)
            seen.add(b.name)
            ctx[b.name] = b.binding

    def _discharge(self, bindings: list[_PatBinding], usage: UsageContext, body) -> UsageContext:
        """Verify and remove the usage of pattern-bound variables."""
        usage = dict(usage)
        for b in bindings:
            used = usage.pop(b.name, None)
            self._check_binder(b.name, b.binding, used, body, b.span)
        return usage

    def _check_binder(self, name: str, binding: Binding, used: Optional[UsageEntry], body, binder_span):
        span = _find_var(body, name) or binder_span
        if isinstance(binding, LinearBind):
            count = used or 0
            if count != 1:
                what = "never used" if count == 0 else f"used {count} times"
                raise TypeCheckError("E103", f"linear variable '{name}' must be used exactly once but is {what}", span)
            return
        supplied = binding.grade
        demanded = semiring.zero(semiring.tag(supplied)) if used is None else used
        if isinstance(demanded, int):
            raise TypeCheckError("E108", f"graded variable '{name}' used linearly", span)
        try:
            ok = semiring.leq(demanded, supplied)
        except TagMismatch:
            raise TypeCheckError("E106", f"'{name}' is used under a different semiring than [{supplied}]", span) from None
        if not ok:
            raise TypeCheckError(
                "E104",
                f"'{name}' is demanded at grade [{demanded}] but only [{supplied}] is available",
                span,
                expected=supplied,
                actual=demanded,
            )

    # -- terms

    def lookup(self, ctx: Context, name: str, span) -> Binding:
        if name in ctx:
            return ctx[name]
        if name in self.globals:
            return GlobalBind(self.globals[name])
        raise TypeCheckError("E101", f"unbound variable '{name}'", span)

    def infer(self, ctx: Context, t) -> tuple[Type, UsageContext]:
        match t:
            case Var(name, span=span):
                b = self.lookup(ctx, name, span)
                if isinstance(b, LinearBind):
                    return b.type, {name: 1}
                if isinstance(b, GradedBind):
                    return b.type, {name: semiring.one(b.tag)}
                return b.type, {}
            case IntLit():
                return INT, {}
            case StrLit():
                return STRING, {}
            case App(f, a, span=span):
                fty, u1 = self.infer(ctx, f)
                if not isinstance(fty, TFun):
                    raise TypeCheckError("E102", f"applying a non-function of type {fty}", span, actual=fty)
                u2 = self.check(ctx, a, fty.domain)
                return fty.codomain, usage_add(u1, u2, span)
            case BoxIntro(_, span=span):
                ty, u = self._infer_promotion(ctx, t, PUBLIC)
                return ty, u
            case TrustIntro(body, span=span):
                gctx = self._nec_context(ctx, t)
                a, _ = self.infer(gctx, body)
                return TStar(a), {}
            case Reveal(body, span=span):
                ty, u = self.infer(ctx, body)
                if not isinstance(ty, TStar):
                    raise TypeCheckError(
                        "E102", f"reveal expects a trusted value, found {ty}", span, actual=ty
                    )
                return TBox(PUBLIC, ty.payload), u
            case Endorse(bound, x, body, span=span):
                a, u1 = self._endorse_bound(ctx, bound, span)
                inner = {**ctx, x: LinearBind(TStar(a))}
                bty, u2 = self.infer(inner, body)
                if not (isinstance(bty, TBox) and bty.grade == PUBLIC):
                    raise TypeCheckError(
                        "E102", f"the body of endorse must be [Public], found {bty}", body.span or span, actual=bty
                    )
                u2 = self._discharge([_PatBinding(x, inner[x], span)], u2, body)
                return bty, usage_add(u1, u2, span)
            case LetBox(x, bound, body, span=span):
                bty, u1 = self.infer(ctx, bound)
                if not isinstance(bty, TBox):
                    raise TypeCheckError("E102", f"let-box expects a boxed value, found {bty}", bound.span or span, actual=bty)
                b = _PatBinding(x, GradedBind(bty.payload, bty.grade), span)
                ty, u2 = self.infer({**ctx, x: b.binding}, body)
                u2 = self._discharge([b], u2, body)
                return ty, usage_add(u1, u2, span)
            case Case():
                return self._case(ctx, t, None)
            case Ctor(name, args, span=span):
                if name not in self.constructors:
                    raise TypeCheckError("E101", f"unknown constructor '{name}'", span)
                dname, fields = self.constructors[name]
                if len(args) != len(fields):
                    raise TypeCheckError(
                        "E102", f"constructor '{name}' expects {len(fields)} arguments, given {len(args)}", span
                    )
                u: UsageContext = {}
                for a, fty in zip(args, fields):
                    u = usage_add(u, self.check(ctx, a, fty), span)
                return TData(dname), u
            case PrimOp(op, left, right, span=span):
                operand = STRING if op == "++" else INT
                u = usage_add(self.check(ctx, left, operand), self.check(ctx, right, operand), span)
                return operand, u
            case Lam(span=span):
                raise TypeCheckError("E102", "cannot infer the type of a lambda here; it needs a known function type", span)
        raise TypeError(f"not a term: {t!r}")

    def check(self, ctx: Context, t, expected: Type) -> UsageContext:
        match t:
            case Lam(param, body, span=span):
                if not isinstance(expected, TFun):
                    raise TypeCheckError("E102", f"lambda checked against non-function type {expected}", span, expected=expected)
                b = _PatBinding(param, LinearBind(expected.domain), span)
                u = self.check({**ctx, param: b.binding}, body, expected.codomain)
                return self._discharge([b], u, body)
            case BoxIntro(body, span=span):
                if not isinstance(expected, TBox):
                    raise TypeCheckError("E102", f"expected {expected}, found a promotion", span, expected=expected)
                u = self.check(ctx, body, expected.payload)
                return usage_scale(expected.grade, self._graded_only(ctx, u, body, span), span)
            case TrustIntro(body, span=span) if isinstance(expected, TStar):
                gctx = self._nec_context(ctx, t)
                self.check(gctx, body, expected.payload)
                return {}
            case LetBox(x, bound, body, span=span):
                bty, u1 = self.infer(ctx, bound)
                if not isinstance(bty, TBox):
                    raise TypeCheckError("E102", f"let-box expects a boxed value, found {bty}", bound.span or span, actual=bty)
                b = _PatBinding(x, GradedBind(bty.payload, bty.grade), span)
                u2 = self.check({**ctx, x: b.binding}, body, expected)
                return usage_add(u1, self._discharge([b], u2, body), span)
            case Endorse(bound, x, body, span=span) if isinstance(expected, TBox):
                a, u1 = self._endorse_bound(ctx, bound, span)
                b = _PatBinding(x, LinearBind(TStar(a)), span)
                # the result is [Public], which approximates any expected box grade
                u2 = self.check({**ctx, x: b.binding}, body, TBox(PUBLIC, expected.payload))
                return usage_add(u1, self._discharge([b], u2, body), span)
            case Case():
                _, u = self._case(ctx, t, expected)
                return u
        actual, u = self.infer(ctx, t)
        if not type_leq(actual, expected):
            raise TypeCheckError(
                "E102", f"expected {expected}, found {actual}", getattr(t, "span", None),
                expected=expected, actual=actual,
            )
        return u

    # -- rule helpers

    def _graded_only(self, ctx: Context, u: UsageContext, body, span) -> UsageContext:
        for name, e in u.items():
            if isinstance(e, int) and e > 0:
                where = _find_var(body, name) or span
                raise TypeCheckError("E103", f"linear variable '{name}' cannot be used inside a promotion", where)
        return u

    def _infer_promotion(self, ctx: Context, t: BoxIntro, grade: Grade) -> tuple[Type, UsageContext]:
        a, u = self.infer(ctx, t.body)
        u = self._graded_only(ctx, u, t.body, t.span)
        return TBox(grade, a), usage_scale(grade, u, t.span)

    def _nec_context(self, ctx: Context, t: TrustIntro) -> Context:
        local = sorted(
            n for n in free_vars(t.body) if n in ctx and not isinstance(ctx[n], GlobalBind)
        )
        if local:
            names = ", ".join(f"'{n}'" for n in local)
            where = _find_var(t.body, local[0]) or t.span
            raise TypeCheckError("E105", f"trust requires a closed term, but it depends on local {names}", where)
        return {n: b for n, b in ctx.items() if isinstance(b, GlobalBind)}

    def _endorse_bound(self, ctx: Context, bound, span) -> tuple[Type, UsageContext]:
        bty, u = self.infer(ctx, bound)
        if not (isinstance(bty, TBox) and bty.grade == PUBLIC):
            raise TypeCheckError(
                "E102", f"endorse expects a [Public] value, found {bty}", bound.span or span, actual=bty
            )
        return bty.payload, u

    def _case(self, ctx: Context, t: Case, expected: Optional[Type]) -> tuple[Type, UsageContext]:
        sty, u0 = self.infer(ctx, t.scrutinee)
        if not t.alts:
            raise TypeCheckError("E102", "case expression has no alternatives", t.span)
        result = expected
        common: Optional[UsageContext] = None
        for pat, rhs in t.alts:
            bs = self.bind_pattern(pat, sty, None)
            inner = dict(ctx)
            self._extend(inner, bs)
            if result is None:
                result, u = self.infer(inner, rhs)
            else:
                u = self.check(inner, rhs, result)
            u = normalize(self._discharge(bs, u, rhs))
            if common is None:
                common = u
            elif u != common:
                raise TypeCheckError(
                    "E107",
                    f"case alternatives use outer variables differently: {_show_usage(common)} vs {_show_usage(u)}",
                    pat.span or t.span,
                )
        return result, usage_add(u0, common, t.span)


def _show_usage(u: UsageContext) -> str:
    if not u:
        return "{}"
    return "{" + ", ".join(f"{k}: {v}" for k, v in sorted(u.items())) + "}"


# ---------------------------------------------------------------- module API


def check_program(program: Program) -> dict[str, Type]:
    return Checker().check_program(program)


def infer_term(ctx: Context, t, checker: Optional[Checker] = None) -> tuple[Type, UsageContext]:
    return (checker or Checker()).infer(ctx, t)


def check_term(ctx: Context, t, expected: Type, checker: Optional[Checker] = None) -> UsageContext:
    return (checker or Checker()).check(ctx, t, expected)

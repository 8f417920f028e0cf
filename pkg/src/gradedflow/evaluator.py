"""Call-by-value big-step evaluation.

Modal wrappers survive at runtime as ``BoxV``/``StarV`` tags so that tests
can observe how values flow between the public and trusted worlds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .pretty import quote
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
    TFun,
    TrustIntro,
    Var,
)


class EvalError(Exception):
    pass


class DivisionByZero(EvalError):
    pass


class NonExhaustiveMatch(EvalError):
    pass


class ValueTagError(EvalError):
    """A value had the wrong shape; only reachable for terms the checker would reject."""


class UnknownMain(EvalError):
    pass


class ArityMismatch(EvalError):
    pass


@dataclass(frozen=True)
class IntV:
    n: int


@dataclass(frozen=True)
class StrV:
    s: str


@dataclass(frozen=True)
class CtorV:
    name: str
    args: tuple[Value, ...] = ()


@dataclass(frozen=True)
class BoxV:
    payload: Value


@dataclass(frozen=True)
class StarV:
    payload: Value


@dataclass(frozen=True, eq=False)
class ClosV:
    env: dict = field(repr=False)
    param: str
    body: object


Value = Union[IntV, StrV, CtorV, BoxV, StarV, ClosV]


def value_eq(a: Value, b: Value) -> bool:
    match a, b:
        case IntV(x), IntV(y):
            return x == y
        case StrV(x), StrV(y):
            return x == y
        case CtorV(n1, xs), CtorV(n2, ys):
            return n1 == n2 and len(xs) == len(ys) and all(value_eq(x, y) for x, y in zip(xs, ys))
        case BoxV(x), BoxV(y):
            return value_eq(x, y)
        case StarV(x), StarV(y):
            return value_eq(x, y)
    return False


def format_value(v: Value, nested: bool = False) -> str:
    match v:
        case IntV(n):
            return f"({n})" if nested and n < 0 else str(n)
        case StrV(s):
            return quote(s)
        case BoxV(p):
            return f"[{format_value(p)}]"
        case StarV(p):
            return f"*{format_value(p, nested=True)}"
        case CtorV(name, args):
            if not args:
                return name
            s = " ".join([name] + [format_value(a, nested=True) for a in args])
            return f"({s})" if nested else s
        case ClosV():
            return "<closure>"
    raise TypeError(f"not a value: {v!r}")


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def match_pattern(p, v: Value) -> Optional[dict[str, Value]]:
    match p:
        case PVar(name):
            return {name: v}
        case PWild():
            return {}
        case PInt(n):
            if not isinstance(v, IntV):
                raise ValueTagError(f"integer pattern against {format_value(v)}")
            return {} if v.n == n else None
        case PBox(inner):
            if not isinstance(v, BoxV):
                raise ValueTagError(f"box pattern against {format_value(v)}")
            return match_pattern(inner, v.payload)
        case PCtor(name, args):
            if not isinstance(v, CtorV):
                raise ValueTagError(f"constructor pattern against {format_value(v)}")
            if v.name != name:
                return None
            if len(args) != len(v.args):
                raise ValueTagError(f"constructor '{name}' arity mismatch")
            out = {}
            for sub, sv in zip(args, v.args):
                m = match_pattern(sub, sv)
                if m is None:
                    return None
                out.update(m)
            return out
    raise TypeError(f"not a pattern: {p!r}")


def _fundecl_as_term(decl: FunDecl):
    """``f p1 .. pn = b`` becomes ``\\%0 -> .. -> case %0 of | p1 -> .. case %n-1 of | pn -> b``."""
    names = [f"%{i}" for i in range(len(decl.params))]
    body = decl.body
    for name, p in reversed(list(zip(names, decl.params))):
        body = Case(Var(name), ((p, body),), span=decl.span)
    for name in reversed(names):
        body = Lam(name, body, span=decl.span)
    return body


class Evaluator:
    def __init__(self, program: Optional[Program] = None):
        self.arities: dict[str, int] = {}
        self.functions: dict[str, FunDecl] = {}
        self._global_values: dict[str, Value] = {}
        if program is not None:
            for d in program.decls:
                if isinstance(d, DataDecl):
                    for cname, fields in d.constructors:
                        self.arities[cname] = len(fields)
                else:
                    self.functions[d.name] = d

    def global_value(self, name: str) -> Value:
        if name not in self._global_values:
            self._global_values[name] = self.eval({}, _fundecl_as_term(self.functions[name]))
        return self._global_values[name]

    def lookup(self, env: dict, name: str) -> Value:
        if name in env:
            return env[name]
        if name in self.functions:
            return self.global_value(name)
        raise ValueTagError(f"unbound variable '{name}'")

    def apply(self, f: Value, arg: Value) -> Value:
        if not isinstance(f, ClosV):
            raise ValueTagError(f"applying a non-function {format_value(f)}")
        return self.eval({**f.env, f.param: arg}, f.body)

    def eval(self, env: dict, t) -> Value:
        match t:
            case Var(name):
                return self.lookup(env, name)
            case IntLit(n):
                return IntV(n)
            case StrLit(s):
                return StrV(s)
            case Lam(param, body):
                return ClosV(env, param, body)
            case App(f, a):
                fv = self.eval(env, f)
                return self.apply(fv, self.eval(env, a))
            case BoxIntro(body):
                return BoxV(self.eval(env, body))
            case TrustIntro(body):
                return StarV(self.eval(env, body))
            case Reveal(body):
                v = self.eval(env, body)
                if not isinstance(v, StarV):
                    raise ValueTagError(f"reveal of non-trusted value {format_value(v)}")
                return BoxV(v.payload)
            case Endorse(bound, x, body):
                v = self.eval(env, bound)
                if not isinstance(v, BoxV):
                    raise ValueTagError(f"endorse of non-boxed value {format_value(v)}")
                out = self.eval({**env, x: StarV(v.payload)}, body)
                if not isinstance(out, BoxV):
                    raise ValueTagError(f"endorse body produced {format_value(out)}")
                return out
            case LetBox(x, bound, body):
                v = self.eval(env, bound)
                if not isinstance(v, BoxV):
                    raise ValueTagError(f"let-box of non-boxed value {format_value(v)}")
                return self.eval({**env, x: v.payload}, body)
            case Case(scrut, alts):
                v = self.eval(env, scrut)
                for pat, rhs in alts:
                    bound = match_pattern(pat, v)
                    if bound is not None:
                        return self.eval({**env, **bound}, rhs)
                raise NonExhaustiveMatch(f"no alternative matches {format_value(v)}")
            case Ctor(name, args):
                if name in self.arities and self.arities[name] != len(args):
                    raise ValueTagError(f"constructor '{name}' applied to {len(args)} arguments")
                return CtorV(name, tuple(self.eval(env, a) for a in args))
            case PrimOp(op, left, right):
                lv = self.eval(env, left)
                rv = self.eval(env, right)
                return _primop(op, lv, rv)
        raise TypeError(f"not a term: {t!r}")


def _primop(op: str, lv: Value, rv: Value) -> Value:
    if op == "++":
        if not (isinstance(lv, StrV) and isinstance(rv, StrV)):
            raise ValueTagError(f"'++' on {format_value(lv)} and {format_value(rv)}")
        return StrV(lv.s + rv.s)
    if not (isinstance(lv, IntV) and isinstance(rv, IntV)):
        raise ValueTagError(f"'{op}' on {format_value(lv)} and {format_value(rv)}")
    a, b = lv.n, rv.n
    if op == "+":
        return IntV(a + b)
    if op == "-":
        return IntV(a - b)
    if op == "*":
        return IntV(a * b)
    if op == "/":
        if b == 0:
            raise DivisionByZero(f"{a} / 0")
        return IntV(_trunc_div(a, b))
    return IntV(1 if a == b else 0)


def parameter_types(signature) -> list:
    out = []
    while isinstance(signature, TFun):
        out.append(signature.domain)
        signature = signature.codomain
    return out


def eval_term(t, env: Optional[dict] = None, program: Optional[Program] = None) -> Value:
    return Evaluator(program).eval(dict(env or {}), t)


def eval_program(program: Program, main: str, args: list[Value]) -> Value:
    ev = Evaluator(program)
    decl = ev.functions.get(main)
    if decl is None:
        raise UnknownMain(f"no function named '{main}'")
    arity = len(parameter_types(decl.signature))
    if len(args) != arity:
        raise ArityMismatch(f"'{main}' takes {arity} arguments, given {len(args)}")
    f = ev.global_value(main)
    for a in args:
        f = ev.apply(f, a)
    return f

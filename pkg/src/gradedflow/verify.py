"""Randomised checks: noninterference fuzzing and the relative-monad laws.

Every check returns a :class:`Report`. Reports are reproducible: trial ``i``
draws from its own generator seeded with ``(seed, i)``, so results do not
depend on execution order.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Union

from .evaluator import BoxV, EvalError, IntV, Value, eval_program, eval_term, format_value, value_eq
from .pretty import format_term
from .semiring import PRIVATE, PUBLIC
from .syntax import (
    INT,
    BoxIntro,
    Endorse,
    IntLit,
    LetBox,
    PrimOp,
    Program,
    Reveal,
    TBox,
    TFun,
    TrustIntro,
    TStar,
    Var,
    subst,
)
from .typechecker import check_program

SAMPLE_RANGE = (-1000, 1000)

CONF_SIGNATURE = TFun(TBox(PRIVATE, INT), TBox(PUBLIC, INT))
INTEG_SIGNATURE = TFun(TBox(PUBLIC, INT), TStar(INT))

BOX_INT = TBox(PUBLIC, INT)
STAR_INT = TStar(INT)


class SignatureMismatch(Exception):
    pass


@dataclass(frozen=True)
class Failure:
    trial: int
    inputs: str
    left: str
    right: str


@dataclass
class Report:
    property: str
    trials: int
    seed: int
    failures: list[Failure] = field(default_factory=list)
    generation_errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and not self.generation_errors

    def summary(self) -> dict:
        return {
            "property": self.property,
            "trials": self.trials,
            "failures": len(self.failures),
            "generation_errors": len(self.generation_errors),
            "seed": self.seed,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"property: {self.property}",
            f"seed: {self.seed}",
            f"trials: {self.trials}",
            f"failures: {len(self.failures)}",
        ]
        for f in self.failures:
            lines.append(f"  trial {f.trial}: {f.inputs}: {f.left} != {f.right}")
        if self.generation_errors:
            lines.append(f"generation errors: {len(self.generation_errors)}")
            lines.extend(f"  {e}" for e in self.generation_errors)
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(f"{seed}:{trial}")


def _run(program: Program, fn: str, arg: Value) -> Union[Value, str]:
    try:
        return eval_program(program, fn, [arg])
    except (EvalError, RecursionError) as exc:
        return f"<{type(exc).__name__}: {exc}>"


def _show(v: Union[Value, str]) -> str:
    return v if isinstance(v, str) else format_value(v)


def _same(a: Union[Value, str], b: Union[Value, str]) -> bool:
    # runtime errors never count as equal outputs
    return not isinstance(a, str) and not isinstance(b, str) and value_eq(a, b)


def _prepare(program: Program, fn: str, signature, unchecked: bool):
    decl = program.function(fn)
    if decl is None or decl.signature != signature:
        found = "undefined" if decl is None else str(decl.signature)
        raise SignatureMismatch(f"'{fn}' must have type {signature}, found {found}")
    if not unchecked:
        check_program(program)


def fuzz_confidentiality(program: Program, fn: str, trials: int = 100, seed: int = 0, *, unchecked: bool = False) -> Report:
    """Vary the private input; the public output must not change.

    ``unchecked`` skips type checking so tests can feed deliberately leaky
    programs to the harness.
    """
    _prepare(program, fn, CONF_SIGNATURE, unchecked)
    report = Report(f"confidentiality({fn})", trials, seed)
    lo, hi = SAMPLE_RANGE
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        i = rng.randint(lo, hi)
        j = rng.randint(lo, hi - 1)
        if j >= i:
            j += 1
        left = _run(program, fn, BoxV(IntV(i)))
        right = _run(program, fn, BoxV(IntV(j)))
        if not _same(left, right):
            report.failures.append(Failure(trial, f"[{i}] vs [{j}]", _show(left), _show(right)))
    return report


def fuzz_integrity(program: Program, fn: str, trials: int = 100, seed: int = 0, *, unchecked: bool = False) -> Report:
    """The trusted output must be the same for every untrusted input."""
    _prepare(program, fn, INTEG_SIGNATURE, unchecked)
    report = Report(f"integrity({fn})", trials, seed)
    lo, hi = SAMPLE_RANGE
    first = None
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        # distinct from the first sample so a single differing pair suffices
        x = rng.randint(lo, hi) if trial == 0 else rng.randint(lo, hi - 1)
        if first is not None and x >= first[0]:
            x += 1
        out = _run(program, fn, BoxV(IntV(x)))
        if first is None:
            first = (x, out)
        elif not _same(first[1], out):
            report.failures.append(Failure(trial, f"[{first[0]}] vs [{x}]", _show(first[1]), _show(out)))
    return report


# ---------------------------------------------------------------- term generation


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.counter = 0

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def int_term(self, depth: int, scope: tuple[str, ...]):
        """A term of type Int; ``scope`` holds variables graded at Public."""
        rng = self.rng
        if depth <= 1:
            if scope and rng.random() < 0.4:
                return Var(rng.choice(scope))
            return IntLit(rng.randint(-20, 20))
        choice = rng.randrange(4)
        if choice == 0:
            return self.int_term(1, scope)
        if choice == 1:
            op = rng.choice(["+", "-", "*"])
            return PrimOp(op, self.int_term(depth - 1, scope), self.int_term(depth - 1, scope))
        if choice == 2:
            v = self.fresh("v")
            return LetBox(v, self.box_term(depth - 1, scope), self.int_term(depth - 1, scope + (v,)))
        # comparison yields 0 or 1
        return PrimOp("==", self.int_term(depth - 1, scope), self.int_term(depth - 1, scope))

    def box_term(self, depth: int, scope: tuple[str, ...]):
        """A term of type Int [Public]."""
        rng = self.rng
        if depth <= 1:
            return BoxIntro(self.int_term(1, scope))
        choice = rng.randrange(5)
        if choice == 0:
            return BoxIntro(self.int_term(depth - 1, scope))
        if choice == 1:
            return Reveal(self.star_term(depth - 1))
        if choice == 2:
            v = self.fresh("v")
            return LetBox(v, self.box_term(depth - 1, scope), self.box_term(depth - 1, scope + (v,)))
        if choice == 3:
            x = self.fresh("x")
            return Endorse(self.box_term(depth - 1, scope), x, self.body(x, depth - 1, scope))
        return BoxIntro(self.int_term(depth - 1, scope))

    def star_term(self, depth: int):
        """A term of type Int *{Trusted}; trust admits no local variables."""
        return TrustIntro(self.int_term(depth, ()))

    def body(self, x: str, depth: int, scope: tuple[str, ...]):
        """A term of type Int [Public] using the trusted linear ``x`` exactly once."""
        if depth <= 1 or self.rng.random() < 0.25:
            return Reveal(Var(x))
        v = self.fresh("v")
        return LetBox(v, Reveal(Var(x)), self.box_term(depth - 1, scope + (v,)))


GOALS = {"int": INT, "box": BOX_INT, "star": STAR_INT}


def gen_term(seed: Union[int, random.Random], goal, depth: int = 3):
    """A closed, well-typed term of type Int, Int [Public] or Int *{Trusted}."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    g = _Gen(rng)
    if goal == INT:
        return g.int_term(depth, ())
    if goal == BOX_INT:
        return g.box_term(depth, ())
    if goal == STAR_INT:
        return g.star_term(depth)
    raise ValueError(f"unsupported generation goal {goal}")


def gen_body(seed: Union[int, random.Random], var: str, depth: int = 3):
    """An ``Int [Public]`` term in which the trusted ``var`` is used once."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    g = _Gen(rng)
    return g.body(var, max(depth, 2), ())


# ---------------------------------------------------------------- monad laws


def _eval(t) -> Union[Value, str]:
    try:
        return eval_term(t)
    except (EvalError, RecursionError) as exc:
        return f"<{type(exc).__name__}: {exc}>"


def law_instances(rng: random.Random, depth: int = 3) -> dict[str, tuple]:
    """One (left, right) pair of terms per law, sharing nothing across laws."""
    s = gen_term(rng, STAR_INT, depth)
    b = gen_body(rng, "x", depth)
    e = gen_term(rng, BOX_INT, depth)
    f = gen_body(rng, "x", depth)
    g = gen_body(rng, "y", depth)
    return {
        "left unit": (Endorse(Reveal(s), "x", b), subst(b, "x", s)),
        "right unit": (Endorse(e, "x", Reveal(Var("x"))), e),
        "associativity": (
            Endorse(Endorse(e, "x", f), "y", g),
            Endorse(e, "x", Endorse(f, "y", g)),
        ),
    }


def check_monad_laws(trials: int = 200, seed: int = 0, depth: int = 3) -> Report:
    """Reveal as return and endorse as bind, compared by evaluation."""
    report = Report("relative-monad laws", trials, seed)
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        try:
            instances = law_instances(rng, depth)
        except (ValueError, RecursionError) as exc:
            report.generation_errors.append(f"trial {trial}: {exc}")
            continue
        for law, (lhs, rhs) in instances.items():
            left, right = _eval(lhs), _eval(rhs)
            if not _same(left, right):
                report.failures.append(Failure(trial, f"{law}: {format_term(lhs)}", _show(left), _show(right)))
    return report

from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from gradedflow.evaluator import (
    ArityMismatch,
    BoxV,
    ClosV,
    CtorV,
    DivisionByZero,
    IntV,
    NonExhaustiveMatch,
    StarV,
    StrV,
    UnknownMain,
    eval_program,
    eval_term,
    format_value,
    value_eq,
)
from gradedflow.parser import parse_program, parse_term
from gradedflow.syntax import (
    INT,
    App,
    BoxIntro,
    Endorse,
    Lam,
    LetBox,
    Reveal,
    TBox,
    TData,
    TFun,
    TInt,
    TrustIntro,
    TStar,
    TString,
)
from gradedflow.typechecker import check_program
from gradedflow.verify import BOX_INT, STAR_INT, gen_term

from conftest import load


def test_reveal_of_trusted():
    assert eval_term(parse_term("reveal (trust 42)")) == BoxV(IntV(42))


def test_endorse_then_return():
    # hand stepping: [5] -> BoxV 5; x := StarV 5; reveal x -> BoxV 5
    assert eval_term(parse_term("endorse [5] as x in reveal x")) == BoxV(IntV(5))


def test_let_box_arithmetic():
    assert eval_term(parse_term("let [y] = [2 + 3] in [y * 2]")) == BoxV(IntV(10))


@pytest.mark.parametrize(
    "src, n",
    [("7 / 2", 3), ("-7 / 2", -3), ("7 / -2", -3), ("-7 / -2", 3), ("3 == 3", 1), ("3 == 4", 0), ("2 - 5", -3)],
)
def test_integer_ops(src, n):
    assert eval_term(parse_term(src)) == IntV(n)


def test_string_concat():
    assert eval_term(parse_term('"ab" ++ "c"')) == StrV("abc")


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        eval_term(parse_term("1 / (2 - 2)"))


def test_non_exhaustive_match():
    with pytest.raises(NonExhaustiveMatch):
        eval_term(parse_term("case 3 of | 0 -> 1 | 1 -> 2"))


def test_first_match_wins():
    assert eval_term(parse_term("case 3 of | 3 -> 10 | n -> n")) == IntV(10)
    assert eval_term(parse_term("case [[4]] of | [[y]] -> y")) == IntV(4)


def test_eval_program_identity():
    prog = parse_program("id : Int -> Int\nid x = x")
    assert eval_program(prog, "id", [IntV(7)]) == IntV(7)


def test_eval_program_errors():
    prog = parse_program("id : Int -> Int\nid x = x")
    with pytest.raises(UnknownMain):
        eval_program(prog, "main", [])
    with pytest.raises(ArityMismatch):
        eval_program(prog, "id", [])


def test_mean_age():
    prog = load("meanAge.gg")
    check_program(prog)
    ages = [30, 40]
    expected = sum(ages) // len(ages)
    assert eval_program(prog, "meanAgeOfTwo", [BoxV(IntV(a)) for a in ages]) == BoxV(IntV(expected))


def test_recursion_over_lists():
    prog = load("meanAge.gg")
    patients = CtorV("Nil")
    ages = [21, 34, 55, 60]
    for i, a in enumerate(ages):
        p = CtorV("Patient", (BoxV(IntV(i)), BoxV(StrV(f"p{i}")), BoxV(IntV(a))))
        patients = CtorV("Cons", (p, patients))
    assert eval_program(prog, "meanAge", [patients]) == BoxV(IntV(sum(ages) // len(ages)))


def test_value_eq():
    assert value_eq(BoxV(IntV(1)), BoxV(IntV(1)))
    assert not value_eq(BoxV(IntV(1)), StarV(IntV(1)))
    clos = ClosV({}, "x", parse_term("x"))
    assert not value_eq(clos, clos)
    assert not value_eq(CtorV("A", (IntV(1),)), CtorV("A", (IntV(2),)))
    assert value_eq(CtorV("A", (StrV("s"),)), CtorV("A", (StrV("s"),)))


@pytest.mark.parametrize(
    "value, text",
    [
        (IntV(-3), "-3"),
        (StrV('a"b'), '"a\\"b"'),
        (BoxV(IntV(35)), "[35]"),
        (StarV(IntV(7)), "*7"),
        (StarV(IntV(-7)), "*(-7)"),
        (CtorV("Nil"), "Nil"),
        (CtorV("Cons", (IntV(-1), CtorV("Cons", (IntV(2), CtorV("Nil"))))), "Cons (-1) (Cons 2 Nil)"),
        (BoxV(CtorV("Pair", (IntV(1), IntV(2)))), "[Pair 1 2]"),
        (StarV(CtorV("Pair", (IntV(1), IntV(2)))), "*(Pair 1 2)"),
    ],
)
def test_format_value(value, text):
    assert format_value(value) == text


# ---------------------------------------------------------------- properties


def has_shape(v, ty) -> bool:
    match ty:
        case TInt():
            return isinstance(v, IntV)
        case TString():
            return isinstance(v, StrV)
        case TBox(_, a):
            return isinstance(v, BoxV) and has_shape(v.payload, a)
        case TStar(a):
            return isinstance(v, StarV) and has_shape(v.payload, a)
        case TData():
            return isinstance(v, CtorV)
        case TFun():
            return isinstance(v, ClosV)
    return False


def erase(t):
    """Replace every modal former by its payload or binding skeleton."""
    match t:
        case BoxIntro(b) | TrustIntro(b) | Reveal(b):
            return erase(b)
        case LetBox(x, bound, body) | Endorse(bound, x, body):
            return App(Lam(x, erase(body)), erase(bound))
    if not hasattr(t, "__dataclass_fields__"):
        return t
    changes = {}
    for name in t.__dataclass_fields__:
        v = getattr(t, name)
        if hasattr(v, "__dataclass_fields__"):
            changes[name] = erase(v)
    return replace(t, **changes)


def strip(v):
    match v:
        case BoxV(p) | StarV(p):
            return strip(p)
        case CtorV(n, args):
            return CtorV(n, tuple(strip(a) for a in args))
    return v


GOALS = st.sampled_from([INT, BOX_INT, STAR_INT])


@settings(max_examples=200)
@given(st.integers(0, 2**32), GOALS, st.integers(1, 5))
def test_generated_terms_preserve_types(seed, goal, depth):
    assert has_shape(eval_term(gen_term(seed, goal, depth)), goal)


@settings(max_examples=200)
@given(st.integers(0, 2**32), GOALS, st.integers(1, 5))
def test_modal_tags_never_affect_payloads(seed, goal, depth):
    t = gen_term(seed, goal, depth)
    assert strip(eval_term(t)) == eval_term(erase(t))


@settings(max_examples=50)
@given(st.integers(0, 2**32), st.integers(1, 4))
def test_evaluation_is_deterministic(seed, depth):
    t = gen_term(seed, BOX_INT, depth)
    assert eval_term(t) == eval_term(t)


def test_corpus_results_match_signatures():
    prog = load("noninterference.gg")
    check_program(prog)
    for decl in prog.functions:
        sig = decl.signature
        args = []
        while isinstance(sig, TFun):
            args.append(BoxV(IntV(5)) if isinstance(sig.domain, TBox) else IntV(5))
            sig = sig.codomain
        assert has_shape(eval_program(prog, decl.name, args), sig), decl.name
    prog = load("addPatient.gg")
    check_program(prog)
    out = eval_program(prog, "addAdmin", [CtorV("Nil")])
    assert has_shape(out, TData("Patients"))
    assert format_value(out) == 'Cons (Patient [0] ["admin"] [40]) Nil'
    assert eval_program(prog, "greetPublic", [BoxV(StrV("Ann"))]) == BoxV(StrV("Dear Ann"))

from hypothesis import given

from gradedflow.syntax import (
    App,
    Endorse,
    IntLit,
    Lam,
    Reveal,
    TBox,
    TStar,
    TRUSTED,
    TrustIntro,
    Var,
    free_vars,
    subst,
)
from gradedflow.semiring import PUBLIC
from gradedflow.syntax import INT

from strategies import closed_terms, names, terms


def test_free_vars_examples():
    assert free_vars(Var("x")) == {"x"}
    assert free_vars(Lam("x", Var("x"))) == set()
    assert free_vars(Endorse(Var("e"), "x", App(Reveal(Var("x")), Var("y")))) == {"e", "y"}


def test_subst_examples():
    assert subst(Var("x"), "x", IntLit(5)) == IntLit(5)
    assert subst(Lam("x", Var("x")), "x", IntLit(5)) == Lam("x", Var("x"))
    assert subst(Reveal(Var("x")), "x", TrustIntro(IntLit(7))) == Reveal(TrustIntro(IntLit(7)))


def test_star_carries_only_trusted():
    assert TStar(INT).grade is TRUSTED
    assert str(TStar(TBox(PUBLIC, INT))) == "Int [Public] *{Trusted}"


@given(terms, names, closed_terms)
def test_subst_of_absent_variable_is_identity(t, x, s):
    if x not in free_vars(t):
        assert subst(t, x, s) == t


@given(terms, names, closed_terms)
def test_subst_removes_the_variable(t, x, s):
    assert free_vars(subst(t, x, s)) == free_vars(t) - {x}

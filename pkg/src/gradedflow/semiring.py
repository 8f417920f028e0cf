"""Preordered semirings grading the box modality.

Two carriers are supported. The Security semiring has two levels, with
``0 = Private``, ``1 = Public``, multiplication as join and addition as
meet. The Usage semiring counts uses exactly (natural numbers, ordered
by equality).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union


class SemiringTag(enum.Enum):
    SECURITY = "Security"
    USAGE = "Usage"


class TagMismatch(Exception):
    """Raised when a semiring operation mixes grades from different carriers."""

    def __init__(self, a: Grade, b: Grade):
        super().__init__(f"cannot combine {a} ({tag(a).value}) with {b} ({tag(b).value})")
        self.left = a
        self.right = b


class Security(enum.Enum):
    PUBLIC = "Public"
    PRIVATE = "Private"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Usage:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValueError(f"usage grade must be a natural number, got {self.n!r}")

    def __str__(self) -> str:
        return str(self.n)


Grade = Union[Security, Usage]

PUBLIC = Security.PUBLIC
PRIVATE = Security.PRIVATE


def tag(g: Grade) -> SemiringTag:
    if isinstance(g, Security):
        return SemiringTag.SECURITY
    if isinstance(g, Usage):
        return SemiringTag.USAGE
    raise TypeError(f"not a grade: {g!r}")


def zero(t: SemiringTag) -> Grade:
    return PRIVATE if t is SemiringTag.SECURITY else Usage(0)


def one(t: SemiringTag) -> Grade:
    return PUBLIC if t is SemiringTag.SECURITY else Usage(1)


def _same_tag(a: Grade, b: Grade) -> SemiringTag:
    ta, tb = tag(a), tag(b)
    if ta is not tb:
        raise TagMismatch(a, b)
    return ta


def add(a: Grade, b: Grade) -> Grade:
    if _same_tag(a, b) is SemiringTag.SECURITY:
        # meet, with Private as the unit
        return PUBLIC if PUBLIC in (a, b) else PRIVATE
    return Usage(a.n + b.n)


def mul(a: Grade, b: Grade) -> Grade:
    if _same_tag(a, b) is SemiringTag.SECURITY:
        # join, with Private annihilating
        return PRIVATE if PRIVATE in (a, b) else PUBLIC
    return Usage(a.n * b.n)


def leq(a: Grade, b: Grade) -> bool:
    """Approximation preorder: ``leq(a, b)`` means ``a`` may stand in for ``b``."""
    if _same_tag(a, b) is SemiringTag.SECURITY:
        return a == b or (a is PRIVATE and b is PUBLIC)
    return a.n == b.n


def carrier(t: SemiringTag, bound: int = 16) -> list[Grade]:
    """All Security grades, or Usage grades up to ``bound``."""
    if t is SemiringTag.SECURITY:
        return [PRIVATE, PUBLIC]
    return [Usage(n) for n in range(bound + 1)]

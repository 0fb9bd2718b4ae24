"""Rational weights and Hirzebruch-Jung continued fractions.

A weight ``p/q`` with ``0 < p < q`` expands uniquely as

    p/q = 1/(e_1 - 1/(e_2 - ... - 1/e_n)),   every e_i >= 2.

The expansion of ``p/q`` gives the self-intersections of the string on
the fiber side of the central -1 curve; the expansion of ``(q-p)/q`` (the
dual) gives the string on the section side.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence, Union

from .errors import EmptyExpansion, InvalidWeight

Rational = Union[int, Fraction]


@dataclass(frozen=True, order=True)
class Weight:
    """A reduced fraction ``p/q`` in the open unit interval."""

    p: int
    q: int

    def __post_init__(self):
        if not (isinstance(self.p, int) and isinstance(self.q, int)):
            raise InvalidWeight(f"weight entries must be integers, got {self.p!r}/{self.q!r}")
        if not 0 < self.p < self.q:
            raise InvalidWeight(f"weight must lie in (0,1), got {self.p}/{self.q}")
        if gcd(self.p, self.q) != 1:
            raise InvalidWeight(f"weight {self.p}/{self.q} is not reduced")

    @classmethod
    def from_fraction(cls, x: Rational) -> "Weight":
        x = Fraction(x)
        if not 0 < x < 1:
            raise InvalidWeight(f"weight must lie in (0,1), got {x}")
        return cls(x.numerator, x.denominator)

    @classmethod
    def parse(cls, text: str) -> "Weight":
        """Parse ``"p/q"``; the fraction must already be reduced."""
        text = str(text).strip()
        num, sep, den = text.partition("/")
        if not sep:
            raise InvalidWeight(f"weight must be written p/q, got {text!r}")
        try:
            p, q = int(num), int(den)
        except ValueError:
            raise InvalidWeight(f"weight must be written p/q, got {text!r}") from None
        return cls(p, q)

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    def complement(self) -> "Weight":
        """The weight ``1 - p/q``."""
        return Weight(self.q - self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


def as_weight(w) -> Weight:
    if isinstance(w, Weight):
        return w
    if isinstance(w, str):
        return Weight.parse(w)
    return Weight.from_fraction(w)


def hj_expand(w) -> tuple[int, ...]:
    """Hirzebruch-Jung expansion of a weight.

    >>> hj_expand(Weight(2, 5))
    (3, 2)
    """
    w = as_weight(w)
    p, q = w.p, w.q
    entries = []
    while p:
        e = -(-q // p)  # ceil(q/p) >= 2 because p < q
        entries.append(e)
        p, q = e * p - q, p
    return tuple(entries)


def hj_eval(entries: Sequence[int]) -> Weight:
    """Evaluate ``1/(e_1 - 1/(e_2 - ...))`` to a reduced weight."""
    entries = list(entries)
    if not entries:
        raise EmptyExpansion("continued fraction has no entries")
    if any(int(e) != e or e < 2 for e in entries):
        raise InvalidWeight(f"entries must be integers >= 2, got {entries}")
    # x = n/d; each step maps it to d/(e*d - n), a unimodular move, so n/d stays reduced
    n, d = 0, 1
    for e in reversed(entries):
        n, d = d, e * d - n
    return Weight(int(n), int(d))


def dual_expand(w) -> tuple[int, ...]:
    """Expansion of the complementary weight ``(q-p)/q``."""
    return hj_expand(as_weight(w).complement())


def parse_fraction(text) -> Fraction:
    """Parse an exact rational from ``"p/q"``, an integer string or an int.

    Floats are rejected so that nothing inexact leaks into the core.
    """
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, str):
        s = text.strip()
        if "." in s or "e" in s.lower():
            raise ValueError(f"decimal input is not exact: {text!r}")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational: {text!r}") from None
    raise ValueError(f"not a rational: {text!r}")


def format_fraction(x: Rational) -> str:
    """Render as ``"p/q"`` (or ``"n"`` for integers)."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"

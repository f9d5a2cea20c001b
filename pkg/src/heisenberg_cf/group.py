"""Exact arithmetic in the real Heisenberg group H3(R).

An element is stored by its matrix entries

    [[1, t1, t3],
     [0, 1,  t2],
     [0, 0,  1 ]]

which is also the product c(t3) b(t2) a(t1).  All coordinates are
:class:`fractions.Fraction`, so every group identity holds with equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Union

Rational = Union[int, Fraction]


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to Fraction (floats are rejected)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def format_fraction(x: Fraction) -> str:
    """Serialize as ``"p/q"`` with q > 0 and gcd(p, q) = 1 (integers keep ``/1``)."""
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


class GroupElement(NamedTuple):
    t1: Fraction
    t2: Fraction
    t3: Fraction

    @classmethod
    def of(cls, t1: Rational = 0, t2: Rational = 0, t3: Rational = 0) -> "GroupElement":
        return cls(as_fraction(t1), as_fraction(t2), as_fraction(t3))

    def __mul__(self, other):
        if isinstance(other, GroupElement):
            return mul(self, other)
        return NotImplemented

    def inv(self) -> "GroupElement":
        return inv(self)

    def to_json(self) -> list[str]:
        return [format_fraction(self.t1), format_fraction(self.t2), format_fraction(self.t3)]

    @classmethod
    def from_json(cls, data) -> "GroupElement":
        if len(data) != 3:
            raise ValueError("a group element serializes as [t1, t2, t3]")
        return cls.of(*data)

    def __repr__(self) -> str:
        return f"GroupElement({self.t1}, {self.t2}, {self.t3})"


_ZERO = Fraction(0)
IDENTITY = GroupElement(_ZERO, _ZERO, _ZERO)


def a(t: Rational) -> GroupElement:
    return GroupElement(as_fraction(t), _ZERO, _ZERO)


def b(t: Rational) -> GroupElement:
    return GroupElement(_ZERO, as_fraction(t), _ZERO)


def c(t: Rational) -> GroupElement:
    return GroupElement(_ZERO, _ZERO, as_fraction(t))


def mul(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement(g.t1 + h.t1, g.t2 + h.t2, g.t3 + h.t3 + g.t1 * h.t2)


def inv(g: GroupElement) -> GroupElement:
    return GroupElement(-g.t1, -g.t2, g.t1 * g.t2 - g.t3)


def product(*gs: GroupElement) -> GroupElement:
    out = IDENTITY
    for g in gs:
        out = mul(out, g)
    return out


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """g h g^-1 h^-1."""
    return product(g, h, inv(g), inv(h))


def flip(g: GroupElement) -> GroupElement:
    """The order-two automorphism swapping the a- and b-subgroups and negating the center.

    On matrix entries (a, b, c) it acts as (a, b, c) -> (b, a, ab - c).
    """
    return GroupElement(g.t2, g.t1, g.t1 * g.t2 - g.t3)


def is_central(g: GroupElement) -> bool:
    return g.t1 == 0 and g.t2 == 0


def center_part(g: GroupElement) -> GroupElement:
    """c(t3) in the factorization g = c(t3) b(t2) a(t1)."""
    return c(g.t3)


def from_abc(s1: Rational, s2: Rational, s3: Rational) -> GroupElement:
    """The element a(s1) b(s2) c(s3)."""
    s1, s2, s3 = as_fraction(s1), as_fraction(s2), as_fraction(s3)
    return GroupElement(s1, s2, s3 + s1 * s2)


def to_abc(g: GroupElement) -> tuple[Fraction, Fraction, Fraction]:
    """Coordinates (s1, s2, s3) with g = a(s1) b(s2) c(s3)."""
    return g.t1, g.t2, g.t3 - g.t1 * g.t2


def from_cba(t3: Rational, t2: Rational, t1: Rational) -> GroupElement:
    """The element c(t3) b(t2) a(t1); this is the storage order, so only a reordering."""
    return GroupElement.of(t1, t2, t3)


def power(g: GroupElement, k: int) -> GroupElement:
    if k < 0:
        return power(inv(g), -k)
    out = IDENTITY
    for _ in range(k):
        out = mul(out, g)
    return out

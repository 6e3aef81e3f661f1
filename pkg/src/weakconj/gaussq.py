"""Exact Gaussian rationals: complex numbers with rational real and imaginary parts."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, Fraction, "GaussQ"]


class GaussQ:
    """Immutable element of Q(i).

    Mixed arithmetic with ``int`` and ``Fraction`` is supported; comparisons
    with those types test equality only (Q(i) has no order).
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Rational | int = 0, im: Rational | int = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussQ is immutable")

    @staticmethod
    def coerce(x) -> "GaussQ":
        if isinstance(x, GaussQ):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussQ(x, 0)
        if isinstance(x, complex):
            raise TypeError("refusing to coerce a float complex into an exact Gaussian rational")
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussQ")

    def __add__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussQ(self.re * other, self.im * other)
        if not isinstance(other, GaussQ):
            return NotImplemented
        return GaussQ(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def inverse(self) -> "GaussQ":
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussQ(self.re / n, -self.im / n)

    def __truediv__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, GaussQ):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        if self.im == 0:
            return f"GaussQ({self.re})"
        return f"GaussQ({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


ZERO = GaussQ(0)
ONE = GaussQ(1)
I = GaussQ(0, 1)


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or an int. Floats are rejected to keep data exact."""
    if isinstance(text, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {text!r}") from exc
    raise ValueError(f"expected a rational as string 'p/q' or int, got {text!r}")


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_json(z) -> dict:
    z = GaussQ.coerce(z)
    return {"re": format_rational(z.re), "im": format_rational(z.im)}


def from_json(obj) -> GaussQ:
    return GaussQ(parse_rational(obj.get("re", "0")), parse_rational(obj.get("im", "0")))

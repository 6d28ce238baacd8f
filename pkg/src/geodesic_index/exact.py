"""Exact scalars: rationals and real quadratic irrationals a + b*sqrt(d).

Angle ratios (angle divided by pi) are stored as one of three kinds:
``Fraction``, ``Quad`` or a plain ``float``.  Floats are treated as
"allegedly irrational" and every integer-part computation on them is
guarded by a precision check.
"""

from fractions import Fraction
from math import isqrt, sqrt, floor as _floor, ceil as _ceil

from sympy.ntheory.factor_ import core as _squarefree_core

FLOAT_INTEGER_GUARD = 1e-12


class MixedFieldError(TypeError):
    """Arithmetic between quadratic irrationals of different fields."""


class PrecisionError(ArithmeticError):
    """A float quantity landed too close to an integer to decide its integer part."""


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


class Quad:
    """a + b*sqrt(d) with rational a, b != 0 and squarefree d >= 2.

    Use :func:`quad` to build values; it collapses to ``Fraction`` when b == 0.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a = a
        self.b = b
        self.d = d

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Quad):
            if other.d != self.d:
                raise MixedFieldError(f"sqrt({self.d}) and sqrt({other.d}) do not mix")
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(self.a + c[0], self.b + c[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.a, -self.b, self.d)

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(self.a - c[0], self.b - c[1], self.d)

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(c[0] - self.a, c[1] - self.b, self.d)

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b = c
        return quad(self.a * a + self.b * b * self.d, self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def _inverse(self):
        norm = self.a * self.a - self.b * self.b * self.d
        return Quad(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other):
        if isinstance(other, Quad):
            return self * other._inverse()
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return quad(self.a / c[0], self.b / c[0], self.d)

    def __rtruediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self._inverse() * c[0]

    # order
    def sign(self):
        a, b, d = self.a, self.b, self.d
        if a >= 0 and b > 0:
            return 1
        if a <= 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        big_a = a * a > b * b * d
        return (1 if a > 0 else -1) if big_a else (1 if b > 0 else -1)

    def _cmp(self, other):
        diff = self - other
        return diff.sign() if isinstance(diff, Quad) else (diff > 0) - (diff < 0)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, Quad):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        return False

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __floor__(self):
        # write as (P + Q sqrt d) / R with R > 0
        den = self.a.denominator * self.b.denominator
        p = self.a.numerator * (den // self.a.denominator)
        q = self.b.numerator * (den // self.b.denominator)
        root = isqrt(q * q * self.d)
        k = root if q >= 0 else -root - 1
        return (p + k) // den

    def __ceil__(self):
        return self.__floor__() + 1

    def __float__(self):
        return float(self.a) + float(self.b) * sqrt(self.d)

    def __repr__(self):
        return f"Quad({self.a}, {self.b}, {self.d})"

    def __str__(self):
        sign = "+" if self.b > 0 else "-"
        return f"{self.a}{sign}{abs(self.b)}*sqrt({self.d})"


def quad(a, b=0, d=1):
    """Build a + b*sqrt(d), reducing d to its squarefree part."""
    a, b = _frac(a), _frac(b)
    if d < 1:
        raise ValueError("d must be a positive integer")
    if b == 0 or d == 1:
        return a + b if d == 1 else a
    free = int(_squarefree_core(d))
    scale = isqrt(d // free)
    if free == 1:
        return a + b * scale
    return Quad(a, b * scale, free)


def is_exact(x):
    return isinstance(x, (int, Fraction, Quad))


def exact_floor(x):
    if isinstance(x, float):
        guard_float(x)
        return _floor(x)
    return _floor(x)


def exact_ceil(x):
    if isinstance(x, float):
        guard_float(x)
        return _ceil(x)
    return _ceil(x)


def guard_float(x):
    if abs(x - round(x)) < FLOAT_INTEGER_GUARD:
        raise PrecisionError(f"float value {x!r} is within {FLOAT_INTEGER_GUARD} of an integer")


def is_integer(x):
    if isinstance(x, Quad):
        return False
    if isinstance(x, float):
        guard_float(x)
        return False
    return Fraction(x).denominator == 1


def fractional_part(x):
    """x - floor(x); exact for exact inputs."""
    return x - exact_floor(x)


def exact_sum(values, start=Fraction(0)):
    """Sum exactly when the field allows it, otherwise fall back to float."""
    total = start
    for v in values:
        try:
            if isinstance(total, float) or isinstance(v, float):
                raise MixedFieldError
            total = total + v
        except MixedFieldError:
            total = float(total) + float(v)
    return total


def to_fraction(value):
    """Parse ints, Fractions, or strings like '3/4'."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot read {value!r} as a rational")


class Angle:
    """An angle stored as its ratio to pi: Fraction, Quad, or float."""

    __slots__ = ("ratio",)

    def __init__(self, ratio):
        if isinstance(ratio, int):
            ratio = Fraction(ratio)
        if not isinstance(ratio, (Fraction, Quad, float)):
            raise TypeError(f"unsupported angle ratio {ratio!r}")
        if not (0 <= ratio <= 2):
            raise ValueError(f"angle ratio {ratio} outside [0, 2]")
        self.ratio = ratio

    @classmethod
    def rational(cls, num, den=1):
        return cls(Fraction(num, den))

    @classmethod
    def quadratic(cls, a, b, d):
        return cls(quad(a, b, d))

    @property
    def kind(self):
        if isinstance(self.ratio, Fraction):
            return "rational"
        if isinstance(self.ratio, Quad):
            return "quadratic"
        return "float"

    @property
    def exact(self):
        return self.kind != "float"

    @property
    def radians(self):
        from math import pi
        return float(self.ratio) * pi

    def unit(self):
        """The point exp(i*angle) on the unit circle."""
        import cmath
        if self.kind == "rational":
            # hit the axes exactly where possible
            r = self.ratio % 2
            table = {Fraction(0): 1, Fraction(1, 2): 1j, Fraction(1): -1, Fraction(3, 2): -1j}
            if r in table:
                return complex(table[r])
        return cmath.exp(1j * self.radians)

    def conjugate(self):
        if self.ratio == 0:
            return Angle(Fraction(0))
        return Angle(2 - self.ratio)

    def is_close(self, other, tol=1e-9):
        if self.exact and other.exact:
            return self == other
        diff = abs(float(self.ratio) - float(other.ratio)) % 2
        return min(diff, 2 - diff) <= tol

    def to_json(self):
        r = self.ratio
        if isinstance(r, Fraction):
            return {"kind": "rational", "num": r.numerator, "den": r.denominator}
        if isinstance(r, Quad):
            return {"kind": "quadratic", "a_num": r.a.numerator, "a_den": r.a.denominator,
                    "b_num": r.b.numerator, "b_den": r.b.denominator, "d": r.d}
        return {"kind": "float", "value": r}

    @classmethod
    def from_json(cls, obj):
        kind = obj.get("kind")
        if kind == "rational":
            return cls(Fraction(int(obj["num"]), int(obj["den"])))
        if kind == "quadratic":
            return cls(quad(Fraction(int(obj["a_num"]), int(obj["a_den"])),
                            Fraction(int(obj["b_num"]), int(obj["b_den"])), int(obj["d"])))
        if kind == "float":
            return cls(float(obj["value"]))
        raise ValueError(f"unknown angle kind {kind!r}")

    def sort_key(self):
        return (float(self.ratio), self.kind)

    def __eq__(self, other):
        return isinstance(other, Angle) and type(self.ratio) is type(other.ratio) and self.ratio == other.ratio

    def __hash__(self):
        return hash(self.ratio)

    def __repr__(self):
        return f"Angle({self.ratio})"

    def __str__(self):
        return f"{self.ratio}"


def parse_angle(text):
    """Read an angle ratio from CLI text: '2/3', 'sqrt2-1' style is not parsed; use JSON for quadratics."""
    text = text.strip()
    try:
        return Angle(Fraction(text))
    except (ValueError, ZeroDivisionError):
        return Angle(float(text))

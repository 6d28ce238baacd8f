"""Index and nullity of iterates from the normal-form data of the first return.

Notation: for an angle with ratio x = theta/pi, the iterate m sees
m*theta/(2 pi) = m*x/2.  ``ceil`` and the non-integer indicator of that
quantity drive every formula below.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, ceil
import warnings

from .exact import Quad, exact_sum, guard_float
from .normal_forms import Decomposition


class NotApplicableError(ValueError):
    pass


class _HalfMultiple:
    """Evaluates ceil(m*x/2) and whether m*x/2 is an integer, for a fixed ratio x."""

    __slots__ = ("kind", "num", "den", "p", "q", "d", "r", "value")

    def __init__(self, ratio):
        if isinstance(ratio, Fraction):
            self.kind = "rational"
            self.num, self.den = ratio.numerator, 2 * ratio.denominator
        elif isinstance(ratio, Quad):
            self.kind = "quadratic"
            den = ratio.a.denominator * ratio.b.denominator
            self.p = ratio.a.numerator * (den // ratio.a.denominator)
            self.q = ratio.b.numerator * (den // ratio.b.denominator)
            self.d, self.r = ratio.d, 2 * den
        else:
            self.kind = "float"
            self.value = float(ratio) / 2

    def ceil(self, m):
        if self.kind == "rational":
            return -((-m * self.num) // self.den)
        if self.kind == "quadratic":
            b = m * self.q
            root = isqrt(b * b * self.d)
            k = root if b >= 0 else -root - 1
            return (m * self.p + k) // self.r + 1
        x = m * self.value
        guard_float(x)
        return ceil(x)

    def non_integer(self, m):
        if self.kind == "rational":
            return 1 if (m * self.num) % self.den else 0
        if self.kind == "quadratic":
            return 1
        guard_float(m * self.value)
        return 1


@dataclass
class IndexSeed:
    """First-return data: i(c), nu(c) and the normal-form decomposition."""
    i1: int
    nu1: int
    d: Decomposition

    def __post_init__(self):
        if not isinstance(self.i1, int):
            raise TypeError("i1 must be an integer")
        if self.nu1 != self.d.nullity_at_one:
            raise ValueError(f"nu1 = {self.nu1} but the decomposition has nullity "
                             f"{self.d.nullity_at_one} at 1")
        d = self.d
        self._rot = [_HalfMultiple(a.ratio) for a in d.rotations]
        self._nontriv = [_HalfMultiple(a.ratio) for a in d.nontrivial_n2]
        self._triv = [_HalfMultiple(a.ratio) for a in d.trivial_n2]
        self._slope = self.i1 + d.p_minus + d.p_zero - d.r
        self._shift = -d.r - d.p_minus - d.p_zero
        self._odd_minus_one = d.q_zero + d.q_plus
        self._odd_nullity = d.q_minus + 2 * d.q_zero + d.q_plus
        self._circle = 2 * (d.r + d.r_star + d.r_zero)
        try:
            single = parity_check(self)
        except NotApplicableError:
            single = None
        if single is not None and single.status == "violation":
            warnings.warn(f"i1 = {self.i1} has the wrong parity for {single.block}", stacklevel=2)

    @property
    def e(self):
        return self.d.elliptic_height

    @property
    def order(self):
        return self.d.order


@dataclass
class IteratedIndex:
    m: int
    index: int
    nullity: int


def _check_m(m):
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"iterate count must be a positive integer, got {m!r}")


def index_iterate(s, m):
    _check_m(m)
    even = 1 - (m % 2)
    value = m * s._slope + s._shift - even * s._odd_minus_one
    value += 2 * sum(h.ceil(m) for h in s._rot)
    value += 2 * (sum(h.non_integer(m) for h in s._nontriv) - s.d.r_star)
    return value


def nullity_iterate(s, m):
    _check_m(m)
    even = 1 - (m % 2)
    value = s.nu1 + even * s._odd_nullity + s._circle
    value -= 2 * sum(h.non_integer(m) for hs in (s._rot, s._nontriv, s._triv) for h in hs)
    return value


def iterate(s, m):
    return IteratedIndex(m, index_iterate(s, m), nullity_iterate(s, m))


def mean_index(s):
    """Mean index; exact (Fraction or Quad) when the rotation angles share a field."""
    d = s.d
    base = Fraction(s.i1 + d.p_minus + d.p_zero - d.r)
    return exact_sum((a.ratio for a in d.rotations), base)


@dataclass
class ParityReport:
    status: str      # "ok" or "violation"
    required: str    # "odd", "even" or "any"
    block: str


def _single_block(d):
    counts = {"N1(1,1)": d.p_minus, "I2": d.p_zero, "N1(1,-1)": d.p_plus,
              "N1(-1,1)": d.q_minus, "-I2": d.q_zero, "N1(-1,-1)": d.q_plus,
              "R": d.r, "N2": d.r_star + d.r_zero}
    nonzero = {k: v for k, v in counts.items() if v}
    if not nonzero:
        return "hyperbolic" if d.residual_order else None
    if d.residual_order or len(nonzero) != 1 or sum(nonzero.values()) != 1:
        return None
    return next(iter(nonzero))


_PARITY = {"N1(1,1)": "odd", "I2": "odd", "N1(1,-1)": "even", "N1(-1,1)": "odd",
           "-I2": "odd", "N1(-1,-1)": "odd", "R": "odd", "N2": "even", "hyperbolic": "any"}


def parity_check(s):
    """Parity of i1 forced by a single basic block."""
    block = _single_block(s.d)
    if block is None:
        raise NotApplicableError("parity rule applies to a single basic block only")
    required = _PARITY[block]
    if required == "any":
        ok = True
    else:
        ok = (s.i1 % 2 == 1) == (required == "odd")
    return ParityReport("ok" if ok else "violation", required, block)


@dataclass
class GapResult:
    ok: bool
    lower_slack: int
    upper_slack: int


def gap_bounds_check(s, m):
    """Check nu(m) - e/2 <= i(m+1) - i(m) - i1 <= nu1 - nu(m+1) + e/2."""
    _check_m(m)
    half_e = s.e // 2
    middle = index_iterate(s, m + 1) - index_iterate(s, m) - s.i1
    lower = nullity_iterate(s, m) - half_e
    upper = s.nu1 - nullity_iterate(s, m + 1) + half_e
    return GapResult(lower <= middle <= upper, middle - lower, upper - middle)


@dataclass
class HingstonRow:
    m: int
    lhs: int
    rhs: int
    status: str   # "equal", "strict" or "violated"


def hingston_check(s, n, m_max):
    """Compare i(m) + nu(m) with m(i1 + nu1) - (n - 1)(m - 1) for m = 1..m_max."""
    rows = []
    for m in range(1, m_max + 1):
        lhs = index_iterate(s, m) + nullity_iterate(s, m)
        rhs = m * (s.i1 + s.nu1) - (n - 1) * (m - 1)
        status = "equal" if lhs == rhs else ("strict" if lhs < rhs else "violated")
        rows.append(HingstonRow(m, lhs, rhs, status))
    return rows

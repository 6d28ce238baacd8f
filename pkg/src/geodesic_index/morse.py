"""Morse accounting on the free loop space of a sphere.

Betti numbers of the pair (free loops mod S^1, constant loops) for S^n,
local critical-module data of iterated closed geodesics, Euler
characteristics and their averages, the mean index identity and the
Morse inequalities.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, sqrt, isclose

from .exact import MixedFieldError, exact_sum
from .iteration import IndexSeed, index_iterate, nullity_iterate, mean_index


class InsufficientDataError(ValueError):
    pass


# Betti numbers

def betti(n, q):
    """Rank of H_q of the loop-space pair for S^n, read off the Poincare series.

    n = 2k+1:  t^{2k} ( 1/(1-t^2) + t^{2k}/(1-t^{2k}) )
    n = 2k:    t^{2k-1} ( 1/(1-t^2) + t^{4k-2}/(1-t^{4k-2}) )
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if n % 2:
        start, period = n - 1, n - 1
    else:
        start, period = n - 1, 2 * n - 2
    shift = q - start
    if shift < 0:
        return 0
    value = 1 if shift % 2 == 0 else 0
    if shift >= period and shift % period == 0:
        value += 1
    return value


def betti_table(n, q_max):
    return [betti(n, q) for q in range(q_max + 1)]


@dataclass
class AlternatingSum:
    value: int
    closed_form: int = None
    note: str = ""


def betti_alternating_sum(n, big_n):
    """Sum over q = 0 .. 2N+n-2 of (-1)^q b_q, with the closed form when N has the cut-off shape."""
    top = 2 * big_n + n - 2
    value = sum((-1) ** q * betti(n, q) for q in range(top + 1))
    if n % 2:
        k = (n - 1) // 2
        if big_n % k == 0:
            m = big_n // k
            return AlternatingSum(value, m * (k + 1) - 1)
        return AlternatingSum(value, None, f"N={big_n} is not a multiple of k={k}")
    k = n // 2
    if big_n % (2 * k - 1) == 0:
        m = big_n // (2 * k - 1)
        return AlternatingSum(value, -2 * m * k + 1)
    return AlternatingSum(value, None, f"N={big_n} is not a multiple of 2k-1={2 * k - 1}")


def identity_constant(n):
    """Right-hand side of the mean index identity for S^n."""
    if n % 2 == 0:
        return Fraction(-n, 2 * n - 2)
    return Fraction(n + 1, 2 * n - 2)


# records

def analytic_period(seed):
    """Minimal T with nu(p+T) = nu(p) and i(p+T) - i(p) even for all p.

    The candidate lcm(2, 2*den(theta/2pi) over rational angles), doubled when
    -1 is an eigenvalue, is a period; the minimal one divides it.
    """
    d = seed.d
    cand = 2
    for a in d.angles():
        if a.kind == "rational":
            cand = lcm(cand, 2 * (a.ratio / 2).denominator)
    if d.q_minus + d.q_zero + d.q_plus:
        cand *= 2
    rows = [(nullity_iterate(seed, p), index_iterate(seed, p)) for p in range(1, 2 * cand + 1)]
    for t in sorted(x for x in range(1, cand + 1) if cand % x == 0):
        if all(rows[p + t][0] == rows[p][0] and (rows[p + t][1] - rows[p][1]) % 2 == 0
               for p in range(cand)):
            return t
    return cand


def _check_k_entry(m, ks, nu):
    if len(ks) != nu + 1:
        raise ValueError(f"k_table[{m}] has {len(ks)} entries but nu(c^{m}) = {nu}")
    if any((not isinstance(k, int)) or k < 0 for k in ks):
        raise ValueError(f"k_table[{m}] entries must be non-negative integers")
    if ks[0] > 1 or ks[-1] > 1:
        raise ValueError(f"k_table[{m}]: k_0 and k_nu take only the values 0 or 1")
    if nu >= 1:
        if ks[0] == 1 and any(ks[1:]):
            raise ValueError(f"k_table[{m}]: k_0 = 1 forces every other entry to vanish")
        if ks[-1] == 1 and any(ks[:-1]):
            raise ValueError(f"k_table[{m}]: k_nu = 1 forces every other entry to vanish")
        if any(ks[1:-1]) and (ks[0] or ks[-1]):
            raise ValueError(f"k_table[{m}]: a middle entry forces k_0 = k_nu = 0")
    if nu <= 2 and sum(1 for k in ks if k) > 1:
        raise ValueError(f"k_table[{m}]: with nu <= 2 at most one entry is non-zero")


@dataclass
class GeodesicRecord:
    name: str
    seed: IndexSeed
    lifts: int = 1
    length: float = None
    energy: float = None
    k_table: dict = None
    waiver: bool = False

    def __post_init__(self):
        if self.lifts < 1:
            raise ValueError("lifts must be positive")
        if self.length is not None and self.length <= 0:
            raise ValueError("length must be positive")
        if self.energy is not None and self.energy <= 0:
            raise ValueError("energy must be positive")
        if self.length is not None and self.energy is not None:
            if abs(self.length - sqrt(2 * self.energy)) > 1e-9 * max(1.0, self.length):
                raise ValueError("length and energy violate L = sqrt(2E)")
        if self.k_table is not None:
            period = self.period
            table = {}
            for m, ks in self.k_table.items():
                m = int(m)
                if not 1 <= m <= period:
                    raise ValueError(f"k_table key {m} outside one period 1..{period}")
                ks = tuple(ks)
                _check_k_entry(m, ks, nullity_iterate(self.seed, m))
                if nullity_iterate(self.seed, m) == 0:
                    parity = (index_iterate(self.seed, m) - self.seed.i1) % 2 == 0
                    if ks[0] != int(parity):
                        raise ValueError(f"k_table[{m}] contradicts the nondegenerate parity rule")
                table[m] = ks
            self.k_table = dict(sorted(table.items()))

    @property
    def period(self):
        return analytic_period(self.seed)

    @property
    def resolved_length(self):
        if self.length is not None:
            return self.length
        if self.energy is not None:
            return sqrt(2 * self.energy)
        return None


def local_dims(rec, m):
    """(k_0, ..., k_nu) at the iterate m."""
    seed = rec.seed
    nu = nullity_iterate(seed, m)
    if rec.k_table is not None:
        key = (m - 1) % rec.period + 1
        if key in rec.k_table:
            return rec.k_table[key]
    if nu == 0:
        return (1 if (index_iterate(seed, m) - seed.i1) % 2 == 0 else 0,)
    raise InsufficientDataError(f"{rec.name}: iterate {m} is degenerate and no k_table entry covers it")


def critical_module_dims(rec, m, q):
    shift = q - index_iterate(rec.seed, m)
    ks = local_dims(rec, m)
    return ks[shift] if 0 <= shift < len(ks) else 0


def euler_chi(rec, m):
    i = index_iterate(rec.seed, m)
    return sum((-1) ** (i + l) * k for l, k in enumerate(local_dims(rec, m)))


def average_chi(rec, method="period"):
    """Average Euler characteristic.

    ``period`` averages euler_chi over one analytic period.  ``shortcut``
    applies the nondegenerate formula from i(c) and i(c^2) only.
    """
    seed = rec.seed
    if method == "shortcut":
        if seed.nu1 != 0:
            raise InsufficientDataError(f"{rec.name}: the shortcut needs a nondegenerate first return")
        sign = (-1) ** seed.i1
        if (index_iterate(seed, 2) - seed.i1) % 2 == 0:
            return Fraction(sign)
        return Fraction(sign, 2)
    period = rec.period
    return Fraction(sum(euler_chi(rec, m) for m in range(1, period + 1)), period)


def mean_index_identity(records, n, method="period"):
    """Sum over records of lifts * chi_hat / mean index, minus the sphere constant."""
    terms = []
    for rec in records:
        mi = mean_index(rec.seed)
        if not mi > 0:
            raise ValueError(f"{rec.name}: mean index must be positive")
        chi = average_chi(rec, method)
        try:
            if isinstance(mi, float):
                raise MixedFieldError
            terms.append(rec.lifts * chi / mi)
        except MixedFieldError:
            terms.append(rec.lifts * float(chi) / float(mi))
    return exact_sum(terms) - identity_constant(n)


# Morse inequalities

@dataclass
class MorseTable:
    morse: list      # M_q, q = 0..q_max
    betti: list      # b_q

    def __post_init__(self):
        if len(self.morse) != len(self.betti):
            raise ValueError("M and b must cover the same degrees")
        if any((not isinstance(x, int)) or x < 0 for x in self.morse + self.betti):
            raise ValueError("table entries must be non-negative integers")

    @property
    def q_max(self):
        return len(self.morse) - 1


@dataclass
class MorseViolation:
    degree: int
    kind: str       # "rank" or "alternating"
    lhs: int
    rhs: int


@dataclass
class MorseReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    @property
    def first_degree(self):
        return min((v.degree for v in self.violations), default=None)


def morse_inequality_check(table):
    report = MorseReport()
    alt_m = alt_b = 0
    for q, (m, b) in enumerate(zip(table.morse, table.betti)):
        alt_m = m - alt_m
        alt_b = b - alt_b
        if m < b:
            report.violations.append(MorseViolation(q, "rank", m, b))
        if alt_m < alt_b:
            report.violations.append(MorseViolation(q, "alternating", alt_m, alt_b))
    return report


def morse_table(records, n, q_max):
    """M_q counted over all records, lifts and iterates that can reach degree q <= q_max."""
    counts = [0] * (q_max + 1)
    for rec in records:
        mi = float(mean_index(rec.seed))
        if mi <= 0:
            raise ValueError(f"{rec.name}: mean index must be positive")
        # |i(m) - m * mean| <= order of the first return
        reach = rec.seed.order
        m = 1
        while m * mi - reach <= q_max:
            i = index_iterate(rec.seed, m)
            ks = local_dims(rec, m)
            for l, k in enumerate(ks):
                q = i + l
                if 0 <= q <= q_max:
                    counts[q] += rec.lifts * k
            m += 1
    return MorseTable(counts, betti_table(n, q_max))


# resonance

@dataclass
class ResonanceReport:
    ok: bool
    ratios: list
    common: float = None


def resonance_check(records, rel_tol=1e-9):
    ratios = []
    for rec in records:
        length = rec.resolved_length
        if length is None:
            raise InsufficientDataError(f"{rec.name}: length or energy required")
        ratios.append(float(mean_index(rec.seed)) / length)
    ok = all(isclose(r, ratios[0], rel_tol=rel_tol) for r in ratios)
    return ResonanceReport(ok, ratios, ratios[0] if ok and ratios else None)

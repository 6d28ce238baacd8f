"""Symplectic matrices, the diamond product and unit-circle spectra.

Matrices carry an exactness tag.  Exact matrices hold ``Fraction`` entries
and get their spectrum from a factorization of the characteristic
polynomial over Q; float matrices go through LAPACK with clustering.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np
import sympy

from .exact import Angle

SYMPLECTIC_TOL = 1e-9
UNIT_TOL = 1e-9
AMBIGUOUS_TOL = 1e-6
CLUSTER_TOL = 1e-6
RANK_TOL = 1e-7
JORDAN_SPLIT_TOL = 1e-7


class DimensionError(ValueError):
    pass


class NotSymplecticError(ValueError):
    pass


class DomainError(ValueError):
    """A point that was supposed to lie on the unit circle does not."""


class AmbiguousSpectrumError(ArithmeticError):
    """A float eigenvalue sits too close to the unit circle to classify."""


def standard_j(n):
    """J = [[0, I], [-I, 0]] of order 2n, float."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _exact_j(n):
    out = np.full((2 * n, 2 * n), Fraction(0), dtype=object)
    for k in range(n):
        out[k, n + k] = Fraction(1)
        out[n + k, k] = Fraction(-1)
    return out


def _as_array(data):
    """Return (array, exact) from nested lists / numpy arrays."""
    if isinstance(data, SymplecticMatrix):
        return data.data, data.exact
    arr = np.asarray(data, dtype=object)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
        raise DimensionError(f"expected an even-order square matrix, got shape {arr.shape}")
    flat = arr.ravel()
    exact = all(isinstance(x, (int, Fraction, np.integer)) and not isinstance(x, bool) for x in flat)
    if exact:
        conv = np.array([Fraction(int(x)) if isinstance(x, (int, np.integer)) else x for x in flat],
                        dtype=object).reshape(arr.shape)
        return conv, True
    return np.array(arr, dtype=float), False


class SymplecticMatrix:
    """A 2n x 2n real symplectic matrix with M^T J M = J."""

    def __init__(self, data, tol=SYMPLECTIC_TOL, check=True):
        self.data, self.exact = _as_array(data)
        if check and not is_symplectic(self, tol):
            raise NotSymplecticError("M^T J M differs from J")

    @property
    def order(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.order // 2

    def to_float(self):
        if self.exact:
            return np.array(self.data, dtype=float)
        return self.data

    def entries_key(self):
        return tuple(self.data.ravel().tolist())

    def __matmul__(self, other):
        other = other if isinstance(other, SymplecticMatrix) else SymplecticMatrix(other)
        if self.exact and other.exact:
            return SymplecticMatrix(self.data.dot(other.data), check=False)
        return SymplecticMatrix(self.to_float() @ other.to_float(), check=False)

    def inverse(self):
        # M^{-1} = -J M^T J
        n = self.n
        if self.exact:
            j = _exact_j(n)
            return SymplecticMatrix(-j.dot(self.data.T).dot(j), check=False)
        j = standard_j(n)
        return SymplecticMatrix(-j @ self.data.T @ j, check=False)

    def __repr__(self):
        tag = "exact" if self.exact else "float"
        return f"SymplecticMatrix(order={self.order}, {tag})"


def is_symplectic(m, tol=SYMPLECTIC_TOL):
    data, exact = _as_array(m)
    n = data.shape[0] // 2
    if exact:
        j = _exact_j(n)
        return bool(np.all(data.T.dot(j).dot(data) == j))
    j = standard_j(n)
    residual = data.T @ j @ data - j
    return bool(np.max(np.abs(residual)) <= tol * max(1.0, np.max(np.abs(data)) ** 2))


def diamond(first, second):
    """Symplectic direct sum in (x, y) ordering: blocks interleave by quadrant."""
    a, ea = _as_array(first)
    b, eb = _as_array(second)
    exact = ea and eb
    if not exact:
        a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    i, j = a.shape[0] // 2, b.shape[0] // 2
    size = 2 * (i + j)
    out = np.full((size, size), Fraction(0), dtype=object) if exact else np.zeros((size, size))
    rows_a = list(range(i)) + list(range(i + j, 2 * i + j))
    rows_b = list(range(i, i + j)) + list(range(2 * i + j, size))
    out[np.ix_(rows_a, rows_a)] = a
    out[np.ix_(rows_b, rows_b)] = b
    return SymplecticMatrix(out, check=False)


def diamond_all(blocks):
    blocks = list(blocks)
    if not blocks:
        raise DimensionError("empty diamond product")
    result = blocks[0]
    for b in blocks[1:]:
        result = diamond(result, b)
    return result if isinstance(result, SymplecticMatrix) else SymplecticMatrix(result, check=False)


# unit-circle points

def _as_unit(omega):
    """Return (complex value, Angle or None)."""
    if isinstance(omega, Angle):
        return omega.unit(), omega
    z = complex(omega)
    if abs(abs(z) - 1) > 1e-12:
        raise DomainError(f"|omega| = {abs(z)} is not on the unit circle")
    return z, None


@dataclass
class SpectrumEntry:
    angle: Angle
    multiplicity: int


@dataclass
class CircleSpectrum:
    entries: list = field(default_factory=list)
    exact: bool = True

    @property
    def elliptic_height(self):
        return sum(e.multiplicity for e in self.entries)

    def multiplicity(self, angle, tol=UNIT_TOL):
        for e in self.entries:
            if e.angle.is_close(angle, tol):
                return e.multiplicity
        return 0


# exact spectrum, from irreducible factors of the characteristic polynomial

_z = sympy.Symbol("z")


@dataclass
class _Factor:
    poly: object        # sympy Poly in z, monic irreducible over Q
    power: int
    cyclotomic_order: int  # 0 if not cyclotomic
    unit_roots: list    # list of (Angle, complex)


def _sympy_matrix(data):
    return sympy.Matrix(data.shape[0], data.shape[1],
                        [sympy.Rational(x.numerator, x.denominator) for x in data.ravel()])


def _cyclotomic_order(poly):
    deg = poly.degree()
    for order in range(1, 4 * deg * deg + 8):
        if sympy.totient(order) == deg and \
                sympy.Poly(sympy.cyclotomic_poly(order, _z), _z).all_coeffs() == poly.all_coeffs():
            return order
    return 0


def _unit_roots(poly, order):
    if order:
        out = []
        for j in range(order):
            if gcd(j, order) == 1:
                ang = Angle(Fraction(2 * j, order))
                out.append((ang, ang.unit()))
        return out
    coeffs = poly.all_coeffs()
    if coeffs != coeffs[::-1] or poly.degree() % 2:
        # roots on the circle force a self-reciprocal factor
        return []
    half = poly.degree() // 2
    h = _reciprocal_reduce(poly, half, sympy.Symbol("w"))
    count = h.count_roots(-2, 2)
    if count == 0:
        return []
    out = []
    for root in h.real_roots():
        if -2 <= root <= 2:
            theta = float(sympy.N(sympy.acos(root / 2) / sympy.pi, 30))
            for ratio in (theta, 2 - theta):
                ang = Angle(ratio)
                out.append((ang, ang.unit()))
    return out


def _reciprocal_reduce(poly, half, w):
    """Write a self-reciprocal poly(z) = z^half * h(z + 1/z) and return h."""
    coeffs = {}
    current = poly
    for k in range(half, -1, -1):
        c = current.coeff_monomial(_z ** (half + k))
        coeffs[k] = c
        shift = sympy.Poly(sympy.expand(c * (_z ** 2 + 1) ** k * _z ** (half - k)), _z)
        current = current - shift
    return sympy.Poly(sum(c * w ** k for k, c in coeffs.items()), w)


@lru_cache(maxsize=256)
def _exact_factors(key, order):
    data = np.array(key, dtype=object).reshape(order, order)
    charpoly = _sympy_matrix(data).charpoly(_z)
    _, factors = sympy.factor_list(charpoly.as_expr(), _z)
    out = []
    for f, power in factors:
        poly = sympy.Poly(f, _z).monic()
        cyc = _cyclotomic_order(poly)
        out.append(_Factor(poly, power, cyc, _unit_roots(poly, cyc)))
    return out


def _factors(m):
    return _exact_factors(m.entries_key(), m.order)


def _exact_kernel_dim(m, poly):
    """dim ker poly(M) over Q."""
    mat = _sympy_matrix(m.data)
    size = m.order
    acc = sympy.zeros(size, size)
    power = sympy.eye(size)
    coeffs = poly.all_coeffs()[::-1]
    for c in coeffs:
        acc += c * power
        power = power * mat
    return size - acc.rank()


def _float_clusters(m):
    vals = np.linalg.eigvals(m.to_float())
    clusters = []
    for v in vals:
        for c in clusters:
            if abs(np.mean(c) - v) <= CLUSTER_TOL * 10:
                c.append(v)
                break
        else:
            clusters.append([v])
    return clusters


def _float_unit_clusters(m):
    """Clusters of eigenvalues on the unit circle: list of (Angle, size)."""
    out = []
    for c in _float_clusters(m):
        centroid = complex(np.mean(c))
        off = max(abs(abs(v) - 1) for v in c)
        # a multiple eigenvalue on U splits by about sqrt(machine eps) under rounding
        on_circle = off <= (JORDAN_SPLIT_TOL if len(c) > 1 else UNIT_TOL)
        if on_circle and abs(abs(centroid) - 1) <= UNIT_TOL:
            ratio = float(np.angle(centroid) / np.pi) % 2
            if abs(ratio - round(ratio)) < 1e-12:
                ratio = float(round(ratio) % 2)
            out.append((centroid, ratio, len(c)))
        elif off <= AMBIGUOUS_TOL:
            raise AmbiguousSpectrumError(
                f"eigenvalue cluster at {centroid} lies {off:.2e} from the unit circle")
    return out


def _float_angle(ratio):
    # snap float clusters at 1 and -1 to exact angles
    if ratio == 0.0:
        return Angle(Fraction(0))
    if ratio == 1.0:
        return Angle(Fraction(1))
    return Angle(ratio)


def circle_spectrum(m):
    """Unit-circle eigenvalues of M with algebraic multiplicities, sorted by angle."""
    m = m if isinstance(m, SymplecticMatrix) else SymplecticMatrix(m)
    entries = []
    if m.exact:
        for f in _factors(m):
            for ang, _ in f.unit_roots:
                entries.append(SpectrumEntry(ang, f.power))
    else:
        for _, ratio, size in _float_unit_clusters(m):
            entries.append(SpectrumEntry(_float_angle(ratio), size))
    entries.sort(key=lambda e: e.angle.sort_key())
    exact = m.exact and all(e.angle.exact for e in entries)
    return CircleSpectrum(entries, exact)


def elliptic_height(m):
    return circle_spectrum(m).elliptic_height


def nu_omega(m, omega):
    """Geometric multiplicity of omega as an eigenvalue of M (complex dimension)."""
    m = m if isinstance(m, SymplecticMatrix) else SymplecticMatrix(m)
    z, angle = _as_unit(omega)
    if m.exact:
        if angle is not None and angle.kind == "quadratic":
            # exp(i pi x) with x algebraic irrational is transcendental
            return 0
        for f in _factors(m):
            for ang, root in f.unit_roots:
                hit = ang == angle if (angle is not None and angle.exact and ang.exact) \
                    else abs(root - z) <= UNIT_TOL
                if hit:
                    return _exact_kernel_dim(m, f.poly) // f.poly.degree()
        return 0
    shifted = m.to_float() - z * np.eye(m.order)
    sv = np.linalg.svd(shifted, compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(m.to_float()))))
    return int(np.sum(sv <= RANK_TOL * scale))


def unit_points(m):
    """All distinct unit-circle eigenvalues with (Angle, algebraic multiplicity, geometric multiplicity)."""
    spec = circle_spectrum(m)
    return [(e.angle, e.multiplicity, nu_omega(m, e.angle)) for e in spec.entries]


def rotation(angle):
    """R(theta) as a 2x2 matrix; exact when cos and sin are rational at a quarter turn."""
    ratio = angle.ratio if isinstance(angle, Angle) else angle
    exact_table = {Fraction(1, 2): ((0, -1), (1, 0)), Fraction(3, 2): ((0, 1), (-1, 0)),
                   Fraction(1): ((-1, 0), (0, -1)), Fraction(0): ((1, 0), (0, 1)),
                   Fraction(2): ((1, 0), (0, 1))}
    if isinstance(ratio, Fraction) and ratio in exact_table:
        return [[Fraction(x) for x in row] for row in exact_table[ratio]]
    t = float(ratio) * np.pi
    return [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]]

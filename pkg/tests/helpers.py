"""Random seeds and independent reference computations shared by the tests."""

import random
import warnings
from fractions import Fraction

import sympy

from geodesic_index.core import SymplecticMatrix
from geodesic_index.exact import Angle, quad
from geodesic_index.iteration import IndexSeed
from geodesic_index.normal_forms import Decomposition, Hyperbolic, JordanPair, Rotation, Shear

# index parity carried by each basic block along its standard path
BLOCK_PARITY = {"p_minus": 1, "p_zero": 1, "p_plus": 0, "q_minus": 1, "q_zero": 1,
                "q_plus": 1, "rotation": 1, "n2": 0, "hyperbolic": 0}

SQUAREFREE = (2, 3, 5, 7)

QUARTER, THREE_QUARTER = Angle(Fraction(1, 2)), Angle(Fraction(3, 2))

# (block, angle ratio, (S+, S-)), frozen after the perturbed-path oracle reproduced every row
SPLITTING_TABLE = [
    (Shear(1, 1), Fraction(0), (1, 1)),
    (Shear(1, 0), Fraction(0), (1, 1)),
    (Shear(1, -1), Fraction(0), (0, 0)),
    (Shear(-1, 1), Fraction(1), (0, 0)),
    (Shear(-1, 0), Fraction(1), (1, 1)),
    (Shear(-1, -1), Fraction(1), (1, 1)),
    (Rotation(QUARTER), Fraction(1, 2), (0, 1)),
    (Rotation(QUARTER), Fraction(3, 2), (1, 0)),
    (JordanPair(QUARTER, False), Fraction(1, 2), (1, 1)),
    (JordanPair(QUARTER, False), Fraction(3, 2), (1, 1)),
    (JordanPair(QUARTER, True), Fraction(1, 2), (0, 0)),
    (JordanPair(QUARTER, True), Fraction(3, 2), (0, 0)),
    (Hyperbolic(Fraction(2)), Fraction(0), (0, 0)),
]


def random_ratio(rng, kind=None):
    """A ratio in (0, 2) other than 1."""
    kind = kind or rng.choice(("rational", "rational", "quadratic"))
    while True:
        if kind == "rational":
            den = rng.randint(2, 24)
            r = Fraction(rng.randint(1, 2 * den - 1), den)
        else:
            d = rng.choice(SQUAREFREE)
            r = quad(Fraction(rng.randint(-6, 6), rng.randint(1, 4)),
                     Fraction(rng.choice((-1, 1)) * rng.randint(1, 5), rng.randint(1, 6)), d)
        if 0 < r < 2 and r != 1:
            return Angle(r)


def random_decomposition(rng, max_half=4, kinds=None):
    """A random decomposition of half-order between 1 and max_half."""
    while True:
        counts = dict.fromkeys(("p_minus", "p_zero", "p_plus", "q_minus", "q_zero", "q_plus"), 0)
        rotations, nontriv, triv = [], [], []
        residual = 0
        budget = rng.randint(1, max_half)
        while budget > 0:
            choice = rng.choice(("p_minus", "p_zero", "p_plus", "q_minus", "q_zero", "q_plus",
                                 "rotation", "rotation", "rotation", "n2", "hyperbolic"))
            if choice == "rotation":
                rotations.append(random_ratio(rng, kinds and rng.choice(kinds)))
                budget -= 1
            elif choice == "n2":
                if budget < 2:
                    continue
                (nontriv if rng.random() < 0.5 else triv).append(random_ratio(rng, kinds and rng.choice(kinds)))
                budget -= 2
            elif choice == "hyperbolic":
                residual += 2
                budget -= 1
            else:
                counts[choice] += 1
                budget -= 1
        return Decomposition(**counts, rotations=tuple(rotations), nontrivial_n2=tuple(nontriv),
                             trivial_n2=tuple(triv), residual_order=residual)


def natural_parity(d):
    bits = sum(BLOCK_PARITY[k] * getattr(d, k) for k in
               ("p_minus", "p_zero", "p_plus", "q_minus", "q_zero", "q_plus"))
    return (bits + d.r) % 2


def random_seed(rng, max_half=4, kinds=None):
    d = random_decomposition(rng, max_half, kinds)
    i1 = natural_parity(d) + 2 * rng.randint(0, 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return IndexSeed(i1, d.nullity_at_one, d)


def seeds(count, seed=20240601, **kw):
    rng = random.Random(seed)
    return [random_seed(rng, **kw) for _ in range(count)]


def _divide(num, den, q_max):
    """Power-series coefficients of num(t)/den(t) up to t^q_max (den[0] = 1)."""
    out = []
    for q in range(q_max + 1):
        c = num[q] if q < len(num) else 0
        c -= sum(den[j] * out[q - j] for j in range(1, min(q, len(den) - 1) + 1))
        out.append(c)
    return out


def _monomial(e):
    return [0] * e + [1]


def _one_minus(e):
    return [1] + [0] * (e - 1) + [-1]


def _multiply(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def series_coefficients(n, q_max):
    """Betti numbers by expanding the rational generating function term by term."""
    if n % 2:
        first = _divide(_monomial(n - 1), _one_minus(2), q_max)
        second = _divide(_monomial(2 * n - 2), _one_minus(n - 1), q_max)
        return [x + y for x, y in zip(first, second)]
    # the even-dimensional form, with its (1 - t^{nm})/(1 - t^n) factor at m = 1
    m = 1
    e = n * (m + 1) - 2
    tail = _one_minus(n * m)
    first = _divide(_multiply(_monomial(n - 1), tail), _multiply(_one_minus(2), _one_minus(n)), q_max)
    second = _divide(_multiply(_monomial(n - 1 + e), tail), _multiply(_one_minus(e), _one_minus(n)), q_max)
    return [x + y for x, y in zip(first, second)]


def _block_nullity(d, angle):
    """dim ker(M - omega) from the block counts."""
    r = angle.ratio
    if r == 0:
        return d.p_minus + 2 * d.p_zero + d.p_plus
    if r == 1:
        return d.q_minus + 2 * d.q_zero + d.q_plus
    out = sum((a == angle) + (a.conjugate() == angle) for a in d.rotations)
    for a in d.nontrivial_n2 + d.trivial_n2:
        out += (a == angle) + (a.conjugate() == angle)
    return out


def bott_iterate(s, m):
    """(index, nullity) of the m-th iterate as a sum over m-th roots of unity.

    Each root contributes i_omega = i1 + S+(1) + sum over spectral points strictly between
    1 and omega of (S+ - S-) - S-(omega); nullities add likewise.
    """
    from geodesic_index.normal_forms import splitting_numbers

    d = s.d
    points = [a for a in d.spectral_angles() if a.ratio != 0]
    s_plus_one = splitting_numbers(d, Angle(Fraction(0))).plus
    index = nullity = 0
    for k in range(m):
        omega = Angle(Fraction(2 * k, m))
        if k == 0:
            index += s.i1
        else:
            value = s.i1 + s_plus_one
            for a in points:
                if a.ratio < omega.ratio:
                    sp = splitting_numbers(d, a)
                    value += sp.plus - sp.minus
            value -= splitting_numbers(d, omega).minus
            index += value
        nullity += _block_nullity(d, omega)
    return index, nullity


def random_conjugator(rng, n):
    """Rational symplectic matrix: product of shears [[I, S], [0, I]], [[I, 0], [S, I]] and diag(A, A^-T)."""
    eye = sympy.eye(n)
    zero = sympy.zeros(n, n)
    out = sympy.eye(2 * n)
    for _ in range(3):
        s = sympy.Matrix(n, n, lambda i, j: 0)
        for i in range(n):
            for j in range(i, n):
                s[i, j] = s[j, i] = sympy.Rational(rng.randint(-3, 3), rng.randint(1, 3))
        upper = sympy.Matrix(sympy.BlockMatrix([[eye, s], [zero, eye]]))
        lower = sympy.Matrix(sympy.BlockMatrix([[eye, zero], [s.T, eye]]))
        out = out * upper * lower
    while True:
        a = sympy.Matrix(n, n, lambda i, j: rng.randint(-2, 2))
        if a.det() != 0:
            break
    out = out * sympy.Matrix(sympy.BlockMatrix([[a, zero], [zero, a.inv().T]]))
    return [[Fraction(int(x.p), int(x.q)) for x in row] for row in out.tolist()]


def conjugate(m, p):
    p = SymplecticMatrix(p)
    return SymplecticMatrix(p.data.dot(m.data).dot(p.inverse().data))

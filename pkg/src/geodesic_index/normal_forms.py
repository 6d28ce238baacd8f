"""Basic normal forms, decompositions and splitting numbers.

A :class:`Decomposition` lists how many copies of each basic block a
symplectic matrix contains, up to homotopy inside its component:

    N1(1,1)^p_minus  I2^p_zero  N1(1,-1)^p_plus
    N1(-1,1)^q_minus  -I2^q_zero  N1(-1,-1)^q_plus
    R(theta_1) ... R(theta_r)
    N2 (nontrivial) ...  N2 (trivial) ...
    residual hyperbolic part of order residual_order

Angles are ratios to pi.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import mpmath
import scipy.linalg
import sympy
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .core import (SymplecticMatrix, diamond_all, rotation, circle_spectrum, nu_omega,
                   standard_j, _as_unit, _sympy_matrix, _factors, _exact_factors, UNIT_TOL)
from .exact import Angle


class UnsupportedNormalFormError(ValueError):
    """Jordan structure outside the basic blocks, or order above the supported bound."""


MAX_DECOMPOSE_ORDER = 8


# basic blocks

@dataclass(frozen=True)
class Hyperbolic:
    lam: Fraction  # D(lam) = diag(lam, 1/lam)

    def matrix(self):
        lam = Fraction(self.lam)
        return [[lam, Fraction(0)], [Fraction(0), 1 / lam]]


@dataclass(frozen=True)
class Shear:
    """N1(lam, b) with lam = +-1 and b in {-1, 0, 1}."""
    lam: int
    b: int

    def matrix(self):
        return [[Fraction(self.lam), Fraction(self.b)], [Fraction(0), Fraction(self.lam)]]


@dataclass(frozen=True)
class Rotation:
    angle: Angle

    def matrix(self):
        return rotation(self.angle)


@dataclass(frozen=True)
class JordanPair:
    """N2 = [[R(theta), B], [0, R(theta)]] in (x1, x2, y1, y2) coordinates.

    B is chosen with R^T B symmetric, so the block is symplectic.  The block
    is trivial when (B[0,1] - B[1,0]) * sin(theta) > 0.
    """
    angle: Angle
    trivial: bool

    def matrix(self):
        r = rotation(self.angle)
        exact = isinstance(r[0][0], Fraction)
        if exact:
            sin = r[1][0]
            cos = r[0][0]
        else:
            t = self.angle.radians
            cos, sin = np.cos(t), np.sin(t)
        sign_sin = 1 if sin > 0 else -1
        gap = sign_sin if self.trivial else -sign_sin   # b2 - b3
        half = Fraction(gap, 2) if exact else gap / 2
        diag = -cos * half / sin
        b = [[diag, half], [-half, diag]]
        zero = Fraction(0) if exact else 0.0
        # coordinates (x1, x2, y1, y2)
        return [[r[0][0], r[0][1], b[0][0], b[0][1]],
                [r[1][0], r[1][1], b[1][0], b[1][1]],
                [zero, zero, r[0][0], r[0][1]],
                [zero, zero, r[1][0], r[1][1]]]


def _check_angle(angle, what):
    if not isinstance(angle, Angle):
        raise TypeError(f"{what} must be an Angle")
    if not (0 < angle.ratio < 2) or angle.ratio == 1:
        raise ValueError(f"{what} ratio {angle.ratio} must lie in (0, 2) and differ from 1")


def _normalize_pair_angle(angle):
    # N2 at exp(i theta) and at exp(-i theta) describe the same block pair
    return angle.conjugate() if angle.ratio > 1 else angle


@dataclass(frozen=True)
class Decomposition:
    p_minus: int = 0
    p_zero: int = 0
    p_plus: int = 0
    q_minus: int = 0
    q_zero: int = 0
    q_plus: int = 0
    rotations: tuple = ()
    nontrivial_n2: tuple = ()
    trivial_n2: tuple = ()
    residual_order: int = 0

    def __post_init__(self):
        for name in ("p_minus", "p_zero", "p_plus", "q_minus", "q_zero", "q_plus", "residual_order"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        if self.residual_order % 2:
            raise ValueError("residual_order must be even")
        for name in ("rotations", "nontrivial_n2", "trivial_n2"):
            angles = tuple(getattr(self, name))
            for a in angles:
                _check_angle(a, name)
            if name != "rotations":
                angles = tuple(_normalize_pair_angle(a) for a in angles)
            object.__setattr__(self, name, tuple(sorted(angles, key=Angle.sort_key)))

    # block counts
    @property
    def r(self):
        return len(self.rotations)

    @property
    def r_star(self):
        return len(self.nontrivial_n2)

    @property
    def r_zero(self):
        return len(self.trivial_n2)

    @property
    def block_dimension(self):
        """Half the order: the n of Sp(2n)."""
        return (self.p_minus + self.p_zero + self.p_plus + self.q_minus + self.q_zero + self.q_plus
                + self.r + 2 * (self.r_star + self.r_zero) + self.residual_order // 2)

    @property
    def order(self):
        return 2 * self.block_dimension

    @property
    def elliptic_height(self):
        return (2 * (self.p_minus + self.p_zero + self.p_plus + self.q_minus + self.q_zero + self.q_plus)
                + 2 * self.r + 4 * (self.r_star + self.r_zero))

    @property
    def nullity_at_one(self):
        return self.p_minus + 2 * self.p_zero + self.p_plus

    def blocks(self):
        out = []
        out += [Shear(1, 1)] * self.p_minus + [Shear(1, 0)] * self.p_zero + [Shear(1, -1)] * self.p_plus
        out += [Shear(-1, 1)] * self.q_minus + [Shear(-1, 0)] * self.q_zero + [Shear(-1, -1)] * self.q_plus
        out += [Rotation(a) for a in self.rotations]
        out += [JordanPair(a, False) for a in self.nontrivial_n2]
        out += [JordanPair(a, True) for a in self.trivial_n2]
        out += [Hyperbolic(Fraction(2))] * (self.residual_order // 2)
        return out

    def angles(self):
        return list(self.rotations) + list(self.nontrivial_n2) + list(self.trivial_n2)

    def spectral_angles(self):
        """Distinct unit-circle points of the block product, as angle ratios in [0, 2)."""
        pts = []
        if self.p_minus + self.p_zero + self.p_plus:
            pts.append(Angle(Fraction(0)))
        if self.q_minus + self.q_zero + self.q_plus:
            pts.append(Angle(Fraction(1)))
        for a in self.angles():
            for b in (a, a.conjugate()):
                if not any(b.is_close(p) for p in pts):
                    pts.append(b)
        return sorted(pts, key=Angle.sort_key)

    def to_json(self):
        return {
            "p_minus": self.p_minus, "p_zero": self.p_zero, "p_plus": self.p_plus,
            "q_minus": self.q_minus, "q_zero": self.q_zero, "q_plus": self.q_plus,
            "rotations": [a.to_json() for a in self.rotations],
            "nontrivial_n2": [a.to_json() for a in self.nontrivial_n2],
            "trivial_n2": [a.to_json() for a in self.trivial_n2],
            "residual_order": self.residual_order,
        }

    @classmethod
    def from_json(cls, obj):
        ints = {k: int(obj.get(k, 0)) for k in
                ("p_minus", "p_zero", "p_plus", "q_minus", "q_zero", "q_plus", "residual_order")}
        angles = {k: tuple(Angle.from_json(a) for a in obj.get(k, [])) for k in
                  ("rotations", "nontrivial_n2", "trivial_n2")}
        return cls(**ints, **angles)


def build(d, residual=None):
    """The block-diagonal representative of d; exact when every block is rational.

    ``residual`` optionally replaces the default D(2) blocks of the hyperbolic part.
    """
    blocks = [b.matrix() for b in d.blocks()]
    if residual is not None:
        res = SymplecticMatrix(residual)
        if res.order != d.residual_order:
            raise ValueError("residual matrix order does not match residual_order")
        if res.order and circle_spectrum(res).entries:
            raise ValueError("residual matrix has unit-circle eigenvalues")
        blocks = blocks[:len(blocks) - d.residual_order // 2] + [res]
    if not blocks:
        raise ValueError("empty decomposition")
    return diamond_all(blocks)


def homotopy_invariants(m):
    """Unit-circle data (angle, algebraic multiplicity, geometric multiplicity) for each point."""
    m = m if isinstance(m, SymplecticMatrix) else SymplecticMatrix(m)
    spec = circle_spectrum(m)
    return [(e.angle, e.multiplicity, nu_omega(m, e.angle)) for e in spec.entries]


# decomposition

def _poly_at(mat, poly):
    size = mat.shape[0]
    acc = sympy.zeros(size, size)
    power = sympy.eye(size)
    for c in poly.all_coeffs()[::-1]:
        acc += c * power
        power = power * mat
    return acc


@lru_cache(maxsize=256)
def _exact_local_model(key, order, angle):
    """Restriction of M and of the symplectic form to ker g(M)^2, g the rational factor at angle.

    The subspace has a rational basis, so the restricted matrices stay exact; working there
    avoids the loss of precision a badly conditioned conjugation causes on the whole space.
    Returns (kernel dimension over the factor degree, restricted M, restricted form) or None.
    """
    for f in _exact_factors(key, order):
        if any(ang == angle for ang, _ in f.unit_roots):
            mat = _sympy_matrix(np.array(key, dtype=object).reshape(order, order))
            g = _poly_at(mat, f.poly)
            kernel = (g * g).nullspace()
            if not kernel:
                return 0, None, None
            basis = sympy.Matrix.hstack(*kernel)
            j = sympy.Matrix(standard_j(order // 2).astype(int))
            restricted = (basis.T * basis).solve(basis.T * mat * basis)
            return len(kernel) // f.poly.degree(), restricted, basis.T * j * basis
    return None


def _local_model(m, angle):
    if not (m.exact and angle.exact and isinstance(angle.ratio, Fraction)):
        return None
    return _exact_local_model(m.entries_key(), m.order, angle)


# forms from exact data are evaluated at this many digits, so rank decisions are reliable
_DIGITS = 50


def _to_mp(mat):
    with mpmath.workdps(_DIGITS):
        return np.array([[mpmath.mpc(complex(0)) + mpmath.mpmathify(x) for x in row]
                         for row in mat.tolist()], dtype=object)


def _exact_jordan_basis(restricted, angle, dim):
    """Exact ker (R - omega)^2 over the cyclotomic field of omega, returned as complex floats."""
    z = sympy.exp(sympy.I * sympy.pi * sympy.Rational(angle.ratio.numerator, angle.ratio.denominator))
    field = QQ if angle.ratio in (0, 1) else QQ.algebraic_field(z)
    size = restricted.shape[0]
    shifted = DomainMatrix.from_Matrix(restricted).convert_to(field) - \
        DomainMatrix.eye(size, field) * field.from_sympy(sympy.nsimplify(z))
    rows = (shifted * shifted).nullspace().to_Matrix()
    if rows.shape[0] != dim:
        raise UnsupportedNormalFormError("generalized eigenspace dimension mismatch")
    a = (restricted - z * sympy.eye(size)).evalf(_DIGITS)
    return _to_mp(a), _to_mp(rows.T.evalf(_DIGITS))


def _kernel_dim_squared(m, angle, alg):
    """dim ker (M - omega)^2 (complex), exact when possible."""
    local = _local_model(m, angle)
    if local is not None:
        return local[0]
    z = angle.unit()
    a = m.to_float() - z * np.eye(m.order)
    return scipy.linalg.null_space(a @ a, rcond=1e-7).shape[1]


def _signature(h, expected_rank=None):
    if h.dtype == object:
        return _mp_signature(h, expected_rank)
    h = (h + h.conj().T) / 2
    vals = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.max(np.abs(vals)))) if vals.size else 1.0
    pos = int(np.sum(vals > 1e-7 * scale))
    neg = int(np.sum(vals < -1e-7 * scale))
    if expected_rank is not None and pos + neg != expected_rank:
        raise UnsupportedNormalFormError("could not resolve the signature of a structure form")
    return pos, neg


def _mp_signature(h, expected_rank):
    with mpmath.workdps(_DIGITS):
        h = mpmath.matrix((h + h.conj().T).tolist()) / 2
        vals = [mpmath.re(v) for v in mpmath.eighe(h, eigvals_only=True)] if h.rows else []
        scale = max([mpmath.mpf(1)] + [abs(v) for v in vals])
        tol = scale * mpmath.mpf(10) ** (-_DIGITS // 2)
        pos = sum(1 for v in vals if v > tol)
        neg = sum(1 for v in vals if v < -tol)
    if expected_rank is not None and pos + neg != expected_rank:
        raise UnsupportedNormalFormError("could not resolve the signature of a structure form")
    return pos, neg


def _jordan_basis(mf, z, dim):
    a = mf - z * np.eye(mf.shape[0])
    sq = a @ a
    # tolerance relative to |A|^2, not to the largest singular value of A^2, which can be ~0
    _, sing, vh = np.linalg.svd(sq)
    tol = 1e-7 * max(1.0, np.linalg.norm(a, 2)) ** 2
    basis = vh[sing <= tol].conj().T
    if basis.shape[1] != dim:
        raise UnsupportedNormalFormError("generalized eigenspace dimension mismatch")
    return a, basis


def _local_basis(m, angle, mf, j, z, dim):
    """(M - omega, generalized eigenbasis, form) in coordinates where the basis is reliable."""
    local = _local_model(m, angle)
    if local is None or local[1] is None:
        a, basis = _jordan_basis(mf, z, dim)
        return a, basis, j
    a, basis = _exact_jordan_basis(local[1], angle, dim)
    return a, basis, _to_mp(local[2])


def decompose(m):
    """Decomposition of M for orders up to 8 whose Jordan blocks are at most 2x2."""
    m = m if isinstance(m, SymplecticMatrix) else SymplecticMatrix(m)
    if m.order > MAX_DECOMPOSE_ORDER:
        raise UnsupportedNormalFormError(f"order {m.order} exceeds {MAX_DECOMPOSE_ORDER}")
    with mpmath.workdps(_DIGITS):
        return _decompose(m)


def _decompose(m):
    mf = m.to_float()
    j = standard_j(m.n)
    counts = dict(p_minus=0, p_zero=0, p_plus=0, q_minus=0, q_zero=0, q_plus=0)
    rotations, nontrivial, trivial = [], [], []
    height = 0
    for angle, alg, nu in homotopy_invariants(m):
        height += alg
        ratio = angle.ratio
        if ratio == 0 or ratio == 1:
            lam = 1 if ratio == 0 else -1
            if _kernel_dim_squared(m, angle, alg) != alg or alg % 2:
                raise UnsupportedNormalFormError(f"Jordan block of size >= 3 at {lam}")
            zero_blocks = nu - alg // 2
            shear_blocks = alg - nu
            if zero_blocks < 0:
                raise UnsupportedNormalFormError("nullity below half the multiplicity")
            a, basis, local_j = _local_basis(m, angle, mf, j, lam, alg)
            basis = np.real(basis)
            form = (a @ basis).T @ local_j @ basis
            pos, neg = _signature(form, shear_blocks)
            pre = "p" if lam == 1 else "q"
            counts[pre + "_zero"] += zero_blocks
            counts[pre + "_minus"] += pos
            counts[pre + "_plus"] += neg
            continue
        if ratio > 1:
            continue  # handled with its conjugate
        if _kernel_dim_squared(m, angle, alg) != alg:
            raise UnsupportedNormalFormError(f"Jordan block of size >= 3 at angle {angle}")
        pairs = alg - nu
        rots = 2 * nu - alg
        if rots < 0:
            raise UnsupportedNormalFormError("inconsistent multiplicities")
        z = angle.unit()
        a, basis, local_j = _local_basis(m, angle, mf, j, z, alg)
        krein = 1j * basis.conj().T @ local_j @ basis
        pos, neg = _signature(krein, alg)
        if pairs:
            chain = z * (a @ basis).conj().T @ local_j @ basis
            nontriv, triv = _signature(chain, pairs)
            if pos != pairs or neg != pairs:
                raise UnsupportedNormalFormError("rotation and N2 blocks share an eigenvalue")
            nontrivial += [angle] * nontriv
            trivial += [angle] * triv
        else:
            rotations += [angle] * pos + [angle.conjugate()] * neg
    return Decomposition(**counts, rotations=tuple(rotations), nontrivial_n2=tuple(nontrivial),
                         trivial_n2=tuple(trivial), residual_order=m.order - height)


# splitting numbers

@dataclass(frozen=True)
class SplittingPair:
    plus: int
    minus: int

    def __iter__(self):
        return iter((self.plus, self.minus))


def block_splitting(block, angle):
    """(S+, S-) of one basic block at the unit-circle point with ratio ``angle``."""
    if isinstance(block, Hyperbolic):
        return SplittingPair(0, 0)
    if isinstance(block, Shear):
        here = Fraction(0) if block.lam == 1 else Fraction(1)
        if not (angle.exact and angle.ratio == here):
            return SplittingPair(0, 0)
        if block.lam == 1:
            return SplittingPair(1, 1) if block.b >= 0 else SplittingPair(0, 0)
        return SplittingPair(1, 1) if block.b <= 0 else SplittingPair(0, 0)
    if isinstance(block, Rotation):
        if angle.is_close(block.angle):
            return SplittingPair(0, 1)
        if angle.is_close(block.angle.conjugate()):
            return SplittingPair(1, 0)
        return SplittingPair(0, 0)
    if isinstance(block, JordanPair):
        if angle.is_close(block.angle) or angle.is_close(block.angle.conjugate()):
            return SplittingPair(0, 0) if block.trivial else SplittingPair(1, 1)
        return SplittingPair(0, 0)
    raise TypeError(f"not a basic block: {block!r}")


def _omega_angle(omega):
    if isinstance(omega, Angle):
        return omega
    z, _ = _as_unit(omega)
    ratio = float(np.angle(z) / np.pi) % 2
    for exact in (Fraction(0), Fraction(1), Fraction(1, 2), Fraction(3, 2)):
        if abs(ratio - float(exact)) <= 1e-12:
            return Angle(exact)
    return Angle(ratio)


def splitting_numbers(d, omega):
    """(S+, S-) of the block product d at omega (an Angle or a unit complex number)."""
    angle = _omega_angle(omega)
    plus = minus = 0
    for block in d.blocks():
        s = block_splitting(block, angle)
        plus += s.plus
        minus += s.minus
    return SplittingPair(plus, minus)

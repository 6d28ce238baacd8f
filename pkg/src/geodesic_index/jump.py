"""Common index jumps: the torus vector, its orbit-closure data and return times.

Given seeds with positive mean indices and an admissible modulus M, the
vector v collects 1/(M * mean index) for every seed followed by
(angle ratio)/(mean index) for every unit-circle angle that carries a
negative splitting number.  A return time T with {T v} close to a
vertex chi of the admissible set gives iterates m_k at which all seeds'
indices cluster near 2T.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
import warnings

import numpy as np
import sympy
from sympy.polys.matrices import DomainMatrix

from .exact import Angle, Quad, MixedFieldError, exact_floor, fractional_part, is_exact
from .iteration import index_iterate, nullity_iterate, mean_index
from .normal_forms import splitting_numbers

DEFAULT_EPSILON = 1e-3
DEFAULT_T_BOUND = 10 ** 6
DEFAULT_RELATION_BOUND = 10 ** 3


class NoReturnTimeError(RuntimeError):
    def __init__(self, message, best_t=None, best_distance=None):
        super().__init__(message)
        self.best_t = best_t
        self.best_distance = best_distance


@dataclass
class TorusVector:
    components: list
    provenance: list     # (seed index, "mean" or angle ratio)
    modulus: int
    mean_indices: list

    @property
    def h(self):
        return len(self.components)

    @property
    def seed_count(self):
        return len(self.mean_indices)

    def floats(self):
        return np.array([float(c) for c in self.components])


@dataclass(frozen=True)
class Vertex:
    bits: tuple

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("vertex entries must be 0 or 1")

    def __len__(self):
        return len(self.bits)


def minimal_modulus(seeds):
    """Smallest M with M * ratio integral for every rational unit-circle angle of every seed."""
    m = 1
    for s in seeds:
        for a in s.d.spectral_angles():
            if a.kind == "rational":
                m = lcm(m, a.ratio.denominator)
    return m


def _safe_div(a, b):
    try:
        if isinstance(a, float) or isinstance(b, float):
            raise MixedFieldError
        return a / b
    except MixedFieldError:
        return float(a) / float(b)


def build_vector(seeds, modulus):
    if modulus < 1:
        raise ValueError("modulus must be positive")
    means = []
    for k, s in enumerate(seeds):
        mi = mean_index(s)
        if not mi > 0:
            raise ValueError(f"seed {k} has non-positive mean index {mi}")
        means.append(mi)
        for a in s.d.spectral_angles():
            if a.kind == "rational" and (modulus * a.ratio).denominator != 1:
                raise ValueError(f"modulus {modulus} not admissible: seed {k} angle {a.ratio}")
    comps, prov = [], []
    for k, mi in enumerate(means):
        comps.append(_safe_div(Fraction(1), modulus * mi))
        prov.append((k, "mean"))
    for k, (s, mi) in enumerate(zip(seeds, means)):
        for a in s.d.spectral_angles():
            if a.ratio == 0:
                continue
            count = splitting_numbers(s.d, a).minus
            for _ in range(count):
                comps.append(_safe_div(a.ratio, mi))
                prov.append((k, a))
    return TorusVector(comps, prov, modulus, means)


# relation lattice

def _integer_kernel(rows, ncols):
    """Z-basis of {x in Z^ncols : rows x = 0} by unimodular column reduction."""
    a = [list(r) for r in rows]
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def colop(j, k, p, q, r, s):
        # (col_j, col_k) <- (p col_j + q col_k, r col_j + s col_k)
        for mat in (a, u):
            for row in mat:
                x, y = row[j], row[k]
                row[j], row[k] = p * x + q * y, r * x + s * y

    pivot = 0
    for i in range(len(a)):
        if pivot >= ncols:
            break
        for j in range(pivot + 1, ncols):
            x, y = a[i][pivot], a[i][j]
            if y == 0:
                continue
            g, s1, t1 = _egcd(x, y)
            colop(pivot, j, s1, t1, -y // g, x // g)
        if a[i][pivot] != 0:
            pivot += 1
    return [[u[r][c] for r in range(ncols)] for c in range(pivot, ncols)]


def _egcd(x, y):
    if y == 0:
        return (abs(x), 1 if x >= 0 else -1, 0)
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _lll(basis):
    if len(basis) < 2:
        return basis
    dm = DomainMatrix([[sympy.ZZ(x) for x in row] for row in basis], (len(basis), len(basis[0])), sympy.ZZ)
    return [[int(x) for x in row] for row in dm.lll().to_list()]


def _canonical_sign(vec):
    for x in vec:
        if x:
            return vec if x > 0 else [-y for y in vec]
    return vec


def _split(component):
    """(rational part, irrational coefficient, d) of an exact component."""
    if isinstance(component, Quad):
        return component.a, component.b, component.d
    return Fraction(component), Fraction(0), 1


@dataclass
class TangentSpace:
    lattice: list        # Z-basis of the relation lattice
    basis: list          # rational basis of V
    within_bound: bool

    @property
    def dim(self):
        return len(self.basis)


def tangent_space(v, relation_bound=DEFAULT_RELATION_BOUND):
    """Relation lattice L = {k : k.v in Z} and V = {x : k.x = 0 for k in L}."""
    comps = v.components if isinstance(v, TorusVector) else list(v)
    if not all(is_exact(c) for c in comps):
        raise TypeError("exact kinds required: float components cannot be tested for relations")
    h = len(comps)
    parts = [_split(c) for c in comps]
    fields = sorted({d for _, b, d in parts if b != 0})
    # one row per field: sum k_j b_j = 0; plus sum k_j a_j = t (integer)
    irr_rows = []
    for d in fields:
        row = [b if dd == d else Fraction(0) for _, b, dd in parts]
        scale = lcm(*[x.denominator for x in row])
        irr_rows.append([int(x * scale) for x in row])
    rat = [a for a, _, _ in parts]
    den = lcm(*[x.denominator for x in rat]) if rat else 1
    rows = [r + [0] for r in irr_rows] + [[int(a * den) for a in rat] + [-den]]
    kernel = _integer_kernel(rows, h + 1)
    lattice = [_canonical_sign(row[:h]) for row in _lll([k for k in kernel])] if kernel else []
    lattice = [_canonical_sign(row) for row in lattice]
    within = all(abs(x) <= relation_bound for row in lattice for x in row)
    if not within:
        warnings.warn("relation lattice basis has entries above relation_bound", stacklevel=2)
    basis = []
    if irr_rows:
        mat = sympy.Matrix(irr_rows).rref()[0]
        for i in range(mat.rows):
            row = [Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1])) for x in mat.row(i)]
            if any(row):
                basis.append(tuple(row))
    return TangentSpace(lattice, basis, within)


def _psi(x):
    return 0 if x >= 0 else 1


def admissible_set_sample(v, space, samples=256, seed=0):
    """Vertices psi(a) for a in V avoiding the hyperplanes x_j = 0 at irrational components."""
    comps = v.components if isinstance(v, TorusVector) else list(v)
    h = len(comps)
    if space.dim == 0:
        return [Vertex(tuple([0] * h))]
    irrational = [j for j, c in enumerate(comps) if isinstance(c, Quad) or isinstance(c, float)]
    found = set()
    basis = [np.array([float(x) for x in b]) for b in space.basis]

    def add(x):
        if all(abs(x[j]) > 1e-12 for j in irrational):
            bits = tuple(_psi(x[j]) if abs(x[j]) > 1e-12 else 0 for j in range(h))
            found.add(bits)

    # disjoint supports split into independent sign choices
    supports = [set(np.nonzero(b)[0]) for b in basis]
    disjoint = all(not (supports[i] & supports[j]) for i in range(len(basis)) for j in range(i))
    if disjoint:
        for signs in np.ndindex(*([2] * len(basis))):
            x = sum((1 - 2 * s) * b for s, b in zip(signs, basis))
            add(x)
    else:
        rng = np.random.default_rng(seed)
        for _ in range(samples * len(basis)):
            coeffs = rng.standard_normal(len(basis))
            x = sum(c * b for c, b in zip(coeffs, basis))
            add(x)
            add(-x)
    return [Vertex(b) for b in sorted(found)]


def _exact_distance(component, t, bit):
    if isinstance(component, float):
        return abs((t * component) % 1.0 - bit)
    return abs(fractional_part(t * component) - bit)


def search_T(v, vertex, epsilon=DEFAULT_EPSILON, modulus=1, t_bound=DEFAULT_T_BOUND, limit=None):
    """Ascending T <= t_bound, T divisible by modulus, with max_k |{T v_k} - chi_k| < epsilon."""
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    comps = v.components if isinstance(v, TorusVector) else list(v)
    bits = vertex.bits if isinstance(vertex, Vertex) else tuple(vertex)
    if len(bits) != len(comps):
        raise ValueError("vertex length does not match the vector")
    vf = np.array([float(c) for c in comps])
    chi = np.array(bits, dtype=float)
    eps_exact = Fraction(epsilon)
    hits = []
    best = (None, np.inf)
    chunk = 100000
    start = 1
    count = t_bound // modulus
    while start <= count:
        stop = min(count, start + chunk - 1)
        ts = np.arange(start, stop + 1, dtype=np.int64) * modulus
        frac = np.mod(ts[:, None] * vf[None, :], 1.0)
        gap = np.abs(frac - chi[None, :])
        circ = np.minimum(gap, 1.0 - gap)
        worst = circ.max(axis=1) if len(comps) else np.zeros(len(ts))
        k = int(np.argmin(worst))
        if worst[k] < best[1]:
            best = (int(ts[k]), float(worst[k]))
        for idx in np.nonzero(worst < epsilon + 1e-6)[0]:
            t = int(ts[idx])
            if all(_exact_distance(c, t, b) < (eps_exact if is_exact(c) else epsilon)
                   for c, b in zip(comps, bits)):
                hits.append(t)
                if limit is not None and len(hits) >= limit:
                    return hits
        start = stop + 1
    if not hits:
        raise NoReturnTimeError(f"no return time up to {t_bound}; best near-miss T={best[0]} "
                                f"at distance {best[1]:.3g}", best[0], best[1])
    return hits


# certification

CHECK_NAMES = ("m_formula", "nullity_before", "nullity_after", "index_before",
               "index_after", "index_lower", "index_upper", "angle_closeness")


@dataclass
class JumpCertificate:
    T: int
    m_ks: list
    epsilon: float
    vertex: Vertex
    modulus: int
    checks: list                      # one dict per seed: name -> bool
    closeness: list = field(default_factory=list)
    delta: float = 0.0

    @property
    def passed(self):
        return all(all(c.values()) for c in self.checks)

    def failures(self):
        return [(k, name) for k, c in enumerate(self.checks) for name, ok in c.items() if not ok]

    def to_json(self):
        return {
            "T": self.T, "m": list(self.m_ks), "epsilon": self.epsilon, "delta": self.delta,
            "modulus": self.modulus, "vertex": list(self.vertex.bits),
            "checks": [dict(c) for c in self.checks],
            "angle_closeness": [float(x) for x in self.closeness],
            "passed": self.passed,
        }


def expected_iterates(v, T, vertex):
    """m_k = ([T / (M mean_k)] + chi_k) * M."""
    out = []
    for k, mi in enumerate(v.mean_indices):
        q = _safe_div(Fraction(T), v.modulus * mi)
        out.append((exact_floor(q) + vertex.bits[k]) * v.modulus)
    return out


def _closeness(seed, m):
    worst = 0
    for a in seed.d.spectral_angles():
        if a.ratio == 0:
            continue
        f = fractional_part(m * a.ratio)
        c = min(f, 1 - f)
        worst = max(worst, float(c))
    return worst


def certify(seeds, modulus, T, m_ks, vertex, epsilon=None, delta=None):
    """Evaluate the jump relations at 2m_k - 1, 2m_k, 2m_k + 1 for every seed."""
    if delta is None:
        delta = (2 * modulus + 1) * epsilon if epsilon is not None else 1e-2
    v = build_vector(seeds, modulus)
    expected = expected_iterates(v, T, vertex)
    checks, close = [], []
    for s, m, want in zip(seeds, m_ks, expected):
        half_e = s.e // 2
        s_plus = splitting_numbers(s.d, Angle(Fraction(0))).plus
        before = 2 * m - 1
        after = 2 * m + 1
        c = {
            "m_formula": m == want,
            "nullity_before": nullity_iterate(s, before) == s.nu1,
            "nullity_after": nullity_iterate(s, after) == s.nu1,
            "index_before": index_iterate(s, before) + nullity_iterate(s, before)
            == 2 * T - (s.i1 + 2 * s_plus - s.nu1),
            "index_after": index_iterate(s, after) == 2 * T + s.i1,
            "index_lower": index_iterate(s, 2 * m) >= 2 * T - half_e,
            "index_upper": index_iterate(s, 2 * m) + nullity_iterate(s, 2 * m) <= 2 * T + half_e,
        }
        worst = _closeness(s, m)
        c["angle_closeness"] = worst < delta
        close.append(worst)
        checks.append(c)
    return JumpCertificate(T, list(m_ks), epsilon if epsilon is not None else float("nan"),
                           vertex, modulus, checks, close, delta)


def find_jump(seeds, epsilon=DEFAULT_EPSILON, t_bound=DEFAULT_T_BOUND,
              relation_bound=DEFAULT_RELATION_BOUND, t_modulus=1, modulus=None, seed=0):
    """First certified jump over vertices in lexicographic order."""
    modulus = modulus or minimal_modulus(seeds)
    v = build_vector(seeds, modulus)
    exact = all(is_exact(c) for c in v.components)
    if exact:
        space = tangent_space(v, relation_bound)
        vertices = admissible_set_sample(v, space, seed=seed)
    else:
        # float components: every coordinate treated as free
        vertices = [Vertex(tuple(bits)) for bits in np.ndindex(*([2] * v.h))]
    best = None
    for vertex in vertices:
        try:
            hits = search_T(v, vertex, epsilon, t_modulus, t_bound, limit=64)
        except NoReturnTimeError as exc:
            if best is None or (exc.best_distance or np.inf) < best.best_distance:
                best = exc
            continue
        for T in hits:
            m_ks = expected_iterates(v, T, vertex)
            if all(m >= 1 for m in m_ks):
                return certify(seeds, modulus, T, m_ks, vertex, epsilon), v
    raise best or NoReturnTimeError("no admissible vertex produced a return time")

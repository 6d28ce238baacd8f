import random
import warnings
from fractions import Fraction
from math import lcm

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from geodesic_index.exact import Angle, fractional_part, quad
from geodesic_index.iteration import IndexSeed, index_iterate, mean_index, nullity_iterate
from geodesic_index.jump import (NoReturnTimeError, Vertex, admissible_set_sample, build_vector,
                                 certify, expected_iterates, find_jump, minimal_modulus, search_T,
                                 tangent_space)
from geodesic_index.normal_forms import Decomposition

from helpers import natural_parity

F = Fraction
HALF_ROOT2 = quad(0, F(1, 2), 2)


def seed(i1, **blocks):
    d = Decomposition(**blocks)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return IndexSeed(i1, d.nullity_at_one, d)


def rational_pair():
    return [seed(1, rotations=(Angle(F(2, 3)),)), seed(1, rotations=(Angle(F(1, 2)),))]


def test_build_vector_examples():
    v = build_vector([seed(1, rotations=(Angle(F(1, 2)),))], 2)
    assert v.components == [1, 1]
    v = build_vector([seed(3, residual_order=2)], 5)
    assert v.components == [F(1, 15)] and v.h == 1
    both = build_vector([seed(3, residual_order=2), seed(1, rotations=(Angle(F(1, 2)),))], 2)
    assert both.components == [F(1, 6), 1, 1]
    assert [p[0] for p in both.provenance] == [0, 1, 1]


def test_build_vector_rejects():
    with pytest.raises(ValueError, match="non-positive"):
        build_vector([seed(0, residual_order=2)], 1)
    with pytest.raises(ValueError, match="not admissible"):
        build_vector([seed(1, rotations=(Angle(F(2, 3)),))], 2)


def test_tangent_space_examples():
    assert tangent_space([F(1, 3)]).dim == 0
    single = tangent_space([HALF_ROOT2])
    assert single.lattice == [] and single.dim == 1
    diag = tangent_space([HALF_ROOT2, HALF_ROOT2])
    assert diag.lattice == [[1, -1]] and diag.dim == 1
    with pytest.raises(TypeError):
        tangent_space([0.5])


def test_admissible_vertices():
    diag = [HALF_ROOT2, HALF_ROOT2]
    assert admissible_set_sample(diag, tangent_space(diag)) == [Vertex((0, 0)), Vertex((1, 1))]
    one = [HALF_ROOT2]
    assert admissible_set_sample(one, tangent_space(one)) == [Vertex((0,)), Vertex((1,))]
    assert admissible_set_sample([F(1, 3)], tangent_space([F(1, 3)])) == [Vertex((0,))]


def test_search_exact_returns():
    assert search_T([F(1, 3)], Vertex((0,)), 0.1, 1, 30) == [3, 6, 9, 12, 15, 18, 21, 24, 27, 30]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.fractions(min_value=F(1, 40), max_value=3, max_denominator=40), min_size=1,
                max_size=3), st.integers(1, 6))
def test_search_rational_returns_multiples(comps, modulus):
    den = lcm(*[c.denominator for c in comps])
    step = lcm(den, modulus)
    bound = 40 * step
    got = search_T(comps, Vertex((0,) * len(comps)), 1e-3, modulus, bound)
    assert got == list(range(step, bound + 1, step))


@pytest.mark.parametrize("bit", [0, 1])
def test_search_irrational_returns_verified_at_high_precision(bit):
    hits = search_T([HALF_ROOT2], Vertex((bit,)), 0.05, 1, 2000)
    assert hits
    with mpmath.workdps(40):
        for t in hits:
            frac = mpmath.frac(t * mpmath.sqrt(2) / 2)
            assert abs(frac - bit) < 0.05
    assert all(abs(float(fractional_part(t * HALF_ROOT2)) - bit) < 0.05 for t in hits)


def test_no_return_time_reports_near_miss():
    with pytest.raises(NoReturnTimeError) as err:
        search_T([HALF_ROOT2], Vertex((0,)), 1e-3, 1, 50)
    assert err.value.best_t is not None and err.value.best_distance > 1e-3


def test_rational_jump():
    cert, v = find_jump(rational_pair())
    assert cert.passed and cert.T <= 10 ** 6
    assert (cert.T, cert.m_ks, v.modulus) == (12, [18, 24], 6)


def test_rational_jump_by_direct_evaluation():
    seeds = rational_pair()
    cert, v = find_jump(seeds)
    T = cert.T
    for s, m in zip(seeds, cert.m_ks):
        assert nullity_iterate(s, 2 * m - 1) == nullity_iterate(s, 2 * m + 1) == s.nu1
        assert index_iterate(s, 2 * m + 1) == 2 * T + s.i1
        # no N1(1, b) blocks, so S+(1) = 0
        assert index_iterate(s, 2 * m - 1) + nullity_iterate(s, 2 * m - 1) == 2 * T - (s.i1 - s.nu1)
        assert 2 * T - 1 <= index_iterate(s, 2 * m) <= 2 * T + 1 - nullity_iterate(s, 2 * m)


def test_wrong_iterate_is_recorded():
    seeds = rational_pair()
    cert, v = find_jump(seeds)
    shifted = [cert.m_ks[0] + v.modulus, cert.m_ks[1]]
    bad = certify(seeds, v.modulus, cert.T, shifted, cert.vertex, cert.epsilon)
    assert not bad.passed
    assert (0, "index_after") in bad.failures() and (0, "m_formula") in bad.failures()
    assert all(k == 0 for k, _ in bad.failures())


def test_hyperbolic_seed_jump_is_exact():
    s = seed(3, residual_order=4)
    cert, v = find_jump([s])
    m = cert.m_ks[0]
    assert cert.passed and index_iterate(s, 2 * m) == 2 * cert.T


def test_irrational_jump():
    s = seed(1, rotations=(Angle(quad(-1, 1, 2)),))
    cert, v = find_jump([s])
    assert cert.passed
    assert cert.closeness[0] < 1e-2
    assert all(cert.checks[0][name] for name in ("index_before", "index_after"))


def test_certificate_json():
    cert, _ = find_jump(rational_pair())
    out = cert.to_json()
    assert out["passed"] and out["m"] == [18, 24] and set(out["checks"][0]) >= {"index_after"}


def test_minimal_modulus():
    assert minimal_modulus(rational_pair()) == 6
    assert minimal_modulus([seed(1, residual_order=2)]) == 1


def test_expected_iterates_formula():
    v = build_vector(rational_pair(), 6)
    # T / (M mean) = 12 / 4 and 12 / 3
    assert expected_iterates(v, 12, Vertex((0, 0, 0, 0))) == [18, 24]
    assert expected_iterates(v, 12, Vertex((1, 0, 0, 0))) == [24, 24]


def small_rational_seed(rng):
    """Seed with rotation denominators in {2, 3, 4, 6}, so exact returns come early."""
    while True:
        dens = rng.choices((2, 3, 4, 6), k=rng.randint(0, 2))
        angles = tuple(Angle(F(rng.randint(1, 2 * q - 1), q)) for q in dens)
        angles = tuple(a for a in angles if a.ratio != 1)
        counts = {k: rng.randint(0, 1)
                  for k in ("p_minus", "p_zero", "p_plus", "q_minus", "q_zero", "q_plus")}
        d = Decomposition(**counts, rotations=angles, residual_order=2 * rng.randint(0, 1))
        if d.order == 0:
            continue
        s = seed(natural_parity(d) + 2 * rng.randint(1, 4), **counts, rotations=angles,
                 residual_order=d.residual_order)
        if mean_index(s) > 0:
            return s


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_rational_jumps_always_certify(n):
    rng = random.Random(n)
    seeds = [small_rational_seed(rng) for _ in range(rng.randint(1, 3))]
    cert, _ = find_jump(seeds)
    assert cert.passed, cert.failures()

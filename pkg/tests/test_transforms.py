import json

import numpy
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from freemul.laws import LawSpec, moments_of
from freemul.series import HalfSeries, compose, invert_two_branch
from freemul.transforms import (
    CumulantSequence, MeanClass, MomentSequence, STransformPair,
    branch_moments, cumulant_series, cumulants_from_moments, mobius_down,
    moments_from_cumulants, moments_from_s, psi_from_moments, s_transform,
)

SEMI = (0, 1, 0, 2, 0, 5)
FP = (1, 2, 5, 14)

TEST_LAWS = [
    LawSpec.semicircle(1.0),
    LawSpec.semicircle(2.5),
    LawSpec.free_poisson(1.0),
    LawSpec.free_poisson(0.4),
    LawSpec.shifted_free_poisson(1.0, 1.0),
    LawSpec.shifted_free_poisson(2.0, 0.5),
    LawSpec.point_mass(1.0),
    LawSpec.point_mass(-2.0),
]


def law_id(law):
    return f'{law.kind}{tuple(law.params.values())}'


# ---------------
# moment sequences
# ---------------

def test_moment_sequence_basics():
    m = MomentSequence(SEMI)
    assert m.order == 6 and m.m(0) == 1.0 and m.m(4) == 2.0 and m.mean == 0
    with pytest.raises(ValueError):
        m.truncate(7)
    assert m.truncate(2).moments == (0.0, 1.0)


def test_moment_sequence_needs_one_entry():
    with pytest.raises(ValueError):
        MomentSequence([])


def test_hankel_positivity():
    assert MomentSequence(SEMI).is_positive()
    assert not MomentSequence([0, -1, 0, 1]).is_positive()


def test_sequences_json_round_trip():
    m = MomentSequence(FP)
    assert MomentSequence.from_dict(json.loads(json.dumps(m.to_dict()))) == m
    k = CumulantSequence((1, 1, 1))
    assert CumulantSequence.from_dict(json.loads(json.dumps(k.to_dict()))) == k


# --------------
# psi and moments
# --------------

def test_psi_semicircle_grades():
    psi = psi_from_moments(MomentSequence(SEMI))
    assert psi.terms() == {4: 1.0, 8: 2.0, 12: 5.0}
    assert psi.trunc_grade == 12


def test_psi_point_mass_and_zero():
    psi = psi_from_moments(MomentSequence([1.0] * 5))
    assert psi.terms() == {2 * n: 1.0 for n in range(1, 6)}
    assert psi_from_moments(MomentSequence([0.0] * 4)).is_zero


@pytest.mark.parametrize('moments, cumulants', [
    (SEMI, (0, 1, 0, 0, 0, 0)),
    (FP, (1, 1, 1, 1)),
    ((1, 1, 1, 1), (1, 0, 0, 0)),
])
def test_cumulant_examples(moments, cumulants):
    k = cumulants_from_moments(MomentSequence(moments))
    assert numpy.allclose(k.cumulants, cumulants, atol=1e-12)
    m = moments_from_cumulants(CumulantSequence(cumulants))
    assert numpy.allclose(m.moments, moments, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=12))
def test_cumulant_round_trip(values):
    k = CumulantSequence(values)
    back = cumulants_from_moments(moments_from_cumulants(k))
    m = moments_from_cumulants(k)
    scale = max(1.0, float(numpy.max(numpy.abs(m.moments))))
    assert numpy.allclose(back.cumulants, values, rtol=0, atol=1e-9 * scale)


# ------------
# S-transforms
# ------------

def test_s_semicircle_is_inverse_sqrt():
    s = s_transform(moments_of(LawSpec.semicircle(), 12))
    assert s.mean_class is MeanClass.ZERO_MEAN
    assert s.primary.terms() == {-1: 1.0}
    assert s.secondary.terms() == {-1: -1.0}


def test_s_free_poisson_is_geometric():
    s = s_transform(moments_of(LawSpec.free_poisson(), 12))
    assert s.mean_class is MeanClass.NONZERO_MEAN and s.secondary is None
    assert s.primary.is_integer_power()
    for n, c in enumerate(s.primary.powers(s.primary.trunc_grade // 2)):
        assert abs(c - (-1) ** n) < 1e-9


def test_s_shifted_free_poisson_against_symbolic_expansion():
    # expand (-z + sqrt(z^2 + 4z)) / (2z) in w = sqrt(z), independently
    w = sympy.symbols('w', positive=True)
    expr = -sympy.Rational(1, 2) + sympy.sqrt(w ** 2 + 4) / (2 * w)
    ser = sympy.series(expr, w, 0, 14).removeO()
    s = s_transform(moments_of(LawSpec.shifted_free_poisson(1, 1), 16))
    assert s.primary.min_grade == -1
    for k in range(-1, s.primary.trunc_grade + 1):
        exact = float(ser.coeff(w, k))
        assert abs(s.primary[k] - exact) < 1e-9, k


def test_s_degenerate_and_invalid():
    assert s_transform(MomentSequence([0, 0, 0])).mean_class \
        is MeanClass.DEGENERATE_ZERO
    with pytest.raises(ValueError, match='not a moment sequence'):
        s_transform(MomentSequence([0, -1, 0]))


@pytest.mark.parametrize('law', TEST_LAWS, ids=law_id)
def test_s_round_trip(law):
    m = moments_of(law, 12)
    back = moments_from_s(s_transform(m), 12)
    assert numpy.allclose(back.moments, m.moments, rtol=1e-9, atol=1e-9)


def _abs(s):
    return HalfSeries(s.min_grade, tuple(abs(c) for c in s.coeffs),
                      s.trunc_grade)


@pytest.mark.parametrize('law', TEST_LAWS, ids=law_id)
def test_cumulant_series_inverts_z_s(law):
    # C[z S(z)] = z on every branch; cancellation error is bounded by the
    # same composition taken over absolute values
    m = moments_of(law, 12)
    c = cumulant_series(cumulants_from_moments(m))
    for branch in s_transform(m).branches():
        zs = branch.shift(2)
        r = compose(c, zs)
        bound = compose(_abs(c), _abs(zs))
        lo, hi = 1, r.trunc_grade
        err = numpy.abs(r.dense(lo, hi) - HalfSeries.monomial(2, 1.0, hi)
                        .dense(lo, hi))
        assert numpy.all(err <= 1e-9 * numpy.maximum(1.0, bound.dense(lo, hi)))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 2.0), st.lists(st.floats(-1, 1), min_size=10,
                                     max_size=10))
def test_zero_mean_structure(m2, rest):
    m = MomentSequence([0.0, m2, *rest])
    s = s_transform(m)
    assert abs(s.primary[-1] - 1 / numpy.sqrt(m2)) < 1e-12
    assert abs(s.secondary[-1] + 1 / numpy.sqrt(m2)) < 1e-12
    for k in range(-1, s.primary.trunc_grade + 1):
        assert s.secondary[k] == (-1) ** k * s.primary[k]
    routes = branch_moments(s, m.order)
    assert numpy.allclose(routes[0], routes[1], rtol=1e-9, atol=1e-9)


def test_mobius_down_recovers_chi():
    m = moments_of(LawSpec.shifted_free_poisson(1, 1), 12)
    chi, chi_t = invert_two_branch(psi_from_moments(m))
    s = s_transform(m)
    assert mobius_down(s.primary).allclose(chi)
    assert mobius_down(s.secondary).allclose(chi_t)


@pytest.mark.parametrize('s, order, expected', [
    (HalfSeries.monomial(-1, 1.0, 30), 6, SEMI),
    (HalfSeries.from_powers([(-1) ** n for n in range(15)]), 4, FP),
])
def test_moments_from_closed_s(s, order, expected):
    if s.min_grade == -1:
        pair = STransformPair(MeanClass.ZERO_MEAN, s, s.flip_odd())
    else:
        pair = STransformPair(MeanClass.NONZERO_MEAN, s)
    assert numpy.allclose(moments_from_s(pair, order).moments, expected)


def test_moments_from_s_needs_enough_terms():
    s = s_transform(moments_of(LawSpec.free_poisson(), 6))
    with pytest.raises(ValueError, match='determines only'):
        moments_from_s(s, 10)


def test_branch_inconsistency_detected():
    s = s_transform(moments_of(LawSpec.semicircle(), 12))
    bad = HalfSeries(-1, (-1.0, 0.0, 0.0, 0.5), s.secondary.trunc_grade)
    broken = object.__new__(STransformPair)
    object.__setattr__(broken, 'mean_class', MeanClass.ZERO_MEAN)
    object.__setattr__(broken, 'primary', s.primary)
    object.__setattr__(broken, 'secondary', bad)
    with pytest.raises(ArithmeticError, match='branch inconsistency'):
        moments_from_s(broken, 6)


def test_pair_invariants():
    with pytest.raises(ValueError):
        STransformPair(MeanClass.NONZERO_MEAN, HalfSeries.monomial(-1, 1, 6))
    with pytest.raises(ValueError):
        STransformPair(MeanClass.ZERO_MEAN, HalfSeries.monomial(-1, 1, 6))
    with pytest.raises(ValueError, match='sign-flip'):
        STransformPair(MeanClass.ZERO_MEAN, HalfSeries.monomial(-1, 1, 6),
                       HalfSeries.monomial(-1, 1, 6))


def test_pair_product_rules():
    semi = s_transform(moments_of(LawSpec.semicircle(), 8))
    fp = s_transform(moments_of(LawSpec.free_poisson(), 8))
    prod = semi * fp
    assert prod.mean_class is MeanClass.ZERO_MEAN
    assert (fp * semi).primary.allclose(prod.primary)
    with pytest.raises(ValueError, match='both factors'):
        semi * semi


def test_pair_json_round_trip():
    s = s_transform(moments_of(LawSpec.semicircle(), 8))
    d = json.loads(json.dumps(s.to_dict()))
    assert STransformPair.from_dict(d) == s

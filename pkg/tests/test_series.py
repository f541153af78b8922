import json

import numpy
import pytest
from hypothesis import given, settings, strategies as st

from freemul.series import (
    HalfSeries, add, close, compose, geometric, invert_two_branch,
    invert_unique, mul, reciprocal, solve_outer_composition,
)

H = HalfSeries
# bounded test coefficients keep the inverses well conditioned
coef = st.floats(-1.0, 1.0, allow_nan=False).map(lambda v: round(v, 3))


def identity(trunc):
    return H.monomial(2, 1.0, trunc)


# ---------
# structure
# ---------

def test_leading_zeros_stripped_and_window_kept():
    s = H(0, (0.0, 1e-14, 3.0, 4.0), 5)
    assert s.min_grade == 2
    assert s.coeffs == (3.0, 4.0, 0.0, 0.0)
    assert s.trunc_grade == 5
    assert len(s.coeffs) == s.trunc_grade - s.min_grade + 1


def test_zero_series_representation():
    z = H.zero(6)
    assert z.is_zero and z.coeffs == () and z.min_grade == 7


def test_coeff_beyond_window_raises():
    with pytest.raises(IndexError):
        H.monomial(2, 1.0, 4).coeff(5)


def test_is_integer_power():
    assert H.from_powers([1, 2, 3]).is_integer_power()
    assert not H.monomial(1, 1.0, 4).is_integer_power()


def test_json_round_trip():
    s = H(-1, (1.0, 0.5, -0.25), 4)
    d = json.loads(json.dumps(s.to_dict()))
    assert set(d) == {'min_grade', 'coeffs', 'trunc_grade'}
    assert H.from_dict(d) == s


# ---
# add
# ---

def test_add_identity():
    z = identity(10)
    assert add(z, H.zero(10)) == z


def test_add_inverse():
    r = add(H.monomial(1, 1.0, 9), H.monomial(1, -1.0, 9))
    assert r.is_zero


def test_add_disjoint_supports():
    r = add(H.monomial(-1, 1.0, 9), H.monomial(1, 1.0, 9))
    assert r.terms() == {-1: 1.0, 1: 1.0}


def test_add_takes_shorter_window():
    assert add(H.monomial(0, 1.0, 4), H.monomial(0, 1.0, 9)).trunc_grade == 4


# ---
# mul
# ---

def test_mul_inverse_sqrt_squared_is_inverse_z():
    r = mul(H.monomial(-1, 1.0, 9), H.monomial(-1, 1.0, 9))
    assert r.min_grade == -2 and r.terms() == {-2: 1.0}


def test_mul_unit():
    assert mul(H.monomial(1, 1.0, 9), H.monomial(0, 1.0, 9)).terms() == {1: 1.0}


def test_mul_gives_product_transform():
    # 1/sqrt(z) * 1/(1+z) = z^(-1/2) - z^(1/2) + z^(3/2) - ...
    r = mul(H.monomial(-1, 1.0, 20), geometric(-1.0, 20))
    for k in range(-1, r.trunc_grade + 1):
        expected = (-1) ** ((k + 1) // 2) if k % 2 else 0.0
        assert r[k] == expected


def test_mul_window_rule():
    a = H.monomial(-1, 1.0, 5)
    b = H.from_powers([1, 1, 1, 1, 1, 1])    # trusted to grade 10
    assert mul(a, b).trunc_grade == min(5 + 0, 10 - 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(coef, min_size=3, max_size=6),
       st.lists(coef, min_size=3, max_size=6),
       st.lists(coef, min_size=3, max_size=6))
def test_mul_commutative_associative(a, b, c):
    A, B, C = H(-1, a, 8), H(0, b, 9), H(1, c, 7)
    assert mul(A, B).allclose(mul(B, A))
    assert mul(mul(A, B), C).allclose(mul(A, mul(B, C)))


# ----------
# reciprocal
# ----------

def test_reciprocal_geometric():
    r = reciprocal(H.from_powers([1, 1], 10))
    assert r.allclose(geometric(-1.0, 10))
    assert r.trunc_grade == 10


def test_reciprocal_monomials():
    assert reciprocal(H.monomial(1, 1.0, 9)).terms() == {-1: 1.0}
    r = reciprocal(H.monomial(4, 2.0, 10))
    assert r.min_grade == -4 and r.terms() == {-4: 0.5}


def test_reciprocal_of_zero_raises():
    with pytest.raises(ZeroDivisionError, match='non-invertible'):
        reciprocal(H.zero(4))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 2.0), st.lists(coef, min_size=1, max_size=8),
       st.integers(-2, 2))
def test_reciprocal_involution(lead, rest, g0):
    a = H(g0, (lead, *rest), g0 + len(rest) + 2)
    back = reciprocal(reciprocal(a))
    assert back.allclose(a)
    assert mul(a, reciprocal(a)).allclose(H.monomial(0, 1.0, 50))


# -------
# compose
# -------

def test_compose_monomials():
    r = compose(H.monomial(4, 1.0, 12), H.monomial(1, 1.0, 12))
    assert r.terms() == {2: 1.0}


def test_compose_sign_cancels_at_even_power():
    outer = H.from_powers([0, 0, 1], 12)
    assert compose(outer, H.monomial(1, -1.0, 12)).terms() == {2: 1.0}


def test_compose_identity_inner():
    outer = H.from_powers([0, 1, 1], 12)
    assert compose(outer, identity(12)).terms() == {2: 1.0, 4: 1.0}


def test_compose_rejects_constant_inner():
    with pytest.raises(ValueError, match='divergent composition'):
        compose(H.from_powers([0, 1]), H.from_powers([1, 1]))


def test_compose_rejects_half_integer_outer():
    with pytest.raises(ValueError):
        compose(H.monomial(1, 1.0, 6), identity(6))


def test_compose_window_from_outer():
    # outer known to z^3; the unknown z^4 term starts at grade 4 * 1
    outer = H.from_powers([0, 0, 1, 1])
    inner = H.monomial(1, 1.0, 40)
    assert compose(outer, inner).trunc_grade == 3


# -----------------
# invert_unique
# -----------------

def test_invert_unique_moebius_pair():
    f = geometric(1.0, 16, start=1)               # z/(1-z)
    g = invert_unique(f)
    assert g.allclose(geometric(-1.0, 16, start=1))  # z/(1+z)


def test_invert_unique_identity():
    assert invert_unique(identity(10)).terms() == {2: 1.0}


def test_invert_unique_rejects_missing_linear_term():
    with pytest.raises(ValueError, match='invert_two_branch'):
        invert_unique(H.from_powers([0, 0, 1, 2]))


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 2.0).map(lambda v: round(v, 3)),
       st.lists(coef, min_size=2, max_size=8))
def test_invert_unique_two_sided(a1, rest):
    f = H.from_powers([0.0, a1, *rest])
    g = invert_unique(f)
    assert g.is_integer_power()
    z = identity(40)
    assert compose(f, g).allclose(z)
    assert compose(g, f).allclose(z)


# -----------------
# invert_two_branch
# -----------------

def test_two_branch_pure_square():
    chi, chi_t = invert_two_branch(H.from_powers([0, 0, 1], 12))
    assert chi.terms() == {1: 1.0}
    assert chi_t.terms() == {1: -1.0}


def test_two_branch_scaled_square():
    chi, chi_t = invert_two_branch(H.from_powers([0, 0, 4], 12))
    assert chi.terms() == {1: 0.5}
    assert chi_t.terms() == {1: -0.5}


def test_two_branch_semicircle():
    # psi of the unit semicircle: Catalan numbers at even powers
    psi = H.from_powers([0, 0, 1, 0, 2, 0, 5, 0, 14, 0, 42, 0, 132])
    chi, chi_t = invert_two_branch(psi)
    # sqrt(z)/(1+z)
    expected = mul(H.monomial(1, 1.0, 30), geometric(-1.0, 30))
    assert chi.allclose(expected)
    assert chi.trunc_grade == 11
    assert compose(psi, chi).allclose(identity(12))
    assert compose(psi, chi_t).allclose(identity(12))


def test_two_branch_errors():
    with pytest.raises(ValueError, match='second moment vanishes'):
        invert_two_branch(H.from_powers([0, 0, 0, 1]))
    with pytest.raises(ValueError, match='positive-definite'):
        invert_two_branch(H.from_powers([0, 0, -1, 1]))


@settings(max_examples=60, deadline=None)
@given(st.floats(1.0, 3.0).map(lambda v: round(v, 3)),
       st.lists(coef, min_size=1, max_size=9))
def test_two_branch_properties(a2, rest):
    f = H.from_powers([0.0, 0.0, a2, *rest])
    chi, chi_t = invert_two_branch(f)
    z = identity(60)
    assert compose(f, chi).allclose(z)
    assert compose(f, chi_t).allclose(z)
    assert chi[1] > 0
    for k in range(1, chi.trunc_grade + 1):
        assert chi_t[k] == (-1) ** k * chi[k]
    # both branches lead back to the same integer-power series
    psi = solve_outer_composition(chi, f.trunc_grade)
    psi_t = solve_outer_composition(chi_t, f.trunc_grade)
    assert psi.allclose(psi_t)
    assert psi.allclose(f)


# -----------------------
# solve_outer_composition
# -----------------------

def test_outer_of_sqrt():
    assert solve_outer_composition(H.monomial(1, 1.0, 10), 8).terms() == {4: 1.0}
    assert solve_outer_composition(H.monomial(1, -1.0, 10), 8).terms() == {4: 1.0}


def test_outer_semicircle_times_free_poisson():
    inner = mul(H.monomial(1, 1.0, 30),
                mul(geometric(-1.0, 30), geometric(-1.0, 30)))
    psi = solve_outer_composition(inner, 12)
    assert numpy.allclose(psi.powers(6), [0, 0, 1, 0, 4, 0, 22])


def test_outer_rejects_wrong_leading_grade():
    with pytest.raises(ValueError, match='unsupported leading grade'):
        solve_outer_composition(identity(10), 8)


def test_close_is_relative_for_large_values():
    assert close(1e6, 1e6 + 1e-4)
    assert not close(1.0, 1.0 + 1e-8)

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from vertexreg.errors import ArgumentError
from vertexreg.hermite import (
    SpectralConfig, Surd, adjoint_operator_apply, biorthonormality_gram, dual_divergence,
    eigenvalue, hermite_polynomial, is_identity, shift_property_check, solenoidal_basis,
)
from vertexreg.polyalg import Poly, VecPoly, divergence, multi_indices_upto

from conftest import poly, vec

M1, M2 = SpectralConfig(m=1), SpectralConfig(m=2)

HP1 = [vec("0", "-y3", "y2"), vec("y3", "0", "-y1"), vec("-y2", "y1", "0")]
HP2 = [
    vec("4 - y2**2 - y3**2", "y1*y2", "-y1*y3"),
    vec("y1*y2", "4 - y1**2 - y3**2", "-y2*y3"),
    vec("y1*y3", "-y2*y3", "4 - y1**2 - y2**2"),
    vec("0", "y1*y3", "-y1*y2"),
    vec("-y2*y3", "0", "y1*y2"),
    vec("-y2*y3", "y2*y3", "y1**2 - y2**2"),
    vec("y1*y2", "y3**2 - y1**2", "-y2*y3"),
    vec("y2**2 - y3**2", "-y1*y2", "y1*y3"),
]
BURNETT = {
    1: [vec("y2", "-y3", "y2"), vec("y3", "y3", "-y1"), vec("-y2", "y1", "y1")],
    2: [vec("-y1**2 - y3**2", "y1*y2", "y1*y3"), vec("y1*y2", "-y2**2 - y3**2", "y2*y3")],
    3: [vec("y2**3", "y3**3", "y1**3"), vec("y1*y2**2", "y2*y1**2", "-y3*(y1**2 + y2**2)")],
    4: [vec("y2**4 + 24", "y3**4 + 24", "y1**4 + 24"),
        vec("y1*y2**3", "y2*y1**3", "-y3*(y1**3 + y2**3)")],
}


def test_eigenvalue_examples():
    assert eigenvalue((1, 1, 0), M1) == -1
    assert eigenvalue((0, 0, 0), M1) == 0
    assert eigenvalue((1, 1, 1), M2) == Fraction(-3, 4)


def test_hermite_polynomial_examples():
    e = hermite_polynomial((4, 0, 0), M2)
    assert e.adjoint_eigenfunction == poly("y1**4 + 24")
    assert e.normalization * e.normalization == Fraction(1, 24)
    assert hermite_polynomial((0, 0, 0), M1).adjoint_eigenfunction == Poly.const(1)
    assert hermite_polynomial((2, 0, 0), M1).adjoint_eigenfunction == poly("y1**2 - 2")


def test_adjoint_apply_examples():
    assert adjoint_operator_apply(vec("1", "1", "1"), M2).is_zero()
    v = HP1[2]
    assert adjoint_operator_apply(v, M1) == v * Fraction(-1, 2)
    psi = poly("y1**4 + 24")
    assert adjoint_operator_apply(psi, M2) == psi * -1


def test_adjoint_apply_dimension_mismatch():
    with pytest.raises(ArgumentError):
        adjoint_operator_apply(Poly({(1, 0): 1}, 2), M1)


@pytest.mark.parametrize("cfg", [M1, M2])
def test_eigenrelations_to_order_6(cfg):
    for beta in multi_indices_upto(6, 3):
        p = hermite_polynomial(beta, cfg).adjoint_eigenfunction
        assert adjoint_operator_apply(p, cfg) == p * eigenvalue(beta, cfg)


def test_solenoidal_dimensions_m1():
    assert [len(solenoidal_basis(k, M1)) for k in range(5)] == [1, 3, 8, 15, 24]


def test_solenoidal_dimensions_m2_reported():
    # not claimed for the generalized case; frozen from the exact computation
    assert [len(solenoidal_basis(k, M2)) for k in range(4)] == [1, 3, 8, 15]


def test_polynomial_divergence_condition_dimensions():
    dims = [len(solenoidal_basis(k, M1, "polynomial")) for k in range(5)]
    assert dims == [3, 8, 15, 24, 35]


def test_level0_and_level1_spans():
    b0 = solenoidal_basis(0, M1)
    assert b0.contains(vec("1", "1", "1"))
    b1 = solenoidal_basis(1, M1)
    assert all(b1.contains(v) for v in HP1)
    assert len(b1) == 3


def test_listed_level2_fields_membership():
    dual = solenoidal_basis(2, M1)
    polyn = solenoidal_basis(2, M1, "polynomial")
    assert [dual.contains(v) for v in HP2] == [False, False, False, True, True, False, True, True]
    assert [polyn.contains(v) for v in HP2] == [True, True, True, True, True, False, True, True]
    # the one listed field outside both spans is not divergence-free
    assert divergence(HP2[5]) == poly("y3")


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_burnett_listed_fields(k):
    basis = solenoidal_basis(k, M2, "polynomial")
    lam = Fraction(-k, 4)
    for v in BURNETT[k]:
        assert divergence(v).is_zero()
        assert adjoint_operator_apply(v, M2) == v * lam
        assert basis.contains(v)


def test_burnett_listed_fields_against_dual_condition():
    # all the level-1 Burnett examples fail the dual condition (reported, not corrected)
    b = solenoidal_basis(1, M2)
    assert [b.contains(v) for v in BURNETT[1]] == [False, False, False]


@pytest.mark.parametrize("cfg", [M1, M2])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_basis_fields_are_eigen_and_solenoidal(cfg, k):
    for cond in ("dual", "polynomial"):
        b = solenoidal_basis(k, cfg, cond)
        for v in b.fields:
            assert adjoint_operator_apply(v, cfg) == v * b.eigenvalue
            assert b.is_solenoidal(v)
        if cond == "polynomial":
            assert all(divergence(v).is_zero() for v in b.fields)
        else:
            assert all(all(c == 0 for c in dual_divergence(v, k, cfg)) for v in b.fields)


def test_gram_examples():
    g0 = biorthonormality_gram(0, M2)
    assert g0 == [[Surd(Fraction(1))]]
    idx = multi_indices_upto(4, 3)
    g = biorthonormality_gram(4, M2)
    i4, i0 = idx.index((4, 0, 0)), idx.index((0, 0, 0))
    assert g[i4][i4] == 1
    assert g[i0][i4] == 0


@pytest.mark.parametrize("cfg", [M1, M2])
def test_gram_identity_kmax3(cfg):
    assert is_identity(biorthonormality_gram(3, cfg))


def test_gram_limit():
    with pytest.raises(ArgumentError):
        biorthonormality_gram(7, M1)


@pytest.mark.parametrize("k,cfg", [(1, M1), (2, M1), (4, M2), (3, M1)])
def test_shift_property(k, cfg):
    assert shift_property_check(k, cfg)


def test_config_validation():
    with pytest.raises(ArgumentError):
        SpectralConfig(m=3)
    with pytest.raises(ArgumentError):
        SpectralConfig(m=2, weight_param=Fraction(1, 2))  # 2 d0 ≈ 0.4725
    assert SpectralConfig(m=2, weight_param=Fraction(2, 5)).weight_param == Fraction(2, 5)


@given(st.fractions(min_value=0, max_value=1000, max_denominator=50))
def test_surd_square(q):
    s = Surd.sqrt(q)
    assert s * s == q
    assert abs(float(s) ** 2 - float(q)) <= 1e-9 * max(1.0, float(q))


def test_basis_json():
    d = solenoidal_basis(2, M1).to_json()
    assert d["dimension"] == 8 and d["eigenvalue"] == "-1/1"
    back = [VecPoly.from_strings(f) for f in d["fields"]]
    assert all(solenoidal_basis(2, M1).contains(v) for v in back)

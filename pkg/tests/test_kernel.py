import math

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from vertexreg.errors import ArgumentError, NumericError
from vertexreg.kernel import (
    ball_mass, critical_constant_exact, gaussian_profile, kernel_eval, kernel_table, ode_residual,
    wkbj_constants, wkbj_constants_exact, wkbj_fit,
)
from vertexreg.polyalg import kernel_moment


def _mp_kernel(r, m=2):
    # radial Fourier inversion in three dimensions, evaluated independently
    mp.mp.dps = 30
    if r == 0:
        return float(mp.gamma(mp.mpf(3) / (2 * m)) / (2 * m) / (2 * mp.pi**2))
    f = lambda x: x * mp.sin(r * x) * mp.exp(-x ** (2 * m))
    pts = [0] + [k * mp.pi / r for k in range(1, int(7 * r / mp.pi) + 1)] + [7]
    return float(mp.quad(f, pts) / (2 * mp.pi**2 * r))


def test_wkbj_constants_m2():
    w = wkbj_constants(2)
    assert w.alpha == sp.Rational(4, 3)
    assert abs(w.d0 - 3 * 2 ** (-11 / 3)) < 1e-12
    assert abs(w.b0 - 3**1.5 * 2 ** (-11 / 3)) < 1e-12
    assert w.delta0 == sp.Rational(7, 3)
    assert abs(w.modulus - 3 * 2 ** (-8 / 3)) < 1e-12


def test_wkbj_constants_m1():
    w = wkbj_constants(1, 5)
    assert w.alpha == 2 and w.d0 == 0.25 and w.b0 == 0.0


@pytest.mark.parametrize("m", [1, 2])
def test_characteristic_equation(m):
    w = wkbj_constants(m)
    assert abs(w.characteristic_defect()) < 1e-12
    assert 1 < w.alpha <= 2 and (w.alpha == 2) == (m == 1)
    assert w.a_complex.real < 0


def test_modulus_angle_identity():
    for m in (1, 2):
        w = wkbj_constants(m)
        mod = (2 * m - 1) * (2 * m) ** (-float(w.alpha))
        ang = math.pi / (2 * (2 * m - 1))
        assert abs(w.d0 - mod * math.sin(ang)) < 1e-15
        assert abs(w.b0 - mod * math.cos(ang)) < 1e-15


def test_exact_constants_and_critical_identity():
    e = wkbj_constants_exact(2)
    assert sp.simplify(e["d0"] - 3 * 2 ** sp.Rational(-11, 3)) == 0
    assert sp.simplify(e["b0"] - 3 ** sp.Rational(3, 2) * 2 ** sp.Rational(-11, 3)) == 0
    c = critical_constant_exact(2, 3)
    assert sp.simplify(c - 2 ** sp.Rational(11, 4) * 3 ** sp.Rational(-3, 4)) == 0
    assert abs(float(c) - 2.951151) < 1e-6


def test_kernel_at_origin():
    exact = math.gamma(0.75) / (8 * math.pi**2)
    assert abs(kernel_eval(0.0, 2) - exact) < 1e-15
    assert abs(kernel_eval(0.0, 1) - (4 * math.pi) ** -1.5) < 1e-15


def test_kernel_m1_at_two():
    # the Gaussian (4π)^{-3/2} e^{-|y|²/4} at r=2 is e^{-1}(4π)^{-3/2} = 0.0082583
    val = kernel_eval(2.0, 1)
    assert abs(val - (4 * math.pi) ** -1.5 * math.exp(-1)) < 1e-14
    assert abs(val - 0.0082583) < 1e-7


@pytest.mark.parametrize("r", [0.5, 1.7, 3.0, 4.4, 6.2, 8.0, 9.5])
def test_kernel_m2_against_mpmath(r):
    assert abs(kernel_eval(r, 2) - _mp_kernel(r)) < 1e-13


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 9.0))
def test_kernel_m1_is_gaussian(r):
    assert abs(kernel_eval(r, 1) - gaussian_profile(r)) < 1e-13


def test_m2_kernel_oscillates(table_m2):
    assert np.any(table_m2.values < 0)
    assert np.count_nonzero(np.diff(np.sign(table_m2.values))) >= 2


def test_panel_budget_error():
    with pytest.raises(NumericError) as ei:
        kernel_eval(9.0, 2, tol=1e-30, max_panels=5)
    assert "estimate" in ei.value.payload


def test_normalization_m1():
    t = kernel_table(12.0, 601, m=1)
    assert t.normalization_residual < 1e-8


def test_normalization_m2_truncation():
    # truncation at rmax=12 leaves 1.4e-3; the independent ball-mass route agrees
    t = kernel_table(12.0, 1201, m=2)
    assert abs(t.normalization_residual - abs(ball_mass(12.0, 2) - 1)) < 1e-6
    assert 1e-3 < t.normalization_residual < 2e-3
    t30 = kernel_table(30.0, 3001, m=2)
    assert t30.normalization_residual < 1e-5


def test_moments_vs_series():
    t = kernel_table(30.0, 3001, m=2)
    # radial second moment of F_2 vanishes: ∫|y|²F = 3 kernel_moment((2,0,0)) = 0
    assert 3 * kernel_moment((2, 0, 0), 2) == 0
    assert abs(t.moment(1)) < 1e-4


def test_fit_recovers_constants(table_m2):
    w = wkbj_constants(2)
    fit = wkbj_fit(table_m2, rmin=3.0)
    assert abs(fit.d0_hat / w.d0 - 1) < 0.02
    assert abs(fit.b0_hat / w.b0 - 1) < 0.02
    assert fit.delta == 1.0  # saddle-point prefactor exponent for N=3


def test_fit_envelope_bounds_tail(table_m2):
    fit = wkbj_fit(table_m2, rmin=3.0)
    r, f = table_m2.radii, table_m2.values
    sel = r >= 3
    assert fit.d0_hat > 0
    assert np.all(np.abs(f[sel]) <= 1.2 * fit.envelope(r[sel]))


def test_fit_rejects_gaussian():
    with pytest.raises(NumericError):
        wkbj_fit(kernel_table(10.0, 201, m=1), rmin=3.0)


def test_fit_imposed_delta_variant(table_m2):
    # imposing the listed δ0 = 7/3 as prefactor exponent degrades the fit badly
    fit = wkbj_fit(table_m2, rmin=3.0, delta=7 / 3)
    assert abs(fit.d0_hat / wkbj_constants(2).d0 - 1) > 0.1


def test_ode_residual_m1():
    t = kernel_table(8.0, 801, m=1)
    res, order = ode_residual(t)
    assert res < 1e-6


def test_ode_residual_m2(table_m2):
    t = kernel_table(6.0, 601, m=2)
    res, order = ode_residual(t, rmin=0.5, rmax=6.0)
    assert res < 1e-3
    assert 1.8 < order < 2.2


def test_ode_residual_needs_fine_grid():
    with pytest.raises(ArgumentError):
        ode_residual(kernel_table(10.0, 41, m=1))


def test_threaded_table_identical(monkeypatch):
    serial = kernel_table(5.0, 21, m=2).values
    monkeypatch.setenv("VERTEXREG_THREADS", "4")
    assert np.array_equal(kernel_table(5.0, 21, m=2).values, serial)

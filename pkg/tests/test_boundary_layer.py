import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from vertexreg.boundary_layer import (
    characteristic_root, discrete_steady_state, evolve, heat_halfline_reference, initial_state,
    lyapunov, run, stability_bound, stationary_profile, weighted_l2,
)
from vertexreg.errors import ArgumentError, NumericError


def test_profile_m1_examples():
    g = stationary_profile(1)
    assert g(0.0) == 0.0
    assert abs(g(2 * math.log(4)) - 0.75) < 1e-15
    assert np.max(np.abs(g.residual(np.linspace(0, 30, 301)))) < 1e-15


def test_profile_m2_boundary_values():
    g = stationary_profile(2)
    assert abs(g(0.0)) < 1e-15
    assert abs(g.derivative(0.0, 1)) < 1e-15
    assert abs(g(120.0) - 1) < 1e-12


@pytest.mark.parametrize("m", [1, 2])
def test_profile_residual_pointwise(m):
    eta = np.linspace(0, 40, 2001)
    assert np.max(np.abs(stationary_profile(m).residual(eta))) < 1e-10


def test_profile_symbolic_residuals():
    eta, g1 = stationary_profile(1).sympy_expr()
    assert sp.simplify(sp.diff(g1, eta, 2) + sp.diff(g1, eta) / 2) == 0
    eta, g2 = stationary_profile(2).sympy_expr()
    assert sp.simplify(-sp.diff(g2, eta, 4) + sp.diff(g2, eta) / 4) == 0
    assert sp.simplify(g2.subs(eta, 0)) == 0
    assert sp.simplify(sp.diff(g2, eta).subs(eta, 0)) == 0


def test_characteristic_root():
    re, im = characteristic_root(2)
    assert sp.simplify(re + 2 ** sp.Rational(-5, 3)) == 0
    assert sp.simplify(im - sp.sqrt(3) * 2 ** sp.Rational(-5, 3)) == 0
    lam = re + sp.I * im
    assert sp.simplify(sp.expand(lam**3) - sp.Rational(1, 4)) == 0
    g = stationary_profile(2)
    assert abs(g.rate - float(-re)) < 1e-15 and abs(g.frequency - float(im)) < 1e-15
    assert characteristic_root(1) == (sp.Rational(-1, 2), 0)


def test_m1_exact_reference_distance_at_20():
    # exact half-line solution from step data: sup distance to g0 at s=20 is
    # about 1.0e-2, and first drops below 1e-3 near s = 44
    eta = np.linspace(0, 20, 2001)
    g = stationary_profile(1)(eta)
    d20 = np.max(np.abs(heat_halfline_reference(eta, 20.0) - g))
    assert 0.0095 < d20 < 0.0106
    d40 = np.max(np.abs(heat_halfline_reference(eta, 40.0) - g))
    d48 = np.max(np.abs(heat_halfline_reference(eta, 48.0) - g))
    assert d40 > 1e-3 > d48


def test_m1_numerics_match_exact():
    r = run(1, 5.0, 0.01, h=0.02, data="step")
    st_ = r.state
    sel = st_.grid <= 20
    ref = heat_halfline_reference(st_.grid[sel], st_.s)
    assert np.max(np.abs(st_.values[sel] - ref)) < 1e-3


def test_m1_step_run_monotone_lyapunov():
    r = run(1, 20.0, 0.01, h=0.02, data="step", window=20.0)
    assert r.lyapunov_monotone
    assert np.all(np.diff(r.lyapunov) < 0)
    assert abs(r.sup_err[-1] - 0.0100736) < 1e-5


def test_m1_fixed_point():
    st0 = initial_state(1, "profile", h=0.02)
    out = evolve(st0, 0.05, 200)
    assert np.max(np.abs(out.values - st0.values)) < 1e-6


def test_m2_converges_with_overshoot():
    r = run(2, 200.0, 0.05, h=0.05, data="smooth")
    assert r.sup_err[-1] < 1e-2
    assert r.lyapunov_monotone
    assert r.state.overshoot > 0.1


@pytest.mark.parametrize("scheme", ["crank-nicolson", "explicit"])
def test_other_schemes_monotone(scheme):
    h = 0.1
    st0 = initial_state(1, "step", L=40.0, h=h)
    ds = 0.9 * stability_bound(1, st0.grid) if scheme == "explicit" else 0.02
    vals = [lyapunov(st0)]
    evolve(st0, ds, 200, scheme, callback=lambda s: vals.append(lyapunov(s)))
    assert np.all(np.diff(vals) <= 0)


def test_explicit_step_above_bound_rejected():
    st0 = initial_state(2, "smooth", h=0.1)
    with pytest.raises(NumericError):
        evolve(st0, 10 * stability_bound(2, st0.grid), 1, "explicit")


def test_lyapunov_zero_at_steady_state():
    st0 = initial_state(1, "step", h=0.05)
    steady = discrete_steady_state(st0)
    from dataclasses import replace

    assert lyapunov(replace(st0, values=steady)) == 0.0


def test_weighted_norm_nonincreasing_m1():
    st0 = initial_state(1, "step", h=0.05)
    vals = [weighted_l2(st0)]
    evolve(st0, 0.05, 200, callback=lambda s: vals.append(weighted_l2(s)))
    assert np.all(np.diff(vals) <= 1e-15)


def test_grid_refinement_order():
    # three nested grids, common nodes; successive differences shrink by ~4
    s, ds = 1.0, 5e-4
    sols = [run(1, s, ds, h=h, data="smooth", L=40.0, scheme="crank-nicolson").state
            for h in (0.2, 0.1, 0.05)]
    coarse = sols[0].values
    mid = sols[1].values[::2]
    fine = sols[2].values[::4]
    ratio = np.max(np.abs(coarse - mid)) / np.max(np.abs(mid - fine))
    assert ratio > 3.5


def test_state_validation():
    with pytest.raises(ArgumentError):
        initial_state(3)
    with pytest.raises(ArgumentError):
        initial_state(1, "bogus")
    with pytest.raises(ArgumentError):
        evolve(initial_state(1, h=0.1), 0.1, 1, "rk4")


@settings(max_examples=8, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.3, 2.0), st.sampled_from([1, 2]))
def test_lyapunov_monotone_for_smooth_families(width, height, m):
    data = lambda eta: 1 - height * np.exp(-(eta / width) ** 2)
    st0 = initial_state(m, data, L=30.0, h=0.1)
    vals = [lyapunov(st0)]
    evolve(st0, 0.05, 60, callback=lambda s: vals.append(lyapunov(s)))
    assert np.all(np.diff(vals) <= 1e-14 * max(vals[0], 1))

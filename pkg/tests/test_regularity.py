import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from vertexreg.errors import ArgumentError
from vertexreg.kernel import critical_constant_exact, wkbj_constants
from vertexreg.regularity import (
    GAMMA1_RADIAL, Constant, DynSysParams, PowLog, SqrtLog, Tabulated, Trajectory, Verdict,
    analytic_divergence, classify, convection_j1, convection_negligibility, criterion_integrand,
    decay_tail_membership, growth_fit, integrate_system, linear_flux_closed_form,
    linear_flux_coefficient, slow_growth_check, stokes_solution, time_change,
)

CSTAR = float(critical_constant_exact(2, 3))


def test_slow_growth_examples():
    assert slow_growth_check(SqrtLog(2))["all_satisfied"]
    rep = slow_growth_check(Constant(3))
    assert not rep["all_satisfied"] and rep["tends_to_infinity"] != "satisfied"
    assert slow_growth_check(PowLog(2.0, 0.75))["all_satisfied"]


def test_criterion_integrand_m1():
    tau = np.array([10.0, 1e3, 1e6])
    got = criterion_integrand(SqrtLog(2), tau, 1)
    assert np.allclose(got, 8 * np.log(tau) ** 1.5 / tau, rtol=1e-13)
    c = 2.5
    got = criterion_integrand(SqrtLog(c), tau, 1)
    assert np.allclose(got, c**3 * np.log(tau) ** 1.5 * tau ** (-c * c / 4), rtol=1e-13)


def test_criterion_integrand_m2_envelope():
    w = wkbj_constants(2)
    C, tau = 2.0, np.array([50.0, 5e4])
    got = np.abs(criterion_integrand(PowLog(C, 0.75), tau, 2, w, C1=1.0, C2=0.0))
    env = tau ** (-w.d0 * C ** (4 / 3)) * np.log(tau) ** (0.75 * (3 + 1 / 3 - 7 / 3)) * C ** (3 + 1 / 3 - 7 / 3)
    assert np.all(got <= env * (1 + 1e-12))


def test_time_change_closed_form():
    tau = np.array([math.e, 10.0, 1e4, 1e7])
    exact = 3.2 * (np.log(tau) ** 2.5 - 1)
    assert np.allclose(time_change(SqrtLog(2), tau, 1), exact, rtol=1e-10, atol=1e-12)


def test_time_change_increasing_and_finite_limit():
    tau = np.geomspace(math.e, 1e8, 50)
    s = time_change(SqrtLog(3), tau, 1)
    assert np.all(np.diff(s) > 0)
    s_inf = float(time_change(SqrtLog(3), np.array([np.inf]), 1)[0])
    assert math.isfinite(s_inf) and s_inf >= s[-1]


def test_stokes_solution():
    c = np.array([0.3, -0.2, 0.5])
    assert np.array_equal(stokes_solution(c, 0.0), c)
    g = 0.7
    assert np.allclose(stokes_solution(c, math.log(2) / g, g), c / 2, rtol=1e-15)


def test_linear_flux_two_routes():
    assert abs(GAMMA1_RADIAL - 0.141047) < 1e-6
    for phi in (1.5, 3.0, 5.0):
        a, b = linear_flux_coefficient(phi), linear_flux_closed_form(phi)
        assert a < 0 and abs(a - b) < 1e-12 * abs(b)
    phi = 2.0
    ratio = linear_flux_closed_form(2 * phi) / linear_flux_closed_form(phi)
    assert abs(ratio - 8 * math.exp(-3 * phi**2 / 4)) < 1e-14


def test_convection_j1_properties():
    assert convection_j1(3.0, np.zeros(3), 5.0) == 0.0
    c = np.array([0.2, 0.1, 0.3])
    r = convection_j1(4.0, c, 7.0) / convection_j1(4.0, c, 5.0)
    assert abs(r - math.exp(-1)) < 1e-14


def test_convection_j1_envelope():
    c = np.array([0.4, -0.1, 0.2])
    phis = np.linspace(3, 12, 19)
    vals = [abs(convection_j1(p, c, 0.0)) for p in phis]
    env = [abs(c.sum()) * np.linalg.norm(c) * p**4 * math.exp(-p * p / 4) for p in phis]
    gam = max(v / e for v, e in zip(vals, env))
    assert all(v <= gam * e * (1 + 1e-12) for v, e in zip(vals, env))
    # the envelope is sharp in φ: the fitted constant does not blow up
    assert gam < 10 * min(v / e for v, e in zip(vals, env))


def test_linear_system_matches_closed_form():
    phi = SqrtLog(2)
    c0 = np.array([0.5, 0.3, 0.2])
    p = DynSysParams(m=1, gamma_nl=0.0)
    tr = integrate_system(phi, p, c0, (math.e, 60.0))
    s = time_change(phi, tr.tau, 1)
    ref = np.array([stokes_solution(c0, si, p.gamma1) for si in s])
    assert np.max(np.abs(tr.c - ref)) < 1e-8


def test_convection_small_for_bounded_data():
    phi = SqrtLog(2)
    c0 = np.array([0.6, 0.5, 0.4])
    lin = integrate_system(phi, DynSysParams(gamma_nl=0.0), c0, (20.0, 60.0))
    full = integrate_system(phi, DynSysParams(gamma_nl=1.0), c0, (20.0, 60.0))
    assert abs(full.norm[-1] - lin.norm[-1]) < 1e-4
    ok, ratio = convection_negligibility(full, phi, 1)
    assert ok and ratio[-1] < 1e-6


def test_convection_early_start_escapes():
    # started at small τ, the quadratic term wins for c·e > 0 (finite-time escape)
    tr = integrate_system(SqrtLog(2), DynSysParams(gamma_nl=1.0), [0.9, 0.3, 0.2], (math.e, 60.0))
    assert tr.status == "escape"


def test_convection_negligibility_rejects_growing_trajectory():
    tau = np.linspace(20, 40, 50)
    c = np.exp(tau)[:, None] * np.array([1.0, 0.0, 0.0])
    tr = Trajectory(tau, c, np.log(np.linalg.norm(c, axis=1)))
    ok, _ = convection_negligibility(tr, SqrtLog(2), 1)
    assert not ok


def test_m2_convection_ratio():
    phi = PowLog(2.0, 0.75)
    params = DynSysParams(m=2, gamma_nl=1.0)
    tr = integrate_system(phi, params, [0.3, 0.2, 0.1], (20.0, 60.0))
    ok, ratio = convection_negligibility(tr, phi, 2, params)
    assert ok
    t, c = tr.tau[-1], tr.c[-1]
    pred = math.exp(-3 * t / 4) * float(phi(t)) ** 3 * abs(c.sum()) / (4 * wkbj_constants(2).d0 / 3 * params.gamma1)
    assert abs(ratio[-1] / pred - 1) < 1e-9


def test_sqrtlog3_amplitude_has_positive_limit():
    tr = integrate_system(SqrtLog(3), DynSysParams(gamma_nl=0.0), [0.5, 0.3, 0.2], (math.e, 1e8),
                          variable="log")
    assert tr.norm[-1] > 0.1 * tr.norm[0]
    assert abs(tr.norm[-1] / tr.norm[-50] - 1) < 1e-6


@pytest.mark.parametrize("c,verdict", [(1.5, Verdict.REGULAR), (2.0, Verdict.REGULAR),
                                       (2.1, Verdict.IRREGULAR), (2.5, Verdict.IRREGULAR),
                                       (3.0, Verdict.IRREGULAR)])
def test_sqrtlog_verdicts(c, verdict):
    v = classify(SqrtLog(c), 1)
    assert v.verdict == verdict
    assert v.diagnostics["paths_agree"]


def test_critical_constant_threshold():
    assert abs(CSTAR - 2 ** (11 / 4) * 3 ** (-3 / 4)) < 1e-12
    d0 = wkbj_constants(2).d0
    assert abs(d0 ** (-0.75) - CSTAR) < 1e-12
    assert analytic_divergence(PowLog(CSTAR - 1e-3, 0.75), 2)
    assert not analytic_divergence(PowLog(CSTAR + 1e-3, 0.75), 2)


def test_powlog_verdicts():
    assert classify(PowLog(CSTAR + 0.1, 0.75), 2).verdict == Verdict.IRREGULAR
    v = classify(PowLog(CSTAR - 0.3, 0.75), 2)
    assert v.verdict in (Verdict.REGULAR, Verdict.INCONCLUSIVE)
    assert "caveat" in v.diagnostics or v.verdict == Verdict.REGULAR


def test_verdict_matches_trajectory():
    for c in (1.5, 2.0):
        v = classify(SqrtLog(c), 1)
        assert v.diagnostics["trajectory_decays"]


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 3.2).filter(lambda c: abs(c - 2) > 0.03))
def test_sqrtlog_flip_at_two(c):
    assert analytic_divergence(SqrtLog(c), 1) == (c < 2)
    u0, u1 = 1.0, math.log(1e8)
    from vertexreg.regularity import _log_integrand

    assert growth_fit(_log_integrand(SqrtLog(c), 1, None, 3), u0, u1).diverges == (c < 2)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 1.0))
def test_linear_scaling_invariance(scale):
    phi = SqrtLog(2)
    base = np.array([0.5, 0.3, 0.2])
    p = DynSysParams(gamma_nl=0.0)
    a = integrate_system(phi, p, base, (math.e, 40.0))
    b = integrate_system(phi, p, scale * base, (math.e, 40.0))
    assert np.allclose(b.c, scale * a.c, rtol=1e-9, atol=1e-300)


def test_tabulated_shape():
    tau = np.geomspace(math.e, 1e8, 400)
    vals = 2 * np.sqrt(np.log(tau))
    v = classify(Tabulated(tau, vals), 1)
    assert v.verdict == Verdict.REGULAR


def test_tabulated_too_short():
    tau = np.geomspace(math.e, 20, 30)
    v = classify(Tabulated(tau, 2 * np.sqrt(np.log(tau))), 1)
    assert v.verdict == Verdict.INCONCLUSIVE


def test_decay_tail_membership():
    assert decay_tail_membership(3, 5)
    assert not decay_tail_membership(3, 6)
    assert not decay_tail_membership(3, 7)


def test_validation():
    with pytest.raises(ArgumentError):
        SqrtLog(-1)
    with pytest.raises(ArgumentError):
        integrate_system(SqrtLog(2), DynSysParams(), [1, 2], (3.0, 10.0))
    with pytest.raises(ArgumentError):
        classify(SqrtLog(2), 2, DynSysParams(m=1))


def test_verdict_json_roundtrip():
    import json

    d = classify(SqrtLog(2), 1).to_json()
    assert json.loads(json.dumps(d))["verdict"] == "Regular"

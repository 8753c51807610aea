"""Petrovskii-type regularity tests for the vertex of a slowly widening paraboloid.

The boundary in rescaled variables is |y| = φ(τ).  For the heat/Stokes case
(m=1) the vertex is regular iff ∫ φ^N e^{-φ²/4} dτ = ∞; for the bi-harmonic
case (m=2) the integrand carries the oscillating kernel tail
e^{-d0 φ^{4/3}}[C1 sin(b0 φ^{4/3}) + C2 cos(b0 φ^{4/3})].

Divergence is an asymptotic property, so two routes are used and compared:
exponent extraction for the analytic families, and a growth fit of the
partial integrals over a finite horizon (default τ ≤ 1e8).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import ArgumentError, NumericError
from .kernel import wkbj_constants

GAMMA1_RADIAL = 1 / (4 * math.sqrt(math.pi))
TAU_MAX = 1e8
_E = np.ones(3)


class Verdict(str, enum.Enum):
    REGULAR = "Regular"
    IRREGULAR = "Irregular"
    INCONCLUSIVE = "InconclusiveOscillatory"

    def __str__(self):
        return self.value


# ---------------------------------------------------------------- shapes

@dataclass(frozen=True)
class BoundaryFunction:
    """φ(τ) on τ ≥ tau0 > 1.  Build with SqrtLog, PowLog, Constant or Tabulated."""

    family: str
    params: tuple
    tau0: float = math.e
    samples: tuple | None = None  # (tau array, phi array) for tabulated shapes

    def __post_init__(self):
        if not self.tau0 > 1:
            raise ArgumentError("domain start tau0 must exceed 1")
        if self.family not in ("sqrtlog", "powlog", "const", "table"):
            raise ArgumentError(f"unknown family {self.family!r}")
        if self.family == "table":
            t, p = self.samples
            if len(t) < 2 or np.any(np.diff(t) <= 0) or np.any(np.asarray(p) <= 0):
                raise ArgumentError("tabulated shape needs increasing tau and positive phi")
        elif any(v <= 0 for v in self.params):
            raise ArgumentError("shape parameters must be positive")

    @property
    def label(self):
        if self.family == "table":
            return f"Tabulated[{len(self.samples[0])}]"
        name = {"sqrtlog": "SqrtLog", "powlog": "PowLog", "const": "Constant"}[self.family]
        return f"{name}{{{', '.join(f'{v:g}' for v in self.params)}}}"

    @property
    def analytic(self):
        return self.family != "table"

    @property
    def tau_end(self):
        return float(self.samples[0][-1]) if self.family == "table" else math.inf

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        f = self.family
        if f == "sqrtlog":
            return self.params[0] * np.sqrt(np.log(tau))
        if f == "powlog":
            C, q = self.params
            return C * np.log(tau) ** q
        if f == "const":
            return np.full_like(tau, self.params[0], dtype=float)
        t, p = self.samples
        return np.exp(np.interp(np.log(tau), np.log(t), np.log(p)))

    def of_log(self, u):
        """φ as a function of u = ln τ."""
        u = np.asarray(u, dtype=float)
        f = self.family
        if f == "sqrtlog":
            return self.params[0] * np.sqrt(u)
        if f == "powlog":
            return self.params[0] * u ** self.params[1]
        return self(np.exp(u))

    def sympy_expr(self):
        tau = sp.Symbol("tau", positive=True)
        f = self.family
        if f == "sqrtlog":
            return tau, sp.nsimplify(self.params[0]) * sp.sqrt(sp.log(tau))
        if f == "powlog":
            C, q = (sp.nsimplify(v) for v in self.params)
            return tau, C * sp.log(tau) ** q
        if f == "const":
            return tau, sp.nsimplify(self.params[0]) + 0 * tau
        raise ArgumentError("tabulated shapes have no closed form")

    # log-exponent form φ = C u^q used by the analytic tests (const: q = 0)
    def power_form(self):
        f = self.family
        if f == "sqrtlog":
            return self.params[0], 0.5
        if f == "powlog":
            return self.params
        if f == "const":
            return self.params[0], 0.0
        return None


def SqrtLog(c, tau0=math.e):
    return BoundaryFunction("sqrtlog", (float(c),), tau0)


def PowLog(C, q, tau0=math.e):
    return BoundaryFunction("powlog", (float(C), float(q)), tau0)


def Constant(c, tau0=math.e):
    return BoundaryFunction("const", (float(c),), tau0)


def Tabulated(tau, phi):
    tau = np.asarray(tau, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return BoundaryFunction("table", (), float(tau[0]), (tau, phi))


def slow_growth_check(phi: BoundaryFunction) -> dict:
    """Status of φ → ∞, φ' > 0, φ' → 0, φ'/φ → 0, (φ/φ')' → ∞ and φ ≪ τ^a."""
    if phi.analytic:
        tau, expr = phi.sympy_expr()
        d = sp.diff(expr, tau)
        a = sp.Symbol("a", positive=True)

        def lim(e, target):
            try:
                v = sp.limit(sp.simplify(e), tau, sp.oo)
            except (NotImplementedError, ValueError):
                return "undetermined"
            if v.has(sp.nan) or v is sp.nan:
                return "undetermined"
            return "satisfied" if v == target else "violated"

        zero_deriv = sp.simplify(d) == 0
        report = {
            "tends_to_infinity": lim(expr, sp.oo),
            "positive_derivative": "violated" if zero_deriv else (
                "satisfied" if sp.simplify(d.subs(tau, sp.E ** 4)) > 0 else "violated"),
            "derivative_to_zero": lim(d, 0),
            "log_derivative_to_zero": lim(d / expr, 0),
            "ratio_derivative_to_infinity": "violated" if zero_deriv else lim(sp.diff(expr / d, tau), sp.oo),
            "below_every_power": lim(expr / tau**a, 0),
        }
    else:
        t, p = (np.asarray(x) for x in phi.samples)
        if len(t) < 100:
            return {k: "undetermined" for k in (
                "tends_to_infinity", "positive_derivative", "derivative_to_zero",
                "log_derivative_to_zero", "ratio_derivative_to_infinity", "below_every_power")}
        dp = np.gradient(p, t)
        tail = slice(int(0.8 * len(t)), None)

        def trend(x, increasing):
            x = x[tail]
            ok = np.all(np.diff(x) >= 0) if increasing else np.all(np.diff(x) <= 0)
            return "undetermined-at-horizon" if ok else "violated"

        ratio = p / np.where(dp > 0, dp, np.nan)
        report = {
            "tends_to_infinity": trend(p, True),
            "positive_derivative": "satisfied" if np.all(dp[tail] > 0) else "violated",
            "derivative_to_zero": trend(np.abs(dp), False),
            "log_derivative_to_zero": trend(np.abs(dp / p), False),
            "ratio_derivative_to_infinity": trend(np.gradient(ratio, t), True)
            if np.all(np.isfinite(ratio[tail])) else "violated",
            "below_every_power": "undetermined-at-horizon",
        }
    report["all_satisfied"] = all(v == "satisfied" for v in report.values())
    return report


# ---------------------------------------------------------------- integrands

def _bracket(theta, C1, C2):
    return C1 * np.sin(theta) + C2 * np.cos(theta)


def criterion_integrand(phi: BoundaryFunction, tau, m: int = 1, wkbj=None, C1=1.0, C2=0.0, N: int = 3):
    """Pointwise integrand of the regularity integral (in dτ)."""
    p = phi(tau)
    if m == 1:
        return p**N * np.exp(-p * p / 4)
    if m == 2:
        w = wkbj or wkbj_constants(2, N)
        z = p ** (4 / 3)
        return p ** (N + 1 / 3 - float(w.delta0)) * np.exp(-w.d0 * z) * _bracket(w.b0 * z, C1, C2)
    raise ArgumentError("m must be 1 or 2")


def envelope_integrand(phi, tau, m=1, wkbj=None, N=3):
    """Positive envelope: the m=1 integrand, or the m=2 integrand without the bracket."""
    if m == 1:
        return criterion_integrand(phi, tau, 1, N=N)
    w = wkbj or wkbj_constants(2, N)
    p = phi(tau)
    return p ** (N + 1 / 3 - float(w.delta0)) * np.exp(-w.d0 * p ** (4 / 3))


def _log_integrand(phi, m, wkbj=None, N=3, signed=False, C1=1.0, C2=0.0):
    """Integrand in du (τ = e^u), evaluated in log space so large u is safe."""
    w = wkbj or (wkbj_constants(2, N) if m == 2 else None)

    def g(u):
        p = float(phi.of_log(u))
        if m == 1:
            return math.exp(N * math.log(p) - p * p / 4 + u)
        z = p ** (4 / 3)
        val = math.exp((N + 1 / 3 - float(w.delta0)) * math.log(p) - w.d0 * z + u)
        return val * _bracket(w.b0 * z, C1, C2) if signed else val

    return g


def time_change(phi: BoundaryFunction, tau, m: int = 1, wkbj=None, N: int = 3):
    """s(τ) = ∫_{τ0}^{τ} (positive integrand) dτ', vectorised over τ.

    ``tau = inf`` gives s(∞) (finite exactly when the integral converges).
    """
    scalar = np.isscalar(tau)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    g = _log_integrand(phi, m, wkbj, N)
    order = np.argsort(taus)
    out = np.empty_like(taus)
    u_prev, acc = math.log(phi.tau0), 0.0
    for k in order:
        t = taus[k]
        if t < phi.tau0:
            raise ArgumentError("tau must be >= tau0")
        u = math.log(t) if math.isfinite(t) else math.inf
        if u > u_prev:
            acc += quad(g, u_prev, u, epsabs=0, epsrel=1e-13, limit=500)[0]
            u_prev = u
        out[k] = acc
    return float(out[0]) if scalar else out


def stokes_solution(c0_init, s, gamma1=GAMMA1_RADIAL):
    """c0(s) = c0(0) e^{-γ1 s}."""
    c = np.asarray(c0_init, dtype=float)
    s = np.asarray(s, dtype=float)
    return c * np.exp(-gamma1 * s)[..., None] if s.ndim else c * math.exp(-gamma1 * float(s))


def linear_flux_coefficient(phi_val: float, N: int = 3, nodes: int = 48) -> float:
    """(φ / (2(4π)^{3/2})) ∫_{|s|=φ} (s·n/|s|) e^{-|s|²/4} dS with the inward normal,
    by product Gauss quadrature on the sphere.  Equals -γ1 φ³ e^{-φ²/4}."""
    if phi_val <= 0:
        raise ArgumentError("phi must be positive")
    if N != 3:
        raise ArgumentError("surface quadrature implemented for N=3")
    x, w = np.polynomial.legendre.leggauss(nodes)
    az = 2 * np.pi * np.arange(2 * nodes) / (2 * nodes)
    total = 0.0
    for ct, wt in zip(x, w):
        st = math.sqrt(1 - ct * ct)
        pts = phi_val * np.stack([st * np.cos(az), st * np.sin(az), np.full_like(az, ct)], axis=1)
        normal = -pts / phi_val
        sn = np.einsum("ij,ij->i", pts, normal) / phi_val
        total += wt * (2 * np.pi / len(az)) * np.sum(sn * np.exp(-phi_val**2 / 4))
    area = phi_val**2  # dS = φ² dω
    return phi_val / (2 * (4 * math.pi) ** 1.5) * area * total


def linear_flux_closed_form(phi_val: float) -> float:
    return -GAMMA1_RADIAL * phi_val**3 * math.exp(-phi_val**2 / 4)


def j1_radial_integral(phi_val: float) -> float:
    """∫_0^1 r² e^{-φ² r²/4} (1 - e^{-φ²(1-r)/2}) e^{-φ²(1-r)/2} dr."""
    a = phi_val**2

    def f(r):
        d = 1 - r
        return r * r * math.exp(-a * r * r / 4 - a * d / 2) * (-math.expm1(-a * d / 2))

    return quad(f, 0, 1, epsabs=0, epsrel=1e-12, limit=200, points=[max(0.0, 1 - 8 / a)])[0]


def convection_j1(phi_val: float, c0, tau: float, e=_E) -> float:
    """|J1| in the radial geometry.  The (n·e) factor makes the signed integral
    vanish by symmetry, so the magnitude uses ∫_{S²} |ω·e| dω = 2π|e|."""
    if phi_val <= 0:
        raise ArgumentError("phi must be positive")
    c = np.asarray(c0, dtype=float)
    e = np.asarray(e, dtype=float)
    quad_coef = abs(float(c @ e)) * float(np.linalg.norm(c))
    angular = 2 * math.pi * float(np.linalg.norm(e))
    return math.exp(-tau / 2) * quad_coef * phi_val**4 * angular * j1_radial_integral(phi_val)


# ---------------------------------------------------------------- dynamical system

@dataclass(frozen=True)
class DynSysParams:
    m: int = 1
    N: int = 3
    gamma1: float = GAMMA1_RADIAL
    gamma_nl: float = 1.0
    C1: float = 1.0
    C2: float = 0.0

    def __post_init__(self):
        if self.m not in (1, 2):
            raise ArgumentError("m must be 1 or 2")
        if not self.gamma1 > 0 or self.gamma_nl < 0:
            raise ArgumentError("need gamma1 > 0 and gamma_nl >= 0")
        if self.m == 2 and self.C1 == 0 and self.C2 == 0:
            raise ArgumentError("C1 and C2 cannot both vanish")


def system_terms(phi, tau, params: DynSysParams):
    """(linear rate L, nonlinear weight Q) with ċ = L c + Q (c·e) c."""
    p = float(phi(tau))
    if params.m == 1:
        env = math.exp(-p * p / 4)
        return (-params.gamma1 * p**3 * env,
                params.gamma_nl * math.exp(-tau / 2) * p**6 * env)
    w = wkbj_constants(2, params.N)
    z = p ** (4 / 3)
    osc = math.exp(-w.d0 * z) * _bracket(w.b0 * z, params.C1, params.C2)
    d0 = float(w.delta0)
    return (4 * w.d0 / 3 * params.gamma1 * p ** (params.N - d0) * osc,
            -params.gamma_nl * math.exp(-3 * tau / 4) * p ** (params.N + 3 - d0) * osc)


@dataclass
class Trajectory:
    tau: np.ndarray
    c: np.ndarray  # shape (len(tau), 3)
    log_norm: np.ndarray
    step: str = "DOP853"
    rtol: float = 1e-12
    status: str = "ok"

    @property
    def norm(self):
        return np.exp(self.log_norm)


def integrate_system(phi: BoundaryFunction, params: DynSysParams, c0_init, tau_span,
                     variable: str = "tau", form: str = "cartesian", rtol: float = 1e-12,
                     samples: int = 400, escape: float = 1e12) -> Trajectory:
    """Integrate ċ0 = L(τ) c0 + Q(τ) (c0·e) c0 over ``tau_span``.

    variable="log" integrates in u = ln τ (long horizons).  form="polar"
    integrates (ln|c|, c/|c|) so that decay far below the double range stays
    representable.  Finite-time escape (|c| > escape) ends the run with
    status "escape".
    """
    t0, t1 = map(float, tau_span)
    if not (phi.tau0 <= t0 < t1):
        raise ArgumentError("need tau0 <= tau_start < tau_end")
    if variable not in ("tau", "log") or form not in ("cartesian", "polar"):
        raise ArgumentError("variable in {tau, log}, form in {cartesian, polar}")
    c0 = np.asarray(c0_init, dtype=float)
    if c0.shape != (3,):
        raise ArgumentError("c0 must have three components")
    log_var = variable == "log"
    a, b = (math.log(t0), math.log(t1)) if log_var else (t0, t1)
    grid = np.linspace(a, b, samples)

    def tau_of(x):
        return math.exp(x) if log_var else x

    def jac(x):
        return math.exp(x) if log_var else 1.0

    if form == "cartesian":
        def rhs(x, c):
            t = tau_of(x)
            L, Q = system_terms(phi, t, params)
            return jac(x) * (L * c + Q * (c @ _E) * c)
        y0 = c0
    else:
        n0 = float(np.linalg.norm(c0))
        if n0 == 0:
            raise ArgumentError("polar form needs c0 != 0")

        def rhs(x, y):
            t = tau_of(x)
            L, Q = system_terms(phi, t, params)
            lam, d = y[0], y[1:]
            # F(c)/|c| written in terms of the direction d = c/|c|
            v = L * d + Q * math.exp(min(lam, 700.0)) * (d @ _E) * d
            dd = d @ d
            vd = (v @ d) / dd  # projection keeps |d| constant
            return jac(x) * np.concatenate([[vd], v - vd * d])
        y0 = np.concatenate([[math.log(n0)], c0 / n0])

    def escaped(x, y):
        if form == "cartesian":
            return float(np.linalg.norm(y)) - escape
        return y[0] - math.log(escape)

    escaped.terminal = True
    sol = solve_ivp(rhs, (a, b), y0, method="DOP853", t_eval=grid, rtol=rtol,
                    atol=1e-300 if form == "cartesian" else 1e-14, events=escaped)
    if not sol.success:
        raise NumericError(f"integration failed: {sol.message}", {"tau": float(tau_of(sol.t[-1]))})
    taus = np.array([tau_of(x) for x in sol.t])
    if form == "cartesian":
        c = sol.y.T
        with np.errstate(divide="ignore"):
            ln = np.log(np.linalg.norm(c, axis=1))
    else:
        ln = sol.y[0]
        d = sol.y[1:].T
        d = d / np.linalg.norm(d, axis=1)[:, None]
        with np.errstate(over="ignore", under="ignore"):
            c = d * np.exp(ln)[:, None]
    status = "escape" if sol.status == 1 else "ok"
    return Trajectory(taus, c, ln, "DOP853", rtol, status)


def convection_ratio(traj: Trajectory, phi, params: DynSysParams):
    """|nonlinear term| / |linear term| along a trajectory."""
    out = []
    for t, c, ln in zip(traj.tau, traj.c, traj.log_norm):
        L, Q = system_terms(phi, t, params)
        n = np.linalg.norm(c)
        ce = abs(float(c @ _E))
        if L == 0:
            out.append(math.inf if Q and ce else 0.0)
            continue
        # |Q (c·e) c| / |L c| = |Q| |c·e| / |L|
        out.append(abs(Q) * ce / abs(L) if n > 0 else 0.0)
    return np.array(out)


def convection_threshold(tau, phi, m: int):
    """|c0| above which the nonlinear term could lead: e^{τ/2}/φ³ (m=1), e^{3τ/4}/φ³ (m=2)."""
    tau = np.asarray(tau, dtype=float)
    k = 0.5 if m == 1 else 0.75
    return np.exp(k * tau) / phi(tau) ** 3


def convection_negligibility(traj: Trajectory, phi, m: int = 1, params: DynSysParams | None = None,
                             floor: float = 1e-6):
    """(ok, ratio history).  ok iff |c0| stays below the threshold everywhere and
    the ratio is non-increasing over the second half of the run and ends below
    ``floor`` (its limit is 0 when c0 is bounded)."""
    params = params or DynSysParams(m=m)
    ratio = convection_ratio(traj, phi, params)
    below = bool(np.all(traj.norm < convection_threshold(traj.tau, phi, m)))
    late = ratio[len(ratio) // 2:]
    decreasing = bool(np.all(np.diff(late) <= 1e-15 * np.maximum(late[:-1], 1e-300)))
    ok = below and decreasing and bool(late[-1] < floor)
    return ok, ratio


# ---------------------------------------------------------------- divergence tests

@dataclass
class GrowthFit:
    a: float  # exponent of e^{a u}
    b: float  # exponent of u^b
    diverges: bool
    partial: float
    horizon: float


def _analytic_exponents(phi: BoundaryFunction, m: int, N: int):
    """Integrand (in du, u = ln τ) ~ u^b exp(A(u)) for φ = C u^q; returns
    (lead power of u in A, its coefficient, b)."""
    C, q = phi.power_form()
    if m == 1:
        # φ^N e^{-φ²/4} e^u = C^N u^{qN} exp(u - C² u^{2q}/4)
        pw, coef = 2 * q, C * C / 4
        b = q * N
    else:
        w = wkbj_constants(2, N)
        pw, coef = 4 * q / 3, w.d0 * C ** (4 / 3)
        b = q * (N + 1 / 3 - float(w.delta0))
    return pw, coef, b


def analytic_divergence(phi: BoundaryFunction, m: int = 1, N: int = 3) -> bool:
    """Exponent comparison for the (envelope) integral ∫^∞ · dτ."""
    if not phi.analytic:
        raise ArgumentError("analytic test needs an analytic family")
    pw, coef, b = _analytic_exponents(phi, m, N)
    # exponent u - coef u^pw
    if pw < 1:
        return True
    if pw > 1:
        return False
    if abs(1 - coef) > 1e-12:
        return coef < 1
    return b >= -1


def growth_fit(g, u0: float, u1: float, block: float = 0.5, a_tol: float = 0.02) -> GrowthFit:
    """Fit ln ΔI_k ≈ a u_k + b ln u_k + c on block increments of a positive
    integrand g(u); ∫^∞ diverges iff a > a_tol, or |a| ≤ a_tol and b ≥ -1."""
    edges = np.arange(u0, u1 + 1e-12, block)
    if len(edges) < 8:
        raise ArgumentError("horizon too short for a growth fit")
    inc = np.array([quad(g, x, y, epsabs=0, epsrel=1e-10, limit=200)[0] for x, y in zip(edges[:-1], edges[1:])])
    mids = 0.5 * (edges[:-1] + edges[1:])
    keep = inc > 0
    if keep.sum() < 6:
        return GrowthFit(-math.inf, 0.0, False, float(inc.sum()), u1)
    # drop the first quarter of the range where transients dominate
    sel = keep & (mids >= u0 + 0.25 * (u1 - u0))
    A = np.stack([mids[sel], np.log(mids[sel]), np.ones(sel.sum())], axis=1)
    (a, b, _), *_ = np.linalg.lstsq(A, np.log(inc[sel]), rcond=None)
    div = bool(a > a_tol or (abs(a) <= a_tol and b >= -1))
    return GrowthFit(float(a), float(b), div, float(inc.sum()), u1)


def _lobes(g, u0, u1, n=20000):
    """Integrals of a signed integrand between its consecutive sign changes."""
    us = np.linspace(u0, u1, n)
    vals = np.array([g(x) for x in us])
    idx = np.nonzero(np.sign(vals[1:]) * np.sign(vals[:-1]) < 0)[0]
    cuts = [u0] + [brentq(g, us[i], us[i + 1], xtol=1e-13) for i in idx] + [u1]
    return np.array([quad(g, x, y, epsabs=0, epsrel=1e-10, limit=200)[0] for x, y in zip(cuts[:-1], cuts[1:])])


@dataclass
class RegularityVerdict:
    verdict: Verdict
    integral_estimate: dict
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        def clean(v):
            if isinstance(v, (np.floating, float)):
                return float(v)
            if isinstance(v, (np.bool_, bool)):
                return bool(v)
            if isinstance(v, np.ndarray):
                return [clean(x) for x in v.tolist()]
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, Verdict):
                return v.value
            return v
        return {"verdict": self.verdict.value, "integral_estimate": clean(self.integral_estimate),
                "diagnostics": clean(self.diagnostics)}


def trajectory_decays(traj: Trajectory, a_tol: float = 0.02) -> bool:
    """c0 → 0 decided from the growth of -ln|c0| in u = ln τ."""
    u = np.log(traj.tau)
    drop = -(traj.log_norm - traj.log_norm[0])
    from scipy.interpolate import CubicSpline

    spl = CubicSpline(u, drop)
    d = spl.derivative()
    g = lambda x: max(float(d(x)), 1e-300)
    return growth_fit(g, u[0], u[-1], a_tol=a_tol).diverges


def classify(phi: BoundaryFunction, m: int = 1, params: DynSysParams | None = None,
             tau_max: float = TAU_MAX, N: int = 3, check_trajectory: bool = True) -> RegularityVerdict:
    """Regular / Irregular / InconclusiveOscillatory for the vertex."""
    params = params or DynSysParams(m=m, N=N)
    if params.m != m:
        raise ArgumentError("params.m does not match m")
    w = wkbj_constants(2, N) if m == 2 else None
    warnings = []
    growth = slow_growth_check(phi)
    if not growth.get("all_satisfied"):
        warnings.append("shape is not slow-growing; the reduction behind the criterion may not apply")
    u0 = math.log(phi.tau0)
    u1 = math.log(min(tau_max, phi.tau_end))
    if not phi.analytic and u1 - u0 < 4:
        return RegularityVerdict(Verdict.INCONCLUSIVE, {"horizon": u1},
                                 {"warnings": warnings + ["table too short to extrapolate"]})

    env = _log_integrand(phi, m, w, N)
    fit = growth_fit(env, u0, u1)
    est = {"partial": fit.partial, "tau_max": math.exp(u1), "model_a": fit.a, "model_b": fit.b,
           "envelope_divergent": fit.diverges}
    diag = {"warnings": warnings, "slow_growth": growth, "numeric_envelope_divergent": fit.diverges}
    if phi.analytic:
        an = analytic_divergence(phi, m, N)
        diag["analytic_envelope_divergent"] = an
    else:
        an = fit.diverges

    def decide(divergent, signed_state):
        if not divergent:
            return Verdict.IRREGULAR
        if signed_state == "indefinite":
            return Verdict.INCONCLUSIVE
        if signed_state == "positive":
            return Verdict.IRREGULAR  # ∫ = +∞ drives c0 away from 0 for m=2
        return Verdict.REGULAR

    if m == 1:
        analytic_state = numeric_state = "negative"
    else:
        sig = _log_integrand(phi, 2, w, N, True, params.C1, params.C2)
        lobes = _lobes(sig, u0, u1)
        big = lobes[np.abs(lobes) > 1e-14 * max(np.abs(lobes).max(), 1e-300)]
        if np.all(big < 0):
            numeric_state = "negative"
        elif np.all(big > 0):
            numeric_state = "positive"
        else:
            numeric_state = "indefinite"
        diag["lobe_integrals"] = lobes.tolist()
        if phi.analytic:
            C, q = phi.power_form()
            if q == 0:
                br = _bracket(w.b0 * C ** (4 / 3), params.C1, params.C2)
                analytic_state = "negative" if br < 0 else ("positive" if br > 0 else "indefinite")
            else:
                analytic_state = "indefinite"  # phase b0 φ^{4/3} → ∞
        else:
            analytic_state = numeric_state
    verdict_an = decide(an, analytic_state)
    verdict_num = decide(fit.diverges, numeric_state)
    diag["analytic_verdict"] = verdict_an.value
    diag["numeric_verdict"] = verdict_num.value
    diag["paths_agree"] = verdict_an == verdict_num
    verdict = verdict_an
    if verdict == Verdict.INCONCLUSIVE:
        diag["caveat"] = ("envelope-divergent but sign-indefinite; regularity would need an "
                          "oscillatory cut-off of the boundary shape")

    if check_trajectory and verdict == Verdict.REGULAR:
        lin = DynSysParams(m, N, params.gamma1, 0.0, params.C1, params.C2)
        traj = integrate_system(phi, lin, [0.5, 0.3, 0.2], (phi.tau0, math.exp(u1)),
                                variable="log", form="polar", samples=600)
        decays = trajectory_decays(traj)
        diag["trajectory_decays"] = decays
        diag["trajectory_final_log_norm"] = float(traj.log_norm[-1])
        if not decays:
            verdict = Verdict.INCONCLUSIVE
            diag["warnings"].append("integral diverges but the integrated orbit did not decay")
    if m == 1:
        taus = np.geomspace(phi.tau0, math.exp(u1), 9)
        diag["time_change"] = {"tau": taus.tolist(), "s": time_change(phi, taus, 1).tolist()}
    return RegularityVerdict(verdict, est, diag)


def decay_tail_membership(k_decay, N: int) -> bool:
    """|y|^{-k} ∈ L²(|y| > 1) in R^N iff 2k > N."""
    if not k_decay > 0:
        raise ArgumentError("decay exponent must be positive")
    if N < 1:
        raise ArgumentError("N must be >= 1")
    from fractions import Fraction

    return 2 * Fraction(k_decay) > N

"""Self-similar blow-up profiles of u_t = -u_xxxx + |u|^{p-1} u (one dimension).

A profile v(y), y = x/(T-t)^{1/4}, solves

    -v'''' - ¼ y v' - v/(p-1) + |v|^{p-1} v = 0,    v'(0) = v'''(0) = 0,

and decays like y^δ exp(-a0 y^{4/3}) with a0 = 3·2^{-8/3}.  The decaying
direction at infinity is one-dimensional, so shooting inward from large y has
two unknowns, the bundle amplitude and p, for the two symmetry conditions.

Far-field data come from the exact decaying solution of the linearised
equation, written as a contour integral

    v_D(y) = Im ∫ t^{4μ-1} exp(t⁴ - y t) dt,   μ = 1/(p-1),

along a steepest-descent-like path through the saddle t = (y/4)^{1/3}.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import ode, quad, solve_ivp
from scipy.optimize import brentq

from .errors import ArgumentError, NumericError
from .regularity import decay_tail_membership

A0 = 3 * 2 ** (-8 / 3)


@dataclass(frozen=True)
class ShootingConfig:
    N: int = 1
    y_far: float = 10.0
    tol: float = 1e-10
    bracket: tuple = (1.2, 1.6)
    tail: str = "nonlinear"  # "nonlinear": continue the ODE in from y_outer; "linear": start at y_far
    y_outer: float = 24.0
    amp_range: tuple = (1e-3, 3e2)
    amp_samples: int = 60
    p_samples: int = 9
    rtol: float = 1e-12
    sign: int = 1  # sign convention of the far-field amplitude

    def __post_init__(self):
        lo, hi = self.bracket
        if not 1 < lo < hi:
            raise ArgumentError("bracket must satisfy 1 < p_lo < p_hi")
        if self.N != 1:
            raise ArgumentError("profile shooting is implemented for N=1")
        if self.tail not in ("nonlinear", "linear"):
            raise ArgumentError("tail must be 'nonlinear' or 'linear'")
        if self.tail == "nonlinear" and self.y_outer <= self.y_far:
            raise ArgumentError("y_outer must exceed y_far")
        # algebraic mode y^{-4/(p-1)} must sit well below the exponential bundle
        # gap at the y_far where data are imposed
        if self.sign not in (1, -1):
            raise ArgumentError("sign must be +1 or -1")
        if self.start_radius < 6:
            raise ArgumentError("matching radius too small to separate the far-field modes")

    @property
    def start_radius(self):
        return self.y_outer if self.tail == "nonlinear" else self.y_far


def exp_bundle_asymptotics(p: float, N: int = 1) -> dict:
    """Power δ = -(2/3)(N - 2/(p-1)) and rate a0 of y^δ exp(-a0 y^{4/3})."""
    if not p > 1:
        raise ArgumentError("p must exceed 1")
    if isinstance(p, (int, Fraction)):
        delta = -Fraction(2, 3) * (N - Fraction(2) / (Fraction(p) - 1))
    else:
        delta = -(2 / 3) * (N - 2 / (p - 1))
    return {"delta": delta, "a0": A0}


def bundle_power(mu, N: int):
    """Power of the decaying bundle for -Δ²v - ¼ y·∇v - μ v = (nonlinear): -(2/3)(N - 2μ)."""
    return -Fraction(2, 3) * (N - 2 * Fraction(mu))


def burnett_bundle_asymptotics(N: int = 3) -> dict:
    # the Burnett similarity balance has μ = 3/4, hence 1/|y| in three dimensions
    return {"delta": bundle_power(Fraction(3, 4), N), "a0": A0}


def _saddle_exponent(y):
    rho = (y / 4) ** (1 / 3)
    return rho**4 - y * rho  # = -3 (y/4)^{4/3}


@lru_cache(maxsize=4096)
def _decaying_mode_scaled(y: float, mu: float):
    """(v, v', v'', v''') of the decaying linear solution times exp(-f0(y))."""
    rho = (y / 4) ** (1 / 3)
    c = 4 * mu - 1
    f0 = _saddle_exponent(y)
    out = []
    for k in range(4):
        def integrand(s, k=k):
            a = abs(s) + rho
            t = rho - 1j * s + s * s / a
            dt = -1j + (2 * s * a - s * s * math.copysign(1.0, s)) / (a * a)
            return (t**c * np.exp(t**4 - y * t - f0) * (-t) ** k * dt).imag

        with warnings.catch_warnings():
            # roundoff near 1e-13 relative is the floor here, not a failure
            warnings.simplefilter("ignore")
            val = quad(integrand, -np.inf, np.inf, epsabs=0, epsrel=1e-13, limit=500)[0]
        out.append(val)
    return np.array(out), f0


def decaying_mode(y: float, p: float):
    """Unit-norm far-field vector (v, v', v'', v''') of the decaying mode at y,
    and the log-magnitude f0(y) it was scaled by."""
    if y <= 0:
        raise ArgumentError("y must be positive")
    vals, f0 = _decaying_mode_scaled(float(y), 1 / (p - 1))
    n = float(np.linalg.norm(vals))
    return vals / n, f0 + math.log(n)


def raw_decaying_mode(y: float, p: float) -> float:
    vals, f0 = _decaying_mode_scaled(float(y), 1 / (p - 1))
    return float(vals[0] * math.exp(f0))


def bundle_constant(p: float) -> float:
    """lim raw_decaying_mode(y) / (y^δ exp(-a0 y^{4/3})); Laplace's method at the
    saddle, where the phase has second derivative 12 ρ², gives -4^{-δ} √(π/6)."""
    delta = float(exp_bundle_asymptotics(p)["delta"])
    return -(4.0 ** -delta) * math.sqrt(math.pi / 6)


def profile_rhs(y, u, p):
    v, v1, v2, v3 = u
    return np.array([v1, v2, v3, -0.25 * y * v1 - v / (p - 1) + abs(v) ** (p - 1) * v])


def _initial_vector(p, amp, cfg: ShootingConfig):
    """Far-field data at the start radius; ``amp`` is the size of the mode at y_far."""
    y0 = cfg.start_radius
    vec, logmag = decaying_mode(y0, p)
    if y0 == cfg.y_far:
        return amp * vec
    _, log_far = decaying_mode(cfg.y_far, p)
    return amp * math.exp(logmag - log_far) * vec


@dataclass
class ProfileSolution:
    p: float
    amplitude: float
    y_far: float
    mismatch: tuple
    origin: np.ndarray  # (v, v', v'', v''') at y = 0
    sol: object = field(repr=False, default=None)
    y_start: float = 0.0

    @property
    def bundle_amplitude(self):
        """C1 in v ~ C1 y^δ exp(-a0 y^{4/3}) as y -> ∞.  The exact mode carries
        O(y^{-4/3}) corrections that are far from small at y_far, so C1 is read
        through it rather than from the leading term."""
        y = self.y_far
        v = float(self.sample(y)[0]) if self.sol is not None else float("nan")
        return v / raw_decaying_mode(y, self.p) * bundle_constant(self.p)

    def sample(self, y):
        return self.sol.sol(np.asarray(y, dtype=float))

    def grid(self, n=2001, upto=None):
        upto = self.y_far if upto is None else upto
        y = np.linspace(0.0, upto, n)
        return y, self.sample(y)


def _integrate(p, amp, cfg: ShootingConfig, dense=False):
    u0 = _initial_vector(p, amp, cfg)
    sol = solve_ivp(profile_rhs, (cfg.start_radius, 0.0), u0, args=(p,), method="DOP853",
                    rtol=cfg.rtol, atol=1e-300, dense_output=dense)
    if not sol.success:
        raise NumericError(
            f"profile integration failed at p={p:g}: {sol.message}; "
            "try a smaller matching radius or tighter step control", {"p": p, "amp": amp})
    return sol


def shoot(p: float, cfg: ShootingConfig, amplitude: float = 1.0, dense: bool = False) -> ProfileSolution:
    """One inward shot; returns the symmetry mismatch (v'(0), v'''(0))."""
    if not 1 < p:
        raise ArgumentError("p must exceed 1")
    sol = _integrate(p, amplitude, cfg, dense)
    end = sol.y[:, -1]
    return ProfileSolution(p, amplitude, cfg.y_far, (float(end[1]), float(end[3])), end,
                           sol if dense else None, cfg.start_radius)


def _rhs_list(y, u, p):
    v, v1, v2, v3 = u
    return [v1, v2, v3, -0.25 * y * v1 - v / (p - 1) + abs(v) ** (p - 1) * v]


def _vprime0(p, amp, cfg):
    """State at y = 0 only; the compiled dop853 driver is several times faster
    than solve_ivp for the many shots of a scan."""
    u0 = _initial_vector(p, amp, cfg)
    o = ode(_rhs_list).set_integrator("dop853", rtol=cfg.rtol, atol=1e-300, nsteps=20000)
    o.set_initial_value(u0, cfg.start_radius).set_f_params(p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # exploding shots are reported below
        end = o.integrate(0.0)
    if not o.successful() or not np.all(np.isfinite(end)):
        raise NumericError(f"shot diverged at p={p:g}", {"p": p, "amp": amp})
    return end


def principal_amplitude(p: float, cfg: ShootingConfig, guess: float | None = None):
    """Smallest |amplitude| of sign cfg.sign with v'(0) = 0 and v(0) of the same
    sign.  Local bracket search around ``guess`` first, then a log-spaced scan
    of cfg.amp_range."""
    sg = cfg.sign
    f = lambda la: _vprime0(p, sg * math.exp(la), cfg)[1]
    if guess is not None:
        lg = math.log(abs(guess))
        for width in (0.05, 0.3, 1.0, 2.5):
            a, b = lg - width, lg + width
            try:
                fa, fb = f(a), f(b)
            except NumericError:
                continue
            if np.isfinite(fa) and np.isfinite(fb) and fa * fb < 0:
                la = brentq(f, a, b, xtol=1e-14, rtol=1e-14)
                if sg * _vprime0(p, sg * math.exp(la), cfg)[0] > 0:
                    return sg * math.exp(la)
    grid = np.linspace(math.log(cfg.amp_range[0]), math.log(cfg.amp_range[1]), cfg.amp_samples)
    vals = []
    for la in grid:
        try:
            vals.append(_vprime0(p, sg * math.exp(la), cfg))
        except NumericError:
            vals.append(np.full(4, np.nan))
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and a[1] * b[1] < 0:
            la = brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14)
            if sg * _vprime0(p, sg * math.exp(la), cfg)[0] > 0:
                return sg * math.exp(la)
    return None


def mismatch_functional(p, amp, cfg):
    """Scalar mismatch v'''(0)/v(0); once v'(0) = 0 is imposed through the
    amplitude, the remaining symmetry condition is this one.  Invariant under
    v -> -v."""
    end = _vprime0(p, amp, cfg)
    return float(end[3] / end[0])


@dataclass
class PDeltaResult:
    p_delta: float
    amplitude: float
    table: list  # (p, amplitude or None, scalar mismatch v'''(0)/v(0) on the principal branch)
    sign_changes: list
    refined: list
    iterations: int


def find_p_delta(cfg: ShootingConfig = ShootingConfig(), full: bool = False):
    """p for which the profile problem has an exponentially decaying symmetric solution.

    The mismatch functional along the principal amplitude branch is scanned over
    the bracket; every sign change is refined by root-finding in p, re-solving
    v'(0) = 0 for the amplitude at each trial p.
    """
    lo, hi = cfg.bracket
    ps = np.linspace(lo, hi, cfg.p_samples)
    mid = len(ps) // 2
    order = list(range(mid, len(ps))) + list(range(mid - 1, -1, -1))
    amps = {}
    for k in order:
        nb = k - 1 if k > mid else k + 1
        guess = amps.get(nb) if 0 <= nb < len(ps) else None
        amps[k] = principal_amplitude(ps[k], cfg, guess)
    table = []
    for k, p in enumerate(ps):
        a = amps[k]
        m3 = mismatch_functional(p, a, cfg) if a is not None else float("nan")
        table.append((float(p), a, m3))
    changes = [(i, i + 1) for i in range(len(table) - 1)
               if np.isfinite(table[i][2]) and np.isfinite(table[i + 1][2])
               and table[i][2] * table[i + 1][2] < 0]
    if not changes:
        raise NumericError("no sign change of the mismatch in the bracket", {"table": table})
    refined = []
    for i, j in changes:
        calls = [0]
        track = {"amp": table[i][1]}

        def branch(p):
            calls[0] += 1
            a = principal_amplitude(p, cfg, track["amp"])
            if a is None:
                raise NumericError("principal branch lost during refinement", {"p": p})
            track["amp"] = a
            return mismatch_functional(p, a, cfg)

        try:
            p_star = brentq(branch, table[i][0], table[j][0], xtol=cfg.tol, rtol=4 * np.finfo(float).eps)
            a_star = principal_amplitude(p_star, cfg, track["amp"])
            end = _vprime0(p_star, a_star, cfg)
            resid = float(max(abs(end[1]), abs(end[3])) / abs(end[0]))
            slope = abs(table[j][2] - table[i][2]) / (table[j][0] - table[i][0])
            ok = resid < max(1e-6, 10 * cfg.tol * slope)
            if ok:
                # across a jump the amplitude on either side differs by O(1)
                eps = max(cfg.tol, 1e-7)
                left = principal_amplitude(p_star - eps, cfg, a_star)
                right = principal_amplitude(p_star + eps, cfg, a_star)
                ok = (left is not None and right is not None
                      and abs(math.log(left / right)) < 0.1)
        except NumericError:
            p_star, a_star, resid, ok = float("nan"), float("nan"), float("inf"), False
        # a jump between amplitude branches also brackets a sign change; the
        # residual at the limit point then stays O(1) instead of O(tol)
        refined.append({"p": float(p_star), "amplitude": float(a_star), "residual": resid,
                        "converged": ok, "interval": (table[i][0], table[j][0]),
                        "iterations": calls[0]})
    good = [r for r in refined if r["converged"]]
    if not good:
        raise NumericError("sign changes found but none refined to a symmetric profile",
                           {"table": table, "refined": refined})
    best = min(good, key=lambda r: r["residual"])
    res = PDeltaResult(best["p"], best["amplitude"], table, changes, refined, best["iterations"])
    return res if full else res.p_delta


def profile_residual(sol: ProfileSolution, y_lo: float = 0.1, y_hi: float | None = None,
                     n: int = 2000, h: float = 2e-3) -> float:
    """Plug-back residual of the profile equation; v'''' from a five-point
    difference of the interpolated v'''."""
    if sol.sol is None:
        raise ArgumentError("profile needs dense output (shoot(..., dense=True))")
    y_hi = sol.y_far - 1 if y_hi is None else y_hi
    y = np.linspace(y_lo, y_hi, n)
    u = sol.sample(y)
    d3 = lambda x: sol.sample(x)[3]
    v4 = (-d3(y + 2 * h) + 8 * d3(y + h) - 8 * d3(y - h) + d3(y - 2 * h)) / (12 * h)
    p = sol.p
    res = -v4 - 0.25 * y * u[1] - u[0] / (p - 1) + np.abs(u[0]) ** (p - 1) * u[0]
    return float(np.max(np.abs(res)))


def converged_profile(cfg: ShootingConfig = ShootingConfig()) -> ProfileSolution:
    r = find_p_delta(cfg, full=True)
    return shoot(r.p_delta, cfg, r.amplitude, dense=True)


def mass_constant(sol: ProfileSolution, y_cut: float | None = None, full: bool = False):
    """∫_R |v|^{(p-1)/4} dy for the even extension of the profile: twice the
    grid integral on [0, y_cut] plus twice a bundle tail beyond y_cut, with
    |v| ~ A y^δ exp(-a0 y^{4/3}) matched at y_cut."""
    if sol.sol is None:
        raise ArgumentError("profile needs dense output")
    y_cut = sol.y_far if y_cut is None else y_cut
    k = (sol.p - 1) / 4
    f = lambda y: abs(float(sol.sample(y)[0])) ** k
    brk = list(np.linspace(0, y_cut, 21)[1:-1])
    core = quad(f, 0, y_cut, points=brk, limit=400, epsrel=1e-10)[0]
    delta = exp_bundle_asymptotics(sol.p)["delta"]
    vc = abs(float(sol.sample(y_cut)[0]))
    A = vc / (y_cut**delta * math.exp(-A0 * y_cut ** (4 / 3)))
    tail_f = lambda y: (A * y**delta * math.exp(-A0 * y ** (4 / 3))) ** k
    tail = quad(tail_f, y_cut, np.inf, limit=400)[0]
    D = 2 * (core + tail)
    if full:
        return {"D": D, "half_line_core": core, "half_line_tail": tail, "tail_fraction": 2 * tail / D}
    return D


def leray_tail_exponent(m: int) -> int:
    """Algebraic decay of the generic far-field mode of the similarity system:
    (1/2m) y·∇v + ((2m-1)/2m) v = 0 gives |y|^{-(2m-1)}; 3 for the Burnett case."""
    if m not in (1, 2):
        raise ArgumentError("m must be 1 or 2")
    return 2 * m - 1


def similarity_tail_exponent(p, m: int = 2):
    """Generic algebraic tail |y|^{-2m/(p-1)} of semilinear similarity profiles."""
    if not p > 1:
        raise ArgumentError("p must exceed 1")
    if isinstance(p, (int, Fraction)):
        return Fraction(2 * m) / (Fraction(p) - 1)
    return 2 * m / (p - 1)


def tail_exclusion_report(n_max: int = 10) -> dict:
    k = leray_tail_exponent(2)
    member = {N: decay_tail_membership(k, N) for N in range(1, n_max + 1)}
    inside = [N for N, ok in member.items() if ok]
    excluded_from_7 = all(not member[N] for N in range(7, n_max + 1))
    statement = (
        f"Burnett similarity profiles with the algebraic tail |y|^-{k} lie in L^2(|y|>1) "
        f"only for N <= {max(inside)}; for every N >= 7 (the blow-up dimensions) "
        "such self-similar profiles are excluded from L^2."
        if excluded_from_7 else "inconsistent tail table"
    )
    return {"tail_exponent": k, "membership": member, "excluded_for_N_ge_7": excluded_from_7,
            "statement": statement}

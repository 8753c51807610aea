"""Limit boundary-layer equations on the half line η ≥ 0.

    m=1:  h_s = h_ηη + ½ h_η,          h(0) = 0,           h(∞) = 1
    m=2:  h_s = -h_ηηηη + ¼ h_η,       h(0) = h_η(0) = 0,  h(∞) = 1

The domain is cut at η = L where h is clamped to 1 (and h_η = 0 for m=2).
Stationary profiles are 1 - e^{-η/2} and
1 - e^{-rη}[cos ωη + sin(ωη)/√3] with r = 2^{-5/3}, ω = √3·2^{-5/3}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spl
import sympy as sp

from scipy.integrate import trapezoid

from .errors import ArgumentError, NumericError

DEFAULT_LENGTH = {1: 40.0, 2: 60.0}
SCHEMES = ("implicit", "crank-nicolson", "explicit")

_RATE2 = 2.0 ** (-5 / 3)
_FREQ2 = math.sqrt(3) * 2.0 ** (-5 / 3)


@dataclass(frozen=True)
class StationaryProfile:
    m: int

    def __post_init__(self):
        if self.m not in (1, 2):
            raise ArgumentError("stationary profiles exist for m in {1, 2}")

    @property
    def rate(self):
        return 0.5 if self.m == 1 else _RATE2

    @property
    def frequency(self):
        return 0.0 if self.m == 1 else _FREQ2

    def __call__(self, eta):
        return self.derivative(eta, 0)

    def derivative(self, eta, k: int = 0):
        eta = np.asarray(eta, dtype=float)
        if self.m == 1:
            if k == 0:
                return 1 - np.exp(-eta / 2)
            return -((-0.5) ** k) * np.exp(-eta / 2)
        # 1 - Re[(1 - i/√3) e^{λη}], λ = -r + iω
        lam = complex(-_RATE2, _FREQ2)
        amp = complex(1, -1 / math.sqrt(3))
        val = -(amp * lam**k * np.exp(lam * eta)).real
        return val + (1.0 if k == 0 else 0.0)

    def residual(self, eta):
        """A g0 evaluated pointwise from the closed form."""
        if self.m == 1:
            return self.derivative(eta, 2) + 0.5 * self.derivative(eta, 1)
        return -self.derivative(eta, 4) + 0.25 * self.derivative(eta, 1)

    def sympy_expr(self):
        eta = sp.Symbol("eta", nonnegative=True)
        if self.m == 1:
            return eta, 1 - sp.exp(-eta / 2)
        r = 2 ** sp.Rational(-5, 3)
        w = sp.sqrt(3) * r
        return eta, 1 - sp.exp(-r * eta) * (sp.cos(w * eta) + sp.sin(w * eta) / sp.sqrt(3))


def stationary_profile(m: int) -> StationaryProfile:
    return StationaryProfile(m)


def characteristic_root(m: int = 2):
    """Root with negative real part (largest such) of the profile's characteristic
    equation: λ = -1/2 for m=1 and the root of λ³ = 1/4 with Im > 0 for m=2."""
    lam = sp.Symbol("lam")
    if m == 1:
        roots = sp.solve(lam**2 + lam / 2, lam)
    elif m == 2:
        roots = sp.solve(lam**3 - sp.Rational(1, 4), lam)
    else:
        raise ArgumentError("m must be 1 or 2")
    neg = [r for r in roots if sp.re(r) < 0]
    best = max(neg, key=lambda r: (float(sp.re(r)), float(sp.im(r))))
    return sp.nsimplify(sp.re(best)), sp.nsimplify(sp.im(best))


@dataclass
class BLState:
    m: int
    grid: np.ndarray
    values: np.ndarray
    s: float = 0.0
    rho: float = 1.0  # matching amplitude; follows the inner coefficient c0

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    @property
    def length(self):
        return float(self.grid[-1])

    @property
    def overshoot(self):
        return float(np.max(self.values) - 1.0)


def initial_state(m: int, data="step", L: float | None = None, h: float = 0.02) -> BLState:
    """``data``: "step" (h = 1 for η > 0), "smooth" (1 - e^{-η²/4}),
    "profile" (the stationary profile) or a callable of η."""
    if m not in (1, 2):
        raise ArgumentError("m must be 1 or 2")
    L = DEFAULT_LENGTH[m] if L is None else float(L)
    if h <= 0 or L <= 10 * h:
        raise ArgumentError("need 0 < h << L")
    n = int(round(L / h))
    grid = np.linspace(0.0, L, n + 1)
    if callable(data):
        v = np.asarray(data(grid), dtype=float)
    elif data == "step":
        v = np.where(grid > 0, 1.0, 0.0)
    elif data == "smooth":
        v = 1 - np.exp(-grid**2 / 4)
    elif data == "profile":
        v = stationary_profile(m)(grid)
    else:
        raise ArgumentError(f"unknown initial data {data!r}")
    v = v.copy()
    v[0] = 0.0
    v[-1] = 1.0
    return BLState(m, grid, v)


def _operator(m: int, grid: np.ndarray):
    """Sparse (A, b) with du/ds = A u + b on the interior unknowns."""
    n = len(grid)
    h = grid[1] - grid[0]
    N = n - 2
    if m == 1:
        # e^{-η/2} (e^{η/2} h_η)_η, conservative; symmetric in the e^{η/2} weight
        half = np.exp((grid[:-1] + grid[1:]) / 4)
        wi = np.exp(-grid[1:-1] / 2) / h**2
        up = half[1:] * wi
        lo = half[:-1] * wi
        main = -(up + lo)
        A = sps.diags([lo[1:], main, up[:-1]], [-1, 0, 1], shape=(N, N), format="csc")
        b = np.zeros(N)
        b[-1] = up[-1] * 1.0
        return A, b
    rows, cols, vals = [], [], []
    b = np.zeros(N)
    st = -np.array([1.0, -4.0, 6.0, -4.0, 1.0]) / h**4
    adv = {-1: -1 / (8 * h), 1: 1 / (8 * h)}
    for i in range(1, n - 1):
        coeffs = {o: c for o, c in zip(range(-2, 3), st)}
        for o, c in adv.items():
            coeffs[o] += c
        for o, c in coeffs.items():
            j = i + o
            if j == -1:
                j = 1  # ghost: h_η(0) = 0
            elif j == n:
                j = n - 2  # ghost: h_η(L) = 0
            if j == 0:
                continue  # h(0) = 0
            if j == n - 1:
                b[i - 1] += c  # h(L) = 1
                continue
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(c)
    A = sps.csc_matrix((vals, (rows, cols)), shape=(N, N))
    return A, b


def stability_bound(m: int, grid: np.ndarray) -> float:
    """Largest stable explicit-Euler step from a Gershgorin bound on A."""
    A, _ = _operator(m, grid)
    return 2.0 / float(abs(A).sum(axis=1).max())


def discrete_steady_state(state: BLState) -> np.ndarray:
    A, b = _operator(state.m, state.grid)
    inner = spl.spsolve(A, -b)
    return np.concatenate([[0.0], inner, [1.0]])


class _Stepper:
    def __init__(self, m, grid, ds, scheme):
        if scheme not in SCHEMES:
            raise ArgumentError(f"scheme must be one of {SCHEMES}")
        if ds <= 0:
            raise ArgumentError("ds must be positive")
        A, b = _operator(m, grid)
        self.A, self.b, self.ds, self.scheme = A, b, ds, scheme
        I = sps.identity(A.shape[0], format="csc")
        if scheme == "explicit":
            bound = stability_bound(m, grid)
            if ds > bound:
                raise NumericError(
                    f"explicit step ds={ds:g} exceeds the stability bound {bound:g}",
                    {"ds_max": bound})
        elif scheme == "implicit":
            self.lu = spl.splu(I - ds * A)
        else:
            self.lu = spl.splu(I - 0.5 * ds * A)
            self.rhs = I + 0.5 * ds * A

    def __call__(self, u):
        if self.scheme == "explicit":
            return u + self.ds * (self.A @ u + self.b)
        if self.scheme == "implicit":
            return self.lu.solve(u + self.ds * self.b)
        return self.lu.solve(self.rhs @ u + self.ds * self.b)


def evolve(state: BLState, ds: float, steps: int, scheme: str = "implicit",
           callback=None) -> BLState:
    """Advance ``steps`` steps of size ``ds``.  ``callback(state)`` is called
    after every step (used for Lyapunov tracking)."""
    if steps < 0:
        raise ArgumentError("steps must be >= 0")
    stepper = _Stepper(state.m, state.grid, ds, scheme)
    u = state.values[1:-1].copy()
    s = state.s
    for k in range(steps):
        u = stepper(u)
        s += ds
        if not np.all(np.isfinite(u)):
            raise NumericError(f"non-finite values at step {k + 1}", {"s": s})
        if callback is not None:
            callback(replace(state, values=np.concatenate([[0.0], u, [1.0]]), s=s))
    return replace(state, values=np.concatenate([[0.0], u, [1.0]]), s=s)


def _perturbation(state, reference):
    if reference == "discrete":
        ref = _steady_on(state.m, len(state.grid), state.length)
    elif reference == "closed":
        ref = stationary_profile(state.m)(state.grid)
    else:
        raise ArgumentError("reference must be 'discrete' or 'closed'")
    return state.values - ref


@lru_cache(maxsize=8)
def _steady_on(m, npts, L):
    grid = np.linspace(0.0, L, npts)
    A, b = _operator(m, grid)
    return np.concatenate([[0.0], spl.spsolve(A, -b), [1.0]])


def lyapunov(state: BLState, reference: str = "discrete") -> float:
    """m=1: ∫ e^{η/2} w_η² dη; m=2: ∫ w_η² dη, with w = h - (steady state).

    The default reference is the steady state of the same discretization, for
    which the monotonicity is exact; ``reference="closed"`` uses the closed form.
    """
    if reference == "discrete":
        w = state.values - _steady_on(state.m, len(state.grid), state.length)
    else:
        w = _perturbation(state, reference)
    h = state.step
    dw = np.diff(w) / h
    if state.m == 1:
        weight = np.exp((state.grid[:-1] + state.grid[1:]) / 4)
    else:
        weight = np.ones_like(dw)
    integrand = weight * dw**2
    total = float(np.sum(integrand) * h)
    tail = float(integrand[-1] * state.length)
    if total > 0 and tail > 1e-3 * total:
        raise NumericError(
            "Lyapunov integrand has not decayed at η = L; enlarge the domain",
            {"tail": tail, "total": total})
    return total


def weighted_l2(state: BLState, reference: str = "discrete") -> float:
    """∫ e^{η/2} w² dη (m=1 contraction norm); unweighted ∫ w² for m=2."""
    w = _perturbation(state, reference)
    weight = np.exp(state.grid / 2) if state.m == 1 else np.ones_like(w)
    return float(trapezoid(weight * w**2, state.grid))


def sup_error(state: BLState, window: float | None = None) -> float:
    """max |h - g0| over η ≤ window (whole grid by default)."""
    g0 = stationary_profile(state.m)(state.grid)
    mask = np.ones_like(g0, dtype=bool) if window is None else state.grid <= window
    return float(np.max(np.abs(state.values - g0)[mask]))


@dataclass
class BLRun:
    state: BLState
    s: np.ndarray
    sup_err: np.ndarray
    lyapunov: np.ndarray
    snapshots: list = field(default_factory=list)

    @property
    def lyapunov_monotone(self):
        return bool(np.all(np.diff(self.lyapunov) <= 0))


def run(m: int, s_end: float, ds: float, h: float = 0.02, data="step", L=None,
        scheme="implicit", window=None, snapshot_times=()) -> BLRun:
    """Evolve to ``s_end`` recording sup error and Lyapunov value per step."""
    state = initial_state(m, data, L, h)
    steps = int(round(s_end / ds))
    ss, errs, lys, snaps = [state.s], [sup_error(state, window)], [lyapunov(state)], []
    want = sorted(snapshot_times)

    def record(st):
        ss.append(st.s)
        errs.append(sup_error(st, window))
        lys.append(lyapunov(st))
        while want and st.s >= want[0] - 1e-12:
            snaps.append((st.s, st.values.copy()))
            want.pop(0)

    if want and want[0] <= 0:
        snaps.append((0.0, state.values.copy()))
        want.pop(0)
    state = evolve(state, ds, steps, scheme, callback=record)
    return BLRun(state, np.array(ss), np.array(errs), np.array(lys), snaps)


def heat_halfline_reference(eta, s: float, quad_limit: int = 200):
    """Exact m=1 solution from step data, h = g0 + w, by reduction to the heat
    equation: w = e^{-η/4 - s/16} g with g_s = g_ηη, g(0) = 0, g(·,0) = e^{-η/4}."""
    from scipy.integrate import quad

    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    out = np.empty_like(eta)
    if s <= 0:
        raise ArgumentError("s must be positive")
    norm = 1 / math.sqrt(4 * math.pi * s)
    for k, e in enumerate(eta):
        f = lambda x: (math.exp(-(e - x) ** 2 / (4 * s)) - math.exp(-(e + x) ** 2 / (4 * s))) * math.exp(-x / 4)
        g = norm * quad(f, 0, np.inf, limit=quad_limit, epsabs=1e-14)[0]
        out[k] = 1 - math.exp(-e / 2) + math.exp(-e / 4 - s / 16) * g
    return out

"""Radial profile of the fundamental solution of u_t = -(-Δ)^m u in R³.

F has Fourier symbol exp(-|ξ|^{2m}), so in three dimensions

    F(r) = 1/(2π² r) ∫_0^∞ ξ sin(rξ) exp(-ξ^{2m}) dξ.

For m=1 this is the Gaussian (4π)^{-3/2} e^{-r²/4}; for m ≥ 2 it oscillates
with an envelope r^{-δ} exp(-d0 r^α), α = 2m/(2m-1).
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad, simpson

from .errors import ArgumentError, NumericError

_GL16 = leggauss(16)
_GL32 = leggauss(32)
_CUTOFF_EPS = 1e-20
_PANEL_WIDTH = 0.25
_MAX_DEPTH = 12


@dataclass(frozen=True)
class WkbjConstants:
    m: int
    n: int
    alpha: Fraction
    a_complex: complex
    d0: float
    b0: float
    delta0: Fraction

    @property
    def modulus(self):
        """|a| = (2m-1)(2m)^{-α}; for m=2 this is the bundle rate 3·2^{-8/3}."""
        return abs(self.a_complex)

    @property
    def prefactor_exponent(self) -> Fraction:
        """Algebraic decay exponent of the kernel envelope from the saddle point
        of the Fourier integral: F ~ r^{-N(m-1)/(2m-1)} exp(a r^α)."""
        return Fraction(self.n * (self.m - 1), 2 * self.m - 1)

    def characteristic_defect(self):
        """(-1)^m (α a)^{2m-1} - 1/(2m); zero up to rounding."""
        a = float(self.alpha) * self.a_complex
        return (-1) ** self.m * a ** (2 * self.m - 1) - 1 / (2 * self.m)

    def to_json(self):
        return {
            "m": self.m, "N": self.n, "alpha": float(self.alpha),
            "d0": self.d0, "b0": self.b0, "delta0": float(self.delta0),
        }


def wkbj_constants(m: int, n: int = 3) -> WkbjConstants:
    if m < 1 or n < 1:
        raise ArgumentError("need m >= 1 and N >= 1")
    alpha = Fraction(2 * m, 2 * m - 1)
    mod = (2 * m - 1) * (2 * m) ** (-float(alpha))
    angle = math.pi / (2 * (2 * m - 1))
    if m == 1:
        s, c = 1.0, 0.0  # angle is π/2; avoid cos rounding to 6e-17
    else:
        s, c = math.sin(angle), math.cos(angle)
    d0, b0 = mod * s, mod * c
    delta0 = Fraction(m * (2 * n - 1) - n, 2 * m - 1)
    return WkbjConstants(m, n, alpha, complex(-d0, b0), d0, b0, delta0)


def wkbj_constants_exact(m: int, n: int = 3):
    """Same constants as sympy expressions (for exact identities)."""
    mm = sp.Integer(m)
    alpha = 2 * mm / (2 * mm - 1)
    mod = (2 * mm - 1) * (2 * mm) ** (-alpha)
    angle = sp.pi / (2 * (2 * mm - 1))
    return {
        "alpha": alpha,
        "modulus": sp.nsimplify(mod),
        "d0": sp.simplify(mod * sp.sin(angle)),
        "b0": sp.simplify(mod * sp.cos(angle)),
        "delta0": sp.Rational(m * (2 * n - 1) - n, 2 * m - 1),
    }


def critical_constant_exact(m: int = 2, n: int = 3):
    """d0^{-(2m-1)/(2m)}: the amplitude C at which C·(ln τ)^{(2m-1)/(2m)} makes
    the envelope exponent exp(-d0 φ^α) exactly τ^{-1}."""
    d0 = wkbj_constants_exact(m, n)["d0"]
    return sp.simplify(d0 ** (-sp.Rational(2 * m - 1, 2 * m)))


def _cutoff(m):
    return (-math.log(_CUTOFF_EPS)) ** (1 / (2 * m))


def _panel(a, b, r, m, rule):
    x, w = rule
    xi = 0.5 * (a + b) + 0.5 * (b - a) * x
    g = xi**2 * np.exp(-xi ** (2 * m)) * np.sinc(r * xi / math.pi)
    return 0.5 * (b - a) * float(np.dot(w, g))


def _panel_adaptive(a, b, r, m, tol, depth, budget):
    lo = _panel(a, b, r, m, _GL16)
    hi = _panel(a, b, r, m, _GL32)
    budget[0] -= 1
    if abs(hi - lo) <= tol or depth >= _MAX_DEPTH:
        if abs(hi - lo) > tol:
            budget[1] = max(budget[1], abs(hi - lo))
        return hi
    if budget[0] <= 0:
        raise NumericError("kernel quadrature panel budget exhausted", {"estimate": hi, "error": abs(hi - lo)})
    c = 0.5 * (a + b)
    return (_panel_adaptive(a, c, r, m, tol / 2, depth + 1, budget)
            + _panel_adaptive(c, b, r, m, tol / 2, depth + 1, budget))


def kernel_eval(r: float, m: int = 2, n: int = 3, tol: float = 1e-13, max_panels: int = 20000) -> float:
    """F(r) by Gauss-Legendre panels split at the zeros ξ = kπ/r of sin(rξ)."""
    if n != 3:
        raise ArgumentError("kernel evaluation is implemented for N=3 only")
    if r < 0 or not math.isfinite(r):
        raise ArgumentError("radius must be finite and >= 0")
    if tol <= 0:
        raise ArgumentError("tol must be positive")
    if m < 1:
        raise ArgumentError("m must be >= 1")
    X = _cutoff(m)
    edges = [0.0]
    if r > 0:
        k = 1
        while k * math.pi / r < X:
            edges.append(k * math.pi / r)
            k += 1
    edges.append(X)
    # keep panels narrow enough that the 16/32 comparison is meaningful
    fine = [0.0]
    for a, b in zip(edges[:-1], edges[1:]):
        pieces = max(1, math.ceil((b - a) / _PANEL_WIDTH))
        fine.extend(a + (b - a) * (i + 1) / pieces for i in range(pieces))
    budget = [max_panels, 0.0]
    per_panel = 2 * math.pi**2 * tol / len(fine)
    total = 0.0
    for a, b in zip(fine[:-1], fine[1:]):
        total += _panel_adaptive(a, b, r, m, per_panel, 0, budget)
    if budget[1] > 0:
        raise NumericError("kernel quadrature did not converge", {"estimate": total / (2 * math.pi**2), "error": budget[1]})
    return total / (2 * math.pi**2)


def gaussian_profile(r):
    """Closed-form m=1 kernel in R³."""
    r = np.asarray(r, dtype=float)
    return (4 * math.pi) ** -1.5 * np.exp(-r * r / 4)


def ball_mass(R: float, m: int, tol: float = 1e-12) -> float:
    """4π ∫_0^R r² F(r) dr computed on the Fourier side:
    (2/π) ∫_0^∞ e^{-ξ^{2m}} (sin Rξ - Rξ cos Rξ)/ξ dξ."""
    X = _cutoff(m)

    def f(x):
        if x < 1e-8:
            return (R * x) ** 3 / (3 * x) * math.exp(-x ** (2 * m))
        return math.exp(-x ** (2 * m)) * (math.sin(R * x) - R * x * math.cos(R * x)) / x

    pts = [k * math.pi / R for k in range(1, int(X * R / math.pi) + 1)]
    val = quad(f, 0, X, points=pts or None, limit=1000, epsabs=tol, epsrel=0)[0]
    return 2 / math.pi * val


@dataclass
class KernelTable:
    m: int
    n: int
    radii: np.ndarray
    values: np.ndarray
    quadrature_tol: float
    normalization_residual: float = field(default=float("nan"))

    @property
    def step(self):
        return float(self.radii[1] - self.radii[0])

    def moment(self, j: int) -> float:
        """4π ∫ r² r^{2j} F dr over the table range (Simpson)."""
        r = self.radii
        return 4 * math.pi * simpson(r ** (2 + 2 * j) * self.values, x=r)


def _threads():
    try:
        return max(1, int(os.environ.get("VERTEXREG_THREADS", "1")))
    except ValueError:
        return 1


def kernel_table(rmax: float, steps: int, m: int = 2, n: int = 3, tol: float = 1e-13) -> KernelTable:
    """F on the uniform grid of ``steps`` points over [0, rmax]."""
    if rmax <= 0 or steps < 2:
        raise ArgumentError("need rmax > 0 and steps >= 2")
    radii = np.linspace(0.0, rmax, steps)
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(lambda r: kernel_eval(r, m, n, tol), radii))
    else:
        vals = [kernel_eval(r, m, n, tol) for r in radii]
    t = KernelTable(m, n, radii, np.array(vals), tol)
    t.normalization_residual = abs(t.moment(0) - 1.0)
    return t


@dataclass
class WkbjFit:
    d0_hat: float
    b0_hat: float
    log_amplitude: float
    delta: float
    alpha: float
    extrema: np.ndarray  # (s, ln|F r^δ|) at refined envelope maxima, s = r^α
    zeros: np.ndarray  # r at sign changes

    def envelope(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            return np.exp(self.log_amplitude - self.d0_hat * r**self.alpha) * r ** (-self.delta)


def _zeros(r, f):
    idx = np.nonzero(np.sign(f[1:]) * np.sign(f[:-1]) < 0)[0]
    return np.array([r[i] - f[i] * (r[i + 1] - r[i]) / (f[i + 1] - f[i]) for i in idx])


def wkbj_fit(table: KernelTable, rmin: float = 3.0, rmax: float | None = None, delta=None) -> WkbjFit:
    """Estimate d0 and b0 from the oscillating tail of a kernel table.

    With the algebraic prefactor r^{-δ} divided out, ln|F r^δ| at the envelope
    maxima is linear in s = r^α with slope -d0; zeros are spaced by π/b0 in s.
    ``delta`` defaults to the saddle-point exponent N(m-1)/(2m-1).
    """
    w = wkbj_constants(table.m, table.n)
    alpha = float(w.alpha)
    if delta is None:
        delta = float(w.prefactor_exponent)
    rmax = table.radii[-1] if rmax is None else rmax
    sel = (table.radii >= rmin) & (table.radii <= rmax)
    r, f = table.radii[sel], table.values[sel]
    zeros = _zeros(r, f)
    if len(zeros) < 2:
        raise NumericError(
            f"only {len(zeros)} sign changes of F on [{rmin}, {rmax}]; "
            "the tail fit needs at least 2 (try a larger rmax)", {"zeros": zeros.tolist()})
    s = r**alpha
    g = np.log(np.abs(f) * r**delta)
    ext = []
    for i in range(1, len(g) - 1):
        if g[i] >= g[i - 1] and g[i] >= g[i + 1] and np.isfinite(g[i - 1:i + 2]).all():
            p = np.polyfit(s[i - 1:i + 2], g[i - 1:i + 2], 2)
            if p[0] >= 0:
                continue
            sx = -p[1] / (2 * p[0])
            ext.append((sx, np.polyval(p, sx)))
    ext = np.array(ext)
    if len(ext) < 2:
        raise NumericError(
            f"only {len(ext)} envelope maxima on [{rmin}, {rmax}]; try a larger rmax",
            {"extrema": ext.tolist()})
    slope, intercept = np.polyfit(ext[:, 0], ext[:, 1], 1)
    b0_hat = math.pi / float(np.mean(np.diff(zeros**alpha)))
    # amplitude of the envelope through the maxima (oscillation peaks at 1)
    return WkbjFit(-float(slope), b0_hat, float(intercept), float(delta), alpha, ext, zeros)


def _fd_coeffs(order):
    # central second-order stencils for derivatives 1..4 (offsets -2..2)
    return {
        1: np.array([0, -0.5, 0, 0.5, 0]),
        2: np.array([0, 1, -2, 1, 0]),
        3: np.array([-0.5, 1, 0, -1, 0.5]),
        4: np.array([1, -4, 6, -4, 1]),
    }[order]


def _residual_on(r, f, m, stride, lo, hi):
    h = (r[1] - r[0]) * stride
    g = r * f
    # for N=3, Δ^m F = (rF)^{(2m)} / r
    idx = np.arange(2 * stride, len(r) - 2 * stride)
    idx = idx[(r[idx] >= lo) & (r[idx] <= hi)]
    if len(idx) == 0:
        raise ArgumentError("no interior grid points in the residual window")
    offs = np.arange(-2, 3) * stride
    stencil = lambda arr, k: sum(c * arr[idx + o] for c, o in zip(_fd_coeffs(k), offs)) / h**k
    lap_m = stencil(g, 2 * m) / r[idx]
    d1 = stencil(f, 1)
    res = (-1) ** (m + 1) * lap_m + r[idx] * d1 / (2 * m) + 3 * f[idx] / (2 * m)
    return float(np.max(np.abs(res)))


def ode_residual(table: KernelTable, rmin: float = 0.5, rmax: float | None = None):
    """Max residual of -(-Δ)^m F + r F'/(2m) + N F/(2m) = 0 by centred
    differences, plus an observed order from the same table at twice the step.

    Returns (residual, order).
    """
    if table.n != 3:
        raise ArgumentError("radial residual implemented for N=3")
    r, f = table.radii, table.values
    rmax = r[-1] if rmax is None else rmax
    h = r[1] - r[0]
    if 2 * table.m > 4:
        raise ArgumentError("finite-difference residual supports m <= 2")
    if h > 0.1 or np.count_nonzero((r >= rmin) & (r <= rmax)) < 8:
        raise ArgumentError(f"grid step {h:g} is too coarse for 2m-th differences (need <= 0.1)")
    lo = max(rmin, 4 * h)
    res = _residual_on(r, f, table.m, 1, lo, rmax - 4 * h)
    res2 = _residual_on(r, f, table.m, 2, lo, rmax - 4 * h)
    order = math.log2(res2 / res) if res > 0 and res2 > 0 else float("nan")
    return res, order

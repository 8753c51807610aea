"""Exact multivariate polynomials over the rationals.

Polynomials live in a fixed number of variables y1..yN.  Terms are keyed by
exponent tuples and iterated in descending graded-lex order (total degree
first, then lexicographic), which is also the order of the canonical text
form ``"c * y1^a y2^b + ..."``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from .errors import ArgumentError


def grlex_key(exps):
    return (sum(exps), tuple(exps))


def multi_indices(order: int, n: int):
    """All exponent tuples of total degree ``order`` in ``n`` variables,
    descending lex order (so (k,0,0) comes first)."""
    if order < 0 or n < 1:
        return []
    if n == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        for rest in multi_indices(order - first, n - 1):
            out.append((first,) + rest)
    return out


def multi_indices_upto(kmax: int, n: int):
    out = []
    for k in range(kmax + 1):
        out.extend(multi_indices(k, n))
    return out


def factorial_multi(beta) -> int:
    return math.prod(math.factorial(b) for b in beta)


def _as_fraction(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise ArgumentError(f"coefficient must be rational, got {type(c).__name__}")


class Poly:
    """Immutable polynomial with Fraction coefficients in ``n`` variables."""

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, terms=None, n: int = 3):
        if n < 1:
            raise ArgumentError("polynomial dimension must be >= 1")
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ArgumentError(f"exponent {exps} does not have {n} entries")
            if any(e < 0 for e in exps):
                raise ArgumentError(f"negative exponent in {exps}")
            c = _as_fraction(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self.n = n
        self._terms = clean
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, n=3):
        return cls({}, n)

    @classmethod
    def const(cls, c, n=3):
        return cls({(0,) * n: c}, n)

    @classmethod
    def var(cls, i, n=3):
        if not 0 <= i < n:
            raise ArgumentError(f"variable index {i} out of range for n={n}")
        e = [0] * n
        e[i] = 1
        return cls({tuple(e): 1}, n)

    @classmethod
    def monomial(cls, exps, coef=1):
        exps = tuple(exps)
        return cls({exps: coef}, len(exps))

    # access
    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        """(exponents, coefficient) pairs in descending graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    def coeff(self, exps) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def is_zero(self):
        return not self._terms

    def degree(self):
        # zero polynomial has degree -inf by convention
        if not self._terms:
            return -math.inf
        return max(sum(e) for e in self._terms)

    def homogeneous_part(self, d):
        return Poly({e: c for e, c in self._terms.items() if sum(e) == d}, self.n)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ArgumentError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        return Poly.const(_as_fraction(other), self.n)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self._terms)
        for e, c in other._terms.items():
            t[e] = t.get(e, Fraction(0)) + c
        return Poly(t, self.n)

    __radd__ = __add__

    def __neg__(self):
        return Poly({e: -c for e, c in self._terms.items()}, self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _as_fraction(other)
            return Poly({e: c * v for e, v in self._terms.items()}, self.n)
        other = self._coerce(other)
        t = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, Fraction(0)) + c1 * c2
        return Poly(t, self.n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _as_fraction(other)
        if not c:
            raise ZeroDivisionError("polynomial divided by zero")
        return self * (1 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ArgumentError("negative powers are not polynomials")
        out = Poly.const(1, self.n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.n == other.n and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(other, self.n)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    def evaluate(self, point):
        if len(point) != self.n:
            raise ArgumentError("point has wrong dimension")
        total = 0
        for e, c in self._terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    # text form
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mon = " ".join(
                f"y{i + 1}" if k == 1 else f"y{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            parts.append(f"{c} * {mon}" if mon else f"{c}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Poly({str(self)!r}, n={self.n})"

    @classmethod
    def parse(cls, text: str, n: int = 3):
        """Inverse of ``str``; accepts exactly the canonical form."""
        text = text.strip()
        if text == "0":
            return cls.zero(n)
        terms = {}
        for part in text.split(" + "):
            if " * " in part:
                cstr, mstr = part.split(" * ", 1)
            else:
                cstr, mstr = part, ""
            exps = [0] * n
            for tok in mstr.split():
                m = re.fullmatch(r"y(\d+)(?:\^(\d+))?", tok)
                if not m:
                    raise ArgumentError(f"bad monomial token {tok!r}")
                i = int(m.group(1)) - 1
                if not 0 <= i < n:
                    raise ArgumentError(f"variable {tok!r} outside dimension {n}")
                exps[i] += int(m.group(2) or 1)
            e = tuple(exps)
            terms[e] = terms.get(e, Fraction(0)) + Fraction(cstr)
        return cls(terms, n)


@dataclass(frozen=True)
class VecPoly:
    """N-component polynomial vector field in N variables."""

    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ArgumentError("empty vector field")
        n = comps[0].n
        if any(c.n != n for c in comps) or len(comps) != n:
            raise ArgumentError("vector field needs N components of dimension N")

    @property
    def n(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other):
        return VecPoly(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other):
        return VecPoly(tuple(a - b for a, b in zip(self, other)))

    def __mul__(self, c):
        return VecPoly(tuple(a * c for a in self))

    __rmul__ = __mul__

    def is_zero(self):
        return all(c.is_zero() for c in self)

    def to_strings(self):
        return [str(c) for c in self]

    @classmethod
    def from_strings(cls, items):
        n = len(items)
        return cls(tuple(Poly.parse(s, n) for s in items))

    @classmethod
    def of(cls, *components):
        return cls(tuple(components))


def differentiate(p: Poly, axis: int) -> Poly:
    if not 0 <= axis < p.n:
        raise ArgumentError(f"axis {axis} out of range for n={p.n}")
    t = {}
    for e, c in p.terms.items():
        k = e[axis]
        if k:
            e2 = list(e)
            e2[axis] = k - 1
            t[tuple(e2)] = c * k
    return Poly(t, p.n)


def gradient(p: Poly) -> VecPoly:
    return VecPoly(tuple(differentiate(p, i) for i in range(p.n)))


def laplacian(p: Poly) -> Poly:
    out = Poly.zero(p.n)
    for i in range(p.n):
        out = out + differentiate(differentiate(p, i), i)
    return out


def laplacian_power(p: Poly, m: int) -> Poly:
    """(-Δ)^m p."""
    if m < 0:
        raise ArgumentError("m must be non-negative")
    for _ in range(m):
        if p.is_zero():
            break
        p = -laplacian(p)
    return p


def divergence(v: VecPoly) -> Poly:
    out = Poly.zero(v.n)
    for i, c in enumerate(v):
        out = out + differentiate(c, i)
    return out


def euler_operator(p: Poly) -> Poly:
    """y·∇p; multiplies each monomial by its total degree."""
    return Poly({e: c * sum(e) for e, c in p.terms.items()}, p.n)


def derivative_multi(p: Poly, beta) -> Poly:
    for axis, k in enumerate(beta):
        for _ in range(k):
            p = differentiate(p, axis)
    return p


def gaussian_moment(beta, n: int | None = None) -> Fraction:
    """∫ y^β (4π)^{-N/2} e^{-|y|²/4} dy: each axis is a centred normal with
    variance 2, so an even exponent 2k contributes (2k)!/k!."""
    beta = tuple(beta)
    if n is not None and len(beta) != n:
        raise ArgumentError("multi-index length must equal N")
    out = Fraction(1)
    for b in beta:
        if b % 2:
            return Fraction(0)
        k = b // 2
        out *= Fraction(math.factorial(b), math.factorial(k))
    return out


@lru_cache(maxsize=None)
def _radial_power(k: int, n: int) -> Poly:
    r2 = Poly.zero(n)
    for i in range(n):
        r2 = r2 + Poly.var(i, n) ** 2
    return r2**k


@lru_cache(maxsize=None)
def _kernel_moment(beta, m: int) -> Fraction:
    n = len(beta)
    order = sum(beta)
    if order % (2 * m) or any(b % 2 for b in beta):
        return Fraction(0)
    j = order // (2 * m)
    # F̂(ξ) = exp(-|ξ|^{2m}) = Σ (-1)^j |ξ|^{2mj} / j!, and
    # ∫ y^β F = i^{|β|} ∂^β F̂(0) = (-1)^{mj} β! [ξ^β] F̂
    series_coeff = _radial_power(m * j, n).coeff(beta) * Fraction((-1) ** j, math.factorial(j))
    return (-1) ** (m * j) * factorial_multi(beta) * series_coeff


def kernel_moment(beta, m: int, n: int | None = None) -> Fraction:
    """Exact moment ∫ y^β F_m(y) dy of the kernel with symbol exp(-|ξ|^{2m})."""
    if m < 1:
        raise ArgumentError("m must be >= 1")
    beta = tuple(int(b) for b in beta)
    if n is not None and len(beta) != n:
        raise ArgumentError("multi-index length must equal N")
    return _kernel_moment(beta, m)


def integrate_against_kernel(p: Poly, m: int) -> Fraction:
    """∫ p F_m exactly, term by term."""
    return sum((c * kernel_moment(e, m) for e, c in p.terms.items()), Fraction(0))


def all_monomials(degree: int, n: int):
    return [Poly.monomial(e) for e in multi_indices(degree, n)]


def polys_from_coeff_vector(vec, basis_exps, n):
    return Poly({e: c for e, c in zip(basis_exps, vec)}, n)


__all__ = [
    "Poly", "VecPoly", "differentiate", "gradient", "laplacian", "laplacian_power",
    "divergence", "euler_operator", "derivative_multi", "gaussian_moment",
    "kernel_moment", "integrate_against_kernel", "multi_indices", "multi_indices_upto",
    "factorial_multi", "grlex_key", "all_monomials",
]

"""Generalized Hermite eigenpolynomials of the rescaled poly-harmonic operators.

The adjoint operator is B* = -(-Δ)^m - (1/2m) y·∇.  Its eigenpolynomials are

    p*_β = y^β + Σ_{j≥1} (1/j!) (-Δ)^{mj} y^β,      B* p*_β = -|β|/(2m) p*_β,

and ψ*_β = p*_β/√(β!).  The partner eigenfunctions of B are
ψ_β = (-1)^{|β|} D^β F / √(β!) with F the kernel of symbol exp(-|ξ|^{2m}).
Everything here is exact: coefficients are Fractions and the 1/√(β!)
factors are kept as surds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import ArgumentError
from .polyalg import (
    Poly, VecPoly, derivative_multi, divergence, euler_operator, factorial_multi,
    integrate_against_kernel, laplacian_power, multi_indices, multi_indices_upto,
)

SUPPORTED_M = (1, 2)
CONDITIONS = ("dual", "polynomial")


def _squarefree_split(k: int):
    """k = s² · r with r squarefree."""
    s, r = 1, 1
    d = 2
    while d * d <= k:
        while k % (d * d) == 0:
            k //= d * d
            s *= d
        if k % d == 0:
            k //= d
            r *= d
        d += 1
    return s, r * k


@dataclass(frozen=True)
class Surd:
    """coef · √radicand, radicand a squarefree positive integer."""

    coef: Fraction
    radicand: int = 1

    @classmethod
    def sqrt(cls, q):
        q = Fraction(q)
        if q < 0:
            raise ArgumentError("square root of a negative rational")
        if q == 0:
            return cls(Fraction(0), 1)
        # √(a/b) = √(ab)/b
        s, r = _squarefree_split(q.numerator * q.denominator)
        return cls(Fraction(s, q.denominator), r)

    def __post_init__(self):
        object.__setattr__(self, "coef", Fraction(self.coef))
        if self.coef == 0:
            object.__setattr__(self, "radicand", 1)

    def __mul__(self, other):
        if isinstance(other, Surd):
            s, r = _squarefree_split(self.radicand * other.radicand)
            return Surd(self.coef * other.coef * s, r)
        return Surd(self.coef * Fraction(other), self.radicand)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Surd):
            return self.coef == other.coef and self.radicand == other.radicand
        if isinstance(other, (int, Fraction)):
            return self.radicand == 1 and self.coef == other
        return NotImplemented

    def __hash__(self):
        return hash((self.coef, self.radicand))

    @property
    def is_rational(self):
        return self.radicand == 1

    def __float__(self):
        return float(self.coef) * math.sqrt(self.radicand)

    def __str__(self):
        if self.radicand == 1:
            return str(self.coef)
        return f"{self.coef}*sqrt({self.radicand})"


@dataclass(frozen=True)
class SpectralConfig:
    m: int = 1
    n: int = 3
    weight_param: Fraction | None = None

    def __post_init__(self):
        if self.m not in SUPPORTED_M:
            raise ArgumentError(f"m must be one of {SUPPORTED_M}, got {self.m}")
        if self.n < 1:
            raise ArgumentError("N must be >= 1")
        a = self.weight_param
        if a is None:
            a = Fraction(1, 4)
        a = Fraction(a)
        if a <= 0:
            raise ArgumentError("weight parameter must be positive")
        if self.m >= 2:
            from .kernel import wkbj_constants

            d0 = wkbj_constants(self.m, self.n).d0
            if not a < 2 * d0:
                raise ArgumentError(f"weight parameter must lie in (0, 2*d0) = (0, {2 * d0:.6f})")
        object.__setattr__(self, "weight_param", a)


@dataclass(frozen=True)
class EigenPair:
    index: tuple
    eigenvalue: Fraction
    adjoint_eigenfunction: Poly  # p*_β, without the 1/√(β!) factor
    normalization: Surd

    @property
    def order(self):
        return sum(self.index)


def eigenvalue(beta, cfg: SpectralConfig) -> Fraction:
    return Fraction(-sum(beta), 2 * cfg.m)


def adjoint_operator_apply(p, cfg: SpectralConfig):
    if isinstance(p, VecPoly):
        if p.n != cfg.n:
            raise ArgumentError(f"field dimension {p.n} does not match N={cfg.n}")
        return VecPoly(tuple(adjoint_operator_apply(c, cfg) for c in p))
    if p.n != cfg.n:
        raise ArgumentError(f"polynomial dimension {p.n} does not match N={cfg.n}")
    return -laplacian_power(p, cfg.m) - euler_operator(p) / (2 * cfg.m)


@lru_cache(maxsize=None)
def _hermite_poly(beta, m):
    term = Poly.monomial(beta)
    out = term
    j = 1
    while True:
        term = laplacian_power(term, m)  # now (-Δ)^{mj} y^β
        if term.is_zero():
            return out
        out = out + term / math.factorial(j)
        j += 1


def hermite_polynomial(beta, cfg: SpectralConfig) -> EigenPair:
    beta = tuple(int(b) for b in beta)
    if len(beta) != cfg.n or any(b < 0 for b in beta):
        raise ArgumentError(f"multi-index must have {cfg.n} non-negative entries")
    return EigenPair(
        index=beta,
        eigenvalue=eigenvalue(beta, cfg),
        adjoint_eigenfunction=_hermite_poly(beta, cfg.m),
        normalization=Surd.sqrt(Fraction(1, factorial_multi(beta))),
    )


def level_basis(k: int, cfg: SpectralConfig):
    """Unnormalized eigenpolynomials p*_β, |β| = k, in graded-lex order."""
    return [hermite_polynomial(b, cfg).adjoint_eigenfunction for b in multi_indices(k, cfg.n)]


def eigen_coordinates(p: Poly, k: int, cfg: SpectralConfig):
    """Coordinates of ``p`` in {p*_β : |β| = k}, or None if p is not in that span.

    p*_β has leading homogeneous part y^β, so the coordinates are read off the
    degree-k coefficients and then confirmed by exact reconstruction.
    """
    idx = multi_indices(k, cfg.n)
    coords = [p.coeff(b) for b in idx]
    recon = Poly.zero(cfg.n)
    for c, b in zip(coords, idx):
        if c:
            recon = recon + hermite_polynomial(b, cfg).adjoint_eigenfunction * c
    return coords if recon == p else None


def _rref_nullspace(rows, ncols):
    """Exact nullspace of a rational matrix; basis vectors ordered by pivot-free column."""
    mat = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -mat[i][fc]
        basis.append(v)
    return basis


def _rank(rows, ncols):
    return ncols - len(_rref_nullspace(rows, ncols)) if rows else 0


def _unknowns(k, n):
    # unknown c_{i,β}: coefficient of p*_β e_i; ordered by β (grlex desc) then i
    return [(i, b) for b in multi_indices(k, n) for i in range(n)]


def _constraint_rows(k, cfg: SpectralConfig, condition):
    n = cfg.n
    unknowns = _unknowns(k, n)
    col = {u: j for j, u in enumerate(unknowns)}
    rows = []
    if condition == "polynomial":
        # div Σ c_{iβ} p*_β e_i = Σ_γ [Σ_i (γ_i + 1) c_{i,γ+e_i}] p*_γ
        for g in multi_indices(k - 1, n):
            row = [Fraction(0)] * len(unknowns)
            for i in range(n):
                b = list(g)
                b[i] += 1
                row[col[(i, tuple(b))]] += g[i] + 1
            rows.append(row)
    elif condition == "dual":
        # partner field Σ c_{iβ} φ_β e_i with φ_β = (-1)^{|β|} D^β F has
        # div = -Σ_γ [Σ_{i: γ_i ≥ 1} c_{i,γ-e_i}] φ_γ
        for g in multi_indices(k + 1, n):
            row = [Fraction(0)] * len(unknowns)
            for i in range(n):
                if g[i]:
                    b = list(g)
                    b[i] -= 1
                    row[col[(i, tuple(b))]] += 1
            rows.append(row)
    else:
        raise ArgumentError(f"condition must be one of {CONDITIONS}")
    return unknowns, rows


def _field_from_coeffs(coeffs, unknowns, cfg):
    comps = [Poly.zero(cfg.n) for _ in range(cfg.n)]
    for c, (i, b) in zip(coeffs, unknowns):
        if c:
            comps[i] = comps[i] + hermite_polynomial(b, cfg).adjoint_eigenfunction * c
    return VecPoly(tuple(comps))


def field_coefficients(v: VecPoly, k: int, cfg: SpectralConfig):
    """Coefficient vector of ``v`` over p*_β e_i (|β| = k), or None."""
    per = []
    for comp in v:
        co = eigen_coordinates(comp, k, cfg)
        if co is None:
            return None
        per.append(dict(zip(multi_indices(k, cfg.n), co)))
    return [per[i][b] for i, b in _unknowns(k, cfg.n)]


def dual_divergence(v: VecPoly, k: int, cfg: SpectralConfig):
    """Coefficients (over φ_γ, |γ| = k+1) of the divergence of the partner
    field Σ c_{iβ} φ_β e_i.  Zero vector iff the partner is solenoidal."""
    coeffs = field_coefficients(v, k, cfg)
    if coeffs is None:
        raise ArgumentError("field components are not level-k eigenpolynomials")
    _, rows = _constraint_rows(k, cfg, "dual")
    return [-sum(a * c for a, c in zip(r, coeffs)) for r in rows]


@dataclass
class SolenoidalBasis:
    level: int
    fields: list
    config: SpectralConfig
    condition: str = "dual"
    coefficients: list = field(default_factory=list)

    def __len__(self):
        return len(self.fields)

    @property
    def eigenvalue(self):
        return Fraction(-self.level, 2 * self.config.m)

    def contains(self, v: VecPoly) -> bool:
        """Exact span membership."""
        coeffs = field_coefficients(v, self.level, self.config)
        if coeffs is None:
            return False
        ncols = len(coeffs)
        return _rank(self.coefficients + [coeffs], ncols) == _rank(self.coefficients, ncols)

    def is_solenoidal(self, v: VecPoly) -> bool:
        if self.condition == "polynomial":
            return divergence(v).is_zero()
        return all(c == 0 for c in dual_divergence(v, self.level, self.config))

    def to_json(self):
        return {
            "m": self.config.m,
            "N": self.config.n,
            "level": self.level,
            "condition": self.condition,
            "eigenvalue": frac_str(self.eigenvalue),
            "dimension": len(self.fields),
            "fields": [f.to_strings() for f in self.fields],
        }


def frac_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def solenoidal_basis(k: int, cfg: SpectralConfig, condition: str = "dual") -> SolenoidalBasis:
    """Basis of solenoidal level-k vector eigenfunctions of B*.

    ``condition="dual"`` (default) asks that the partner field of B built from
    the same coefficients be divergence free; for m=1, N=3 this space has
    dimension k(k+2).  ``condition="polynomial"`` asks for div v* = 0 on the
    polynomial itself, dimension (k+1)(k+3) for m=1, N=3.  Level 0 is the
    constant field [1,...,1] under the dual condition.
    """
    if k < 0:
        raise ArgumentError("level must be >= 0")
    if condition not in CONDITIONS:
        raise ArgumentError(f"condition must be one of {CONDITIONS}")
    n = cfg.n
    if k == 0 and condition == "dual":
        e = VecPoly(tuple(Poly.const(1, n) for _ in range(n)))
        return SolenoidalBasis(0, [e], cfg, condition, [[Fraction(1)] * n])
    if k == 0:
        unknowns = _unknowns(0, n)
        null = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    else:
        unknowns, rows = _constraint_rows(k, cfg, condition)
        null = _rref_nullspace(rows, len(unknowns))
    fields = [_field_from_coeffs(v, unknowns, cfg) for v in null]
    return SolenoidalBasis(k, fields, cfg, condition, null)


def biorthonormality_gram(kmax: int, cfg: SpectralConfig):
    """Matrix of ⟨ψ_β, ψ*_γ⟩ over all |β|, |γ| ≤ kmax (graded-lex order).

    ⟨(-1)^{|β|} D^β F, p*_γ⟩ = ∫ F D^β p*_γ after integrating by parts, so each
    entry is an exact kernel moment times 1/√(β!γ!).  Rows are β, columns γ.
    """
    if kmax < 0:
        raise ArgumentError("kmax must be >= 0")
    if kmax > 6:
        raise ArgumentError("kmax is limited to 6")
    idx = multi_indices_upto(kmax, cfg.n)
    pairs = [hermite_polynomial(b, cfg) for b in idx]
    gram = []
    for bp in pairs:
        row = []
        for gp in pairs:
            if sum(bp.index) > sum(gp.index):
                row.append(Surd(Fraction(0)))
                continue
            val = integrate_against_kernel(derivative_multi(gp.adjoint_eigenfunction, bp.index), cfg.m)
            row.append(bp.normalization * gp.normalization * val)
        gram.append(row)
    return gram


def is_identity(mat) -> bool:
    return all(
        (entry == 1) if i == j else (entry == 0)
        for i, row in enumerate(mat)
        for j, entry in enumerate(row)
    )


def shift_property_check(k: int, cfg: SpectralConfig) -> bool:
    """div(p*_β e_i) lies in the level-(k-1) eigenspace for every |β| = k, i."""
    if k < 1:
        raise ArgumentError("level must be >= 1")
    n = cfg.n
    for b in multi_indices(k, n):
        p = hermite_polynomial(b, cfg).adjoint_eigenfunction
        for i in range(n):
            comps = [Poly.zero(n)] * n
            comps[i] = p
            d = divergence(VecPoly(tuple(comps)))
            if d.is_zero():
                continue
            if eigen_coordinates(d, k - 1, cfg) is None:
                return False
    return True

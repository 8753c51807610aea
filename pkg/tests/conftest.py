from fractions import Fraction

import pytest
import sympy as sp

from vertexreg.polyalg import Poly, VecPoly

Y = sp.symbols("y1 y2 y3")

ACCEPTANCE = {}


def poly(expr, n=3):
    """Poly from a sympy expression string (independent parser)."""
    e = sp.expand(sp.sympify(expr, locals={f"y{i + 1}": Y[i] for i in range(n)}))
    terms = {}
    for mon, c in sp.Poly(e, *Y[:n]).terms():
        terms[tuple(mon)] = Fraction(int(sp.numer(c)), int(sp.denom(c)))
    return Poly(terms, n)


def vec(*exprs):
    return VecPoly(tuple(poly(e) for e in exprs))


def to_sympy(p: Poly):
    out = sp.Integer(0)
    for exps, c in p.items():
        term = sp.Rational(c.numerator, c.denominator)
        for y, e in zip(Y, exps):
            term *= y**e
        out += term
    return out


@pytest.fixture(scope="session")
def table_m2():
    from vertexreg.kernel import kernel_table

    return kernel_table(10.0, 1001, m=2)


@pytest.fixture(scope="session")
def pdelta_run():
    from vertexreg.blowup import ShootingConfig, find_p_delta

    cfg = ShootingConfig()
    return cfg, find_p_delta(cfg, full=True)


@pytest.fixture(scope="session")
def profile(pdelta_run):
    from vertexreg.blowup import shoot

    cfg, r = pdelta_run
    return shoot(r.p_delta, cfg, r.amplitude, dense=True)


@pytest.fixture
def record(request):
    def _record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE, key=lambda s: (int("".join(ch for ch in s if ch.isdigit())), s)):
        terminalreporter.write_line(ACCEPTANCE[k])

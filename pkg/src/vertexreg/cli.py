"""vertexreg command line: one subcommand per analysis."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import report
from .errors import ArgumentError, NumericError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Result:
    """What a subcommand hands to the emitter."""

    def __init__(self, data, table=None, header=None, figure=None, exit_code=EXIT_OK, extra=None):
        self.data = data
        self.table = table or []
        self.header = header
        self.figure = figure  # dict of svg_text kwargs
        self.exit_code = exit_code
        self.extra = extra or []  # (path, text) side files


def _floats(text, n=None):
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise ArgumentError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise ArgumentError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


# ---------------------------------------------------------------- subcommands

def cmd_hermite(a):
    from .hermite import SpectralConfig, solenoidal_basis

    if a.k < 0:
        raise ArgumentError("--k must be non-negative")
    cfg = SpectralConfig(m=a.m)
    basis = solenoidal_basis(a.k, cfg, a.condition)
    rows = []
    for i, f in enumerate(basis.fields):
        for j, comp in enumerate(f.to_strings()):
            rows.append((i, j + 1, comp))
    dims = [len(solenoidal_basis(k, cfg, a.condition)) for k in range(a.k + 1)]
    fig = {"series": [(list(range(a.k + 1)), dims, f"m={a.m}, {a.condition}")],
           "xlabel": "level k", "ylabel": "dimension", "title": "solenoidal eigenspace dimensions"}
    return Result(basis.to_json(), rows, ["field", "component", "polynomial"], fig)


def cmd_kernel(a):
    from .kernel import gaussian_profile, kernel_table, ode_residual, wkbj_constants, wkbj_fit

    tol = a.tol if a.tol is not None else 1e-13
    tab = kernel_table(a.rmax, a.steps, a.m, 3, tol)
    data = {"m": a.m, "rmax": a.rmax, "steps": a.steps, "quadrature_tol": tol,
            "normalization_residual": tab.normalization_residual}
    if a.m == 2:
        w = wkbj_constants(2)
        fit = wkbj_fit(tab, rmin=a.fit_rmin)
        env = fit.envelope(tab.radii)
        data["constants"] = w.to_json()
        data["fit"] = {"d0_hat": fit.d0_hat, "b0_hat": fit.b0_hat, "delta": fit.delta,
                       "d0_rel_error": fit.d0_hat / w.d0 - 1, "b0_rel_error": fit.b0_hat / w.b0 - 1,
                       "zeros": list(fit.zeros)}
    else:
        env = gaussian_profile(tab.radii)
    if tab.step <= 0.1:
        res, order = ode_residual(tab)
        data["ode_residual"] = res
        data["ode_residual_order"] = order
    rows = list(zip(tab.radii, tab.values, env))
    fig = {"series": [(tab.radii, tab.values, "F"), (tab.radii, env, "envelope")],
           "xlabel": "r", "ylabel": "F(r)", "title": f"rescaled kernel, m={a.m}"}
    return Result(data, rows, report.CSV_HEADERS["kernel"], fig)


def cmd_bl(a):
    from .boundary_layer import run

    s_end = a.send if a.send is not None else (20.0 if a.m == 1 else 200.0)
    ds = a.ds if a.ds is not None else (0.01 if a.m == 1 else 0.05)
    h = a.h if a.h is not None else (0.02 if a.m == 1 else 0.05)
    data0 = a.data if a.data is not None else ("step" if a.m == 1 else "smooth")
    r = run(a.m, s_end, ds, h, data0, scheme=a.scheme, window=a.window)
    every = max(1, len(r.s) // a.rows)
    idx = list(range(0, len(r.s), every))
    if idx[-1] != len(r.s) - 1:
        idx.append(len(r.s) - 1)
    rows = [(r.s[i], r.sup_err[i], r.lyapunov[i]) for i in idx]
    data = {"m": a.m, "s_end": float(r.state.s), "ds": ds, "h": h, "data": data0, "scheme": a.scheme,
            "final_sup_error": float(r.sup_err[-1]), "lyapunov_monotone": r.lyapunov_monotone,
            "overshoot": float(r.state.overshoot)}
    fig = {"series": [(r.s, r.sup_err, "sup error")], "xlabel": "s", "ylabel": "sup error",
           "title": f"boundary layer convergence, m={a.m}", "logy": True}
    return Result(data, rows, report.CSV_HEADERS["bl"], fig)


def _shape(a):
    from .regularity import Constant, PowLog, SqrtLog

    if a.family == "sqrtlog":
        return SqrtLog(a.param)
    if a.family == "powlog":
        return PowLog(a.param, a.q)
    return Constant(a.param)


def _params(a, gamma_nl=None):
    from .regularity import GAMMA1_RADIAL, DynSysParams

    g1 = a.gamma1 if a.gamma1 is not None else GAMMA1_RADIAL
    gnl = a.gammanl if gamma_nl is None else gamma_nl
    return DynSysParams(m=a.m, N=3, gamma1=g1, gamma_nl=gnl)


def _trajectory_rows(traj, phi, params):
    from .regularity import _E, convection_ratio, system_terms, time_change

    ratio = convection_ratio(traj, phi, params)
    s = time_change(phi, traj.tau, params.m) if params.m == 1 else np.full(len(traj.tau), np.nan)
    rows = []
    for i, (t, c) in enumerate(zip(traj.tau, traj.c)):
        L, Q = system_terms(phi, t, params)
        n = float(np.linalg.norm(c))
        rows.append((t, n, abs(L) * n, abs(Q) * abs(float(c @ _E)) * n, ratio[i], s[i]))
    return rows


def _run_pair(a, phi):
    from .regularity import integrate_system

    c0 = _floats(a.c0, 3)
    span = (a.tau0, a.tauend)
    if not span[0] < span[1]:
        raise ArgumentError("--tau0 must be below --tauend")
    rtol = a.tol if a.tol is not None else 1e-12
    full = integrate_system(phi, _params(a), c0, span, rtol=rtol)
    lin = integrate_system(phi, _params(a, 0.0), c0, span, rtol=rtol)
    return full, lin


def cmd_criterion(a):
    from .regularity import Verdict, classify, convection_negligibility

    phi = _shape(a)
    verdict = classify(phi, a.m, _params(a), tau_max=a.taumax)
    full, lin = _run_pair(a, phi)
    ok, ratio = convection_negligibility(full, phi, a.m, _params(a))
    data = verdict.to_json()
    data["shape"] = phi.label
    data["trajectory"] = {"tau0": a.tau0, "tau_end": a.tauend, "status": full.status,
                          "final_norm": float(full.norm[-1]), "final_norm_linear": float(lin.norm[-1]),
                          "convection_negligible": ok}
    code = EXIT_INCONCLUSIVE if verdict.verdict == Verdict.INCONCLUSIVE else EXIT_OK
    rows = _trajectory_rows(full, phi, _params(a))
    fig = {"series": [(full.tau, full.norm, "|c0|"), (lin.tau, lin.norm, "|c0| linear")],
           "xlabel": "tau", "ylabel": "|c0|", "title": f"{phi.label}: {verdict.verdict.value}", "logy": True}
    return Result(data, rows, report.CSV_HEADERS["regularity"], fig, exit_code=code)


def cmd_odesys(a):
    from .regularity import convection_negligibility

    phi = _shape(a)
    full, lin = _run_pair(a, phi)
    ok, ratio = convection_negligibility(full, phi, a.m, _params(a))
    data = {"shape": phi.label, "m": a.m, "gamma_nl": a.gammanl, "tau0": a.tau0, "tau_end": a.tauend,
            "status": full.status, "final_norm": float(full.norm[-1]),
            "final_norm_linear": float(lin.norm[-1]),
            "final_difference": abs(float(full.norm[-1] - lin.norm[-1])),
            "final_ratio": float(ratio[-1]), "convection_negligible": ok}
    rows = _trajectory_rows(full, phi, _params(a))
    fig = {"series": [(full.tau, np.maximum(ratio, 1e-300), "convection / linear")],
           "xlabel": "tau", "ylabel": "ratio", "title": "convection negligibility", "logy": True}
    return Result(data, rows, report.CSV_HEADERS["regularity"], fig)


def cmd_shoot(a):
    from .blowup import ShootingConfig, find_p_delta, mass_constant, profile_residual, shoot

    lo, hi = _floats(a.bracket, 2)
    cfg = ShootingConfig(y_far=a.yfar, tol=a.tol if a.tol is not None else 1e-10,
                         bracket=(lo, hi), tail=a.tail)
    r = find_p_delta(cfg, full=True)
    sol = shoot(r.p_delta, cfg, r.amplitude, dense=True)
    mass = mass_constant(sol, full=True)
    data = {"p_delta": r.p_delta, "y_far": cfg.y_far, "tol": cfg.tol, "D": mass["D"],
            "tail": cfg.tail, "bundle_amplitude": sol.bundle_amplitude,
            "mass_tail_fraction": mass["tail_fraction"], "ode_residual": profile_residual(sol),
            "v0": float(sol.origin[0]), "v2_0": float(sol.origin[2]),
            "sign_changes": [{k: v for k, v in x.items()} for x in r.refined]}
    rows = [(p, m) for p, _, m in r.table]
    y, u = sol.grid(801)
    fig = {"series": [(y, u[0], f"v, p={r.p_delta:.6f}")], "xlabel": "y", "ylabel": "v(y)",
           "title": "self-similar blow-up profile"}
    extra = []
    if a.profile_out:
        prow = [(yy, *u[:, i]) for i, yy in enumerate(y)]
        extra.append((a.profile_out, report.csv_text(report.CSV_HEADERS["profile"], prow)))
    return Result(data, rows, report.CSV_HEADERS["shoot"], fig, extra=extra)


def cmd_constants(a):
    from .blowup import A0, burnett_bundle_asymptotics, leray_tail_exponent, tail_exclusion_report
    from .kernel import critical_constant_exact, wkbj_constants

    cstar = critical_constant_exact(2, 3)
    data = {"wkbj": {str(m): wkbj_constants(m).to_json() for m in (1, 2)},
            "critical_constant": float(cstar), "critical_constant_exact": str(cstar),
            "bundle_rate_a0": A0, "burnett_bundle_power": burnett_bundle_asymptotics(3)["delta"],
            "leray_tail_exponent": {str(m): leray_tail_exponent(m) for m in (1, 2)},
            "tail_exclusion": tail_exclusion_report()}
    w = wkbj_constants(2)
    rows = [("d0", w.d0), ("b0", w.b0), ("delta0", w.delta0), ("critical_constant", float(cstar)),
            ("a0", A0), ("leray_tail_exponent_m2", leray_tail_exponent(2))]
    return Result(data, rows, ["name", "value"], None)


# ---------------------------------------------------------------- parser

def _shared(p):
    p.add_argument("--emit", choices=("csv", "json", "svg"), default="json", help="output format")
    p.add_argument("--out", default=None, help="output path (stdout if omitted); csv/json runs "
                   "also render the figure next to it as .svg")
    p.add_argument("--tol", type=float, default=None, help="numerical tolerance where applicable")
    p.add_argument("--no-figure", action="store_true", help="skip the figure beside --out")


def _shape_flags(p, m_default=1):
    p.add_argument("--m", type=int, choices=(1, 2), default=m_default)
    p.add_argument("--family", choices=("sqrtlog", "powlog", "const"), default="sqrtlog")
    p.add_argument("--param", type=float, default=2.0, help="c for sqrtlog/const, C for powlog")
    p.add_argument("--q", type=float, default=0.75, help="power of ln(tau) for powlog")
    p.add_argument("--gamma1", type=float, default=None, help="flux coefficient (default 1/(4 sqrt(pi)))")
    p.add_argument("--gammanl", type=float, default=1.0, help="convection strength")
    p.add_argument("--c0", default="0.5,0.3,0.2", help="initial inner amplitude c0(tau0)")
    p.add_argument("--tau0", type=float, default=20.0, help="start of the trajectory")
    p.add_argument("--tauend", type=float, default=60.0, help="end of the trajectory")


def build_parser():
    top = _Parser(prog="vertexreg", description="Regularity of a paraboloid vertex for "
                  "higher-order parabolic and fluid equations.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hermite", help="solenoidal generalized Hermite eigenspaces of the rescaled adjoint operator")
    p.add_argument("--m", type=int, choices=(1, 2), default=1, help="1: Navier-Stokes, 2: Burnett")
    p.add_argument("--k", type=int, default=2, help="polynomial level")
    p.add_argument("--condition", choices=("dual", "polynomial"), default="dual")
    _shared(p)
    p.set_defaults(func=cmd_hermite)

    p = sub.add_parser("kernel", help="oscillatory rescaled kernel of the poly-harmonic operator and its WKBJ tail")
    p.add_argument("--m", type=int, choices=(1, 2), default=2)
    p.add_argument("--rmax", type=float, default=10.0)
    p.add_argument("--steps", type=int, default=1001)
    p.add_argument("--fit-rmin", type=float, default=3.0)
    _shared(p)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("bl", help="boundary-layer evolution toward the stationary profile, with Lyapunov values")
    p.add_argument("--m", type=int, choices=(1, 2), default=1)
    p.add_argument("--send", type=float, default=None)
    p.add_argument("--ds", type=float, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--data", choices=("step", "smooth", "profile"), default=None)
    p.add_argument("--scheme", choices=("implicit", "crank-nicolson", "explicit"), default="implicit")
    p.add_argument("--window", type=float, default=None, help="sup error taken on eta <= window")
    p.add_argument("--rows", type=int, default=400, help="approximate number of CSV rows")
    _shared(p)
    p.set_defaults(func=cmd_bl)

    p = sub.add_parser("criterion", help="Petrovskii-type integral test for vertex regularity (exit 3 if inconclusive)")
    _shape_flags(p)
    p.add_argument("--taumax", type=float, default=1e8, help="classification horizon")
    _shared(p)
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("odesys", help="amplitude dynamics of the first Hermite mode with and without convection")
    _shape_flags(p)
    _shared(p)
    p.set_defaults(func=cmd_odesys)

    p = sub.add_parser("shoot", help="self-similar blow-up profile of the semilinear bi-harmonic equation, N=1")
    p.add_argument("--bracket", default="1.2,1.6", help="p_lo,p_hi")
    p.add_argument("--yfar", type=float, default=10.0)
    p.add_argument("--tail", choices=("nonlinear", "linear"), default="nonlinear")
    p.add_argument("--profile-out", default=None, help="CSV dump of the converged profile")
    _shared(p)
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("constants", help="WKBJ constants, critical constant, bundle and tail exponents")
    _shared(p)
    p.set_defaults(func=cmd_constants)
    return top


def emit(res: Result, fmt: str, out, figure=True, stream=None):
    if fmt == "svg":
        if res.figure is None:
            raise ArgumentError("this subcommand has no figure")
        report.write(report.svg_text(**res.figure), out, stream)
    elif fmt == "csv":
        report.write(report.csv_text(res.header, res.table), out, stream)
    else:
        report.write(report.json_text(res.data), out, stream)
    if out is not None and fmt != "svg" and figure and res.figure is not None:
        report.write(report.svg_text(**res.figure), Path(out).with_suffix(".svg"))
    for path, text in res.extra:
        report.write(text, path)


def run(argv=None, stream=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        res = a.func(a)
        emit(res, a.emit, a.out, not a.no_figure, stream)
    except ArgumentError as e:
        print(f"vertexreg: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, OSError) as e:
        print(f"vertexreg: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return res.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

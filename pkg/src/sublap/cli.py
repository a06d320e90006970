"""Command-line front end: solve, angular, curve, classify, verify, plot.

Every command reads one strict-schema YAML config, writes its artifacts
under the output directory, and stamps each file with the config hash.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import io as sio
from . import plotting
from .angular import (AngularError, OutOfRegimeError, build_antisymmetric,
                      build_symmetric, eigencurve, find_Tstar, glue_jumps)
from .boundary import boundary_data
from .config import ConfigError, RunConfig, load_config
from .extension import SolverError, assemble, build_mesh, residual, solve_nonlinear
from .functionals import DegenerateMassError, curve
from .nodal import classify, trace_nodal_points
from .params import derive_exponents
from .verify import ALL_CHECKS, CHECK_NAMES, run_checks

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _outdir(cfg: RunConfig, args) -> str:
    out = args.out if args.out else cfg.io.outdir
    os.makedirs(out, exist_ok=True)
    return out


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("this command requires --config PATH")
    return load_config(args.config)


def _mesh_for(cfg: RunConfig):
    d = derive_exponents(cfg.parameters)
    m = cfg.mesh
    return build_mesh(L=m.L, Y=m.Y, nx=m.nx, my=m.my, gamma=m.gamma, a=d.a), d


def cmd_solve(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg, args)
    mesh, d = _mesh_for(cfg)
    data = boundary_data(cfg.data, cfg.parameters, d, cfg.mesh.L)
    system = assemble(mesh)
    s = cfg.solver
    fld, rep = solve_nonlinear(system, cfg.parameters, data, omega=s.omega,
                               tol=s.tol, max_iter=s.max_iter, eps=s.eps,
                               cg_tol=s.cg_tol)
    sio.save_field(os.path.join(out, "field.dat"), fld, cfg.sha256)
    sio.save_json(os.path.join(out, "report.json"),
                  dataclasses.asdict(rep), cfg.sha256)
    if "csv" in cfg.io.formats:
        sio.save_trace_csv(os.path.join(out, "trace.csv"), fld, cfg.sha256)
    if "svg" in cfg.io.formats:
        plotting.plot_field(fld, os.path.join(out, "field.svg"), cfg.sha256)
    print(f"solve: {'converged' if rep.converged else 'NOT CONVERGED'} in "
          f"{rep.iterations} iterations, final change {rep.final_change:.3g}; "
          f"wrote {out}/field.dat")
    if not rep.converged and not args.allow_nonconverged:
        print("solve: non-convergence is an error without "
              "--allow-nonconverged", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_angular(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg, args)
    p = cfg.parameters
    d = derive_exponents(p)
    constants: dict = {"a": d.a, "k_q": d.k_q, "beta_q": d.beta_q, "mu": d.mu}

    prof1 = build_antisymmetric(p, d) if p.lambda_plus == p.lambda_minus else None
    prof2 = build_symmetric(p, d)
    t_star = prof2.glue_points[0]
    constants["T_star"] = t_star
    constants["A2"] = prof2.amplitude
    constants["glue_jumps_2"] = {f"{g:.12g}": j
                                 for g, j in glue_jumps(prof2).items()}
    profiles = [("phi2", prof2)]
    if prof1 is not None:
        constants["A1"] = prof1.amplitude
        constants["endpoint_defects_1"] = list(prof1.endpoint_defect(p))
        profiles.insert(0, ("phi1", prof1))
    else:
        constants["A1"] = None
        constants["note"] = ("antisymmetric profile skipped: requires "
                             "lambda_plus == lambda_minus")
    constants["endpoint_defects_2"] = list(prof2.endpoint_defect(p))

    for label, prof in profiles:
        path = os.path.join(out, f"{label}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(sio._json_line("# sublap-profile 1 ",
                                    {"config": cfg.sha256, "mu": prof.mu,
                                     "a": prof.a, "symmetry": prof.symmetry}))
            fh.write("theta,phi,w\n")
            for t, ph, w in zip(prof.theta, prof.phi, prof.w):
                fh.write(f"{t:.17g},{ph:.17g},{w:.17g}\n")

    if cfg.analysis.eigencurve is not None:
        kind, ts = cfg.analysis.eigencurve
        sweep = eigencurve(d.a, ts, kind=kind)
        path = os.path.join(out, "eigencurve.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(sio._json_line("# sublap-eigencurve 1 ",
                                    {"config": cfg.sha256, "a": d.a,
                                     "kind": kind}))
            fh.write("T,lambda_hat,k1\n")
            for t, lam, k1 in zip(sweep["T"], sweep["lambda_hat"], sweep["k1"]):
                fh.write(f"{t:.17g},{lam:.17g},{k1:.17g}\n")
        if "svg" in cfg.io.formats:
            plotting.plot_eigencurve(
                sweep["T"], sweep["k1"], os.path.join(out, "eigencurve.svg"),
                cfg.sha256, marks=[("T*", t_star, d.k_q)])

    sio.save_json(os.path.join(out, "constants.json"), constants, cfg.sha256)
    if "svg" in cfg.io.formats:
        plotting.plot_profiles(profiles, os.path.join(out, "profiles.svg"),
                               cfg.sha256)
    built = " and ".join(label for label, _ in profiles)
    print(f"angular: built {built}; T*={t_star:.12g}; wrote {out}/constants.json")
    return EXIT_OK


def cmd_curve(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg, args)
    fld = sio.load_field(args.field)
    p = fld.params if fld.params is not None else cfg.parameters
    d = derive_exponents(p)
    x0 = cfg.analysis.x0 if args.x0 is None else float(args.x0)
    pairs = cfg.analysis.pairs
    if pairs is None:
        pairs = ((d.k_q, 2.0), (d.k_q, p.q))
    crv = curve(fld, x0, np.asarray(cfg.analysis.radii), p, pairs=pairs,
                ntheta=cfg.analysis.ntheta,
                derivative_dr=cfg.analysis.derivative_dr)
    if "csv" in cfg.io.formats:
        sio.save_curve_csv(os.path.join(out, "curve.csv"), crv, cfg.sha256)
    if "svg" in cfg.io.formats:
        plotting.plot_curve(crv, os.path.join(out, "curve.svg"), cfg.sha256)
    print(f"curve: {len(crv.radii)} radii about x0={x0:g}; wrote {out}/curve.csv")
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg, args)
    fld = sio.load_field(args.field)
    p = fld.params if fld.params is not None else cfg.parameters
    d = derive_exponents(p)
    points = trace_nodal_points(fld)
    alarms = [pt for pt in points if pt.kind == "interval-endpoint"]
    classified = []
    for pt in points:
        if pt.kind == "interval-endpoint":
            classified.append(pt)
            continue
        try:
            classified.append(classify(fld, pt.x0, p, d,
                                       tol=cfg.analysis.order_tol,
                                       r_window=cfg.analysis.window,
                                       ntheta=cfg.analysis.ntheta))
        except ValueError:
            classified.append(pt)  # window empty: keep the located kind
    payload = {"points": [dataclasses.asdict(pt) for pt in classified],
               "zero_interval_alarms": len(alarms),
               "parameters": sio._params_dict(p),
               "k_q": d.k_q, "beta_q": d.beta_q}
    if "json" in cfg.io.formats:
        sio.save_json(os.path.join(out, "nodal.json"), payload, cfg.sha256)
    if "csv" in cfg.io.formats:
        path = os.path.join(out, "nodal.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(sio._json_line("# sublap-nodal 1 ",
                                    {"config": cfg.sha256}))
            fh.write("x0,kind,order,order_gap,stratum,candidates,"
                     "tangent_coefficient\n")
            for pt in classified:
                row = [f"{pt.x0:.17g}", pt.kind,
                       "" if pt.order is None else f"{pt.order:.17g}",
                       "" if pt.order_gap is None else f"{pt.order_gap:.17g}",
                       pt.stratum or "", "|".join(pt.candidates),
                       "" if pt.tangent_coefficient is None
                       else f"{pt.tangent_coefficient:.17g}"]
                fh.write(",".join(row) + "\n")
    if "svg" in cfg.io.formats:
        plotting.plot_trace(fld, os.path.join(out, "nodal.svg"), cfg.sha256,
                            points=classified)
    msg = f"classify: {len(classified)} nodal points"
    if alarms:
        msg += f"; RED ALERT: {len(alarms)} zero-interval endpoints"
    print(msg + f"; wrote {out}/nodal.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.list:
        for name in CHECK_NAMES:
            print(name)
        return EXIT_OK
    names = args.only if args.only else None
    results = run_checks(names)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failed += 0 if r.passed else 1
        print(f"{status}  {r.name:<{width}}  {r.detail}")
    print(f"verify: {len(results) - failed}/{len(results)} checks passed")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        sio.save_json(os.path.join(args.out, "verify.json"),
                      {"results": [dataclasses.asdict(r) for r in results]})
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


def cmd_plot(args) -> int:
    cfg = _load(args)
    out = _outdir(cfg, args)
    fld = sio.load_field(args.field)
    plotting.plot_field(fld, os.path.join(out, "field.svg"), cfg.sha256)
    plotting.plot_trace(fld, os.path.join(out, "trace.svg"), cfg.sha256)
    print(f"plot: wrote {out}/field.svg and {out}/trace.svg")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sublap",
        description="Extension-problem laboratory: weighted solver, radial "
                    "functionals, angular profiles, nodal classification.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, field=False, x0=False):
        sp.add_argument("--config", help="path to the YAML run configuration")
        sp.add_argument("--out", help="output directory (overrides io.outdir)")
        if field:
            sp.add_argument("--field", required=True,
                            help="path to a stored field file")
        if x0:
            sp.add_argument("--x0", default=None,
                            help="trace point (overrides analysis.x0)")

    sp = sub.add_parser("solve", help="run the nonlinear extension solve")
    common(sp)
    sp.add_argument("--allow-nonconverged", action="store_true",
                    help="exit 0 even when the fixed point did not converge")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("angular", help="build homogeneous angular profiles")
    common(sp)
    sp.set_defaults(func=cmd_angular)

    sp = sub.add_parser("curve", help="radial functional table for a field")
    common(sp, field=True, x0=True)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("classify", help="locate and classify trace zeros")
    common(sp, field=True)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("verify", help="run the acceptance checks")
    sp.add_argument("--config", help="(unused; checks fix their own runs)")
    sp.add_argument("--out", help="directory for verify.json")
    sp.add_argument("--list", action="store_true",
                    help="list check names without running")
    sp.add_argument("--only", nargs="*", help="subset of checks to run")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("plot", help="render a stored field to SVG")
    common(sp, field=True)
    sp.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, AngularError, OutOfRegimeError,
            DegenerateMassError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

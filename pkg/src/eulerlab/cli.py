"""Command-line driver with the five experiment subcommands.

Exit codes: 0 success, 1 runtime failure, 2 physics-domain error
(detachment, subsonic inflow, vacuum, positivity loss), 64 usage or
configuration error, 66 missing input.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import diagnostics, exact_fields, fv_solver, gas, io, riemann, simgrid
from .config import ExperimentConfig
from .errors import (ConfigError, DetachmentError, EulerLabError,
                     InvalidStateError, PositivityError, SubsonicInflowError,
                     VacuumError)

EX_OK, EX_FAIL, EX_PHYSICS, EX_USAGE, EX_NOINPUT = 0, 1, 2, 64, 66

RH_TOL = 1e-10
EEF_TOL = 1e-12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _add_config_flags(parser):
    parser.add_argument("--config", metavar="FILE", help="key = value configuration file")
    for f in dataclasses.fields(ExperimentConfig):
        parser.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name,
                            default=None, metavar="V")


def _load_config(args) -> ExperimentConfig:
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(args.config)
        cfg = ExperimentConfig.from_file(path)
    else:
        cfg = ExperimentConfig()
    overrides = {f.name: getattr(args, f.name)
                 for f in dataclasses.fields(ExperimentConfig)
                 if getattr(args, f.name, None) is not None}
    cfg.apply(overrides)
    cfg.validate()
    return cfg


def _interfaces_ok(rows) -> bool:
    return all(r["rh_rel"] <= RH_TOL and r["eef_jump"] <= EEF_TOL * r["eef_scale"]
               and r["admissible"] for r in rows)


def _build_spec(cfg: ExperimentConfig):
    g = cfg.gas_model()
    return exact_fields.build_solution_T(cfg.inflow_state(g), cfg.alpha, g,
                                         stagnation_density=cfg.stagnation_rho)


def cmd_build_ic(args) -> int:
    cfg = _load_config(args)
    spec = _build_spec(cfg)
    rows = exact_fields.verify_interfaces(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_solution_spec(out, spec)
    report = Path(args.report) if args.report else out.with_suffix(".report.csv")
    io.write_interface_report(report, rows)
    ok = _interfaces_ok(rows)
    print(f"sigma = {math.degrees(spec.sigma):.6f} deg for "
          f"alpha = {math.degrees(spec.alpha):.6f} deg")
    if cfg.alpha_deg == 0.0:
        print("note: zero deflection, shocks are zero-strength (uniform flow)")
    for r in rows:
        print(f"  interface {r['angle_deg']:+9.4f} deg {r['kind']:8s} "
              f"rh_rel={r['rh_rel']:.3e} eef={r['eef_jump']:.3e} "
              f"admissible={r['admissible']}")
    print(f"wrote {out} and {report}; all interfaces admissible: {ok}")
    return EX_OK if ok else EX_FAIL


def cmd_verify_t(args) -> int:
    path = Path(args.specfile)
    if not path.exists():
        raise FileNotFoundError(args.specfile)
    spec = io.read_solution_spec(path)
    rows = exact_fields.verify_interfaces(spec)
    if args.report:
        io.write_interface_report(args.report, rows)
    print("angle_deg,kind,rh_rel,eef_jump,admissible")
    for r in rows:
        print(f"{r['angle_deg']!r},{r['kind']},{r['rh_rel']!r},"
              f"{r['eef_jump']!r},{int(r['admissible'])}")
    return EX_OK if _interfaces_ok(rows) else EX_FAIL


def _build_mesh(cfg: ExperimentConfig, spec):
    corners = cfg.domain_corners()
    if cfg.mesh_kind == "aligned":
        return simgrid.aligned_mesh_for_T(
            spec, (cfg.n_radial, cfg.n_angular), domain=corners)
    mesh = simgrid.build_domain_mesh(corners, cfg.nx, cfg.ny)
    for _ in range(cfg.refine_levels):
        f0 = fv_solver.initialize_from_field(spec.field, mesh, t0=cfg.t0)
        marked = simgrid.mark_density_jumps(mesh, f0.u, spec.model,
                                            threshold=cfg.refine_threshold)
        if not marked:
            break
        mesh = simgrid.refine(mesh, marked)
    return mesh


def cmd_run(args) -> int:
    cfg = _load_config(args)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = _build_spec(cfg)
    mesh = _build_mesh(cfg, spec)
    ok, margin = simgrid.check_supersonic_boundary(mesh, spec.field, spec.model)
    if not ok:
        raise ConfigError(
            f"domain boundary is not supersonic in xi (margin {margin:.1f} m/s); "
            "enlarge the domain so every side outruns max(|v|+c)")
    cfg.to_file(outdir / "config.txt")
    io.write_solution_spec(outdir / "solution_t.txt", spec)
    io.write_interface_report(outdir / "ic_report.csv", exact_fields.verify_interfaces(spec))
    io.write_mesh(outdir / "mesh.txt", mesh)

    f0 = fv_solver.initialize_from_field(spec.field, mesh, t0=cfg.t0)
    boundary = fv_solver.BoundarySpec(spec.field)
    t_wall = time.perf_counter()
    error_note = ""
    try:
        report = fv_solver.run(
            f0, mesh, boundary, t_end=cfg.t_end, residual_tol=cfg.residual_tol,
            max_steps=cfg.max_steps, flux=cfg.flux, order=cfg.order, cfl=cfg.cfl,
            snapshot_every=cfg.snapshot_every or None, track_entropy=True)
    except EulerLabError as exc:
        error_note = f"{type(exc).__name__}: {exc}"
        (outdir / "report.txt").write_text(f"error = {error_note}\n")
        print(f"run failed: {error_note}", file=sys.stderr)
        return EX_FAIL

    snaps = report.snapshots if report.snapshots else [report.final]
    if snaps[-1] is not report.final:
        snaps = snaps + [report.final]
    for k, state in enumerate(snaps):
        io.write_snapshot_csv(outdir / f"snapshot_{k:04d}.csv", mesh, state)
        io.write_snapshot_vtk(outdir / f"snapshot_{k:04d}.vtk", mesh, state)
    io.write_table(outdir / "residuals.csv", "step,residual",
                   [(k, float(r)) for k, r in enumerate(report.residuals)])

    result = diagnostics.classify(report.final, mesh, spec)
    lines = [
        f"cells = {mesh.num_cells}",
        f"steps = {report.steps}",
        f"converged = {int(report.converged)}",
        f"final_t = {report.final.t!r}",
        f"final_residual = {float(report.residuals[-1])!r}",
        f"max_entropy_production = {report.max_entropy_production!r}",
        f"classification = {result.label}",
        f"wedge_speed_max = {result.wedge_speed_max!r}",
        f"l1_distance_rel = {result.l1_distance_rel!r}",
    ]
    (outdir / "report.txt").write_text("\n".join(lines) + "\n")
    (outdir / "timing.txt").write_text(
        f"wall_clock_s = {time.perf_counter() - t_wall:.3f}\n")
    print("\n".join(lines))
    return EX_OK


def _parse_state(text: str, g, label: str):
    try:
        rho, v, p = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"{label} state must be rho,v,p") from exc
    return gas.state_from_rho_p(rho, (v, 0.0), p, g)


def cmd_riemann1d(args) -> int:
    g = gas.GasModel(args.model, args.gamma, args.kappa)
    left = _parse_state(args.left, g, "left")
    right = _parse_state(args.right, g, "right")
    fan = riemann.solve_exact(left, right, g)
    xlo = args.xlo if args.xlo is not None else min(fan.left_wave.head, -1.0) * 1.5 * args.time
    xhi = args.xhi if args.xhi is not None else max(fan.right_wave.head, 1.0) * 1.5 * args.time
    xs = np.linspace(xlo, xhi, args.samples)
    lines = [
        f"# star_p = {fan.star_p!r} star_v = {fan.star_v!r}",
        f"# star_rho_left = {fan.star_left_rho!r} star_rho_right = {fan.star_right_rho!r}",
        f"# waves: left {fan.left_wave.kind} right {fan.right_wave.kind}",
        "x,xi,rho,v,p",
    ]
    for x in xs:
        st = riemann.sample(fan, x / args.time)
        lines.append(",".join(repr(float(v)) for v in
                              (x, x / args.time, st.rho, st.v[0], gas.pressure(st, g))))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return EX_OK


def cmd_diagnose(args) -> int:
    snapdir = Path(args.snapdir)
    if not snapdir.is_dir():
        raise FileNotFoundError(args.snapdir)
    snaps = sorted(snapdir.glob("snapshot_*.csv"))
    meshfile = snapdir / "mesh.txt"
    if not snaps or not meshfile.exists():
        raise FileNotFoundError(f"{snapdir} has no snapshots/mesh.txt")
    mesh = io.read_mesh(meshfile)
    states = []
    for s in snaps:
        t, g, cols = io.read_snapshot_csv(s)
        states.append(io.snapshot_state(t, g, cols, mesh))
    series = diagnostics.SnapshotSeries(mesh, tuple(states))

    spec = None
    specfile = snapdir / "solution_t.txt"
    if specfile.exists():
        spec = io.read_solution_spec(specfile)

    window = None
    if args.window:
        window = tuple(float(x) for x in args.window.split(","))
    rows = []
    if len(states) >= 3:
        D, _ = diagnostics.self_similarity_deviation(series, window)
        cen = mesh.cell_centroid
        span = float(np.abs(cen).max())
        xwin = (np.asarray(window) if window is not None
                else np.asarray([0.05 * span, 0.6 * span, -0.3 * span, 0.3 * span]))
        steadiness = diagnostics.steadiness_deviation(series, xwin * states[0].t)
    else:
        D = np.full(len(states), np.nan)
        steadiness = np.full(len(states), np.nan)
    for k, state in enumerate(states):
        wedge, dist = float("nan"), float("nan")
        if spec is not None:
            result = diagnostics.classify(state, mesh, spec, window=window)
            wedge, dist = result.wedge_speed_max, result.l1_distance_rel
        rows.append((float(state.t), float(D[k]), float(steadiness[k]), wedge, dist))
    out = Path(args.out) if args.out else snapdir / "metrics.csv"
    io.write_table(out, "t,self_similarity_D,steadiness,wedge_speed,distance_rel", rows)
    print(f"wrote {out}")
    if spec is not None:
        result = diagnostics.classify(states[-1], mesh, spec, window=window)
        print(f"final classification: {result.label} "
              f"(wedge speed {result.wedge_speed_max:.1f} m/s, "
              f"distance {result.l1_distance_rel:.3e})")
    return EX_OK


def make_parser() -> _Parser:
    parser = _Parser(prog="eulerlab",
                     description="finite-volume laboratory for 2D Euler flows "
                                 "in similarity coordinates")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-ic", parents=[], help="construct and verify the exact wedge solution")
    _add_config_flags(p)
    p.add_argument("--out", default="solution_t.txt")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_build_ic)

    p = sub.add_parser("verify-t", help="re-check jump conditions of a spec file")
    p.add_argument("specfile")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_verify_t)

    p = sub.add_parser("run", help="finite-volume run of the wedge problem")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("riemann1d", help="sample an exact 1D Riemann fan")
    p.add_argument("--model", default="nonisentropic",
                   choices=["nonisentropic", "isentropic"])
    p.add_argument("--gamma", type=float, default=1.4)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--left", required=True, metavar="RHO,V,P")
    p.add_argument("--right", required=True, metavar="RHO,V,P")
    p.add_argument("--time", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--xlo", type=float, default=None)
    p.add_argument("--xhi", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_riemann1d)

    p = sub.add_parser("diagnose", help="metrics over a snapshot directory")
    p.add_argument("snapdir")
    p.add_argument("--window", default=None, metavar="XLO,XHI,YLO,YHI")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"eulerlab: missing input: {exc}", file=sys.stderr)
        return EX_NOINPUT
    except ConfigError as exc:
        print(f"eulerlab: configuration error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (DetachmentError, SubsonicInflowError, VacuumError,
            PositivityError, InvalidStateError) as exc:
        print(f"eulerlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_PHYSICS
    except EulerLabError as exc:
        print(f"eulerlab: {exc}", file=sys.stderr)
        return EX_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""Bit-stable text output formats and their parsers.

Every writer here has a matching reader, and identical inputs produce
byte-identical files (floats are written with repr, ordering is fixed).
Wall-clock timings never enter these files; the CLI stores them in a
separate metadata file.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import gas
from .errors import ConfigError
from .exact_fields import SolutionTSpec, assemble_solution_T
from .fv_solver import FieldState
from .gas import GasModel, PrimitiveState
from .simgrid import SimMesh

SNAPSHOT_HEADER = "xi_x,xi_y,rho,vx,vy,p,q,s"


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# Field snapshots (CSV + legacy VTK).
# ---------------------------------------------------------------------------

def write_snapshot_csv(path, mesh: SimMesh, state: FieldState) -> None:
    """Cell-centroid table of primitive quantities, time in a comment line."""
    g = state.model
    rho, vx, vy, p = gas.batch_primitive(state.u, g)
    if g.kind == gas.NONISENTROPIC:
        q = p / ((g.gamma - 1.0) * rho)
    else:
        q = g.kappa * rho ** (g.gamma - 1.0) / (g.gamma - 1.0)
    s = np.log(q) + (1.0 - g.gamma) * np.log(rho)
    lines = [
        f"# t = {_fmt(state.t)}",
        f"# gas_kind = {g.kind} gamma = {_fmt(g.gamma)} kappa = {_fmt(g.kappa)}",
        SNAPSHOT_HEADER,
    ]
    cen = mesh.cell_centroid
    for c in range(mesh.num_cells):
        lines.append(",".join(_fmt(v) for v in (
            cen[c, 0], cen[c, 1], rho[c], vx[c], vy[c], p[c], q[c], s[c])))
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot_csv(path):
    """Returns (t, gas model, data dict of column arrays)."""
    path = Path(path)
    t = None
    kind, gamma, kappa = None, None, 1.0
    rows = []
    header = None
    for raw in path.read_text().splitlines():
        if raw.startswith("#"):
            parts = raw[1:].split()
            if parts[:2] == ["t", "="]:
                t = float(parts[2])
            elif parts[:2] == ["gas_kind", "="]:
                kind = parts[2]
                gamma = float(parts[5])
                kappa = float(parts[8])
            continue
        if header is None:
            header = raw.strip()
            if header != SNAPSHOT_HEADER:
                raise ConfigError(f"{path}: unexpected snapshot header {header!r}")
            continue
        rows.append([float(v) for v in raw.split(",")])
    if t is None or kind is None or not rows:
        raise ConfigError(f"{path}: incomplete snapshot file")
    data = np.asarray(rows)
    cols = dict(zip(SNAPSHOT_HEADER.split(","), data.T))
    return t, GasModel(kind, gamma, kappa), cols


def snapshot_state(t: float, g: GasModel, cols, mesh: SimMesh) -> FieldState:
    """Rebuild a FieldState from snapshot columns (cells in mesh order)."""
    if len(cols["rho"]) != mesh.num_cells:
        raise ConfigError("snapshot does not match the mesh cell count")
    u = gas.batch_conservative(cols["rho"], cols["vx"], cols["vy"], cols["p"], g)
    return FieldState(t, u, g)


def write_snapshot_vtk(path, mesh: SimMesh, state: FieldState) -> None:
    """Legacy ASCII VTK unstructured grid with cell data, for viewers."""
    g = state.model
    rho, vx, vy, p = gas.batch_primitive(state.u, g)
    lines = [
        "# vtk DataFile Version 3.0",
        f"eulerlab snapshot t = {_fmt(state.t)}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.num_vertices} double",
    ]
    for v in mesh.vertices:
        lines.append(f"{_fmt(v[0])} {_fmt(v[1])} 0.0")
    size = sum(len(c) + 1 for c in mesh.cells)
    lines.append(f"CELLS {mesh.num_cells} {size}")
    for c in mesh.cells:
        lines.append(" ".join([str(len(c))] + [str(v) for v in c]))
    lines.append(f"CELL_TYPES {mesh.num_cells}")
    lines.extend("7" for _ in mesh.cells)  # VTK_POLYGON
    lines.append(f"CELL_DATA {mesh.num_cells}")
    for name, arr in (("rho", rho), ("p", p)):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(x) for x in arr)
    lines.append("VECTORS velocity double")
    lines.extend(f"{_fmt(a)} {_fmt(b)} 0.0" for a, b in zip(vx, vy))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Mesh export.
# ---------------------------------------------------------------------------

def write_mesh(path, mesh: SimMesh) -> None:
    lines = ["# eulerlab mesh v1", f"motion = {mesh.motion}",
             f"points {mesh.num_vertices}"]
    lines.extend(f"{_fmt(v[0])} {_fmt(v[1])}" for v in mesh.vertices)
    lines.append(f"cells {mesh.num_cells}")
    for loop in mesh.cells:
        lines.append(" ".join([str(len(loop))] + [str(v) for v in loop]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> SimMesh:
    path = Path(path)
    lines = [l for l in path.read_text().splitlines() if l and not l.startswith("#")]
    if not lines or not lines[0].startswith("motion"):
        raise ConfigError(f"{path}: not a mesh file")
    motion = lines[0].split("=")[1].strip()
    k = 1
    if not lines[k].startswith("points"):
        raise ConfigError(f"{path}: missing points section")
    nv = int(lines[k].split()[1])
    vertices = np.asarray([[float(x) for x in lines[k + 1 + i].split()] for i in range(nv)])
    k += 1 + nv
    if not lines[k].startswith("cells"):
        raise ConfigError(f"{path}: missing cells section")
    nc = int(lines[k].split()[1])
    cells = []
    for i in range(nc):
        parts = [int(x) for x in lines[k + 1 + i].split()]
        if parts[0] != len(parts) - 1:
            raise ConfigError(f"{path}: malformed cell row {i}")
        cells.append(parts[1:])
    return SimMesh(vertices, cells, motion=motion)


# ---------------------------------------------------------------------------
# Exact-solution spec files.
# ---------------------------------------------------------------------------

def write_solution_spec(path, spec: SolutionTSpec) -> None:
    g = spec.model
    pairs = [
        ("gas_kind", g.kind), ("gamma", _fmt(g.gamma)), ("kappa", _fmt(g.kappa)),
        ("alpha", _fmt(spec.alpha)), ("sigma", _fmt(spec.sigma)),
    ]
    for name, st in (("inflow", spec.inflow), ("post", spec.post_shock),
                     ("stag", spec.stagnation)):
        pairs.append((f"{name}_rho", _fmt(st.rho)))
        pairs.append((f"{name}_vx", _fmt(st.v[0])))
        pairs.append((f"{name}_vy", _fmt(st.v[1])))
        if g.kind == gas.NONISENTROPIC:
            pairs.append((f"{name}_q", _fmt(st.q)))
    text = "\n".join(f"{k} = {v}" for k, v in pairs)
    Path(path).write_text("# eulerlab exact-solution spec\n" + text + "\n")


def read_solution_spec(path) -> SolutionTSpec:
    path = Path(path)
    pairs = {}
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: expected key = value, got {line!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    try:
        kind = pairs["gas_kind"]
        g = GasModel(kind, float(pairs["gamma"]), float(pairs["kappa"]))

        def state(name):
            q = float(pairs[f"{name}_q"]) if kind == gas.NONISENTROPIC else None
            return PrimitiveState(float(pairs[f"{name}_rho"]),
                                  (float(pairs[f"{name}_vx"]), float(pairs[f"{name}_vy"])),
                                  q)

        return assemble_solution_T(g, state("inflow"), float(pairs["alpha"]),
                                   float(pairs["sigma"]), state("post"), state("stag"))
    except KeyError as exc:
        raise ConfigError(f"{path}: missing key {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Small CSV tables.
# ---------------------------------------------------------------------------

def write_table(path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_interface_report(path, rows) -> None:
    write_table(path, "angle_deg,kind,rh_rel,eef_jump,admissible",
                [(r["angle_deg"], r["kind"], r["rh_rel"], r["eef_jump"],
                  int(r["admissible"])) for r in rows])

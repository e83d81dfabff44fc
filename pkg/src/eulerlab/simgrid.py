"""Similarity-coordinate meshes with moving vertices x = t*xi.

Cells are straight-edged polygons stored as CCW vertex loops: quads from
the structured builder, triangles at the center of fan meshes, and quads
with inserted (collinear) hanging vertices next to refined neighbors.
Every interior edge has exactly two adjacent cells, so flux assembly and
discrete conservation are exact on any mesh produced here.

Refinement marks are closed to keep edge-adjacent cells within one level
of each other; the remaining coarse/fine interfaces are resolved by
splitting the coarse side's edge, never by constrained nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gas
from .errors import MeshError

SIMILARITY = "similarity"
STATIC = "static"


def polygon_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = 0.5 * np.sum(cross)
    cx = np.sum((x + np.roll(x, -1)) * cross) / (6.0 * a)
    cy = np.sum((y + np.roll(y, -1)) * cross) / (6.0 * a)
    return np.array([cx, cy])


class SimMesh:
    """Polygonal mesh in similarity coordinates.

    Parameters
    ----------
    vertices : (V, 2) array
        Vertex coordinates xi (units of velocity).
    cells : sequence of vertex-index lists
        CCW polygon loops with positive area.
    motion : str
        ``"similarity"`` (vertices at t*xi) or ``"static"``.
    """

    def __init__(self, vertices, cells, motion: str = SIMILARITY,
                 cell_level=None, side_segments=None, edge_midpoints=None):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshError("vertices must be an (V, 2) array")
        self.cells = [list(map(int, c)) for c in cells]
        if motion not in (SIMILARITY, STATIC):
            raise MeshError(f"unknown motion {motion!r}")
        self.motion = motion
        self.cell_level = (np.zeros(len(self.cells), dtype=int) if cell_level is None
                           else np.asarray(cell_level, dtype=int).copy())
        self.side_segments = side_segments or []
        # Registry of split edges, keyed by sorted vertex pair -> midpoint id.
        self._edge_midpoints = dict(edge_midpoints or {})
        self._build()

    # -- construction -----------------------------------------------------

    def _build(self):
        ncell = len(self.cells)
        self.cell_area = np.empty(ncell)
        self.cell_centroid = np.empty((ncell, 2))
        self.cell_perimeter = np.zeros(ncell)
        for c, loop in enumerate(self.cells):
            if len(loop) < 3:
                raise MeshError(f"cell {c} has fewer than 3 vertices")
            pts = self.vertices[loop]
            a = polygon_area(pts)
            if a <= 0.0:
                raise MeshError(f"cell {c} is not CCW / has nonpositive area ({a})")
            self.cell_area[c] = a
            self.cell_centroid[c] = polygon_centroid(pts)
            self.cell_perimeter[c] = float(
                np.sum(np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)))

        edge_map: dict[tuple, int] = {}
        ev, ec = [], []
        for c, loop in enumerate(self.cells):
            for k in range(len(loop)):
                a, b = loop[k], loop[(k + 1) % len(loop)]
                key = (a, b) if a < b else (b, a)
                if key in edge_map:
                    e = edge_map[key]
                    if ec[e][1] != -1:
                        raise MeshError(f"edge {key} shared by more than two cells")
                    ec[e][1] = c
                else:
                    edge_map[key] = len(ev)
                    ev.append((a, b))
                    ec.append([c, -1])
        self.edge_vertices = np.asarray(ev, dtype=int)
        self.edge_cells = np.asarray(ec, dtype=int)
        pa = self.vertices[self.edge_vertices[:, 0]]
        pb = self.vertices[self.edge_vertices[:, 1]]
        dv = pb - pa
        self.edge_length = np.hypot(dv[:, 0], dv[:, 1])
        if np.any(self.edge_length <= 0.0):
            raise MeshError("degenerate zero-length edge")
        # Outward normal of the first adjacent cell (CCW traversal => rotate
        # the edge vector clockwise), i.e. oriented from cell 0 to cell 1.
        self.edge_normal = np.stack([dv[:, 1], -dv[:, 0]], axis=-1) / self.edge_length[:, None]
        self.edge_midpoint = 0.5 * (pa + pb)
        self.interior = self.edge_cells[:, 1] >= 0
        self.boundary_tag = np.zeros(len(ev), dtype=int)
        self._tag_boundary()
        # Per-edge incircle-like length scale: min over adjacent cells of 2A/P.
        h_cell = 2.0 * self.cell_area / self.cell_perimeter
        h = h_cell[self.edge_cells[:, 0]]
        h2 = np.where(self.interior, h_cell[self.edge_cells[:, 1]], np.inf)
        self.edge_h = np.minimum(h, h2)
        self._neighbors = None
        self._opposite = None

    def _tag_boundary(self):
        if not self.side_segments:
            self.boundary_tag[~self.interior] = 1
            return
        for e in np.flatnonzero(~self.interior):
            m = self.edge_midpoint[e]
            best, best_d = 1, np.inf
            for p0, p1, tag in self.side_segments:
                p0 = np.asarray(p0); p1 = np.asarray(p1)
                d = p1 - p0
                tproj = np.clip(((m - p0) @ d) / (d @ d), 0.0, 1.0)
                dist = float(np.hypot(*(m - (p0 + tproj * d))))
                if dist < best_d:
                    best, best_d = tag, dist
            self.boundary_tag[e] = best

    # -- simple queries ----------------------------------------------------

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def num_edges(self) -> int:
        return len(self.edge_vertices)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def cell_neighbors(self):
        """Adjacency lists (interior edges only), cached."""
        if self._neighbors is None:
            nb = [[] for _ in range(self.num_cells)]
            for e in np.flatnonzero(self.interior):
                c0, c1 = self.edge_cells[e]
                nb[c0].append((int(c1), int(e)))
                nb[c1].append((int(c0), int(e)))
            self._neighbors = nb
        return self._neighbors

    def opposite_neighbors(self):
        """Per interior edge, the cells behind each side (or -1).

        For edge (cL, cR), the behind-left cell is the neighbor of cL most
        anti-aligned with the direction cL -> cR; used for 3-cell MUSCL
        stencils.  Returns (behind_left, behind_right) int arrays over all
        edges (-1 on boundary rows and where no suitable neighbor exists).
        """
        if self._opposite is None:
            nb = self.cell_neighbors()
            E = self.num_edges
            behind_l = np.full(E, -1, dtype=int)
            behind_r = np.full(E, -1, dtype=int)
            cen = self.cell_centroid
            for e in np.flatnonzero(self.interior):
                c0, c1 = self.edge_cells[e]
                d = cen[c1] - cen[c0]
                d /= np.hypot(*d)
                for target, store, sign in ((c0, behind_l, -1.0), (c1, behind_r, 1.0)):
                    best, best_dot = -1, 0.25  # require a clearly "behind" neighbor
                    for k, _ in nb[target]:
                        dk = cen[k] - cen[target]
                        dk /= np.hypot(*dk)
                        dot = sign * float(dk @ d)
                        if dot > best_dot:
                            best, best_dot = k, dot
                    store[e] = best
            self._opposite = (behind_l, behind_r)
        return self._opposite


@dataclass(frozen=True)
class MeshGeometryAt:
    """Physical mesh geometry at time t (exact scalings of the xi mesh)."""

    t: float
    vertex_positions: np.ndarray
    cell_areas: np.ndarray
    edge_lengths: np.ndarray
    edge_velocities: np.ndarray


def geometry_at(mesh: SimMesh, t: float) -> MeshGeometryAt:
    """Geometry of the moving mesh at time t: x = t*xi, w = xi."""
    if t <= 0.0:
        raise MeshError(f"mesh geometry requires t > 0, got {t}")
    if mesh.motion == STATIC:
        w = np.zeros_like(mesh.edge_midpoint)
        return MeshGeometryAt(t, mesh.vertices.copy(), mesh.cell_area.copy(),
                              mesh.edge_length.copy(), w)
    return MeshGeometryAt(
        t,
        t * mesh.vertices,
        t * t * mesh.cell_area,
        t * mesh.edge_length,
        mesh.edge_midpoint.copy(),
    )


# ---------------------------------------------------------------------------
# Builders.
# ---------------------------------------------------------------------------

def _check_quad(corners) -> np.ndarray:
    corners = np.asarray(corners, dtype=float)
    if corners.shape != (4, 2):
        raise MeshError("domain must be four corner points")
    if polygon_area(corners) <= 0.0:
        raise MeshError("domain corners must be CCW with positive area")
    for i in range(4):
        a = corners[i]
        b = corners[(i + 1) % 4]
        c = corners[(i + 2) % 4]
        if np.cross(b - a, c - b) <= 0.0:
            raise MeshError("domain quadrilateral must be convex")
    return corners


def build_domain_mesh(corners, nx: int, ny: int, align_rays=None,
                      spacing_x=None, spacing_y=None) -> SimMesh:
    """Structured quad mesh on a convex quadrilateral in xi.

    Without ``align_rays`` this is the transfinite bilinear grid with
    optional per-direction normalized spacings.  With ``align_rays`` (an
    iterable of angles) a fan mesh is built instead whose radial grid
    lines contain those rays exactly; see :func:`fan_mesh`.
    """
    corners = _check_quad(corners)
    if nx < 1 or ny < 1:
        raise MeshError("cell counts must be positive")
    if align_rays is not None:
        return fan_mesh(corners, align_rays, n_radial=ny, n_angular=4 * nx)

    s = np.linspace(0.0, 1.0, nx + 1) if spacing_x is None else np.asarray(spacing_x, float)
    t = np.linspace(0.0, 1.0, ny + 1) if spacing_y is None else np.asarray(spacing_y, float)
    if len(s) != nx + 1 or len(t) != ny + 1:
        raise MeshError("spacing arrays must have nx+1 / ny+1 entries")
    ss, tt = np.meshgrid(s, t)
    c0, c1, c2, c3 = corners
    pts = ((1 - ss) * (1 - tt))[..., None] * c0 + (ss * (1 - tt))[..., None] * c1 \
        + (ss * tt)[..., None] * c2 + ((1 - ss) * tt)[..., None] * c3
    vertices = pts.reshape(-1, 2)

    def vid(i, j):
        return j * (nx + 1) + i

    cells = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
             for j in range(ny) for i in range(nx)]
    sides = [(c0, c1, 1), (c1, c2, 2), (c2, c3, 3), (c3, c0, 4)]
    return SimMesh(vertices, cells, side_segments=sides)


def _ray_exit_radius(corners: np.ndarray, d: np.ndarray) -> float:
    """Distance from the origin to the quadrilateral boundary along d."""
    best = np.inf
    for i in range(4):
        p0, p1 = corners[i], corners[(i + 1) % 4]
        seg = p1 - p0
        denom = d[0] * (-seg[1]) - d[1] * (-seg[0])
        if abs(denom) < 1e-300:
            continue
        r = (p0[0] * (-seg[1]) - p0[1] * (-seg[0])) / denom
        s = (d[0] * p0[1] - d[1] * p0[0]) / denom
        if r > 0.0 and -1e-12 <= s <= 1.0 + 1e-12:
            best = min(best, r)
    if not np.isfinite(best):
        raise MeshError("ray does not leave the domain; is the origin inside?")
    return float(best)


def fan_mesh(corners, rays, n_radial: int, n_angular: int,
             radial_power: float = 1.0) -> SimMesh:
    """Fan mesh of a quadrilateral containing the origin.

    All radial grid lines are straight rays from the origin; the given
    ``rays`` (angles) appear among them exactly, so any discontinuity
    along those rays coincides with mesh edges.  The cells of the
    innermost ring are triangles with the origin as apex.
    """
    corners = _check_quad(corners)
    # Origin strictly inside: every side's support line has positive offset.
    for i in range(4):
        p0, p1 = corners[i], corners[(i + 1) % 4]
        if np.cross(p1 - p0, -p0) <= 0.0:
            raise MeshError("fan mesh requires the origin inside the domain")

    angles = [math.atan2(c[1], c[0]) for c in corners]
    angles += [math.atan2(math.sin(a), math.cos(a)) for a in rays]
    angles = sorted(angles)
    dedup = [angles[0]]
    for a in angles[1:]:
        if a - dedup[-1] > 1e-12:
            dedup.append(a)
    target = 2.0 * math.pi / max(n_angular, 8)
    full = []
    for k, a in enumerate(dedup):
        b = dedup[(k + 1) % len(dedup)]
        gap = (b - a) % (2.0 * math.pi)
        if gap == 0.0:
            gap = 2.0 * math.pi
        nsub = max(1, int(math.ceil(gap / target - 1e-9)))
        full.extend(a + gap * i / nsub for i in range(nsub))
    full.sort()

    dirs = np.array([[math.cos(a), math.sin(a)] for a in full])
    radii = np.array([_ray_exit_radius(corners, d) for d in dirs])
    frac = (np.arange(1, n_radial + 1) / n_radial) ** radial_power

    vertices = [np.zeros(2)]
    index = {}
    for j in range(len(full)):
        for i in range(n_radial):
            index[(j, i + 1)] = len(vertices)
            vertices.append(frac[i] * radii[j] * dirs[j])
    cells = []
    nang = len(full)
    for j in range(nang):
        jn = (j + 1) % nang
        cells.append([0, index[(j, 1)], index[(jn, 1)]])
        for i in range(1, n_radial):
            cells.append([index[(j, i)], index[(j, i + 1)],
                          index[(jn, i + 1)], index[(jn, i)]])
    sides = [(corners[i], corners[(i + 1) % 4], i + 1) for i in range(4)]
    return SimMesh(np.asarray(vertices), cells, side_segments=sides)


def aligned_mesh_for_T(spec, resolution=48, domain=None, margin: float = 1.35) -> SimMesh:
    """Fan mesh whose edges contain every discontinuity ray of a wedge field.

    ``resolution`` is the radial cell count (angular count is derived);
    the default square domain extends ``margin`` times the field's maximum
    signal speed, which keeps all boundaries supersonic in xi.
    """
    if domain is None:
        L = margin * spec.field.max_signal_speed()
        domain = [(-L, -L), (L, -L), (L, L), (-L, L)]
    if isinstance(resolution, int):
        n_radial, n_angular = resolution, int(round(1.25 * resolution))
    else:
        n_radial, n_angular = resolution
    rays = [iface.angle for iface in spec.interfaces]
    return fan_mesh(domain, rays, n_radial=n_radial, n_angular=n_angular)


# ---------------------------------------------------------------------------
# Refinement.
# ---------------------------------------------------------------------------

def refine(mesh: SimMesh, marked) -> SimMesh:
    """Split each marked cell through edge midpoints and its centroid.

    Marks are first closed so edge-adjacent cells stay within one level of
    each other; afterwards every split edge bordering an unrefined cell
    contributes its midpoint to that cell's polygon, keeping the edge set
    two-sided everywhere.  Total area is preserved exactly.
    """
    marked = set(int(c) for c in marked)
    if not marked:
        return mesh
    if not all(0 <= c < mesh.num_cells for c in marked):
        raise MeshError("marked set contains unknown cell ids")

    level = mesh.cell_level
    changed = True
    while changed:
        changed = False
        for e in np.flatnonzero(mesh.interior):
            c0, c1 = mesh.edge_cells[e]
            l0 = level[c0] + (1 if c0 in marked else 0)
            l1 = level[c1] + (1 if c1 in marked else 0)
            if l0 - l1 > 1 and c1 not in marked:
                marked.add(int(c1)); changed = True
            elif l1 - l0 > 1 and c0 not in marked:
                marked.add(int(c0)); changed = True

    vertices = [v for v in mesh.vertices]
    midpoints = dict(mesh._edge_midpoints)

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in midpoints:
            midpoints[key] = len(vertices)
            vertices.append(0.5 * (mesh.vertices[a] + mesh.vertices[b]))
        return midpoints[key]

    new_cells, new_level = [], []
    for c, loop in enumerate(mesh.cells):
        if c not in marked:
            new_cells.append(list(loop))
            new_level.append(level[c])
            continue
        k = len(loop)
        mids = [midpoint(loop[i], loop[(i + 1) % k]) for i in range(k)]
        centroid_id = len(vertices)
        vertices.append(polygon_centroid(mesh.vertices[loop]))
        for i in range(k):
            new_cells.append([loop[i], mids[i], centroid_id, mids[i - 1]])
            new_level.append(level[c] + 1)

    # Insert hanging midpoints into the polygons of unrefined neighbors.
    def expand(loop):
        out, i = [], 0
        work = list(loop)
        while i < len(work):
            a, b = work[i], work[(i + 1) % len(work)]
            key = (a, b) if a < b else (b, a)
            m = midpoints.get(key)
            if m is not None and m != a and m != b:
                work.insert(i + 1, m)
                continue
            out.append(a)
            i += 1
        return out

    new_cells = [expand(loop) for loop in new_cells]
    return SimMesh(np.asarray(vertices), new_cells, motion=mesh.motion,
                   cell_level=new_level, side_segments=mesh.side_segments,
                   edge_midpoints=midpoints)


def mark_density_jumps(mesh: SimMesh, u: np.ndarray, g: gas.GasModel,
                       threshold: float = 0.05):
    """Cells adjacent to edges with a relative density jump above threshold."""
    rho = u[:, 0]
    marked = set()
    for e in np.flatnonzero(mesh.interior):
        c0, c1 = mesh.edge_cells[e]
        jump = abs(rho[c0] - rho[c1]) / min(rho[c0], rho[c1])
        if jump > threshold:
            marked.add(int(c0)); marked.add(int(c1))
    return marked


def check_supersonic_boundary(mesh: SimMesh, field, g: gas.GasModel):
    """Whether xi.n on the whole boundary exceeds max(|v| + c) of the field.

    Returns (ok, margin) with margin = min(xi.n) - max(|v| + c); a positive
    margin means every boundary point outruns all waves, so boundary data
    only propagates into the domain and full fluxes may be prescribed.
    """
    bidx = np.flatnonzero(~mesh.interior)
    n = mesh.edge_normal[bidx]
    va = mesh.vertices[mesh.edge_vertices[bidx, 0]]
    vb = mesh.vertices[mesh.edge_vertices[bidx, 1]]
    xin = np.minimum(np.einsum("ij,ij->i", va, n), np.einsum("ij,ij->i", vb, n))
    min_xin = float(xin.min())
    if hasattr(field, "max_signal_speed"):
        vmax = float(field.max_signal_speed())
    else:
        vmax = float(gas.max_signal_speed(field.u, g).max())
    margin = min_xin - vmax
    return margin > 0.0, margin

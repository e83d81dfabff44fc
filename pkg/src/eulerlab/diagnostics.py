"""Quantitative solution-concept diagnostics.

* per-cell discrete entropy production of a recorded solver step,
* weak-form and entropy weak-form residuals against smooth compactly
  supported test functions,
* asymptotic self-similarity / steadiness estimators on snapshot series,
* T-vs-N classification of a final field against an exact wedge field.

Convergence "in L1_loc" is measured on a compact window K: a series is
asymptotically self-similar when the ximesh distance D(t) between u(t)
and a late-time representative w tends to zero.  The limit is compared in
similarity coordinates, i.e. between the functions xi -> u(t, t*xi); this
is the reading of "u(t, t^-1 .)" consistent with mesh motion x = t*xi
(the literal scaling by 1/t is dimensionally inconsistent with
self-similarity defined via f(rt, rx) = f(t, x); both readings coincide
for exactly self-similar fields).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.spatial import cKDTree

from . import gas
from .fv_solver import FieldState, FluxRecord
from .simgrid import SimMesh, geometry_at


@dataclass(frozen=True)
class SnapshotSeries:
    """Ordered (t, field) snapshots on one fixed xi-mesh."""

    mesh: SimMesh
    states: tuple

    def __post_init__(self):
        states = tuple(self.states)
        if len(states) < 1:
            raise ValueError("empty snapshot series")
        times = [s.t for s in states]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        object.__setattr__(self, "states", states)

    @property
    def times(self) -> np.ndarray:
        return np.asarray([s.t for s in self.states])


def _window_mask(mesh: SimMesh, window) -> np.ndarray:
    if window is None:
        return np.ones(mesh.num_cells, dtype=bool)
    xlo, xhi, ylo, yhi = window
    cen = mesh.cell_centroid
    return (cen[:, 0] >= xlo) & (cen[:, 0] <= xhi) & (cen[:, 1] >= ylo) & (cen[:, 1] <= yhi)


# ---------------------------------------------------------------------------
# Discrete entropy production.
# ---------------------------------------------------------------------------

def discrete_entropy_production(before: FieldState, after: FieldState,
                                record: FluxRecord, mesh: SimMesh, dt: float):
    """Per-cell entropy production of one recorded step, with local scales.

    production_c = [A(t+dt) eta(U_new) - A(t) eta(U_old)]/dt
                   + sum_e s_ce l_e(t+dt/2) Psi_e

    where Psi_e is the numerical entropy flux stored in the record.  For
    Godunov steps every value is nonpositive up to rounding.  Returns
    (production, scale); scale_c collects the magnitudes of the summed
    terms, so production/scale is the natural dimensionless violation.
    """
    if record is None or record.edge_entropy_flux is None:
        raise ValueError("step was not recorded with fluxes; pass record_fluxes=True")
    g = before.model
    A_old = geometry_at(mesh, before.t).cell_areas
    A_new = geometry_at(mesh, after.t).cell_areas
    ell = geometry_at(mesh, before.t + 0.5 * dt).edge_lengths
    eta_old = gas.batch_entropy(before.u, g)[0]
    eta_new = gas.batch_entropy(after.u, g)[0]
    C = mesh.num_cells
    contrib = ell * record.edge_entropy_flux
    flux_sum = np.bincount(mesh.edge_cells[:, 0], weights=contrib, minlength=C)
    flux_sum -= np.bincount(mesh.edge_cells[mesh.interior, 1],
                            weights=contrib[mesh.interior], minlength=C)
    production = (A_new * eta_new - A_old * eta_old) / dt + flux_sum
    abs_sum = np.bincount(mesh.edge_cells[:, 0], weights=np.abs(contrib), minlength=C)
    abs_sum += np.bincount(mesh.edge_cells[mesh.interior, 1],
                           weights=np.abs(contrib[mesh.interior]), minlength=C)
    scale = (A_new * np.abs(eta_new) + A_old * np.abs(eta_old)) / dt + abs_sum
    return production, scale


# ---------------------------------------------------------------------------
# Smooth compactly supported test functions and weak residuals.
# ---------------------------------------------------------------------------

def _bump(z):
    """C-infinity bump exp(1/(z^2-1)) on |z|<1, identically 0 outside."""
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) < 1.0
    out = np.zeros_like(z)
    zi = np.where(inside, z, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(1.0 / (zi**2 - 1.0))[inside]
    return out


def _bump_prime(z):
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) < 1.0
    out = np.zeros_like(z)
    zi = np.where(inside, z, 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1.0 / (zi**2 - 1.0)) * (-2.0 * zi) / (zi**2 - 1.0) ** 2
    out[inside] = val[inside]
    return out


@dataclass(frozen=True)
class BumpTestFunction:
    """Tensor-product mollifier bump over (t, x1, x2)."""

    center: tuple
    radius: tuple

    def _z(self, t, x, y):
        (t0, x0, y0), (rt, rx, ry) = self.center, self.radius
        return (t - t0) / rt, (x - x0) / rx, (y - y0) / ry

    def value(self, t, x, y):
        zt, zx, zy = self._z(t, x, y)
        return _bump(zt) * _bump(zx) * _bump(zy)

    def grad(self, t, x, y):
        """(phi_t, phi_x, phi_y), each vectorized."""
        zt, zx, zy = self._z(t, x, y)
        bt, bx, by = _bump(zt), _bump(zx), _bump(zy)
        return (
            _bump_prime(zt) / self.radius[0] * bx * by,
            bt * _bump_prime(zx) / self.radius[1] * by,
            bt * bx * _bump_prime(zy) / self.radius[2],
        )

    @property
    def support(self):
        (t0, x0, y0), (rt, rx, ry) = self.center, self.radius
        return (t0 - rt, t0 + rt, x0 - rx, x0 + rx, y0 - ry, y0 + ry)


@dataclass(frozen=True)
class TestFunctionSet:
    """Bumps plus the composite Gauss quadrature used to integrate them."""

    functions: tuple
    subdivisions: tuple = (8, 32, 32)
    gauss_order: int = 4

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))


def _composite_gauss(a: float, b: float, n_sub: int, order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_sub + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


class _ExactFieldSampler:
    def __init__(self, field):
        self.field = field
        self.states = field.states_conservative()

    def conservative(self, t, x, y):
        idx = self.field.sector_index(np.arctan2(y, x))
        return self.states[idx]


class _SeriesSampler:
    """Nearest-snapshot, nearest-cell evaluation of a snapshot series."""

    def __init__(self, series: SnapshotSeries):
        self.series = series
        self.tree = cKDTree(series.mesh.cell_centroid)
        self.times = series.times

    def conservative(self, t, x, y):
        k = int(np.argmin(np.abs(self.times - t)))
        state = self.series.states[k]
        xi = np.stack([x / t, y / t], axis=-1)
        _, idx = self.tree.query(xi)
        return state.u[idx]


def weak_residual(field_or_series, phis: TestFunctionSet, g: gas.GasModel,
                  entropy_variant: bool = False) -> np.ndarray:
    """Weak-form defect of u against each test function, scale-normalized.

    For a weak solution -iint (u phi_t + f(u).grad phi) vanishes for every
    phi supported in t > 0; the return value is that integral normalized
    by the integral of |phi_t| |u| + |grad phi| |f(u)| (max over
    components), so exact solutions give values at quadrature-error level.

    With ``entropy_variant=True`` the pair (u, f) is replaced by
    (eta, psi) and the *signed* normalized defect is returned; admissible
    solutions give values <= quadrature tolerance (entropy production at
    shocks makes them genuinely negative).
    """
    if isinstance(field_or_series, SnapshotSeries):
        sampler = _SeriesSampler(field_or_series)
        t_lo = field_or_series.times[0]
        t_hi = field_or_series.times[-1]
    else:
        sampler = _ExactFieldSampler(field_or_series)
        t_lo, t_hi = 0.0, np.inf

    out = np.empty(len(phis.functions))
    nt, nx, ny = phis.subdivisions
    for k, phi in enumerate(phis.functions):
        t0, t1, x0, x1, y0, y1 = phi.support
        if t0 <= t_lo or (np.isfinite(t_hi) and t1 >= t_hi + 1e-12):
            raise ValueError("test-function support leaves the sampled window")
        tq, tw = _composite_gauss(t0, t1, nt, phis.gauss_order)
        xq, xw = _composite_gauss(x0, x1, nx, phis.gauss_order)
        yq, yw = _composite_gauss(y0, y1, ny, phis.gauss_order)
        X, Y = np.meshgrid(xq, yq, indexing="ij")
        WXY = np.outer(xw, yw)
        xf, yf, wf = X.ravel(), Y.ravel(), WXY.ravel()
        defect = None
        scale = None
        for ti, wi in zip(tq, tw):
            u = sampler.conservative(ti, xf, yf)
            if entropy_variant:
                eta, psix, psiy = gas.batch_entropy(u, g)
                dens = eta[:, None]
                f1 = psix[:, None]
                f2 = psiy[:, None]
            else:
                dens = u
                ex = np.zeros((len(u), 2)); ex[:, 0] = 1.0
                ey = np.zeros((len(u), 2)); ey[:, 1] = 1.0
                f1 = gas.batch_normal_flux(u, ex, g)
                f2 = gas.batch_normal_flux(u, ey, g)
            pt, px, py = phi.grad(ti, xf, yf)
            wq = wi * wf
            term = dens * pt[:, None] + f1 * px[:, None] + f2 * py[:, None]
            sterm = (np.abs(dens) * np.abs(pt)[:, None]
                     + np.abs(f1) * np.abs(px)[:, None]
                     + np.abs(f2) * np.abs(py)[:, None])
            d = (wq[:, None] * term).sum(axis=0)
            s = (wq[:, None] * sterm).sum(axis=0)
            defect = d if defect is None else defect + d
            scale = s if scale is None else scale + s
        rel = -defect / np.maximum(scale, 1e-300)
        out[k] = float(rel[0]) if entropy_variant else float(np.max(np.abs(rel)))
    return out


# ---------------------------------------------------------------------------
# Asymptotic estimators.
# ---------------------------------------------------------------------------

def _late_window_average(arrays) -> np.ndarray:
    n4 = max(1, len(arrays) // 4)
    return np.mean(arrays[-n4:], axis=0)


def self_similarity_deviation(series: SnapshotSeries, window=None):
    """L1(K) distance of each snapshot to the late-window average.

    Returns (D, w): per-snapshot deviations and the limit candidate
    (cellwise average over the last quarter of the series).  D -> 0 means
    the series is asymptotically self-similar on the window.
    """
    if len(series.states) < 3:
        raise ValueError("need at least 3 snapshots")
    mask = _window_mask(series.mesh, window)
    if not mask.any():
        raise ValueError("window contains no cells")
    A = series.mesh.cell_area[mask]
    stack = np.stack([s.u[mask] for s in series.states])
    w = _late_window_average(stack)
    D = (A[None, :] * np.abs(stack - w[None]).sum(axis=2)).sum(axis=1) / A.sum()
    return D, w


def steadiness_deviation(series: SnapshotSeries, window, npts: int = 24):
    """Deviation from steadiness sampled at fixed physical points.

    Snapshots are resampled (nearest cell) at an npts x npts grid of fixed
    x inside the window; the deviation is the average L1 distance to the
    late-window mean.  A self-similar but moving pattern is unsteady and
    scores nonzero here.
    """
    if len(series.states) < 3:
        raise ValueError("need at least 3 snapshots")
    xlo, xhi, ylo, yhi = window
    xs = np.linspace(xlo, xhi, npts)
    ys = np.linspace(ylo, yhi, npts)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    tree = cKDTree(series.mesh.cell_centroid)
    h_big = 4.0 * float(np.sqrt(series.mesh.cell_area.max()))
    samples = []
    for state in series.states:
        xi = pts / state.t if series.mesh.motion == "similarity" else pts
        dist, idx = tree.query(xi)
        if np.any(dist > h_big):
            raise ValueError("window leaves the mesh at t = %g" % state.t)
        samples.append(state.u[idx])
    stack = np.stack(samples)
    w = _late_window_average(stack)
    return np.abs(stack - w[None]).sum(axis=2).mean(axis=1)


def initial_trace_deviation(series: SnapshotSeries, field, window=None) -> np.ndarray:
    """L1(K) distance of every snapshot to the cell-averaged initial field.

    Checks the initial-trace condition numerically: early snapshots must
    stay within the first-step perturbation scale of the data they assumed.
    """
    from .fv_solver import initialize_from_field

    u0 = initialize_from_field(field, series.mesh, t0=series.times[0]).u
    mask = _window_mask(series.mesh, window)
    A = series.mesh.cell_area[mask]
    stack = np.stack([s.u[mask] for s in series.states])
    return (A[None, :] * np.abs(stack - u0[None, mask]).sum(axis=2)).sum(axis=1) / A.sum()


# ---------------------------------------------------------------------------
# T / N classification.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    label: str
    wedge_speed_max: float
    l1_distance_rel: float
    thresholds: tuple


def classify(final: FieldState, mesh: SimMesh, spec,
             wedge_speed_threshold: float = 100.0,
             distance_threshold: float = 0.10,
             window=None) -> Classification:
    """Label a final field T_like / N_like / indeterminate.

    Metrics: the maximum speed inside the stagnation wedge |theta| < alpha
    (where the exact field is at rest), and the relative L1(K) distance to
    the exact field sampled at cell centroids.  N_like requires the wedge
    metric above its threshold; T_like requires both metrics below.
    """
    g = final.model
    rho, vx, vy, _ = gas.batch_primitive(final.u, g)
    speed = np.hypot(vx, vy)
    cen = mesh.cell_centroid
    theta = np.arctan2(cen[:, 1], cen[:, 0])
    wedge = np.abs(theta) < spec.alpha
    wedge_speed = float(speed[wedge].max()) if wedge.any() else 0.0

    mask = _window_mask(mesh, window)
    idx = spec.field.sector_index(theta[mask])
    u_exact = spec.field.states_conservative()[idx]
    A = mesh.cell_area[mask]
    dist = float((A * np.abs(final.u[mask] - u_exact).sum(axis=1)).sum())
    scale = float(A.sum() * np.abs(gas.to_conservative(spec.inflow, g)).sum())
    dist_rel = dist / scale

    if wedge_speed > wedge_speed_threshold:
        label = "N_like"
    elif dist_rel < distance_threshold:
        label = "T_like"
    else:
        label = "indeterminate"
    return Classification(label, wedge_speed, dist_rel,
                          (wedge_speed_threshold, distance_threshold))

"""Exact piecewise-constant conical fields and oblique-shock construction.

The main product is the four-cone steady self-similar field over a wedge
flow: supersonic inflow, two attached oblique shocks of the weak branch,
post-shock gas moving parallel to the slip lines, and a stagnation wedge
at the same pressure.  Jump relations across every interface can be
checked with :func:`rh_residual` (Rankine-Hugoniot), :func:`eef_jump_residual`
(entropy-pair jump inequality) and :func:`entropy_jump_admissible` (the
normal-velocity form of admissibility).

Oblique-shock relations follow Courant & Friedrichs, "Supersonic Flow and
Shock Waves", ch. IV; of the two attached-shock roots the weaker (smaller
shock angle) is selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy import optimize

from . import gas
from .errors import DetachmentError, SubsonicInflowError
from .gas import GasModel, PrimitiveState, SpaceTimeNormal

SHOCK = "shock"
CONTACT = "contact"


@dataclass(frozen=True)
class ConicalField:
    """Piecewise-constant field over angular sectors of the xi-plane.

    ``sectors`` is an ordered list of ((theta_lo, theta_hi), state) with
    half-open intervals [theta_lo, theta_hi) partitioning [-pi, pi).
    Such a field is constant along rays from the origin, hence both steady
    and self-similar when read as u(t, x) = u(x/t).
    """

    sectors: tuple
    model: GasModel
    _breaks: np.ndarray = dataclass_field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        sectors = tuple(((float(lo), float(hi)), st) for (lo, hi), st in self.sectors)
        if not sectors:
            raise ValueError("field needs at least one sector")
        breaks = [sectors[0][0][0]]
        for (lo, hi), _ in sectors:
            if hi <= lo:
                raise ValueError(f"empty or inverted sector [{lo}, {hi})")
            if not math.isclose(lo, breaks[-1], abs_tol=1e-14):
                raise ValueError("sectors must be contiguous")
            breaks.append(hi)
        if not (math.isclose(breaks[0], -math.pi, abs_tol=1e-12)
                and math.isclose(breaks[-1], math.pi, abs_tol=1e-12)):
            raise ValueError("sectors must partition [-pi, pi)")
        object.__setattr__(self, "sectors", sectors)
        object.__setattr__(self, "_breaks", np.asarray(breaks))

    def sector_index(self, theta) -> np.ndarray:
        """Vectorized sector lookup for angles in [-pi, pi)."""
        idx = np.searchsorted(self._breaks[1:-1], theta, side="right")
        return np.clip(idx, 0, len(self.sectors) - 1)

    def state_at_angle(self, theta: float) -> PrimitiveState:
        return self.sectors[int(self.sector_index(theta))][1]

    def state_at(self, xi) -> PrimitiveState:
        """State at a similarity point xi (ray through the origin)."""
        xi = np.asarray(xi, dtype=float)
        return self.state_at_angle(math.atan2(xi[1], xi[0]))

    def evaluate(self, t: float, x) -> PrimitiveState:
        """u(t, x) = u0(x/t); exactly invariant under (t, x) -> (rt, rx)."""
        if t <= 0.0:
            raise ValueError("conical fields are evaluated at t > 0")
        x = np.asarray(x, dtype=float)
        return self.state_at_angle(math.atan2(x[1], x[0]))

    def states_conservative(self) -> np.ndarray:
        """(n_sectors, m) conservative states, aligned with sector order."""
        return np.stack([gas.to_conservative(st, self.model) for _, st in self.sectors])

    def batch_conservative_at(self, xi: np.ndarray) -> np.ndarray:
        """(N, m) conservative states at similarity points xi (N, 2)."""
        xi = np.asarray(xi, dtype=float)
        idx = self.sector_index(np.arctan2(xi[:, 1], xi[:, 0]))
        return self.states_conservative()[idx]

    def max_signal_speed(self) -> float:
        """max |v| + c over the sector states."""
        return max(st.speed + gas.sound_speed(st, self.model) for _, st in self.sectors)


@dataclass(frozen=True)
class InterfaceSpec:
    """One straight discontinuity ray of a conical field."""

    angle: float
    ray: np.ndarray
    normal: SpaceTimeNormal
    minus: PrimitiveState
    plus: PrimitiveState
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "ray", np.asarray(self.ray, dtype=float).reshape(2))


@dataclass(frozen=True)
class SolutionTSpec:
    """Parameters and field of the exact wedge-flow solution."""

    model: GasModel
    inflow: PrimitiveState
    alpha: float
    sigma: float
    post_shock: PrimitiveState
    stagnation: PrimitiveState
    field: ConicalField
    interfaces: tuple


def _mirror(state: PrimitiveState) -> PrimitiveState:
    return PrimitiveState(state.rho, (state.v[0], -state.v[1]), state.q)


def _post_normal_state(inflow: PrimitiveState, sigma: float, g: GasModel):
    """Post-shock (rho, p, u_n) for a straight shock at angle sigma.

    The inflow is assumed parallel to the x-axis; u_n is the post-shock
    velocity component normal to the shock, u_t the (continuous)
    tangential component.
    """
    speed = inflow.speed
    un1 = speed * math.sin(sigma)
    ut = speed * math.cos(sigma)
    gamma = g.gamma
    if g.kind == gas.NONISENTROPIC:
        a1 = gas.sound_speed(inflow, g)
        p1 = gas.pressure(inflow, g)
        M1n2 = (un1 / a1) ** 2
        rho2 = inflow.rho * (gamma + 1.0) * M1n2 / ((gamma - 1.0) * M1n2 + 2.0)
        p2 = p1 * (1.0 + 2.0 * gamma / (gamma + 1.0) * (M1n2 - 1.0))
    else:
        p1 = gas.pressure(inflow, g)
        c1 = gas.sound_speed(inflow, g)
        j = inflow.rho * un1
        total = p1 + inflow.rho * un1**2

        def jump(rho2):
            return g.kappa * rho2**gamma + j**2 / rho2 - total

        # jump() has its minimum at rho_m; a compressive root beyond rho_1
        # exists iff the normal inflow is supersonic (rho_m > rho_1).
        rho_m = (j**2 / (gamma * g.kappa)) ** (1.0 / (gamma + 1.0))
        if un1 <= c1 * (1.0 + 1e-13) or rho_m <= inflow.rho * (1.0 + 1e-13):
            return inflow.rho, float(p1), float(un1), float(ut)
        hi = 2.0 * rho_m
        for _ in range(200):
            if jump(hi) > 0.0:
                break
            hi *= 2.0
        rho2 = optimize.brentq(jump, rho_m, hi, xtol=1e-300, rtol=9e-16)
        p2 = g.kappa * rho2**gamma
    un2 = un1 * inflow.rho / rho2
    return float(rho2), float(p2), float(un2), float(ut)


def _deflection(inflow: PrimitiveState, sigma: float, g: GasModel) -> float:
    """Flow deflection angle produced by a straight shock at angle sigma."""
    _, _, un2, ut = _post_normal_state(inflow, sigma, g)
    # Post velocity in the shock basis is (u_t, u_n2); the shock ray sits at
    # angle sigma, so the velocity direction is sigma - atan2(u_n2, u_t).
    return sigma - math.atan2(un2, ut)


def oblique_shock(inflow: PrimitiveState, alpha: float, g: GasModel):
    """Weak-branch attached oblique shock deflecting the inflow by alpha.

    Returns (sigma, post) with sigma the shock angle against the inflow
    direction and post the uniform post-shock state, whose velocity is
    reconstructed exactly parallel to (cos alpha, sin alpha).

    Raises SubsonicInflowError for M <= 1 and DetachmentError when alpha
    exceeds the maximum deflection of an attached shock.
    """
    gas.validate_state(inflow, g)
    if alpha < 0.0:
        raise ValueError("deflection angle must be nonnegative")
    a1 = gas.sound_speed(inflow, g)
    speed = inflow.speed
    if speed <= a1:
        raise SubsonicInflowError(
            f"inflow Mach {speed / a1:.4f} <= 1; no attached shock exists")
    sigma_min = math.asin(a1 / speed)

    if alpha == 0.0:
        return sigma_min, PrimitiveState(inflow.rho, inflow.v.copy(), inflow.q)

    res = optimize.minimize_scalar(
        lambda s: -_deflection(inflow, s, g),
        bounds=(sigma_min, 0.5 * math.pi), method="bounded",
        options={"xatol": 1e-13},
    )
    sigma_detach = float(res.x)
    alpha_max = -float(res.fun)
    if alpha >= alpha_max:
        raise DetachmentError(
            f"deflection {math.degrees(alpha):.3f} deg exceeds the attached-shock "
            f"maximum {math.degrees(alpha_max):.3f} deg at Mach {speed / a1:.3f}")

    sigma = float(optimize.brentq(
        lambda s: _deflection(inflow, s, g) - alpha,
        sigma_min, sigma_detach, xtol=1e-300, rtol=9e-16))

    rho2, p2, un2, ut = _post_normal_state(inflow, sigma, g)
    v2 = math.hypot(un2, ut)
    post_v = (v2 * math.cos(alpha), v2 * math.sin(alpha))
    if g.kind == gas.NONISENTROPIC:
        post = PrimitiveState(rho2, post_v, p2 / ((g.gamma - 1.0) * rho2))
    else:
        post = PrimitiveState(rho2, post_v)
    return sigma, post


def strong_branch_sigma(inflow: PrimitiveState, alpha: float, g: GasModel) -> float:
    """Shock angle of the strong branch (for comparison against the weak one)."""
    a1 = gas.sound_speed(inflow, g)
    speed = inflow.speed
    sigma_min = math.asin(a1 / speed)
    res = optimize.minimize_scalar(
        lambda s: -_deflection(inflow, s, g),
        bounds=(sigma_min, 0.5 * math.pi), method="bounded",
        options={"xatol": 1e-13},
    )
    return float(optimize.brentq(
        lambda s: _deflection(inflow, s, g) - alpha,
        float(res.x), 0.5 * math.pi - 1e-12, xtol=1e-300, rtol=9e-16))


def build_solution_T(inflow: PrimitiveState, alpha: float, g: GasModel,
                     stagnation_density: float | None = None) -> SolutionTSpec:
    """Assemble the four-cone steady self-similar wedge field.

    Sectors (counterclockwise): inflow for |theta| > sigma, post-shock gas
    in sigma > |theta| > alpha moving parallel to the contact rays, and a
    stagnation wedge |theta| < alpha at rest with the post-shock pressure.
    The stagnation density is a free contact parameter for the full model
    (default: post-shock density); for the isentropic law equal pressure
    forces equal density and an inconsistent override is rejected.
    """
    sigma, post = oblique_shock(inflow, alpha, g)
    p2 = gas.pressure(post, g)
    if g.kind == gas.NONISENTROPIC:
        rho_stag = post.rho if stagnation_density is None else float(stagnation_density)
        stag = PrimitiveState(rho_stag, (0.0, 0.0), p2 / ((g.gamma - 1.0) * rho_stag))
    else:
        if stagnation_density is not None and not math.isclose(
                stagnation_density, post.rho, rel_tol=1e-12):
            raise ValueError(
                "isentropic contacts cannot carry a density jump: equal pressure "
                "forces the stagnation density to the post-shock value")
        stag = PrimitiveState(post.rho, (0.0, 0.0))
    return assemble_solution_T(g, inflow, alpha, sigma, post, stag)


def assemble_solution_T(g: GasModel, inflow: PrimitiveState, alpha: float,
                        sigma: float, post: PrimitiveState,
                        stag: PrimitiveState) -> SolutionTSpec:
    """Build the sector field and interface list from given region states.

    Used by :func:`build_solution_T` and by the spec-file reader (which
    must reproduce exactly the states on file, not recompute them).
    """
    post_lower = _mirror(post)
    sectors = [((-math.pi, -sigma), inflow)]
    if sigma > alpha:
        sectors.append(((-sigma, -alpha), post_lower))
    if alpha > 0.0:
        sectors.append(((-alpha, alpha), stag))
    if sigma > alpha:
        sectors.append(((alpha, sigma), post))
    sectors.append(((sigma, math.pi), inflow))
    field = ConicalField(tuple(sectors), g)

    def ray_normal(theta):
        d = np.array([math.cos(theta), math.sin(theta)])
        # Spatial normal pointing counterclockwise; steady ray => n_t = 0.
        return d, SpaceTimeNormal(0.0, np.array([-d[1], d[0]]))

    interfaces = []
    for theta, minus, plus, kind in (
        (-sigma, inflow, post_lower, SHOCK),
        (-alpha, post_lower, stag, CONTACT),
        (alpha, stag, post, CONTACT),
        (sigma, post, inflow, SHOCK),
    ):
        ray, normal = ray_normal(theta)
        interfaces.append(InterfaceSpec(theta, ray, normal, minus, plus, kind))

    return SolutionTSpec(g, inflow, float(alpha), float(sigma), post, stag,
                         field, tuple(interfaces))


# ---------------------------------------------------------------------------
# Jump-condition diagnostics.
# ---------------------------------------------------------------------------

def rh_residual(u_minus: PrimitiveState, u_plus: PrimitiveState,
                n: SpaceTimeNormal, g: GasModel) -> np.ndarray:
    """Componentwise Rankine-Hugoniot defect (U+ - U-) n_t + (f+ - f-).n.

    Zero iff the jump is a legitimate weak-solution discontinuity for a
    surface with space-time normal (n_t, n).  The spatial part of n need
    not be unit length; the flux contraction is linear in n.
    """
    dU = gas.to_conservative(u_plus, g) - gas.to_conservative(u_minus, g)
    df = gas.physical_flux(u_plus, g, n.n) - gas.physical_flux(u_minus, g, n.n)
    return dU * n.n_t + df


def rh_residual_relative(u_minus: PrimitiveState, u_plus: PrimitiveState,
                         n: SpaceTimeNormal, g: GasModel) -> float:
    """Max-norm RH defect relative to the larger flux magnitude of the sides."""
    res = rh_residual(u_minus, u_plus, n, g)
    scale = 0.0
    for u in (u_minus, u_plus):
        scale = max(scale,
                    float(np.max(np.abs(gas.physical_flux(u, g, n.n)))),
                    abs(n.n_t) * float(np.max(np.abs(gas.to_conservative(u, g)))))
    return float(np.max(np.abs(res))) / max(scale, 1e-300)


def eef_jump_residual(u_minus: PrimitiveState, u_plus: PrimitiveState,
                      n: SpaceTimeNormal, g: GasModel) -> float:
    """Entropy-pair jump (eta+ - eta-) n_t + (psi+ - psi-).n.

    Admissible discontinuities make this nonpositive; swapping the sides
    while keeping n flips its sign.
    """
    pair_m = gas.entropy_pair(u_minus, g)
    pair_p = gas.entropy_pair(u_plus, g)
    return float((pair_p.eta - pair_m.eta) * n.n_t + (pair_p.psi - pair_m.psi) @ n.n)


def entropy_jump_admissible(u_minus: PrimitiveState, u_plus: PrimitiveState,
                            n, tol: float | None = None) -> bool:
    """Normal-velocity admissibility: (v+ - v-).n <= tol.

    Equivalent to the entropy-pair jump inequality for both polytropic
    models; independent of which side is labelled minus.
    """
    n = np.asarray(n, dtype=float)
    if tol is None:
        tol = 1e-12 * (1.0 + max(u_minus.speed, u_plus.speed))
    return float((u_plus.v - u_minus.v) @ n) <= tol


def verify_interfaces(spec: SolutionTSpec):
    """RH / EEF / admissibility numbers for every interface of a field.

    Returns a list of dicts, one per interface, used by the verification
    report and the acceptance suite.
    """
    rows = []
    for iface in spec.interfaces:
        scale = 0.0
        for u in (iface.minus, iface.plus):
            pair = gas.entropy_pair(u, spec.model)
            scale = max(scale, abs(pair.eta) * abs(iface.normal.n_t)
                        + float(np.max(np.abs(pair.psi))))
        rows.append({
            "angle_deg": math.degrees(iface.angle),
            "kind": iface.kind,
            "rh_rel": rh_residual_relative(iface.minus, iface.plus, iface.normal, spec.model),
            "eef_jump": eef_jump_residual(iface.minus, iface.plus, iface.normal, spec.model),
            "eef_scale": max(scale, 1e-300),
            "admissible": entropy_jump_admissible(iface.minus, iface.plus, iface.normal.n),
        })
    return rows

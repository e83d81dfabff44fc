"""Exact 1D Riemann solvers and interface fluxes for both gas models.

The scalar entry points (:func:`solve_exact`, :func:`sample`,
:func:`godunov_flux`, :func:`moving_edge_flux`) work on single states and
are the reference implementation.  The ``batch_*`` functions repeat the
same mathematics vectorized over whole edge arrays; the finite-volume
solver uses those, and the test suite pins scalar/batch agreement.

Star-region iteration follows the standard pressure-function formulation
(Toro, "Riemann Solvers and Numerical Methods for Fluid Dynamics", ch. 4):
Newton steps on phi(p) = f_L(p) + f_R(p) + (u_R - u_L) safeguarded by a
shrinking bracket, run to machine precision.

For the isentropic law p = kappa*rho**gamma the same structure applies
with the barotropic shock branch f_K = sqrt((p-p_K)(1/rho_K - 1/rho(p)))
and rarefaction branch f_K = 2(c(p)-c_K)/(gamma-1); there is no contact
wave, but the tangential velocity still slips at the particle speed u*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gas
from .errors import VacuumError
from .gas import GasModel, PrimitiveState

_MAX_ITER = 100
_PTOL = 1e-15

SHOCK = "shock"
RAREFACTION = "rarefaction"


@dataclass(frozen=True)
class Wave:
    """One outer wave of the fan: a shock (head == tail) or a rarefaction."""

    kind: str
    head: float
    tail: float

    @property
    def speed(self) -> float:
        return self.head


@dataclass(frozen=True)
class WaveFan:
    """Structure of the exact Riemann solution in the edge-normal frame.

    Velocities are (normal, tangential); ``star_v`` is the normal velocity
    of the star region, ``contact_speed`` the speed at which tangential
    velocity (and, for the full model, density) may jump.
    """

    left: PrimitiveState
    right: PrimitiveState
    star_p: float
    star_v: float
    star_left_rho: float
    star_right_rho: float
    left_wave: Wave
    right_wave: Wave
    contact_speed: float
    model: GasModel


# ---------------------------------------------------------------------------
# Pressure-function branches.
# ---------------------------------------------------------------------------

def _fK_full(p, pK, rhoK, aK, gamma):
    """f_K and f_K' for the full Euler model (scalar or array p)."""
    A = 2.0 / ((gamma + 1.0) * rhoK)
    B = (gamma - 1.0) / (gamma + 1.0) * pK
    z = (gamma - 1.0) / (2.0 * gamma)
    shock = p > pK
    sq = np.sqrt(A / (p + B))
    f_s = (p - pK) * sq
    df_s = sq * (1.0 - 0.5 * (p - pK) / (B + p))
    ratio = np.maximum(p, 0.0) / pK
    f_r = 2.0 * aK / (gamma - 1.0) * (ratio**z - 1.0)
    with np.errstate(divide="ignore"):
        df_r = ratio ** (-0.5 * (gamma + 1.0) / gamma) / (rhoK * aK)
    return np.where(shock, f_s, f_r), np.where(shock, df_s, df_r)


def _fK_isentropic(p, pK, rhoK, cK, gamma, kappa):
    """f_K and f_K' for the barotropic law p = kappa*rho**gamma."""
    rho_of_p = (np.maximum(p, 0.0) / kappa) ** (1.0 / gamma)
    c_of_p = np.sqrt(gamma * np.maximum(p, 0.0) / np.maximum(rho_of_p, 1e-300))
    shock = p > pK
    with np.errstate(divide="ignore", invalid="ignore"):
        dv = 1.0 / rhoK - 1.0 / rho_of_p
        f_s_sq = (p - pK) * dv
        f_s = np.sqrt(np.maximum(f_s_sq, 0.0))
        # d/dp sqrt((p-pK)(1/rhoK - 1/rho(p))); rho'(p) = rho/(gamma p)
        df_s = np.where(
            f_s > 0.0,
            (dv + (p - pK) / (rho_of_p * gamma * np.maximum(p, 1e-300))) / (2.0 * np.maximum(f_s, 1e-300)),
            1.0 / (rhoK * np.maximum(cK, 1e-300)),
        )
        f_r = 2.0 * (c_of_p - cK) / (gamma - 1.0)
        df_r = c_of_p / (gamma * np.maximum(p, 1e-300))
    return np.where(shock, f_s, f_r), np.where(shock, df_s, df_r)


def _pressure_fun(g: GasModel, pL, rhoL, aL, pR, rhoR, aR):
    if g.kind == gas.NONISENTROPIC:
        gamma = g.gamma
        AL = 2.0 / ((gamma + 1.0) * rhoL)
        BL = (gamma - 1.0) / (gamma + 1.0) * pL
        AR = 2.0 / ((gamma + 1.0) * rhoR)
        BR = (gamma - 1.0) / (gamma + 1.0) * pR
        z = (gamma - 1.0) / (2.0 * gamma)

        def side(p, pK, rhoK, aK, A, B):
            shock = p > pK
            sq = np.sqrt(A / (p + B))
            ratio = np.maximum(p, 0.0) / pK
            with np.errstate(divide="ignore"):
                f = np.where(shock, (p - pK) * sq,
                             2.0 * aK / (gamma - 1.0) * (ratio**z - 1.0))
                df = np.where(shock, sq * (1.0 - 0.5 * (p - pK) / (B + p)),
                              ratio ** (-0.5 * (gamma + 1.0) / gamma) / (rhoK * aK))
            return f, df

        def phi(p, idx=None):
            if idx is None:
                fL, dL = side(p, pL, rhoL, aL, AL, BL)
                fR, dR = side(p, pR, rhoR, aR, AR, BR)
            else:
                fL, dL = side(p, pL[idx], rhoL[idx], aL[idx], AL[idx], BL[idx])
                fR, dR = side(p, pR[idx], rhoR[idx], aR[idx], AR[idx], BR[idx])
            return fL + fR, dL + dR, fL, fR
    else:
        def phi(p, idx=None):
            if idx is None:
                fL, dL = _fK_isentropic(p, pL, rhoL, aL, g.gamma, g.kappa)
                fR, dR = _fK_isentropic(p, pR, rhoR, aR, g.gamma, g.kappa)
            else:
                fL, dL = _fK_isentropic(p, pL[idx], rhoL[idx], aL[idx], g.gamma, g.kappa)
                fR, dR = _fK_isentropic(p, pR[idx], rhoR[idx], aR[idx], g.gamma, g.kappa)
            return fL + fR, dL + dR, fL, fR
    return phi


def _initial_guess(g: GasModel, pL, rhoL, aL, pR, rhoR, aR, du):
    """Adaptive starting pressure (primitive-variable estimate, clipped)."""
    p_pv = 0.5 * (pL + pR) - 0.125 * du * (rhoL + rhoR) * (aL + aR)
    p_min = np.minimum(pL, pR)
    p_max = np.maximum(pL, pR)
    if g.kind == gas.NONISENTROPIC:
        z = (g.gamma - 1.0) / (2.0 * g.gamma)
        with np.errstate(over="ignore"):
            p_tr = ((aL + aR - 0.5 * (g.gamma - 1.0) * du)
                    / (aL / pL**z + aR / pR**z)) ** (1.0 / z)
        guess = np.where(p_pv < p_min, p_tr, np.minimum(p_pv, 8.0 * p_max))
    else:
        guess = np.minimum(np.maximum(p_pv, 0.5 * p_min), 8.0 * p_max)
    return np.maximum(guess, 1e-12 * p_min)


def _solve_star_pressure(phi, pL, pR, du, guess=None):
    """Bracketed Newton iteration for the star pressure (array-safe).

    Iterates only the not-yet-converged rows; stops when the Newton step
    is at rounding level relative to the iterate.
    """
    pL = np.atleast_1d(np.asarray(pL, dtype=float))
    pR = np.atleast_1d(np.asarray(pR, dtype=float))
    du = np.atleast_1d(np.asarray(du, dtype=float))
    plo = np.zeros_like(pL)
    phi_hi = np.maximum(pL, pR)
    for _ in range(200):
        val = phi(phi_hi)[0] + du
        need = val < 0.0
        if not np.any(need):
            break
        phi_hi = np.where(need, 4.0 * phi_hi, phi_hi)
    p = 0.5 * (pL + pR) if guess is None else np.minimum(np.maximum(guess, plo), phi_hi)
    active = np.arange(len(p))
    for _ in range(_MAX_ITER):
        f, df, _, _ = phi(p[active], active)
        f = f + du[active]
        pa = p[active]
        pos = f > 0.0
        plo[active] = np.where(pos, plo[active], pa)
        phi_hi[active] = np.where(pos, pa, phi_hi[active])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(df > 0.0, f / df, 0.0)
        p_new = pa - step
        bad = ~np.isfinite(p_new) | (p_new <= plo[active]) | (p_new >= phi_hi[active])
        mid_ok = phi_hi[active] > plo[active]
        p_new = np.where(bad & mid_ok, 0.5 * (plo[active] + phi_hi[active]), p_new)
        p_new = np.where(bad & ~mid_ok, pa, p_new)
        done = np.abs(p_new - pa) <= _PTOL * np.abs(p_new)
        p[active] = p_new
        active = active[~done]
        if len(active) == 0:
            break
    return p


def _split(state: PrimitiveState):
    return state.rho, float(state.v[0]), float(state.v[1])


def solve_exact(left: PrimitiveState, right: PrimitiveState, g: GasModel) -> WaveFan:
    """Exact Riemann solution for states given in the edge-normal frame.

    ``v[0]`` is the normal velocity component, ``v[1]`` tangential.
    Raises :class:`VacuumError` when the data would open a vacuum region.
    """
    gas.validate_state(left, g)
    gas.validate_state(right, g)
    rhoL, unL, _ = _split(left)
    rhoR, unR, _ = _split(right)
    pL = gas.pressure(left, g)
    pR = gas.pressure(right, g)
    aL = gas.sound_speed(left, g)
    aR = gas.sound_speed(right, g)
    gamma = g.gamma

    if unR - unL >= 2.0 * (aL + aR) / (gamma - 1.0):
        raise VacuumError(
            f"vacuum generation: du = {unR - unL:.6g} exceeds the "
            f"two-rarefaction bound {2.0 * (aL + aR) / (gamma - 1.0):.6g}"
        )

    phi = _pressure_fun(g, pL, rhoL, aL, pR, rhoR, aR)
    p_star = float(_solve_star_pressure(phi, pL, pR, unR - unL))
    _, _, fL, fR = phi(p_star)
    u_star = 0.5 * (unL + unR) + 0.5 * (float(fR) - float(fL))

    if g.kind == gas.NONISENTROPIC:
        mu2 = (gamma - 1.0) / (gamma + 1.0)
        z = (gamma - 1.0) / (2.0 * gamma)
        if p_star > pL:
            r = p_star / pL
            rho_sl = rhoL * (r + mu2) / (mu2 * r + 1.0)
            sL = unL - aL * np.sqrt((gamma + 1.0) / (2.0 * gamma) * r + z)
            left_wave = Wave(SHOCK, float(sL), float(sL))
        else:
            rho_sl = rhoL * (p_star / pL) ** (1.0 / gamma)
            a_sl = aL * (p_star / pL) ** z
            left_wave = Wave(RAREFACTION, unL - aL, u_star - a_sl)
        if p_star > pR:
            r = p_star / pR
            rho_sr = rhoR * (r + mu2) / (mu2 * r + 1.0)
            sR = unR + aR * np.sqrt((gamma + 1.0) / (2.0 * gamma) * r + z)
            right_wave = Wave(SHOCK, float(sR), float(sR))
        else:
            rho_sr = rhoR * (p_star / pR) ** (1.0 / gamma)
            a_sr = aR * (p_star / pR) ** z
            right_wave = Wave(RAREFACTION, unR + aR, u_star + a_sr)
    else:
        rho_star = (p_star / g.kappa) ** (1.0 / gamma)
        rho_sl = rho_sr = float(rho_star)
        c_star = np.sqrt(gamma * p_star / rho_star)
        if p_star > pL:
            sL = (rho_star * u_star - rhoL * unL) / (rho_star - rhoL)
            left_wave = Wave(SHOCK, float(sL), float(sL))
        else:
            left_wave = Wave(RAREFACTION, unL - aL, u_star - float(c_star))
        if p_star > pR:
            sR = (rho_star * u_star - rhoR * unR) / (rho_star - rhoR)
            right_wave = Wave(SHOCK, float(sR), float(sR))
        else:
            right_wave = Wave(RAREFACTION, unR + aR, u_star + float(c_star))

    return WaveFan(
        left=left,
        right=right,
        star_p=p_star,
        star_v=u_star,
        star_left_rho=float(rho_sl),
        star_right_rho=float(rho_sr),
        left_wave=left_wave,
        right_wave=right_wave,
        contact_speed=u_star,
        model=g,
    )


def sample(fan: WaveFan, xi: float) -> PrimitiveState:
    """State of the fan at similarity ratio xi = x/t (edge-normal frame)."""
    g = fan.model
    gamma = g.gamma
    if xi < fan.contact_speed:
        state, wave = fan.left, fan.left_wave
        rho_star, sign = fan.star_left_rho, 1.0
    else:
        state, wave = fan.right, fan.right_wave
        rho_star, sign = fan.star_right_rho, -1.0
    rhoK, unK, utK = _split(state)
    pK = gas.pressure(state, g)
    aK = gas.sound_speed(state, g)

    # Outside the outer wave: unperturbed data.
    if sign * xi < sign * wave.head:
        return state

    if wave.kind == RAREFACTION and sign * xi < sign * wave.tail:
        if g.kind == gas.NONISENTROPIC:
            common = 2.0 / (gamma + 1.0) + sign * (gamma - 1.0) / ((gamma + 1.0) * aK) * (unK - xi)
            rho = rhoK * common ** (2.0 / (gamma - 1.0))
            un = 2.0 / (gamma + 1.0) * (sign * aK + (gamma - 1.0) / 2.0 * unK + xi)
            p = pK * common ** (2.0 * gamma / (gamma - 1.0))
            return gas.state_from_rho_p(rho, (un, utK), p, g)
        c = sign * (gamma - 1.0) / (gamma + 1.0) * (unK + sign * 2.0 * aK / (gamma - 1.0) - xi)
        un = xi + sign * c
        rho = (c * c / (gamma * g.kappa)) ** (1.0 / (gamma - 1.0))
        return PrimitiveState(rho, (un, utK))

    # Star region on this side of the contact.
    return gas.state_from_rho_p(rho_star, (fan.star_v, utK), fan.star_p, g)


# ---------------------------------------------------------------------------
# Frame rotation and fluxes.
# ---------------------------------------------------------------------------

def _to_frame(state: PrimitiveState, n) -> PrimitiveState:
    n = np.asarray(n, dtype=float)
    vn = state.v[0] * n[0] + state.v[1] * n[1]
    vt = -state.v[0] * n[1] + state.v[1] * n[0]
    return PrimitiveState(state.rho, (vn, vt), state.q)


def _from_frame(state: PrimitiveState, n) -> PrimitiveState:
    n = np.asarray(n, dtype=float)
    vx = state.v[0] * n[0] - state.v[1] * n[1]
    vy = state.v[0] * n[1] + state.v[1] * n[0]
    return PrimitiveState(state.rho, (vx, vy), state.q)


def interface_state(uL: PrimitiveState, uR: PrimitiveState, g: GasModel, n) -> PrimitiveState:
    """Exact Riemann interface state (fan sampled on the edge), world frame."""
    fan = solve_exact(_to_frame(uL, n), _to_frame(uR, n), g)
    return _from_frame(sample(fan, 0.0), n)


def godunov_flux(uL: PrimitiveState, uR: PrimitiveState, g: GasModel, n) -> np.ndarray:
    """Godunov numerical flux through a static edge with unit normal n."""
    return gas.physical_flux(interface_state(uL, uR, g, n), g, n)


def rusanov_flux(uL: PrimitiveState, uR: PrimitiveState, g: GasModel, n, w=(0.0, 0.0)) -> np.ndarray:
    """Local Lax-Friedrichs flux; with edge velocity w it is the ALE variant."""
    n = np.asarray(n, dtype=float)
    w = np.asarray(w, dtype=float)
    wn = float(w @ n)
    UL = gas.to_conservative(uL, g)
    UR = gas.to_conservative(uR, g)
    lam = max(
        abs(float(uL.v @ n) - wn) + gas.sound_speed(uL, g),
        abs(float(uR.v @ n) - wn) + gas.sound_speed(uR, g),
    )
    central = 0.5 * (gas.physical_flux(uL, g, n) + gas.physical_flux(uR, g, n)) - 0.5 * wn * (UL + UR)
    return central - 0.5 * lam * (UR - UL)


def moving_edge_flux(uL: PrimitiveState, uR: PrimitiveState, g: GasModel, n, w,
                     return_state: bool = False):
    """Godunov flux through an edge moving with velocity w.

    Both states are shifted into the frame of the edge (change of inertial
    frame), the steady-edge Riemann problem is sampled at xi = 0, and the
    interface state u* is shifted back.  The returned flux is
    f(u*).n - (w.n) U*, the conservative flux through the moving edge.
    """
    n = np.asarray(n, dtype=float)
    w = np.asarray(w, dtype=float)
    star = interface_state(uL.boosted(w), uR.boosted(w), g, n).boosted(-w)
    flux = gas.physical_flux(star, g, n) - float(w @ n) * gas.to_conservative(star, g)
    if return_state:
        return flux, star
    return flux


# ---------------------------------------------------------------------------
# MUSCL reconstruction.
# ---------------------------------------------------------------------------

def minmod(a, b):
    """Componentwise minmod: the smaller-magnitude argument if signs agree."""
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def muscl_states(u3: np.ndarray, x3, x_faces, g: GasModel):
    """Limited linear face extrapolations of the middle cell of a 3-stencil.

    u3 holds three conservative cell averages at 1D coordinates x3;
    x_faces are the positions of the middle cell's two faces.  Returns the
    (low-face, high-face) conservative states; falls back to the cell
    average when a reconstructed value would leave the admissible set.
    """
    u3 = np.asarray(u3, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    slope = minmod((u3[2] - u3[1]) / (x3[2] - x3[1]), (u3[1] - u3[0]) / (x3[1] - x3[0]))
    lo = u3[1] + slope * (x_faces[0] - x3[1])
    hi = u3[1] + slope * (x_faces[1] - x3[1])
    if not (gas.batch_admissible(lo[None, :], g)[0] and gas.batch_admissible(hi[None, :], g)[0]):
        return u3[1].copy(), u3[1].copy()
    return lo, hi


# ---------------------------------------------------------------------------
# Vectorized interface solve for the solver hot path.
# ---------------------------------------------------------------------------

def _batch_sample_zero(g: GasModel, rhoL, unL, pL, aL, rhoR, unR, pR, aR, p_star, u_star):
    """Sample the fan of every row at xi = 0; returns (rho, un, p, left_mask)."""
    gamma = g.gamma
    left_side = u_star > 0.0

    if g.kind == gas.NONISENTROPIC:
        mu2 = (gamma - 1.0) / (gamma + 1.0)
        z = (gamma - 1.0) / (2.0 * gamma)
        rL = p_star / pL
        rho_sl = rhoL * (rL + mu2) / (mu2 * rL + 1.0)
        rho_sl = np.where(p_star > pL, rho_sl, rhoL * rL ** (1.0 / gamma))
        rR = p_star / pR
        rho_sr = rhoR * (rR + mu2) / (mu2 * rR + 1.0)
        rho_sr = np.where(p_star > pR, rho_sr, rhoR * rR ** (1.0 / gamma))
        a_sl = aL * rL**z
        a_sr = aR * rR**z
        headL = unL - aL
        tailL = u_star - a_sl
        headR = unR + aR
        tailR = u_star + a_sr
        shock_sL = unL - aL * np.sqrt((gamma + 1.0) / (2.0 * gamma) * rL + z)
        shock_sR = unR + aR * np.sqrt((gamma + 1.0) / (2.0 * gamma) * rR + z)
        commonL = 2.0 / (gamma + 1.0) + (gamma - 1.0) / ((gamma + 1.0) * aL) * unL
        commonR = 2.0 / (gamma + 1.0) - (gamma - 1.0) / ((gamma + 1.0) * aR) * unR
        fanL_rho = rhoL * np.maximum(commonL, 0.0) ** (2.0 / (gamma - 1.0))
        fanL_p = pL * np.maximum(commonL, 0.0) ** (2.0 * gamma / (gamma - 1.0))
        fanL_un = 2.0 / (gamma + 1.0) * (aL + (gamma - 1.0) / 2.0 * unL)
        fanR_rho = rhoR * np.maximum(commonR, 0.0) ** (2.0 / (gamma - 1.0))
        fanR_p = pR * np.maximum(commonR, 0.0) ** (2.0 * gamma / (gamma - 1.0))
        fanR_un = 2.0 / (gamma + 1.0) * (-aR + (gamma - 1.0) / 2.0 * unR)
    else:
        rho_star = (p_star / g.kappa) ** (1.0 / gamma)
        rho_sl = rho_sr = rho_star
        c_star = np.sqrt(gamma * p_star / rho_star)
        with np.errstate(divide="ignore", invalid="ignore"):
            sL_shock = (rho_star * u_star - rhoL * unL) / (rho_star - rhoL)
            sR_shock = (rho_star * u_star - rhoR * unR) / (rho_star - rhoR)
        shock_sL = np.where(np.abs(rho_star - rhoL) > 0.0, sL_shock, unL - aL)
        shock_sR = np.where(np.abs(rho_star - rhoR) > 0.0, sR_shock, unR + aR)
        headL = unL - aL
        tailL = u_star - c_star
        headR = unR + aR
        tailR = u_star + c_star
        cL_fan = (gamma - 1.0) / (gamma + 1.0) * (unL + 2.0 * aL / (gamma - 1.0))
        cR_fan = (gamma - 1.0) / (gamma + 1.0) * (-unR + 2.0 * aR / (gamma - 1.0))
        fanL_un = cL_fan
        fanR_un = -cR_fan
        fanL_rho = (np.maximum(cL_fan, 0.0) ** 2 / (gamma * g.kappa)) ** (1.0 / (gamma - 1.0))
        fanR_rho = (np.maximum(cR_fan, 0.0) ** 2 / (gamma * g.kappa)) ** (1.0 / (gamma - 1.0))
        fanL_p = g.kappa * fanL_rho**gamma
        fanR_p = g.kappa * fanR_rho**gamma

    shockL = p_star > pL
    shockR = p_star > pR

    # Left of the contact: data / fan / star-left depending on wave position.
    rho_left = np.where(
        shockL,
        np.where(shock_sL > 0.0, rhoL, rho_sl),
        np.where(headL > 0.0, rhoL, np.where(tailL > 0.0, fanL_rho, rho_sl)),
    )
    un_left = np.where(
        shockL,
        np.where(shock_sL > 0.0, unL, u_star),
        np.where(headL > 0.0, unL, np.where(tailL > 0.0, fanL_un, u_star)),
    )
    p_left = np.where(
        shockL,
        np.where(shock_sL > 0.0, pL, p_star),
        np.where(headL > 0.0, pL, np.where(tailL > 0.0, fanL_p, p_star)),
    )
    rho_right = np.where(
        shockR,
        np.where(shock_sR < 0.0, rhoR, rho_sr),
        np.where(headR < 0.0, rhoR, np.where(tailR < 0.0, fanR_rho, rho_sr)),
    )
    un_right = np.where(
        shockR,
        np.where(shock_sR < 0.0, unR, u_star),
        np.where(headR < 0.0, unR, np.where(tailR < 0.0, fanR_un, u_star)),
    )
    p_right = np.where(
        shockR,
        np.where(shock_sR < 0.0, pR, p_star),
        np.where(headR < 0.0, pR, np.where(tailR < 0.0, fanR_p, p_star)),
    )

    rho = np.where(left_side, rho_left, rho_right)
    un = np.where(left_side, un_left, un_right)
    p = np.where(left_side, p_left, p_right)
    return rho, un, p, left_side


def batch_moving_edge_godunov(UL: np.ndarray, UR: np.ndarray, n: np.ndarray,
                              w: np.ndarray, g: GasModel):
    """Vectorized moving-edge Godunov flux for (E, m) state arrays.

    Returns (flux, U_star) where U_star holds the conservative interface
    states used for entropy-flux records.  Raises VacuumError if any edge
    pair would generate vacuum.
    """
    gamma = g.gamma
    rhoL, vxL, vyL, pL = gas.batch_primitive(UL, g)
    rhoR, vxR, vyR, pR = gas.batch_primitive(UR, g)
    nx, ny = n[:, 0], n[:, 1]
    wn = w[:, 0] * nx + w[:, 1] * ny
    wt = -w[:, 0] * ny + w[:, 1] * nx
    # Rotate into the edge frame and boost away the edge velocity.
    unL = vxL * nx + vyL * ny - wn
    utL = -vxL * ny + vyL * nx - wt
    unR = vxR * nx + vyR * ny - wn
    utR = -vxR * ny + vyR * nx - wt
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)

    bound = 2.0 * (aL + aR) / (gamma - 1.0)
    if np.any(unR - unL >= bound):
        k = int(np.argmax((unR - unL) - bound))
        raise VacuumError(f"vacuum generation at {int(np.sum(unR - unL >= bound))} "
                          f"edge(s), first at index {k}")

    phi = _pressure_fun(g, pL, rhoL, aL, pR, rhoR, aR)
    p_star = _solve_star_pressure(phi, pL, pR, unR - unL)
    _, _, fL, fR = phi(p_star)
    u_star = 0.5 * (unL + unR) + 0.5 * (fR - fL)

    rho, un, p = _batch_sample_zero(g, rhoL, unL, pL, aL, rhoR, unR, pR, aR, p_star, u_star)[:3]
    ut = np.where(u_star > 0.0, utL, utR)

    # Undo boost and rotation.
    vx = (un + wn) * nx - (ut + wt) * ny
    vy = (un + wn) * ny + (ut + wt) * nx
    U_star = gas.batch_conservative(rho, vx, vy, p, g)
    vn = vx * nx + vy * ny
    mass = rho * vn
    momx = rho * vx * vn + p * nx
    momy = rho * vy * vn + p * ny
    if g.kind == gas.NONISENTROPIC:
        rho_e = U_star[:, 3]
        flux = np.stack([mass, momx, momy, (rho_e + p) * vn], axis=-1)
    else:
        flux = np.stack([mass, momx, momy], axis=-1)
    return flux - wn[:, None] * U_star, U_star


def batch_moving_edge_rusanov(UL: np.ndarray, UR: np.ndarray, n: np.ndarray,
                              w: np.ndarray, g: GasModel):
    """Vectorized ALE Rusanov flux plus its numerical entropy flux."""
    rhoL, vxL, vyL, pL = gas.batch_primitive(UL, g)
    rhoR, vxR, vyR, pR = gas.batch_primitive(UR, g)
    nx, ny = n[:, 0], n[:, 1]
    wn = w[:, 0] * nx + w[:, 1] * ny
    aL = np.sqrt(g.gamma * pL / rhoL)
    aR = np.sqrt(g.gamma * pR / rhoR)
    lam = np.maximum(np.abs(vxL * nx + vyL * ny - wn) + aL,
                     np.abs(vxR * nx + vyR * ny - wn) + aR)

    def flux_n(rho, vx, vy, p, U):
        vn = vx * nx + vy * ny
        cols = [rho * vn, rho * vx * vn + p * nx, rho * vy * vn + p * ny]
        if g.kind == gas.NONISENTROPIC:
            cols.append((U[:, 3] + p) * vn)
        return np.stack(cols, axis=-1)

    FL = flux_n(rhoL, vxL, vyL, pL, UL)
    FR = flux_n(rhoR, vxR, vyR, pR, UR)
    flux = (0.5 * (FL + FR) - 0.5 * wn[:, None] * (UL + UR)
            - 0.5 * lam[:, None] * (UR - UL))
    etaL, psixL, psiyL = gas.batch_entropy(UL, g)
    etaR, psixR, psiyR = gas.batch_entropy(UR, g)
    entropy_flux = (0.5 * ((psixL + psixR) * nx + (psiyL + psiyR) * ny)
                    - 0.5 * wn * (etaL + etaR) - 0.5 * lam * (etaR - etaL))
    return flux, entropy_flux

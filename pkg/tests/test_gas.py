import math

import numpy as np
import pytest

from eulerlab import (GasModel, InvalidStateError, PrimitiveState, entropy_pair,
                      physical_flux, pressure, sound_speed, to_conservative,
                      to_primitive)
from eulerlab import gas
from eulerlab.gas import state_from_rho_p

import oracles
from conftest import random_state


def test_model_validation():
    with pytest.raises(ValueError):
        GasModel(gamma=1.0)
    with pytest.raises(ValueError):
        GasModel(gamma=1.8)
    with pytest.raises(ValueError):
        GasModel("isentropic", 1.4, kappa=-1.0)
    with pytest.raises(ValueError):
        GasModel("weird")
    assert GasModel().ncons == 4
    assert GasModel("isentropic").ncons == 3


def test_conversion_zero_velocity(air):
    u = to_conservative(PrimitiveState(1.0, (0.0, 0.0), 1.0), air)
    assert np.array_equal(u, [1.0, 0.0, 0.0, 1.0])


def test_conversion_paper_inflow(air, inflow):
    # Ideal-gas arithmetic fixture: q = R T / (gamma - 1), rho e = rho (v^2/2 + q).
    assert inflow.q == pytest.approx(2.1038e5, rel=1e-4)
    u = to_conservative(inflow, air)
    assert u[3] == pytest.approx(oracles.RHOE_INFLOW, rel=1e-14)
    assert u[3] == pytest.approx(8.453e5, rel=1e-4)
    assert u[1] == pytest.approx(1190.0, rel=1e-14)


@pytest.mark.parametrize("kind", ["nonisentropic", "isentropic"])
def test_round_trip(kind, rng, air, iso):
    g = air if kind == "nonisentropic" else iso
    for _ in range(100):
        p = random_state(rng, g)
        back = to_primitive(to_conservative(p, g), g)
        assert back.rho == pytest.approx(p.rho, rel=1e-13)
        assert back.v == pytest.approx(p.v, rel=1e-13, abs=1e-13 * p.speed)
        if g.kind == "nonisentropic":
            assert back.q == pytest.approx(p.q, rel=1e-13)


def test_invalid_states(air, iso):
    with pytest.raises(InvalidStateError):
        pressure(PrimitiveState(-1.0, (0, 0), 1.0), air)
    with pytest.raises(InvalidStateError):
        pressure(PrimitiveState(1.0, (0, 0), -2.0), air)
    with pytest.raises(InvalidStateError):
        pressure(PrimitiveState(1.0, (0, 0)), air)       # q missing
    with pytest.raises(InvalidStateError):
        pressure(PrimitiveState(1.0, (0, 0), 1.0), iso)  # q forbidden
    with pytest.raises(InvalidStateError):
        to_primitive(np.array([1.0, 3.0, 0.0, 1.0]), air)  # kinetic > total


def test_pressure_examples(air, iso, inflow):
    assert pressure(PrimitiveState(1.0, (0, 0)), GasModel("isentropic", 1.4, 1.0)) == 1.0
    g15 = GasModel(gamma=1.5)
    assert pressure(PrimitiveState(2.0, (0, 0), 1.0), g15) == 1.0
    # cross-check against p = rho R T
    assert pressure(inflow, air) == pytest.approx(oracles.P_INFLOW, rel=1e-12)
    assert pressure(inflow, air) == pytest.approx(1.0014e5, rel=1e-4)


def test_sound_speed(air, inflow):
    st = state_from_rho_p(1.4, (0.0, 0.0), 1.0, air)
    assert sound_speed(st, air) == pytest.approx(1.0, rel=1e-14)
    assert sound_speed(inflow, air) == pytest.approx(oracles.C_INFLOW, rel=1e-12)
    assert inflow.speed / sound_speed(inflow, air) == pytest.approx(2.914, abs=1e-3)
    # strictly increasing in pressure at fixed density
    ps = np.linspace(0.5, 5.0, 20)
    cs = [sound_speed(state_from_rho_p(1.3, (0, 0), p, air), air) for p in ps]
    assert np.all(np.diff(cs) > 0)


def test_flux_pure_pressure(air):
    st = PrimitiveState(2.0, (0.0, 0.0), 3.0)
    p = pressure(st, air)
    n = np.array([0.6, 0.8])
    f = physical_flux(st, air, n)
    assert f == pytest.approx([0.0, p * 0.6, p * 0.8, 0.0])


def test_flux_rotation_equivariance(air, rng):
    for _ in range(20):
        st = random_state(rng, air)
        th = rng.uniform(0, 2 * np.pi)
        R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        n = np.array([1.0, 0.0])
        st_rot = PrimitiveState(st.rho, R @ st.v, st.q)
        f = physical_flux(st, air, R.T @ n)
        f_rot = physical_flux(st_rot, air, n)
        assert f_rot[0] == pytest.approx(f[0], rel=1e-12, abs=1e-12)
        assert R @ f[1:3] == pytest.approx(f_rot[1:3], rel=1e-12, abs=1e-9)
        assert f_rot[3] == pytest.approx(f[3], rel=1e-12, abs=1e-12)


def test_flux_linearity_in_normal(air, rng, inflow):
    f1 = physical_flux(inflow, air, (1.0, 0.0))
    assert f1[0] == pytest.approx(1190.0)
    for _ in range(20):
        st = random_state(rng, air)
        n = rng.normal(size=2)
        n /= np.hypot(*n)
        fx = physical_flux(st, air, (1.0, 0.0))
        fy = physical_flux(st, air, (0.0, 1.0))
        assert physical_flux(st, air, n) == pytest.approx(n[0] * fx + n[1] * fy, rel=1e-13, abs=1e-13)


def test_entropy_pair_examples(air):
    pair = entropy_pair(PrimitiveState(1.0, (0.5, -0.5), 1.0), air)
    assert pair.s == 0.0 and pair.eta == 0.0 and pair.psi == pytest.approx([0.0, 0.0])
    pair = entropy_pair(PrimitiveState(1.0, (2.0, 0.0), math.e), air)
    assert pair.s == pytest.approx(1.0, rel=1e-15)
    assert pair.eta == pytest.approx(-1.0, rel=1e-15)
    pair = entropy_pair(PrimitiveState(1.0, (0.0, 0.0)), GasModel("isentropic", 1.4, 1.0))
    assert pair.eta == pytest.approx(2.5, rel=1e-14)


def test_entropy_pair_invariant_forms(air, iso, rng):
    for g in (air, iso):
        for _ in range(20):
            st = random_state(rng, g)
            pair = entropy_pair(st, g)
            if g.kind == "nonisentropic":
                assert pair.eta == pytest.approx(-st.rho * pair.s, rel=1e-14)
                assert pair.psi == pytest.approx(pair.eta * np.asarray(st.v), rel=1e-14)
            else:
                e = 0.5 * st.speed**2 + g.kappa * st.rho ** (g.gamma - 1) / (g.gamma - 1)
                assert pair.eta == pytest.approx(st.rho * e, rel=1e-13)
                assert pair.psi == pytest.approx(
                    (pair.eta + pressure(st, g)) * np.asarray(st.v), rel=1e-13)


def _fd_compatibility_gap(g, u0, direction, h):
    """|d psi_i - eta_u . d f_i| for a central difference of step h."""
    import eulerlab.gas as gas_mod

    def eta_of(u):
        return gas_mod.batch_entropy(u[None, :], g)[0][0]

    def psi_of(u):
        _, px, py = gas_mod.batch_entropy(u[None, :], g)
        return np.array([px[0], py[0]])

    def flux_of(u, axis):
        n = np.zeros((1, 2)); n[0, axis] = 1.0
        return gas_mod.batch_normal_flux(u[None, :], n, g)[0]

    m = g.ncons
    eta_grad = np.empty(m)
    for beta in range(m):
        e = np.zeros(m); e[beta] = h * max(abs(u0[beta]), 1.0)
        eta_grad[beta] = (eta_of(u0 + e) - eta_of(u0 - e)) / (2 * e[beta])
    gap = 0.0
    for axis in range(2):
        dpsi = (psi_of(u0 + h * direction) - psi_of(u0 - h * direction))[axis] / (2 * h)
        df = (flux_of(u0 + h * direction, axis) - flux_of(u0 - h * direction, axis)) / (2 * h)
        gap = max(gap, abs(dpsi - eta_grad @ df))
    return gap


@pytest.mark.parametrize("kind", ["nonisentropic", "isentropic"])
def test_entropy_flux_compatibility(kind, air, iso, rng):
    # d psi^i / du = eta_u (f^i)_u along random directions; the central
    # finite-difference discrepancy must shrink like O(h^2).
    g = air if kind == "nonisentropic" else iso
    for _ in range(50):
        st = random_state(rng, g, mach=1.0)
        u0 = to_conservative(st, g)
        direction = rng.normal(size=g.ncons) * np.maximum(np.abs(u0), 1.0)
        gap_h = _fd_compatibility_gap(g, u0, direction, 1e-4)
        gap_h2 = _fd_compatibility_gap(g, u0, direction, 5e-5)
        scale = np.abs(u0).max()
        assert gap_h2 <= 0.35 * gap_h + 1e-11 * scale


@pytest.mark.parametrize("kind", ["nonisentropic", "isentropic"])
def test_entropy_convexity_on_segments(kind, air, iso, rng):
    g = air if kind == "nonisentropic" else iso

    def eta_of(u):
        return gas.batch_entropy(u[None, :], g)[0][0]

    checked = 0
    while checked < 50:
        u1 = to_conservative(random_state(rng, g), g)
        u2 = to_conservative(random_state(rng, g), g)
        lam = rng.uniform(0.1, 0.9)
        mid = lam * u1 + (1 - lam) * u2
        if not gas.batch_admissible(mid[None, :], g)[0]:
            continue
        lhs = eta_of(mid)
        rhs = lam * eta_of(u1) + (1 - lam) * eta_of(u2)
        if np.allclose(u1, u2):
            continue
        assert lhs < rhs + 1e-12 * abs(rhs)
        checked += 1

"""Independent oracles for the test suite.

These deliberately re-derive reference values along different routes than
the library: plain bisection instead of safeguarded Newton for star
pressures, the closed-form deflection relation plus a brute-force angle
scan for oblique shocks, and ideal-gas arithmetic for the dimensional
inflow fixtures.  They live in the tests and are never imported by the
package.
"""

import math

import numpy as np


# ---------------------------------------------------------------------------
# Star-pressure bisection oracle.
# ---------------------------------------------------------------------------

def _hug_full(p, rho_k, p_k, gamma):
    """u-difference contribution of one side, full Euler gamma law."""
    a_k = math.sqrt(gamma * p_k / rho_k)
    if p > p_k:
        A = 2.0 / ((gamma + 1.0) * rho_k)
        B = (gamma - 1.0) / (gamma + 1.0) * p_k
        return (p - p_k) * math.sqrt(A / (p + B))
    return 2.0 * a_k / (gamma - 1.0) * ((p / p_k) ** ((gamma - 1.0) / (2 * gamma)) - 1.0)


def _hug_isentropic(p, rho_k, kappa, gamma):
    p_k = kappa * rho_k**gamma
    c_k = math.sqrt(gamma * p_k / rho_k)
    if p > p_k:
        rho = (p / kappa) ** (1.0 / gamma)
        return math.sqrt((p - p_k) * (1.0 / rho_k - 1.0 / rho))
    c = math.sqrt(gamma * kappa ** (1.0 / gamma) * p ** ((gamma - 1.0) / gamma))
    return 2.0 * (c - c_k) / (gamma - 1.0)


def star_pressure_bisection(rho_l, u_l, p_l, rho_r, u_r, p_r, gamma,
                            kappa=None, lo=1e-8, hi=2.0, tol=1e-12):
    """Star pressure by pure bisection on the velocity-matching function.

    ``kappa=None`` selects the full Euler gamma law, otherwise the
    barotropic law p = kappa rho^gamma (then p_l/p_r are ignored).
    """
    if kappa is None:
        def f(p):
            return _hug_full(p, rho_l, p_l, gamma) + _hug_full(p, rho_r, p_r, gamma) \
                + (u_r - u_l)
    else:
        def f(p):
            return _hug_isentropic(p, rho_l, kappa, gamma) \
                + _hug_isentropic(p, rho_r, kappa, gamma) + (u_r - u_l)

    flo = f(lo)
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("bisection oracle: no upper bracket")
    if flo > 0.0:
        raise RuntimeError("bisection oracle: no lower bracket")
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * mid:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Oblique-shock angle scan oracle.
# ---------------------------------------------------------------------------

def deflection_closed_form(sigma, mach, gamma):
    """Classical theta-beta-M relation for the full Euler gamma law."""
    ms2 = (mach * np.sin(sigma)) ** 2
    return np.arctan(2.0 / np.tan(sigma) * (ms2 - 1.0)
                     / (mach**2 * (gamma + np.cos(2.0 * sigma)) + 2.0))


def oblique_roots_scan(mach, gamma, alpha, n=2_000_000):
    """Both attached-shock angles by brute-force scan plus local bisection.

    Scans sigma over (asin(1/M), pi/2) on a uniform grid, brackets the sign
    changes of theta(sigma) - alpha and polishes each by bisection.
    Returns a sorted list of roots (empty if detached).
    """
    lo = math.asin(1.0 / mach) + 1e-9
    hi = 0.5 * math.pi - 1e-9
    sig = np.linspace(lo, hi, n)
    vals = deflection_closed_form(sig, mach, gamma) - alpha
    sign_change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    roots = []
    for k in sign_change:
        a, b = sig[k], sig[k + 1]
        fa = deflection_closed_form(a, mach, gamma) - alpha
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = deflection_closed_form(mid, mach, gamma) - alpha
            if fa * fm <= 0.0:
                b = mid
            else:
                a, fa = mid, fm
            if b - a < 1e-14:
                break
        roots.append(0.5 * (a + b))
    return sorted(roots)


def isentropic_deflection(sigma, rho1, speed, kappa, gamma):
    """Deflection for the barotropic law via an independent density bisection."""
    un1 = speed * math.sin(sigma)
    ut = speed * math.cos(sigma)
    p1 = kappa * rho1**gamma
    c1 = math.sqrt(gamma * p1 / rho1)
    if un1 <= c1:
        return 0.0
    j = rho1 * un1
    total = p1 + rho1 * un1**2

    def f(rho2):
        return kappa * rho2**gamma + j**2 / rho2 - total

    lo = rho1 * (1.0 + 1e-9)
    hi = rho1 * 2.0
    while f(hi) < 0.0:
        hi *= 2.0
    # skip the trivial root at rho1: f starts negative just above rho1
    while f(lo) > 0.0:
        lo *= 1.0 + 1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    rho2 = 0.5 * (lo + hi)
    un2 = j / rho2
    return sigma - math.atan2(un2, ut)


def isentropic_roots_scan(rho1, speed, kappa, gamma, alpha, n=20_000):
    c1 = math.sqrt(gamma * kappa * rho1 ** (gamma - 1.0))
    lo = math.asin(c1 / speed) + 1e-7
    hi = 0.5 * math.pi - 1e-7
    sig = np.linspace(lo, hi, n)
    vals = np.array([isentropic_deflection(s, rho1, speed, kappa, gamma) for s in sig]) - alpha
    sign_change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    roots = []
    for k in sign_change:
        a, b = sig[k], sig[k + 1]
        fa = isentropic_deflection(a, rho1, speed, kappa, gamma) - alpha
        for _ in range(100):
            mid = 0.5 * (a + b)
            fm = isentropic_deflection(mid, rho1, speed, kappa, gamma) - alpha
            if fa * fm <= 0.0:
                b = mid
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b))
    return sorted(roots)


# ---------------------------------------------------------------------------
# Dimensional fixtures from ideal-gas arithmetic.
# ---------------------------------------------------------------------------

R_AIR = 287.058
T_INFLOW = 293.15          # 20 C
RHO_INFLOW = 1.19
SPEED_INFLOW = 1000.0
GAMMA_AIR = 1.4

Q_INFLOW = R_AIR * T_INFLOW / (GAMMA_AIR - 1.0)          # 2.1038e5 J/kg
P_INFLOW = RHO_INFLOW * R_AIR * T_INFLOW                 # 1.0014e5 Pa
C_INFLOW = math.sqrt(GAMMA_AIR * R_AIR * T_INFLOW)       # 343.2 m/s
RHOE_INFLOW = RHO_INFLOW * (0.5 * SPEED_INFLOW**2 + Q_INFLOW)

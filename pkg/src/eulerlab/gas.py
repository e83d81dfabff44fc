"""Gas models, state conversions, physical fluxes and entropy pairs.

Two polytropic models are supported:

* ``nonisentropic``: full compressible Euler, state (rho, v, q) with
  specific internal energy q and pressure p = (gamma-1)*rho*q.
* ``isentropic``: barotropic Euler, state (rho, v) with p = kappa*rho**gamma.

Conservative vectors are plain numpy arrays, (rho, rho*v1, rho*v2, rho*e)
for the full model (m=4) and (rho, rho*v1, rho*v2) for the isentropic one
(m=3).  All scalar operations have vectorized counterparts working on
(N, m) arrays; the solver uses those.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError

# Positivity margin below which a state counts as invalid (SI-scaled units).
POSITIVITY_FLOOR = 1e-12

# Gas constant for air, used only to convert temperatures to internal energy.
GAS_CONSTANT_AIR = 287.058

NONISENTROPIC = "nonisentropic"
ISENTROPIC = "isentropic"


@dataclass(frozen=True)
class GasModel:
    """Polytropic gas law selector.

    Parameters
    ----------
    kind : str
        ``"nonisentropic"`` or ``"isentropic"``.
    gamma : float
        Ratio of specific heats, 1 < gamma <= 5/3.
    kappa : float
        Pressure constant of the isentropic law p = kappa*rho**gamma.
    gas_constant : float
        Specific gas constant R in J/(kg K); only used to convert
        temperatures into internal energy.
    """

    kind: str = NONISENTROPIC
    gamma: float = 1.4
    kappa: float = 1.0
    gas_constant: float = GAS_CONSTANT_AIR

    def __post_init__(self):
        if self.kind not in (NONISENTROPIC, ISENTROPIC):
            raise ValueError(f"unknown gas model kind {self.kind!r}")
        if not 1.0 < self.gamma <= 5.0 / 3.0:
            raise ValueError(f"gamma must lie in (1, 5/3], got {self.gamma}")
        if self.kind == ISENTROPIC and self.kappa <= 0.0:
            raise ValueError("kappa must be positive for the isentropic law")
        if self.gas_constant <= 0.0:
            raise ValueError("gas constant must be positive")

    @property
    def ncons(self) -> int:
        """Number of conserved components (4 full, 3 isentropic)."""
        return 4 if self.kind == NONISENTROPIC else 3

    def q_from_temperature(self, temperature_K: float) -> float:
        """Specific internal energy of an ideal gas at the given temperature."""
        return self.gas_constant * temperature_K / (self.gamma - 1.0)


@dataclass(frozen=True)
class PrimitiveState:
    """Pointwise primitive gas state (rho, v, q).

    ``q`` is the specific internal energy and must be ``None`` for the
    isentropic model (there it is a function of density).
    """

    rho: float
    v: np.ndarray
    q: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(2))
        if self.q is not None:
            object.__setattr__(self, "q", float(self.q))

    @property
    def speed(self) -> float:
        return float(np.hypot(self.v[0], self.v[1]))

    def boosted(self, w) -> "PrimitiveState":
        """The same state seen from a frame moving with velocity w."""
        w = np.asarray(w, dtype=float)
        return PrimitiveState(self.rho, self.v - w, self.q)


@dataclass(frozen=True)
class EntropyPairValue:
    """Entropy density, entropy flux, and (full model) specific entropy."""

    eta: float
    psi: np.ndarray
    s: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=float).reshape(2))


@dataclass(frozen=True)
class SpaceTimeNormal:
    """Unit normal (n_t, n) to a hypersurface in (t, x) space, n != 0."""

    n_t: float
    n: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "n", np.asarray(self.n, dtype=float).reshape(2))
        norm = float(np.sqrt(self.n_t**2 + self.n @ self.n))
        if not np.isclose(norm, 1.0, rtol=0, atol=1e-12):
            raise ValueError(f"(n_t, n) must be a unit vector, |.| = {norm}")
        if np.hypot(self.n[0], self.n[1]) < 1e-300:
            raise ValueError("spatial part of the normal must not vanish")

    @staticmethod
    def from_spatial(n, speed: float = 0.0) -> "SpaceTimeNormal":
        """Normal of a surface moving with normal speed `speed` along n."""
        n = np.asarray(n, dtype=float)
        raw_t = -speed * float(np.hypot(n[0], n[1]))
        norm = np.sqrt(raw_t**2 + n @ n)
        return SpaceTimeNormal(raw_t / norm, n / norm)


def validate_state(p: PrimitiveState, g: GasModel) -> None:
    """Raise InvalidStateError unless the state is admissible for g."""
    if not np.isfinite(p.rho) or p.rho < POSITIVITY_FLOOR:
        raise InvalidStateError(f"non-positive density {p.rho}")
    if g.kind == NONISENTROPIC:
        if p.q is None:
            raise InvalidStateError("full Euler state needs internal energy q")
        if not np.isfinite(p.q) or p.q < POSITIVITY_FLOOR:
            raise InvalidStateError(f"non-positive internal energy {p.q}")
    elif p.q is not None:
        raise InvalidStateError("isentropic state must not carry q")


def specific_internal_energy(p: PrimitiveState, g: GasModel) -> float:
    """Specific internal energy; derived from density for the isentropic law."""
    if g.kind == NONISENTROPIC:
        return float(p.q)
    return g.kappa * p.rho ** (g.gamma - 1.0) / (g.gamma - 1.0)


def pressure(p: PrimitiveState, g: GasModel) -> float:
    """Pressure of the polytropic law: (gamma-1)*rho*q or kappa*rho**gamma."""
    validate_state(p, g)
    if g.kind == NONISENTROPIC:
        return (g.gamma - 1.0) * p.rho * p.q
    return g.kappa * p.rho**g.gamma


def sound_speed(p: PrimitiveState, g: GasModel) -> float:
    """c = sqrt(gamma * p / rho); identical formula for both models."""
    return float(np.sqrt(g.gamma * pressure(p, g) / p.rho))


def state_from_rho_p(rho: float, v, p: float, g: GasModel) -> PrimitiveState:
    """Build a primitive state from density, velocity and pressure."""
    if g.kind == NONISENTROPIC:
        return PrimitiveState(rho, v, p / ((g.gamma - 1.0) * rho))
    return PrimitiveState(rho, v)


def to_conservative(p: PrimitiveState, g: GasModel) -> np.ndarray:
    """Conserved vector (rho, rho*v, [rho*e]) of a primitive state."""
    validate_state(p, g)
    if g.kind == NONISENTROPIC:
        e = 0.5 * (p.v @ p.v) + p.q
        return np.array([p.rho, p.rho * p.v[0], p.rho * p.v[1], p.rho * e])
    return np.array([p.rho, p.rho * p.v[0], p.rho * p.v[1]])


def to_primitive(u: np.ndarray, g: GasModel) -> PrimitiveState:
    """Inverse of :func:`to_conservative`."""
    u = np.asarray(u, dtype=float)
    if u.shape != (g.ncons,):
        raise InvalidStateError(f"expected {g.ncons} components, got {u.shape}")
    rho = u[0]
    if not np.isfinite(rho) or rho < POSITIVITY_FLOOR:
        raise InvalidStateError(f"non-positive density {rho}")
    v = u[1:3] / rho
    if g.kind == NONISENTROPIC:
        q = u[3] / rho - 0.5 * (v @ v)
        state = PrimitiveState(rho, v, q)
    else:
        state = PrimitiveState(rho, v)
    validate_state(state, g)
    return state


def physical_flux(p: PrimitiveState, g: GasModel, n) -> np.ndarray:
    """Euler flux f(u) . n through a unit spatial direction n.

    Components: mass rho*(v.n); momentum rho*v*(v.n) + p*n; and for the
    full model energy (rho*e + p)*(v.n).
    """
    n = np.asarray(n, dtype=float)
    pr = pressure(p, g)
    vn = p.v @ n
    mass = p.rho * vn
    mom = p.rho * p.v * vn + pr * n
    if g.kind == NONISENTROPIC:
        rho_e = p.rho * (0.5 * (p.v @ p.v) + p.q)
        return np.array([mass, mom[0], mom[1], (rho_e + pr) * vn])
    return np.array([mass, mom[0], mom[1]])


def specific_entropy(p: PrimitiveState, g: GasModel) -> float:
    """Gas-dynamic specific entropy s = log q + (1-gamma) log rho.

    For the isentropic model q is the density-derived internal energy,
    which makes s a global constant (log(kappa/(gamma-1))), as it should.
    """
    q = specific_internal_energy(p, g)
    return float(np.log(q) + (1.0 - g.gamma) * np.log(p.rho))


def entropy_pair(p: PrimitiveState, g: GasModel) -> EntropyPairValue:
    """Convex entropy / entropy-flux pair for the chosen model.

    Full model: eta = -rho*s, psi = -rho*s*v.  Isentropic model:
    eta = rho*e, psi = (rho*e + p)*v with e the total specific energy.
    """
    validate_state(p, g)
    if g.kind == NONISENTROPIC:
        s = specific_entropy(p, g)
        eta = -p.rho * s
        return EntropyPairValue(eta, eta * p.v, s)
    e = 0.5 * (p.v @ p.v) + specific_internal_energy(p, g)
    eta = p.rho * e
    return EntropyPairValue(eta, (eta + pressure(p, g)) * p.v)


# ---------------------------------------------------------------------------
# Vectorized counterparts for (N, m) conservative arrays (solver hot path).
# ---------------------------------------------------------------------------

def batch_primitive(u: np.ndarray, g: GasModel):
    """Split (N, m) conservative states into (rho, vx, vy, p) arrays."""
    rho = u[:, 0]
    vx = u[:, 1] / rho
    vy = u[:, 2] / rho
    if g.kind == NONISENTROPIC:
        q = u[:, 3] / rho - 0.5 * (vx**2 + vy**2)
        p = (g.gamma - 1.0) * rho * q
    else:
        p = g.kappa * rho**g.gamma
    return rho, vx, vy, p


def batch_conservative(rho, vx, vy, p, g: GasModel) -> np.ndarray:
    """Assemble (N, m) conservative states from primitive arrays."""
    rho = np.asarray(rho, dtype=float)
    if g.kind == NONISENTROPIC:
        q = p / ((g.gamma - 1.0) * rho)
        e = 0.5 * (vx**2 + vy**2) + q
        return np.stack([rho, rho * vx, rho * vy, rho * e], axis=-1)
    return np.stack([rho, rho * vx, rho * vy], axis=-1)


def batch_admissible(u: np.ndarray, g: GasModel) -> np.ndarray:
    """Boolean mask of admissible rows of an (N, m) conservative array."""
    rho = u[:, 0]
    ok = np.isfinite(u).all(axis=1) & (rho >= POSITIVITY_FLOOR)
    if g.kind == NONISENTROPIC:
        with np.errstate(divide="ignore", invalid="ignore"):
            q = u[:, 3] / rho - 0.5 * (u[:, 1] ** 2 + u[:, 2] ** 2) / rho**2
        ok &= np.where(np.isfinite(q), q >= POSITIVITY_FLOOR, False)
    return ok


def batch_entropy(u: np.ndarray, g: GasModel):
    """eta and (psi_x, psi_y) arrays for (N, m) conservative states."""
    rho, vx, vy, p = batch_primitive(u, g)
    if g.kind == NONISENTROPIC:
        q = p / ((g.gamma - 1.0) * rho)
        s = np.log(q) + (1.0 - g.gamma) * np.log(rho)
        eta = -rho * s
        return eta, eta * vx, eta * vy
    e = 0.5 * (vx**2 + vy**2) + g.kappa * rho ** (g.gamma - 1.0) / (g.gamma - 1.0)
    eta = rho * e
    return eta, (eta + p) * vx, (eta + p) * vy


def max_signal_speed(u: np.ndarray, g: GasModel) -> np.ndarray:
    """|v| + c per row of an (N, m) conservative array."""
    rho, vx, vy, p = batch_primitive(u, g)
    return np.sqrt(vx**2 + vy**2) + np.sqrt(g.gamma * p / rho)


def batch_normal_flux(u: np.ndarray, n: np.ndarray, g: GasModel) -> np.ndarray:
    """f(u).n for (N, m) conservative states and per-row normals (N, 2)."""
    rho, vx, vy, p = batch_primitive(u, g)
    vn = vx * n[:, 0] + vy * n[:, 1]
    cols = [rho * vn, rho * vx * vn + p * n[:, 0], rho * vy * vn + p * n[:, 1]]
    if g.kind == NONISENTROPIC:
        cols.append((u[:, 3] + p) * vn)
    return np.stack(cols, axis=-1)

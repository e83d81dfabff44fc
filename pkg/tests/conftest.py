import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eulerlab import GasModel, PrimitiveState, build_solution_T
from eulerlab.gas import state_from_rho_p

import oracles


@pytest.fixture(scope="session")
def air():
    return GasModel("nonisentropic", 1.4)


@pytest.fixture(scope="session")
def iso():
    """Isentropic model calibrated so the paper inflow has p = rho R T."""
    kappa = oracles.P_INFLOW / oracles.RHO_INFLOW**oracles.GAMMA_AIR
    return GasModel("isentropic", 1.4, kappa)


@pytest.fixture(scope="session")
def inflow(air):
    return PrimitiveState(oracles.RHO_INFLOW, (oracles.SPEED_INFLOW, 0.0),
                          oracles.Q_INFLOW)


@pytest.fixture(scope="session")
def inflow_iso():
    return PrimitiveState(oracles.RHO_INFLOW, (oracles.SPEED_INFLOW, 0.0))


@pytest.fixture(scope="session")
def tspec(air, inflow):
    return build_solution_T(inflow, math.radians(10.0), air)


@pytest.fixture(scope="session")
def tspec_iso(iso, inflow_iso):
    return build_solution_T(inflow_iso, math.radians(10.0), iso)


def random_state(rng, g, rho_range=(0.2, 3.0), p_range=(0.2, 3.0), mach=2.0):
    """Admissible random state with velocity up to `mach` sound speeds."""
    rho = rng.uniform(*rho_range)
    if g.kind == "isentropic":
        p = g.kappa * rho**g.gamma
    else:
        p = rng.uniform(*p_range)
    c = math.sqrt(g.gamma * p / rho)
    v = rng.uniform(-mach, mach, 2) * c
    return state_from_rho_p(rho, v, p, g)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

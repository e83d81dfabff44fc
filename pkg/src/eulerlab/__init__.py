"""Finite-volume laboratory for 2D compressible Euler flows.

Exact self-similar wedge solutions, exact Riemann solvers for the full
and isentropic polytropic models, Godunov-type schemes on meshes moving
with x = t*xi, and quantitative entropy/self-similarity diagnostics.
"""

from .errors import (ConfigError, DetachmentError, EulerLabError,
                     InvalidStateError, MeshError, PositivityError,
                     SubsonicInflowError, VacuumError)
from .gas import (GasModel, PrimitiveState, EntropyPairValue, SpaceTimeNormal,
                  entropy_pair, physical_flux, pressure, sound_speed,
                  to_conservative, to_primitive)
from .riemann import (WaveFan, godunov_flux, moving_edge_flux, muscl_states,
                      rusanov_flux, sample, solve_exact)
from .exact_fields import (ConicalField, InterfaceSpec, SolutionTSpec,
                           build_solution_T, eef_jump_residual,
                           entropy_jump_admissible, oblique_shock,
                           rh_residual, rh_residual_relative, verify_interfaces)
from .simgrid import (MeshGeometryAt, SimMesh, aligned_mesh_for_T,
                      build_domain_mesh, check_supersonic_boundary, fan_mesh,
                      geometry_at, refine)
from .fv_solver import (BoundarySpec, FieldState, FluxRecord, RunReport,
                        cfl_dt, initialize_from_field, run, step)
from .diagnostics import (BumpTestFunction, Classification, SnapshotSeries,
                          TestFunctionSet, classify,
                          discrete_entropy_production,
                          self_similarity_deviation, steadiness_deviation,
                          weak_residual)
from .config import ExperimentConfig

__version__ = "0.1.0"

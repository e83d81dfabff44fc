"""Experiment configuration: a flat key = value text format.

Lines are ``key = value`` with ``#`` comments; keys mirror the CLI flags.
Values are parsed by the field types of :class:`ExperimentConfig`;
``none`` stands for an unset optional.  Files written by
:meth:`ExperimentConfig.to_file` parse back bit-identically.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from . import gas as gas_mod
from .errors import ConfigError
from .gas import GasModel, PrimitiveState


@dataclass
class ExperimentConfig:
    gas_kind: str = "nonisentropic"
    gamma: float = 1.4
    kappa: float | None = None          # isentropic law constant; none = calibrate
    inflow_rho: float = 1.19            # kg/m^3
    inflow_speed: float = 1000.0        # m/s
    inflow_temperature: float = 293.15  # K (20 C)
    inflow_q: float | None = None       # J/kg, overrides the temperature
    alpha_deg: float = 10.0
    stagnation_rho: float | None = None
    domain_xlo: float = -1800.0         # xi domain, m/s
    domain_xhi: float = 2000.0
    domain_ylo: float = -1900.0
    domain_yhi: float = 1900.0
    mesh_kind: str = "cartesian"        # cartesian | aligned
    nx: int = 96
    ny: int = 96
    n_radial: int = 48
    n_angular: int = 64
    refine_levels: int = 2
    refine_threshold: float = 0.05
    flux: str = "godunov"
    order: int = 1
    cfl: float = 0.45
    t0: float = 1.0
    t_end: float | None = None
    residual_tol: float | None = None
    max_steps: int = 2000
    snapshot_every: int = 0             # steps between snapshots; 0 = final only
    output_dir: str = "out"
    seed: int = 0

    # -- parsing / writing --------------------------------------------------

    @staticmethod
    def _parse_value(name: str, text: str, ftype: str):
        text = text.strip()
        if text.lower() == "none":
            return None
        try:
            if "int" in ftype and "float" not in ftype:
                return int(text)
            if "float" in ftype:
                return float(text)
            return text
        except ValueError as exc:
            raise ConfigError(f"cannot parse {name} = {text!r}") from exc

    @classmethod
    def from_pairs(cls, pairs: dict) -> "ExperimentConfig":
        cfg = cls()
        cfg.apply(pairs)
        return cfg

    def apply(self, pairs: dict) -> None:
        types = {f.name: str(f.type) for f in dataclasses.fields(self)}
        for key, value in pairs.items():
            name = key.replace("-", "_")
            if name not in types:
                raise ConfigError(f"unknown configuration key {key!r}")
            if isinstance(value, str):
                value = self._parse_value(name, value, types[name])
            setattr(self, name, value)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        pairs = {}
        for lineno, raw in enumerate(path.read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            pairs[key.strip()] = value.strip()
        return cls.from_pairs(pairs)

    def to_file(self, path) -> None:
        lines = ["# eulerlab experiment configuration"]
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                text = "none"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{f.name} = {text}")
        Path(path).write_text("\n".join(lines) + "\n")

    # -- validation and derived objects --------------------------------------

    def validate(self) -> None:
        if self.gas_kind not in (gas_mod.NONISENTROPIC, gas_mod.ISENTROPIC):
            raise ConfigError(f"gas_kind must be nonisentropic|isentropic, got {self.gas_kind!r}")
        for name in ("gamma", "inflow_rho", "inflow_speed", "inflow_temperature",
                     "cfl", "t0"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0.0 <= self.alpha_deg < 90.0:
            raise ConfigError("alpha_deg must lie in [0, 90)")
        if self.mesh_kind not in ("cartesian", "aligned"):
            raise ConfigError(f"mesh_kind must be cartesian|aligned, got {self.mesh_kind!r}")
        if self.flux not in ("godunov", "rusanov"):
            raise ConfigError(f"flux must be godunov|rusanov, got {self.flux!r}")
        if self.order not in (1, 2):
            raise ConfigError("order must be 1 or 2")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError("cfl must lie in (0, 1]")
        if self.domain_xhi <= self.domain_xlo or self.domain_yhi <= self.domain_ylo:
            raise ConfigError("empty domain")
        if min(self.nx, self.ny, self.n_radial, self.n_angular) < 1:
            raise ConfigError("mesh counts must be positive")
        if self.t_end is None and self.residual_tol is None and self.max_steps <= 0:
            raise ConfigError("need a stop criterion (t_end, residual_tol or max_steps)")

    def inflow_pressure(self) -> float:
        """Ideal-gas pressure rho R T of the configured inflow."""
        g = GasModel(gamma=self.gamma)
        return self.inflow_rho * g.gas_constant * self.inflow_temperature

    def gas_model(self) -> GasModel:
        if self.gas_kind == gas_mod.ISENTROPIC:
            kappa = self.kappa
            if kappa is None:
                # Calibrate so the inflow pressure matches rho R T.
                kappa = self.inflow_pressure() / self.inflow_rho**self.gamma
            return GasModel(gas_mod.ISENTROPIC, self.gamma, kappa)
        return GasModel(gas_mod.NONISENTROPIC, self.gamma)

    def inflow_state(self, g: GasModel | None = None) -> PrimitiveState:
        g = g or self.gas_model()
        v = (self.inflow_speed, 0.0)
        if g.kind == gas_mod.ISENTROPIC:
            return PrimitiveState(self.inflow_rho, v)
        q = self.inflow_q
        if q is None:
            q = g.q_from_temperature(self.inflow_temperature)
        return PrimitiveState(self.inflow_rho, v, q)

    @property
    def alpha(self) -> float:
        return math.radians(self.alpha_deg)

    def domain_corners(self):
        return [(self.domain_xlo, self.domain_ylo), (self.domain_xhi, self.domain_ylo),
                (self.domain_xhi, self.domain_yhi), (self.domain_xlo, self.domain_yhi)]

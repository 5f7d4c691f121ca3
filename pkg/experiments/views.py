import json
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from experiments.settings import load_settings
from geometry.views import PoreSpec
from problem.problem import HelmholtzProblem
from problem.views import ProblemConfig
from utils.errors import ConfigurationError

CommandKind = Literal["convergence", "mode_sweep", "scaling", "crystal", "oracle_check"]


# Pydantic
class GeometryBlock(BaseModel):
    """Cell grid, its split into subdomains, and the optional pore"""

    model_config = ConfigDict(extra="forbid")

    cells_x: int = Field(default=1, ge=1)
    cells_y: int = Field(default=1, ge=1)
    cells_per_subdomain: list[int] = Field(default=[1], min_length=1)
    side_length: float = Field(default=1.0, gt=0.0)
    centred: bool = False
    pore: PoreSpec | None = None
    layout: Literal["uniform", "waveguide"] = "uniform"
    cell_tag: int = 1
    pore_tag: int = 2

    @model_validator(mode="after")
    def _divides(self) -> "GeometryBlock":
        for cps in self.cells_per_subdomain:
            if cps < 1 or self.cells_x % cps or self.cells_y % cps:
                raise ValueError(f"{cps} cells per subdomain does not divide the {self.cells_x}x{self.cells_y} cell grid")
        if self.pore is not None and self.pore.radius >= 0.5 * self.side_length:
            raise ValueError(f"pore radius {self.pore.radius} does not fit a cell of side {self.side_length}")
        if self.layout == "waveguide" and self.pore is None:
            raise ValueError("a waveguide layout needs a pore")
        return self


class DiscretizationBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    h: float = Field(gt=0.0)
    refinements: int = Field(default=0, ge=0)
    p: list[int] = Field(default=[2], min_length=1)
    modes: list[int] = Field(default=[4], min_length=1)
    pairing: Literal["zip", "product"] = "product"

    @model_validator(mode="after")
    def _ranges(self) -> "DiscretizationBlock":
        if any(not 1 <= p <= 10 for p in self.p):
            raise ValueError(f"polynomial orders {self.p} must lie in 1..10")
        if any(m < 1 for m in self.modes):
            raise ValueError(f"mode counts {self.modes} must be positive")
        if self.pairing == "zip" and len(self.p) != len(self.modes):
            raise ValueError("zip pairing needs as many mode counts as polynomial orders")
        return self

    def pairs(self) -> list[tuple[int, int]]:
        if self.pairing == "zip":
            return list(zip(self.p, self.modes))
        return [(p, m) for p in self.p for m in self.modes]


class SweepBlock(BaseModel):
    """Wavenumbers as an explicit list or as an inclusive range with a step count"""

    model_config = ConfigDict(extra="forbid")

    kappas: list[float] | None = Field(default=None, min_length=1)
    kappa_range: tuple[float, float] | None = None
    steps: int | None = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _one_form(self) -> "SweepBlock":
        if (self.kappas is None) == (self.kappa_range is None):
            raise ValueError("give exactly one of kappas or kappa_range")
        if self.kappa_range is not None and self.steps is None:
            raise ValueError("kappa_range needs steps")
        if any(k <= 0 for k in self.values()):
            raise ValueError("wavenumbers must be positive")
        return self

    def values(self) -> list[float]:
        if self.kappas is not None:
            return list(self.kappas)
        lo, hi = self.kappa_range
        return [float(k) for k in np.linspace(lo, hi, self.steps)]


class ReferenceBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategy: Literal["manufactured", "fem", "none"] = "manufactured"
    p_ref: int | None = Field(default=None, ge=1, le=10)
    floor_factor: float | None = Field(default=None, gt=1.0)
    solver: Literal["banded", "splu"] = Field(default_factory=lambda: load_settings().solver.reference)


class CapsBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    direct_solve: int = Field(default_factory=lambda: load_settings().caps.direct_solve, gt=0)
    oracle_acms: int = Field(default_factory=lambda: load_settings().caps.oracle_acms, gt=0)
    oracle_fem: int = Field(default_factory=lambda: load_settings().caps.oracle_fem, gt=0)


class OutputBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "results"
    sweep_csv: str = "sweep.csv"
    export_format: Literal["csv_grid", "vtk_legacy"] = "csv_grid"
    raster_size: int = Field(default_factory=lambda: load_settings().raster_size, ge=2)


class ScalingBlock(BaseModel):
    """Timing series: vs I_E on a fixed grid, and vs J at fixed I_E"""

    model_config = ConfigDict(extra="forbid")

    modes: list[int] = Field(default=[2, 4, 8, 16], min_length=1)
    subdomains_per_side: int = Field(default=2, ge=1)
    grid_sizes: list[int] = Field(default=[1, 2, 4, 8], min_length=1)
    fixed_modes: int = Field(default=4, ge=1)
    grid_p: int = Field(default=4, ge=1, le=10)
    grid_h: float = Field(default=0.1, gt=0.0)
    repetitions: int = Field(default_factory=lambda: load_settings().timing_repetitions, ge=1)


class CrystalBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")

    export_kappas: list[float] = []
    gamma_half_width: float = Field(default_factory=lambda: load_settings().gamma_half_width, gt=0.0)
    profile_samples: int = Field(default=201, ge=2)


class OracleBlock(BaseModel):
    """Small cases for the oracle suite"""

    model_config = ConfigDict(extra="forbid")

    dense_h: float = Field(default=0.5, gt=0.0)
    dense_p: int = Field(default=2, ge=1, le=10)
    dense_modes: int = Field(default=2, ge=1)
    full_h: float = Field(default=0.25, gt=0.0)
    full_p: int = Field(default=3, ge=1, le=10)
    inject_fault: bool = False


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: CommandKind
    name: str = "experiment"
    geometry: GeometryBlock = GeometryBlock()
    discretization: DiscretizationBlock = DiscretizationBlock(h=0.25)
    problem: ProblemConfig = ProblemConfig()
    sweep: SweepBlock | None = None
    reference: ReferenceBlock = Field(default_factory=ReferenceBlock)
    caps: CapsBlock = Field(default_factory=CapsBlock)
    solver: Literal["banded", "splu"] = Field(default_factory=lambda: load_settings().solver.acms)
    output: OutputBlock = Field(default_factory=OutputBlock)
    seeds: list[int] = Field(default=[0], min_length=1)
    scaling: ScalingBlock | None = None
    crystal: CrystalBlock | None = None
    oracle: OracleBlock | None = None

    @model_validator(mode="after")
    def _command_blocks(self) -> "ExperimentConfig":
        if self.command == "scaling" and self.scaling is None:
            self.scaling = ScalingBlock()
        if self.command == "crystal" and self.crystal is None:
            self.crystal = CrystalBlock()
        if self.command == "oracle_check" and self.oracle is None:
            self.oracle = OracleBlock()
        try:
            HelmholtzProblem.from_config(self.problem)
        except ConfigurationError as e:
            raise ValueError(str(e)) from e
        if self.command == "crystal" and self.geometry.layout != "waveguide":
            raise ValueError("the crystal sweep runs on the waveguide layout")
        if self.command == "scaling":
            values = [*self.problem.a_by_tag.values(), *self.problem.c_by_tag.values(), *self.problem.beta_by_marker.values()]
            if self.problem.omega != 1.0 or any(v != 1.0 for v in values):
                raise ValueError("the scaling prototype uses a = c = beta = omega = 1")
        if self.reference.strategy == "manufactured" and self.command in ("convergence", "mode_sweep"):
            if self.problem.source.kind != "plane_wave_trace":
                raise ValueError("a manufactured reference needs the plane_wave_trace source")
        return self

    def kappas(self) -> list[float]:
        return self.sweep.values() if self.sweep is not None else [self.problem.omega]


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate an experiment config; every failure is a ConfigurationError."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"config {path} is not valid JSON: {e}") from e
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(f"config {path} failed validation:\n{e}") from e

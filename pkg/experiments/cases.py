import logging
from dataclasses import dataclass

import numpy as np

from acms import AcmsSolution, ModeCountError
from femcore import HpSpace, build_space, l2_norm_and_error
from geometry import (
    InterfaceGraph,
    Mesh,
    UnitCellSpec,
    cell_layout,
    centred_origin,
    decomposition_from_cells,
    mesh_domain,
    refine_with_interface,
)
from experiments.views import ExperimentConfig, GeometryBlock
from postprocess import SweepRecord
from problem import HelmholtzProblem, exact_solution
from reference import CapExceededError, reference_order, solve_fem_direct
from utils.errors import NumericalError

logger = logging.getLogger(__name__)

# failures that cost one sweep row, not the run
ROW_ERRORS = (NumericalError, CapExceededError, ModeCountError)


def cell_spec(geometry: GeometryBlock) -> UnitCellSpec:
    return UnitCellSpec(
        side_length=geometry.side_length, pore=geometry.pore, cell_tag=geometry.cell_tag, pore_tag=geometry.pore_tag
    )


def build_case(geometry: GeometryBlock, cells_per_subdomain: int, h: float, refinements: int = 0) -> tuple[Mesh, InterfaceGraph]:
    """Mesh of the configured cell grid split into subdomains of cells_per_subdomain^2 cells."""
    side = geometry.side_length
    origin = centred_origin(geometry.cells_x, geometry.cells_y, side) if geometry.centred else (0.0, 0.0)
    decomp = decomposition_from_cells(geometry.cells_x, geometry.cells_y, cells_per_subdomain, side, origin)
    layout = cell_layout(geometry.layout, geometry.cells_x, geometry.cells_y) if geometry.pore is not None else None
    mesh, graph = mesh_domain(decomp, cell_spec(geometry), h, layout)
    if refinements:
        mesh, graph = refine_with_interface(mesh, refinements)
    return mesh, graph


def target_h(config: ExperimentConfig) -> float:
    return config.discretization.h / 2**config.discretization.refinements


@dataclass(frozen=True)
class TransmissionLines:
    """Incoming line on the left side, outgoing line on the right, both over the full height."""

    x_in: float
    x_out: float
    y_range: tuple[float, float]
    profile_range: tuple[float, float]


def transmission_lines(mesh: Mesh, half_width: float) -> TransmissionLines:
    x0, y0, x1, y1 = mesh.decomposition.bounds
    centre = 0.5 * (y0 + y1)
    profile = (max(y0, centre - half_width), min(y1, centre + half_width))
    return TransmissionLines(x0, x1, (y0, y1), profile)


class ReferenceCache:
    """Reference fields for error measurement on one mesh, one per (order, wavenumber)."""

    def __init__(self, config: ExperimentConfig, mesh: Mesh, graph: InterfaceGraph, threads: int = 1):
        self.config = config
        self.mesh = mesh
        self.graph = graph
        self.threads = threads
        self._solutions: dict[tuple[int, float], tuple[HpSpace, np.ndarray]] = {}

    def reference(self, problem: HelmholtzProblem, p: int):
        strategy = self.config.reference.strategy
        if strategy == "none":
            return None
        if strategy == "manufactured":
            return exact_solution(problem)
        p_ref = self.config.reference.p_ref or reference_order(p)
        key = (p_ref, problem.omega)
        if key not in self._solutions:
            space = build_space(self.mesh, p_ref, self.graph)
            solution = solve_fem_direct(
                space, problem, solver=self.config.reference.solver, cap=self.config.caps.direct_solve, threads=self.threads
            )
            self._solutions[key] = (space, solution.coefficients)
        return self._solutions[key]

    def error(self, space: HpSpace, coeffs: np.ndarray, problem: HelmholtzProblem) -> float | None:
        reference = self.reference(problem, space.p)
        if reference is None:
            return None
        return l2_norm_and_error(space, coeffs, reference)[2]


def acms_record(
    kappa: float, h: float, modes: int, space: HpSpace, solution: AcmsSolution, **values
) -> SweepRecord:
    return SweepRecord.with_timings(
        solution.timings,
        kappa=kappa,
        p=space.p,
        h=h,
        IE=modes,
        J=space.mesh.decomposition.J,
        NA=solution.num_acms,
        NF=solution.num_fem,
        **values,
    )


def failed_record(kappa: float, h: float, modes: int, space: HpSpace, error: Exception) -> SweepRecord:
    logger.warning(f"row kappa={kappa} p={space.p} I_E={modes} failed: {type(error).__name__}: {error}")
    return SweepRecord(kappa=kappa, p=space.p, h=h, IE=modes, J=space.mesh.decomposition.J, NF=space.ndofs)

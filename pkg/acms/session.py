import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from acms.basis import EdgeModeCache, SubdomainExtension, build_extension, compute_vertex_trace
from acms.system import assemble_acms, build_basis_matrix, number_dofs, reconstruct, solve_acms
from acms.views import AcmsSolution, BasisMatrix
from femcore import HpSpace, assemble_rhs, assemble_subdomain
from femcore.views import SesquilinearAssembly
from linalg import SolverKind
from problem import HelmholtzProblem
from utils.timing import Stopwatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LocalSetup:
    """Subdomain FEM blocks and interior factorizations for one problem; independent of I_E."""

    problem: HelmholtzProblem
    assembly: SesquilinearAssembly
    extensions: list[SubdomainExtension]

    def matches(self, problem: HelmholtzProblem) -> bool:
        return self.problem is problem or self.problem == problem


class AcmsSession:
    """One ACMS solve: local FEM blocks, edge modes, extensions, S_A, solve, reconstruction.

    The edge-mode cache outlives a single ``run`` so frequency sweeps on a
    fixed mesh reuse the eigenmodes. A ``LocalSetup`` passed in (or left from
    an earlier run of the same problem) skips the local assembly and
    factorizations.
    """

    def __init__(
        self,
        space: HpSpace,
        modes_per_edge: int,
        threads: int = 1,
        solver: SolverKind = "banded",
        cache: EdgeModeCache | None = None,
        setup: LocalSetup | None = None,
    ):
        self.space = space
        self.modes_per_edge = modes_per_edge
        self.threads = max(1, threads)
        self.solver = solver
        self.cache = cache if cache is not None else EdgeModeCache()
        self.setup = setup
        self.dofmap = number_dofs(space.graph, modes_per_edge)
        self.vertex_traces = {q: compute_vertex_trace(space.graph, q) for q in range(space.graph.num_vertices)}
        self.bases: list[BasisMatrix] = []
        # shared lazily built tables, filled before worker threads start
        for attribute in ("element_dofs", "orientation", "jacobians", "boundary_owners", "subdomains", "edge_traces", "dof_locations"):
            getattr(space, attribute)

    @property
    def assembly(self) -> SesquilinearAssembly | None:
        return None if self.setup is None else self.setup.assembly

    def _map(self, func, items):
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return list(pool.map(func, items))
        return [func(item) for item in items]

    def prepare(self, problem: HelmholtzProblem) -> LocalSetup:
        J = self.space.mesh.decomposition.J
        blocks = self._map(lambda j: assemble_subdomain(self.space, problem, j), range(J))
        assembly = SesquilinearAssembly(blocks)
        extensions = self._map(lambda j: build_extension(self.space, assembly, j, self.solver), range(J))
        self.setup = LocalSetup(problem, assembly, extensions)
        return self.setup

    def _basis(self, j: int) -> BasisMatrix:
        extension = self.setup.extensions[j]
        return build_basis_matrix(self.space, extension, self.dofmap, self.cache, self.vertex_traces, j)

    def build(self, problem: HelmholtzProblem) -> list[BasisMatrix]:
        if self.setup is None or not self.setup.matches(problem):
            self.prepare(problem)
        self.bases = self._map(self._basis, range(self.space.mesh.decomposition.J))
        return self.bases

    def run(self, problem: HelmholtzProblem) -> AcmsSolution:
        space = self.space
        watch = Stopwatch()
        with watch.phase("t_bas"):
            self.build(problem)
        with watch.phase("t_ass"):
            g_F = assemble_rhs(space, problem)
            S_A, g_A = assemble_acms(space, self.assembly, self.dofmap, self.bases, g_F)
        with watch.phase("t_sol"):
            solution = solve_acms(S_A, g_A)
            solution.fem_coefficients = reconstruct(space, self.bases, self.dofmap, solution.coefficients)
        solution.num_fem = space.ndofs
        solution.subdomain_sizes = [sub.size for sub in space.subdomains]
        solution.edge_sizes = [trace.size for trace in space.edge_traces]
        solution.timings = dict(watch.totals)
        logger.info(
            f"ACMS N_A={solution.num_acms} N_F={solution.num_fem} "
            f"t_bas={watch['t_bas']:.3f}s t_ass={watch['t_ass']:.3f}s t_sol={watch['t_sol']:.3f}s; "
            f"edge cache {self.cache.stats()}"
        )
        return solution


def solve_with_acms(
    space: HpSpace,
    problem: HelmholtzProblem,
    modes_per_edge: int,
    threads: int = 1,
    solver: SolverKind = "banded",
) -> AcmsSolution:
    return AcmsSession(space, modes_per_edge, threads, solver).run(problem)


def mode_capacity(space: HpSpace) -> int:
    """Largest uniform I_E that every edge supports."""
    return int(min(len(trace.interior_positions) for trace in space.edge_traces))

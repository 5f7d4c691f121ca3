import logging

import numpy as np

from femcore import HpSpace, SesquilinearAssembly, assemble_fem, assemble_rhs
from linalg import SolverKind, factorize, lexicographic_order
from problem import HelmholtzProblem
from reference.views import DIRECT_SOLVE_CAP, CapExceededError, ReferenceSolution
from utils.timing import time_execution_sync

logger = logging.getLogger(__name__)


@time_execution_sync("solve_fem_direct")
def solve_fem_direct(
    space: HpSpace,
    problem: HelmholtzProblem,
    solver: SolverKind = "banded",
    cap: int = DIRECT_SOLVE_CAP,
    assembly: SesquilinearAssembly | None = None,
    threads: int = 1,
) -> ReferenceSolution:
    """Solve S_F u_F = g_F on the whole mesh.

    The band solver eliminates dofs in lexicographic order of their locations.
    """
    if space.ndofs > cap:
        raise CapExceededError(f"N_F={space.ndofs} exceeds the direct-solve cap {cap}; use ACMS for this size")
    g_F = assemble_rhs(space, problem)
    if not g_F.any():
        return ReferenceSolution(np.zeros(space.ndofs, dtype=complex), space, 0.0)
    if assembly is None or assembly.system is None:
        assembly = assemble_fem(space, problem, threads)
    order = lexicographic_order(space.dof_locations)
    u = factorize(assembly.system, solver, order).solve(g_F)
    residual = float(np.linalg.norm(assembly.system @ u - g_F) / np.linalg.norm(g_F))
    logger.info(f"direct FEM solve ({solver}): N_F={space.ndofs}, relative residual {residual:.2e}")
    return ReferenceSolution(u, space, residual)


def reference_order(p: int) -> int:
    return min(p + 3, 8)

import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import numpy as np
import pytest

from acms import AcmsSession, EdgeModeCache, assemble_acms, build_basis_matrix, build_extension, compute_vertex_trace, mode_capacity, number_dofs, solve_acms
from femcore import assemble_fem, assemble_rhs, build_space, l2_norm_and_error
from geometry import PoreSpec, UnitCellSpec, build_decomposition, mesh_domain
from problem import BoundarySource, HelmholtzProblem, SourceParams, exact_solution
from reference import CapExceededError, harmonic_vertex_trace, oracle_acms_dense, reference_order, solve_fem_direct
from reference.oracle import row_sweep_numbering

ALL_MARKERS = {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0}


def plane_wave(kappa, kind="plane_wave_trace"):
    return HelmholtzProblem(
        a_by_tag={1: 1.0},
        c_by_tag={1: 1.0},
        omega=kappa,
        beta_by_marker=ALL_MARKERS,
        source=BoundarySource(kind=kind, params=SourceParams(direction=(0.6, 0.8))),
    )


def unit_square_space(h, p):
    mesh, graph = mesh_domain(build_decomposition(1, 1), UnitCellSpec(), h)
    return build_space(mesh, p, graph)


def fem_error(space, problem, solver="banded"):
    u = solve_fem_direct(space, problem, solver=solver)
    return l2_norm_and_error(space, u.coefficients, exact_solution(problem))[2]


def test_manufactured_plane_wave_high_order():
    problem = plane_wave(4.0)
    space = unit_square_space(0.05, 4)
    solution = solve_fem_direct(space, problem, solver="splu")
    assert solution.residual <= 1e-10
    assert l2_norm_and_error(space, solution.coefficients, exact_solution(problem))[2] <= 1e-7


def test_zero_source_gives_zero():
    space = unit_square_space(0.25, 2)
    solution = solve_fem_direct(space, plane_wave(1.0, kind="zero"))
    assert not solution.coefficients.any()


def test_quadratic_refinement_ratio():
    problem = plane_wave(4.0)
    coarse = fem_error(unit_square_space(0.1, 2), problem)
    fine = fem_error(unit_square_space(0.05, 2), problem)
    assert coarse / fine >= 6


@pytest.mark.parametrize("p", [1, 2, 3])
def test_galerkin_convergence_order(p):
    problem = plane_wave(2.0)
    errors = [fem_error(unit_square_space(h, p), problem) for h in (0.1, 0.05)]
    assert np.log2(errors[0] / errors[1]) >= p + 0.5


def test_band_and_sparse_solvers_agree():
    problem = plane_wave(3.0)
    space = unit_square_space(0.125, 3)
    banded = solve_fem_direct(space, problem).coefficients
    sparse = solve_fem_direct(space, problem, solver="splu").coefficients
    np.testing.assert_allclose(banded, sparse, rtol=0, atol=1e-10 * np.abs(sparse).max())


def test_direct_cap():
    space = unit_square_space(0.25, 2)
    with pytest.raises(CapExceededError, match="use ACMS"):
        solve_fem_direct(space, plane_wave(1.0), cap=10)


def test_reference_order():
    assert reference_order(2) == 5
    assert reference_order(6) == 8


def test_harmonic_vertex_trace_is_linear():
    mesh, graph = mesh_domain(build_decomposition(2, 2), UnitCellSpec(pore=PoreSpec(radius=0.25)), 0.125)
    space = build_space(mesh, 3, graph)
    for q in range(graph.num_vertices):
        closed_form = compute_vertex_trace(graph, q)
        for e, values in harmonic_vertex_trace(space, q).items():
            np.testing.assert_allclose(values, closed_form.trace(space.edge_traces[e]), atol=1e-12)


def test_oracle_matches_production():
    mesh, graph = mesh_domain(build_decomposition(2, 2), UnitCellSpec(), 0.5)
    space = build_space(mesh, 2, graph)
    problem = plane_wave(1.0)

    oracle = oracle_acms_dense(space, problem, 2)
    assembly = assemble_fem(space, problem)
    dofmap = number_dofs(graph, 2)
    cache = EdgeModeCache()
    bases = [build_basis_matrix(space, build_extension(space, assembly, j), dofmap, cache, None, j) for j in range(4)]
    S_A, g_A = assemble_acms(space, assembly, dofmap, bases, assemble_rhs(space, problem))
    u_A = solve_acms(S_A, g_A).coefficients

    dense = S_A.to_dense()
    assert dense.shape == (33, 33)
    assert np.abs(dense - oracle.system).max() <= 1e-10 * np.abs(oracle.system).max()
    assert np.linalg.norm(g_A - oracle.rhs) <= 1e-10 * np.linalg.norm(oracle.rhs)
    assert np.linalg.norm(u_A - oracle.coefficients) <= 1e-9 * np.linalg.norm(oracle.coefficients)


@pytest.mark.parametrize("grid", [(2, 2), (3, 2), (1, 3)])
def test_oracle_numbering_follows_row_sweep(grid):
    mesh, graph = mesh_domain(build_decomposition(*grid), UnitCellSpec(), 0.5)
    vertex_dofs, edge_dofs, size = row_sweep_numbering(graph, 3)
    dofmap = number_dofs(graph, 3)
    assert size == dofmap.size
    assert np.array_equal(vertex_dofs, dofmap.vertex_dofs)
    assert np.array_equal(edge_dofs, dofmap.edge_dofs)


def test_full_mode_equivalence():
    mesh, graph = mesh_domain(build_decomposition(2, 2), UnitCellSpec(), 0.25)
    space = build_space(mesh, 3, graph)
    problem = plane_wave(4.0)
    modes = mode_capacity(space)
    assert modes == 11

    direct = solve_fem_direct(space, problem)
    acms = AcmsSession(space, modes).run(problem)
    assert l2_norm_and_error(space, acms.fem_coefficients, (space, direct.coefficients))[2] <= 1e-9

    oracle = oracle_acms_dense(space, problem, modes)
    assert l2_norm_and_error(space, oracle.fem_coefficients, (space, direct.coefficients))[2] <= 1e-9


def test_oracle_zero_source_and_caps():
    mesh, graph = mesh_domain(build_decomposition(1, 1), UnitCellSpec(), 0.25)
    space = build_space(mesh, 2, graph)
    oracle = oracle_acms_dense(space, plane_wave(1.0, kind="zero"), 2)
    assert not oracle.coefficients.any()
    with pytest.raises(CapExceededError):
        oracle_acms_dense(space, plane_wave(1.0), 2, max_fem=10)

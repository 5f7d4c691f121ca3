import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import math

import numpy as np
import pytest

from femcore import (
    MeshMismatchError,
    PointLocationError,
    QuadratureError,
    ReferenceElement,
    assemble_fem,
    assemble_rhs,
    build_space,
    element_matrices,
    eval_field,
    interpolate_vertices,
    interval_basis,
    l2_norm_and_error,
    project,
    quadrature_rule,
    trace_values,
)
from geometry import PoreSpec, UnitCellSpec, build_decomposition, load_mesh, mesh_domain, refine_uniform
from problem import BoundarySource, HelmholtzProblem, SourceParams
from utils.errors import ConfigurationError

REFERENCE_SQUARE = """acmsmesh 1
nodes 4
0 0
1 0
1 1
0 1
triangles 2
0 1 3 1 0
1 2 3 1 0
bsegments 4
0 1 1
1 2 2
2 3 3
3 0 4
decomp 1 1 1
"""

ALL_MARKERS = {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0}


def make_problem(kind="zero", omega=1.0, **params):
    return HelmholtzProblem(
        a_by_tag={1: 1.0, 2: 1.0 / 12.1},
        c_by_tag={1: 1.0, 2: 1.0},
        omega=omega,
        beta_by_marker=ALL_MARKERS,
        source=BoundarySource(kind=kind, params=SourceParams(**params)),
    )


@pytest.fixture
def square_mesh(tmp_path):
    path = tmp_path / "square.mesh"
    path.write_text(REFERENCE_SQUARE)
    return load_mesh(path)


@pytest.fixture(scope="module")
def pore_mesh():
    cell = UnitCellSpec(pore=PoreSpec(radius=0.25, segments=16))
    return mesh_domain(build_decomposition(2, 2), cell, 0.25)


def test_centroid_rule():
    rule = quadrature_rule(1)
    np.testing.assert_array_equal(rule.points, [[1 / 3, 1 / 3]])
    assert rule.weights.tolist() == [0.5]


def test_triangle_monomial():
    rule = quadrature_rule(4)
    x, y = rule.points.T
    assert np.sum(rule.weights * x**2 * y) == pytest.approx(1 / 60, abs=1e-15)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(0.5, abs=1e-15)


def test_interval_rule_high_degree():
    rule = quadrature_rule(21, "interval")
    assert len(rule) == 11
    assert np.sum(rule.weights * rule.points**21) == pytest.approx(1 / 22, abs=1e-14)


@pytest.mark.parametrize("degree", [2, 7, 13, 22])
def test_triangle_rules_exact(degree):
    rule = quadrature_rule(degree)
    x, y = rule.points.T
    for i in range(degree + 1):
        j = degree - i
        exact = math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)
        assert np.sum(rule.weights * x**i * y**j) == pytest.approx(exact, rel=1e-12)


def test_unsupported_degree():
    with pytest.raises(QuadratureError):
        quadrature_rule(23)
    with pytest.raises(ConfigurationError):
        quadrature_rule(-1)


@pytest.mark.parametrize("p", [1, 2, 3, 5, 10])
def test_local_dof_count_and_gram(p):
    element = ReferenceElement(p)
    assert element.num_dofs == 3 + 3 * (p - 1) + (p - 1) * (p - 2) // 2
    rule = quadrature_rule(2 * p)
    values = element.tabulate(rule.points).values
    gram = values.T @ (rule.weights[:, None] * values)
    assert np.linalg.eigvalsh(gram).min() > 0
    assert np.isfinite(np.linalg.cond(gram))


def test_order_out_of_range():
    with pytest.raises(ConfigurationError):
        ReferenceElement(11)
    with pytest.raises(ConfigurationError):
        ReferenceElement(0)


@pytest.mark.parametrize("code", range(8))
def test_vertex_and_edge_conditions(code):
    p = 5
    element = ReferenceElement(p)
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    values = element.tabulate(corners, code).values
    np.testing.assert_allclose(values[:, :3], np.eye(3), atol=1e-15)
    np.testing.assert_allclose(values[:, 3:], 0.0, atol=1e-14)

    s = np.linspace(0.1, 0.9, 5)
    edge_points = [
        np.column_stack([s, np.zeros_like(s)]),
        np.column_stack([1 - s, s]),
        np.column_stack([np.zeros_like(s), 1 - s]),
    ]
    for k in range(3):
        columns = slice(3 + k * (p - 1), 3 + (k + 1) * (p - 1))
        for other in set(range(3)) - {k}:
            on_other = element.tabulate(edge_points[other], code).values[:, columns]
            np.testing.assert_allclose(on_other, 0.0, atol=1e-14)
        interior = element.tabulate(edge_points[k], code).values[:, 3 + 3 * (p - 1) :]
        np.testing.assert_allclose(interior, 0.0, atol=1e-14)


def test_partition_of_unity():
    element = ReferenceElement(4)
    values = element.tabulate(quadrature_rule(8).points, 5).values
    np.testing.assert_allclose(values[:, :3].sum(axis=1), 1.0, atol=1e-14)


@pytest.mark.parametrize("code", [0, 3, 6])
def test_gradients_match_finite_differences(code):
    element = ReferenceElement(6)
    rng = np.random.default_rng(code)
    points = rng.uniform(0.05, 0.45, size=(10, 2))
    grads = element.tabulate(points, code).grads
    eps = 1e-6
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = eps
        fd = (element.tabulate(points + shift, code).values - element.tabulate(points - shift, code).values) / (2 * eps)
        np.testing.assert_allclose(grads[:, :, axis], fd, atol=1e-6)


def test_reference_triangle_stiffness_and_mass(square_mesh):
    mesh, graph = square_mesh
    space = build_space(mesh, 1, graph)
    stiffness, mass = element_matrices(space, make_problem(), [0])
    expected = 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]])
    np.testing.assert_allclose(stiffness[0], expected, atol=1e-15)
    np.testing.assert_allclose(mass[0], (np.ones((3, 3)) + np.eye(3)) / 24, atol=1e-15)


def test_two_triangle_dof_counts(square_mesh):
    mesh, graph = square_mesh
    assert build_space(mesh, 1, graph).ndofs == 4
    assert build_space(mesh, 3, graph).ndofs == 16


def test_dof_recount(pore_mesh):
    mesh, graph = pore_mesh
    space = build_space(mesh, 2, graph)
    assert len(np.unique(space.element_dofs)) == space.ndofs
    assert space.ndofs == mesh.num_nodes + len(mesh.edges)


def test_subdomain_partition(pore_mesh):
    mesh, graph = pore_mesh
    space = build_space(mesh, 3, graph)
    owners = np.zeros(space.ndofs, dtype=int)
    for sub in space.subdomains:
        assert np.intersect1d(sub.boundary, sub.interior).size == 0
        np.testing.assert_array_equal(np.union1d(sub.boundary, sub.interior), sub.dofs)
        owners[sub.interior] += 1
    assert owners.max() == 1


def test_trace_dimensions(pore_mesh):
    mesh, graph = pore_mesh
    p = 4
    space = build_space(mesh, p, graph)
    for trace, edge in zip(space.edge_traces, graph.edges):
        segments = len(edge.nodes) - 1
        assert trace.size == segments * (p - 1) + len(edge.interior_nodes) + 2
        assert len(trace.interior_positions) == trace.size - 2


def test_trace_determines_restriction(pore_mesh):
    mesh, graph = pore_mesh
    p = 4
    space = build_space(mesh, p, graph)
    coeffs = np.random.default_rng(3).standard_normal(space.ndofs)
    t = np.array([0.2, 0.5, 0.7])
    basis, _ = interval_basis(p, t)
    for trace in space.edge_traces:
        along = trace_values(trace, coeffs)
        nodes = mesh.nodes[trace.nodes]
        for s in range(trace.num_segments):
            points = nodes[s] + t[:, None] * (nodes[s + 1] - nodes[s])
            expected = basis @ along[trace.segment_positions(s)]
            np.testing.assert_allclose(eval_field(space, coeffs, points), expected, atol=1e-12)


def test_edge_orientation_consistency(pore_mesh):
    mesh, _ = pore_mesh
    p = 5
    space = build_space(mesh, p)
    flat = mesh.triangle_edges.ravel()
    counts = np.bincount(flat, minlength=len(mesh.edges))
    s = np.linspace(0.1, 0.9, 5)
    jac = space.jacobians[0]
    for e in np.flatnonzero(counts == 2)[:60]:
        a, b = mesh.edges[e]
        points = mesh.nodes[a] + s[:, None] * (mesh.nodes[b] - mesh.nodes[a])
        traces = []
        for pos in np.flatnonzero(flat == e):
            tri, k = divmod(int(pos), 3)
            ref = np.linalg.solve(jac[tri], (points - mesh.nodes[mesh.triangles[tri, 0]]).T).T
            values = space.element.tabulate(ref, int(space.orientation[tri])).values
            traces.append(values[:, 3 + k * (p - 1) : 3 + (k + 1) * (p - 1)])
        np.testing.assert_allclose(traces[0], traces[1], atol=1e-13)


def test_system_is_complex_symmetric(pore_mesh):
    mesh, graph = pore_mesh
    space = build_space(mesh, 3, graph)
    assembly = assemble_fem(space, make_problem(omega=2.0))
    assert abs(assembly.system - assembly.system.T).max() == 0
    assert abs(assembly.stiffness - assembly.stiffness.T).max() == 0
    assert np.iscomplexobj(assembly.system.data)


def test_constants_in_stiffness_kernel(pore_mesh):
    mesh, graph = pore_mesh
    space = build_space(mesh, 3, graph)
    assembly = assemble_fem(space, make_problem())
    constant = np.zeros(space.ndofs)
    constant[: space.num_vertex_dofs] = 1.0
    np.testing.assert_allclose(assembly.stiffness @ constant, 0.0, atol=1e-12)
    for block in assembly.blocks:
        local = np.zeros(block.dofs.size)
        local[block.dofs.dofs < space.num_vertex_dofs] = 1.0
        np.testing.assert_allclose(block.stiffness @ local, 0.0, atol=1e-12)


def test_mass_positive_definite(square_mesh):
    mesh, graph = square_mesh
    space = build_space(mesh, 3, graph)
    mass = assemble_fem(space, make_problem()).mass.toarray()
    assert np.linalg.eigvalsh(mass).min() > 0


def test_assembly_is_thread_independent(pore_mesh):
    mesh, graph = pore_mesh
    space = build_space(mesh, 2, graph)
    serial = assemble_fem(space, make_problem(omega=3.0)).system
    parallel = assemble_fem(space, make_problem(omega=3.0), threads=3).system
    assert (serial != parallel).nnz == 0


def test_zero_source_rhs(square_mesh):
    mesh, graph = square_mesh
    rhs = assemble_rhs(build_space(mesh, 2, graph), make_problem("zero"))
    assert not rhs.any()


def test_constant_source_sums_to_perimeter():
    mesh, graph = mesh_domain(build_decomposition(1, 1), UnitCellSpec(), 0.25)
    rhs = assemble_rhs(build_space(mesh, 1, graph), make_problem("constant", value=1.0))
    assert rhs.sum() == pytest.approx(4.0, abs=1e-12)


def test_constant_source_hierarchical_edge_entries():
    mesh, graph = mesh_domain(build_decomposition(1, 1), UnitCellSpec(), 0.25)
    space = build_space(mesh, 3, graph)
    rhs = assemble_rhs(space, make_problem("constant", value=1.0))
    edges = mesh.edge_index(mesh.bsegments[:, 0], mesh.bsegments[:, 1])
    dofs = space.edge_dofs(edges)
    lengths = np.linalg.norm(mesh.nodes[mesh.bsegments[:, 1]] - mesh.nodes[mesh.bsegments[:, 0]], axis=1)
    np.testing.assert_allclose(rhs[dofs[:, 1]], 0.0, atol=1e-13)
    np.testing.assert_allclose(rhs[dofs[:, 0]], -lengths / 3, atol=1e-13)
    boundary = np.zeros(space.ndofs, dtype=bool)
    boundary[mesh.bsegments.ravel()] = True
    boundary[dofs.ravel()] = True
    assert not rhs[~boundary].any()


def test_eval_linear_interpolant(square_mesh):
    mesh, graph = square_mesh
    space = build_space(mesh, 1, graph)
    coeffs = interpolate_vertices(space, lambda x, y: x)
    assert eval_field(space, coeffs, [[0.3, 0.7]])[0] == pytest.approx(0.3, abs=1e-14)


def test_eval_quadratic_projection(pore_mesh):
    mesh, graph = pore_mesh
    space = build_space(mesh, 2, graph)
    coeffs = project(space, lambda x, y: x**2)
    points = np.random.default_rng(11).uniform(0.0, 2.0, size=(20, 2))
    np.testing.assert_allclose(eval_field(space, coeffs, points), points[:, 0] ** 2, atol=1e-12)


def test_eval_zero_field_and_outside_point(square_mesh):
    mesh, graph = square_mesh
    space = build_space(mesh, 2, graph)
    zero = np.zeros(space.ndofs, dtype=complex)
    assert not eval_field(space, zero, [[0.2, 0.1], [0.9, 0.9]]).any()
    with pytest.raises(PointLocationError):
        eval_field(space, zero, [[1.5, 0.5]])


def test_field_equal_to_reference(pore_mesh):
    mesh, graph = pore_mesh
    space = build_space(mesh, 2, graph)
    coeffs = project(space, lambda x, y: np.exp(1j * x) * y)
    _, error, relative = l2_norm_and_error(space, coeffs, (space, coeffs))
    assert error == 0.0 and relative == 0.0


def test_norm_of_one_on_crystal():
    mesh, graph = mesh_domain(build_decomposition(16, 16), UnitCellSpec(), 0.5)
    space = build_space(mesh, 1, graph)
    norm, _, _ = l2_norm_and_error(space, np.zeros(space.ndofs), lambda x, y: np.ones_like(x))
    assert norm == pytest.approx(16.0, abs=1e-12)


def test_interpolation_rate_of_sine():
    errors = []
    for h in (1 / 8, 1 / 16, 1 / 32):
        mesh, graph = mesh_domain(build_decomposition(1, 1), UnitCellSpec(), h)
        space = build_space(mesh, 1, graph)
        coeffs = interpolate_vertices(space, lambda x, y: np.sin(np.pi * x))
        errors.append(l2_norm_and_error(space, coeffs, lambda x, y: np.sin(np.pi * x))[1])
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(np.abs(rates - 2.0) <= 0.1)


def test_nested_field_reference():
    mesh, graph = mesh_domain(build_decomposition(1, 1), UnitCellSpec(), 0.25)
    coarse = build_space(mesh, 1, graph)
    fine = build_space(refine_uniform(mesh), 2)
    coarse_coeffs = interpolate_vertices(coarse, lambda x, y: 2 * x - y)
    fine_coeffs = interpolate_vertices(fine, lambda x, y: 2 * x - y)
    _, error, _ = l2_norm_and_error(coarse, coarse_coeffs, (fine, fine_coeffs))
    assert error == pytest.approx(0.0, abs=1e-13)


def test_unrelated_meshes_rejected():
    small, _ = mesh_domain(build_decomposition(1, 1), UnitCellSpec(), 0.25)
    large, _ = mesh_domain(build_decomposition(2, 1), UnitCellSpec(), 0.25)
    a, b = build_space(small, 1), build_space(large, 1)
    with pytest.raises(MeshMismatchError):
        l2_norm_and_error(a, np.zeros(a.ndofs), (b, np.zeros(b.ndofs)))

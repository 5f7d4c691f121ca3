import logging
from collections.abc import Callable

import numpy as np
import scipy.sparse.linalg as spla
from femcore.assembly import assemble_mass_matrix
from femcore.quadrature import quadrature_rule
from femcore.space import HpSpace
from femcore.views import MeshMismatchError, PointLocationError

logger = logging.getLogger(__name__)

CANDIDATES = 12
INSIDE_TOLERANCE = 1e-10

FieldFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]
Reference = FieldFunction | tuple[HpSpace, np.ndarray]


def _reference_coords(space: HpSpace, triangles: np.ndarray, points: np.ndarray) -> np.ndarray:
    inv_t = space.jacobians[2][triangles]
    origin = space.mesh.nodes[space.mesh.triangles[triangles, 0]]
    return np.einsum("...ba,...b->...a", inv_t, points - origin)


def _inside(ref: np.ndarray) -> np.ndarray:
    xi, eta = ref[..., 0], ref[..., 1]
    return (xi >= -INSIDE_TOLERANCE) & (eta >= -INSIDE_TOLERANCE) & (xi + eta <= 1 + INSIDE_TOLERANCE)


def locate_points(space: HpSpace, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Owning triangle and reference coordinates of every point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mesh = space.mesh
    tree = space.centroid_tree
    k = min(CANDIDATES, mesh.num_triangles)
    _, candidates = tree.query(points, k=k)
    candidates = candidates.reshape(len(points), k)

    ref = _reference_coords(space, candidates, points[:, None, :])
    hit = _inside(ref)
    found = hit.any(axis=1)
    first = hit.argmax(axis=1)
    rows = np.arange(len(points))
    triangles = np.where(found, candidates[rows, first], -1)
    coords = ref[rows, first]

    for i in np.flatnonzero(~found):
        all_ref = _reference_coords(space, np.arange(mesh.num_triangles), points[i][None, :])
        inside = np.flatnonzero(_inside(all_ref))
        if len(inside):
            triangles[i] = inside[0]
            coords[i] = all_ref[inside[0]]
    missing = triangles < 0
    if missing.any():
        raise PointLocationError(f"{int(missing.sum())} point(s) outside the mesh, first at {points[missing][0]}", points[missing])
    return triangles, coords


def eval_field(space: HpSpace, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    triangles, ref = locate_points(space, points)
    codes = space.orientation[triangles]
    out = np.zeros(len(triangles), dtype=np.result_type(coeffs, float))
    for code in np.unique(codes):
        sel = np.flatnonzero(codes == code)
        values = space.element.tabulate(ref[sel], int(code)).values
        out[sel] = np.einsum("ni,ni->n", values, coeffs[space.element_dofs[triangles[sel]]])
    return out


def field_at_quadrature(space: HpSpace, coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Field values (M, nq) at the physical quadrature points of every triangle."""
    rule = quadrature_rule(degree)
    out = np.zeros((space.mesh.num_triangles, len(rule)), dtype=np.result_type(coeffs, float))
    codes = space.orientation
    for code in np.unique(codes):
        t = np.flatnonzero(codes == code)
        values = space.element.tabulate(rule.points, int(code)).values
        out[t] = np.einsum("qi,ti->tq", values, coeffs[space.element_dofs[t]])
    return out


def _quadrature(space: HpSpace, degree: int) -> tuple[np.ndarray, np.ndarray]:
    rule = quadrature_rule(degree)
    weights = rule.weights[None, :] * np.abs(space.jacobians[1])[:, None]
    return space.map_points(np.arange(space.mesh.num_triangles), rule.points), weights


def l2_norm_and_error(space: HpSpace, coeffs: np.ndarray, reference: Reference) -> tuple[float, float, float]:
    """(||reference||, ||field - reference||, relative error) in L2.

    ``reference`` is a callable f(x, y) or a (space, coeffs) pair on the same
    or a nested mesh; the integral runs over the finer mesh with degree 2p + 2.
    """
    if callable(reference):
        degree = 2 * space.p + 2
        points, weights = _quadrature(space, degree)
        field = field_at_quadrature(space, coeffs, degree)
        exact = np.asarray(reference(points[..., 0], points[..., 1]))
    else:
        other, other_coeffs = reference
        degree = 2 * max(space.p, other.p) + 2
        if space.mesh.same_geometry(other.mesh):
            points, weights = _quadrature(space, degree)
            field = field_at_quadrature(space, coeffs, degree)
            exact = field_at_quadrature(other, other_coeffs, degree)
        else:
            if not np.allclose(space.mesh.decomposition.bounds, other.mesh.decomposition.bounds, atol=1e-12):
                raise MeshMismatchError("fields live on different domains")
            fine_is_self = space.mesh.num_triangles >= other.mesh.num_triangles
            fine, fine_coeffs = (space, coeffs) if fine_is_self else (other, other_coeffs)
            coarse, coarse_coeffs = (other, other_coeffs) if fine_is_self else (space, coeffs)
            points, weights = _quadrature(fine, degree)
            try:
                on_coarse = eval_field(coarse, coarse_coeffs, points.reshape(-1, 2)).reshape(points.shape[:-1])
            except PointLocationError as e:
                raise MeshMismatchError(f"meshes are not nested: {e}") from e
            on_fine = field_at_quadrature(fine, fine_coeffs, degree)
            field, exact = (on_fine, on_coarse) if fine_is_self else (on_coarse, on_fine)

    norm = float(np.sqrt(np.sum(weights * np.abs(exact) ** 2)))
    error = float(np.sqrt(np.sum(weights * np.abs(field - exact) ** 2)))
    if norm == 0.0:
        relative = 0.0 if error == 0.0 else float("inf")
    else:
        relative = error / norm
    return norm, error, relative


def project(space: HpSpace, func: FieldFunction) -> np.ndarray:
    """Global L2 projection of func onto the space."""
    degree = 2 * space.p + 2
    rule = quadrature_rule(degree)
    points, weights = _quadrature(space, degree)
    f = np.asarray(func(points[..., 0], points[..., 1]))
    rhs = np.zeros(space.ndofs, dtype=np.result_type(f, float))
    codes = space.orientation
    for code in np.unique(codes):
        t = np.flatnonzero(codes == code)
        values = space.element.tabulate(rule.points, int(code)).values
        np.add.at(rhs, space.element_dofs[t], np.einsum("tq,qi->ti", weights[t] * f[t], values))
    lu = spla.splu(assemble_mass_matrix(space).tocsc())
    if np.iscomplexobj(rhs):
        return lu.solve(rhs.real) + 1j * lu.solve(rhs.imag)
    return lu.solve(rhs)


def interpolate_vertices(space: HpSpace, func: FieldFunction) -> np.ndarray:
    """Nodal interpolant using the vertex dofs only; exact for linear functions."""
    nodes = space.mesh.nodes
    values = np.asarray(func(nodes[:, 0], nodes[:, 1]))
    coeffs = np.zeros(space.ndofs, dtype=np.result_type(values, float))
    coeffs[: space.num_vertex_dofs] = values
    return coeffs

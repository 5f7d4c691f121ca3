from femcore.assembly import assemble_fem, assemble_mass_matrix, assemble_rhs, assemble_subdomain, element_matrices
from femcore.basis import ReferenceElement, integrated_legendre, interval_basis, scaled_legendre
from femcore.evaluate import eval_field, field_at_quadrature, interpolate_vertices, l2_norm_and_error, locate_points, project
from femcore.quadrature import P_MAX, QuadratureRule, quadrature_rule
from femcore.space import HpSpace, build_space
from femcore.trace import edge_trace_matrices, trace_values
from femcore.views import (
    EdgeTrace,
    MeshMismatchError,
    PointLocationError,
    QuadratureError,
    SesquilinearAssembly,
    SubdomainBlock,
    SubdomainDofs,
)

__all__ = [
    "assemble_fem",
    "assemble_mass_matrix",
    "assemble_rhs",
    "assemble_subdomain",
    "element_matrices",
    "ReferenceElement",
    "integrated_legendre",
    "interval_basis",
    "scaled_legendre",
    "eval_field",
    "field_at_quadrature",
    "interpolate_vertices",
    "l2_norm_and_error",
    "locate_points",
    "project",
    "P_MAX",
    "QuadratureRule",
    "quadrature_rule",
    "HpSpace",
    "build_space",
    "edge_trace_matrices",
    "trace_values",
    "EdgeTrace",
    "MeshMismatchError",
    "PointLocationError",
    "QuadratureError",
    "SesquilinearAssembly",
    "SubdomainBlock",
    "SubdomainDofs",
]

from acms.basis import (
    EdgeModeCache,
    SubdomainExtension,
    build_extension,
    compute_edge_modes,
    compute_vertex_trace,
    edge_reuse_key,
    extend_trace,
)
from acms.session import AcmsSession, LocalSetup, mode_capacity, solve_with_acms
from acms.system import assemble_acms, build_basis_matrix, local_acms_block, number_dofs, reconstruct, solve_acms
from acms.views import (
    AcmsDofMap,
    AcmsSolution,
    BasisMatrix,
    EdgeModeSet,
    ModeCountError,
    ResonanceError,
    TraceMismatchError,
    VertexTrace,
)

__all__ = [
    "EdgeModeCache",
    "SubdomainExtension",
    "build_extension",
    "compute_edge_modes",
    "compute_vertex_trace",
    "edge_reuse_key",
    "extend_trace",
    "AcmsSession",
    "LocalSetup",
    "mode_capacity",
    "solve_with_acms",
    "assemble_acms",
    "build_basis_matrix",
    "local_acms_block",
    "number_dofs",
    "reconstruct",
    "solve_acms",
    "AcmsDofMap",
    "AcmsSolution",
    "BasisMatrix",
    "EdgeModeSet",
    "ModeCountError",
    "ResonanceError",
    "TraceMismatchError",
    "VertexTrace",
]

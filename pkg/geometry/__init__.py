from geometry.decomposition import build_decomposition, centred_origin, decomposition_from_cells
from geometry.interface import extract_interface
from geometry.mesh_io import load_mesh, save_mesh
from geometry.mesher import cell_layout, mesh_domain
from geometry.refine import refine_uniform, refine_with_interface
from geometry.validation import validate_mesh
from geometry.views import (
    BoundaryMarker,
    DomainDecomposition,
    InterfaceEdge,
    InterfaceGraph,
    Mesh,
    MeshConformityError,
    MeshError,
    MeshFormatError,
    MeshQualityError,
    PoreSpec,
    UnitCellSpec,
)

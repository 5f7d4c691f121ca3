import logging
from collections.abc import Iterable
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd

from femcore import HpSpace, eval_field
from postprocess.views import INTEGER_COLUMNS, SWEEP_COLUMNS, SweepRecord, VtkField
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
RASTER_SIZE = 256
VTK_TRIANGLE = 5

ExportFormat = Literal["csv_grid", "vtk_legacy"]


def raster_points(space: HpSpace, n: int = RASTER_SIZE) -> np.ndarray:
    """n x n uniform raster over the domain, corners included, x varying fastest."""
    x0, y0, x1, y1 = space.mesh.decomposition.bounds
    xs, ys = np.meshgrid(np.linspace(x0, x1, n), np.linspace(y0, y1, n))
    return np.column_stack([xs.ravel(), ys.ravel()])


def export_field(
    space: HpSpace,
    coeffs: np.ndarray,
    path: str | Path,
    format: ExportFormat = "csv_grid",
    n: int = RASTER_SIZE,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coeffs = np.asarray(coeffs, dtype=complex)
    if format == "csv_grid":
        if n < 2:
            raise ConfigurationError(f"raster needs at least 2 samples per side, got {n}")
        points = raster_points(space, n)
        values = eval_field(space, coeffs, points)
        frame = pd.DataFrame(
            {"x": points[:, 0], "y": points[:, 1], "re": values.real, "im": values.imag, "abs": np.abs(values)}
        )
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    elif format == "vtk_legacy":
        _write_vtk(space, coeffs, path)
    else:
        raise ConfigurationError(f"unknown export format '{format}'")
    logger.info(f"exported field ({format}) to {path}")
    return path


def _write_vtk(space: HpSpace, coeffs: np.ndarray, path: Path) -> None:
    mesh = space.mesh
    # hierarchical edge and bubble functions vanish at vertices
    nodal = coeffs[: mesh.num_nodes]
    lines = ["# vtk DataFile Version 3.0", "ACMS Helmholtz field", "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.num_nodes} double")
    lines.extend(f"{x:.17g} {y:.17g} 0" for x, y in mesh.nodes)
    lines.append(f"CELLS {mesh.num_triangles} {4 * mesh.num_triangles}")
    lines.extend(f"3 {a} {b} {c}" for a, b, c in mesh.triangles)
    lines.append(f"CELL_TYPES {mesh.num_triangles}")
    lines.extend([str(VTK_TRIANGLE)] * mesh.num_triangles)
    lines.append(f"POINT_DATA {mesh.num_nodes}")
    for name, values in (("u_re", nodal.real), ("u_im", nodal.imag)):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(f"{v:.17g}" for v in values)
    path.write_text("\n".join(lines) + "\n")


def read_vtk_legacy(path: str | Path) -> VtkField:
    """Parse the ASCII unstructured grids written by export_field."""
    tokens = Path(path).read_text().split("\n")
    body = " ".join(tokens[4:]).split()
    points = triangles = None
    arrays: dict[str, np.ndarray] = {}
    k = 0
    while k < len(body):
        keyword = body[k]
        if keyword == "POINTS":
            count = int(body[k + 1])
            points = np.array(body[k + 3 : k + 3 + 3 * count], dtype=float).reshape(count, 3)[:, :2]
            k += 3 + 3 * count
        elif keyword == "CELLS":
            count = int(body[k + 1])
            cells = np.array(body[k + 3 : k + 3 + 4 * count], dtype=np.int64).reshape(count, 4)
            if np.any(cells[:, 0] != 3):
                raise ConfigurationError(f"{path}: only triangle cells are supported")
            triangles = cells[:, 1:]
            k += 3 + 4 * count
        elif keyword == "CELL_TYPES":
            k += 2 + int(body[k + 1])
        elif keyword == "POINT_DATA":
            k += 2
        elif keyword == "SCALARS":
            name = body[k + 1]
            count = len(points)
            arrays[name] = np.array(body[k + 6 : k + 6 + count], dtype=float)
            k += 6 + count
        else:
            raise ConfigurationError(f"{path}: unexpected token '{keyword}'")
    if points is None or triangles is None:
        raise ConfigurationError(f"{path}: missing POINTS or CELLS section")
    return VtkField(points, triangles, arrays)


def write_sweep_csv(records: Iterable[SweepRecord], path: str | Path) -> Path:
    """Sweep records with the fixed column schema; None becomes an empty cell."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([record.row() for record in records], columns=SWEEP_COLUMNS)
    for column in SWEEP_COLUMNS:
        frame[column] = frame[column].astype("Int64" if column in INTEGER_COLUMNS else float)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    logger.info(f"wrote {len(frame)} sweep rows to {path}")
    return path


def write_summary_csv(rows: list[dict], path: str | Path) -> Path:
    """Onset indices or fitted slopes, one dict per row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows).to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="")
    return path

from postprocess.export import export_field, raster_points, read_vtk_legacy, write_summary_csv, write_sweep_csv
from postprocess.measures import fit_loglog_slope, line_energy, onset_index, sample_line
from postprocess.views import SWEEP_COLUMNS, TIMING_COLUMNS, LineOffBoundaryError, SweepRecord, VtkField

__all__ = [
    "export_field",
    "raster_points",
    "read_vtk_legacy",
    "write_summary_csv",
    "write_sweep_csv",
    "fit_loglog_slope",
    "line_energy",
    "onset_index",
    "sample_line",
    "SWEEP_COLUMNS",
    "TIMING_COLUMNS",
    "LineOffBoundaryError",
    "SweepRecord",
    "VtkField",
]

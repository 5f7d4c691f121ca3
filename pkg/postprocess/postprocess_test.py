import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import numpy as np
import pandas as pd
import pytest
from scipy.integrate import trapezoid

from femcore import build_space, eval_field, interpolate_vertices
from geometry import PoreSpec, UnitCellSpec, build_decomposition, centred_origin, mesh_domain
from postprocess import (
    SWEEP_COLUMNS,
    LineOffBoundaryError,
    SweepRecord,
    export_field,
    fit_loglog_slope,
    line_energy,
    onset_index,
    read_vtk_legacy,
    sample_line,
    write_sweep_csv,
)
from utils.errors import ConfigurationError


@pytest.fixture(scope="module")
def centred_space():
    decomp = build_decomposition(6, 6, origin=centred_origin(6, 6))
    mesh, graph = mesh_domain(decomp, UnitCellSpec(), 0.5)
    return build_space(mesh, 1, graph)


@pytest.fixture(scope="module")
def cubic_space():
    mesh, graph = mesh_domain(build_decomposition(1, 1), UnitCellSpec(pore=PoreSpec(radius=0.25)), 0.25)
    return build_space(mesh, 3, graph)


def test_line_energy_of_constant(centred_space):
    ones = interpolate_vertices(centred_space, lambda x, y: np.ones_like(x, dtype=complex))
    assert line_energy(centred_space, ones, -3.0, -3.0, 3.0) == pytest.approx(6.0, abs=1e-12)


def test_line_energy_of_unit_modulus_wave(centred_space):
    wave = interpolate_vertices(centred_space, lambda x, y: np.exp(-2j * x))
    assert line_energy(centred_space, wave, -3.0, -3.0, 3.0) == pytest.approx(6.0, abs=1e-10)
    assert line_energy(centred_space, wave, 3.0, -3.0, 3.0) == pytest.approx(6.0, abs=1e-10)


def test_line_energy_is_quadratic(cubic_space):
    rng = np.random.default_rng(3)
    coeffs = rng.standard_normal(cubic_space.ndofs) + 1j * rng.standard_normal(cubic_space.ndofs)
    alpha = 2.0 - 1.0j
    base = line_energy(cubic_space, coeffs, 0.0, 0.0, 1.0)
    assert line_energy(cubic_space, alpha * coeffs, 0.0, 0.0, 1.0) == pytest.approx(5.0 * base, rel=1e-12)


def test_line_energy_matches_dense_sampling(cubic_space):
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal(cubic_space.ndofs) + 1j * rng.standard_normal(cubic_space.ndofs)
    ys = np.linspace(0.0, 1.0, 10_000)
    values = eval_field(cubic_space, coeffs, np.column_stack([np.ones_like(ys), ys]))
    brute = trapezoid(np.abs(values) ** 2, ys)
    assert line_energy(cubic_space, coeffs, 1.0, 0.0, 1.0) == pytest.approx(brute, rel=1e-6)


def test_line_off_boundary(cubic_space):
    coeffs = np.zeros(cubic_space.ndofs, dtype=complex)
    with pytest.raises(LineOffBoundaryError):
        line_energy(cubic_space, coeffs, 0.5, 0.0, 1.0)
    with pytest.raises(LineOffBoundaryError):
        line_energy(cubic_space, coeffs, 0.0, 0.0, 2.0)


def test_sample_line_profile(centred_space):
    wave = interpolate_vertices(centred_space, lambda x, y: np.exp(-2j * x))
    ys, modulus = sample_line(centred_space, wave, -3.0, -3.0, 3.0, n=13)
    assert ys[0] == -3.0 and ys[-1] == 3.0
    np.testing.assert_allclose(modulus, 1.0, atol=1e-12)


def test_slope_of_power_law():
    xs = np.array([2.0, 4.0, 8.0, 16.0, 32.0])
    assert fit_loglog_slope(xs, xs**2) == pytest.approx(2.0, abs=1e-12)


def test_slope_with_noise():
    rng = np.random.default_rng(5)
    xs = 2.0 ** np.arange(1, 8)
    for _ in range(10):
        ys = 3.0 * xs**1.5 * (1.0 + 0.05 * rng.uniform(-1, 1, size=len(xs)))
        assert abs(fit_loglog_slope(xs, ys) - 1.5) <= 0.15


@pytest.mark.parametrize(
    "xs, ys",
    [([1.0, 2.0], [1.0, 4.0]), ([1.0, 2.0, 3.0], [1.0, 0.0, 2.0]), ([1.0, 3.0, 2.0], [1.0, 2.0, 3.0])],
)
def test_slope_preconditions(xs, ys):
    with pytest.raises(ConfigurationError):
        fit_loglog_slope(xs, ys)


def test_onset_index():
    ie = [1, 2, 4, 8, 16]
    assert onset_index(ie, [1.0, 0.5, 0.6, 0.3, 0.1]) == 2
    assert onset_index(ie, [1.0, 0.5, 0.4, 0.3, 0.1]) == 0
    assert onset_index(ie, [1.0, 0.5, 0.4, 0.3, 0.35]) is None
    assert onset_index([4], [0.2]) is None
    assert onset_index(ie, [1.0, 1.2, 1e-3, 1e-9, 2e-9], floor=1e-8) == 1


def test_zero_field_raster(tmp_path, cubic_space):
    path = export_field(cubic_space, np.zeros(cubic_space.ndofs), tmp_path / "zero.csv", n=9)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["x", "y", "re", "im", "abs"]
    assert len(frame) == 81
    assert not frame[["re", "im", "abs"]].to_numpy().any()


def test_linear_raster(tmp_path, centred_space):
    coeffs = interpolate_vertices(centred_space, lambda x, y: x.astype(complex))
    frame = pd.read_csv(export_field(centred_space, coeffs, tmp_path / "x.csv", n=17))
    assert (frame["x"].min(), frame["x"].max()) == (-3.0, 3.0)
    assert (frame["y"].min(), frame["y"].max()) == (-3.0, 3.0)
    assert frame["x"].nunique() == frame["y"].nunique() == 17
    np.testing.assert_allclose(frame["re"], frame["x"], atol=1e-12)
    np.testing.assert_allclose(frame["im"], 0.0, atol=1e-12)


def test_raster_spans_offset_rectangle(tmp_path):
    mesh, graph = mesh_domain(build_decomposition(3, 2, origin=(1.0, -0.5)), UnitCellSpec(), 0.5)
    space = build_space(mesh, 1, graph)
    coeffs = interpolate_vertices(space, lambda x, y: (x + 2.0 * y).astype(complex))
    frame = pd.read_csv(export_field(space, coeffs, tmp_path / "offset.csv", n=5))
    assert (frame["x"].min(), frame["x"].max()) == (1.0, 4.0)
    assert (frame["y"].min(), frame["y"].max()) == (-0.5, 1.5)
    assert len(frame[["x", "y"]].drop_duplicates()) == 25
    np.testing.assert_allclose(frame["re"], frame["x"] + 2.0 * frame["y"], atol=1e-12)


def test_vtk_round_trip(tmp_path, cubic_space):
    rng = np.random.default_rng(2)
    coeffs = rng.standard_normal(cubic_space.ndofs) + 1j * rng.standard_normal(cubic_space.ndofs)
    parsed = read_vtk_legacy(export_field(cubic_space, coeffs, tmp_path / "u.vtk", format="vtk_legacy"))
    mesh = cubic_space.mesh
    assert parsed.num_points == mesh.num_nodes
    assert np.array_equal(parsed.triangles, mesh.triangles)
    assert np.array_equal(parsed.points, mesh.nodes)
    assert np.array_equal(parsed.arrays["u_re"], coeffs[: mesh.num_nodes].real)
    assert np.array_equal(parsed.arrays["u_im"], coeffs[: mesh.num_nodes].imag)


def test_unknown_export_format(tmp_path, cubic_space):
    with pytest.raises(ConfigurationError):
        export_field(cubic_space, np.zeros(cubic_space.ndofs), tmp_path / "u.xyz", format="png")


def test_sweep_csv_schema(tmp_path):
    records = [
        SweepRecord.with_timings({"t_bas": 0.5, "t_ass": 0.25, "t_sol": 0.125}, kappa=1.26, p=4, h=0.1, IE=16, J=100, NA=3741, NF=20000, E_in=0.1 + 0.2, E_out=1e-5),
        SweepRecord(kappa=1.48, p=4, h=0.1),
    ]
    first = write_sweep_csv(records, tmp_path / "a.csv")
    second = write_sweep_csv(records, tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()

    lines = first.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    row = lines[1].split(",")
    assert row[:7] == ["1.26", "4", "0.10000000000000001", "16", "100", "3741", "20000"]
    assert row[7] == ""
    assert float(row[8]) == 0.1 + 0.2
    assert row[-1] == "0.875"
    assert lines[2].split(",")[3:] == [""] * 11

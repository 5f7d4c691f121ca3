import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import json

import numpy as np
import pandas as pd
import pytest

from experiments import ExperimentConfig, load_config, main, run_command
from experiments.cases import build_case, transmission_lines
from experiments.settings import PRESETS_DIR, Settings, load_settings
from experiments.views import GeometryBlock, SweepBlock
from utils.errors import ConfigurationError

PLANE_WAVE = {"kind": "plane_wave_trace", "params": {"direction": [0.6, 0.8]}}
CRYSTAL_PROBLEM = {
    "a_by_tag": {"1": 1.0 / 12.1, "2": 1.0},
    "c_by_tag": {"1": 1.0, "2": 1.0},
    "beta_by_marker": {"1": -1.0, "2": -1.0, "3": -1.0, "4": -1.0},
}


def make_config(**blocks) -> ExperimentConfig:
    return ExperimentConfig.model_validate(blocks)


def square_analogue(command="convergence", **extra):
    blocks = {
        "command": command,
        "geometry": {"cells_x": 2, "cells_y": 2, "side_length": 0.5},
        "discretization": {"h": 0.125, "p": [1, 2], "modes": [3, 7], "pairing": "zip"},
        "problem": {"omega": 2.0, "source": PLANE_WAVE},
    }
    blocks.update(extra)
    return make_config(**blocks)


def write_json(tmp_path, blocks) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(blocks))
    return path


@pytest.mark.parametrize("preset", sorted(PRESETS_DIR.glob("*.json")), ids=lambda p: p.stem)
def test_presets_validate(preset):
    config = load_config(preset)
    assert config.kappas()


def test_profile_defaults():
    settings = load_settings()
    assert settings.caps.direct_solve == 400_000
    assert settings.raster_size == 256
    assert square_analogue().caps.oracle_acms == 2_000


def test_solver_defaults_come_from_profile(monkeypatch):
    config = square_analogue()
    assert (config.solver, config.reference.solver) == ("banded", "banded")
    profile = Settings.model_validate({"solver": {"acms": "splu", "reference": "splu"}})
    monkeypatch.setattr("experiments.views.load_settings", lambda: profile)
    config = square_analogue()
    assert (config.solver, config.reference.solver) == ("splu", "splu")
    config = square_analogue(solver="banded")
    assert (config.solver, config.reference.solver) == ("banded", "splu")


@pytest.mark.parametrize(
    "change",
    [
        {"surprise": 1},
        {"geometry": {"cells_x": 6, "cells_y": 6, "cells_per_subdomain": [4]}},
        {"discretization": {"h": 0.1, "p": [], "modes": [4]}},
        {"discretization": {"h": 0.1, "p": [1, 2], "modes": [4], "pairing": "zip"}},
        {"discretization": {"h": 0.1, "p": [11], "modes": [4]}},
        {"problem": {"omega": 2.0, "source": {"kind": "incoming_plane_wave"}}},
        {"problem": {"omega": 2.0, "beta_by_marker": {"1": 1.0, "2": -1.0, "3": 1.0, "4": 1.0}, "source": PLANE_WAVE}},
        {"sweep": {"kappas": []}},
        {"sweep": {"kappa_range": [0.5, 2.0]}},
    ],
)
def test_invalid_configs_rejected(change):
    blocks = square_analogue().model_dump(mode="json")
    blocks.update(change)
    with pytest.raises(ValueError):
        ExperimentConfig.model_validate(blocks)


def test_command_preconditions():
    with pytest.raises(ValueError, match="waveguide"):
        make_config(command="crystal", geometry={"cells_x": 2, "cells_y": 2})
    with pytest.raises(ValueError, match="prototype"):
        make_config(command="scaling", problem={"omega": 2.0})
    assert make_config(command="scaling").scaling.repetitions == 3


def test_kappa_range():
    sweep = SweepBlock(kappa_range=(0.5, 2.0), steps=4)
    assert sweep.values() == pytest.approx([0.5, 1.0, 1.5, 2.0])


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(ConfigurationError, match="JSON"):
        load_config(broken)


def test_cli_config_error_exit_code(tmp_path):
    assert main(["--config", str(write_json(tmp_path, {"command": "convergence", "extra": True}))]) == 1
    assert main(["--config", str(tmp_path / "missing.json")]) == 1


def test_cli_rejects_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ACMS_THREADS", "many")
    path = write_json(tmp_path, square_analogue().model_dump(mode="json"))
    assert main(["--config", str(path), "--out", str(tmp_path / "out")]) == 1


def test_convergence_rows(tmp_path):
    result = run_command(square_analogue(), tmp_path)
    frame = pd.read_csv(tmp_path / "sweep.csv")
    assert len(result.records) == 2 and len(frame) == 2
    assert list(frame["p"]) == [1, 2]
    assert (frame["J"] == 4).all()
    assert frame["err_rel"].iloc[1] < frame["err_rel"].iloc[0] < 1.0
    np.testing.assert_allclose(frame["t_tot"], frame[["t_bas", "t_ass", "t_sol"]].sum(axis=1), rtol=1e-12)
    assert frame["E_in"].isna().all()


def test_convergence_reruns_identical(tmp_path):
    timing = ["t_bas", "t_ass", "t_sol", "t_tot"]
    run_command(square_analogue(), tmp_path / "a")
    run_command(square_analogue(), tmp_path / "b")
    first = pd.read_csv(tmp_path / "a" / "sweep.csv").drop(columns=timing)
    second = pd.read_csv(tmp_path / "b" / "sweep.csv").drop(columns=timing)
    pd.testing.assert_frame_equal(first, second)


def test_zero_source_errors_vanish(tmp_path):
    config = square_analogue(
        problem={"omega": 2.0, "source": {"kind": "zero"}},
        reference={"strategy": "fem", "p_ref": 3},
    )
    run_command(config, tmp_path)
    assert (pd.read_csv(tmp_path / "sweep.csv")["err_rel"] == 0).all()


def test_too_many_modes_cost_one_row(tmp_path):
    config = square_analogue(discretization={"h": 0.125, "p": [1, 2], "modes": [1, 50], "pairing": "zip"})
    run_command(config, tmp_path)
    frame = pd.read_csv(tmp_path / "sweep.csv")
    assert not np.isnan(frame["err_rel"].iloc[0])
    assert np.isnan(frame["err_rel"].iloc[1]) and np.isnan(frame["NA"].iloc[1])


def test_mode_sweep_outputs(tmp_path):
    config = square_analogue(
        "mode_sweep",
        discretization={"h": 0.25, "p": [3], "modes": [1, 2, 3, 4]},
        sweep={"kappas": [2.0]},
    )
    result = run_command(config, tmp_path)
    assert len(pd.read_csv(tmp_path / "sweep.csv")) == 4
    onsets = pd.read_csv(tmp_path / "onsets.csv")
    assert list(onsets.columns) == ["kappa", "p", "J", "onset_IE", "floor"]
    assert result.summaries["slopes"][0]["series"] == "err_vs_IE"


def test_single_mode_count_has_no_onset(tmp_path):
    config = square_analogue("mode_sweep", discretization={"h": 0.25, "p": [2], "modes": [2]})
    result = run_command(config, tmp_path)
    assert result.summaries["onsets"][0]["onset_IE"] is None
    assert result.summaries["slopes"][0]["slope"] is None


def tiny_waveguide(**problem):
    return make_config(
        command="crystal",
        geometry={"cells_x": 4, "cells_y": 4, "centred": True, "layout": "waveguide", "pore": {"radius": 0.25}},
        discretization={"h": 0.25, "p": [2], "modes": [2]},
        problem={**CRYSTAL_PROBLEM, "source": {"kind": "gaussian_windowed", "params": {"side": 4}}, **problem},
        sweep={"kappas": [0.8, 1.0]},
        crystal={"export_kappas": [1.0], "gamma_half_width": 1.0, "profile_samples": 11},
        output={"raster_size": 8},
    )


def test_transmission_lines_follow_domain_corners():
    config = tiny_waveguide()
    mesh, _ = build_case(config.geometry, 1, config.discretization.h)
    lines = transmission_lines(mesh, 1.0)
    assert (lines.x_in, lines.x_out) == (-2.0, 2.0)
    assert lines.y_range == (-2.0, 2.0)
    assert lines.profile_range == (-1.0, 1.0)

    mesh, _ = build_case(GeometryBlock(cells_x=3, cells_y=2), 1, 0.5)
    lines = transmission_lines(mesh, 0.5)
    assert (lines.x_in, lines.x_out, lines.y_range, lines.profile_range) == (0.0, 3.0, (0.0, 2.0), (0.5, 1.5))
    assert transmission_lines(mesh, 5.0).profile_range == (0.0, 2.0)


def test_crystal_sweep(tmp_path):
    result = run_command(tiny_waveguide(), tmp_path)
    frame = pd.read_csv(tmp_path / "sweep.csv")
    assert len(frame) == 2
    assert (frame["E_in"] > 0).all() and (frame["E_out"] > 0).all()
    assert frame["err_rel"].isna().all()
    assert (tmp_path / "field_kappa_1.0000.csv").exists()
    profile = pd.read_csv(tmp_path / "profile_kappa_1.0000.csv")
    assert len(profile) == 11
    assert (profile["y"].min(), profile["y"].max()) == (-1.0, 1.0)
    assert len(result.files) == 3


def test_crystal_beta_sign_matters(tmp_path):
    negative = run_command(tiny_waveguide(), tmp_path / "neg").records
    positive = run_command(tiny_waveguide(beta_by_marker={"1": 1.0, "2": 1.0, "3": 1.0, "4": 1.0}), tmp_path / "pos").records
    assert negative[0].E_out != pytest.approx(positive[0].E_out, rel=1e-6)


def test_crystal_zero_source(tmp_path):
    records = run_command(tiny_waveguide(source={"kind": "zero"}), tmp_path).records
    assert all(r.E_in == 0.0 and r.E_out == 0.0 for r in records)


def test_scaling_outputs(tmp_path):
    config = make_config(
        command="scaling",
        discretization={"h": 0.25, "p": [2]},
        problem={"source": PLANE_WAVE},
        scaling={"modes": [1, 2, 3], "grid_sizes": [1, 2, 3], "fixed_modes": 2, "grid_p": 2, "grid_h": 0.25, "repetitions": 1},
    )
    result = run_command(config, tmp_path)
    frame = pd.read_csv(tmp_path / "sweep.csv")
    assert list(frame["IE"]) == [1, 2, 3, 2, 2, 2]
    assert list(frame["J"]) == [4, 4, 4, 1, 4, 9]
    slopes = pd.read_csv(tmp_path / "slopes.csv")
    assert len(slopes) == 8
    assert set(slopes["series"]) == {"vs_IE", "vs_J"}
    assert len(result.records) == 6


def oracle_config(**oracle):
    return make_config(
        command="oracle_check",
        geometry={"cells_x": 2, "cells_y": 2},
        problem={"omega": 1.0, "source": PLANE_WAVE},
        oracle=oracle,
    )


def test_oracle_suite_passes(tmp_path):
    result = run_command(oracle_config(), tmp_path)
    assert not result.failures
    names = {row["check"] for row in result.summaries["checks"]}
    assert names == {
        "dense_system",
        "dense_solution",
        "extension_linearity",
        "zero_trace_extension",
        "eigen_residual",
        "eigen_orthonormality",
        "full_mode_equivalence",
    }


def test_oracle_fault_injection_fails(tmp_path):
    result = run_command(oracle_config(inject_fault=True), tmp_path)
    failed = {failure.split(" ")[0] for failure in result.failures}
    assert "dense_system" in failed


def test_cli_oracle_exit_codes(tmp_path):
    good = write_json(tmp_path, oracle_config().model_dump(mode="json"))
    assert main(["--config", str(good), "--out", str(tmp_path / "good")]) == 0
    assert (tmp_path / "good" / "run.json").exists()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(oracle_config(inject_fault=True).model_dump(mode="json")))
    assert main(["--config", str(bad), "--out", str(tmp_path / "bad")]) == 3


@pytest.mark.slow
def test_oracle_suite_seeds(tmp_path):
    config = oracle_config().model_copy(update={"seeds": [0, 1, 2, 3, 4]})
    assert not run_command(config, tmp_path).failures


@pytest.mark.slow
def test_high_order_benefit(tmp_path):
    config = square_analogue(
        discretization={"h": 0.05, "p": [1, 4], "modes": [8, 32], "pairing": "zip"},
        problem={"omega": 16.0, "source": PLANE_WAVE},
    )
    errors = [r.err_rel for r in run_command(config, tmp_path).records]
    assert errors[1] / errors[0] <= 1e-3


@pytest.mark.slow
def test_mode_rate_and_onsets(tmp_path):
    config = square_analogue(
        "mode_sweep",
        discretization={"h": 0.025, "p": [5], "modes": [1, 2, 4, 8, 12, 16, 24, 32, 48, 64, 96]},
        sweep={"kappas": [8.0, 16.0, 32.0]},
        reference={"strategy": "manufactured", "floor_factor": 2.0},
    )
    result = run_command(config, tmp_path)
    onsets = {row["kappa"]: row["onset_IE"] for row in result.summaries["onsets"]}
    for low, high in [(8.0, 16.0), (16.0, 32.0)]:
        assert 1.4 <= onsets[high] / onsets[low] <= 3.0
    slope = next(row["slope"] for row in result.summaries["slopes"] if row["kappa"] == 16.0)
    assert -4.0 <= slope <= -2.4


@pytest.mark.slow
def test_transmission_contrast(tmp_path):
    config = make_config(
        command="crystal",
        geometry={"cells_x": 10, "cells_y": 10, "cells_per_subdomain": [2], "centred": True, "layout": "waveguide", "pore": {"radius": 0.25}},
        discretization={"h": 0.1, "p": [4], "modes": [16]},
        problem={**CRYSTAL_PROBLEM, "source": {"kind": "gaussian_windowed", "params": {"side": 4}}},
        sweep={"kappas": [1.26, 1.48]},
    )
    low, high = run_command(config, tmp_path).records
    assert (high.E_out / high.E_in) >= 10 * (low.E_out / low.E_in)


@pytest.mark.slow
def test_crystal_accuracy_and_decomposition(tmp_path):
    config = make_config(
        command="convergence",
        geometry={"cells_x": 4, "cells_y": 4, "cells_per_subdomain": [1, 2], "centred": True, "pore": {"radius": 0.25}},
        discretization={"h": 0.05, "p": [3], "modes": [32, 64], "pairing": "product"},
        problem={**CRYSTAL_PROBLEM, "omega": 1.0, "source": {"kind": "incoming_plane_wave"}},
        reference={"strategy": "fem", "p_ref": 5, "solver": "splu"},
        solver="splu",
    )
    errors = {(r.J, r.IE): r.err_rel for r in run_command(config, tmp_path).records}
    assert errors[(4, 64)] <= 5e-5
    assert 0.5 <= errors[(16, 32)] / errors[(4, 64)] <= 2.0


@pytest.mark.slow
def test_scaling_slopes(tmp_path):
    config = make_config(
        command="scaling",
        discretization={"h": 1.0 / 64, "p": [2]},
        problem={"omega": 1.0, "source": PLANE_WAVE},
        scaling={"modes": [8, 16, 32, 64], "grid_sizes": [1, 2, 4, 8], "fixed_modes": 4, "grid_p": 4, "grid_h": 0.1},
    )
    slopes = {(row["series"], row["quantity"]): row["slope"] for row in run_command(config, tmp_path).summaries["slopes"]}
    assert 1.6 <= slopes[("vs_IE", "t_ass")] <= 2.4
    assert 0.6 <= slopes[("vs_IE", "t_bas")] <= 1.5
    assert slopes[("vs_J", "t_sol")] <= 2.2

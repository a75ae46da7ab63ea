from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from bathy_homog.cli import OUTPUT_DIR_ENV, main
from bathy_homog.homogenized_solver import load_checkpoint
from bathy_homog.scenarios import HomogenizedDomain, ReferenceDomain, builtin_scenario, save_scenario


def _read_table(path) -> np.ndarray:
    return np.loadtxt(path, skiprows=1, delimiter=",", ndmin=2)


def test_dump_coefficients_on_flat_bottom(tmp_path, capsys) -> None:
    assert main(["dump-coefficients", "--scenario", "flat", "--output-dir", str(tmp_path)]) == 0

    text = (tmp_path / "flat_coefficients.txt").read_text(encoding="utf-8")
    assert "# sign status: degenerate-flat" in text
    assert "\nmu = 0\n" in text
    assert (tmp_path / "flat_coefficients.csv").read_text(encoding="utf-8").startswith("key,value\n")
    assert "Wrote coefficients to" in capsys.readouterr().out


def test_output_dir_falls_back_to_environment(tmp_path, monkeypatch) -> None:
    target = tmp_path / "from_env"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(target))

    assert main(["dump-coefficients", "--scenario", "scenario_b"]) == 0
    assert (target / "scenario_b_coefficients.csv").exists()


def test_dispersion_curve(tmp_path) -> None:
    assert main(["dispersion", "--form", "xxt", "--points", "11", "--output-dir", str(tmp_path)]) == 0

    path = tmp_path / "dispersion_xxt.csv"
    assert path.read_text(encoding="utf-8").startswith("K,re_omega1,im_omega1")
    table = _read_table(path)
    assert table.shape[0] == 11
    assert np.all(np.diff(table[:, 1]) < 0.0)


def test_dispersion_rejects_bad_sampling(tmp_path, capsys) -> None:
    assert main(["dispersion", "--points", "1", "--output-dir", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: kind=UsageError message=")
    assert "--points" in err


def test_traveling_wave_by_speed_ratio(tmp_path) -> None:
    assert main(["traveling-wave", "--speed-ratio", "1.024", "--output-dir", str(tmp_path)]) == 0

    table = _read_table(tmp_path / "traveling_wave_o3_scenario_a.csv")
    assert float(np.max(table[:, 1])) == pytest.approx(0.0168, abs=3e-4)
    assert np.allclose(table[:, 2], table[:, 1] * table[0, 2] / table[0, 1])


def test_periodic_wave_needs_order_three(tmp_path, capsys) -> None:
    argv = ["traveling-wave", "--order", "5", "--speed-ratio", "1.024", "--energy", "-1e-4"]

    assert main([*argv, "--output-dir", str(tmp_path)]) == 2
    assert capsys.readouterr().err.startswith("error: kind=UsageError")


def test_simulate_writes_snapshots_and_checkpoint(tmp_path) -> None:
    scenario = replace(
        builtin_scenario("flat"),
        name="tiny",
        homogenized=HomogenizedDomain(L=50.0, M=256),
        output_times=(0.25, 0.5),
    )
    path = save_scenario(scenario, tmp_path / "tiny.json")
    out = tmp_path / "out"

    assert main(["simulate", "--scenario", str(path), "--checkpoint", "--output-dir", str(out)]) == 0

    table = _read_table(out / "simulate_o3_tiny.csv")
    assert table.shape == (2 * 256, 4)
    assert set(table[:, 0]) == {0.25, 0.5}
    assert load_checkpoint(out / "simulate_o3_tiny.ckpt").t == 0.5


def test_verify_identities_passes(tmp_path, capsys) -> None:
    assert main(["verify-identities", "--scenario", "scenario_a", "--output-dir", str(tmp_path)]) == 0

    out = capsys.readouterr().out
    assert "PASS" in out
    assert "FAIL" not in out


def test_missing_scenario_file_is_reported(tmp_path, capsys) -> None:
    missing = tmp_path / "nope.json"

    assert main(["dump-coefficients", "--scenario", str(missing), "--output-dir", str(tmp_path)]) == 1
    assert capsys.readouterr().err.startswith("error: kind=ScenarioError message=")


def test_unknown_verb_is_a_usage_error() -> None:
    with pytest.raises(SystemExit) as excinfo:
        main(["explode"])
    assert excinfo.value.code == 2


def _sample_tiny_flat(tmp_path):
    scenario = replace(
        builtin_scenario("flat"),
        name="tinyflat",
        homogenized=HomogenizedDomain(L=16.0, M=128, orders=(3,)),
        reference=ReferenceDomain(length=16.0),
        output_times=(0.2,),
    )
    return save_scenario(scenario, tmp_path / "tinyflat.json")


def test_reference_and_compare_verbs(tmp_path, capsys) -> None:
    path = _sample_tiny_flat(tmp_path)
    out = tmp_path / "out"

    assert main(["reference", "--scenario", str(path), "--output-dir", str(out)]) == 0
    assert "Separated crests at t=0.2:" in capsys.readouterr().out
    reference = np.loadtxt(out / "reference_tinyflat.csv", skiprows=1, delimiter=",", ndmin=2)
    assert reference.shape == (16 * 64, 5)

    assert main(["compare", "--scenario", str(path), "--output-dir", str(out)]) == 0
    assert (out / "compare_tinyflat.csv").read_text(encoding="utf-8").startswith("order,t,linf,l2")
    snapshot = np.loadtxt(out / "compare_o3_tinyflat.csv", skiprows=1, delimiter=",", ndmin=2)
    # columns: t, x, eta_bar, q_bar, eta_reference
    assert np.max(np.abs(snapshot[:, 2] - snapshot[:, 4])) < 1e-4


def test_failed_identities_exit_with_an_error_line(tmp_path, capsys) -> None:
    argv = ["verify-identities", "--scenario", "scenario_b", "--tol", "1e-300", "--output-dir", str(tmp_path)]

    assert main(argv) == 1
    captured = capsys.readouterr()
    assert "FAIL" in captured.out
    assert captured.err.startswith("error: kind=UnitCellError message=")
    assert "identities failed" in captured.err

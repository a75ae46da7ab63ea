from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from bathy_homog.scenarios import (
    BUILTIN_SCENARIOS,
    BathymetrySpec,
    InitialCondition,
    ReferenceDomain,
    ScenarioConfig,
    ScenarioError,
    builtin_scenario,
    dumps_scenario,
    load_scenario,
    loads_scenario,
    save_scenario,
    scenario_from_dict,
)
from bathy_homog.unit_cell import PiecewiseConstant, Sampled, Sinusoidal

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.mark.parametrize("name", BUILTIN_SCENARIOS)
def test_builtin_scenarios_survive_json(name: str) -> None:
    config = builtin_scenario(name)

    assert loads_scenario(dumps_scenario(config)) == config


@pytest.mark.parametrize("name", ["scenario_a", "scenario_b"])
def test_shipped_files_match_builtins(name: str) -> None:
    assert load_scenario(SCENARIO_DIR / f"{name}.json") == builtin_scenario(name)


def test_builtin_profiles() -> None:
    a = builtin_scenario("scenario_a").profile()
    b = builtin_scenario("scenario_b").profile()

    assert isinstance(a, PiecewiseConstant)
    assert a.values == (1.0, 0.3)
    assert isinstance(b, Sinusoidal)
    assert float(b(0.25)) == pytest.approx(0.2)
    assert builtin_scenario("scenario_a").initial_condition.amplitude == 1.0 / 40.0


def test_save_and_load_by_path(tmp_path) -> None:
    config = builtin_scenario("flat")
    path = save_scenario(config, tmp_path / "nested" / "flat.json")

    assert path.exists()
    assert load_scenario(path) == config
    assert load_scenario(str(path)) == config


def test_partial_file_takes_defaults() -> None:
    config = scenario_from_dict({"name": "mini", "bathymetry": {"kind": "sinusoidal", "mean": 1.0, "amplitude": 0.2}})

    assert config.output_times == (25.2,)
    assert config.homogenized.M == 8192
    assert config.initial_condition.kind == "gaussian"
    assert config.delta == 1.0


def test_sampled_bathymetry() -> None:
    samples = 1.0 + 0.3 * np.sin(2.0 * np.pi * np.arange(32) / 32)
    spec = BathymetrySpec(kind="sampled", values=tuple(samples))

    assert isinstance(spec.profile(), Sampled)
    assert spec.profile().mean_depth() == pytest.approx(1.0)


def test_rejects_malformed_scenarios() -> None:
    base = json.loads(dumps_scenario(builtin_scenario("scenario_a")))

    with pytest.raises(ScenarioError):
        scenario_from_dict({**base, "colour": "blue"})
    with pytest.raises(ScenarioError):
        scenario_from_dict({**base, "output_times": [50.0, 25.2]})
    with pytest.raises(ScenarioError):
        scenario_from_dict({**base, "homogenized": {"M": 1000}})
    with pytest.raises(ScenarioError):
        scenario_from_dict({**base, "reference": {"cells": 64}})
    with pytest.raises(ScenarioError):
        scenario_from_dict({"name": "x"})
    with pytest.raises(ScenarioError):
        loads_scenario("[1, 2]")
    with pytest.raises(ScenarioError):
        loads_scenario("{not json")


def test_rejects_bad_sections() -> None:
    with pytest.raises(ScenarioError):
        BathymetrySpec(kind="triangular")
    with pytest.raises(ScenarioError):
        BathymetrySpec(kind="piecewise_constant", breakpoints=(0.5, 1.0), values=(1.0, -1.0)).profile()
    with pytest.raises(ScenarioError):
        InitialCondition(kind="traveling_wave", speed_ratio=0.9)
    with pytest.raises(ScenarioError):
        InitialCondition(kind="samples", x=(0.0, 1.0), eta=(0.0,))
    with pytest.raises(ScenarioError):
        ScenarioConfig(name="x", bathymetry=BathymetrySpec(kind="sinusoidal", mean=1.0), g=0.0)


def test_unknown_scenario_name() -> None:
    with pytest.raises(ScenarioError):
        builtin_scenario("scenario_z")
    with pytest.raises(ScenarioError):
        load_scenario("no/such/scenario.json")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"length": 0.0},
        {"length": -10.0},
        {"cells_per_period": 32},
        {"cells_per_period": 64.5},
        {"cfl": 0.0},
        {"cfl": 1.0},
        {"limiter": "superbee"},
    ],
)
def test_reference_domain_rejects_bad_settings(kwargs: dict) -> None:
    with pytest.raises(ScenarioError):
        ReferenceDomain(**kwargs)


def test_reference_domain_coerces_whole_cell_counts() -> None:
    domain = ReferenceDomain(cells_per_period=128.0)

    assert domain.cells_per_period == 128
    assert isinstance(domain.cells_per_period, int)

"""
Homogenized shallow-water waves over periodic bathymetry: cell brackets, effective
coefficients, dispersion, traveling waves, a spectral solver and a finite-volume reference.
"""

from .coefficients import CoefficientError, HomogenizedCoefficients, compute, sign_report
from .dispersion import DispersionError, dispersion_point, k_max
from .harness import ComparisonReport, refinement_gap, run_comparison
from .homogenized_solver import FieldState, SolverConfig, SolverError, fast_scale_reconstruction, simulate
from .scenarios import ScenarioConfig, ScenarioError, load_scenario
from .swe_reference import FVState, ReferenceConfig, ReferenceSolverError, crest_train, extract_solitary, run_reference
from .traveling_wave import (
    NoSolitaryWaveError,
    TravelingWaveError,
    TrivialSolutionError,
    solitary_wave_o3,
    solitary_wave_o5,
)
from .unit_cell import PiecewiseConstant, Sampled, Sinusoidal, UnitCellError, bracket, identity_suite


def coefficients_for_scenario(name_or_path: str) -> HomogenizedCoefficients:
    """Convenience helper to go from a scenario name or JSON file to its coefficients."""
    scenario = load_scenario(name_or_path)
    return compute(scenario.profile(), scenario.g)


__all__ = [
    "PiecewiseConstant",
    "Sinusoidal",
    "Sampled",
    "UnitCellError",
    "bracket",
    "identity_suite",
    "HomogenizedCoefficients",
    "CoefficientError",
    "compute",
    "sign_report",
    "DispersionError",
    "dispersion_point",
    "k_max",
    "TravelingWaveError",
    "NoSolitaryWaveError",
    "TrivialSolutionError",
    "solitary_wave_o3",
    "solitary_wave_o5",
    "FieldState",
    "SolverConfig",
    "SolverError",
    "simulate",
    "fast_scale_reconstruction",
    "FVState",
    "ReferenceConfig",
    "ReferenceSolverError",
    "run_reference",
    "extract_solitary",
    "crest_train",
    "ScenarioConfig",
    "ScenarioError",
    "load_scenario",
    "ComparisonReport",
    "run_comparison",
    "refinement_gap",
    "coefficients_for_scenario",
]

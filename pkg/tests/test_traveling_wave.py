from __future__ import annotations

import math

import numpy as np
import pytest

from bathy_homog.coefficients import compute
from bathy_homog.traveling_wave import (
    NoSolitaryWaveError,
    TravelingWaveError,
    TravelingWaveSolution,
    TrivialSolutionError,
    bvp_residual,
    energy,
    gammas,
    ode_residual,
    periodic_wave_o3,
    potential,
    separatrix_amplitude,
    solitary_wave_o3,
    solitary_wave_o5,
    speed_for_amplitude,
    well_geometry,
)
from bathy_homog.unit_cell import PiecewiseConstant

G = 9.81


def _sample_coeffs():
    return compute(PiecewiseConstant((0.5, 1.0), (1.0, 0.3)), G)


def _sample_speed(coeffs) -> float:
    return 1.024 * coeffs.c


def test_solitary_wave_o3_sits_on_the_separatrix() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)
    tw = gammas(coeffs, V)
    wave = solitary_wave_o3(coeffs, V)

    assert wave.amplitude == pytest.approx(separatrix_amplitude(tw), rel=1e-6)
    assert wave.amplitude == pytest.approx(0.0168, abs=3e-4)
    assert np.max(np.abs(energy(wave, tw))) < 1e-10
    assert np.array_equal(wave.eta, wave.eta[::-1])
    assert not wave.is_periodic


def test_solitary_wave_o3_shape() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)
    tw = gammas(coeffs, V)
    wave = solitary_wave_o3(coeffs, V)
    kappa = math.sqrt(tw.gamma1 / tw.stiffness)

    assert ode_residual(wave, coeffs) < 1e-5 * kappa**2 * wave.amplitude
    # sech² profile: half width at half maximum is 2·arcsech(1/√2)/κ
    assert wave.half_width() == pytest.approx(2.0 * math.acosh(math.sqrt(2.0)) / kappa, rel=0.05)
    assert np.allclose(wave.q, V * wave.eta)


def test_sample_places_crest_at_center() -> None:
    coeffs = _sample_coeffs()
    wave = solitary_wave_o3(coeffs, _sample_speed(coeffs))
    x = np.linspace(-10.0, 30.0, 4001)
    eta = wave.sample(x, center=12.0)

    assert float(x[np.argmax(eta)]) == pytest.approx(12.0, abs=0.01)
    assert float(np.max(eta)) == pytest.approx(wave.amplitude, rel=1e-6)


def test_speed_for_amplitude_round_trip() -> None:
    coeffs = _sample_coeffs()
    V = speed_for_amplitude(coeffs, 1.0, 0.0168)

    assert V > coeffs.c
    assert separatrix_amplitude(gammas(coeffs, V)) == pytest.approx(0.0168, rel=1e-8)
    with pytest.raises(TravelingWaveError):
        speed_for_amplitude(coeffs, 1.0, -0.01)


def test_periodic_wave_keeps_its_energy() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)
    tw = gammas(coeffs, V)
    E = 0.5 * well_geometry(tw).well_depth
    points = 512
    wave = periodic_wave_o3(coeffs, V, E=E, points=points)

    assert wave.is_periodic
    assert wave.period is not None and wave.period > 0.0
    assert np.allclose(energy(wave, tw), E, rtol=0.0, atol=1e-7 * abs(E))
    assert int(np.argmax(wave.eta)) == points // 2
    assert float(np.min(wave.eta)) > 0.0


def test_periodic_wave_rejects_energy_outside_the_well() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)

    with pytest.raises(TravelingWaveError):
        periodic_wave_o3(coeffs, V, E=0.1)
    with pytest.raises(TravelingWaveError):
        periodic_wave_o3(coeffs, V)


def test_flat_bottom_has_no_solitary_wave() -> None:
    flat = compute(PiecewiseConstant((1.0,), (1.0,)), G)
    V = 1.05 * flat.c

    with pytest.raises(TravelingWaveError):
        solitary_wave_o3(flat, V)
    with pytest.raises(TrivialSolutionError):
        solitary_wave_o5(flat, V)


def test_subcritical_speed_is_rejected() -> None:
    coeffs = _sample_coeffs()

    with pytest.raises(NoSolitaryWaveError):
        solitary_wave_o3(coeffs, 0.9 * coeffs.c)
    with pytest.raises(TravelingWaveError):
        gammas(coeffs, -1.0)


def test_solution_validation() -> None:
    xi = np.linspace(-1.0, 1.0, 9)

    with pytest.raises(TravelingWaveError):
        TravelingWaveSolution(xi, np.zeros(9), 1.0, 4)
    with pytest.raises(TravelingWaveError):
        TravelingWaveSolution(xi, np.zeros(8), 1.0, 3)


@pytest.mark.slow
def test_solitary_wave_o5_solves_the_boundary_value_problem() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)
    guess = solitary_wave_o3(coeffs, V)
    wave = solitary_wave_o5(coeffs, V, guess=guess)

    assert wave.order == 5
    assert wave.xi.size == wave.eta.size
    assert bvp_residual(wave, coeffs) < 1e-8
    assert np.array_equal(wave.eta, wave.eta[::-1])
    assert wave.amplitude == pytest.approx(guess.amplitude, rel=0.05)


def _nested_dxi(window: float, n: int) -> float:
    """A spacing that makes the solver place exactly n intervals on the half window."""
    return window / n * (1.0 + 1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("ratio", [1.01, 1.024, 1.04])
def test_solitary_wave_o5_converges_across_speeds(ratio: float) -> None:
    coeffs = _sample_coeffs()
    V = ratio * coeffs.c
    wave = solitary_wave_o5(coeffs, V)

    assert bvp_residual(wave, coeffs) < 1e-8
    assert wave.amplitude > 0.0
    assert wave.amplitude == pytest.approx(separatrix_amplitude(gammas(coeffs, V)), rel=0.1)


@pytest.mark.slow
def test_solitary_wave_o5_is_second_order_in_dxi() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)
    guess = solitary_wave_o3(coeffs, V)
    window = 40.0 * guess.half_width()
    waves = [
        solitary_wave_o5(coeffs, V, guess=guess, xi_window=window, dxi=_nested_dxi(window, n))
        for n in (400, 800, 1600)
    ]
    amplitudes = [w.amplitude for w in waves]
    shape_gaps = [float(np.max(np.abs(fine.eta[::2] - coarse.eta))) for coarse, fine in zip(waves, waves[1:])]

    assert waves[0].eta.size == 801
    assert np.allclose(waves[1].xi[::2], waves[0].xi)
    amplitude_ratio = (amplitudes[0] - amplitudes[1]) / (amplitudes[1] - amplitudes[2])
    assert 3.5 < amplitude_ratio < 4.5
    assert 3.5 < shape_gaps[0] / shape_gaps[1] < 4.5


@pytest.mark.slow
def test_solitary_waves_do_not_depend_on_the_window() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)
    guess = solitary_wave_o3(coeffs, V)
    hw = guess.half_width()
    step = hw / 50.0 * (1.0 + 1e-12)

    narrow3 = solitary_wave_o3(coeffs, V, xi_window=30.0 * hw, dxi=step)
    wide3 = solitary_wave_o3(coeffs, V, xi_window=40.0 * hw, dxi=step)
    x = np.linspace(-10.0 * hw, 10.0 * hw, 801)
    assert narrow3.amplitude == pytest.approx(wide3.amplitude, rel=1e-12)
    assert np.allclose(narrow3.sample(x), wide3.sample(x), rtol=0.0, atol=1e-12)

    narrow5 = solitary_wave_o5(coeffs, V, guess=guess, xi_window=30.0 * hw, dxi=step)
    wide5 = solitary_wave_o5(coeffs, V, guess=guess, xi_window=40.0 * hw, dxi=step)
    assert narrow5.dxi == pytest.approx(wide5.dxi, rel=1e-9)
    assert narrow5.amplitude == pytest.approx(wide5.amplitude, rel=1e-7)


@pytest.mark.slow
def test_speed_for_amplitude_order5_round_trip() -> None:
    coeffs = _sample_coeffs()
    target = 0.0168
    V5 = speed_for_amplitude(coeffs, 1.0, target, order=5)

    assert V5 > coeffs.c
    assert solitary_wave_o5(coeffs, V5).amplitude == pytest.approx(target, rel=1e-6)


@pytest.mark.slow
def test_speeds_recovered_from_a_measured_crest() -> None:
    coeffs = _sample_coeffs()
    # leading crest height of the scenario_a fission run
    measured = separatrix_amplitude(gammas(coeffs, 1.023928 * coeffs.c))
    V3 = speed_for_amplitude(coeffs, 1.0, measured, order=3)
    V5 = speed_for_amplitude(coeffs, 1.0, measured, order=5)

    assert V3 / coeffs.c == pytest.approx(1.0239, abs=1e-3)
    assert V5 / coeffs.c == pytest.approx(1.0233, abs=1e-3)


def test_periodic_wave_turning_points_sit_on_the_energy_level() -> None:
    coeffs = _sample_coeffs()
    V = _sample_speed(coeffs)
    tw = gammas(coeffs, V)
    geometry = well_geometry(tw)
    E = 0.5 * geometry.well_depth
    wave = periodic_wave_o3(coeffs, V, E=E, points=512)

    trough = float(np.min(wave.eta))
    crest = float(np.max(wave.eta))
    assert trough < geometry.well_bottom < crest < geometry.separatrix_crossing
    assert abs(float(potential(trough, tw)[0]) - E) < 1e-10
    assert abs(float(potential(crest, tw)[0]) - E) < 1e-10

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from bathy_homog.coefficients import compute
from bathy_homog.dispersion import angular_frequency
from bathy_homog.homogenized_solver import (
    FieldState,
    SolverConfig,
    SolverError,
    apply_inverse_elliptic,
    band_limit_ratio,
    fast_scale_reconstruction,
    linear_phase_speed,
    load_checkpoint,
    periodic_grid,
    rhs,
    save_checkpoint,
    simulate,
    spectral_resample,
    step,
)
from bathy_homog.traveling_wave import solitary_wave_o3, solitary_wave_o5
from bathy_homog.unit_cell import PiecewiseConstant

G = 9.81


def _sample_profile() -> PiecewiseConstant:
    return PiecewiseConstant((0.5, 1.0), (1.0, 0.3))


def _sample_coeffs():
    return compute(_sample_profile(), G)


def _sample_gaussian(L: float = 40.0, M: int = 256, amplitude: float = 0.01) -> FieldState:
    x = periodic_grid(L, M)
    return FieldState(x, amplitude * np.exp(-((x / 3.0) ** 2)), np.zeros(M))


def test_grid_and_state_validation() -> None:
    x = periodic_grid(10.0, 16)

    assert x[0] == -10.0
    assert x[-1] == pytest.approx(10.0 - 20.0 / 16)
    with pytest.raises(SolverError):
        periodic_grid(10.0, 24)
    with pytest.raises(SolverError):
        FieldState(x, np.zeros(8), np.zeros(16))
    with pytest.raises(SolverError):
        SolverConfig(order=6)
    with pytest.raises(SolverError):
        SolverConfig(tableau="euler")


def test_state_at_rest_stays_at_rest() -> None:
    state = FieldState.at_rest(20.0, 64)
    final = simulate(state, _sample_coeffs(), SolverConfig(order=5, final_time=1.0))[-1]

    assert final.t == 1.0
    assert np.all(final.eta_bar == 0.0)
    assert np.all(final.q_bar == 0.0)


@pytest.mark.parametrize("order", [3, 4, 5])
def test_mass_is_conserved(order: int) -> None:
    initial = _sample_gaussian()
    snapshots = simulate(initial, _sample_coeffs(), SolverConfig(order=order), [1.0, 2.0])

    assert [s.t for s in snapshots] == [1.0, 2.0]
    for snap in snapshots:
        assert snap.mass() == pytest.approx(initial.mass(), abs=1e-14)


def test_flat_bottom_momentum_matches_saint_venant_expansion() -> None:
    h0 = 1.0
    flat = compute(PiecewiseConstant((1.0,), (h0,)), G)
    x = periodic_grid(math.pi, 128)
    eta = 0.1 * np.cos(x)
    q = 0.2 * np.sin(x)
    eta_x = -0.1 * np.sin(x)
    q_x = 0.2 * np.cos(x)
    state = FieldState(x, eta, q)

    eta_t, q_t = rhs(state, flat, SolverConfig(order=5))

    # −g h η_x − (q²/h)_x with 1/h expanded to third order in η
    series_x = (
        2.0 * q * q_x / h0
        - (2.0 * q * q_x * eta + q * q * eta_x) / h0**2
        + (2.0 * q * q_x * eta**2 + 2.0 * q * q * eta * eta_x) / h0**3
        - (2.0 * q * q_x * eta**3 + 3.0 * q * q * eta**2 * eta_x) / h0**4
    )
    expected = -G * (h0 + eta) * eta_x - series_x

    assert np.allclose(eta_t, -q_x, atol=1e-13)
    assert np.allclose(q_t, expected, atol=1e-11)


def test_fifth_order_needs_translation_even_profile() -> None:
    lopsided = compute(PiecewiseConstant((0.25, 0.5, 1.0), (1.0, 2.0, 3.0)), G)
    state = _sample_gaussian()

    with pytest.raises(SolverError):
        rhs(state, lopsided, SolverConfig(order=5))
    # without the quintic nonlinearity the fifth-order system still runs
    eta_t, q_t = rhs(state, lopsided, SolverConfig(order=5, quintic_nonlinear=False))
    assert np.all(np.isfinite(q_t))


def test_inverse_elliptic_divides_each_mode() -> None:
    coeffs = _sample_coeffs()
    config = SolverConfig(order=3)
    L, M = 2.0 * math.pi, 64
    x = periodic_grid(L, M)
    k = 3.0 * math.pi / L
    out = apply_inverse_elliptic(np.sin(k * x), coeffs, config, 2.0 * L / M)

    assert np.allclose(out, np.sin(k * x) / (1.0 + coeffs.mu * k * k), atol=1e-14)


@pytest.mark.parametrize("order", [3, 5])
def test_linear_phase_speed_matches_dispersion(order: int) -> None:
    coeffs = _sample_coeffs()
    config = SolverConfig(order=order, rtol=1e-11, atol=1e-14)
    L, M = 4.0 * math.pi, 64
    k = 2.0 * math.pi / L * 2.0

    measured = linear_phase_speed(k, coeffs, config, L, M)
    expected = float(angular_frequency(k, coeffs, 1.0, order)) / k
    assert measured == pytest.approx(expected, rel=1e-6)


def test_fixed_step_matches_adaptive() -> None:
    coeffs = _sample_coeffs()
    initial = _sample_gaussian()
    adaptive = simulate(initial, coeffs, SolverConfig(order=3, rtol=1e-10, atol=1e-13), [0.5])[-1]
    fixed = simulate(initial, coeffs, SolverConfig(order=3, dt=0.01), [0.5])[-1]

    assert np.max(np.abs(adaptive.eta_bar - fixed.eta_bar)) < 1e-8


def test_single_step_advances_time() -> None:
    state = _sample_gaussian()
    after = step(state, _sample_coeffs(), SolverConfig(order=4, dt=0.01))

    assert after.t == pytest.approx(0.01)
    assert not np.array_equal(after.eta_bar, state.eta_bar)


def test_checkpoint_round_trip(tmp_path) -> None:
    state = replace(_sample_gaussian(), t=3.25)
    path = save_checkpoint(tmp_path / "run" / "state.ckpt", state)
    loaded = load_checkpoint(path)

    assert loaded.t == 3.25
    assert np.array_equal(loaded.x, state.x)
    assert np.array_equal(loaded.eta_bar, state.eta_bar)
    assert np.array_equal(loaded.q_bar, state.q_bar)


def test_checkpoint_rejects_foreign_files(tmp_path) -> None:
    bogus = tmp_path / "bogus.ckpt"
    bogus.write_bytes(b"not a checkpoint at all, just some bytes")
    with pytest.raises(SolverError):
        load_checkpoint(bogus)

    path = save_checkpoint(tmp_path / "cut.ckpt", _sample_gaussian())
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SolverError):
        load_checkpoint(path)


def test_spectral_resample_is_exact_for_band_limited_data() -> None:
    x = periodic_grid(math.pi, 32)
    fine = periodic_grid(math.pi, 128)

    assert np.allclose(spectral_resample(np.cos(3.0 * x), 128), np.cos(3.0 * fine), atol=1e-13)
    assert band_limit_ratio(FieldState(x, np.cos(3.0 * x), np.zeros(32))) < 1e-12


def test_fast_scale_reconstruction_trivial_cases() -> None:
    coeffs = _sample_coeffs()
    H = _sample_profile()
    x = periodic_grid(8.0, 64)
    still = FieldState(x, np.full(64, 0.01), np.zeros(64))
    fast = fast_scale_reconstruction(still, coeffs, H, 1.0)

    # a uniform surface at rest has no cell-scale structure
    assert fast.x.size >= 16 * 16
    assert np.allclose(fast.eta, 0.01, atol=1e-15)
    assert np.allclose(fast.q, 0.0, atol=1e-15)

    flat = compute(PiecewiseConstant((1.0,), (1.0,)), G)
    moving = _sample_gaussian(L=8.0, M=64)
    moving = replace(moving, q_bar=0.5 * moving.eta_bar)
    fast_flat = fast_scale_reconstruction(moving, flat, PiecewiseConstant((1.0,), (1.0,)), 1.0)
    assert np.allclose(fast_flat.eta, spectral_resample(moving.eta_bar, fast_flat.x.size), atol=1e-15)


def test_fast_scale_reconstruction_adds_cell_structure() -> None:
    coeffs = _sample_coeffs()
    state = replace(_sample_gaussian(L=16.0, M=128), q_bar=_sample_gaussian(L=16.0, M=128).eta_bar * coeffs.c)
    fast = fast_scale_reconstruction(state, coeffs, _sample_profile(), 1.0)
    smooth = spectral_resample(state.eta_bar, fast.x.size)

    assert np.max(np.abs(fast.eta - smooth)) > 0.0
    # corrections average out over each cell
    per_cell = (fast.eta - smooth).reshape(-1, fast.x.size // 32).mean(axis=1)
    assert np.max(np.abs(per_cell)) < 0.1 * np.max(np.abs(fast.eta - smooth))


@pytest.mark.slow
def test_solitary_wave_translates_at_its_speed() -> None:
    coeffs = _sample_coeffs()
    V = 1.024 * coeffs.c
    wave = solitary_wave_o3(coeffs, V)
    x = periodic_grid(51.2, 1024)
    eta = wave.sample(x, center=-20.0)
    initial = FieldState(x, eta, V * eta)

    final = simulate(initial, coeffs, SolverConfig(order=3, rtol=1e-9, atol=1e-12), [10.0])[-1]
    crest = float(x[np.argmax(final.eta_bar)])

    assert crest == pytest.approx(-20.0 + V * 10.0, abs=0.15)
    assert float(np.max(final.eta_bar)) == pytest.approx(float(np.max(eta)), rel=0.02)


def _propagation_error(wave, coeffs, config: SolverConfig) -> float:
    """Relative ∞-norm gap between the run and the translated wave at t = 50/c."""
    x = periodic_grid(64.0, 2048)
    eta = wave.sample(x, center=-25.0)
    initial = FieldState(x, eta, wave.V * eta)
    t_end = 50.0 / coeffs.c

    final = simulate(initial, coeffs, config, [t_end])[-1]
    expected = wave.sample(x, center=-25.0 + wave.V * t_end)
    return float(np.max(np.abs(final.eta_bar - expected))) / float(np.max(np.abs(eta)))


@pytest.mark.slow
def test_order3_wave_keeps_its_shape() -> None:
    coeffs = _sample_coeffs()
    wave = solitary_wave_o3(coeffs, 1.024 * coeffs.c)

    assert _propagation_error(wave, coeffs, SolverConfig(order=3, rtol=1e-10, atol=1e-13)) < 1e-3


@pytest.mark.slow
def test_order5_wave_keeps_its_shape() -> None:
    coeffs = _sample_coeffs()
    V = 1.024 * coeffs.c
    guess = solitary_wave_o3(coeffs, V)
    wave = solitary_wave_o5(coeffs, V, guess=guess, dxi=guess.half_width() / 100.0)
    # the order-5 wave equation carries no quintic nonlinearity
    config = SolverConfig(order=5, quintic_nonlinear=False, rtol=1e-10, atol=1e-13)

    assert _propagation_error(wave, coeffs, config) < 1e-3


def test_fixed_step_error_is_fifth_order() -> None:
    coeffs = _sample_coeffs()
    initial = _sample_gaussian()
    reference = simulate(initial, coeffs, SolverConfig(order=3, dt=0.0125), [1.0])[-1]
    errors = []
    for dt in (0.1, 0.05):
        run = simulate(initial, coeffs, SolverConfig(order=3, dt=dt), [1.0])[-1]
        errors.append(float(np.max(np.abs(run.eta_bar - reference.eta_bar))))

    assert 24.0 < errors[0] / errors[1] < 40.0


def test_tighter_tolerance_reduces_the_error() -> None:
    coeffs = _sample_coeffs()
    initial = _sample_gaussian()
    reference = simulate(initial, coeffs, SolverConfig(order=3, dt=0.0125), [1.0])[-1]
    errors = []
    for rtol in (1e-6, 1e-6 / 32.0):
        run = simulate(initial, coeffs, SolverConfig(order=3, rtol=rtol, atol=1e-2 * rtol), [1.0])[-1]
        errors.append(float(np.max(np.abs(run.eta_bar - reference.eta_bar))))

    assert errors[1] < 0.5 * errors[0]

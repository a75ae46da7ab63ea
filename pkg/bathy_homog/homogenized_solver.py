"""Pseudo-spectral solver for the averaged (xxt) homogenized system.

The unknowns are the averaged surface η̄ and discharge q̄ on a periodic
grid over [−L, L). Mass is advanced in conservation form, η̄_t = −q̄_x, and
the momentum equation is solved for q̄_t by dividing every Fourier mode by
the symbol of the dispersive operator,

    q̂_t = (−c²ik η̂ + N̂) / (1 + δ²μk² [+ δ⁴(ν₁ + ν₂ − μ²)k⁴]),

so no linear system is ever assembled. N collects the nonlinear terms of
the requested order; all x-derivatives are spectral.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Final, Sequence

import numpy as np
from scipy import fft as sp_fft

from .coefficients import HomogenizedCoefficients
from .dispersion import angular_frequency, elliptic_symbol
from .runge_kutta import TABLEAUX, embedded_step, error_norm, step_factor
from .unit_cell import PeriodicProfile, bracket, cell_function, fluctuation, nested_bracket

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC: Final[bytes] = b"BHCKPT01"
_HEADER: Final[struct.Struct] = struct.Struct("<8sQdd")
BAND_LIMIT_TOL: Final[float] = 1e-12
DEALIAS_RULES: Final[dict[str, float]] = {"two_thirds": 2.0 / 3.0, "half": 0.5}


class SolverError(Exception):
    """Raised when the homogenized solver cannot proceed."""


def periodic_grid(L: float, M: int) -> np.ndarray:
    """M uniformly spaced points on [−L, L)."""
    if not L > 0.0:
        raise SolverError(f"Half-length L must be positive, got {L}.")
    if M < 16 or M & (M - 1):
        raise SolverError(f"M must be a power of two >= 16, got {M}.")
    return -L + 2.0 * L * np.arange(M) / M


@dataclass(frozen=True, eq=False)
class FieldState:
    x: np.ndarray
    eta_bar: np.ndarray
    q_bar: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        M = self.x.size
        if M < 16 or M & (M - 1):
            raise SolverError(f"Grid size must be a power of two >= 16, got {M}.")
        if self.eta_bar.shape != self.x.shape or self.q_bar.shape != self.x.shape:
            raise SolverError("eta_bar and q_bar must match the grid.")
        if not (np.all(np.isfinite(self.eta_bar)) and np.all(np.isfinite(self.q_bar))):
            raise SolverError(f"Non-finite field values at t={self.t}.")

    @classmethod
    def at_rest(cls, L: float, M: int) -> FieldState:
        x = periodic_grid(L, M)
        return cls(x, np.zeros(M), np.zeros(M))

    @property
    def M(self) -> int:
        return int(self.x.size)

    @property
    def L(self) -> float:
        return float(-self.x[0])

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.M

    def mass(self) -> float:
        """Domain mean of η̄."""
        return float(np.mean(self.eta_bar))

    def packed(self) -> np.ndarray:
        return np.concatenate((self.eta_bar, self.q_bar))

    def with_packed(self, y: np.ndarray, t: float) -> FieldState:
        M = self.M
        return FieldState(self.x, y[:M].copy(), y[M:].copy(), float(t))


@dataclass(frozen=True)
class SolverConfig:
    order: int = 3
    delta: float = 1.0
    dealias: bool = True
    dealias_rule: str = "two_thirds"
    dt: float | None = None
    rtol: float = 1e-8
    atol: float = 1e-10
    final_time: float = 1.0
    quintic_nonlinear: bool = True
    nonlinear: bool = True
    tableau: str = "dopri54"
    dt_min: float = 1e-10
    max_steps: int = 5_000_000

    def __post_init__(self) -> None:
        if self.order not in (3, 4, 5):
            raise SolverError(f"order must be 3, 4 or 5, got {self.order}.")
        if not self.delta > 0.0:
            raise SolverError(f"delta must be positive, got {self.delta}.")
        if not self.final_time > 0.0:
            raise SolverError(f"final_time must be positive, got {self.final_time}.")
        if self.dt is not None and not self.dt > 0.0:
            raise SolverError(f"Fixed dt must be positive, got {self.dt}.")
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise SolverError("rtol and atol must be positive.")
        if self.tableau not in TABLEAUX:
            raise SolverError(f"Unknown tableau {self.tableau!r}; choose from {sorted(TABLEAUX)}.")
        if self.dealias_rule not in DEALIAS_RULES:
            raise SolverError(f"Unknown dealias rule {self.dealias_rule!r}; choose from {sorted(DEALIAS_RULES)}.")

    @property
    def adaptive(self) -> bool:
        return self.dt is None


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Wavenumbers, dealiasing mask and elliptic symbol for one grid and configuration."""

    M: int
    k: np.ndarray
    mask: np.ndarray
    symbol: np.ndarray
    uses_quintic: bool = field(default=False)

    @classmethod
    def build(cls, state: FieldState, coeffs: HomogenizedCoefficients, config: SolverConfig) -> SpectralGrid:
        M = state.M
        k = 2.0 * np.pi * sp_fft.rfftfreq(M, d=state.dx)
        if config.dealias:
            cutoff = DEALIAS_RULES[config.dealias_rule] * np.max(np.abs(k))
            mask = (np.abs(k) <= cutoff).astype(float)
        else:
            mask = np.ones_like(k)
        if M % 2 == 0:
            mask[-1] = 0.0
        symbol = elliptic_symbol(k, coeffs, config.delta, config.order)
        if np.any(symbol <= 0.0):
            bad = float(k[np.argmax(symbol <= 0.0)])
            raise SolverError(
                f"Elliptic symbol is nonpositive at k={bad:.6g}: nu1 + nu2 - mu^2 = {coeffs.stability_margin:.3e}."
            )
        uses_quintic = config.order == 5 and config.quintic_nonlinear
        if uses_quintic and coeffs.betas is None:
            raise SolverError("Fifth-order nonlinear terms need a translation-even profile.")
        return cls(M, k, mask, symbol, uses_quintic)

    def derivatives(self, u_hat: np.ndarray, count: int) -> list[np.ndarray]:
        """[u, u_x, …] up to ``count`` derivatives from a masked transform."""
        ik = 1j * self.k
        out = []
        term = u_hat
        for _ in range(count + 1):
            out.append(sp_fft.irfft(term, n=self.M))
            term = term * ik
        return out


def _nonlinear_terms(
    eta: Sequence[np.ndarray],
    q: Sequence[np.ndarray],
    coeffs: HomogenizedCoefficients,
    config: SolverConfig,
    uses_quintic: bool,
) -> np.ndarray:
    e, ex, exx, exxx = eta
    u, ux, uxx, uxxx = q
    d = config.delta
    g, c2 = coeffs.g, coeffs.c**2
    total = -d * coeffs.theta[2] * (c2 * e * ex + 2.0 * u * ux)
    total -= d**2 * (coeffs.alpha1 * u * e * ux + coeffs.alpha2 * u * u * ex + g * coeffs.alpha3 * e * e * ex)
    if config.order >= 4:
        total -= d**3 * (
            coeffs.alpha4 / g * u**3 * ux
            + coeffs.alpha5 * e * e * u * ux
            + coeffs.alpha6 * u * u * e * ex
            + g * coeffs.alpha7 * e**3 * ex
            + coeffs.alpha8 * (2.0 * ux * uxx + c2 * e * exxx)
            + coeffs.alpha9 * (5.0 * c2 * ex * exx + 2.0 * u * uxxx)
        )
    if uses_quintic:
        b = coeffs.beta
        total -= d**4 * (
            b(1) * u**4 * ex
            + b(2) * e**4 * ex
            + b(3) * e * e * u * u * ex
            + b(4) * e * u**3 * ux
            + b(5) * ex**3
            + b(6) * e * ex * exx
            + b(7) * e * e * exxx
            + b(8) * ex * u * uxx
            + b(9) * u * e**3 * ux
            + b(10) * exx * u * ux
            + b(11) * ex * ux * ux
            + b(12) * u * u * exxx
            + b(13) * e * ux * uxx
            + b(14) * e * u * uxxx
        )
    return total


def _tendencies(
    eta: np.ndarray,
    q: np.ndarray,
    coeffs: HomogenizedCoefficients,
    config: SolverConfig,
    grid: SpectralGrid,
) -> tuple[np.ndarray, np.ndarray]:
    eta_hat = sp_fft.rfft(eta) * grid.mask
    q_hat = sp_fft.rfft(q) * grid.mask
    eta_d = grid.derivatives(eta_hat, 3)
    q_d = grid.derivatives(q_hat, 3)
    ik = 1j * grid.k
    eta_t = sp_fft.irfft(-ik * q_hat, n=grid.M)
    q_t_hat = -coeffs.c**2 * ik * eta_hat
    if config.nonlinear:
        nonlinear = _nonlinear_terms(eta_d, q_d, coeffs, config, grid.uses_quintic)
        q_t_hat = q_t_hat + sp_fft.rfft(nonlinear) * grid.mask
    q_t_hat = q_t_hat / grid.symbol
    return eta_t, sp_fft.irfft(q_t_hat, n=grid.M)


def rhs(
    state: FieldState,
    coeffs: HomogenizedCoefficients,
    config: SolverConfig,
    grid: SpectralGrid | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(η̄_t, q̄_t) of the averaged system at the configured order."""
    grid = grid or SpectralGrid.build(state, coeffs, config)
    return _tendencies(state.eta_bar, state.q_bar, coeffs, config, grid)


def apply_inverse_elliptic(
    rhs_momentum: np.ndarray, coeffs: HomogenizedCoefficients, config: SolverConfig, dx: float
) -> np.ndarray:
    """Divide each Fourier mode of a periodic array by the dispersive symbol."""
    M = rhs_momentum.size
    k = 2.0 * np.pi * sp_fft.rfftfreq(M, d=dx)
    symbol = elliptic_symbol(k, coeffs, config.delta, config.order)
    if np.any(symbol <= 0.0):
        raise SolverError("Elliptic symbol is nonpositive: the fifth-order system is unstable.")
    return sp_fft.irfft(sp_fft.rfft(rhs_momentum) / symbol, n=M)


def _packed_rhs(coeffs: HomogenizedCoefficients, config: SolverConfig, grid: SpectralGrid):
    M = grid.M

    def f(y: np.ndarray) -> np.ndarray:
        eta_t, q_t = _tendencies(y[:M], y[M:], coeffs, config, grid)
        return np.concatenate((eta_t, q_t))

    return f


def _initial_dt(state: FieldState, coeffs: HomogenizedCoefficients) -> float:
    return 0.25 * state.dx / coeffs.c


def _advance(
    state: FieldState,
    coeffs: HomogenizedCoefficients,
    config: SolverConfig,
    grid: SpectralGrid,
    dt: float,
) -> tuple[FieldState, float, float]:
    """One accepted step: (new state, dt taken, suggested next dt)."""
    tableau = TABLEAUX[config.tableau]
    f = _packed_rhs(coeffs, config, grid)
    y = state.packed()
    if not config.adaptive:
        y_new, _ = embedded_step(f, y, dt, tableau)
        if not np.all(np.isfinite(y_new)):
            raise SolverError(f"Non-finite values after fixed step at t={state.t + dt}.")
        return state.with_packed(y_new, state.t + dt), dt, dt
    while True:
        if dt < config.dt_min:
            raise SolverError(f"Time step underflow (dt={dt:.3e}) at t={state.t:.6g}.")
        y_new, err_vec = embedded_step(f, y, dt, tableau)
        if not np.all(np.isfinite(y_new)):
            dt *= 0.25
            logger.debug("Non-finite trial step at t=%.6g, retrying with dt=%.3e", state.t, dt)
            continue
        err = error_norm(err_vec, y, y_new, config.rtol, config.atol)
        factor = step_factor(err, tableau.embedded_order + 1)
        if err <= 1.0:
            return state.with_packed(y_new, state.t + dt), dt, dt * factor
        dt *= min(factor, 0.9)


def step(
    state: FieldState,
    coeffs: HomogenizedCoefficients,
    config: SolverConfig,
    dt: float | None = None,
    grid: SpectralGrid | None = None,
) -> FieldState:
    """Advance by one accepted embedded Runge–Kutta step."""
    grid = grid or SpectralGrid.build(state, coeffs, config)
    trial = dt if dt is not None else (config.dt or _initial_dt(state, coeffs))
    return _advance(state, coeffs, config, grid, trial)[0]


def band_limit_ratio(state: FieldState) -> float:
    """Largest amplitude in the top third of the spectrum relative to the peak amplitude."""
    ratios = []
    for u in (state.eta_bar, state.q_bar):
        spectrum = np.abs(sp_fft.rfft(u))
        peak = float(np.max(spectrum))
        if peak > 0.0:
            ratios.append(float(np.max(spectrum[2 * spectrum.size // 3 :])) / peak)
    return max(ratios, default=0.0)


def simulate(
    initial: FieldState,
    coeffs: HomogenizedCoefficients,
    config: SolverConfig,
    output_times: Sequence[float] | None = None,
) -> list[FieldState]:
    """Integrate from ``initial`` and return snapshots at the requested times."""
    times = [config.final_time] if output_times is None else [float(t) for t in output_times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise SolverError("Output times must be strictly increasing.")
    if times and times[0] < initial.t:
        raise SolverError(f"Output time {times[0]} precedes the initial time {initial.t}.")
    ratio = band_limit_ratio(initial)
    if ratio > BAND_LIMIT_TOL:
        logger.warning("Initial data is not band-limited on this grid (tail/peak = %.3e).", ratio)

    grid = SpectralGrid.build(initial, coeffs, config)
    mass0 = initial.mass()
    state = initial
    dt = config.dt or _initial_dt(initial, coeffs)
    snapshots: list[FieldState] = []
    steps = 0
    for target in times:
        while state.t < target - 1e-12 * max(1.0, abs(target)):
            remaining = target - state.t
            trial = min(dt, remaining)
            state, taken, dt_next = _advance(state, coeffs, config, grid, trial)
            if config.adaptive:
                # a step shortened to land on an output time keeps the previous estimate
                dt = dt_next if taken < remaining else max(dt, dt_next)
            steps += 1
            if steps > config.max_steps:
                raise SolverError(f"Exceeded {config.max_steps} steps before t={target}.")
            if steps % 1000 == 0:
                logger.debug("step %d: t=%.6g dt=%.3e", steps, state.t, dt)
        state = replace(state, t=target)
        snapshots.append(state)
        drift = abs(state.mass() - mass0)
        if drift > 1e-12 * max(1.0, abs(mass0), float(np.max(np.abs(state.eta_bar)))):
            logger.warning("Mass drift %.3e at t=%.6g.", drift, target)
    logger.debug("Homogenized run order %d finished after %d steps.", config.order, steps)
    return snapshots


# --------------------------------------------------------------------------- #
# Fast-scale reconstruction
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class FastScaleField:
    x: np.ndarray
    eta: np.ndarray
    q: np.ndarray
    t: float


def spectral_resample(u: np.ndarray, M_fine: int) -> np.ndarray:
    """Trigonometric interpolation of a periodic sample onto M_fine ≥ M points."""
    M = u.size
    if M_fine == M:
        return u.copy()
    if M_fine < M:
        raise SolverError(f"Cannot resample {M} points down to {M_fine}.")
    coeffs = sp_fft.rfft(u)
    out = np.zeros(M_fine // 2 + 1, dtype=complex)
    out[: coeffs.size] = coeffs
    out[M // 2] *= 0.5
    return sp_fft.irfft(out, n=M_fine) * (M_fine / M)


def fast_scale_reconstruction(
    state: FieldState,
    coeffs: HomogenizedCoefficients,
    H: PeriodicProfile,
    delta: float,
    config: SolverConfig | None = None,
    points_per_period: int = 16,
) -> FastScaleField:
    """Add the cell-scale corrections back onto the averaged fields.

    q̄_t comes from the governing equations at the configured order, never
    from differencing snapshots in time. Brackets are evaluated at y = x/δ.
    """
    config = config or SolverConfig(delta=delta)
    if config.delta != delta:
        config = replace(config, delta=delta)
    M_fine = state.M
    while 2.0 * state.L / M_fine > delta / points_per_period:
        M_fine *= 2
    _, q_t = rhs(state, coeffs, config)

    eta = spectral_resample(state.eta_bar, M_fine)
    q = spectral_resample(state.q_bar, M_fine)
    qt = spectral_resample(q_t, M_fine)
    x = periodic_grid(state.L, M_fine)
    k = 2.0 * np.pi * sp_fft.rfftfreq(M_fine, d=2.0 * state.L / M_fine)

    def dx(u: np.ndarray, order: int = 1) -> np.ndarray:
        return sp_fft.irfft(sp_fft.rfft(u) * (1j * k) ** order, n=M_fine)

    y = np.mod(x / delta, 1.0)
    h1, h2, h3 = (cell_function(H, p) for p in (1, 2, 3))
    b1 = bracket(h1)(y)
    b2 = bracket(h2)(y)
    bb1 = nested_bracket(h1, 2)(y)
    f2 = fluctuation(h2)(y)
    f3 = fluctuation(h3)(y)

    g, c2 = coeffs.g, coeffs.c**2
    q_x = dx(q)
    first = -b1 * qt / g - f2 * q * q / (2.0 * g)
    second = (
        bb1 * dx(qt)
        + 0.5 * b2 * dx(q * q)
        + b2 * eta * qt
        + f3 * eta * q * q
        - 2.0 * b2 * q * q_x
    ) / g
    eta_full = eta + delta * first + delta**2 * second
    q_full = q + delta**2 * (bb1 * c2 * dx(q, 2) + b2 * q * qt) / g
    return FastScaleField(x, eta_full, q_full, state.t)


# --------------------------------------------------------------------------- #
# Checkpoints
# --------------------------------------------------------------------------- #


def save_checkpoint(path: Path | str, state: FieldState) -> Path:
    """Binary checkpoint: magic, M, L, t, then η̄ and q̄ as little-endian float64."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(CHECKPOINT_MAGIC, state.M, state.L, state.t)
    body = state.eta_bar.astype("<f8").tobytes() + state.q_bar.astype("<f8").tobytes()
    path.write_bytes(header + body)
    return path


def load_checkpoint(path: Path | str) -> FieldState:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SolverError(f"Cannot read checkpoint {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise SolverError(f"Checkpoint {path} is truncated.")
    magic, M, L, t = _HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise SolverError(f"{path} is not a checkpoint file.")
    expected = _HEADER.size + 16 * M
    if len(raw) != expected:
        raise SolverError(f"Checkpoint {path} has {len(raw)} bytes, expected {expected}.")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    return FieldState(periodic_grid(L, int(M)), data[:M].copy(), data[M:].copy(), float(t))


def linear_phase_speed(
    k: float, coeffs: HomogenizedCoefficients, config: SolverConfig, L: float, M: int, amplitude: float = 1e-3
) -> float:
    """Phase speed of mode k measured from a linearized run over a quarter period.

    The initial right-going mode η = ε cos kx, q = (ω/k)η is evolved for
    T/4 and the phase of mode k is read off its Fourier coefficient.
    """
    state = FieldState.at_rest(L, M)
    mode = int(round(k * L / math.pi))
    if mode < 1 or mode >= M // 3:
        raise SolverError(f"Wavenumber {k} is not a resolved grid mode.")
    k = mode * math.pi / L
    omega = float(angular_frequency(k, coeffs, config.delta, config.order))
    eta0 = amplitude * np.cos(k * state.x)
    state = FieldState(state.x, eta0, omega / k * eta0)
    quarter = 0.5 * math.pi / omega
    linear = replace(config, final_time=quarter, nonlinear=False)
    final = simulate(state, coeffs, linear, [quarter])[-1]
    c0 = sp_fft.rfft(eta0)[mode]
    c1 = sp_fft.rfft(final.eta_bar)[mode]
    phase = -float(np.angle(c1 / c0))
    return phase / (k * quarter)

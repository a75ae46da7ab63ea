"""Traveling-wave solutions of the homogenized xxt system.

Substituting η(x − Vt), q = Vη turns the averaged equations into an ODE in
ξ = x − Vt. At order 3 this is a particle in the potential U(η),

    η″ = F(η) = (γ₁η − γ₂η² + γ₃η³)/(μ̂V²),    U(η) = −∫₀^η F,

whose separatrix is the solitary wave and whose closed orbits are periodic
waves. At order 5 the equation gains η⁴, (η′)², ηη″ and η⁗ terms,

    −γ₁η + γ₂η² − γ₃η³ + γ₄η⁴ + γ₅(η′)² + γ₆(2ηη″ − (η′)²) + μ̂V²η″ − ν̂η⁗ = 0,

which is solved as a boundary-value problem by Newton's method starting
from the order-3 wave.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Final

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .coefficients import HomogenizedCoefficients

logger = logging.getLogger(__name__)

SEPARATRIX_START: Final[float] = 1e-9
ODE_RTOL: Final[float] = 1e-12
ODE_ATOL: Final[float] = 1e-20
WINDOW_HALF_WIDTHS: Final[float] = 40.0
POINTS_PER_HALF_WIDTH: Final[int] = 50
NEWTON_TOL: Final[float] = 1e-10
NEWTON_MAX_ITER: Final[int] = 60
TRIVIAL_FRACTION: Final[float] = 1e-4


class TravelingWaveError(Exception):
    """Raised when a traveling wave cannot be constructed."""


class NoSolitaryWaveError(TravelingWaveError):
    """Raised when no homoclinic orbit exists at the requested speed."""


class TrivialSolutionError(TravelingWaveError):
    """Raised when the fifth-order Newton iteration collapses to η ≡ 0."""


@dataclass(frozen=True)
class TravelingWaveConstants:
    V: float
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float
    gamma5: float
    gamma6: float
    mu_hat: float
    nu_hat: float
    beta_hat1: float
    beta_hat2: float
    beta_hat3: float
    beta_hat4: float
    beta_hat5: float

    @property
    def stiffness(self) -> float:
        """μ̂V², the coefficient of η″."""
        return self.mu_hat * self.V**2


def gammas(coeffs: HomogenizedCoefficients, V: float, delta: float = 1.0) -> TravelingWaveConstants:
    if not V > 0.0:
        raise TravelingWaveError(f"Wave speed must be positive, got {V}.")
    if not delta > 0.0:
        raise TravelingWaveError(f"delta must be positive, got {delta}.")
    g, c2, V2 = coeffs.g, coeffs.c**2, V * V
    d2, d3 = delta**2, delta**3
    bh2 = delta * coeffs.theta[2]
    bh1 = bh2 * c2
    bh3 = -d2 * coeffs.alpha1
    bh4 = -d2 * coeffs.alpha2
    bh5 = -g * d2 * coeffs.alpha3
    return TravelingWaveConstants(
        V=float(V),
        gamma1=V2 - c2,
        gamma2=0.5 * bh1 + V2 * bh2,
        gamma3=((bh3 + bh4) * V2 + bh5) / 3.0,
        gamma4=0.25 * d3 * (coeffs.alpha4 * V2 * V2 / g + (coeffs.alpha5 + coeffs.alpha6) * V2 + g * coeffs.alpha7),
        gamma5=d3 * (coeffs.alpha8 * V2 + 2.5 * coeffs.alpha9 * c2),
        gamma6=d3 * (0.5 * coeffs.alpha8 * c2 + coeffs.alpha9 * V2),
        mu_hat=d2 * coeffs.mu,
        nu_hat=delta**4 * V2 * coeffs.stability_margin,
        beta_hat1=bh1,
        beta_hat2=bh2,
        beta_hat3=bh3,
        beta_hat4=bh4,
        beta_hat5=bh5,
    )


def _require_dispersive(tw: TravelingWaveConstants) -> float:
    stiffness = tw.stiffness
    if not stiffness > 0.0:
        raise TravelingWaveError("No dispersive balance: mu_hat * V^2 must be positive (flat bottom?).")
    return stiffness


def potential(eta: np.ndarray | float, tw: TravelingWaveConstants) -> tuple[np.ndarray, np.ndarray]:
    """(U(η), F(η)) of the order-3 mechanical analogy, with U(0) = 0."""
    stiffness = _require_dispersive(tw)
    e = np.asarray(eta, dtype=float)
    force = (tw.gamma1 * e - tw.gamma2 * e**2 + tw.gamma3 * e**3) / stiffness
    energy = (-0.5 * tw.gamma1 * e**2 + tw.gamma2 * e**3 / 3.0 - 0.25 * tw.gamma3 * e**4) / stiffness
    return energy, force


def _smallest_positive_root(a: float, b: float, c: float) -> float | None:
    """Smallest positive real root of aη² + bη + c."""
    coeffs = [a, b, c] if a != 0.0 else [b, c]
    if len(coeffs) == 2 and b == 0.0:
        return None
    roots = np.roots(coeffs)
    real = [r.real for r in roots if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and r.real > 0.0]
    return min(real) if real else None


@dataclass(frozen=True)
class WellGeometry:
    well_bottom: float
    well_depth: float
    separatrix_crossing: float
    curvature: float

    @property
    def harmonic_period(self) -> float:
        return 2.0 * math.pi / math.sqrt(self.curvature)


def separatrix_amplitude(tw: TravelingWaveConstants) -> float:
    """Crest height of the solitary wave: the first positive zero of U."""
    if tw.gamma1 <= 0.0:
        raise NoSolitaryWaveError(f"Subcritical speed V={tw.V}: gamma1 = V^2 - c^2 must be positive.")
    root = _smallest_positive_root(0.25 * tw.gamma3, -tw.gamma2 / 3.0, 0.5 * tw.gamma1)
    if root is None:
        raise NoSolitaryWaveError(f"The potential has no separatrix crossing at V={tw.V}.")
    return root


def well_geometry(tw: TravelingWaveConstants) -> WellGeometry:
    stiffness = _require_dispersive(tw)
    crossing = separatrix_amplitude(tw)
    bottom = _smallest_positive_root(tw.gamma3, -tw.gamma2, tw.gamma1)
    if bottom is None or bottom >= crossing:
        raise NoSolitaryWaveError(f"The potential has no well below the separatrix at V={tw.V}.")
    depth = float(potential(bottom, tw)[0])
    curvature = -(tw.gamma1 - 2.0 * tw.gamma2 * bottom + 3.0 * tw.gamma3 * bottom**2) / stiffness
    return WellGeometry(bottom, depth, crossing, curvature)


@dataclass(frozen=True, eq=False)
class TravelingWaveSolution:
    """A traveling wave sampled on a uniform ξ-grid; q = V·η."""

    xi: np.ndarray
    eta: np.ndarray
    V: float
    order: int
    energy_level: float | None = None
    eta_prime: np.ndarray | None = None
    period: float | None = None

    def __post_init__(self) -> None:
        if self.order not in (3, 5):
            raise TravelingWaveError(f"Traveling-wave order must be 3 or 5, got {self.order}.")
        if self.xi.shape != self.eta.shape or self.xi.ndim != 1 or self.xi.size < 5:
            raise TravelingWaveError("xi and eta must be matching 1-D arrays.")

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @property
    def amplitude(self) -> float:
        return float(np.max(self.eta))

    @property
    def q(self) -> np.ndarray:
        return self.V * self.eta

    @property
    def is_periodic(self) -> bool:
        return self.period is not None

    def half_width(self) -> float:
        """Half width at half maximum, measured on the decaying flank ξ > 0."""
        peak = int(np.argmax(self.eta))
        half = 0.5 * self.eta[peak]
        flank = self.eta[peak:]
        below = np.nonzero(flank < half)[0]
        if below.size == 0:
            raise TravelingWaveError("Wave does not fall below half its height inside the window.")
        j = peak + int(below[0])
        frac = (self.eta[j - 1] - half) / (self.eta[j - 1] - self.eta[j])
        return float(self.xi[j - 1] + frac * self.dxi - self.xi[peak])

    def sample(self, x: np.ndarray, center: float = 0.0) -> np.ndarray:
        """η at positions x with the crest at ``center`` (zero outside a solitary window)."""
        spline = CubicSpline(self.xi, self.eta)
        s = np.asarray(x, dtype=float) - center
        if self.period is not None:
            s = np.mod(s + 0.5 * self.period, self.period) - 0.5 * self.period
            return spline(s)
        out = np.zeros_like(s)
        inside = (s >= self.xi[0]) & (s <= self.xi[-1])
        out[inside] = spline(s[inside])
        return out


def _mirrored_orbit(dense, s_peak: float, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate an orbit integrated on [0, s_peak] as an even pulse centred at ξ = 0."""
    s = s_peak - np.abs(xi)
    y = dense(s)
    return y[0], -np.sign(xi) * y[1]


def solitary_wave_o3(
    coeffs: HomogenizedCoefficients,
    V: float,
    delta: float = 1.0,
    xi_window: float | None = None,
    dxi: float | None = None,
) -> TravelingWaveSolution:
    """Solitary wave of the order-3 system from the separatrix of U.

    The orbit leaves η(0) = 10⁻⁹ along the unstable direction, is stopped at
    the crest (η′ = 0) and mirrored. Outside the integrated stretch the tail
    is continued by its exact linearization η₀·exp(−κ|ξ − ξ₀|).
    """
    tw = gammas(coeffs, V, delta)
    stiffness = _require_dispersive(tw)
    amplitude = separatrix_amplitude(tw)
    kappa = math.sqrt(tw.gamma1 / stiffness)

    def rhs(_s: float, y: np.ndarray) -> list[float]:
        return [y[1], float(potential(y[0], tw)[1])]

    def crest(_s: float, y: np.ndarray) -> float:
        return y[1]

    crest.terminal = True  # type: ignore[attr-defined]
    crest.direction = -1  # type: ignore[attr-defined]

    eta0 = SEPARATRIX_START
    span = (4.0 * math.log(amplitude / eta0) + 20.0) / kappa
    sol = solve_ivp(
        rhs,
        (0.0, span),
        [eta0, kappa * eta0],
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        dense_output=True,
        events=crest,
    )
    if not sol.success or sol.t_events[0].size == 0:
        raise NoSolitaryWaveError(f"No turning point on the separatrix at V={V}: {sol.message}")
    s_peak = float(sol.t_events[0][0])
    dense = sol.sol
    peak_height = float(dense(s_peak)[0])
    s_half = brentq(lambda s: dense(s)[0] - 0.5 * peak_height, 0.0, s_peak, xtol=1e-14)
    hw = s_peak - s_half

    window = WINDOW_HALF_WIDTHS * hw if xi_window is None else float(xi_window)
    step = hw / POINTS_PER_HALF_WIDTH if dxi is None else float(dxi)
    n = int(math.ceil(window / step))
    xi = step * np.arange(-n, n + 1)
    eta = np.empty_like(xi)
    eta_prime = np.empty_like(xi)
    core = np.abs(xi) <= s_peak
    eta[core], eta_prime[core] = _mirrored_orbit(dense, s_peak, xi[core])
    tail = ~core
    eta[tail] = eta0 * np.exp(-kappa * (np.abs(xi[tail]) - s_peak))
    eta_prime[tail] = -np.sign(xi[tail]) * kappa * eta[tail]
    logger.debug(
        "Order-3 solitary wave V=%.10g: amplitude=%.10g (analytic %.10g), half-width=%.6g, %d points",
        V,
        peak_height,
        amplitude,
        hw,
        xi.size,
    )
    return TravelingWaveSolution(xi, eta, float(V), 3, energy_level=0.0, eta_prime=eta_prime)


def periodic_wave_o3(
    coeffs: HomogenizedCoefficients,
    V: float,
    delta: float = 1.0,
    E: float | None = None,
    points: int = 1024,
) -> TravelingWaveSolution:
    """One period of the closed orbit with energy E ∈ (min U, 0), crest at ξ = 0."""
    tw = gammas(coeffs, V, delta)
    geometry = well_geometry(tw)
    if E is None or not geometry.well_depth < E < 0.0:
        raise TravelingWaveError(
            f"Energy must lie in ({geometry.well_depth:.6g}, 0) for a periodic wave, got {E}."
        )

    def shifted(eta: float) -> float:
        return float(potential(eta, tw)[0]) - E

    eta_a = brentq(shifted, 0.0, geometry.well_bottom, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    eta_b = brentq(
        shifted, geometry.well_bottom, geometry.separatrix_crossing, xtol=1e-15, rtol=4 * np.finfo(float).eps
    )

    def rhs(_s: float, y: np.ndarray) -> list[float]:
        return [y[1], float(potential(y[0], tw)[1])]

    def crest(_s: float, y: np.ndarray) -> float:
        return y[1]

    crest.terminal = True  # type: ignore[attr-defined]
    crest.direction = -1  # type: ignore[attr-defined]

    span = 4.0 * geometry.harmonic_period
    limit = 1e6 * geometry.harmonic_period
    while True:
        sol = solve_ivp(
            rhs,
            (0.0, span),
            [eta_a, 0.0],
            method="DOP853",
            rtol=ODE_RTOL,
            atol=ODE_ATOL,
            dense_output=True,
            events=crest,
        )
        if sol.t_events[0].size:
            break
        if span > limit:
            raise TravelingWaveError(f"Periodic orbit at E={E} did not close within xi={span:.3g}.")
        span *= 4.0
    s_peak = float(sol.t_events[0][0])
    period = 2.0 * s_peak
    xi = np.linspace(-s_peak, s_peak, points, endpoint=False)
    eta, eta_prime = _mirrored_orbit(sol.sol, s_peak, xi)
    logger.debug("Order-3 periodic wave V=%.10g E=%.6g: eta in [%.6g, %.6g], period %.6g", V, E, eta_a, eta_b, period)
    return TravelingWaveSolution(xi, eta, float(V), 3, energy_level=float(E), eta_prime=eta_prime, period=period)


def energy(solution: TravelingWaveSolution, tw: TravelingWaveConstants) -> np.ndarray:
    """½(η′)² + U(η) along an order-3 profile."""
    if solution.eta_prime is None:
        raise TravelingWaveError("The first integral needs the stored slope eta_prime.")
    return 0.5 * solution.eta_prime**2 + potential(solution.eta, tw)[0]


def ode_residual(solution: TravelingWaveSolution, coeffs: HomogenizedCoefficients, delta: float = 1.0) -> float:
    """max |η″ − F(η)| with a fourth-order second-difference stencil on interior points."""
    tw = gammas(coeffs, solution.V, delta)
    e = solution.eta
    h = solution.dxi
    d2 = (-e[4:] + 16.0 * e[3:-1] - 30.0 * e[2:-2] + 16.0 * e[1:-3] - e[:-4]) / (12.0 * h * h)
    return float(np.max(np.abs(d2 - potential(e[2:-2], tw)[1])))


# --------------------------------------------------------------------------- #
# Fifth order: banded Newton on the half window
# --------------------------------------------------------------------------- #


def _half_extension(eta: np.ndarray) -> np.ndarray:
    """Pad unknowns η_0..η_{n-1} with the even mirror at ξ = 0 and clamped end at ξ = W."""
    n = eta.size
    ext = np.empty(n + 4)
    ext[2 : n + 2] = eta
    ext[1] = eta[1]
    ext[0] = eta[2]
    ext[n + 2] = 0.0
    ext[n + 3] = eta[n - 1]
    return ext


def _half_source(n: int) -> np.ndarray:
    """Unknown index feeding each padded slot, −1 where the slot is identically zero."""
    src = np.empty(n + 4, dtype=int)
    src[2 : n + 2] = np.arange(n)
    src[1] = 1
    src[0] = 2
    src[n + 2] = -1
    src[n + 3] = n - 1
    return src


def _stencils(ext: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m, p1, m1, p2, m2 = ext[2:-2], ext[3:-1], ext[1:-3], ext[4:], ext[:-4]
    d1 = (p1 - m1) / (2.0 * h)
    d2 = (p1 - 2.0 * m + m1) / h**2
    d4 = (p2 - 4.0 * p1 + 6.0 * m - 4.0 * m1 + m2) / h**4
    return d1, d2, d4


def _fifth_order_residual(eta: np.ndarray, tw: TravelingWaveConstants, h: float) -> np.ndarray:
    ext = _half_extension(eta)
    d1, d2, d4 = _stencils(ext, h)
    return (
        -tw.gamma1 * eta
        + tw.gamma2 * eta**2
        - tw.gamma3 * eta**3
        + tw.gamma4 * eta**4
        + (tw.gamma5 - tw.gamma6) * d1**2
        + 2.0 * tw.gamma6 * eta * d2
        + tw.stiffness * d2
        - tw.nu_hat * d4
    )


def _fifth_order_jacobian(eta: np.ndarray, tw: TravelingWaveConstants, h: float) -> np.ndarray:
    """Jacobian folded into (2, 2)-banded storage for ``solve_banded``."""
    n = eta.size
    ext = _half_extension(eta)
    src = _half_source(n)
    d1, d2, _ = _stencils(ext, h)
    coef2 = 2.0 * tw.gamma6 * eta + tw.stiffness
    diag = (
        -tw.gamma1
        + 2.0 * tw.gamma2 * eta
        - 3.0 * tw.gamma3 * eta**2
        + 4.0 * tw.gamma4 * eta**3
        + 2.0 * tw.gamma6 * d2
        - 2.0 * coef2 / h**2
        - 6.0 * tw.nu_hat / h**4
    )
    slope = (tw.gamma5 - tw.gamma6) * d1 / h
    side = coef2 / h**2 + 4.0 * tw.nu_hat / h**4
    far = np.full(n, -tw.nu_hat / h**4)
    rows = np.arange(n)
    ab = np.zeros((5, n))
    for offset, values in ((-2, far), (-1, side - slope), (0, diag), (1, side + slope), (2, far)):
        cols = src[rows + 2 + offset]
        keep = cols >= 0
        np.add.at(ab, (2 + rows[keep] - cols[keep], cols[keep]), values[keep])
    return ab


def solitary_wave_o5(
    coeffs: HomogenizedCoefficients,
    V: float,
    delta: float = 1.0,
    guess: TravelingWaveSolution | None = None,
    xi_window: float | None = None,
    dxi: float | None = None,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> TravelingWaveSolution:
    """Solitary wave of the order-5 system by Newton iteration from an order-3 guess.

    The even wave is solved on [0, W]: the mirror condition at ξ = 0 and
    η = η′ = 0 at ξ = W close the fourth-order problem.
    """
    tw = gammas(coeffs, V, delta)
    if tw.nu_hat <= 0.0 or tw.mu_hat <= 0.0:
        raise TrivialSolutionError("Without dispersion the fifth-order problem only admits eta = 0.")
    if guess is None:
        guess = solitary_wave_o3(coeffs, V, delta)
    hw = guess.half_width()
    window = WINDOW_HALF_WIDTHS * hw if xi_window is None else float(xi_window)
    step = min(hw / POINTS_PER_HALF_WIDTH, guess.dxi) if dxi is None else float(dxi)
    n = int(math.ceil(window / step))
    if n < 8:
        raise TravelingWaveError(f"Window {window} too small for grid spacing {step}.")
    h = window / n
    xi_half = h * np.arange(n)
    eta = guess.sample(xi_half)
    scale = guess.amplitude

    residual = _fifth_order_residual(eta, tw, h)
    norm = float(np.max(np.abs(residual)))
    for iteration in range(1, max_iter + 1):
        if norm < tol:
            break
        ab = _fifth_order_jacobian(eta, tw, h)
        try:
            update = solve_banded((2, 2), ab, -residual)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise TravelingWaveError(f"Singular Newton system at iteration {iteration}.") from exc
        lam = 1.0
        while True:
            trial = eta + lam * update
            trial_residual = _fifth_order_residual(trial, tw, h)
            trial_norm = float(np.max(np.abs(trial_residual)))
            if trial_norm <= (1.0 - 1e-4 * lam) * norm or lam < 1.0 / 64.0:
                break
            lam *= 0.5
        eta, residual, norm = trial, trial_residual, trial_norm
        logger.debug("Newton iteration %d: step %.3g, residual %.3e", iteration, lam, norm)
        if not np.all(np.isfinite(eta)):
            raise TravelingWaveError("Newton iteration produced non-finite values.")
    else:
        if norm >= tol:
            raise TravelingWaveError(f"Newton did not converge: residual {norm:.3e} after {max_iter} iterations.")

    if np.max(np.abs(eta)) < TRIVIAL_FRACTION * scale:
        raise TrivialSolutionError(f"Newton iteration collapsed to the trivial solution at V={V}.")
    xi = h * np.arange(-n, n + 1)
    full = np.concatenate(([0.0], eta[:0:-1], eta, [0.0]))
    logger.debug("Order-5 solitary wave V=%.10g: amplitude=%.10g on %d points", V, float(np.max(full)), full.size)
    return TravelingWaveSolution(xi, full, float(V), 5)


def bvp_residual(solution: TravelingWaveSolution, coeffs: HomogenizedCoefficients, delta: float = 1.0) -> float:
    """max |residual| of the order-5 traveling-wave equation at the interior grid points."""
    tw = gammas(coeffs, solution.V, delta)
    e = solution.eta
    d1, d2, d4 = _stencils(e, solution.dxi)
    m = e[2:-2]
    res = (
        -tw.gamma1 * m
        + tw.gamma2 * m**2
        - tw.gamma3 * m**3
        + tw.gamma4 * m**4
        + (tw.gamma5 - tw.gamma6) * d1**2
        + 2.0 * tw.gamma6 * m * d2
        + tw.stiffness * d2
        - tw.nu_hat * d4
    )
    return float(np.max(np.abs(res)))


def speed_for_amplitude(
    coeffs: HomogenizedCoefficients,
    delta: float,
    target_amplitude: float,
    order: int = 3,
    rtol: float = 1e-10,
) -> float:
    """Speed V > c whose solitary wave has the requested crest height."""
    if not target_amplitude > 0.0:
        raise TravelingWaveError(f"Target amplitude must be positive, got {target_amplitude}.")
    if order not in (3, 5):
        raise TravelingWaveError(f"order must be 3 or 5, got {order}.")
    c = coeffs.c

    def amp3(V: float) -> float:
        return separatrix_amplitude(gammas(coeffs, V, delta))

    v_lo = c * (1.0 + 1e-9)
    v_hi = c * 1.01
    while True:
        try:
            if amp3(v_hi) > target_amplitude:
                break
        except NoSolitaryWaveError as exc:
            raise TravelingWaveError(f"Amplitude {target_amplitude} is not attainable.") from exc
        v_hi = c + 2.0 * (v_hi - c)
        if v_hi > 2.0 * c:
            raise TravelingWaveError(f"Amplitude {target_amplitude} is not attainable below V = 2c.")
    v3 = brentq(lambda V: amp3(V) - target_amplitude, v_lo, v_hi, xtol=rtol * c, rtol=rtol)
    if order == 3:
        return v3

    def amp5(V: float) -> float:
        return solitary_wave_o5(coeffs, V, delta).amplitude - target_amplitude

    lo = max(v3 * 0.99, c * (1.0 + 1e-6))
    hi = v3 * 1.01
    f_lo, f_hi = amp5(lo), amp5(hi)
    for _ in range(4):
        if f_lo < 0.0 < f_hi:
            break
        if f_lo >= 0.0:
            lo = max(c + 0.5 * (lo - c), c * (1.0 + 1e-6))
            f_lo = amp5(lo)
        if f_hi <= 0.0:
            hi = c + 1.5 * (hi - c)
            f_hi = amp5(hi)
    else:
        if not f_lo < 0.0 < f_hi:
            raise TravelingWaveError(f"Could not bracket the order-5 speed for amplitude {target_amplitude}.")
    return brentq(amp5, lo, hi, xtol=rtol * c, rtol=rtol)
